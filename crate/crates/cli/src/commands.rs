use std::fmt::Write as _;

use kpzlab::checks::{rows_to_csv, run_check, CheckOptions, CheckRow, CHECKS};
use kpzlab::gff::{cutoff_for_scale, evaluate_field, sample_dgff, sample_spectral_gff, LatticeSampler};
use kpzlab::io::{config_hash, grid_bytes, write_fit_csv, FitSummary, GridSidecar};
use kpzlab::kpz::{
    beta_of_x, count_quadrangulations, euclidean_exponent, kpz_formula, kpz_inverse, quantum_exponent, Coupling,
    ExponentFit, QuantumConfig,
};
use kpzlab::liouville::{GridMeasure, LiouvilleParams, L2_GAMMA_MAX};
use kpzlab::StreamSeed;
use ndarray::Array2;
use serde::Serialize;

use crate::config::{Command, FieldKind, RunConfig};
use crate::error::CliError;
use crate::manifest::Outputs;
use crate::render;

fn gamma_warning(out: &mut Outputs, gamma: f64) {
    if gamma >= L2_GAMMA_MAX {
        out.warn(format!(
            "gamma = {gamma} >= sqrt(2): outside the L2 regime; moment-based diagnostics do not apply"
        ));
    }
}

fn cutoff_warning(out: &mut Outputs, cutoff: usize, eps: f64) {
    if !kpzlab::gff::spectral::satisfies_cutoff_rule(cutoff, eps) {
        out.warn(format!(
            "cutoff {cutoff} is below the rule {} for eps = {eps}",
            cutoff_for_scale(eps)
        ));
    }
}

fn write_grid(out: &mut Outputs, stem: &str, values: &Array2<f64>, sidecar: &GridSidecar) -> Result<(), CliError> {
    out.write(&format!("{stem}.bin"), &grid_bytes(values))?;
    out.write(&format!("{stem}.json"), (serde_json::to_string_pretty(sidecar)? + "\n").as_bytes())?;
    Ok(())
}

fn write_png(out: &mut Outputs, name: &str, img: &image::GrayImage) -> Result<(), CliError> {
    render::write_png(&out.path(name), img)?;
    out.record(name)
}

fn power_of_two(name: &str, n: usize, min: usize) -> Result<usize, CliError> {
    if n < min || !n.is_power_of_two() {
        return Err(CliError::Config(format!("{name} must be a power of two >= {min}, got {n}")));
    }
    Ok(n)
}

pub fn sample_field(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let n = cfg.resolution.unwrap_or(256);
    match cfg.field.unwrap_or_default() {
        FieldKind::Spectral => {
            let cutoff = cfg.cutoff.unwrap_or(n);
            let seed = StreamSeed::labelled(cfg.seed(), "field", 0);
            let field = sample_spectral_gff(cutoff, seed)?;
            let grid = evaluate_field(&field, n)?;
            write_grid(out, "field", &grid, &GridSidecar::spectral(n, cutoff, Some(seed)))?;
            write_png(out, "field.png", &render::heatmap(&grid, render::FIELD_RANGE))?;
            Ok(format!("spectral field, cutoff {cutoff}, {n} x {n} cell centres"))
        }
        FieldKind::Dgff => {
            let f = sample_dgff(n, StreamSeed::labelled(cfg.seed(), "dgff", 0))?;
            write_grid(out, "field", f.values(), &GridSidecar::dgff(&f))?;
            write_png(out, "field.png", &render::heatmap(f.values(), render::FIELD_RANGE))?;
            Ok(format!("discrete field, N = {n}"))
        }
    }
}

/// The measure of one spectral field at `eps = 1/n`, evaluated through the
/// folded lattice map.
pub fn measure_of_seed(gamma: f64, n: usize, cutoff: usize, seed: StreamSeed) -> Result<GridMeasure, CliError> {
    let eps = 1.0 / n as f64;
    let field = sample_spectral_gff(cutoff, seed)?;
    let sampler = LatticeSampler::cell_centres(cutoff, n, &[eps])?;
    let h = sampler.grid(&sampler.fold_field(&field)?, 0, n)?;
    Ok(GridMeasure::from_circle_averages(&h, gamma, eps)?)
}

pub fn build_measure(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let gamma = cfg.gamma_or(1.0);
    LiouvilleParams::new(gamma)?;
    gamma_warning(out, gamma);
    let n = power_of_two("resolution", cfg.resolution.unwrap_or(256), 2)?;
    let eps = 1.0 / n as f64;
    let cutoff = cfg.cutoff.unwrap_or_else(|| cutoff_for_scale(eps));
    cutoff_warning(out, cutoff, eps);
    let seed = StreamSeed::labelled(cfg.seed(), "field", 0);
    let m = measure_of_seed(gamma, n, cutoff, seed)?;
    for w in &m.warnings {
        out.warn(w.clone());
    }
    let field_ref = format!("spectral field cutoff {cutoff}, seed {}/{}", seed.seed, seed.stream);
    write_grid(out, "measure", &m.masses, &GridSidecar::measure(&m, Some(seed), Some(field_ref)))?;
    write_png(out, "measure.png", &render::heatmap(&render::log_density(&m), render::LOG_DENSITY_RANGE))?;
    let mut summary = format!("measure gamma = {gamma}, n = {n}, total mass {:.6}", m.total);
    if cfg.overlay.unwrap_or(false) {
        let delta = m.total / 256.0;
        let squares = render::equal_mass_squares(&m, delta);
        let stats = render::overlay_stats(&squares, delta);
        out.write("overlay.svg", render::overlay_svg(&squares, n).as_bytes())?;
        #[derive(Serialize)]
        struct Overlay<'a> {
            stats: render::OverlayStats,
            squares: &'a [render::Square],
        }
        let doc = Overlay {
            stats,
            squares: &squares,
        };
        out.write("overlay.json", (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;
        let _ = write!(
            summary,
            "; {} equal-mass squares, var log2 size {:.4}",
            stats.squares, stats.log2_size_variance
        );
    }
    Ok(summary)
}

fn write_fit(out: &mut Outputs, cfg: &RunConfig, fit: &ExponentFit, extra: serde_json::Value) -> Result<(), CliError> {
    let mut csv = Vec::new();
    write_fit_csv(fit, &mut csv)?;
    out.write("fit.csv", &csv)?;
    let mut doc = serde_json::to_value(FitSummary::new(fit, config_hash(cfg)?))?;
    if let (Some(map), serde_json::Value::Object(more)) = (doc.as_object_mut(), extra) {
        map.extend(more);
    }
    out.write("fit.json", (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;
    for p in &fit.points {
        let total = p.n_samples + p.n_discarded;
        if p.n_discarded > 0 {
            out.warn(format!(
                "scale {:e}: discarded {} of {} samples ({:.1}%)",
                p.scale,
                p.n_discarded,
                total,
                100.0 * p.n_discarded as f64 / total as f64
            ));
        }
    }
    Ok(())
}

pub fn euclid_exponent(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let set = cfg.set.clone().unwrap_or_default();
    let scales = cfg.scales.clone().unwrap_or_else(|| (7..=11).map(|k| 2f64.powi(-k)).collect());
    let fit = euclidean_exponent(&set, &scales, cfg.replicates.unwrap_or(1_000_000), cfg.seed())?;
    let target = set.euclidean_target();
    write_fit(out, cfg, &fit, serde_json::json!({ "set": set.label(), "expected": target }))?;
    Ok(format!(
        "Euclidean exponent of {}: {:.4} ± {:.4}{}",
        set.label(),
        fit.slope,
        fit.slope_stderr,
        target.map(|t| format!(" (exact {t})")).unwrap_or_default()
    ))
}

pub fn quantum_config(cfg: &RunConfig) -> QuantumConfig {
    let d = QuantumConfig::default();
    QuantumConfig {
        gamma: cfg.gamma_or(d.gamma),
        deltas: cfg.scales.clone().unwrap_or(d.deltas),
        replicates: cfg.replicates.unwrap_or(d.replicates),
        resolution: cfg.resolution.unwrap_or(d.resolution),
        seed: cfg.seed(),
        root_mode: cfg.root_mode.unwrap_or(d.root_mode),
        roots_per_field: cfg.roots_per_field.unwrap_or(d.roots_per_field),
        margin: cfg.margin.unwrap_or(d.margin),
        cutoff: cfg.cutoff,
    }
}

pub fn quantum_exponent_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let set = cfg.set.clone().unwrap_or_default();
    let qc = quantum_config(cfg);
    gamma_warning(out, qc.gamma);
    let fit = quantum_exponent(&set, &qc)?;
    let predicted = match set.euclidean_target() {
        Some(x) => Some(kpz_inverse(qc.gamma, x)?),
        None => None,
    };
    write_fit(
        out,
        cfg,
        &fit,
        serde_json::json!({ "set": set.label(), "gamma": qc.gamma, "root_mode": qc.root_mode, "kpz_prediction": predicted }),
    )?;
    Ok(format!(
        "quantum exponent of {} at gamma = {}: {:.4} ± {:.4}{}",
        set.label(),
        qc.gamma,
        fit.slope,
        fit.slope_stderr,
        predicted.map(|p| format!(" (KPZ prediction {p:.4})")).unwrap_or_default()
    ))
}

pub fn verify(cfg: &RunConfig, out: &mut Outputs) -> Result<(String, Vec<CheckRow>), CliError> {
    let names: Vec<String> = match &cfg.checks {
        Some(list) if !(list.len() == 1 && list[0] == "all") => list.clone(),
        _ => CHECKS.iter().map(|c| c.name.to_string()).collect(),
    };
    for n in &names {
        if kpzlab::checks::find_check(n).is_none() {
            return Err(CliError::Config(format!(
                "unknown check '{n}'; known: {}",
                CHECKS.iter().map(|c| c.name).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    let opts = CheckOptions {
        seed: cfg.seed.unwrap_or(CheckOptions::default().seed),
        replicates: cfg.replicates,
    };
    let mut rows = Vec::new();
    for n in &names {
        log::info!("running {n}");
        rows.extend(run_check(n, &opts)?);
    }
    out.write("verify.csv", rows_to_csv(&rows).as_bytes())?;
    out.write("verify.json", (serde_json::to_string_pretty(&rows)? + "\n").as_bytes())?;
    let mut table = String::new();
    for r in &rows {
        let _ = writeln!(
            table,
            "{:<5} {:<20} {}  target {:.6e}  estimate {:.6e} ± {:.2e}  [{}]",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.item,
            r.target,
            r.estimate,
            r.stderr,
            r.tolerance
        );
    }
    Ok((table, rows))
}

pub fn kpz_table(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let gammas: Vec<f64> = match cfg.gamma {
        Some(g) => vec![g],
        None => vec![0.5, 1.0, L2_GAMMA_MAX, Coupling::PureGravity.gamma(), Coupling::Ising.gamma()],
    };
    let deltas: Vec<f64> = cfg.scales.clone().unwrap_or_else(|| (0..=20).map(|i| i as f64 / 20.0).collect());
    let mut csv = String::from("gamma,delta,x,beta\n");
    for &g in &gammas {
        gamma_warning(out, g);
        for &d in &deltas {
            let x = kpz_formula(g, d)?;
            let beta = if g > 0.0 { beta_of_x(g, x)? } else { f64::NAN };
            let _ = writeln!(csv, "{g},{d},{x},{beta}");
        }
    }
    out.write("kpz_table.csv", csv.as_bytes())?;
    Ok(csv)
}

pub fn count_quads(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let max = cfg.max_faces.unwrap_or(10);
    if max == 0 {
        return Err(CliError::Config("max-faces must be >= 1".into()));
    }
    let mut csv = String::from("n,count\n");
    for n in 1..=max {
        let _ = writeln!(csv, "{n},{}", count_quadrangulations(n)?);
    }
    out.write("counts.csv", csv.as_bytes())?;
    Ok(csv)
}

/// Runs one command and writes its manifest. Check failures are reported
/// after the manifest, since the outputs are complete.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let command = cfg.command.ok_or_else(|| CliError::Config("no command".into()))?;
    let mut out = Outputs::create(&cfg.out_dir())?;
    let mut failed = None;
    let summary = match command {
        Command::SampleField => sample_field(cfg, &mut out)?,
        Command::BuildMeasure => build_measure(cfg, &mut out)?,
        Command::EuclidExponent => euclid_exponent(cfg, &mut out)?,
        Command::QuantumExponent => quantum_exponent_cmd(cfg, &mut out)?,
        Command::Verify => {
            let (table, rows) = verify(cfg, &mut out)?;
            let bad = rows.iter().filter(|r| !r.pass).count();
            if bad > 0 {
                failed = Some(CliError::ChecksFailed {
                    failed: bad,
                    total: rows.len(),
                });
            }
            table
        }
        Command::KpzTable => kpz_table(cfg, &mut out)?,
        Command::CountQuads => count_quads(cfg, &mut out)?,
    };
    out.finish(cfg)?;
    match failed {
        Some(e) => {
            print!("{summary}");
            Err(e)
        }
        None => Ok(summary),
    }
}
