use rayon::prelude::*;

use super::{CheckOptions, CheckRow};
use crate::error::Result;
use crate::geometry::{log_conformal_radius, DomainSpec, Point};
use crate::gff::{cutoff_for_scale, LatticeSampler};
use crate::kpz::drift;
use crate::liouville::{
    ball_mass_in_window, cauchy_diagnostic, first_moment_limit, measure_apply, root_shift_grid, second_moment_limit,
    GridMeasure, TestFunction,
};
use crate::rng::StreamSeed;
use crate::stats::{fit_line, mean, median, variance, Estimate};

/// The series tail beyond the cutoff rule lowers `Var h_eps` by about
/// `4 / (pi^2 eps M)`; the moment checks use a cutoff this many times
/// larger so that the bias stays well under the Monte Carlo error.
const MOMENT_CUTOFF_FACTOR: usize = 4;

pub(super) fn measure_moments(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "measure-moments";
    let phi = TestFunction::default();
    let ks = [6u32, 7, 8];
    let eps: Vec<f64> = ks.iter().map(|k| 2f64.powi(-(*k as i32))).collect();
    let cutoff = MOMENT_CUTOFF_FACTOR * cutoff_for_scale(eps[2]);
    let sampler = LatticeSampler::lattice(cutoff, 512, &eps)?;
    let gammas = [1.0, 0.5];
    let phis: Vec<_> = ks.iter().map(|k| phi.cell_averages(1 << k)).collect();

    // values[r][g][level]
    let values: Vec<Vec<Vec<f64>>> = (0..opts.replicates(10_000))
        .into_par_iter()
        .map(|r| -> Result<Vec<Vec<f64>>> {
            let sample = sampler.sample(StreamSeed::labelled(opts.seed, NAME, r as u64));
            let grids: Vec<_> = ks
                .iter()
                .enumerate()
                .map(|(level, k)| sampler.grid(&sample, level, 1 << k))
                .collect::<Result<_>>()?;
            gammas
                .iter()
                .map(|&g| {
                    grids
                        .iter()
                        .enumerate()
                        .map(|(level, h)| {
                            let m = GridMeasure::from_circle_averages(h, g, eps[level])?;
                            measure_apply(&m, &phis[level])
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let series = |g: usize, level: usize| -> Vec<f64> { values.iter().map(|v| v[g][level]).collect() };

    let mut rows = Vec::new();
    let first = first_moment_limit(&phi, 1.0)?;
    for (level, e) in eps.iter().enumerate() {
        let est = Estimate::of_mean(&series(0, level));
        rows.push(CheckRow::sigma(
            NAME,
            format!("gamma = 1, E mu_eps(phi) vs ∫phi C^(1/2), eps = {e}"),
            first.value,
            est.value,
            est.stderr.hypot(first.error),
            3.0,
        ));
    }
    // Paired differences across eps: the exact identity E mu_eps = E mu_eps'.
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let d: Vec<f64> = series(0, a).iter().zip(series(0, b)).map(|(x, y)| x - y).collect();
        let est = Estimate::of_mean(&d);
        rows.push(CheckRow::sigma(
            NAME,
            format!("gamma = 1, E[mu_{} - mu_{}](phi) = 0", eps[a], eps[b]),
            0.0,
            est.value,
            est.stderr,
            3.0,
        ));
    }
    for (g, gamma) in gammas.iter().enumerate() {
        let limit = second_moment_limit(&phi, *gamma)?;
        let sq: Vec<f64> = series(g, 1).iter().map(|v| v * v).collect();
        let est = Estimate::of_mean(&sq);
        rows.push(CheckRow::relative_plus_sigma(
            NAME,
            format!("gamma = {gamma}, E mu_eps(phi)^2 at eps = {}", eps[1]),
            limit.value,
            est.value,
            est.stderr,
            0.05,
            3.0,
        ));
    }
    Ok(rows)
}

pub(super) fn l2_cauchy(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "l2-cauchy";
    let table = cauchy_diagnostic(1.0, &TestFunction::default(), 3, 7, opts.replicates(10_000), opts.seed, None)?;
    let mut rows: Vec<CheckRow> = table
        .rows
        .iter()
        .map(|r| {
            CheckRow::condition(
                NAME,
                format!("E[(mu_2^-{} - mu_2^-{})^2]", r.k, r.k + 1),
                f64::NAN,
                r.estimate,
                r.stderr,
                "informational",
                true,
            )
        })
        .collect();
    for (i, z) in table.decrease_z.iter().enumerate() {
        let k = table.rows[i].k;
        rows.push(CheckRow::condition(
            NAME,
            format!("difference k = {k} exceeds k = {} (paired z = {z:.2})", k + 1),
            3.0,
            *z,
            1.0,
            "paired z > 3",
            *z > 3.0,
        ));
    }
    Ok(rows)
}

pub(super) fn rooted_ball_scaling(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "rooted-ball-scaling";
    let n = 512usize;
    let eps = 1.0 / n as f64;
    let z = Point::new(256.5 / 512.0, 256.5 / 512.0);
    let radii: Vec<f64> = (3..=6).map(|k| 2f64.powi(-k)).collect();
    let mut levels = vec![eps];
    levels.extend(&radii);
    let sampler = LatticeSampler::cell_centres(cutoff_for_scale(eps), n, &levels)?;
    let gammas = [0.5, 1.0];
    let log_c = log_conformal_radius(&DomainSpec::unit_square(), z)?;
    let big = radii[0];
    let (xr, yr) = crate::liouville::ball_window(z, big, n);
    let origin = (xr.start, yr.start);
    let shifts: Vec<_> = gammas
        .iter()
        .map(|&g| root_shift_grid(z, g, n, eps, xr.clone(), yr.clone()))
        .collect();

    // out[r][g] = (masses per radius, h_r(z) per radius)
    let out: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..opts.replicates(4000))
        .into_par_iter()
        .map(|rep| -> Result<_> {
            let sample = sampler.sample(StreamSeed::labelled(opts.seed, NAME, rep as u64));
            let h = sampler.grid_window(&sample, 0, n, xr.clone(), yr.clone())?;
            let hr: Vec<f64> = (1..levels.len())
                .map(|level| sampler.point(&sample, level, z))
                .collect::<Result<_>>()?;
            Ok(gammas
                .iter()
                .zip(&shifts)
                .map(|(&g, shift)| {
                    let tilted = &h + shift;
                    let masses = radii
                        .iter()
                        .map(|&r| ball_mass_in_window(&tilted, origin, n, z, r, g, eps))
                        .collect();
                    (masses, hr.clone())
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    for (g, &gamma) in gammas.iter().enumerate() {
        let log_means: Vec<f64> = (0..radii.len())
            .map(|i| mean(&out.iter().map(|v| v[g].0[i]).collect::<Vec<_>>()).ln())
            .collect();
        let rel_err: Vec<f64> = (0..radii.len())
            .map(|i| {
                let xs: Vec<f64> = out.iter().map(|v| v[g].0[i]).collect();
                (variance(&xs) / xs.len() as f64).sqrt() / mean(&xs)
            })
            .collect();
        let fit = fit_line(&log_r, &log_means);
        // Delta method, ignoring the correlation between radii.
        let mx = mean(&log_r);
        let sxx: f64 = log_r.iter().map(|x| (x - mx).powi(2)).sum();
        let slope_err = log_r
            .iter()
            .zip(&rel_err)
            .map(|(x, e)| ((x - mx) / sxx * e).powi(2))
            .sum::<f64>()
            .sqrt();
        rows.push(CheckRow::absolute(
            NAME,
            format!("gamma = {gamma}, slope of log E mass(B_r) vs log r"),
            2.0 - gamma * gamma,
            fit.slope,
            slope_err,
            0.1,
        ));

        // Ratio test: log mass - gamma Q log r - gamma h^z_r(z), with the
        // rooted circle average h^z_r(z) = h_r(z) + gamma (log(1/r) + log C).
        let q = drift(gamma)? + gamma;
        let medians: Vec<f64> = radii
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let xs: Vec<f64> = out
                    .iter()
                    .map(|v| {
                        let hz = v[g].1[i] + gamma * (-r.ln() + log_c);
                        v[g].0[i].ln() - gamma * q * r.ln() - gamma * hz
                    })
                    .collect();
                median(&xs)
            })
            .collect();
        let centre = mean(&medians);
        for (m, r) in medians.iter().zip(&radii) {
            rows.push(CheckRow::absolute(
                NAME,
                format!("gamma = {gamma}, ratio-test median at r = {r} vs mean over r"),
                centre,
                *m,
                0.0,
                0.15,
            ));
        }
    }
    Ok(rows)
}
