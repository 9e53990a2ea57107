use num_bigint::BigUint;
use rand::Rng;
use sha2::{Digest, Sha256};

use super::{rows_to_csv, CheckOptions, CheckRow};
use crate::error::Result;
use crate::kpz::{
    beta_of_x, count_quadrangulations, euclidean_exponent, first_passage_many, kpz_formula, kpz_inverse,
    quantum_exponent, Coupling, FractalSet, QuantumConfig, RootMode,
};
use crate::rng::StreamSeed;

pub(super) fn fp_oracle(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "fp-oracle";
    let paths = opts.replicates(100_000);
    let xs = [0.25, 0.5, 1.0];
    let mut rows = Vec::new();
    let mut stream = 0u64;
    for gamma in [0.5, 1.0, 1.5] {
        for delta in [0.1, 0.01] {
            let seed = StreamSeed::labelled(opts.seed, NAME, stream).rng().random::<u64>();
            stream += 1;
            for fp in first_passage_many(gamma, &xs, delta, paths, 1e-3, seed)? {
                rows.push(CheckRow::sigma(
                    NAME,
                    format!("gamma = {gamma}, x = {}, delta = {delta}", fp.x),
                    fp.analytic,
                    fp.mc_estimate,
                    fp.stderr,
                    3.0,
                ));
            }
        }
    }
    Ok(rows)
}

pub(super) fn kpz_fixed_points(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "kpz-fixed-points";
    let g = Coupling::PureGravity.gamma();
    let mut rows = vec![
        CheckRow::absolute(NAME, "pure gravity, Delta = 1/2", 1.0 / 3.0, kpz_formula(g, 0.5)?, 0.0, 1e-15),
        CheckRow::absolute(NAME, "pure gravity, Delta = 3/4", 5.0 / 8.0, kpz_formula(g, 0.75)?, 0.0, 1e-15),
        CheckRow::absolute(
            NAME,
            "kpz_inverse(1, 1/2)",
            (17f64.sqrt() - 3.0) / 2.0,
            kpz_inverse(1.0, 0.5)?,
            0.0,
            1e-15,
        ),
    ];
    let (mut worst_fixed, mut worst_inverse): (f64, f64) = (0.0, 0.0);
    for i in 0..200 {
        let gamma = 2.0 * i as f64 / 200.0;
        for d in [0.0, 1.0] {
            worst_fixed = worst_fixed.max((kpz_formula(gamma, d)? - d).abs());
            worst_inverse = worst_inverse.max((kpz_inverse(gamma, d)? - d).abs());
        }
    }
    rows.push(CheckRow::absolute(NAME, "kpz_formula fixes 0 and 1, 200 values of gamma", 0.0, worst_fixed, 0.0, 0.0));
    rows.push(CheckRow::absolute(NAME, "kpz_inverse fixes 0 and 1, 200 values of gamma", 0.0, worst_inverse, 0.0, 1e-15));

    let mut rng = StreamSeed::labelled(opts.seed, NAME, 0).rng();
    let (mut round_trip, mut identity): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let gamma = 2.0 * rng.random::<f64>();
        let x = 2.0 * rng.random::<f64>();
        let delta = kpz_inverse(gamma, x)?;
        round_trip = round_trip.max((kpz_formula(gamma, delta)? - x).abs());
        if gamma > 0.0 {
            identity = identity.max((beta_of_x(gamma, x)? / gamma - delta).abs());
        }
    }
    rows.push(CheckRow::absolute(NAME, "kpz_formula(kpz_inverse(x)) = x, 100 draws", 0.0, round_trip, 0.0, 1e-12));
    rows.push(CheckRow::absolute(NAME, "beta/gamma = kpz_inverse, 100 draws", 0.0, identity, 0.0, 1e-12));
    let worst_small = (0..=100)
        .map(|i| {
            let d = i as f64 / 100.0;
            Ok((kpz_formula(1e-6, d)? - d).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push(CheckRow::absolute(NAME, "gamma = 1e-6 is the identity on [0, 1]", 0.0, worst_small, 0.0, 1e-6));
    Ok(rows)
}

pub(super) fn kpz_end_to_end(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "kpz-end-to-end";
    let set = FractalSet::default();
    let scales: Vec<f64> = (7..=11).map(|k| 2f64.powi(-k)).collect();
    let euclid = euclidean_exponent(&set, &scales, opts.replicates(1_000_000).max(32), opts.seed)?;
    let mut rows = vec![CheckRow::absolute(NAME, "Euclidean exponent of a segment", 0.5, euclid.slope, euclid.slope_stderr, 0.02)];

    let target = kpz_inverse(1.0, 0.5)?;
    let mut fits = Vec::new();
    for mode in [RootMode::SampleFromMeasure, RootMode::RootedDensity] {
        let cfg = QuantumConfig {
            gamma: 1.0,
            deltas: (8..=16).map(|k| 2f64.powi(-k)).collect(),
            replicates: opts.replicates(200),
            seed: opts.seed,
            root_mode: mode,
            ..QuantumConfig::default()
        };
        let fit = quantum_exponent(&set, &cfg)?;
        rows.push(CheckRow::absolute(
            NAME,
            format!("quantum exponent at gamma = 1, {mode:?}"),
            target,
            fit.slope,
            fit.slope_stderr,
            0.10,
        ));
        fits.push(fit);
    }
    let (a, b) = (&fits[0], &fits[1]);
    let joint = a.slope_stderr.hypot(b.slope_stderr);
    rows.push(CheckRow::sigma(NAME, "root modes agree", a.slope, b.slope, joint, 3.0));
    Ok(rows)
}

pub(super) fn count_quads(_: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "count-quads";
    let mut rows = Vec::new();
    for (n, want) in [(1u32, 2u64), (2, 9), (3, 54)] {
        let got = count_quadrangulations(n)?;
        rows.push(CheckRow::condition(
            NAME,
            format!("n = {n}"),
            want as f64,
            got.to_string().parse().unwrap_or(f64::NAN),
            0.0,
            "exact",
            got == want.into(),
        ));
    }
    // Large n against an independent route: (n + 2) * count = 2 * 3^n * Cat_n,
    // with Cat_n from its first-order recurrence.
    let n = 200u32;
    let big = count_quadrangulations(n)?;
    let mut catalan = BigUint::from(1u32);
    for k in 0..n {
        catalan = catalan * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    let exact = &big * BigUint::from(n + 2) == BigUint::from(2u32) * BigUint::from(3u32).pow(n) * catalan;
    rows.push(CheckRow::condition(
        NAME,
        format!("n = {n} ({} digits) vs Catalan recurrence", big.to_string().len()),
        1.0,
        if exact { 1.0 } else { 0.0 },
        0.0,
        "exact",
        exact,
    ));
    Ok(rows)
}

/// Checks rerun at reduced size by the reproducibility check.
const REPRO_SUITE: &[&str] = &["var-circle-average", "dgff-exactness", "fp-oracle", "kpz-fixed-points", "count-quads"];

/// SHA-256 of the CSV rows of a reduced suite.
pub(crate) fn suite_checksum(opts: &CheckOptions) -> Result<String> {
    let mut hasher = Sha256::new();
    for name in REPRO_SUITE {
        hasher.update(rows_to_csv(&super::run_check(name, opts)?).as_bytes());
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub(super) fn reproducibility(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "reproducibility";
    let small = CheckOptions {
        seed: opts.seed,
        replicates: Some(opts.replicates(500).min(2000)),
    };
    let a = suite_checksum(&small)?;
    let b = suite_checksum(&small)?;
    Ok(vec![CheckRow::condition(
        NAME,
        format!("{} -> sha256 {}", REPRO_SUITE.join("+"), &a[..16]),
        1.0,
        if a == b { 1.0 } else { 0.0 },
        0.0,
        "identical",
        a == b,
    )])
}
