use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{CheckOptions, CheckRow};
use crate::error::Result;
use crate::geometry::{green, log_conformal_radius, DomainSpec, Point};
use crate::gff::spectral::CircleProcessKernel;
use crate::gff::{cutoff_for_scale, dgff_covariance, dgff_green_column, sample_spectral_gff, CircleKernel, DgffSampler};
use crate::rng::StreamSeed;
use crate::stats::{mean, covariance, covariance_stderr, fit_line, variance, variance_stderr};

/// `log C(centre, square) = log(4 sqrt(pi) / Gamma(1/4)^2)`.
fn log_radius_square_centre() -> f64 {
    const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
    (4.0 * std::f64::consts::PI.sqrt() / (GAMMA_QUARTER * GAMMA_QUARTER)).ln()
}

/// Mean of the square partial sums of the literal sine series over cutoffs
/// `m0..=2 m0`, with the difference of the two half-range means as a
/// spread estimate.
fn series_cesaro(x: Point, y: Point, m0: usize) -> (f64, f64) {
    let m = 2 * m0;
    let a: Vec<f64> = (1..=m).map(|j| (j as f64 * PI * x.x).sin() * (j as f64 * PI * y.x).sin()).collect();
    let b: Vec<f64> = (1..=m).map(|k| (k as f64 * PI * x.y).sin() * (k as f64 * PI * y.y).sin()).collect();
    let term = |j: usize, k: usize| a[j - 1] * b[k - 1] / ((j * j + k * k) as f64);
    let mut s = 0.0;
    let mut partial = Vec::with_capacity(m0 + 1);
    for n in 1..=m {
        let mut shell = term(n, n);
        for k in 1..n {
            shell += term(n, k) + term(k, n);
        }
        s += shell * 8.0 / PI;
        if n >= m0 {
            partial.push(s);
        }
    }
    let half = partial.len() / 2;
    let lo = mean(&partial[..half]);
    let hi = mean(&partial[half..]);
    (mean(&partial), (hi - lo).abs())
}

/// Average of `G(x, .) + log h` over the four axis neighbours at offset `h`.
fn diagonal_average(domain: &DomainSpec, x: Point, h: f64) -> Result<f64> {
    let mut s = 0.0;
    for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
        s += green(domain, x, x.offset(dx, dy))? + h.ln();
    }
    Ok(0.25 * s)
}

pub(super) fn green_diagonal(_: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "green-diagonal";
    let sq = DomainSpec::unit_square();
    let disc = DomainSpec::unit_disc();
    let mut rows = Vec::new();
    let offsets = [2f64.powi(-8), 2f64.powi(-10), 2f64.powi(-12)];

    // Centre of the square: independent closed form for C.
    let c = Point::new(0.5, 0.5);
    for h in offsets {
        let v = green(&sq, c, c.offset(h, 0.0))? + h.ln();
        rows.push(CheckRow::absolute(NAME, format!("square centre, offset {h:e}"), log_radius_square_centre(), v, 0.0, 1e-3));
    }
    for p in [Point::new(0.3, 0.4), Point::new(0.25, 0.7)] {
        let target = log_conformal_radius(&sq, p)?;
        for h in offsets {
            let v = diagonal_average(&sq, p, h)?;
            rows.push(CheckRow::absolute(NAME, format!("square ({}, {}), offset {h:e}", p.x, p.y), target, v, 0.0, 1e-3));
        }
    }
    // The literal double series. Square partial sums oscillate in the
    // cutoff with period ~ 2/|x - y|; their running mean over cutoffs
    // M..2M damps the oscillation.
    let h = 2f64.powi(-8);
    for p in [c, Point::new(0.3, 0.4)] {
        // four-direction average, as above, except at the symmetric centre
        let dirs: &[(f64, f64)] = if p == c { &[(1.0, 0.0)] } else { &[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] };
        let (mut v, mut spread) = (0.0, 0.0f64);
        for (dx, dy) in dirs {
            let (s, e) = series_cesaro(p, p.offset(h * dx, h * dy), 8000);
            v += s / dirs.len() as f64;
            spread = spread.max(e);
        }
        let target = if p == c { log_radius_square_centre() } else { log_conformal_radius(&sq, p)? };
        rows.push(CheckRow::absolute(
            NAME,
            format!("square series ({}, {}), offset {h:e}", p.x, p.y),
            target,
            v + h.ln(),
            spread,
            1e-3,
        ));
    }
    for p in [Point::new(0.0, 0.0), Point::new(0.3, -0.2)] {
        let target = (1.0 - (p.x * p.x + p.y * p.y)).ln();
        for h in offsets {
            let v = diagonal_average(&disc, p, h)?;
            rows.push(CheckRow::absolute(NAME, format!("disc ({}, {}), offset {h:e}", p.x, p.y), target, v, 0.0, 1e-3));
        }
    }
    Ok(rows)
}

/// Ensemble of linear functionals of independent spectral fields; returns
/// one vector of functional values per replicate.
fn functional_ensemble(cutoff: usize, kernels: &[CircleKernel], replicates: usize, seed: u64, label: &str) -> Result<Vec<Vec<f64>>> {
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let f = sample_spectral_gff(cutoff, StreamSeed::labelled(seed, label, r as u64))?;
            Ok(kernels.iter().map(|k| k.apply(&f)).collect())
        })
        .collect()
}

fn column(values: &[Vec<f64>], i: usize) -> Vec<f64> {
    values.iter().map(|v| v[i]).collect()
}

pub(super) fn var_circle_average(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "var-circle-average";
    let sq = DomainSpec::unit_square();
    let eps: Vec<f64> = (3..=6).map(|k| 2f64.powi(-k)).collect();
    let points = [Point::new(0.5, 0.5), Point::new(0.375, 0.625)];
    let cutoff = cutoff_for_scale(eps[eps.len() - 1]);
    let mut kernels = Vec::new();
    let mut labels = Vec::new();
    for p in points {
        for &e in &eps {
            kernels.push(CircleKernel::new(cutoff, p, e)?);
            labels.push((p, e));
        }
    }
    let values = functional_ensemble(cutoff, &kernels, opts.replicates(10_000), opts.seed, NAME)?;
    let mut rows = Vec::new();
    for (i, (p, e)) in labels.iter().enumerate() {
        let col = column(&values, i);
        let target = (1.0 / e).ln() + log_conformal_radius(&sq, *p)?;
        rows.push(CheckRow::relative(
            NAME,
            format!("z = ({}, {}), eps = {e}", p.x, p.y),
            target,
            variance(&col),
            variance_stderr(&col),
            0.03,
        ));
    }
    Ok(rows)
}

pub(super) fn circle_process_bm(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "circle-process-bm";
    let z = Point::new(0.5, 0.5);
    let dt = 0.5;
    let t0 = -DomainSpec::unit_square().dist_to_boundary(z).ln();
    let t_max = t0 + 3.0;
    let cutoff = cutoff_for_scale((-t_max).exp());
    let process = CircleProcessKernel::new(cutoff, z, t_max, dt)?;
    let values = functional_ensemble(cutoff, process.kernels(), opts.replicates(10_000), opts.seed, NAME)?;
    let incr: Vec<Vec<f64>> = values.iter().map(|v| v.iter().map(|y| y - v[0]).collect()).collect();
    let mut rows = Vec::new();
    for (i, t) in process.times().iter().enumerate().skip(1) {
        let s = t - t0;
        let col = column(&incr, i);
        rows.push(CheckRow::relative(NAME, format!("Var B_t, t = {s}"), s, variance(&col), variance_stderr(&col), 0.05));
    }
    let (i1, i2) = ((1.0 / dt) as usize, (2.0 / dt) as usize);
    let (a, b) = (column(&incr, i1), column(&incr, i2));
    rows.push(CheckRow::sigma(NAME, "Cov(B_1, B_2)", 1.0, covariance(&a, &b), covariance_stderr(&a, &b), 3.0));
    Ok(rows)
}

pub(super) fn dgff_exactness(opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    const NAME: &str = "dgff-exactness";
    let replicates = opts.replicates(100_000);
    let mut rows = Vec::new();

    let one = DgffSampler::new(2)?;
    let v: Vec<f64> = (0..replicates)
        .map(|r| one.sample(StreamSeed::labelled(opts.seed, "dgff-2", r as u64)).at(1, 1))
        .collect();
    rows.push(CheckRow::sigma(NAME, "N = 2 variance", dgff_covariance(2, (1, 1), (1, 1))?, variance(&v), variance_stderr(&v), 3.0));

    let n = 8;
    let sampler = DgffSampler::new(n)?;
    let m = n - 1;
    let samples: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let f = sampler.sample(StreamSeed::labelled(opts.seed, "dgff-8", r as u64));
            f.values().slice(ndarray::s![1..n, 1..n]).iter().copied().collect()
        })
        .collect();
    let cols: Vec<Vec<f64>> = (0..m * m).map(|i| column(&samples, i)).collect();
    let mut oracle = Array2::<f64>::zeros((m * m, m * m));
    for b in 0..m * m {
        let g = dgff_green_column(n, (b / m + 1, b % m + 1))?;
        for (a, v) in g.iter().enumerate() {
            oracle[[a, b]] = *v;
        }
    }
    // Family-wise 3σ over all distinct entries (Šidák): keeps the overall
    // false-alarm rate of a single 3σ comparison.
    let entries = m * m * (m * m + 1) / 2;
    let unit = Normal::new(0.0, 1.0).expect("standard normal");
    let alpha = 2.0 * (1.0 - unit.cdf(3.0));
    let per_entry = 1.0 - (1.0 - alpha).powf(1.0 / entries as f64);
    let z_crit = unit.inverse_cdf(1.0 - per_entry / 2.0);
    let mut worst = (0.0f64, 0, 0, 0.0, 0.0, 0.0);
    let mut beyond_3 = 0usize;
    for a in 0..m * m {
        for b in a..m * m {
            let est = covariance(&cols[a], &cols[b]);
            let se = covariance_stderr(&cols[a], &cols[b]);
            let z = (est - oracle[[a, b]]) / se;
            if z.abs() > 3.0 {
                beyond_3 += 1;
            }
            if z.abs() > worst.0.abs() {
                worst = (z, a, b, oracle[[a, b]], est, se);
            }
        }
    }
    let (z, a, b, target, est, se) = worst;
    rows.push(CheckRow::condition(
        NAME,
        format!("N = 8 covariance, worst of {entries} entries ({a}, {b}), z = {z:.2}"),
        target,
        est,
        se,
        format!("family-wise 3σ (|z| <= {z_crit:.2})"),
        z.abs() <= z_crit,
    ));
    rows.push(CheckRow::condition(
        NAME,
        format!("N = 8 entries beyond 3σ: {beyond_3} of {entries}"),
        alpha * entries as f64,
        beyond_3 as f64,
        (alpha * entries as f64).sqrt(),
        "informational",
        true,
    ));

    let sides = [16usize, 32, 64, 128, 256];
    let logs: Vec<f64> = sides.iter().map(|s| (*s as f64).ln()).collect();
    let vars: Vec<f64> = sides
        .iter()
        .map(|&s| dgff_covariance(s, (s / 2, s / 2), (s / 2, s / 2)))
        .collect::<Result<_>>()?;
    let fit = fit_line(&logs, &vars);
    rows.push(CheckRow::condition(
        NAME,
        format!("Var(centre) vs log N, slope {:.4}", fit.slope),
        0.99,
        fit.r_squared,
        0.0,
        "R^2 > 0.99",
        fit.r_squared > 0.99,
    ));
    Ok(rows)
}
