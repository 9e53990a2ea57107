//! Monte Carlo for `E[exp(-2x T)]`, `T` the first passage of
//! `B_t + a_gamma t` to `log(1/delta) / gamma`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formulas::{beta_of_x, drift};
use crate::error::{Error, Result};
use crate::rng::StreamSeed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstPassage {
    pub x: f64,
    pub mc_estimate: f64,
    pub stderr: f64,
    /// `delta^{beta/gamma}`
    pub analytic: f64,
}

impl FirstPassage {
    pub fn z_score(&self) -> f64 {
        if self.stderr > 0.0 {
            (self.mc_estimate - self.analytic) / self.stderr
        } else if self.mc_estimate == self.analytic {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Paths simulated per parallel chunk; fixes the reduction order.
const CHUNK: usize = 4096;

/// Discounted passage functionals for several `x` on one set of paths.
///
/// Euler steps of size `dt`; within a step that ends below the level, the
/// path crosses with the Brownian-bridge probability
/// `exp(-2 (L - X_i)(L - X_{i+1}) / dt)`, and a crossing is timed at the
/// step midpoint. Paths are followed until the discount is below `1e-13`.
pub fn first_passage_many(
    gamma: f64,
    xs: &[f64],
    delta: f64,
    paths: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<FirstPassage>> {
    let a = drift(gamma)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::InvalidParameter(format!("dt must lie in (0, 1e-3], got {dt}")));
    }
    if paths < 2 {
        return Err(Error::InvalidParameter("need at least two paths".into()));
    }
    let analytic: Vec<f64> = xs
        .iter()
        .map(|&x| Ok(delta.powf(beta_of_x(gamma, x)? / gamma)))
        .collect::<Result<_>>()?;
    let level = (1.0 / delta).ln() / gamma;
    let x_min = xs.iter().copied().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
    let t_max = if x_min.is_finite() { 30.0 / (2.0 * x_min) } else { 0.0 };
    let sd = dt.sqrt();

    let chunks = paths.div_ceil(CHUNK);
    let times: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = StreamSeed::labelled(seed, "first-passage", c as u64).rng();
            let count = CHUNK.min(paths - c * CHUNK);
            (0..count)
                .map(|_| {
                    let (mut x, mut t) = (0.0f64, 0.0f64);
                    while t < t_max {
                        let next = x + a * dt + sd * rng.sample::<f64, _>(StandardNormal);
                        if next >= level {
                            return t + 0.5 * dt;
                        }
                        let p = (-2.0 * (level - x) * (level - next) / dt).exp();
                        if rng.random::<f64>() < p {
                            return t + 0.5 * dt;
                        }
                        x = next;
                        t += dt;
                    }
                    f64::INFINITY
                })
                .collect()
        })
        .collect();

    Ok(xs
        .iter()
        .zip(&analytic)
        .map(|(&x, &an)| {
            if x == 0.0 {
                return FirstPassage {
                    x,
                    mc_estimate: 1.0,
                    stderr: 0.0,
                    analytic: an,
                };
            }
            let vals: Vec<f64> = times.iter().flatten().map(|t| (-2.0 * x * t).exp()).collect();
            let e = crate::stats::Estimate::of_mean(&vals);
            FirstPassage {
                x,
                mc_estimate: e.value,
                stderr: e.stderr,
                analytic: an,
            }
        })
        .collect())
}

pub fn first_passage_oracle(
    gamma: f64,
    x: f64,
    delta: f64,
    paths: usize,
    dt: f64,
    seed: u64,
) -> Result<FirstPassage> {
    Ok(first_passage_many(gamma, &[x], delta, paths, dt, seed)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_exponent_is_one() {
        let r = first_passage_oracle(1.0, 0.0, 0.1, 10, 1e-3, 0).unwrap();
        assert_eq!(r.mc_estimate, 1.0);
        assert_eq!(r.analytic, 1.0);
    }

    #[test]
    fn level_near_zero() {
        let r = first_passage_oracle(1.0, 0.5, 1.0 - 1e-9, 200, 1e-3, 0).unwrap();
        assert!(r.mc_estimate > 0.999 && r.analytic > 0.999);
    }

    #[test]
    fn rejects_bad_input() {
        let s = 0;
        assert!(first_passage_oracle(1.0, 0.5, 1.5, 10, 1e-3, s).is_err());
        assert!(first_passage_oracle(1.0, 0.5, 0.5, 10, 1e-2, s).is_err());
        assert!(first_passage_oracle(0.0, 0.5, 0.5, 10, 1e-3, s).is_err());
    }

    #[test]
    fn matches_closed_form() {
        let r = first_passage_oracle(1.0, 0.5, 0.1, 20_000, 1e-3, 7).unwrap();
        assert!(r.z_score().abs() < 4.0, "{r:?}");
    }
}
