use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fractal::FractalSet;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::StreamSeed;
use crate::stats::{fit_line_weighted, jackknife_stderr, mean, Estimate};

/// One scale of a log–log fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    /// `eps` or `delta`
    pub scale: f64,
    /// `log eps^2` or `log delta`
    pub abscissa: f64,
    pub estimate: f64,
    pub log_estimate: f64,
    /// Standard error of `log_estimate`.
    pub stderr: f64,
    pub n_samples: u64,
    pub hits: u64,
    pub n_discarded: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub points: Vec<ScalePoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Jackknife over independent replicates (or sample blocks).
    pub slope_stderr: f64,
}

/// Per-replicate record: the per-scale functional plus counts.
#[derive(Clone, Debug, Default)]
pub(crate) struct Record {
    pub values: Vec<f64>,
    pub samples: u64,
    pub hits: Vec<u64>,
    pub discarded: Vec<u64>,
}

/// Weighted least-squares slope of `log mean(values)` against `abscissa`,
/// with the slope error from a delete-one jackknife over records.
pub(crate) fn fit_records(scales: &[f64], abscissa: &[f64], records: &[Record]) -> Result<ExponentFit> {
    let k = scales.len();
    if k < 3 {
        return Err(Error::InvalidParameter("a fit needs at least 3 scales".into()));
    }
    let mut points = Vec::with_capacity(k);
    for s in 0..k {
        let vals: Vec<f64> = records.iter().map(|r| r.values[s]).collect();
        let e = Estimate::of_mean(&vals);
        let hits: u64 = records.iter().map(|r| r.hits[s]).sum();
        let samples: u64 = records.iter().map(|r| r.samples).sum();
        if !(e.value > 0.0) {
            return Err(Error::InsufficientHits {
                scale: scales[s],
                hits,
                samples,
            });
        }
        points.push(ScalePoint {
            scale: scales[s],
            abscissa: abscissa[s],
            estimate: e.value,
            log_estimate: e.value.ln(),
            stderr: e.stderr / e.value,
            n_samples: samples,
            hits,
            n_discarded: records.iter().map(|r| r.discarded[s]).sum(),
        });
    }
    let y: Vec<f64> = points.iter().map(|p| p.log_estimate).collect();
    let se: Vec<f64> = points.iter().map(|p| p.stderr).collect();
    let line = fit_line_weighted(abscissa, &y, &se);
    let slope_stderr = jackknife_stderr(records, |subset| {
        let ys: Vec<f64> = (0..k)
            .map(|s| mean(&subset.iter().map(|r| r.values[s]).collect::<Vec<_>>()).max(f64::MIN_POSITIVE).ln())
            .collect();
        fit_line_weighted(abscissa, &ys, &se).slope
    });
    Ok(ExponentFit {
        points,
        slope: line.slope,
        intercept: line.intercept,
        slope_stderr,
    })
}

pub(crate) fn check_scales(scales: &[f64], upper: f64) -> Result<()> {
    if scales.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 scales, got {}", scales.len())));
    }
    if scales.iter().any(|s| !(*s > 0.0 && *s < upper)) {
        return Err(Error::InvalidParameter(format!("scales must lie in (0, {upper})")));
    }
    Ok(())
}

/// Hits required at every scale before a Euclidean fit is accepted.
pub const MIN_HITS: u64 = 100;
const BLOCKS: usize = 32;
const MAX_DOUBLINGS: u32 = 6;

/// Exponent `x` from `P[dist(z, K) <= eps] ~ (eps^2)^x`, `z` uniform on
/// `[m, 1-m]^2` with `m` the largest scale. One point set serves every
/// scale. The sample count doubles (up to 64x) until every scale has
/// [`MIN_HITS`] hits.
pub fn euclidean_exponent(set: &FractalSet, scales: &[f64], samples: usize, seed: u64) -> Result<ExponentFit> {
    set.validate()?;
    check_scales(scales, 0.5)?;
    if samples < BLOCKS {
        return Err(Error::InvalidParameter(format!("need at least {BLOCKS} samples")));
    }
    let margin = scales.iter().copied().fold(0.0, f64::max);
    let width = 1.0 - 2.0 * margin;
    let per_block = samples.div_ceil(BLOCKS);
    let block = |b: usize| -> Record {
        let mut rng = StreamSeed::labelled(seed, "euclid", b as u64).rng();
        let mut hits = vec![0u64; scales.len()];
        for _ in 0..per_block {
            let z = Point::new(margin + width * rng.random::<f64>(), margin + width * rng.random::<f64>());
            let d = set.distance(z);
            for (h, e) in hits.iter_mut().zip(scales) {
                if d <= *e {
                    *h += 1;
                }
            }
        }
        Record {
            values: hits.iter().map(|h| *h as f64 / per_block as f64).collect(),
            samples: per_block as u64,
            discarded: vec![0; scales.len()],
            hits,
        }
    };
    let mut records: Vec<Record> = (0..BLOCKS).into_par_iter().map(block).collect();
    let mut doublings = 0;
    loop {
        let min_hits = (0..scales.len())
            .map(|s| records.iter().map(|r| r.hits[s]).sum::<u64>())
            .min()
            .unwrap_or(0);
        if min_hits >= MIN_HITS {
            break;
        }
        if doublings == MAX_DOUBLINGS {
            let (s, hits) = (0..scales.len())
                .map(|s| (s, records.iter().map(|r| r.hits[s]).sum::<u64>()))
                .min_by_key(|(_, h)| *h)
                .unwrap();
            return Err(Error::InsufficientHits {
                scale: scales[s],
                hits,
                samples: records.iter().map(|r| r.samples).sum(),
            });
        }
        let n = records.len();
        let more: Vec<Record> = (n..2 * n).into_par_iter().map(block).collect();
        records.extend(more);
        doublings += 1;
    }
    let abscissa: Vec<f64> = scales.iter().map(|e| (e * e).ln()).collect();
    fit_records(scales, &abscissa, &records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| 2f64.powi(-k)).collect()
    }

    #[test]
    fn full_square_is_zero() {
        let f = euclidean_exponent(&FractalSet::FullSquare, &dyadic(3, 6), 1000, 1).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn point_slope_is_one() {
        let k = FractalSet::Point { at: Point::new(0.5, 0.5) };
        let f = euclidean_exponent(&k, &dyadic(3, 6), 200_000, 2).unwrap();
        assert!((f.slope - 1.0).abs() < 4.0 * f.slope_stderr + 0.01, "{f:?}");
    }

    #[test]
    fn insufficient_hits() {
        let k = FractalSet::Point { at: Point::new(0.5, 0.5) };
        let e = euclidean_exponent(&k, &dyadic(8, 11), 64, 2).unwrap_err();
        assert!(matches!(e, Error::InsufficientHits { .. }));
    }

    #[test]
    fn too_few_scales() {
        assert!(euclidean_exponent(&FractalSet::FullSquare, &dyadic(3, 4), 1000, 1).is_err());
    }
}
