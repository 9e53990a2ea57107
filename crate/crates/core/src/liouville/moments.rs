use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{l2_warning, GridMeasure, LiouvilleParams, L2_GAMMA_MAX};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::{tilde_unchecked, DomainSpec, Point};
use crate::gff::{cutoff_for_scale, LatticeSampler};
use crate::quadrature::Composite;
use crate::rng::StreamSeed;
use crate::stats::{mean, Estimate};

/// A quadrature result with the gap between the two finest refinements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub error: f64,
}

fn log_c(p: Point) -> f64 {
    tilde_unchecked(&DomainSpec::unit_square(), p, p)
}

fn first_moment_at(phi: &TestFunction, gamma: f64, panels: usize) -> f64 {
    let [x0, x1, y0, y1] = phi.support();
    let qx = Composite::new(x0, x1, panels, 8);
    let qy = Composite::new(y0, y1, panels, 8);
    let g2 = 0.5 * gamma * gamma;
    qx.integrate(|x| {
        qy.integrate(|y| {
            let p = Point::new(x, y);
            phi.eval(p) * (g2 * log_c(p)).exp()
        })
    })
}

/// `∫ phi(z) C(z, D)^{gamma^2/2} dz`: the `eps`-free mean of `mu_eps(phi)`.
pub fn first_moment_limit(phi: &TestFunction, gamma: f64) -> Result<QuadratureValue> {
    LiouvilleParams::new(gamma)?;
    let coarse = first_moment_at(phi, gamma, 8);
    let fine = first_moment_at(phi, gamma, 16);
    Ok(QuadratureValue {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

/// Angles of the corners of `[x0,x1] x [y0,y1]` seen from `p`, sorted, with
/// the first repeated at `+2 pi`.
fn corner_angles(p: Point, b: [f64; 4]) -> Vec<f64> {
    let mut a: Vec<f64> = [(b[0], b[2]), (b[1], b[2]), (b[1], b[3]), (b[0], b[3])]
        .iter()
        .map(|(cx, cy)| (cy - p.y).atan2(cx - p.x))
        .collect();
    a.sort_by(f64::total_cmp);
    a.push(a[0] + 2.0 * PI);
    a
}

/// Distance from an interior `p` to the box edge along direction `theta`.
fn ray_to_box(p: Point, b: [f64; 4], theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let mut t = f64::INFINITY;
    if c > 0.0 {
        t = t.min((b[1] - p.x) / c);
    } else if c < 0.0 {
        t = t.min((b[0] - p.x) / c);
    }
    if s > 0.0 {
        t = t.min((b[3] - p.y) / s);
    } else if s < 0.0 {
        t = t.min((b[2] - p.y) / s);
    }
    t.max(0.0)
}

/// Nodes and weights for `∫_0^R g(rho) rho^{1 - gamma^2} d rho` with smooth
/// `g`: geometrically graded panels toward the origin, and on the innermost
/// panel the substitution `rho = s^{1/(2 - gamma^2)}` that makes the weight
/// flat.
fn radial_rule(r_max: f64, g2: f64, levels: usize, order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity((levels + 1) * order);
    let ratio: f64 = 0.25;
    let mut hi = r_max;
    for _ in 0..levels {
        let lo = hi * ratio;
        let q = Composite::new(lo, hi, 1, order);
        for (x, w) in q.nodes.iter().zip(&q.weights) {
            out.push((*x, w * x.powf(1.0 - g2)));
        }
        hi = lo;
    }
    let p = 1.0 / (2.0 - g2);
    let q = Composite::new(0.0, hi.powf(2.0 - g2), 1, order);
    for (s, w) in q.nodes.iter().zip(&q.weights) {
        out.push((s.powf(p), w * p));
    }
    out
}

fn second_moment_at(phi: &TestFunction, gamma: f64, outer: usize, angular: usize, levels: usize, order: usize) -> f64 {
    let b = phi.support();
    let g2 = gamma * gamma;
    let qx = Composite::new(b[0], b[1], outer, order);
    let qy = Composite::new(b[2], b[3], outer, order);
    let domain = DomainSpec::unit_square();
    let mut pts = Vec::new();
    for (x, wx) in qx.nodes.iter().zip(&qx.weights) {
        for (y, wy) in qy.nodes.iter().zip(&qy.weights) {
            pts.push((Point::new(*x, *y), wx * wy));
        }
    }
    pts.par_iter()
        .map(|&(x, w)| {
            let fx = phi.eval(x) * (0.5 * g2 * log_c(x)).exp();
            if fx == 0.0 {
                return 0.0;
            }
            let angles = corner_angles(x, b);
            let mut inner_sum = 0.0;
            for seg in angles.windows(2) {
                if seg[1] - seg[0] < 1e-15 {
                    continue;
                }
                let qt = Composite::new(seg[0], seg[1], angular, order);
                inner_sum += qt.integrate(|theta| {
                    let (c, s) = (theta.cos(), theta.sin());
                    radial_rule(ray_to_box(x, b, theta), g2, levels, order)
                        .iter()
                        .map(|&(rho, wr)| {
                            let y = Point::new(x.x + rho * c, x.y + rho * s);
                            let fy = phi.eval(y);
                            if fy == 0.0 {
                                return 0.0;
                            }
                            let cy = (0.5 * g2 * log_c(y)).exp();
                            wr * fy * cy * (g2 * tilde_unchecked(&domain, x, y)).exp()
                        })
                        .sum::<f64>()
                });
            }
            w * fx * inner_sum
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// `∬ phi(x) phi(y) [C(x) C(y)]^{gamma^2/2} e^{gamma^2 G(x,y)} dx dy`, the
/// `eps -> 0` limit of `E[mu_eps(phi)^2]`.
///
/// Outer Gauss–Legendre over the support box; inner integral in polar
/// coordinates about `x`, split at the box corners, on a radial mesh graded
/// toward the diagonal singularity `|x - y|^{-gamma^2}`. The reported error
/// is the change under one refinement.
pub fn second_moment_limit(phi: &TestFunction, gamma: f64) -> Result<QuadratureValue> {
    if !(0.0..L2_GAMMA_MAX).contains(&gamma) {
        return Err(Error::GammaOutOfRange {
            gamma,
            max: L2_GAMMA_MAX,
        });
    }
    let coarse = second_moment_at(phi, gamma, 3, 2, 8, 6);
    let fine = second_moment_at(phi, gamma, 4, 3, 10, 8);
    Ok(QuadratureValue {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    /// Compares `eps = 2^-k` with `2^-(k+1)`.
    pub k: u32,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyTable {
    pub gamma: f64,
    pub rows: Vec<CauchyRow>,
    /// Paired z-scores of `row[i] - row[i+1]` (positive = decreasing).
    pub decrease_z: Vec<f64>,
    pub out_of_range: bool,
    pub replicates: usize,
    pub cutoff: usize,
}

impl CauchyTable {
    /// Every consecutive decrease is significant at `z_min`.
    pub fn strictly_decreasing(&self, z_min: f64) -> bool {
        self.decrease_z.iter().all(|z| *z > z_min)
    }
}

/// Coupled L² differences `E[(mu_{2^-k}(phi) - mu_{2^-k-1}(phi))^2]` for
/// `k = k_min..=k_max`. All scales in one replicate come from one field, so
/// the differences are those of the almost-sure construction.
pub fn cauchy_diagnostic(
    gamma: f64,
    phi: &TestFunction,
    k_min: u32,
    k_max: u32,
    replicates: usize,
    seed: u64,
    cutoff: Option<usize>,
) -> Result<CauchyTable> {
    let params = LiouvilleParams::new(gamma)?;
    if k_min < 1 || k_max < k_min || k_max > 12 {
        return Err(Error::InvalidParameter(format!("scale range {k_min}..={k_max}")));
    }
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two replicates".into()));
    }
    if !params.in_l2_range() {
        log::warn!("{}", l2_warning(gamma));
    }
    let ks: Vec<u32> = (k_min..=k_max + 1).collect();
    let eps: Vec<f64> = ks.iter().map(|k| 2f64.powi(-(*k as i32))).collect();
    let finest = 1usize << (k_max + 1);
    let cutoff = cutoff.unwrap_or_else(|| cutoff_for_scale(*eps.last().unwrap()));
    let sampler = LatticeSampler::lattice(cutoff, 2 * finest, &eps)?;
    let phis: Vec<_> = ks.iter().map(|k| phi.cell_averages(1 << k)).collect();

    let values: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let sample = sampler.sample(StreamSeed::labelled(seed, "cauchy", r as u64));
            ks.iter()
                .enumerate()
                .map(|(level, k)| {
                    let n = 1usize << k;
                    let h = sampler.grid(&sample, level, n)?;
                    let m = GridMeasure::from_circle_averages(&h, gamma, eps[level])?;
                    super::measure::measure_apply(&m, &phis[level])
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let sq: Vec<Vec<f64>> = (0..ks.len() - 1)
        .map(|i| values.iter().map(|v| (v[i] - v[i + 1]).powi(2)).collect())
        .collect();
    let rows = sq
        .iter()
        .zip(&ks)
        .map(|(d, k)| {
            let e = Estimate::of_mean(d);
            CauchyRow {
                k: *k,
                estimate: e.value,
                stderr: e.stderr,
            }
        })
        .collect();
    let decrease_z = sq
        .windows(2)
        .map(|w| {
            let diff: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect();
            let e = Estimate::of_mean(&diff);
            if e.stderr > 0.0 {
                e.value / e.stderr
            } else if mean(&diff) > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    Ok(CauchyTable {
        gamma,
        rows,
        decrease_z,
        out_of_range: !params.in_l2_range(),
        replicates,
        cutoff,
    })
}

/// Tensor Chebyshev products `T_a(2x-1) T_b(2y-1)` ordered by total degree
/// `a + b`, then by `a`.
pub fn chebyshev_basis(terms: usize) -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(terms);
    let mut d = 0;
    while out.len() < terms {
        for a in 0..=d {
            if out.len() == terms {
                break;
            }
            out.push(TestFunction::Chebyshev { a, b: d - a });
        }
        d += 1;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStarDistance {
    /// `sum_{j <= J} |m1(phi_j) - m2(phi_j)| / 2^j`
    pub distance: f64,
    /// `(total_1 + total_2) 2^{-J}` bounds the omitted terms.
    pub tail_bound: f64,
}

/// Truncated weak* distance with the Chebyshev basis. Each measure
/// integrates the basis at its own resolution, so measures of different
/// resolutions may be compared.
pub fn weak_star_distance(m1: &GridMeasure, m2: &GridMeasure, terms: usize) -> Result<WeakStarDistance> {
    if terms == 0 {
        return Err(Error::InvalidParameter("weak* basis needs at least one term".into()));
    }
    let basis = chebyshev_basis(terms);
    let mut distance = 0.0;
    for (j, phi) in basis.iter().enumerate() {
        let a = super::measure::measure_apply(m1, &phi.cell_averages(m1.resolution))?;
        let b = super::measure::measure_apply(m2, &phi.cell_averages(m2.resolution))?;
        distance += (a - b).abs() / 2f64.powi(j as i32 + 1);
    }
    Ok(WeakStarDistance {
        distance,
        tail_bound: (m1.total + m2.total) * 2f64.powi(-(terms as i32)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::sample_spectral_gff;
    use crate::liouville::build_measure;

    #[test]
    fn gamma_zero_moments() {
        let phi = TestFunction::default();
        let m1 = first_moment_limit(&phi, 0.0).unwrap();
        assert!((m1.value - phi.integral()).abs() < 1e-12);
        let m2 = second_moment_limit(&phi, 0.0).unwrap();
        assert!((m2.value - phi.integral().powi(2)).abs() < 1e-6, "{m2:?}");
        assert!(second_moment_limit(&phi, 1.5).is_err());
    }

    #[test]
    fn second_moment_refinements_agree() {
        let m = second_moment_limit(&TestFunction::default(), 1.0).unwrap();
        assert!(m.error < 1e-3 * m.value, "{m:?}");
        // e^{gamma^2 G} > 0 and the bump integrates to 9/64.
        assert!(m.value > (9.0f64 / 64.0).powi(2) * 0.5);
    }

    #[test]
    fn cauchy_gamma_zero_is_zero() {
        let t = cauchy_diagnostic(0.0, &TestFunction::default(), 2, 3, 3, 1, Some(20)).unwrap();
        assert!(t.rows.iter().all(|r| r.estimate < 1e-28));
        assert!(!t.out_of_range);
        let t = cauchy_diagnostic(1.8, &TestFunction::default(), 2, 3, 3, 1, Some(20)).unwrap();
        assert!(t.out_of_range);
    }

    #[test]
    fn basis_order() {
        let b = chebyshev_basis(6);
        assert_eq!(b[0], TestFunction::Chebyshev { a: 0, b: 0 });
        assert_eq!(b[1], TestFunction::Chebyshev { a: 0, b: 1 });
        assert_eq!(b[2], TestFunction::Chebyshev { a: 1, b: 0 });
        assert_eq!(b[5], TestFunction::Chebyshev { a: 2, b: 0 });
    }

    #[test]
    fn weak_star_lebesgue() {
        let f = sample_spectral_gff(16, StreamSeed::new(0, 0)).unwrap();
        let a = build_measure(&f, 0.0, 8).unwrap();
        let b = build_measure(&f, 0.0, 32).unwrap();
        assert!(weak_star_distance(&a, &b, 20).unwrap().distance < 1e-14);
        let c = build_measure(&f, 1.0, 8).unwrap();
        assert_eq!(weak_star_distance(&c, &c, 20).unwrap().distance, 0.0);
    }
}
