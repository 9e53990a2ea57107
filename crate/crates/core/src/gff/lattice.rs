//! Exact joint sampler for circle averages of the truncated field on dyadic
//! lattices.
//!
//! All cell centres and lattice points `m / P` see only `P - 1` distinct sine
//! modes per axis (see `fold`). Folding the series mode by mode, the
//! coefficient of each folded class `(t, u)` is a sum of independent
//! Gaussians, and the classes are independent of each other. For a list of
//! radii `eps_1..eps_K` the `K` class coefficients are jointly Gaussian with
//! covariance `sum c_{jk}^2 J0(pi eps_a rho) J0(pi eps_b rho)` over the class.
//! Sampling `K` normals per class therefore gives, exactly in law, the joint
//! circle-average fields of one `M`-mode field at every radius, at a cost
//! independent of `M`.

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::fold::{cell_centres, fold_table, sine_matrix, synthesize, FoldMap};
use super::spectral::{mode_norm, SpectralField};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::StreamSeed;
use crate::special::bessel_j0;

#[derive(Clone, Debug)]
pub struct LatticeSampler {
    cutoff: usize,
    map: FoldMap,
    eps: Vec<f64>,
    /// Packed lower Cholesky factors, `tri(K)` entries per class, classes
    /// row-major over `modes x modes`.
    chol: Vec<f64>,
    /// Packed class covariances, same layout.
    cov: Vec<f64>,
    /// `(resolution, sine matrix)` for every grid this sampler can serve.
    grids: Vec<(usize, Array2<f64>)>,
}

/// One joint draw: the folded class coefficients at every radius.
#[derive(Clone, Debug)]
pub struct LatticeSample {
    pub levels: Vec<Array2<f64>>,
}

fn tri(k: usize) -> usize {
    k * (k + 1) / 2
}

#[inline]
fn packed(a: usize, b: usize) -> usize {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    a * (a + 1) / 2 + b
}

/// In-place packed Cholesky. Pivots that vanish to rounding (classes whose
/// radii are numerically indistinguishable) get a zero column.
fn cholesky_packed(a: &mut [f64], k: usize) {
    for j in 0..k {
        let mut d = a[packed(j, j)];
        for m in 0..j {
            d -= a[packed(j, m)] * a[packed(j, m)];
        }
        let scale = a[packed(j, j)].abs().max(f64::MIN_POSITIVE);
        let ljj = if d > 1e-13 * scale { d.sqrt() } else { 0.0 };
        a[packed(j, j)] = ljj;
        for i in j + 1..k {
            let mut s = a[packed(i, j)];
            for m in 0..j {
                s -= a[packed(i, m)] * a[packed(j, m)];
            }
            a[packed(i, j)] = if ljj > 0.0 { s / ljj } else { 0.0 };
        }
    }
}

impl LatticeSampler {
    /// Sampler for the cell centres of a single `n x n` grid.
    pub fn cell_centres(cutoff: usize, n: usize, eps: &[f64]) -> Result<Self> {
        Self::build(cutoff, FoldMap::cell_centres(n), eps)
    }

    /// Sampler for every point `m / period`; serves the cell centres of every
    /// grid `n` with `2n | period`.
    pub fn lattice(cutoff: usize, period: usize, eps: &[f64]) -> Result<Self> {
        if period < 2 {
            return Err(Error::InvalidParameter(format!("period must be >= 2, got {period}")));
        }
        Self::build(cutoff, FoldMap::lattice(period), eps)
    }

    fn build(cutoff: usize, map: FoldMap, eps: &[f64]) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        if eps.is_empty() || eps.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidParameter("need at least one radius, all >= 0".into()));
        }
        let k = eps.len();
        let modes = map.modes();
        let t = tri(k);
        let targets = map.table(cutoff);
        // Modes folding onto each target row; rows are filled independently.
        let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); modes];
        for (j, tj) in targets.iter().enumerate() {
            if let Some((row, _)) = tj {
                by_row[row - 1].push(j + 1);
            }
        }
        let mut cov = vec![0.0; modes * modes * t];
        cov.par_chunks_mut(modes * t)
            .zip(by_row.par_iter())
            .for_each(|(row_cov, js)| {
                let mut j0 = vec![0.0; k];
                for &j in js {
                    for kk in 1..=cutoff {
                        let Some((u, _)) = targets[kk - 1] else { continue };
                        let rho = ((j * j + kk * kk) as f64).sqrt();
                        let w = mode_norm(j, kk).powi(2);
                        for (v, e) in j0.iter_mut().zip(eps) {
                            *v = bessel_j0(PI * e * rho);
                        }
                        let cell = &mut row_cov[(u - 1) * t..u * t];
                        for a in 0..k {
                            for b in 0..=a {
                                cell[packed(a, b)] += w * j0[a] * j0[b];
                            }
                        }
                    }
                }
            });
        let mut chol = cov.clone();
        chol.par_chunks_mut(t).for_each(|c| cholesky_packed(c, k));

        let mut grids = Vec::new();
        let mut n = map.period() / 2;
        loop {
            grids.push((n, sine_matrix(&cell_centres(n), n)));
            if map.odd_only() || n % 2 != 0 || n < 2 {
                break;
            }
            n /= 2;
        }
        Ok(Self {
            cutoff,
            map,
            eps: eps.to_vec(),
            chol,
            cov,
            grids,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn radii(&self) -> &[f64] {
        &self.eps
    }

    pub fn modes(&self) -> usize {
        self.map.modes()
    }

    /// Grid resolutions whose cell centres this sampler covers.
    pub fn resolutions(&self) -> Vec<usize> {
        self.grids.iter().map(|(n, _)| *n).collect()
    }

    fn period(&self) -> usize {
        self.map.period()
    }

    /// Draw all classes from one RNG stream in a fixed order.
    pub fn sample(&self, seed: StreamSeed) -> LatticeSample {
        let k = self.eps.len();
        let modes = self.map.modes();
        let t = tri(k);
        let mut rng = seed.rng();
        let mut levels = vec![Array2::<f64>::zeros((modes, modes)); k];
        let mut z = vec![0.0; k];
        for class in 0..modes * modes {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let l = &self.chol[class * t..(class + 1) * t];
            let (r, c) = (class / modes, class % modes);
            for a in 0..k {
                let mut s = 0.0;
                for b in 0..=a {
                    s += l[packed(a, b)] * z[b];
                }
                levels[a][[r, c]] = s;
            }
        }
        LatticeSample { levels }
    }

    /// Fold a concrete field instead of sampling: the same linear map the
    /// sampler reproduces in law.
    pub fn fold_field(&self, field: &SpectralField) -> Result<LatticeSample> {
        if field.cutoff() != self.cutoff {
            return Err(Error::DimensionMismatch {
                expected: format!("cutoff {}", self.cutoff),
                found: format!("cutoff {}", field.cutoff()),
            });
        }
        let m = self.cutoff;
        let levels = self
            .eps
            .iter()
            .map(|e| {
                let mut amp = Vec::with_capacity(m * m);
                for j in 1..=m {
                    for k in 1..=m {
                        let rho = ((j * j + k * k) as f64).sqrt();
                        amp.push(field.coeff(j, k) * mode_norm(j, k) * bessel_j0(PI * e * rho));
                    }
                }
                fold_table(&amp, m, &self.map)
            })
            .collect();
        Ok(LatticeSample { levels })
    }

    fn sines_for(&self, n: usize) -> Result<&Array2<f64>> {
        self.grids
            .iter()
            .find(|(r, _)| *r == n)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::InvalidParameter(format!("resolution {n} not served by this sampler")))
    }

    /// Circle averages at radius `eps[level]` on the cell centres of the
    /// `n x n` grid, restricted to the block `xr x yr`.
    pub fn grid_window(
        &self,
        sample: &LatticeSample,
        level: usize,
        n: usize,
        xr: Range<usize>,
        yr: Range<usize>,
    ) -> Result<Array2<f64>> {
        let sines = self.sines_for(n)?;
        let b = &sample.levels[level];
        if self.map == FoldMap::cell_centres(n) {
            return Ok(synthesize(sines, b, xr, yr));
        }
        // Refold the lattice classes onto the coarser odd lattice.
        let coarse = FoldMap::cell_centres(n);
        let modes = self.map.modes();
        let flat: Vec<f64> = b.iter().copied().collect();
        debug_assert_eq!(flat.len(), modes * modes);
        Ok(synthesize(sines, &fold_table(&flat, modes, &coarse), xr, yr))
    }

    pub fn grid(&self, sample: &LatticeSample, level: usize, n: usize) -> Result<Array2<f64>> {
        self.grid_window(sample, level, n, 0..n, 0..n)
    }

    fn lattice_sines(&self, p: Point) -> Result<(Vec<f64>, Vec<f64>)> {
        let period = self.period() as f64;
        let modes = self.map.modes();
        let mut out = Vec::with_capacity(2);
        for c in [p.x, p.y] {
            let m = c * period;
            let odd_ok = !self.map.odd_only() || (m.round() as i64) % 2 == 1;
            if (m - m.round()).abs() > 1e-9 || m.round() <= 0.0 || m.round() >= period || !odd_ok {
                return Err(Error::InvalidParameter(format!(
                    "({}, {}) is not a point of this sampler's lattice",
                    p.x, p.y
                )));
            }
            let x = m.round() / period;
            out.push((1..=modes).map(|t| (t as f64 * PI * x).sin()).collect::<Vec<_>>());
        }
        let sy = out.pop().unwrap();
        let sx = out.pop().unwrap();
        Ok((sx, sy))
    }

    /// Circle average at radius `eps[level]` about a lattice point.
    pub fn point(&self, sample: &LatticeSample, level: usize, p: Point) -> Result<f64> {
        let (sx, sy) = self.lattice_sines(p)?;
        let b = &sample.levels[level];
        let mut s = 0.0;
        for (r, row) in b.outer_iter().enumerate() {
            let inner: f64 = row.iter().zip(&sy).map(|(v, w)| v * w).sum();
            s += sx[r] * inner;
        }
        Ok(s)
    }

    /// Exact covariance of the radius-`a` average at `p` and the radius-`b`
    /// average at `q`, both lattice points.
    pub fn covariance(&self, a: usize, p: Point, b: usize, q: Point) -> Result<f64> {
        let (px, py) = self.lattice_sines(p)?;
        let (qx, qy) = self.lattice_sines(q)?;
        let modes = self.map.modes();
        let t = tri(self.eps.len());
        let mut s = 0.0;
        for r in 0..modes {
            for c in 0..modes {
                let class = r * modes + c;
                s += self.cov[class * t + packed(a, b)] * px[r] * qx[r] * py[c] * qy[c];
            }
        }
        Ok(s)
    }

    /// Largest relative defect of `L L^T` against the class covariances.
    pub fn factor_defect(&self) -> f64 {
        let k = self.eps.len();
        let t = tri(k);
        let mut worst: f64 = 0.0;
        for (c, l) in self.cov.chunks(t).zip(self.chol.chunks(t)) {
            let scale = (0..k).map(|a| c[packed(a, a)]).fold(0.0, f64::max);
            if scale == 0.0 {
                continue;
            }
            for a in 0..k {
                for b in 0..=a {
                    let s: f64 = (0..=b).map(|m| l[packed(a, m)] * l[packed(b, m)]).sum();
                    worst = worst.max((s - c[packed(a, b)]).abs() / scale);
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::spectral::{sample_spectral_gff, CircleKernel, GridKernel};

    #[test]
    fn folded_field_matches_direct_grid() {
        let m = 40;
        let field = sample_spectral_gff(m, StreamSeed::new(11, 0)).unwrap();
        let eps = [0.0, 1.0 / 16.0, 1.0 / 8.0];
        let s = LatticeSampler::lattice(m, 32, &eps).unwrap();
        assert_eq!(s.resolutions(), vec![16, 8, 4, 2, 1]);
        let folded = s.fold_field(&field).unwrap();
        for (level, e) in eps.iter().enumerate() {
            for n in [16, 8, 4] {
                let direct = GridKernel::new(m, n, *e).unwrap().apply(&field);
                let via = s.grid(&folded, level, n).unwrap();
                for (a, b) in direct.iter().zip(via.iter()) {
                    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
                }
            }
        }
        let z = Point::new(0.5, 0.25);
        let direct = CircleKernel::new(m, z, 1.0 / 8.0).unwrap().apply(&field);
        assert!((s.point(&folded, 2, z).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn class_covariance_matches_direct_kernels() {
        let m = 48;
        let eps = [1.0 / 32.0, 1.0 / 8.0];
        let s = LatticeSampler::lattice(m, 16, &eps).unwrap();
        assert!(s.factor_defect() < 1e-12);
        let p = Point::new(0.5, 0.5);
        let q = Point::new(0.25, 0.625);
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let ka = CircleKernel::new(m, p, eps[a]).unwrap();
            let kb = CircleKernel::new(m, q, eps[b]).unwrap();
            let want = ka.covariance(&kb);
            let got = s.covariance(a, p, b, q).unwrap();
            assert!((want - got).abs() < 1e-12, "{want} vs {got}");
        }
    }

    #[test]
    fn cell_centre_sampler_rejects_other_points() {
        let s = LatticeSampler::cell_centres(8, 4, &[0.1]).unwrap();
        assert!(s.point(&s.sample(StreamSeed::new(1, 1)), 0, Point::new(0.5, 0.5)).is_err());
        assert!(s.point(&s.sample(StreamSeed::new(1, 1)), 0, Point::new(0.375, 0.625)).is_ok());
        assert!(s.grid(&s.sample(StreamSeed::new(1, 1)), 0, 2).is_err());
    }

    #[test]
    fn sample_is_deterministic() {
        let s = LatticeSampler::cell_centres(30, 8, &[0.05, 0.1]).unwrap();
        let a = s.sample(StreamSeed::new(3, 4));
        let b = s.sample(StreamSeed::new(3, 4));
        assert_eq!(a.levels, b.levels);
    }
}
