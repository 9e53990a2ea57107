//! Truncated-series Gaussian free field on the unit square.
//!
//! `h = sum_{j,k <= M} a_{jk} e_{jk}` with i.i.d. standard Gaussian
//! `a_{jk}` and the H^1-orthonormal modes
//! `e_{jk}(x, y) = c_{jk} sin(j pi x) sin(k pi y)`, `c_{jk} = sqrt(8 / (pi (j^2 + k^2)))`.
//!
//! Circle averages use the mean-value identity for Laplace eigenfunctions:
//! the average of `e_{jk}` over the circle of radius `eps` about `z` is
//! `e_{jk}(z) J0(pi eps sqrt(j^2 + k^2))`. This is exact for the truncated
//! series.

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::fold::{cell_centres, fold_table, sine_matrix, synthesize, FoldMap};
use crate::error::{Error, Result};
use crate::geometry::{square_mode_weight, DomainSpec, Point};
use crate::rng::StreamSeed;
use crate::special::bessel_j0;

/// Circle averages at scale `eps` need `pi * M * eps` at least this large
/// for the discarded modes to stay below about 1% of the variance.
pub const CUTOFF_RULE: f64 = 50.0;

/// Smallest cutoff satisfying the cutoff rule at scale `eps`.
pub fn cutoff_for_scale(eps: f64) -> usize {
    (CUTOFF_RULE / (PI * eps)).ceil() as usize
}

pub fn satisfies_cutoff_rule(cutoff: usize, eps: f64) -> bool {
    PI * cutoff as f64 * eps >= CUTOFF_RULE
}

/// `c_{jk}`.
#[inline]
pub fn mode_norm(j: usize, k: usize) -> f64 {
    square_mode_weight(j, k).sqrt()
}

/// A realized truncated-series field. Immutable once sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    cutoff: usize,
    /// `a_{jk}` row-major, index `(j - 1) * cutoff + (k - 1)`.
    coeffs: Vec<f64>,
    seed: Option<StreamSeed>,
}

impl SpectralField {
    pub fn from_coefficients(cutoff: usize, coeffs: Vec<f64>) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        if coeffs.len() != cutoff * cutoff {
            return Err(Error::DimensionMismatch {
                expected: format!("{} coefficients", cutoff * cutoff),
                found: coeffs.len().to_string(),
            });
        }
        Ok(Self {
            cutoff,
            coeffs,
            seed: None,
        })
    }

    pub fn zeros(cutoff: usize) -> Result<Self> {
        Self::from_coefficients(cutoff, vec![0.0; cutoff * cutoff])
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn seed(&self) -> Option<StreamSeed> {
        self.seed
    }

    pub fn domain(&self) -> DomainSpec {
        DomainSpec::unit_square()
    }

    /// `a_{jk}`, 1-based indices.
    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        self.coeffs[(j - 1) * self.cutoff + (k - 1)]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Pointwise value of the truncated series by direct summation.
    pub fn value_at(&self, p: Point) -> f64 {
        let m = self.cutoff;
        let sy: Vec<f64> = (1..=m).map(|k| (k as f64 * PI * p.y).sin()).collect();
        let mut total = 0.0;
        for j in 1..=m {
            let row = &self.coeffs[(j - 1) * m..j * m];
            let inner: f64 = row
                .iter()
                .zip(&sy)
                .enumerate()
                .map(|(k, (a, s))| a * mode_norm(j, k + 1) * s)
                .sum();
            total += (j as f64 * PI * p.x).sin() * inner;
        }
        total
    }
}

/// Draw `M^2` i.i.d. standard Gaussian coefficients from the stream `seed`.
pub fn sample_spectral_gff(cutoff: usize, seed: StreamSeed) -> Result<SpectralField> {
    if cutoff == 0 {
        return Err(Error::InvalidCutoff(0));
    }
    let mut rng = seed.rng();
    let coeffs: Vec<f64> = (0..cutoff * cutoff)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SpectralField {
        cutoff,
        coeffs,
        seed: Some(seed),
    })
}

/// Field values at the `n x n` cell centres `((i + 1/2)/n, (l + 1/2)/n)`,
/// indexed `[i, l]`.
pub fn evaluate_field(field: &SpectralField, n: usize) -> Result<Array2<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid resolution must be >= 2, got {n}")));
    }
    Ok(GridKernel::new(field.cutoff, n, 0.0)?.apply(field))
}

/// Circle averages `h_eps` at every cell centre of an `n x n` grid.
/// Cells closer than `eps` to the boundary get the same formula.
pub fn circle_average_grid(field: &SpectralField, n: usize, eps: f64) -> Result<Array2<f64>> {
    Ok(GridKernel::new(field.cutoff, n, eps)?.apply(field))
}

/// Precomputed synthesis of `h_eps` on a cell-centred grid; reusable across
/// fields of the same cutoff.
#[derive(Clone, Debug)]
pub struct GridKernel {
    cutoff: usize,
    resolution: usize,
    eps: f64,
    amplitude: Vec<f64>,
    map: FoldMap,
    sines: Array2<f64>,
}

impl GridKernel {
    /// `eps = 0` gives point values.
    pub fn new(cutoff: usize, resolution: usize, eps: f64) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        if resolution < 1 || !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resolution {resolution}, eps {eps}"
            )));
        }
        if eps > 0.0 && !satisfies_cutoff_rule(cutoff, eps) {
            log::warn!(
                "cutoff {cutoff} below the rule pi*M*eps >= {CUTOFF_RULE} at eps = {eps}"
            );
        }
        let mut amplitude = Vec::with_capacity(cutoff * cutoff);
        for j in 1..=cutoff {
            for k in 1..=cutoff {
                let rho = ((j * j + k * k) as f64).sqrt();
                amplitude.push(mode_norm(j, k) * bessel_j0(PI * eps * rho));
            }
        }
        let map = FoldMap::cell_centres(resolution);
        let sines = sine_matrix(&cell_centres(resolution), map.modes());
        Ok(Self {
            cutoff,
            resolution,
            eps,
            amplitude,
            map,
            sines,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn apply(&self, field: &SpectralField) -> Array2<f64> {
        let n = self.resolution;
        self.apply_window(field, 0..n, 0..n)
    }

    /// Values on the cell block `xr x yr` only.
    pub fn apply_window(&self, field: &SpectralField, xr: Range<usize>, yr: Range<usize>) -> Array2<f64> {
        assert_eq!(field.cutoff, self.cutoff, "kernel built for a different cutoff");
        let scaled: Vec<f64> = field
            .coeffs
            .iter()
            .zip(&self.amplitude)
            .map(|(a, w)| a * w)
            .collect();
        let folded = fold_table(&scaled, self.cutoff, &self.map);
        synthesize(&self.sines, &folded, xr, yr)
    }
}

/// Coefficients `alpha_{jk}` of a test function in the `e_{jk}` basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub rows: usize,
    pub cols: usize,
    /// row-major, `(j - 1) * cols + (k - 1)`
    pub values: Vec<f64>,
}

impl CoeffTable {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// The basis function `e_{jk}` itself.
    pub fn unit(rows: usize, cols: usize, j: usize, k: usize) -> Self {
        let mut t = Self::zeros(rows, cols);
        t.values[(j - 1) * cols + (k - 1)] = 1.0;
        t
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j - 1) * self.cols + (k - 1)]
    }

    /// Dirichlet inner product `<f, g>_grad = sum alpha beta`.
    pub fn dot(&self, other: &CoeffTable) -> f64 {
        let mut s = 0.0;
        for j in 1..=self.rows.min(other.rows) {
            for k in 1..=self.cols.min(other.cols) {
                s += self.get(j, k) * other.get(j, k);
            }
        }
        s
    }
}

/// `<h, f>_grad = sum a_{jk} alpha_{jk}`.
pub fn pair_h_f(field: &SpectralField, f: &CoeffTable) -> Result<f64> {
    if f.rows > field.cutoff || f.cols > field.cutoff {
        return Err(Error::DimensionMismatch {
            expected: format!("at most {0} x {0}", field.cutoff),
            found: format!("{} x {}", f.rows, f.cols),
        });
    }
    let mut s = 0.0;
    for j in 1..=f.rows {
        for k in 1..=f.cols {
            s += field.coeff(j, k) * f.get(j, k);
        }
    }
    Ok(s)
}

/// Linear functional `field -> h_eps(z)` for a fixed cutoff.
#[derive(Clone, Debug)]
pub struct CircleKernel {
    cutoff: usize,
    center: Point,
    eps: f64,
    weights: Vec<f64>,
}

impl CircleKernel {
    pub fn new(cutoff: usize, center: Point, eps: f64) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let domain = DomainSpec::unit_square();
        domain.require_interior(center)?;
        let d = domain.dist_to_boundary(center);
        if d < eps {
            return Err(Error::BoundaryTooClose {
                dist: d,
                required: eps,
            });
        }
        if !satisfies_cutoff_rule(cutoff, eps) {
            log::warn!(
                "cutoff {cutoff} below the rule pi*M*eps >= {CUTOFF_RULE} at eps = {eps}"
            );
        }
        let sx: Vec<f64> = (1..=cutoff).map(|j| (j as f64 * PI * center.x).sin()).collect();
        let sy: Vec<f64> = (1..=cutoff).map(|k| (k as f64 * PI * center.y).sin()).collect();
        let mut weights = Vec::with_capacity(cutoff * cutoff);
        for j in 1..=cutoff {
            for k in 1..=cutoff {
                let rho = ((j * j + k * k) as f64).sqrt();
                weights.push(mode_norm(j, k) * sx[j - 1] * sy[k - 1] * bessel_j0(PI * eps * rho));
            }
        }
        Ok(Self {
            cutoff,
            center,
            eps,
            weights,
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn apply(&self, field: &SpectralField) -> f64 {
        assert_eq!(field.cutoff, self.cutoff, "kernel built for a different cutoff");
        field.coeffs.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Exact variance of `h_eps(z)` under the truncated series.
    pub fn variance(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// Exact covariance with another functional of the same cutoff.
    pub fn covariance(&self, other: &CircleKernel) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(a, b)| a * b).sum()
    }
}

/// `h_eps(z)`: the truncated field averaged over the circle `|w - z| = eps`.
pub fn circle_average(field: &SpectralField, z: Point, eps: f64) -> Result<f64> {
    Ok(CircleKernel::new(field.cutoff, z, eps)?.apply(field))
}

/// Circle-average process `Y_t = h_{e^{-t}}(z)` on a time lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclePath {
    pub center: Point,
    /// `t0 = log(1 / dist(z, boundary))`
    pub t0: f64,
    /// `t0, t0 + dt, ...`
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CirclePath {
    /// `B_t = Y_{t0 + t} - Y_{t0}`, indexed like `times`.
    pub fn increments(&self) -> Vec<f64> {
        self.values.iter().map(|v| v - self.values[0]).collect()
    }
}

/// Kernels for every time of a circle process, reusable across fields.
#[derive(Clone, Debug)]
pub struct CircleProcessKernel {
    center: Point,
    t0: f64,
    times: Vec<f64>,
    kernels: Vec<CircleKernel>,
}

impl CircleProcessKernel {
    pub fn new(cutoff: usize, z: Point, t_max: f64, dt: f64) -> Result<Self> {
        let domain = DomainSpec::unit_square();
        domain.require_interior(z)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let t0 = -domain.dist_to_boundary(z).ln();
        if !(t_max > t0) {
            return Err(Error::InvalidParameter(format!(
                "t_max = {t_max} must exceed t0 = {t0}"
            )));
        }
        let steps = ((t_max - t0) / dt + 1e-9).floor() as usize;
        let times: Vec<f64> = (0..=steps).map(|i| t0 + i as f64 * dt).collect();
        // e^{-t0} is exactly the boundary distance; shave the rounding.
        let kernels = times
            .iter()
            .map(|t| {
                let r = (-t).exp().min(domain.dist_to_boundary(z));
                CircleKernel::new(cutoff, z, r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            center: z,
            t0,
            times,
            kernels,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kernels(&self) -> &[CircleKernel] {
        &self.kernels
    }

    pub fn apply(&self, field: &SpectralField) -> CirclePath {
        CirclePath {
            center: self.center,
            t0: self.t0,
            times: self.times.clone(),
            values: self.kernels.iter().map(|k| k.apply(field)).collect(),
        }
    }
}

/// Sample `Y_t = h_{e^{-t}}(z)` for `t = t0, t0 + dt, ... <= t_max`.
pub fn circle_process(field: &SpectralField, z: Point, t_max: f64, dt: f64) -> Result<CirclePath> {
    Ok(CircleProcessKernel::new(field.cutoff, z, t_max, dt)?.apply(field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cutoff_rejected() {
        assert_eq!(
            sample_spectral_gff(0, StreamSeed::new(1, 0)),
            Err(Error::InvalidCutoff(0))
        );
    }

    #[test]
    fn same_seed_same_field() {
        let a = sample_spectral_gff(16, StreamSeed::new(5, 2)).unwrap();
        let b = sample_spectral_gff(16, StreamSeed::new(5, 2)).unwrap();
        assert_eq!(a, b);
        let c = sample_spectral_gff(16, StreamSeed::new(5, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_field_is_zero_everywhere() {
        let f = SpectralField::zeros(12).unwrap();
        assert!(evaluate_field(&f, 8).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(circle_average(&f, Point::new(0.4, 0.5), 0.1).unwrap(), 0.0);
        let path = circle_process(&f, Point::new(0.5, 0.5), 3.0, 0.5).unwrap();
        assert!(path.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_grid() {
        let mut c = vec![0.0; 9];
        c[0] = 1.0;
        let f = SpectralField::from_coefficients(3, c).unwrap();
        let n = 16;
        let g = evaluate_field(&f, n).unwrap();
        let c11 = mode_norm(1, 1);
        for i in 0..n {
            for l in 0..n {
                let (x, y) = ((i as f64 + 0.5) / n as f64, (l as f64 + 0.5) / n as f64);
                let want = c11 * (PI * x).sin() * (PI * y).sin();
                assert!((g[[i, l]] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn pairing() {
        let f = sample_spectral_gff(6, StreamSeed::new(9, 0)).unwrap();
        assert_eq!(pair_h_f(&f, &CoeffTable::unit(6, 6, 1, 1)).unwrap(), f.coeff(1, 1));
        assert_eq!(pair_h_f(&f, &CoeffTable::zeros(3, 4)).unwrap(), 0.0);
        assert!(matches!(
            pair_h_f(&f, &CoeffTable::zeros(7, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn circle_average_small_eps_is_point_value() {
        let f = sample_spectral_gff(64, StreamSeed::new(3, 1)).unwrap();
        let z = Point::new(0.37, 0.61);
        let v = f.value_at(z);
        // 1 - J0(x) <= x^2 / 4 bounds the gap mode by mode.
        for eps in [1e-4, 1e-5, 1e-6] {
            let mut bound = 0.0;
            for j in 1..=64 {
                for k in 1..=64 {
                    let x2 = (PI * eps).powi(2) * (j * j + k * k) as f64;
                    bound += f.coeff(j, k).abs() * mode_norm(j, k) * x2 / 4.0;
                }
            }
            let gap = (circle_average(&f, z, eps).unwrap() - v).abs();
            assert!(gap <= bound * (1.0 + 1e-9) + 1e-13, "eps {eps}: {gap} > {bound}");
        }
        assert!((circle_average(&f, z, 1e-6).unwrap() - v).abs() < 1e-6);
    }

    #[test]
    fn circle_average_boundary_check() {
        let f = SpectralField::zeros(4).unwrap();
        assert!(matches!(
            circle_average(&f, Point::new(0.05, 0.5), 0.1),
            Err(Error::BoundaryTooClose { .. })
        ));
    }

    #[test]
    fn circle_process_times() {
        let f = SpectralField::zeros(4).unwrap();
        let p = circle_process(&f, Point::new(0.5, 0.5), 2.0f64.ln() + 1.0, 0.25).unwrap();
        assert_eq!(p.times.len(), 5);
        assert!((p.t0 - 2f64.ln()).abs() < 1e-15);
        assert!(circle_process(&f, Point::new(0.5, 0.5), 0.1, 0.25).is_err());
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(cutoff_for_scale(1.0 / 64.0), 1019);
        assert!(satisfies_cutoff_rule(1019, 1.0 / 64.0));
        assert!(!satisfies_cutoff_rule(1018, 1.0 / 64.0));
    }
}
