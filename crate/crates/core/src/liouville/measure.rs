use std::f64::consts::SQRT_2;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gff::{GridKernel, SpectralField};

/// Above this coupling the L² theory of the regularized measures fails.
pub const L2_GAMMA_MAX: f64 = SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleParams {
    pub gamma: f64,
    /// `2/gamma + gamma/2`
    pub q: Option<f64>,
    /// `2/gamma - gamma/2`
    pub a: Option<f64>,
}

impl LiouvilleParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&gamma) {
            return Err(Error::GammaOutOfRange { gamma, max: 2.0 });
        }
        let (q, a) = if gamma > 0.0 {
            (Some(2.0 / gamma + gamma / 2.0), Some(2.0 / gamma - gamma / 2.0))
        } else {
            (None, None)
        };
        Ok(Self { gamma, q, a })
    }

    pub fn in_l2_range(&self) -> bool {
        self.gamma < L2_GAMMA_MAX
    }
}

pub(crate) fn l2_warning(gamma: f64) -> String {
    format!("gamma = {gamma} >= sqrt(2): L2 diagnostics are outside their valid range")
}

/// Cell masses of `mu_eps` on an `n x n` grid, `masses[[i, l]]` for the cell
/// centred at `((i + 1/2)/n, (l + 1/2)/n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    pub resolution: usize,
    pub eps: f64,
    pub gamma: f64,
    pub masses: Array2<f64>,
    pub total: f64,
    pub warnings: Vec<String>,
}

impl GridMeasure {
    /// Measure from circle averages `h_eps` at the cell centres.
    pub fn from_circle_averages(h: &Array2<f64>, gamma: f64, eps: f64) -> Result<Self> {
        let params = LiouvilleParams::new(gamma)?;
        let (n, m) = h.dim();
        if n != m || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: "square grid".into(),
                found: format!("{n} x {m}"),
            });
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let log_scale = 0.5 * gamma * gamma * eps.ln();
        let cell = 1.0 / (n * n) as f64;
        let masses = h.mapv(|v| (gamma * v + log_scale).exp() * cell);
        let total = masses.sum();
        let mut warnings = Vec::new();
        if !params.in_l2_range() {
            log::warn!("{}", l2_warning(gamma));
            warnings.push(l2_warning(gamma));
        }
        Ok(Self {
            resolution: n,
            eps,
            gamma,
            masses,
            total,
            warnings,
        })
    }

    pub fn cell_centre(&self, i: usize, l: usize) -> Point {
        let n = self.resolution as f64;
        Point::new((i as f64 + 0.5) / n, (l as f64 + 0.5) / n)
    }

    /// Cells whose centre lies within `eps` of the boundary.
    pub fn is_boundary_cell(&self, i: usize, l: usize) -> bool {
        let c = self.cell_centre(i, l);
        c.x.min(c.y).min(1.0 - c.x).min(1.0 - c.y) < self.eps
    }

    pub fn log_masses(&self) -> Array2<f64> {
        self.masses.mapv(f64::ln)
    }
}

/// `mu_eps` with `eps = 1/n` from a spectral field.
pub fn build_measure(field: &SpectralField, gamma: f64, n: usize) -> Result<GridMeasure> {
    LiouvilleParams::new(gamma)?;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("resolution must be a power of two >= 2, got {n}")));
    }
    let eps = 1.0 / n as f64;
    let h = GridKernel::new(field.cutoff(), n, eps)?.apply(field);
    GridMeasure::from_circle_averages(&h, gamma, eps)
}

/// `sum_cells phi(c) mass(c)`.
pub fn measure_apply(m: &GridMeasure, phi: &Array2<f64>) -> Result<f64> {
    if phi.dim() != m.masses.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0} x {0}", m.resolution),
            found: format!("{:?}", phi.dim()),
        });
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("test function must be finite".into()));
    }
    Ok(phi.iter().zip(m.masses.iter()).map(|(a, b)| a * b).sum())
}
