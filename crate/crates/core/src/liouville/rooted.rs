use std::ops::Range;

use ndarray::Array2;
use rand::Rng;

use super::measure::LiouvilleParams;
use crate::error::{Error, Result};
use crate::geometry::{regularized_unchecked, tilde_unchecked, DomainSpec, Point};
use crate::gff::{circle_average, GridKernel, SpectralField};

/// A field shifted by `gamma G^z`: the Cameron–Martin tilt that samples the
/// root `z` first.
#[derive(Clone, Debug, PartialEq)]
pub struct RootedField {
    pub base: SpectralField,
    pub root: Point,
    pub gamma: f64,
}

pub fn root_shift(field: &SpectralField, z: Point, gamma: f64) -> Result<RootedField> {
    LiouvilleParams::new(gamma)?;
    DomainSpec::unit_square().require_interior(z)?;
    Ok(RootedField {
        base: field.clone(),
        root: z,
        gamma,
    })
}

impl RootedField {
    /// `gamma` times the average of `G(z, .)` over the circle of radius
    /// `eps` about `p`.
    pub fn shift(&self, p: Point, eps: f64) -> f64 {
        self.gamma * regularized_unchecked(&DomainSpec::unit_square(), self.root, p, eps)
    }

    pub fn circle_average(&self, p: Point, eps: f64) -> Result<f64> {
        Ok(circle_average(&self.base, p, eps)? + self.shift(p, eps))
    }
}

/// `gamma G_eps(z, c)` on the cell centres `xr x yr` of an `n x n` grid.
pub fn root_shift_grid(
    z: Point,
    gamma: f64,
    n: usize,
    eps: f64,
    xr: Range<usize>,
    yr: Range<usize>,
) -> Array2<f64> {
    let domain = DomainSpec::unit_square();
    let nf = n as f64;
    let (x0, y0) = (xr.start, yr.start);
    Array2::from_shape_fn((xr.len(), yr.len()), |(i, l)| {
        let c = Point::new((x0 + i) as f64 / nf + 0.5 / nf, (y0 + l) as f64 / nf + 0.5 / nf);
        gamma * regularized_unchecked(&domain, z, c, eps)
    })
}

/// Cell window `[lo, hi)` per axis covering every cell centre within `r` of
/// `z`.
pub(crate) fn ball_window(z: Point, r: f64, n: usize) -> (Range<usize>, Range<usize>) {
    let nf = n as f64;
    let span = |c: f64| {
        let lo = ((c - r) * nf - 0.5).floor().max(0.0) as usize;
        let hi = (((c + r) * nf - 0.5).ceil() as usize + 1).min(n);
        lo..hi
    };
    (span(z.x), span(z.y))
}

/// Mass of the open ball `|c - z| < r` from circle averages `h` on a cell
/// window with origin `(x0, y0)`.
#[allow(clippy::too_many_arguments)]
pub fn ball_mass_in_window(
    h: &Array2<f64>,
    origin: (usize, usize),
    n: usize,
    z: Point,
    r: f64,
    gamma: f64,
    eps: f64,
) -> f64 {
    let nf = n as f64;
    let log_scale = 0.5 * gamma * gamma * eps.ln();
    let cell = 1.0 / (nf * nf);
    let mut mass = 0.0;
    for ((i, l), v) in h.indexed_iter() {
        let c = Point::new((origin.0 + i) as f64 / nf + 0.5 / nf, (origin.1 + l) as f64 / nf + 0.5 / nf);
        if c.dist(z) < r {
            mass += (gamma * v + log_scale).exp() * cell;
        }
    }
    mass
}

/// Mass that the `eps = 1/n` measure of the rooted field gives `B_r(root)`.
pub fn rooted_ball_mass(rooted: &RootedField, r: f64, n: usize) -> Result<f64> {
    let z = rooted.root;
    if r < 2.0 / n as f64 {
        return Err(Error::ResolutionTooCoarse { radius: r, resolution: n });
    }
    let d = DomainSpec::unit_square().dist_to_boundary(z);
    if r > d {
        return Err(Error::BoundaryTooClose { dist: d, required: r });
    }
    let eps = 1.0 / n as f64;
    let (xr, yr) = ball_window(z, r, n);
    let origin = (xr.start, yr.start);
    let mut h = GridKernel::new(rooted.base.cutoff(), n, eps)?.apply_window(&rooted.base, xr.clone(), yr.clone());
    h += &root_shift_grid(z, rooted.gamma, n, eps, xr, yr);
    Ok(ball_mass_in_window(&h, origin, n, z, r, rooted.gamma, eps))
}

/// Rejection sampler for roots with density proportional to
/// `C(z, D)^{gamma^2/2}` on the square, optionally restricted to
/// `[margin, 1 - margin]^2`.
#[derive(Clone, Debug)]
pub struct RootSampler {
    gamma: f64,
    margin: f64,
    log_c_max: f64,
}

impl RootSampler {
    pub fn new(gamma: f64, margin: f64) -> Result<Self> {
        LiouvilleParams::new(gamma)?;
        if !(0.0..0.5).contains(&margin) {
            return Err(Error::InvalidParameter(format!("margin {margin} outside [0, 1/2)")));
        }
        let c = Point::new(0.5, 0.5);
        Ok(Self {
            gamma,
            margin,
            log_c_max: tilde_unchecked(&DomainSpec::unit_square(), c, c),
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let domain = DomainSpec::unit_square();
        let g2 = 0.5 * self.gamma * self.gamma;
        let w = 1.0 - 2.0 * self.margin;
        loop {
            let p = Point::new(self.margin + w * rng.random::<f64>(), self.margin + w * rng.random::<f64>());
            if p.x <= 0.0 || p.y <= 0.0 {
                continue;
            }
            let log_ratio = g2 * (tilde_unchecked(&domain, p, p) - self.log_c_max);
            if rng.random::<f64>().ln() < log_ratio {
                return p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::sample_spectral_gff;
    use crate::rng::StreamSeed;
    use std::f64::consts::PI;

    #[test]
    fn gamma_zero_reads_base() {
        let f = sample_spectral_gff(40, StreamSeed::new(4, 0)).unwrap();
        let r = root_shift(&f, Point::new(0.4, 0.5), 0.0).unwrap();
        let p = Point::new(0.6, 0.3);
        assert_eq!(r.circle_average(p, 0.05).unwrap(), circle_average(&f, p, 0.05).unwrap());
        assert!(root_shift(&f, Point::new(1.2, 0.5), 1.0).is_err());
    }

    #[test]
    fn lebesgue_ball_mass() {
        let f = SpectralField::zeros(8).unwrap();
        let z = Point::new(0.5 + 1.0 / 256.0, 0.5 + 1.0 / 256.0);
        let r = root_shift(&f, z, 0.0).unwrap();
        let n = 128;
        for rad in [0.05, 0.1, 0.2] {
            let m = rooted_ball_mass(&r, rad, n).unwrap();
            let cell = 1.0 / n as f64;
            assert!((m - PI * rad * rad).abs() <= 2.0 * PI * rad * cell * 1.5);
        }
        assert!(matches!(rooted_ball_mass(&r, 0.01, n), Err(Error::ResolutionTooCoarse { .. })));
        assert!(matches!(rooted_ball_mass(&r, 0.6, n), Err(Error::BoundaryTooClose { .. })));
    }

    #[test]
    fn rooted_shift_at_root() {
        // The shift at the root is gamma (log 1/eps + log C).
        let f = SpectralField::zeros(8).unwrap();
        let z = Point::new(0.3, 0.6);
        let r = root_shift(&f, z, 1.0).unwrap();
        let eps: f64 = 0.01;
        let want = (1.0 / eps).ln() + tilde_unchecked(&DomainSpec::unit_square(), z, z);
        assert!((r.circle_average(z, eps).unwrap() - want).abs() < 1e-12);
    }
}
