//! Green's functions, regularized Green's functions and conformal radii.
//!
//! Normalization: `-(1/2pi) Lap G(x, .) = delta_x` with Dirichlet boundary
//! values, so `G(x, y) ~ log(1/|x - y|)` on the diagonal.
//!
//! On the unit square the Green's function is the double sine series
//! `sum_{j,k} c_{jk}^2 sin(j pi x1) sin(j pi y1) sin(k pi x2) sin(k pi y2)`
//! with `c_{jk}^2 = 8 / (pi (j^2 + k^2))`. The default evaluator sums that
//! series exactly along one axis (the inner sum is the 1-D Green's function
//! of `-d^2/ds^2 + (j pi)^2`), peels the logarithmic singularity off in
//! closed form and sums a geometrically convergent remainder. The literal
//! truncated double series is kept in [`square_green_series`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    /// `[0, 1]^2`
    UnitSquare,
    /// `{|z| < 1}`
    UnitDisc,
}

/// A supported domain. `boundary_margin` is a fraction of the diameter that
/// callers may use to keep estimators away from the boundary; the geometric
/// operations themselves only require points to be strictly inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub boundary_margin: f64,
}

impl DomainSpec {
    pub const fn unit_square() -> Self {
        Self {
            kind: DomainKind::UnitSquare,
            boundary_margin: 0.0,
        }
    }

    pub const fn unit_disc() -> Self {
        Self {
            kind: DomainKind::UnitDisc,
            boundary_margin: 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DomainKind::UnitSquare => "unit square",
            DomainKind::UnitDisc => "unit disc",
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::UnitSquare => 2f64.sqrt(),
            DomainKind::UnitDisc => 2.0,
        }
    }

    /// Euclidean distance from `p` to the boundary; negative outside.
    pub fn dist_to_boundary(&self, p: Point) -> f64 {
        match self.kind {
            DomainKind::UnitSquare => p.x.min(p.y).min(1.0 - p.x).min(1.0 - p.y),
            DomainKind::UnitDisc => 1.0 - p.x.hypot(p.y),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x.is_finite() && p.y.is_finite() && self.dist_to_boundary(p) > 0.0
    }

    pub(crate) fn require_interior(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x: p.x,
                y: p.y,
                domain: self.name(),
            })
        }
    }
}

/// Default cutoff of the literal double sine series.
pub const DEFAULT_SERIES_CUTOFF: usize = 2000;

/// Squared H^1-normalization of the square sine mode `(j, k)`:
/// `c_{jk}^2 = 8 / (pi (j^2 + k^2))`.
#[inline]
pub fn square_mode_weight(j: usize, k: usize) -> f64 {
    8.0 / (PI * (j * j + k * k) as f64)
}

/// `G_D(x, y)`.
pub fn green(domain: &DomainSpec, x: Point, y: Point) -> Result<f64> {
    domain.require_interior(x)?;
    domain.require_interior(y)?;
    let r = x.dist(y);
    if r == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(tilde_unchecked(domain, x, y) - r.ln())
}

/// Harmonic correction `G~^x(y) = G(x, y) - log(1/|x - y|)`, extended
/// continuously to `y = x` where it equals `log C(x, D)`.
pub fn harmonic_correction(domain: &DomainSpec, x: Point, y: Point) -> Result<f64> {
    domain.require_interior(x)?;
    domain.require_interior(y)?;
    Ok(tilde_unchecked(domain, x, y))
}

/// `G^x_eps(y) = log(1/(eps v |x - y|)) + G~^x(y)`.
///
/// The root `x` must be at distance at least `eps` from the boundary; the
/// boundary-band modification of the regularized kernel is not provided.
pub fn green_regularized(domain: &DomainSpec, x: Point, y: Point, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    domain.require_interior(x)?;
    domain.require_interior(y)?;
    let d = domain.dist_to_boundary(x);
    if d < eps {
        return Err(Error::BoundaryTooClose {
            dist: d,
            required: eps,
        });
    }
    Ok(regularized_unchecked(domain, x, y, eps))
}

pub(crate) fn regularized_unchecked(domain: &DomainSpec, x: Point, y: Point, eps: f64) -> f64 {
    -(x.dist(y).max(eps)).ln() + tilde_unchecked(domain, x, y)
}

/// Conformal radius `C(z, D) = exp(G~^z(z))`.
///
/// Disc: `1 - |z|^2`. Square: `G(z, y) + log|z - y|` is averaged over the
/// four axis directions at offsets `2^-4 ... 2^-9` (only offsets below half
/// the boundary distance are used) and extrapolated polynomially in the
/// squared offset to zero.
pub fn conformal_radius(domain: &DomainSpec, z: Point) -> Result<f64> {
    domain.require_interior(z)?;
    match domain.kind {
        DomainKind::UnitDisc => Ok(1.0 - (z.x * z.x + z.y * z.y)),
        DomainKind::UnitSquare => extrapolated_log_radius(domain, z).map(f64::exp),
    }
}

/// `log C(z, D)` read directly off the closed-form harmonic correction.
/// Agrees with [`conformal_radius`] to roughly 1e-12 and is much cheaper.
pub fn log_conformal_radius(domain: &DomainSpec, z: Point) -> Result<f64> {
    domain.require_interior(z)?;
    Ok(tilde_unchecked(domain, z, z))
}

fn extrapolated_log_radius(domain: &DomainSpec, z: Point) -> Result<f64> {
    let d = domain.dist_to_boundary(z);
    let mut offsets: Vec<f64> = (4..=9)
        .map(|k| 2f64.powi(-k))
        .filter(|r| *r < 0.5 * d)
        .collect();
    if offsets.len() < 3 {
        offsets = (2..=7).map(|k| d * 2f64.powi(-k)).collect();
    }
    let samples: Vec<(f64, f64)> = offsets
        .iter()
        .map(|&r| {
            let dirs = [(r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r)];
            let mut acc = 0.0;
            for (dx, dy) in dirs {
                acc += green(domain, z, z.offset(dx, dy))? + r.ln();
            }
            Ok((r * r, 0.25 * acc))
        })
        .collect::<Result<_>>()?;
    Ok(neville_at_zero(&samples))
}

/// Value at `t = 0` of the interpolating polynomial through `(t_i, f_i)`.
fn neville_at_zero(pts: &[(f64, f64)]) -> f64 {
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut p: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (t[i + m] * p[i] - t[i] * p[i + 1]) / (t[i + m] - t[i]);
        }
    }
    p[0]
}

/// Green's function of the round sphere as a function of the angle between
/// the two points: `log cot(theta / 2)`.
pub fn sphere_green(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::DegenerateAngle(theta));
    }
    let half = 0.5 * theta;
    Ok((half.cos() / half.sin()).ln())
}

/// The literal truncated double sine series for the square,
/// `sum_{j,k <= cutoff} c_{jk}^2 sin(j pi x1) sin(j pi y1) sin(k pi x2) sin(k pi y2)`.
///
/// Truncation error is `O(1 / (cutoff |x - y|))`.
pub fn square_green_series(x: Point, y: Point, cutoff: usize) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::InvalidCutoff(cutoff));
    }
    let sq = DomainSpec::unit_square();
    sq.require_interior(x)?;
    sq.require_interior(y)?;
    if x == y {
        return Err(Error::CoincidentPoints);
    }
    let a: Vec<f64> = (1..=cutoff)
        .map(|j| (j as f64 * PI * x.x).sin() * (j as f64 * PI * y.x).sin())
        .collect();
    let b: Vec<f64> = (1..=cutoff)
        .map(|k| (k as f64 * PI * x.y).sin() * (k as f64 * PI * y.y).sin())
        .collect();
    let mut total = 0.0;
    for (j, aj) in a.iter().enumerate() {
        let jj = ((j + 1) * (j + 1)) as f64;
        let row: f64 = b
            .iter()
            .enumerate()
            .map(|(k, bk)| bk / (jj + ((k + 1) * (k + 1)) as f64))
            .sum();
        total += aj * row;
    }
    Ok(total * 8.0 / PI)
}

pub(crate) fn tilde_unchecked(domain: &DomainSpec, x: Point, y: Point) -> f64 {
    match domain.kind {
        DomainKind::UnitDisc => {
            // log|1 - conj(x) y|
            let xb = Complex64::new(x.x, -x.y);
            let yc = Complex64::new(y.x, y.y);
            (Complex64::new(1.0, 0.0) - xb * yc).norm().ln()
        }
        DomainKind::UnitSquare => square_tilde(x, y),
    }
}

/// `e^w - 1` without cancellation for small `|w|`.
fn cexpm1(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// Harmonic correction on the unit square.
///
/// With `u` the summation axis and `s` the closed-form axis,
/// `G = -log|1 - e^{w}| + log|1 - e^{w'}| + R`, where
/// `w = -pi|s1 - s2| + i pi (u1 - u2)`, `w' = -pi|s1 - s2| + i pi (u1 + u2)`
/// and `R` collects the reflections in the walls `s = 0, 1`; its terms decay
/// like `exp(-2 pi j m)` with `m` the distance of the points to those walls.
/// The axis pair is chosen to maximize `m`.
fn square_tilde(p: Point, q: Point) -> f64 {
    let wall_y = p.y.min(q.y).min(1.0 - p.y.max(q.y));
    let wall_x = p.x.min(q.x).min(1.0 - p.x.max(q.x));
    let (u1, u2, s1, s2) = if wall_y >= wall_x {
        (p.x, q.x, p.y, q.y)
    } else {
        (p.y, q.y, p.x, q.x)
    };
    let ds = (s1 - s2).abs();
    let (s_lo, s_hi) = (s1.min(s2), s1.max(s2));

    let w = Complex64::new(-PI * ds, PI * (u1 - u2));
    let singular = if w.norm() == 0.0 {
        0.0
    } else {
        (cexpm1(w) / w).norm().ln()
    };
    let image = cexpm1(Complex64::new(-PI * ds, PI * (u1 + u2))).norm().ln();

    let e_ds = (-PI * ds).exp();
    let e_lo = (-2.0 * PI * s_lo).exp();
    let e_hi = (-2.0 * PI * (1.0 - s_hi)).exp();
    let e_full = (-2.0 * PI).exp();
    let (r1, r2) = (
        Complex64::from_polar(1.0, PI * u1),
        Complex64::from_polar(1.0, PI * u2),
    );
    let (mut z1, mut z2) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let (mut p_ds, mut a, mut b, mut c) = (1.0, 1.0, 1.0, 1.0);
    let mut rem = 0.0;
    let mut j = 0usize;
    loop {
        j += 1;
        z1 *= r1;
        z2 *= r2;
        p_ds *= e_ds;
        a *= e_lo;
        b *= e_hi;
        c *= e_full;
        let coef = 2.0 / j as f64 * p_ds / (1.0 - c);
        rem += coef * z1.im * z2.im * (a * b + c - a - b);
        if coef * (a + b + c) < 1e-17 || j > 50_000_000 {
            break;
        }
    }
    -PI.ln() - singular + image + rem
}
