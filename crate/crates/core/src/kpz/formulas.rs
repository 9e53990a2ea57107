//! The KPZ quadratic `x = (gamma^2/4) Delta^2 + (1 - gamma^2/4) Delta` and its
//! first-passage parametrization `2x = beta a_gamma + beta^2/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// `gamma = sqrt(8/3)`: uniform random planar maps.
    PureGravity,
    /// `gamma = sqrt(3)`: maps weighted by the critical Ising model.
    Ising,
}

impl Coupling {
    pub fn gamma(self) -> f64 {
        match self {
            Coupling::PureGravity => (8.0f64 / 3.0).sqrt(),
            Coupling::Ising => 3f64.sqrt(),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange { gamma, max: 2.0 });
    }
    Ok(())
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// Euclidean exponent from the quantum one.
pub fn kpz_formula(gamma: f64, delta: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_nonnegative("Delta", delta)?;
    let g = 0.25 * gamma * gamma;
    // exact at the fixed points 0 and 1
    Ok(delta + g * delta * (delta - 1.0))
}

/// Quantum exponent from the Euclidean one: the nonnegative root of the
/// quadratic, in the cancellation-free form `2x / (b + sqrt(b^2 + gamma^2 x))`
/// with `b = 1 - gamma^2/4`.
pub fn kpz_inverse(gamma: f64, x: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_nonnegative("x", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let b = 1.0 - 0.25 * gamma * gamma;
    Ok(2.0 * x / (b + (b * b + gamma * gamma * x).sqrt()))
}

/// `a_gamma = 2/gamma - gamma/2`, the drift of the first-passage problem.
pub fn drift(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::GammaOutOfRange { gamma, max: 2.0 });
    }
    Ok(2.0 / gamma - 0.5 * gamma)
}

/// Nonnegative root of `beta^2/2 + a_gamma beta - 2x = 0`, written as
/// `4x / (a + sqrt(a^2 + 4x))`.
pub fn beta_of_x(gamma: f64, x: f64) -> Result<f64> {
    let a = drift(gamma)?;
    check_nonnegative("x", x)?;
    Ok(4.0 * x / (a + (a * a + 4.0 * x).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_values() {
        let g = Coupling::PureGravity.gamma();
        assert!((kpz_formula(g, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((kpz_formula(g, 0.75).unwrap() - 5.0 / 8.0).abs() < 1e-15);
        let gi = Coupling::Ising.gamma();
        assert!((kpz_formula(gi, 0.5).unwrap() - (0.75 * 0.25 + 0.25 * 0.5)).abs() < 1e-15);
        assert!((kpz_inverse(1.0, 0.5).unwrap() - (17f64.sqrt() - 3.0) / 2.0).abs() < 1e-15);
        let b = beta_of_x(g, 1.0 / 3.0).unwrap();
        assert!((b - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((b / g - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edges() {
        assert_eq!(kpz_inverse(0.0, 0.3).unwrap(), 0.3);
        assert_eq!(kpz_inverse(1.2, 0.0).unwrap(), 0.0);
        assert_eq!(beta_of_x(1.0, 0.0).unwrap(), 0.0);
        assert!(matches!(kpz_formula(2.0, 0.1), Err(Error::GammaOutOfRange { .. })));
        assert!(matches!(beta_of_x(0.0, 0.1), Err(Error::GammaOutOfRange { .. })));
        assert!(kpz_formula(1.0, -0.1).is_err());
    }
}
