//! Small statistics toolkit: moments, standard errors, line fits.
//!
//! All reductions run sequentially over slices so results never depend on
//! thread scheduling.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1) as f64
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn of_mean(xs: &[f64]) -> Self {
        let n = xs.len();
        Self {
            value: mean(xs),
            stderr: (variance(xs) / n as f64).sqrt(),
            n,
        }
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.stderr
    }
}

/// Standard error of the sample variance of `xs`, from the fourth central
/// moment: Var(s^2) ~ (m4 - s^4 (n-3)/(n-1)) / n.
pub fn variance_stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let s2 = variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

/// Standard error of the sample covariance of paired observations.
pub fn covariance_stderr(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let c = covariance(xs, ys);
    let m22 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| ((x - mx) * (y - my)).powi(2))
        .sum::<f64>()
        / n;
    ((m22 - c * c) / n).max(0.0).sqrt()
}

/// Least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope. For weighted fits this is the
    /// propagated error from the supplied per-point standard errors; for
    /// unweighted fits it comes from the residual scatter.
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    }
}

/// Weighted least squares with weights `1 / stderr^2`. Falls back to
/// ordinary least squares when any point has a zero (exact) standard error.
pub fn fit_line_weighted(x: &[f64], y: &[f64], stderr: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), stderr.len());
    if stderr.iter().any(|s| !(*s > 0.0)) {
        return fit_line(x, y);
    }
    let w: Vec<f64> = stderr.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(x).map(|(w, a)| w * a).sum::<f64>() / sw;
    let my = w.iter().zip(y).map(|(w, b)| w * b).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, a)| w * (a - mx).powi(2)).sum();
    let sxy: f64 = w
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (a, b))| w * (a - mx) * (b - my))
        .sum();
    let syy: f64 = w.iter().zip(y).map(|(w, b)| w * (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = w
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (a, b))| w * (b - intercept - slope * a).powi(2))
        .sum();
    LineFit {
        slope,
        intercept,
        slope_stderr: (1.0 / sxx).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    }
}

/// Delete-one jackknife standard error of a statistic computed from
/// per-replicate records.
pub fn jackknife_stderr<T, F>(records: &[T], statistic: F) -> f64
where
    F: Fn(&[&T]) -> f64,
{
    let n = records.len();
    if n < 2 {
        return f64::NAN;
    }
    let all: Vec<&T> = records.iter().collect();
    let leave_out: Vec<f64> = (0..n)
        .map(|i| {
            let subset: Vec<&T> = all
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| *r)
                .collect();
            statistic(&subset)
        })
        .collect();
    let m = mean(&leave_out);
    let ss: f64 = leave_out.iter().map(|v| (v - m).powi(2)).sum();
    ((n - 1) as f64 / n as f64 * ss).sqrt()
}

/// Median of a slice (average of the two central values for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        let w = fit_line_weighted(&x, &y, &[0.1, 0.2, 0.1, 0.3]);
        assert!((w.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((covariance(&xs, &xs) - variance(&xs)).abs() < 1e-15);
        assert_eq!(median(&xs), 2.5);
    }

    #[test]
    fn jackknife_of_mean_matches_standard_error() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let jk = jackknife_stderr(&xs, |s| s.iter().map(|v| **v).sum::<f64>() / s.len() as f64);
        let se = Estimate::of_mean(&xs).stderr;
        assert!((jk - se).abs() < 1e-12);
    }
}
