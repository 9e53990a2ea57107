use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Test functions on the unit square. Grid values are exact cell averages,
/// so the Lebesgue measure integrates them exactly at every resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    One,
    /// `b(x) b(y)` with `b(t) = sin^2(pi (t - lo) / (hi - lo))` on `[lo, hi]`.
    Bump { lo: f64, hi: f64 },
    /// Indicator of the rectangle `[x0, x1] x [y0, y1]`.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// `T_a(2x - 1) T_b(2y - 1)`.
    Chebyshev { a: usize, b: usize },
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction::Bump { lo: 0.125, hi: 0.875 }
    }
}

fn chebyshev(a: usize, u: f64) -> f64 {
    (a as f64 * u.clamp(-1.0, 1.0).acos()).cos()
}

/// Antiderivative of `T_a`.
fn chebyshev_integral(a: usize, u: f64) -> f64 {
    match a {
        0 => u,
        1 => 0.5 * u * u,
        _ => 0.5 * (chebyshev(a + 1, u) / (a + 1) as f64 - chebyshev(a - 1, u) / (a - 1) as f64),
    }
}

impl TestFunction {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            TestFunction::One => 1.0,
            TestFunction::Bump { lo, hi } => bump(p.x, lo, hi) * bump(p.y, lo, hi),
            TestFunction::Rect { x0, x1, y0, y1 } => {
                if (x0..=x1).contains(&p.x) && (y0..=y1).contains(&p.y) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Chebyshev { a, b } => chebyshev(a, 2.0 * p.x - 1.0) * chebyshev(b, 2.0 * p.y - 1.0),
        }
    }

    /// Bounding box `(lo, hi)` of the support, same on both axes for the
    /// separable kinds.
    pub fn support(&self) -> [f64; 4] {
        match *self {
            TestFunction::Bump { lo, hi } => [lo, hi, lo, hi],
            TestFunction::Rect { x0, x1, y0, y1 } => [x0, x1, y0, y1],
            _ => [0.0, 1.0, 0.0, 1.0],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        1.0
    }

    /// 1-D antiderivatives along each axis, for the separable kinds.
    fn axis_integral(&self, axis: usize, t: f64) -> f64 {
        match *self {
            TestFunction::One => t,
            TestFunction::Bump { lo, hi } => {
                let w = hi - lo;
                let s = t.clamp(lo, hi) - lo;
                0.5 * s - w / (4.0 * PI) * (2.0 * PI * s / w).sin()
            }
            TestFunction::Rect { x0, x1, y0, y1 } => {
                let (a, b) = if axis == 0 { (x0, x1) } else { (y0, y1) };
                t.clamp(a, b) - a
            }
            TestFunction::Chebyshev { a, b } => {
                let order = if axis == 0 { a } else { b };
                0.5 * chebyshev_integral(order, 2.0 * t - 1.0)
            }
        }
    }

    /// Exact cell averages on the `n x n` grid, indexed like `GridMeasure`.
    pub fn cell_averages(&self, n: usize) -> Array2<f64> {
        let nf = n as f64;
        let avg = |axis: usize| -> Vec<f64> {
            (0..n)
                .map(|i| (self.axis_integral(axis, (i + 1) as f64 / nf) - self.axis_integral(axis, i as f64 / nf)) * nf)
                .collect()
        };
        let (ax, ay) = (avg(0), avg(1));
        Array2::from_shape_fn((n, n), |(i, l)| ax[i] * ay[l])
    }

    /// `∫ phi` over the unit square.
    pub fn integral(&self) -> f64 {
        (self.axis_integral(0, 1.0) - self.axis_integral(0, 0.0)) * (self.axis_integral(1, 1.0) - self.axis_integral(1, 0.0))
    }
}

fn bump(t: f64, lo: f64, hi: f64) -> f64 {
    if t <= lo || t >= hi {
        0.0
    } else {
        (PI * (t - lo) / (hi - lo)).sin().powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Composite;

    #[test]
    fn cell_averages_match_quadrature() {
        let q = Composite::new(0.0, 1.0, 1, 20);
        for f in [
            TestFunction::default(),
            TestFunction::One,
            TestFunction::Chebyshev { a: 3, b: 2 },
            TestFunction::Chebyshev { a: 0, b: 1 },
        ] {
            let n = 8;
            let g = f.cell_averages(n);
            for (i, l) in [(0, 0), (3, 5), (7, 2)] {
                let (x0, y0) = (i as f64 / 8.0, l as f64 / 8.0);
                let mut s = 0.0;
                for (u, wu) in q.nodes.iter().zip(&q.weights) {
                    for (v, wv) in q.nodes.iter().zip(&q.weights) {
                        s += wu * wv * f.eval(Point::new(x0 + u / 8.0, y0 + v / 8.0));
                    }
                }
                assert!((g[[i, l]] - s).abs() < 1e-12, "{f:?} {i} {l}");
            }
        }
    }

    #[test]
    fn averages_integrate_exactly() {
        let f = TestFunction::default();
        assert!((f.integral() - 0.375f64 * 0.375).abs() < 1e-15);
        for n in [4, 16, 64] {
            let s = f.cell_averages(n).sum() / (n * n) as f64;
            assert!((s - f.integral()).abs() < 1e-14);
        }
        let left = TestFunction::Rect { x0: 0.0, x1: 0.5, y0: 0.0, y1: 1.0 };
        assert_eq!(left.integral(), 0.5);
        assert!(left.cell_averages(8).iter().all(|v| *v <= 1.0));
    }
}
