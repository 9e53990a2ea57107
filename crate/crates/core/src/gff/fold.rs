//! Aliasing of sine modes onto dyadic lattices.
//!
//! On the points `m / P` the mode `sin(j pi x)` coincides, up to sign, with
//! a mode of index below `P`. Folding a coefficient table therefore turns
//! an `M x M` spectral sum into a `(P-1) x (P-1)` one without changing a
//! single lattice value. Restricted to odd `m` (cell centres of an `n`-grid
//! with `P = 2n`) the table shrinks further to `n x n`.

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::{s, Array2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct FoldMap {
    period: usize,
    odd_only: bool,
}

impl FoldMap {
    /// Cell centres `(i + 1/2) / n`, `i = 0..n`.
    pub fn cell_centres(n: usize) -> Self {
        Self {
            period: 2 * n,
            odd_only: true,
        }
    }

    /// All points `m / period`.
    pub fn lattice(period: usize) -> Self {
        Self {
            period,
            odd_only: false,
        }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn odd_only(&self) -> bool {
        self.odd_only
    }

    /// Number of distinct folded modes.
    pub fn modes(&self) -> usize {
        if self.odd_only {
            self.period / 2
        } else {
            self.period - 1
        }
    }

    /// Target mode (1-based) and sign of mode `j`, or `None` when the mode
    /// vanishes on every lattice point.
    #[inline]
    pub fn fold(&self, j: usize) -> Option<(usize, f64)> {
        let p = self.period;
        let r = j % (2 * p);
        if r == 0 || r == p {
            return None;
        }
        let (mut t, sign) = if r < p { (r, 1.0) } else { (2 * p - r, -1.0) };
        if self.odd_only && t > p / 2 {
            t = p - t;
        }
        Some((t, sign))
    }

    /// Fold targets for modes `1..=cutoff`.
    pub fn table(&self, cutoff: usize) -> Vec<Option<(usize, f64)>> {
        (1..=cutoff).map(|j| self.fold(j)).collect()
    }
}

/// `S[i, t-1] = sin(t pi x_i)`.
pub(crate) fn sine_matrix(points: &[f64], modes: usize) -> Array2<f64> {
    Array2::from_shape_fn((points.len(), modes), |(i, t)| ((t + 1) as f64 * PI * points[i]).sin())
}

pub(crate) fn cell_centres(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Fold a row-major `cutoff x cutoff` table of mode amplitudes.
pub(crate) fn fold_table(amplitudes: &[f64], cutoff: usize, map: &FoldMap) -> Array2<f64> {
    let modes = map.modes();
    let targets = map.table(cutoff);
    let mut out = Array2::<f64>::zeros((modes, modes));
    for (j, tj) in targets.iter().enumerate() {
        let Some((tj, sj)) = *tj else { continue };
        let row = &amplitudes[j * cutoff..(j + 1) * cutoff];
        let mut dst = out.row_mut(tj - 1);
        for (k, tk) in targets.iter().enumerate() {
            if let Some((tk, sk)) = *tk {
                dst[tk - 1] += sj * sk * row[k];
            }
        }
    }
    out
}

/// `S_x[xr] B S_y[yr]^T`.
pub(crate) fn synthesize(
    sines: &Array2<f64>,
    folded: &Array2<f64>,
    xr: Range<usize>,
    yr: Range<usize>,
) -> Array2<f64> {
    let sx = sines.slice(s![xr, ..]);
    let sy = sines.slice(s![yr, ..]);
    sx.dot(folded).dot(&sy.t())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folded_modes_agree_on_cell_centres() {
        let n = 8;
        let map = FoldMap::cell_centres(n);
        let xs = cell_centres(n);
        for j in 1..200 {
            for &x in &xs {
                let direct = (j as f64 * PI * x).sin();
                let folded = match map.fold(j) {
                    None => 0.0,
                    Some((t, s)) => s * (t as f64 * PI * x).sin(),
                };
                assert!((direct - folded).abs() < 1e-12, "j={j} x={x}");
            }
        }
    }

    #[test]
    fn folded_modes_agree_on_full_lattice() {
        let p = 16;
        let map = FoldMap::lattice(p);
        for j in 1..300 {
            for m in 0..=p {
                let x = m as f64 / p as f64;
                let direct = (j as f64 * PI * x).sin();
                let folded = match map.fold(j) {
                    None => 0.0,
                    Some((t, s)) => {
                        assert!(t >= 1 && t <= map.modes());
                        s * (t as f64 * PI * x).sin()
                    }
                };
                assert!((direct - folded).abs() < 1e-11, "j={j} m={m}");
            }
        }
    }
}
