//! Grayscale heatmaps with fixed value ranges, and the equal-mass square
//! overlay.
//!
//! Mapping: `gray = 128 + round(127 * clamp(v / range, -1, 1))`, so zero is
//! always gray 128 and `±range` are 1 and 255. Fields use `range = 6`;
//! measures show `log(mass * n^2)` (log density against Lebesgue) with
//! `range = 8`. Pixel rows run from `y = 1` at the top to `y = 0`.

use std::fmt::Write as _;
use std::path::Path;

use image::{GrayImage, Luma};
use kpzlab::liouville::GridMeasure;
use ndarray::Array2;
use serde::Serialize;

pub const FIELD_RANGE: f64 = 6.0;
pub const LOG_DENSITY_RANGE: f64 = 8.0;

pub fn gray(v: f64, range: f64) -> u8 {
    let t = if v.is_nan() { 0.0 } else { (v / range).clamp(-1.0, 1.0) };
    (128.0 + (127.0 * t).round()) as u8
}

pub fn heatmap(values: &Array2<f64>, range: f64) -> GrayImage {
    let (nx, ny) = values.dim();
    GrayImage::from_fn(nx as u32, ny as u32, |px, py| {
        Luma([gray(values[[px as usize, ny - 1 - py as usize]], range)])
    })
}

pub fn write_png(path: &Path, img: &GrayImage) -> Result<(), image::ImageError> {
    img.save_with_format(path, image::ImageFormat::Png)
}

pub fn log_density(m: &GridMeasure) -> Array2<f64> {
    let scale = (m.resolution * m.resolution) as f64;
    m.masses.mapv(|v| (v * scale).ln())
}

/// A dyadic square `[x0, x0 + size] x [y0, y0 + size]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Square {
    pub x0: f64,
    pub y0: f64,
    pub size: f64,
    pub mass: f64,
}

/// Split dyadic squares while their mass exceeds `delta` and they span more
/// than one cell.
pub fn equal_mass_squares(m: &GridMeasure, delta: f64) -> Vec<Square> {
    let n = m.resolution;
    // summed-area table
    let mut sat = Array2::<f64>::zeros((n + 1, n + 1));
    for i in 0..n {
        for l in 0..n {
            sat[[i + 1, l + 1]] = m.masses[[i, l]] + sat[[i, l + 1]] + sat[[i + 1, l]] - sat[[i, l]];
        }
    }
    let block = |i: usize, l: usize, s: usize| sat[[i + s, l + s]] - sat[[i, l + s]] - sat[[i + s, l]] + sat[[i, l]];
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0usize, n)];
    while let Some((i, l, s)) = stack.pop() {
        let mass = block(i, l, s);
        if mass > delta && s > 1 {
            let h = s / 2;
            stack.extend([(i, l, h), (i + h, l, h), (i, l + h, h), (i + h, l + h, h)]);
        } else {
            let nf = n as f64;
            out.push(Square {
                x0: i as f64 / nf,
                y0: l as f64 / nf,
                size: s as f64 / nf,
                mass,
            });
        }
    }
    out.sort_by(|a, b| (a.x0, a.y0).partial_cmp(&(b.x0, b.y0)).expect("finite"));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlayStats {
    pub squares: usize,
    pub delta: f64,
    /// Variance of `log2(size)` over the squares.
    pub log2_size_variance: f64,
}

pub fn overlay_stats(squares: &[Square], delta: f64) -> OverlayStats {
    let logs: Vec<f64> = squares.iter().map(|s| s.size.log2()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let var = logs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / logs.len() as f64;
    OverlayStats {
        squares: squares.len(),
        delta,
        log2_size_variance: var,
    }
}

/// Outlines on a `pixels x pixels` canvas matching the heatmap.
pub fn overlay_svg(squares: &[Square], pixels: usize) -> String {
    let p = pixels as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{pixels}\" height=\"{pixels}\" viewBox=\"0 0 {pixels} {pixels}\">\n"
    );
    for q in squares {
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"0.5\"/>",
            q.x0 * p,
            (1.0 - q.y0 - q.size) * p,
            q.size * p,
            q.size * p
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_is_fixed() {
        assert_eq!(gray(0.0, FIELD_RANGE), 128);
        assert_eq!(gray(100.0, FIELD_RANGE), 255);
        assert_eq!(gray(-100.0, FIELD_RANGE), 1);
        assert_eq!(gray(3.0, FIELD_RANGE), 192);
    }

    #[test]
    fn orientation() {
        let mut v = Array2::zeros((2, 2));
        v[[1, 1]] = 6.0; // top right
        let img = heatmap(&v, FIELD_RANGE);
        assert_eq!(img.get_pixel(1, 0)[0], 255);
        assert_eq!(img.get_pixel(0, 1)[0], 128);
    }

    #[test]
    fn uniform_measure_gives_equal_squares() {
        let h = Array2::zeros((16, 16));
        let m = GridMeasure::from_circle_averages(&h, 0.0, 1.0 / 16.0).unwrap();
        let sq = equal_mass_squares(&m, 1.0 / 64.0);
        assert_eq!(sq.len(), 64);
        assert_eq!(overlay_stats(&sq, 1.0 / 64.0).log2_size_variance, 0.0);
        let total: f64 = sq.iter().map(|s| s.mass).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
