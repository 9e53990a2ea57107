use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Deterministic test sets `K` in the unit square, with exact distance
/// evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FractalSet {
    Segment { a: Point, b: Point },
    Point { at: Point },
    /// Subdivide each kept square into `side x side` and keep the cells
    /// listed in `keep` (column, row), down to `depth` levels.
    BoxFractal { side: usize, keep: Vec<(usize, usize)>, depth: u32 },
    FullSquare,
}

impl Default for FractalSet {
    fn default() -> Self {
        FractalSet::Segment {
            a: Point::new(0.25, 0.5),
            b: Point::new(0.75, 0.5),
        }
    }
}

fn dist_to_box(p: Point, x0: f64, y0: f64, size: f64) -> f64 {
    let dx = (x0 - p.x).max(0.0).max(p.x - (x0 + size));
    let dy = (y0 - p.y).max(0.0).max(p.y - (y0 + size));
    dx.hypot(dy)
}

impl FractalSet {
    /// Four-corner Cantor dust: `side = 3`, corners kept.
    pub fn cantor_dust(depth: u32) -> Self {
        FractalSet::BoxFractal {
            side: 3,
            keep: vec![(0, 0), (2, 0), (0, 2), (2, 2)],
            depth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inside = |p: &Point| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y);
        match self {
            FractalSet::Segment { a, b } if !inside(a) || !inside(b) => {
                Err(Error::InvalidParameter("segment endpoints must lie in the unit square".into()))
            }
            FractalSet::Point { at } if !inside(at) => {
                Err(Error::InvalidParameter("point must lie in the unit square".into()))
            }
            FractalSet::BoxFractal { side, keep, .. } => {
                if *side < 2 || keep.is_empty() || keep.iter().any(|(c, r)| c >= side || r >= side) {
                    return Err(Error::InvalidParameter("invalid box-fractal generator".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Euclidean distance from `p` to the set.
    pub fn distance(&self, p: Point) -> f64 {
        match self {
            FractalSet::FullSquare => dist_to_box(p, 0.0, 0.0, 1.0),
            FractalSet::Point { at } => p.dist(*at),
            FractalSet::Segment { a, b } => {
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                let len2 = dx * dx + dy * dy;
                let t = if len2 > 0.0 {
                    (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                p.dist(Point::new(a.x + t * dx, a.y + t * dy))
            }
            FractalSet::BoxFractal { side, keep, depth } => {
                // Branch and bound over the generator tree.
                let mut best = f64::INFINITY;
                let mut stack = vec![(0.0f64, 0.0f64, 1.0f64, 0u32)];
                while let Some((x0, y0, size, level)) = stack.pop() {
                    let d = dist_to_box(p, x0, y0, size);
                    if d >= best {
                        continue;
                    }
                    if level == *depth {
                        best = d;
                        continue;
                    }
                    let child = size / *side as f64;
                    for &(c, r) in keep {
                        stack.push((x0 + c as f64 * child, y0 + r as f64 * child, child, level + 1));
                    }
                }
                best
            }
        }
    }

    /// Closed-form Euclidean scaling exponent, where one exists.
    pub fn euclidean_target(&self) -> Option<f64> {
        match self {
            FractalSet::FullSquare => Some(0.0),
            FractalSet::Point { .. } => Some(1.0),
            FractalSet::Segment { a, b } if a != b => Some(0.5),
            FractalSet::Segment { .. } => Some(1.0),
            FractalSet::BoxFractal { side, keep, .. } => {
                Some((2.0 - (keep.len() as f64).ln() / (*side as f64).ln()) / 2.0)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FractalSet::Segment { .. } => "segment",
            FractalSet::Point { .. } => "point",
            FractalSet::BoxFractal { .. } => "box-fractal",
            FractalSet::FullSquare => "full-square",
        }
    }
}
