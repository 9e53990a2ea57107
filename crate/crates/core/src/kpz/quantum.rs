use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponent::{check_scales, fit_records, ExponentFit, Record};
use super::fractal::FractalSet;
use crate::error::{Error, Result};
use crate::geometry::{regularized_unchecked, DomainSpec, Point};
use crate::gff::{cutoff_for_scale, LatticeSampler};
use crate::liouville::{GridMeasure, LiouvilleParams, RootSampler};
use crate::rng::StreamSeed;

/// `sup { r : mu(B_r(z)) <= delta }` on a grid measure. `clipped` marks
/// balls reaching past the boundary distance of `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumBall {
    pub radius: f64,
    pub clipped: bool,
    /// `mu(B_radius(z))`, open ball
    pub mass_inside: f64,
}

/// Quantum ball of mass `delta` about `z`. A cell belongs to `B_r(z)` when
/// its centre is at distance `< r`; the radius is the distance of the first
/// cell whose inclusion pushes the mass past `delta`, which brackets
/// `mu(B_tau) <= delta < mu(B_{tau + cell diagonal})`.
pub fn quantum_ball(m: &GridMeasure, z: Point, delta: f64) -> Result<QuantumBall> {
    let domain = DomainSpec::unit_square();
    domain.require_interior(z)?;
    if !(delta > 0.0 && delta < m.total) {
        return Err(Error::DeltaOutOfRange { delta, total: m.total });
    }
    let n = m.resolution;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for ((i, l), mass) in m.masses.indexed_iter() {
        cells.push((m.cell_centre(i, l).dist(z), *mass));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut inside = 0.0;
    let mut k = 0;
    while k < cells.len() {
        // All cells at one distance enter together.
        let d = cells[k].0;
        let mut group = 0.0;
        let mut e = k;
        while e < cells.len() && cells[e].0 == d {
            group += cells[e].1;
            e += 1;
        }
        if inside + group > delta {
            return Ok(QuantumBall {
                radius: d,
                clipped: d > domain.dist_to_boundary(z),
                mass_inside: inside,
            });
        }
        inside += group;
        k = e;
    }
    unreachable!("delta below total mass is always exceeded")
}

/// Disc sums over a grid measure via per-row prefix sums, plus a summed-area
/// table for cheap lower bounds.
pub(crate) struct BallMass<'a> {
    n: usize,
    masses: &'a ndarray::Array2<f64>,
    /// `rows[l * (n+1) + i]` = sum of masses `[0, i) x {l}`
    rows: Vec<f64>,
    /// `sat[i * (n+1) + l]` = sum over `[0, i) x [0, l)`
    sat: Vec<f64>,
}

impl<'a> BallMass<'a> {
    pub fn new(m: &'a GridMeasure) -> Self {
        let n = m.resolution;
        let mut rows = vec![0.0; n * (n + 1)];
        for l in 0..n {
            for i in 0..n {
                rows[l * (n + 1) + i + 1] = rows[l * (n + 1) + i] + m.masses[[i, l]];
            }
        }
        let mut sat = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            let mut col = 0.0;
            for l in 0..n {
                col += m.masses[[i, l]];
                sat[(i + 1) * (n + 1) + l + 1] = sat[i * (n + 1) + l + 1] + col;
            }
        }
        Self {
            n,
            masses: &m.masses,
            rows,
            sat,
        }
    }

    /// Cell index range whose centres satisfy `|c - z| < half` on one axis.
    fn span(&self, z: f64, half: f64) -> (usize, usize) {
        let nf = self.n as f64;
        let lo = ((z - half) * nf - 0.5).floor() + 1.0;
        let hi = ((z + half) * nf - 0.5).ceil() - 1.0;
        let lo = lo.max(0.0) as usize;
        let hi = (hi + 1.0).clamp(0.0, nf) as usize;
        (lo, hi.max(lo))
    }

    /// `mu(B_r(z))` for the open ball.
    pub fn disc(&self, z: Point, r: f64) -> f64 {
        let nf = self.n as f64;
        let (l0, l1) = self.span(z.y, r);
        let mut s = 0.0;
        for l in l0..l1 {
            let dy = (l as f64 + 0.5) / nf - z.y;
            let w = (r * r - dy * dy).max(0.0).sqrt();
            let (i0, i1) = self.span(z.x, w);
            let row = &self.rows[l * (self.n + 1)..(l + 1) * (self.n + 1)];
            s += row[i1] - row[i0];
        }
        s
    }

    /// Mass of the cells inside the square inscribed in `B_r(z)`; a lower
    /// bound for `disc(z, r)`.
    pub fn inscribed(&self, z: Point, r: f64) -> f64 {
        let h = r / SQRT_2 * (1.0 - 1e-12);
        let (i0, i1) = self.span(z.x, h);
        let (l0, l1) = self.span(z.y, h);
        let w = self.n + 1;
        self.sat[i1 * w + l1] - self.sat[i0 * w + l1] - self.sat[i1 * w + l0] + self.sat[i0 * w + l0]
    }

    /// Mass of `B_r(z)` under the measure tilted by `exp(gamma^2 G_eps(z, .))`.
    pub fn tilted_disc(&self, z: Point, r: f64, gamma: f64, eps: f64) -> f64 {
        let domain = DomainSpec::unit_square();
        let nf = self.n as f64;
        let g2 = gamma * gamma;
        let (l0, l1) = self.span(z.y, r);
        let mut s = 0.0;
        for l in l0..l1 {
            let cy = (l as f64 + 0.5) / nf;
            let dy = cy - z.y;
            let w = (r * r - dy * dy).max(0.0).sqrt();
            let (i0, i1) = self.span(z.x, w);
            for i in i0..i1 {
                let c = Point::new((i as f64 + 0.5) / nf, cy);
                s += self.masses[[i, l]] * (g2 * regularized_unchecked(&domain, z, c, eps)).exp();
            }
        }
        s
    }
}

/// How roots are drawn for the quantum hitting functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootMode {
    /// Weight every cell of the sampling window by its mass.
    SampleFromMeasure,
    /// Draw roots with density `C^{gamma^2/2}` and tilt the field by
    /// `gamma G^z`.
    RootedDensity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumConfig {
    pub gamma: f64,
    pub deltas: Vec<f64>,
    pub replicates: usize,
    pub resolution: usize,
    pub seed: u64,
    pub root_mode: RootMode,
    /// Roots per field in rooted mode.
    pub roots_per_field: usize,
    /// Roots and cells are restricted to `[margin, 1 - margin]^2`.
    pub margin: f64,
    /// Series cutoff; defaults to the cutoff rule at `eps = 1/resolution`.
    pub cutoff: Option<usize>,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            deltas: (6..=12).map(|k| 2f64.powi(-k)).collect(),
            replicates: 200,
            resolution: 512,
            seed: 0,
            root_mode: RootMode::SampleFromMeasure,
            roots_per_field: 256,
            margin: 0.125,
            cutoff: None,
        }
    }
}

/// Per-delta hit flags for one root: `Some(hit)` when the ball is
/// unclipped, `None` when discarded.
fn classify<F, G>(d_set: f64, d_wall: f64, deltas: &[f64], lower: F, exact: G) -> Vec<Option<bool>>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let dmax = deltas.iter().copied().fold(0.0, f64::max);
    // tau >= r  <=>  mu(B_r) <= delta
    let mass_at = |r: f64| {
        if r <= 0.0 {
            0.0
        } else if lower(r) > dmax {
            f64::INFINITY
        } else {
            exact(r)
        }
    };
    let wall = mass_at(d_wall);
    let set = if d_set <= d_wall { mass_at(d_set) } else { f64::INFINITY };
    deltas
        .iter()
        .map(|&delta| if wall <= delta { None } else { Some(set <= delta) })
        .collect()
}

/// Quantum scaling exponent `Delta` from `E[mu{z : B^delta(z) hits K}] ~ delta^Delta`.
///
/// Fields come from the exact lattice sampler at `eps = 1/resolution`.
/// Root modes: `SampleFromMeasure` sums the masses of all cells in the
/// window whose quantum ball hits `K`; `RootedDensity` draws roots with
/// density `C^{gamma^2/2}`, tilts the measure by `exp(gamma^2 G_eps(z, .))`
/// and averages hit indicators. Both estimate the same function of `delta`
/// up to a constant factor. Clipped balls are discarded and counted.
pub fn quantum_exponent(set: &FractalSet, cfg: &QuantumConfig) -> Result<ExponentFit> {
    let params = LiouvilleParams::new(cfg.gamma)?;
    set.validate()?;
    check_scales(&cfg.deltas, 1.0)?;
    let n = cfg.resolution;
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("resolution must be a power of two >= 8, got {n}")));
    }
    if !(cfg.margin > 0.0 && cfg.margin < 0.5) {
        return Err(Error::InvalidParameter(format!("margin {} outside (0, 1/2)", cfg.margin)));
    }
    if cfg.replicates < 2 || (cfg.root_mode == RootMode::RootedDensity && cfg.roots_per_field == 0) {
        return Err(Error::InvalidParameter("need >= 2 replicates and >= 1 root per field".into()));
    }
    if !params.in_l2_range() {
        log::warn!("gamma = {} >= sqrt(2): outside the L2 regime", cfg.gamma);
    }
    let eps = 1.0 / n as f64;
    let cutoff = cfg.cutoff.unwrap_or_else(|| cutoff_for_scale(eps));
    let sampler = LatticeSampler::cell_centres(cutoff, n, &[eps])?;
    let domain = DomainSpec::unit_square();
    let k = cfg.deltas.len();
    let nf = n as f64;
    let lo = (cfg.margin * nf - 0.5).ceil().max(0.0) as usize;
    let hi = ((1.0 - cfg.margin) * nf - 0.5).floor() as usize;

    let records: Vec<Record> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<Record> {
            let sample = sampler.sample(StreamSeed::labelled(cfg.seed, "quantum-field", r as u64));
            let h = sampler.grid(&sample, 0, n)?;
            let m = GridMeasure::from_circle_averages(&h, cfg.gamma, eps)?;
            let balls = BallMass::new(&m);
            let mut rec = Record {
                values: vec![0.0; k],
                samples: 0,
                hits: vec![0; k],
                discarded: vec![0; k],
            };
            let tally = |flags: Vec<Option<bool>>, weight: f64, rec: &mut Record| {
                for (s, f) in flags.into_iter().enumerate() {
                    match f {
                        None => rec.discarded[s] += 1,
                        Some(true) => {
                            rec.hits[s] += 1;
                            rec.values[s] += weight;
                        }
                        Some(false) => {}
                    }
                }
            };
            match cfg.root_mode {
                RootMode::SampleFromMeasure => {
                    for i in lo..=hi {
                        for l in lo..=hi {
                            let c = m.cell_centre(i, l);
                            let flags = classify(
                                set.distance(c),
                                domain.dist_to_boundary(c),
                                &cfg.deltas,
                                |rad| balls.inscribed(c, rad),
                                |rad| balls.disc(c, rad),
                            );
                            tally(flags, m.masses[[i, l]], &mut rec);
                            rec.samples += 1;
                        }
                    }
                }
                RootMode::RootedDensity => {
                    let roots = RootSampler::new(cfg.gamma, cfg.margin)?;
                    let mut rng = StreamSeed::labelled(cfg.seed, "quantum-roots", r as u64).rng();
                    let g2 = cfg.gamma * cfg.gamma;
                    let w = 1.0 / cfg.roots_per_field as f64;
                    for _ in 0..cfg.roots_per_field {
                        let z = roots.sample(&mut rng);
                        let dz = domain.dist_to_boundary(z);
                        // G_eps(z, c) >= log(dz / max(|z - c|, eps)) >= log(dz / max(r, eps))
                        // inside B_r(z) for r <= dz, by domain monotonicity.
                        let flags = classify(
                            set.distance(z),
                            dz,
                            &cfg.deltas,
                            |rad| (dz / rad.max(eps)).max(1.0).powf(g2) * balls.inscribed(z, rad),
                            |rad| balls.tilted_disc(z, rad, cfg.gamma, eps),
                        );
                        tally(flags, w, &mut rec);
                        rec.samples += 1;
                    }
                }
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let abscissa: Vec<f64> = cfg.deltas.iter().map(|d| d.ln()).collect();
    fit_records(&cfg.deltas, &abscissa, &records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::{sample_spectral_gff, SpectralField};
    use crate::liouville::build_measure;
    use std::f64::consts::PI;

    #[test]
    fn lebesgue_ball() {
        let f = SpectralField::zeros(4).unwrap();
        let m = build_measure(&f, 0.0, 128).unwrap();
        let z = Point::new(0.51, 0.47);
        for delta in [0.001, 0.01, 0.05] {
            let b = quantum_ball(&m, z, delta).unwrap();
            assert!((b.radius - (delta / PI).sqrt()).abs() < 1.0 / 128.0, "{b:?}");
            assert!(!b.clipped);
        }
        let b = quantum_ball(&m, Point::new(0.5, 0.5), 0.999).unwrap();
        assert!(b.clipped);
        assert!(matches!(quantum_ball(&m, z, 1.5), Err(Error::DeltaOutOfRange { .. })));
        assert!(matches!(quantum_ball(&m, z, 0.0), Err(Error::DeltaOutOfRange { .. })));
    }

    #[test]
    fn disc_sums_match_scan() {
        let f = sample_spectral_gff(64, StreamSeed::new(3, 3)).unwrap();
        let m = build_measure(&f, 1.0, 32).unwrap();
        let b = BallMass::new(&m);
        for (z, r) in [(Point::new(0.5, 0.5), 0.2), (Point::new(0.13, 0.71), 0.31), (Point::new(0.9, 0.2), 0.05)] {
            let mut scan = 0.0;
            for ((i, l), v) in m.masses.indexed_iter() {
                if m.cell_centre(i, l).dist(z) < r {
                    scan += v;
                }
            }
            assert!((b.disc(z, r) - scan).abs() < 1e-12 * m.total);
            assert!(b.inscribed(z, r) <= b.disc(z, r) + 1e-15);
            let flat = b.tilted_disc(z, r, 0.0, 1.0 / 32.0);
            assert!((flat - scan).abs() < 1e-12 * m.total);
        }
    }

    #[test]
    fn full_square_quantum_slope_is_zero() {
        let cfg = QuantumConfig {
            replicates: 4,
            resolution: 32,
            cutoff: Some(64),
            deltas: vec![0.01, 0.005, 0.0025],
            margin: 0.25,
            ..Default::default()
        };
        let f = quantum_exponent(&FractalSet::FullSquare, &cfg).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }
}
