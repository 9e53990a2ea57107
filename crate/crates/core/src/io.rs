//! File formats: flat little-endian `f64` grids with a JSON sidecar, and
//! CSV/JSON for exponent fits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::gff::DiscreteField;
use crate::kpz::ExponentFit;
use crate::liouville::GridMeasure;
use crate::rng::StreamSeed;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Describes the raw grid next to it: `rows x cols` little-endian `f64`,
/// row-major, row index = x cell index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    /// `spectral-field`, `dgff` or `measure`.
    pub kind: String,
    pub domain: DomainSpec,
    pub rows: usize,
    pub cols: usize,
    pub dtype: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cutoff: Option<usize>,
    /// DGFF side `N`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<StreamSeed>,
    /// Free-text statement of the covariance normalization.
    pub normalization: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<f64>,
    /// File name of the field a measure was built from.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub field_ref: Option<String>,
    pub code_version: String,
}

impl GridSidecar {
    fn base(kind: &str, rows: usize, cols: usize, normalization: &str) -> Self {
        Self {
            kind: kind.into(),
            domain: DomainSpec::unit_square(),
            rows,
            cols,
            dtype: "f64-le".into(),
            cutoff: None,
            side: None,
            seed: None,
            normalization: normalization.into(),
            gamma: None,
            eps: None,
            field_ref: None,
            code_version: CODE_VERSION.into(),
        }
    }

    /// Pointwise values of a truncated series field on cell centres.
    pub fn spectral(n: usize, cutoff: usize, seed: Option<StreamSeed>) -> Self {
        Self {
            cutoff: Some(cutoff),
            seed,
            ..Self::base("spectral-field", n, n, "E[h(x)h(y)] = G(x,y) ~ log(1/|x-y|)")
        }
    }

    pub fn dgff(field: &DiscreteField) -> Self {
        let n = field.n() + 1;
        Self {
            side: Some(field.n()),
            seed: field.seed(),
            ..Self::base("dgff", n, n, "precision 4I - A on the interior; zero on the boundary")
        }
    }

    pub fn measure(m: &GridMeasure, seed: Option<StreamSeed>, field_ref: Option<String>) -> Self {
        Self {
            seed,
            gamma: Some(m.gamma),
            eps: Some(m.eps),
            field_ref,
            ..Self::base(
                "measure",
                m.resolution,
                m.resolution,
                "cell mass = exp(gamma h_eps + gamma^2/2 log eps) / n^2",
            )
        }
    }
}

/// Paths `stem.bin` and `stem.json`.
pub fn grid_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

pub fn grid_bytes(values: &Array2<f64>) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Write `stem.bin` and `stem.json`; returns both paths.
pub fn write_grid(stem: &Path, values: &Array2<f64>, sidecar: &GridSidecar) -> Result<(PathBuf, PathBuf)> {
    if values.dim() != (sidecar.rows, sidecar.cols) {
        return Err(Error::DimensionMismatch {
            expected: format!("{} x {}", sidecar.rows, sidecar.cols),
            found: format!("{:?}", values.dim()),
        });
    }
    let (bin, json) = grid_paths(stem);
    fs::write(&bin, grid_bytes(values))?;
    fs::write(&json, serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok((bin, json))
}

pub fn read_grid(stem: &Path) -> Result<(Array2<f64>, GridSidecar)> {
    let (bin, json) = grid_paths(stem);
    let sidecar: GridSidecar = serde_json::from_str(&fs::read_to_string(json)?)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * sidecar.rows * sidecar.cols {
        return Err(Error::DimensionMismatch {
            expected: format!("{} bytes", 8 * sidecar.rows * sidecar.cols),
            found: format!("{} bytes", bytes.len()),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let grid = Array2::from_shape_vec((sidecar.rows, sidecar.cols), values)
        .map_err(|e| Error::Io(e.to_string()))?;
    Ok((grid, sidecar))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of a serializable configuration, for fit summaries.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

/// One row per scale: `scale,estimate,stderr,n_samples,n_discarded`.
pub fn write_fit_csv<W: Write>(fit: &ExponentFit, mut w: W) -> Result<()> {
    writeln!(w, "scale,estimate,stderr,n_samples,n_discarded")?;
    for p in &fit.points {
        writeln!(w, "{:e},{:e},{:e},{},{}", p.scale, p.estimate, p.stderr, p.n_samples, p.n_discarded)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub scales: usize,
    pub config_hash: String,
}

impl FitSummary {
    pub fn new(fit: &ExponentFit, config_hash: String) -> Self {
        Self {
            slope: fit.slope,
            slope_stderr: fit.slope_stderr,
            intercept: fit.intercept,
            scales: fit.points.len(),
            config_hash,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Array2::from_shape_fn((3, 4), |(i, j)| i as f64 - 0.5 * j as f64);
        let mut sc = GridSidecar::spectral(3, 7, Some(StreamSeed::new(1, 2)));
        sc.cols = 4;
        let stem = dir.path().join("field");
        write_grid(&stem, &g, &sc).unwrap();
        let (back, sc2) = read_grid(&stem).unwrap();
        assert_eq!(back, g);
        assert_eq!(sc2, sc);
        sc.rows = 5;
        assert!(write_grid(&stem, &g, &sc).is_err());
    }
}
