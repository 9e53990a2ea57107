//! Run configuration: defaults, then a JSON document (`--config`), then
//! command-line flags, later sources overriding earlier ones.

use std::path::PathBuf;

use kpzlab::kpz::{FractalSet, RootMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SampleField,
    BuildMeasure,
    EuclidExponent,
    QuantumExponent,
    Verify,
    KpzTable,
    CountQuads,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Truncated sine series on the unit square.
    #[default]
    Spectral,
    /// Discrete free field on the `N x N` lattice.
    Dgff,
}

/// Every key is optional; commands fill in their own defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    pub cutoff: Option<usize>,
    pub scales: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub set: Option<FractalSet>,
    pub root_mode: Option<RootMode>,
    pub roots_per_field: Option<usize>,
    pub margin: Option<f64>,
    pub out: Option<PathBuf>,
    pub checks: Option<Vec<String>>,
    pub field: Option<FieldKind>,
    pub overlay: Option<bool>,
    pub max_faces: Option<u32>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Keys set in `top` replace those in `self`.
    pub fn merge(mut self, top: RunConfig) -> Self {
        overlay!(
            self, top, command, gamma, seed, resolution, cutoff, scales, replicates, set, root_mode, roots_per_field,
            margin, out, checks, field, overlay, max_faces
        );
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn gamma_or(&self, default: f64) -> f64 {
        self.gamma.unwrap_or(default)
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let k: i32 = exp.parse().map_err(|_| format!("bad exponent in '{s}'"))?;
        return Ok(2f64.powi(k));
    }
    s.parse().map_err(|_| format!("'{s}' is not a number"))
}

/// Comma-separated numbers, each a decimal or `2^k`, or a dyadic range
/// `2^-a..2^-b` covering every power of two between the ends.
pub fn parse_scales(s: &str) -> Result<Vec<f64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_number(a)?, parse_number(b)?);
        let (ka, kb) = (a.log2(), b.log2());
        if ka.fract() != 0.0 || kb.fract() != 0.0 {
            return Err(format!("range ends of '{s}' must be powers of two"));
        }
        let (ka, kb) = (ka as i32, kb as i32);
        let step = if kb >= ka { 1 } else { -1 };
        let mut out = vec![];
        let mut k = ka;
        loop {
            out.push(2f64.powi(k));
            if k == kb {
                break;
            }
            k += step;
        }
        return Ok(out);
    }
    s.split(',').map(parse_number).collect()
}

/// `segment`, `point`, `full-square`, `cantor-dust:DEPTH`, or a JSON
/// object in the config format.
pub fn parse_set(s: &str) -> Result<FractalSet, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("set: {e}"));
    }
    match s.split_once(':') {
        Some(("cantor-dust", depth)) => depth
            .parse()
            .map(FractalSet::cantor_dust)
            .map_err(|_| format!("bad depth in '{s}'")),
        _ => match s {
            "segment" => Ok(FractalSet::default()),
            "point" => Ok(FractalSet::Point {
                at: kpzlab::Point::new(0.5, 0.5),
            }),
            "full-square" => Ok(FractalSet::FullSquare),
            _ => Err(format!("unknown set '{s}'")),
        },
    }
}

pub fn parse_root_mode(s: &str) -> Result<RootMode, String> {
    match s {
        "sample-from-measure" | "measure" => Ok(RootMode::SampleFromMeasure),
        "rooted-density" | "rooted" => Ok(RootMode::RootedDensity),
        _ => Err(format!("unknown root mode '{s}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales() {
        assert_eq!(parse_scales("2^-1..2^-3").unwrap(), vec![0.5, 0.25, 0.125]);
        assert_eq!(parse_scales("0.5, 2^-2").unwrap(), vec![0.5, 0.25]);
        assert!(parse_scales("0.3..0.1").is_err());
        assert!(parse_scales("x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_json(r#"{"gamma": 1.0, "seed": 5, "set": {"kind": "full-square"}}"#).unwrap();
        let flags = RunConfig {
            gamma: Some(0.5),
            ..Default::default()
        };
        let c = file.merge(flags);
        assert_eq!(c.gamma, Some(0.5));
        assert_eq!(c.seed, Some(5));
        assert_eq!(c.set, Some(FractalSet::FullSquare));
        assert!(RunConfig::from_json(r#"{"gama": 1}"#).is_err());
    }

    #[test]
    fn sets() {
        assert_eq!(parse_set("segment").unwrap(), FractalSet::default());
        assert_eq!(parse_set("cantor-dust:3").unwrap(), FractalSet::cantor_dust(3));
        assert!(parse_set("blob").is_err());
    }
}
