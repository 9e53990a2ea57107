//! Named verification checks with quantitative pass bands. Shared by the
//! `verify` command and the acceptance suite.

mod gff_checks;
mod kpz_checks;
mod measure_checks;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One verdict: a target, an estimate with its standard error, and whether
/// the estimate falls within the stated tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub item: String,
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl CheckRow {
    fn new(check: &str, item: impl Into<String>, target: f64, estimate: f64, stderr: f64, tolerance: String, pass: bool) -> Self {
        Self {
            check: check.into(),
            item: item.into(),
            target,
            estimate,
            stderr,
            tolerance,
            pass,
        }
    }

    /// `|estimate - target| <= k * stderr`
    pub(crate) fn sigma(check: &str, item: impl Into<String>, target: f64, estimate: f64, stderr: f64, k: f64) -> Self {
        let pass = (estimate - target).abs() <= k * stderr;
        Self::new(check, item, target, estimate, stderr, format!("{k}σ"), pass)
    }

    /// `|estimate - target| <= rel * |target|`
    pub(crate) fn relative(check: &str, item: impl Into<String>, target: f64, estimate: f64, stderr: f64, rel: f64) -> Self {
        let pass = (estimate - target).abs() <= rel * target.abs();
        Self::new(check, item, target, estimate, stderr, format!("{}%", rel * 100.0), pass)
    }

    /// `|estimate - target| <= tol`
    pub(crate) fn absolute(check: &str, item: impl Into<String>, target: f64, estimate: f64, stderr: f64, tol: f64) -> Self {
        let pass = (estimate - target).abs() <= tol;
        Self::new(check, item, target, estimate, stderr, format!("±{tol}"), pass)
    }

    /// `|estimate - target| <= rel * |target| + k * stderr`
    pub(crate) fn relative_plus_sigma(
        check: &str,
        item: impl Into<String>,
        target: f64,
        estimate: f64,
        stderr: f64,
        rel: f64,
        k: f64,
    ) -> Self {
        let pass = (estimate - target).abs() <= rel * target.abs() + k * stderr;
        Self::new(check, item, target, estimate, stderr, format!("{}% + {k}σ", rel * 100.0), pass)
    }

    /// A condition checked directly; `target` and `estimate` are reported
    /// for context.
    pub(crate) fn condition(check: &str, item: impl Into<String>, target: f64, estimate: f64, stderr: f64, tolerance: impl Into<String>, pass: bool) -> Self {
        Self::new(check, item, target, estimate, stderr, tolerance.into(), pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub seed: u64,
    /// Overrides the ensemble size of every stochastic check.
    pub replicates: Option<usize>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            replicates: None,
        }
    }
}

impl CheckOptions {
    pub(crate) fn replicates(&self, default: usize) -> usize {
        self.replicates.unwrap_or(default).max(2)
    }
}

pub struct CheckInfo {
    pub name: &'static str,
    pub summary: &'static str,
    run: fn(&CheckOptions) -> Result<Vec<CheckRow>>,
}

/// Every registered check, in suite order.
pub const CHECKS: &[CheckInfo] = &[
    CheckInfo {
        name: "green-diagonal",
        summary: "G(x,y) + log|x-y| -> log C(x) at small offsets (square and disc)",
        run: gff_checks::green_diagonal,
    },
    CheckInfo {
        name: "var-circle-average",
        summary: "Var h_eps(z) = log(1/eps) + log C(z) within 3%",
        run: gff_checks::var_circle_average,
    },
    CheckInfo {
        name: "circle-process-bm",
        summary: "circle-average increments are a standard Brownian motion",
        run: gff_checks::circle_process_bm,
    },
    CheckInfo {
        name: "dgff-exactness",
        summary: "DGFF sampler covariance vs inverse Laplacian; log N growth",
        run: gff_checks::dgff_exactness,
    },
    CheckInfo {
        name: "measure-moments",
        summary: "first moment eps-free and = ∫phi C^{g^2/2}; second moment limit",
        run: measure_checks::measure_moments,
    },
    CheckInfo {
        name: "l2-cauchy",
        summary: "coupled L2 differences decrease along dyadic eps",
        run: measure_checks::l2_cauchy,
    },
    CheckInfo {
        name: "rooted-ball-scaling",
        summary: "E mass of rooted balls ~ r^{2-g^2}; ratio-test constant flat",
        run: measure_checks::rooted_ball_scaling,
    },
    CheckInfo {
        name: "fp-oracle",
        summary: "first-passage Monte Carlo vs delta^{beta/gamma}",
        run: kpz_checks::fp_oracle,
    },
    CheckInfo {
        name: "kpz-fixed-points",
        summary: "KPZ quadratic: named values, fixed points, inverse round trip",
        run: kpz_checks::kpz_fixed_points,
    },
    CheckInfo {
        name: "kpz-end-to-end",
        summary: "Euclidean and quantum exponents of a segment satisfy KPZ",
        run: kpz_checks::kpz_end_to_end,
    },
    CheckInfo {
        name: "count-quads",
        summary: "exact quadrangulation counts",
        run: kpz_checks::count_quads,
    },
    CheckInfo {
        name: "reproducibility",
        summary: "repeated runs give identical result checksums",
        run: kpz_checks::reproducibility,
    },
];

pub fn find_check(name: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn run_check(name: &str, opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    let info = find_check(name).ok_or_else(|| Error::InvalidParameter(format!("unknown check '{name}'")))?;
    (info.run)(opts)
}

/// Rows as CSV with a header line.
pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("check,item,target,estimate,stderr,tolerance,verdict\n");
    for r in rows {
        out.push_str(&format!(
            "{},\"{}\",{:.12e},{:.12e},{:.6e},\"{}\",{}\n",
            r.check,
            r.item.replace('"', "'"),
            r.target,
            r.estimate,
            r.stderr,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}
