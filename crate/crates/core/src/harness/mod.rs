//! Experiment runners: configuration, the dichotomy study, the bound audit
//! and the supporting comparisons. Every runner is deterministic given its
//! configuration and seed.

mod audit;
mod config;
mod dichotomy;
mod halfspace;
mod negligibility;
mod records;

pub use audit::{run_bound_audit, AuditReport, BoundCheck};
pub use config::{AuditSpec, DomainSpec, ExperimentConfig, ModelSpec, SEED_ENV};
pub use dichotomy::{extrapolate, run_dichotomy, verdict, Branch, DichotomyReport, DichotomyRow, Extrapolation};
pub use halfspace::{run_halfspace_suite, HalfspaceReport, HalfspaceRow};
pub use negligibility::{run_t_negligibility, NegligibilityReport, NegligibilityRow};
pub use records::{records_csv, run_exitprob, run_perimeter, run_supfun, EstimateRecord};

use crate::error::{Result, ShcError};
use std::path::{Path, PathBuf};

/// Writes `<stem>.json` and, when given, `<stem>.csv`. Returns the paths written.
pub fn write_outputs<T: serde::Serialize>(stem: &Path, report: &T, csv: Option<&str>) -> Result<Vec<PathBuf>> {
    if let Some(dir) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let json = to_json(report)?;
    let mut out = vec![stem.with_extension("json")];
    std::fs::write(&out[0], json)?;
    if let Some(csv) = csv {
        out.push(stem.with_extension("csv"));
        std::fs::write(&out[1], csv)?;
    }
    Ok(out)
}

pub fn to_json<T: serde::Serialize>(report: &T) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| ShcError::Config(e.to_string()))
}
