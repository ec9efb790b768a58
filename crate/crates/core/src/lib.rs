//! Simulation and quadrature toolkit for the small-time behaviour of the
//! spectral heat content of symmetric Lévy processes.
//!
//! The deficit |D| − Q_D(t) behaves like a boundary integral of
//! E[sup of the normal projection ∧ 1] for unbounded-variation processes and
//! like t·Per_X(D) for bounded-variation ones. The crate samples the
//! processes, estimates both sides and checks the supporting inequalities.

pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod levy_models;
pub mod quadrature;
pub mod rng;
pub mod scale_kernel;
pub mod stats;

pub use error::{Result, ShcError};

/// Three-valued verdict used by checks whose statistical bands may be too
/// wide to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    /// Worst of two outcomes (fail > inconclusive > pass).
    pub fn and(self, o: Outcome) -> Outcome {
        use Outcome::*;
        match (self, o) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
            Outcome::Inconclusive => 3,
        }
    }
}
