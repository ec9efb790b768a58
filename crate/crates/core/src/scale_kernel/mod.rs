//! ψ, the scale function φ, Lévy tail masses and the variation class.

mod phi;
mod profile;
mod tail;
mod variation;

pub use phi::{eval_phi, invert_monotone, invert_monotone_with, InvertOptions, ScaleFunction};
pub use profile::{eval_psi, log_pairs, verify_wlsc, MonotoneCubic, PsiFn, PsiShape, ScalingProfile, WlscReport};
pub use tail::{levy_tail_mass, radial_tail_integral, tail_bounds, TailConstants};
pub use variation::{classify_variation, diagnose_divergence, DivergenceDiagnostic, Variation, VariationClass, Verdict};
