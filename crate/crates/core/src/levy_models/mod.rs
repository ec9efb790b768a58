//! Increment and path sampling for symmetric Lévy processes.

mod model;
mod path;
mod sampler;

pub use model::{omega, stable_constant, Diffusion, JumpLaw, LevyModel, RadialDensity};
pub use path::{first_exit, project_running_sup, sample_path, BridgeCorrection, ExitRecord, Path};
pub use sampler::{
    check_unit, default_cutoff, positive_stable, sample_increment, sample_stable_increment, standard_symmetric_stable,
    unit_vector, IncrementSampler, PathGrid, Projection, RadiusTable, SamplerDiagnostics,
};
