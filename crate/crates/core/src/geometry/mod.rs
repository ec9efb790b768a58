//! Domains with the R-ball condition, distances, normals, volumes, surface
//! quadrature and coarea boundary-layer integration.

mod domain;
mod qmc;
mod sdf;
mod surface;

pub use domain::{boundary_projection, signed_distance, volume, Domain, DomainKind, Projection, VolumeEstimate};
pub use qmc::{halton_into, radical_inverse};
pub use sdf::{ellipse_sd, SdfShape};
pub use surface::{
    coarea_sandwich_check, coarea_sandwich_check_with, layer_jacobian, layer_sample, sphere_points, surface_quadrature,
    tangent_basis, LayerSample, LayerSampler, SandwichReport, SurfaceQuadrature,
};
