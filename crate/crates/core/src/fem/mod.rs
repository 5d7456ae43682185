//! Desk-scale 2D lossy-cavity solver: structured mesh hierarchy on
//! `[-1, 1]^2`, lowest-order edge elements with PEC elimination,
//! quadrature-assembled pulled-back forms, banded complex direct solve and
//! quantity-of-interest evaluation.
//!
//! Assembly and solve for distinct parameter points are independent; a single
//! assembly is sequential and factorizations are never shared.

pub mod assemble;
pub mod band;
pub mod manufactured;
pub mod mesh;
pub mod quadrature;

pub use assemble::{
    assemble, best_rotation, hcurl_error_vs_discrete, hcurl_error_vs_exact, hcurl_norm, qoi,
    rotated_hermitian_min_eig, solve, CoefficientFields,
};
pub use band::{BandLu, BandMatrix};
pub use manufactured::ManufacturedCavity;
pub use mesh::{build_hierarchy, structured_dim, EdgeSpace, MeshDump, TriMesh};
pub use quadrature::{QuadraturePair, TriangleRule};
