//! Multilevel uncertainty quantification for parametric PDEs on uncertain
//! domains: multilevel Monte Carlo and multilevel Smolyak quadrature and
//! interpolation over a hierarchy of edge-element discretizations, with a 2D
//! lossy-cavity curl-curl solver as the shipped backend.

pub mod error;
pub mod fem;
pub mod geometry;
pub mod leja;
pub mod smolyak;
pub mod ml_smolyak;
pub mod mlmc;
pub mod models;
pub mod multiindex;
pub mod oracle;
pub mod value;

pub use error::UqError;
pub use multiindex::{IndexSet, MultiIndex};
pub use value::ValueSpace;
