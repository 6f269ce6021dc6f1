//! Bergman kernels, Fubini-Study currents and random zeros on model
//! orbifold curves.

pub mod cache;
pub mod config;
pub mod convergence;
pub mod currents;
pub mod error;
pub mod hash;
pub mod model;
pub mod point;
pub mod poly;
pub mod quadrature;
pub mod random_zeros;
pub mod runner;
pub mod section_space;

pub use error::{Error, Result};
pub use model::{build_model, ModelKind, ModelSpec, OrbifoldModel};
pub use point::Point;
pub use section_space::SectionSpace;
