//! Membrane finite elements for fibre-reinforced surfaces and stiffness
//! optimization of the fibre layout.
//!
//! The state problem is a linear membrane on a surface of bilinear quads with
//! an orthotropic law built from an isotropic base and two orthogonal fibre
//! families. The design problem sizes both families by optimality-criteria
//! updates under a volume budget and turns the fibres towards the principal
//! membrane force directions.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod geometry;
pub mod material;
pub mod optimizer;

pub use error::{Error, Result};
