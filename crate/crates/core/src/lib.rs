//! Residual distribution solver for the 2D compressible Euler equations on
//! unstructured triangle and quadrilateral meshes, with an optional
//! correction layer that makes the scheme locally conservative in angular
//! momentum.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bezier;
pub mod cases;
pub mod config;
pub mod correction;
pub mod dec;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod euler;
pub mod mesh;
pub mod quadrature;
pub mod residual;
pub mod selftest;
pub mod vtk;

pub use error::{Error, Result, StateError};
