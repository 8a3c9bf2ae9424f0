//! Discontinuous Galerkin solver for the generalized KdV equation
//! `u_t + f(u)_x + eps u_xxx = 0` on the periodic unit interval.

pub mod basis;
pub mod error;
pub mod field;
pub mod harness;
pub mod mesh;
pub mod operators;
pub mod problems;
pub mod special;
pub mod timestep;

pub use error::{Error, Result};
pub use mesh::Mesh;
