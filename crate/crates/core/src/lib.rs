//! Assembly, monotonicity certification and accuracy studies for the Q² spectral
//! element discrete Laplacian on quasi-uniform rectangular tensor meshes.
//!
//! The scheme is assembled directly in its finite-difference form: one row per
//! Gauss–Lobatto grid point, identity rows on the boundary. [`lorenz`] builds
//! the decomposition `A = A_d + A_a⁺ + A^z + A^s` and checks the hypotheses of
//! the relaxed Lorenz condition; [`mmatrix`] provides the dense inverse oracle
//! every certificate is validated against.

pub mod cli;
pub mod constraints;
pub mod error;
pub mod linalg;
pub mod lorenz;
pub mod matrix_market;
pub mod mesh;
pub mod mmatrix;
pub mod operator;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
pub use mesh::{CellPartition1D, Interval, LocalHalfWidths, PointClass, TensorMesh};
pub use operator::{assemble, GridOperator, GridShape, GridVector};
