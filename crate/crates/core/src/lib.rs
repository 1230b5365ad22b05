//! Numerical engine for the sub-Riemannian space forms M(κ), κ ∈ {−1, 0, 1}.
//!
//! Tangent vectors live in frame components relative to the orthonormal
//! frame {X, Y, T}; ambient coordinates only appear at export and at
//! finite-difference boundaries.

pub mod angle;
pub mod error;
pub mod geodesic;
pub mod geometry;
pub mod jacobi;
pub mod jet;
pub mod model_space;
pub mod quadrature;
pub mod roots;
pub mod stability;
pub mod surfaces;

pub use error::{Error, Result};
pub use model_space::{AmbientPoint, Connection, FrameMatrix, FrameVector, SpaceForm};
