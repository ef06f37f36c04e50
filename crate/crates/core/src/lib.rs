//! Numerical toolkit for boundary-value problems of the linearised Einstein
//! operator on product manifolds [-T,T] x T^3.
//!
//! The crate provides, per Fourier mode of the torus:
//!
//! - the symmetric-tensor calculus (trace reversal, divergence, symmetrised
//!   gradient, the gauge potential K and the Laplace-type operators D1, D2),
//! - the Anderson and general conformal boundary-condition families with
//!   residual evaluation and discrete constraint rows,
//! - a Shapiro-Lopatinskij ellipticity checker with an independent
//!   half-space kernel oracle,
//! - gauge fields supported in boundary collars and the machinery to verify
//!   gauge invariance of boundary conditions,
//! - an exact-vs-linearised mean-curvature comparison on warped backgrounds,
//! - a per-mode spectral solver (eigenvalues, singular values, kernels) for
//!   the constrained operator.

pub mod boundary;
pub mod ellipticity;
pub mod error;
pub mod gauge;
pub mod geometry;
pub mod linalg;
pub mod linearise;
pub mod spectral;
pub mod stencil;
pub mod tensor_ops;

pub use error::{Error, Result};
