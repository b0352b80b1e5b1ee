//! Numerical laboratory for curvature of Riemannian submersions.
//!
//! The crate computes curvature of chart-presented metrics with exact first
//! and second derivatives (forward-mode jets), builds C¹-small conformal and
//! fiber-warped deformations of built-in submersion models from certified
//! one-dimensional bump profiles, and decides positivity of intermediate
//! Ricci sums both through block-eigenvalue criteria and through an
//! independent orthonormal-frame search.
//!
//! Layout:
//! - [`jet`]: second-order forward differentiation numbers
//! - [`tensor`]: wedge algebra, Kulkarni–Nomizu products, tensor norms
//! - [`calculus`]: Christoffel/Riemann/sectional/Ricci machinery
//! - [`frames`]: orthonormal-frame search for curvature sums
//! - [`profile`]: certified bump profiles and distance-composed functions
//! - [`models`]: built-in submersions and their fundamental tensors
//! - [`deform`]: the deformed metrics and their predicted curvature
//! - [`checker`]: block-eigenvalue positivity criteria and the frame oracle
//! - [`report`]: serializable experiment records

pub mod calculus;
pub mod checker;
pub mod deform;
pub mod error;
pub mod frames;
pub mod jet;
pub mod models;
pub mod numcheck;
pub mod profile;
pub mod report;
pub mod sampling;
pub mod tensor;

pub use calculus::{CurvaturePointData, MetricField, ScalarField, TensorField};
pub use error::{GeomError, Result};
pub use frames::FrameSearchConfig;
pub use jet::Jet;
pub use tensor::{CurvatureOperator, TangentVector, TwoTensor, WedgeBasis};
