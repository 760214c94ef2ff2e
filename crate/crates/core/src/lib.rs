//! Reconstruction of boundary displacement and traction in the lateral Cauchy
//! problem for planar elastodynamics.
//!
//! Time is removed by a Laguerre transform, which turns the hyperbolic problem
//! into a recursive sequence of stationary boundary value problems. Each is
//! solved with single-layer potentials discretized by a Nyström method with
//! logarithmic and Cauchy-singular trigonometric quadrature, and the ill-posed
//! Cauchy system is stabilized with Tikhonov regularization.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy_solver;
mod dd;
pub mod error;
pub mod fundamental;
pub mod geometry;
pub mod laguerre;
pub mod nystrom;
pub mod special_functions;

pub use error::{Error, Result};
