//! Bautin bifurcation analysis of `x′ = a·x(t−r) + x² + c·x·x(t−r)`.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the common double-precision case.

// `!(x > 0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exp_poly;
pub mod dde_sim;
pub mod json;
pub mod lyapunov;
pub mod manifold;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use exp_poly::ExpPoly;
pub use lyapunov::{BifurcationReport, Classification};
pub use manifold::{CenterManifold, CoeffTable, EigenData};
pub use scalar::Real;
pub use spectrum::ModelParams;

pub type ExpPoly64 = ExpPoly<f64>;
pub type ExpPoly32 = ExpPoly<f32>;
pub type CoeffTable64 = CoeffTable<f64>;
pub type ModelParams64 = ModelParams<f64>;
