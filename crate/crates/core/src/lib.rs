//! Bayesian nonparametric inference of bivariate extremal dependence.
//!
//! The dependence structure of component-wise maxima is represented in two
//! equivalent ways: the angular distribution on `[0, 1]` and the Pickands
//! dependence function, both as polynomials in Bernstein form whose
//! coefficients are cut out by linear validity restrictions. A
//! trans-dimensional Metropolis-Hastings sampler explores the joint
//! posterior of the polynomial order and its coefficients, and posterior
//! samples feed pointwise credibility bands, vertex-mass and tail summaries,
//! and closed-form predictive probabilities of joint exceedances.
//!
//! The numeric core ([`numerics`], [`bernstein`], [`likelihood`],
//! [`margins`], [`models`]) is generic over the floating-point scalar via
//! [`scalar::Real`]; the crate root re-exports the `f64` instantiations
//! used by the sampler and the command-line pipeline.

// Domain checks are written as `!(x > 0)` so that NaN arguments fall into
// the rejection branch; `x <= 0` would silently admit them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod margins;
pub mod mcmc;
pub mod models;
pub mod numerics;
pub mod prior;
pub mod scalar;
pub mod summary;

pub use error::{Error, Result};

/// Angular-distribution coefficients at working precision.
pub type AngularCoefficients = bernstein::AngularCoefficients<f64>;
/// Pickands-function coefficients at working precision.
pub type PickandsCoefficients = bernstein::PickandsCoefficients<f64>;
/// Coefficient-restriction slacks at working precision.
pub type ValidationTolerances = bernstein::ValidationTolerances<f64>;
/// Iteration/quadrature tolerances at working precision.
pub type ToleranceConfig = numerics::ToleranceConfig<f64>;
/// GEV margin parameters at working precision.
pub type GevParams = margins::GevParams<f64>;
/// Unit-Fréchet observations at working precision.
pub type FrechetSample = likelihood::FrechetSample<f64>;
/// Benchmark dependence model at working precision.
pub type DependenceModel = models::DependenceModel<f64>;
