//! Bayesian multivariate linear regression with sparse coefficients and
//! Gaussian DAG-structured errors.
//!
//! Two samplers are provided:
//!
//! * [`ess`]: an exact-likelihood blocked Gibbs sampler over the coefficient
//!   matrix, its inclusion indicators, and the modified Cholesky factors
//!   `(L, D)` of the error precision matrix together with the DAG.
//! * [`tes`]: a two-step sampler that first selects coefficients response by
//!   response under a fractional posterior, then infers the DAG and `(L, D)`
//!   from the estimated residuals.
//!
//! [`simgen`] generates the synthetic benchmark scenarios, [`metrics`] scores
//! selection and estimation, and [`pipeline`] wires everything to files.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dag_wishart;
pub mod error;
pub mod ess;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod proposal;
pub mod rng;
pub mod select;
pub mod simgen;
pub mod tes;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use model::{CholeskyPair, ErrorEstimate, OrderedDag, RegressionData, SparseCoefState};
