//! Age of information in multi-source bufferless preemptive queues.
//!
//! Sources emit status updates as independent Poisson streams into a single
//! server without a waiting room; a new arrival preempts whatever is in
//! service. The crate provides
//!
//! * [`service`]: service-time laws and their transforms,
//! * [`mm11`]: closed forms for exponential service,
//! * [`mg11`]: general service through transform inversion and quadrature,
//! * [`sim`]: a discrete-event simulator with batch-means confidence intervals,
//! * [`optimizer`]: min-max allocation of a total arrival-rate budget,
//! * [`laplace`]: the numerical building blocks.
//!
//! The analytic and optimization code is generic over [`Real`]; the aliases
//! below fix the scalar to `f64` or `f32`.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod laplace;
pub mod mg11;
pub mod mm11;
pub mod optimizer;
pub mod scalar;
pub mod service;
pub mod sim;

pub use error::{Error, Result};
pub use optimizer::{Method, Metric};
pub use scalar::Real;
pub use service::{ServiceKind, ServiceModel, ServiceSpec};

pub type ServiceModel64 = ServiceModel<f64>;
pub type ServiceModel32 = ServiceModel<f32>;
pub type RootPair64 = mm11::RootPair<f64>;
pub type RootPair32 = mm11::RootPair<f32>;
pub type SystemSpec64 = mg11::SystemSpec<f64>;
pub type SystemSpec32 = mg11::SystemSpec<f32>;
pub type Analyzer64 = mg11::Analyzer<f64>;
pub type Analyzer32 = mg11::Analyzer<f32>;
pub type AllocationProblem64 = optimizer::AllocationProblem<f64>;
pub type AllocationProblem32 = optimizer::AllocationProblem<f32>;
pub type AllocationResult64 = optimizer::AllocationResult<f64>;
pub type AllocationResult32 = optimizer::AllocationResult<f32>;
