//! Numerical machinery: Laplace inversion on the positive axis, adaptive
//! quadrature with declared point masses, and monotone root bracketing.

mod bisect;
mod invert;
mod quad;

pub use bisect::{bisect_monotone, bisect_monotone_traced, Bracketed};
pub use invert::{invert, EulerInversion, TransformFn};
pub(crate) use invert::clamp_density;
pub use quad::{
    integrate, integrate_measure, integrate_measure_noisy, integrate_piecewise, integrate_piecewise_noisy, Atom,
};
