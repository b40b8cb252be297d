//! Shared numerical routines: adaptive quadrature in one and three
//! dimensions, a damped-Newton 2-D root finder with bisection fallback, and
//! monotone cubic interpolation.

mod cube;
mod interp;
mod quad;
mod root;

pub use cube::integrate_3d;
pub use interp::MonotoneCubic;
pub use quad::{integrate_1d, integrate_semi_infinite};
pub use root::solve_2d;

/// Tolerances and budget for the adaptive quadratures.
///
/// Integration stops once the estimated error is below
/// `max(abs_tol, rel_tol * |integral|)`; exceeding `max_subdivisions`
/// interval (or box) splits raises [`crate::Error::NonConvergence`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

/// Tolerance and budget for root finding.
///
/// A root is accepted when `max(|f1|, |f2|) <= tol`. `bracket_expansion` is
/// the growth factor used when the bisection fallback searches for a sign
/// change.
#[derive(Debug, Clone, Copy)]
pub struct RootFindSpec {
    pub tol: f64,
    pub max_iter: u32,
    pub bracket_expansion: f64,
}

impl Default for RootFindSpec {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            bracket_expansion: 2.0,
        }
    }
}
