//! Analysis and Monte Carlo simulation of the uplink of a cellular network in
//! which every user is placed uniformly inside the bounded cell of its serving
//! base station.
//!
//! Base stations form a homogeneous Poisson point process of density
//! `lambda0`. Each station serves the part of its Voronoi cell that lies
//! within a fixed range `r_c` of the station (its bounded cell), and exactly
//! one active uplink user is drawn uniformly from every non-empty cell. The
//! crate provides:
//!
//! - [`area_model`]: moments and a fitted mixture distribution (truncated
//!   generalized beta plus an atom at the full-disk area) for the bounded
//!   cell area, and the cell load model built on it.
//! - [`uplink`]: the interfering-user pair correlation function, the Laplace
//!   transform of aggregate interference, SIR coverage probability, and
//!   average user spectral efficiency.
//! - [`monte_carlo`]: a reproducible, parallel simulator used to validate
//!   every analytical result above.
//! - [`numerics`]: the adaptive quadratures, the 2-D root finder, and the
//!   monotone interpolation those modules share.
//! - [`validation`]: the end-to-end acceptance suite comparing analysis
//!   against simulation at pinned tolerances.

pub mod area_model;
pub mod error;
pub mod monte_carlo;
pub mod numerics;
pub mod point_process;
pub mod rng;
pub mod uplink;
pub mod validation;

pub use error::{Error, Result};

/// Correction factor applied to the base station density when approximating
/// the serving-distance distribution by a truncated Rayleigh law. The value
/// 5/4 matches the empirical distance distribution of a typical user placed
/// uniformly in the bounded cell of its serving station.
pub const DISTANCE_CORRECTION_C2: f64 = 1.25;
