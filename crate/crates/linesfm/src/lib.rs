//! Active structure-from-motion for 3D straight lines.
//!
//! A camera observing the image projection of a 3D straight line can recover
//! the line's direction and depth from the projection's motion, provided the
//! camera velocity is known. This crate implements:
//!
//! - [`geometry`]: Plücker-line representations, the χ = d/l change of
//!   variables, and the orthogonality-based coordinate elimination.
//! - [`dynamics`]: time derivatives of the line state under camera motion and
//!   the interaction matrix Ω coupling the unknowns to the measurement.
//! - [`observer`]: the nonlinear estimator with the SVD-based gain matrix H.
//! - [`control`]: eigenvalue analytics of ΩΩᵀ and the camera-velocity law
//!   that drives the estimator's convergence rate to a desired value.
//! - [`sim`]: scenario generation, closed-loop integration and metrics.
//! - [`config`] / [`output`]: CLI configuration and result serialization.
//!
//! Units: positions and depths in meters, linear velocity in m/s, angular
//! velocity in rad/s, and χ in 1/meters throughout.

pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod observer;
pub mod output;
pub mod sim;
pub mod tolerances;

pub use error::Error;
