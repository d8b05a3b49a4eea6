//! Library-wide tolerance constants.
//!
//! These are fixed once here rather than scattered as ad-hoc magic numbers.

/// Unit-norm and orthogonality checks at construction time.
///
/// f64 keeps ~15.9 significant digits; 1e-12 allows a few hundred ulps of
/// accumulated rounding in normalizations and cross products.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Smallest |h[axis]| accepted as the elimination denominator.
///
/// The elimination axis carries the largest absolute component of the unit
/// vector h, so |h[axis]| >= 1/sqrt(3) whenever the axis choice is current.
/// Values below this bound mean the controller failed to hold the
/// interpretation plane and the run is no longer trustworthy.
pub const ELIMINATION_DENOM_MIN: f64 = 1e-6;

/// Smallest ||chi|| accepted when recovering depth as l = 1/||chi||.
/// Below this the line is at infinity for all practical purposes.
pub const CHI_NORM_MIN: f64 = 1e-9;

/// Depth below which a line counts as passing through the optical center.
pub const DEPTH_MIN: f64 = 1e-9;

/// Relative conditioning bound of the eigenvalue Jacobian: when the smaller
/// singular value drops below `PINV_COND_MIN` times the larger one the exact
/// pseudo-inverse would amplify the error along a barely-reachable direction
/// into huge velocity commands, so the damped branch takes over.
pub const PINV_COND_MIN: f64 = 0.1;

/// Absolute damping floor for the pseudo-inverse; the damped branch uses
/// λ = PINV_DAMPING + (PINV_COND_MIN·σ_max)² so the guard tracks the
/// problem's magnitude while staying positive for a zero Jacobian.
pub const PINV_DAMPING: f64 = 1e-6;
