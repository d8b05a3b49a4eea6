//! Nonlinear estimation of the line's 3D structure from the measured h.
//!
//! The estimator is the active structure-from-motion scheme
//!
//! ```text
//! ḣ̂      = ω × h + Ωᵀ χ̂ + H (h − ĥ)
//! χ̇̂_free = f_u(h, χ̂, v) + α Ω (h − ĥ)
//! ```
//!
//! where all measurable quantities are the measured h, never the estimate.
//! The gain matrix H is rebuilt from the SVD of Ω each step with
//! cᵢ = 2√α·σᵢ on the excited subspace, which places a repeated real pole at
//! −√α·σᵢ per singular direction and prevents oscillatory modes.

use nalgebra::{Matrix3, SVector, Vector2, Vector3};

use crate::dynamics::{chi_dynamics_full, omega_matrix, CameraVelocity, OmegaMatrix};
use crate::error::Error;
use crate::geometry::{recover, reconstruct_chi, Axis, PluckerLine, ReducedState};

/// Estimator gains: innovation gain α > 0 and the value of the D2 block on
/// the unexcited subspace (identity by default).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverGains {
    pub alpha: f64,
    pub d2_value: f64,
}

impl ObserverGains {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            d2_value: 1.0,
        }
    }
}

/// Estimated state. `h_hat` is unconstrained during transients (the estimate
/// of the measurable part is not renormalized); `chi_hat` holds the two free
/// unknowns for the fixed elimination axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub h_hat: Vector3<f64>,
    pub chi_hat: Vector2<f64>,
    pub axis: Axis,
}

impl ObserverState {
    /// Initialize with the measured h (available from the image) and an
    /// initial guess for the unknowns.
    pub fn init(h_meas: Vector3<f64>, chi_hat: Vector2<f64>, axis: Axis) -> Self {
        Self {
            h_hat: h_meas,
            chi_hat,
            axis,
        }
    }

    /// Retrieve the estimated line from the state: normalize ĥ, rebuild the
    /// full χ̂ from the constraint, then depth and direction follow.
    pub fn estimated_line(&self) -> Result<PluckerLine, Error> {
        let n = self.h_hat.norm();
        if n == 0.0 {
            return Err(Error::InvalidLine("estimated h is zero".into()));
        }
        recover(&ReducedState {
            h: self.h_hat / n,
            chi_free: self.chi_hat,
            axis: self.axis,
        })
    }
}

/// SVD-based gain matrix H = V·blockdiag(D1, D2)·Vᵀ with
/// D1 = diag(2√α·σ₁, 2√α·σ₂).
///
/// Written as H = d2·I + Σᵢ (cᵢ − d2)·vᵢvᵢᵀ over the right singular vectors
/// of Ω, which is the same matrix without forming the full V. H is symmetric
/// by construction and positive definite whenever both σᵢ > 0; a vanishing
/// singular value (loss of excitation) leaves it positive semidefinite and
/// is logged. The decomposition convention (UΣV vs UΣVᵀ) does not matter:
/// H depends only on the right singular subspaces, and for repeated σ the
/// diagonal block is a scaled identity on that subspace, so any orthonormal
/// basis gives the same H.
pub fn gain_matrix(om: &OmegaMatrix, gains: &ObserverGains) -> Matrix3<f64> {
    let svd = om.m.svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let mut h = gains.d2_value * Matrix3::identity();
    let scale = om.m.norm();
    for i in 0..2 {
        let sigma = svd.singular_values[i];
        if sigma <= 1e-12 * (1.0 + scale) {
            log::warn!("excitation loss: singular value {i} of omega is {sigma:.3e}");
        }
        let c = 2.0 * gains.alpha.sqrt() * sigma;
        let v = vt.row(i).transpose();
        h += (c - gains.d2_value) * (v * v.transpose());
    }
    h
}

/// Right-hand side of the estimator. Ω and f_u use the measured h; the
/// innovation is h − ĥ.
pub fn observer_derivative(
    obs: &ObserverState,
    h_meas: &Vector3<f64>,
    vel: &CameraVelocity,
    gains: &ObserverGains,
) -> Result<(Vector3<f64>, Vector2<f64>), Error> {
    let om = omega_matrix(h_meas, &vel.nu, obs.axis)?;
    let h_gain = gain_matrix(&om, gains);
    Ok(derivative_with(obs, h_meas, vel, gains, &om, &h_gain))
}

fn derivative_with(
    obs: &ObserverState,
    h_meas: &Vector3<f64>,
    vel: &CameraVelocity,
    gains: &ObserverGains,
    om: &OmegaMatrix,
    h_gain: &Matrix3<f64>,
) -> (Vector3<f64>, Vector2<f64>) {
    let innovation = h_meas - obs.h_hat;
    let h_hat_dot =
        vel.omega.cross(h_meas) + om.m.transpose() * obs.chi_hat + h_gain * innovation;
    // f_u evaluated at the estimate: reconstruct the eliminated component of
    // χ̂ from the measured h, then project the full dynamics back.
    let chi_full = reconstruct_chi(h_meas, &obs.chi_hat, obs.axis)
        .expect("denominator checked when omega was built");
    let chi_dot_full = chi_dynamics_full(&chi_full, h_meas, vel);
    let (i, j) = obs.axis.free_indices();
    let f_u = Vector2::new(chi_dot_full[i], chi_dot_full[j]);
    let chi_hat_dot = f_u + gains.alpha * (om.m * innovation);
    (h_hat_dot, chi_hat_dot)
}

/// One RK4 step with the measurement and velocity held constant (zero-order
/// hold); Ω and H are therefore constant within the step as well.
pub fn step(
    obs: &ObserverState,
    h_meas: &Vector3<f64>,
    vel: &CameraVelocity,
    gains: &ObserverGains,
    dt: f64,
) -> Result<ObserverState, Error> {
    let om = omega_matrix(h_meas, &vel.nu, obs.axis)?;
    let h_gain = gain_matrix(&om, gains);
    let mut x = SVector::<f64, 5>::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&obs.h_hat);
    x.fixed_rows_mut::<2>(3).copy_from(&obs.chi_hat);
    let next = crate::dynamics::rk4_step(&x, dt, |s| {
        let state = ObserverState {
            h_hat: s.fixed_rows::<3>(0).into_owned(),
            chi_hat: s.fixed_rows::<2>(3).into_owned(),
            axis: obs.axis,
        };
        let (hd, cd) = derivative_with(&state, h_meas, vel, gains, &om, &h_gain);
        let mut out = SVector::<f64, 5>::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&hd);
        out.fixed_rows_mut::<2>(3).copy_from(&cd);
        out
    });
    Ok(ObserverState {
        h_hat: next.fixed_rows::<3>(0).into_owned(),
        chi_hat: next.fixed_rows::<2>(3).into_owned(),
        axis: obs.axis,
    })
}
