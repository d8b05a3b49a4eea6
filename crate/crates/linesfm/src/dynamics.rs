//! Line-state dynamics under camera motion and the interaction matrix Ω.
//!
//! The binormalized coordinates evolve as
//!
//! ```text
//! ḋ = ω × d
//! ḣ = ω × h − (νᵀh / l) (d × h)
//! l̇ = νᵀ (d × h)
//! ```
//!
//! and the transformed unknowns χ = d/l as χ̇ = ω×χ − χ·νᵀ(χ×h). After
//! eliminating one coordinate of χ through χᵀh = 0, the measurable dynamics
//! become linear in the remaining unknowns: ḣ = ω×h + Ωᵀ χ_free with the
//! 2×3 matrix Ω = (νᵀh)·B(h). Ω entries carry units of 1/s per 1/m of χ.

use nalgebra::{Matrix2x3, Matrix3, Matrix3x2, SVector, Vector2, Vector3};

use crate::error::Error;
use crate::geometry::{reconstruct_chi, Axis, PluckerLine, ReducedState};
use crate::tolerances::ELIMINATION_DENOM_MIN;

/// Camera twist: linear velocity ν (m/s) and angular velocity ω (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraVelocity {
    pub nu: Vector3<f64>,
    pub omega: Vector3<f64>,
}

impl CameraVelocity {
    pub fn new(nu: Vector3<f64>, omega: Vector3<f64>) -> Self {
        Self { nu, omega }
    }

    pub fn zero() -> Self {
        Self {
            nu: Vector3::zeros(),
            omega: Vector3::zeros(),
        }
    }
}

/// Time derivatives of the binormalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRates {
    pub d_dot: Vector3<f64>,
    pub h_dot: Vector3<f64>,
    pub l_dot: f64,
}

/// Skew-symmetric matrix of `v`, so that `skew(v) * w = v × w`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v[2], v[1], //
        v[2], 0.0, -v[0], //
        -v[1], v[0], 0.0,
    )
}

/// Dynamics of (d, h, l) on raw components; used by the integrator, which
/// must observe norm drift rather than have it hidden by renormalization.
pub fn full_dynamics_raw(
    d: &Vector3<f64>,
    h: &Vector3<f64>,
    l: f64,
    vel: &CameraVelocity,
) -> LineRates {
    let dxh = d.cross(h);
    LineRates {
        d_dot: vel.omega.cross(d),
        h_dot: vel.omega.cross(h) - (vel.nu.dot(h) / l) * dxh,
        l_dot: vel.nu.dot(&dxh),
    }
}

/// Dynamics of the true binormalized coordinates.
pub fn full_dynamics(line: &PluckerLine, vel: &CameraVelocity) -> LineRates {
    full_dynamics_raw(line.d(), line.h(), line.l(), vel)
}

/// Dynamics of the full (unreduced) unknown vector: χ̇ = ω×χ − χ·νᵀ(χ×h).
pub fn chi_dynamics_full(
    chi: &Vector3<f64>,
    h: &Vector3<f64>,
    vel: &CameraVelocity,
) -> Vector3<f64> {
    vel.omega.cross(chi) - chi * vel.nu.dot(&chi.cross(h))
}

/// The 3×3 interaction matrix of the unreduced formulation,
/// −(νᵀh)[h]ₓ. Rank ≤ 2 always, which is why the reduction is needed.
pub fn omega_full(h: &Vector3<f64>, nu: &Vector3<f64>) -> Matrix3<f64> {
    -nu.dot(h) * skew(h)
}

/// Map from the free components of χ to the full vector: χ = M(h)·χ_free.
///
/// Column k is e_i − (h_i / h_a)·e_a for free coordinate i and eliminated
/// coordinate a; both columns lie in the plane orthogonal to h.
pub fn elimination_map(h: &Vector3<f64>, axis: Axis) -> Result<Matrix3x2<f64>, Error> {
    let a = axis.index();
    if h[a].abs() < ELIMINATION_DENOM_MIN {
        return Err(Error::EliminationSingularity {
            axis,
            value: h[a].abs(),
        });
    }
    let (i, j) = axis.free_indices();
    let mut m = Matrix3x2::zeros();
    m[(i, 0)] = 1.0;
    m[(j, 1)] = 1.0;
    m[(a, 0)] = -h[i] / h[a];
    m[(a, 1)] = -h[j] / h[a];
    Ok(m)
}

/// Velocity-independent factor B of Ω = (νᵀh)·B, i.e. B = ([h]ₓ M)ᵀ.
///
/// For axis Z this reproduces the closed-form rows
/// [−hₓh_y/h_z, h_z + hₓ²/h_z, −h_y] and [−h_z − h_y²/h_z, hₓh_y/h_z, hₓ].
pub fn omega_basis(h: &Vector3<f64>, axis: Axis) -> Result<Matrix2x3<f64>, Error> {
    let m = elimination_map(h, axis)?;
    Ok((skew(h) * m).transpose())
}

/// The 2×3 interaction matrix coupling χ_free to the measurable dynamics.
///
/// ΩΩᵀ is full rank exactly when ν and h are not orthogonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaMatrix {
    pub m: Matrix2x3<f64>,
}

pub fn omega_matrix(
    h: &Vector3<f64>,
    nu: &Vector3<f64>,
    axis: Axis,
) -> Result<OmegaMatrix, Error> {
    Ok(OmegaMatrix {
        m: nu.dot(h) * omega_basis(h, axis)?,
    })
}

/// Reduced-state dynamics: ḣ = ω×h + Ωᵀχ_free, and χ̇_free as the free
/// components of the full χ dynamics with the eliminated coordinate
/// reconstructed from the constraint.
pub fn reduced_dynamics(
    state: &ReducedState,
    vel: &CameraVelocity,
) -> Result<(Vector3<f64>, Vector2<f64>), Error> {
    let om = omega_matrix(&state.h, &vel.nu, state.axis)?;
    let h_dot = vel.omega.cross(&state.h) + om.m.transpose() * state.chi_free;
    let chi = reconstruct_chi(&state.h, &state.chi_free, state.axis)?;
    let chi_dot = chi_dynamics_full(&chi, &state.h, vel);
    let (i, j) = state.axis.free_indices();
    Ok((h_dot, Vector2::new(chi_dot[i], chi_dot[j])))
}

/// One classical Runge-Kutta step of `f` with step `dt`.
pub fn rk4_step<const N: usize>(
    x: &SVector<f64, N>,
    dt: f64,
    f: impl Fn(&SVector<f64, N>) -> SVector<f64, N>,
) -> SVector<f64, N> {
    let k1 = f(x);
    let k2 = f(&(x + 0.5 * dt * k1));
    let k3 = f(&(x + 0.5 * dt * k2));
    let k4 = f(&(x + dt * k3));
    x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_unit(rng: &mut ChaCha12Rng) -> Vector3<f64> {
        use rand_distr::{Distribution, StandardNormal};
        loop {
            let v = Vector3::from_fn(|_, _| {
                let g: f64 = StandardNormal.sample(rng);
                g
            });
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    fn random_line(rng: &mut ChaCha12Rng) -> PluckerLine {
        loop {
            let p = Vector3::new(
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(1.0..4.0),
            );
            let d = random_unit(rng);
            if let Ok(line) = PluckerLine::from_point_direction(&p, &d) {
                if line.l() > 0.2 {
                    return line;
                }
            }
        }
    }

    fn random_vel(rng: &mut ChaCha12Rng) -> CameraVelocity {
        CameraVelocity::new(
            rng.random_range(-1.0..1.0) * random_unit(rng),
            rng.random_range(-1.0..1.0) * random_unit(rng),
        )
    }

    #[test]
    fn stationary_camera_gives_zero_rates() {
        let line = PluckerLine::new(Vector3::x(), 1.0, Vector3::z()).unwrap();
        let r = full_dynamics(&line, &CameraVelocity::zero());
        assert_eq!(r.d_dot, Vector3::zeros());
        assert_eq!(r.h_dot, Vector3::zeros());
        assert_eq!(r.l_dot, 0.0);
    }

    #[test]
    fn h_dot_matches_cross_product_oracle() {
        // d = x, h = z, l = 1, nu = z, omega = 0:
        // h_dot = -(nu.h / l) (d × h) with d × h = [1,0,0]×[0,0,1] = [0,-1,0].
        let line = PluckerLine::new(Vector3::x(), 1.0, Vector3::z()).unwrap();
        let vel = CameraVelocity::new(Vector3::z(), Vector3::zeros());
        let r = full_dynamics(&line, &vel);
        let dxh = Vector3::x().cross(&Vector3::z());
        assert_eq!(dxh, Vector3::new(0.0, -1.0, 0.0));
        assert_eq!(r.h_dot, -dxh);
        assert_eq!(r.l_dot, vel.nu.dot(&dxh));
    }

    #[test]
    fn constraint_derivatives_vanish() {
        // d/dt(d.h), d/dt(||d||^2), d/dt(||h||^2) are identically zero
        // along the analytic dynamics.
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let line = random_line(&mut rng);
            let vel = random_vel(&mut rng);
            let r = full_dynamics(&line, &vel);
            let ddt_dh = r.d_dot.dot(line.h()) + line.d().dot(&r.h_dot);
            assert!(ddt_dh.abs() < 1e-13, "d/dt(d.h) = {ddt_dh:e}");
            assert!(line.d().dot(&r.d_dot).abs() < 1e-13);
            assert!(line.h().dot(&r.h_dot).abs() < 1e-13);
        }
    }

    #[test]
    fn chi_dynamics_pure_rotation_and_fixed_point() {
        let chi = Vector3::new(0.3, -0.2, 0.5);
        let h = chi.cross(&Vector3::x()).normalize();
        let vel = CameraVelocity::new(Vector3::zeros(), Vector3::new(0.1, 0.2, -0.3));
        assert_eq!(chi_dynamics_full(&chi, &h, &vel), vel.omega.cross(&chi));
        // chi = 0 is a fixed point for any velocity.
        let vel = CameraVelocity::new(Vector3::new(1.0, 2.0, 3.0), Vector3::new(-1.0, 0.5, 0.2));
        assert_eq!(
            chi_dynamics_full(&Vector3::zeros(), &Vector3::z(), &vel),
            Vector3::zeros()
        );
    }

    #[test]
    fn chi_dynamics_matches_quotient_rule() {
        // chi_dot from the closed form must equal d/dt(d/l) computed through
        // the quotient rule from the (d, l) dynamics.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let line = random_line(&mut rng);
            let vel = random_vel(&mut rng);
            let r = full_dynamics(&line, &vel);
            let quotient = r.d_dot / line.l() - line.d() * (r.l_dot / (line.l() * line.l()));
            let closed = chi_dynamics_full(&line.chi(), line.h(), &vel);
            assert_relative_eq!(closed, quotient, epsilon = 1e-12);
        }
    }

    #[test]
    fn omega_basis_matches_printed_z_form() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let h = random_unit(&mut rng);
            if h[2].abs() < 0.05 {
                continue;
            }
            let b = omega_basis(&h, Axis::Z).unwrap();
            let (hx, hy, hz) = (h[0], h[1], h[2]);
            let expected = Matrix2x3::new(
                -hx * hy / hz,
                hz + hx * hx / hz,
                -hy,
                -hz - hy * hy / hz,
                hx * hy / hz,
                hx,
            );
            assert_relative_eq!(b, expected, epsilon = 1e-12 * (1.0 + 1.0 / (hz * hz)));
        }
    }

    #[test]
    fn omega_matrix_examples() {
        let om = omega_matrix(&Vector3::z(), &Vector3::z(), Axis::Z).unwrap();
        let expected = Matrix2x3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        assert_eq!(om.m, expected);

        // nu orthogonal to h: zero excitation.
        let om = omega_matrix(&Vector3::z(), &Vector3::x(), Axis::Z).unwrap();
        assert_eq!(om.m, Matrix2x3::zeros());
    }

    #[test]
    fn omega_gram_scales_with_nu_h() {
        // Eigenvalues of ΩΩᵀ equal (νᵀh)² times those of BBᵀ.
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let h = random_unit(&mut rng);
            let nu = rng.random_range(-2.0..2.0) * random_unit(&mut rng);
            let axis = Axis::from_largest(&h);
            let b = omega_basis(&h, axis).unwrap();
            let om = omega_matrix(&h, &nu, axis).unwrap();
            let q = nu.dot(&h);
            let ev_b = (b * b.transpose()).symmetric_eigenvalues();
            let ev_o = (om.m * om.m.transpose()).symmetric_eigenvalues();
            let mut eb: Vec<f64> = ev_b.iter().map(|v| v * q * q).collect();
            let mut eo: Vec<f64> = ev_o.iter().copied().collect();
            eb.sort_by(f64::total_cmp);
            eo.sort_by(f64::total_cmp);
            for (a, b) in eb.iter().zip(&eo) {
                assert_relative_eq!(a, b, epsilon = 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn omega_gram_rank_law() {
        // BBᵀ has eigenvalues bounded below by 1, so rank(ΩΩᵀ) = 2 iff νᵀh ≠ 0.
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let h = random_unit(&mut rng);
            let axis = Axis::from_largest(&h);
            let nu = rng.random_range(0.1..2.0) * random_unit(&mut rng);
            let q = nu.dot(&h);
            let om = omega_matrix(&h, &nu, axis).unwrap();
            let ev = (om.m * om.m.transpose()).symmetric_eigenvalues();
            let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= q * q * (1.0 - 1e-10), "sigma1^2 = {min} < q^2 = {}", q * q);
            // Constructed orthogonal pair: excitation collapses.
            let nu_perp = nu - q * h;
            let om0 = omega_matrix(&h, &nu_perp, axis).unwrap();
            assert!(om0.m.norm() < 1e-12 * (1.0 + nu.norm()));
        }
    }

    #[test]
    fn omega_full_rank_at_most_two() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        for _ in 0..1000 {
            let h = random_unit(&mut rng);
            let nu = rng.random_range(-2.0..2.0) * random_unit(&mut rng);
            let om = omega_full(&h, &nu);
            let sv = om.svd(false, false).singular_values;
            let max = sv.iter().cloned().fold(0.0, f64::max);
            let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min <= 1e-12 * (1.0 + max), "third singular value {min}");
        }
    }

    #[test]
    fn reduced_dynamics_zero_velocity() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        let line = random_line(&mut rng);
        let red = crate::geometry::reduce(&line);
        let (h_dot, chi_dot) = reduced_dynamics(&red, &CameraVelocity::zero()).unwrap();
        assert_eq!(h_dot, Vector3::zeros());
        assert_eq!(chi_dot, Vector2::zeros());
    }

    #[test]
    fn reduced_dynamics_consistent_with_full() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let line = random_line(&mut rng);
            let vel = random_vel(&mut rng);
            let red = crate::geometry::reduce(&line);
            let (h_dot, chi_dot_free) = reduced_dynamics(&red, &vel).unwrap();
            let full = full_dynamics(&line, &vel);
            assert_relative_eq!(h_dot, full.h_dot, epsilon = 1e-11 * (1.0 + full.h_dot.norm()));
            let chi_dot_full = chi_dynamics_full(&line.chi(), line.h(), &vel);
            let (i, j) = red.axis.free_indices();
            assert_relative_eq!(chi_dot_free[0], chi_dot_full[i], epsilon = 1e-11);
            assert_relative_eq!(chi_dot_free[1], chi_dot_full[j], epsilon = 1e-11);
        }
    }

    #[test]
    fn h_dot_linear_in_chi_free() {
        let mut rng = ChaCha12Rng::seed_from_u64(18);
        for _ in 0..200 {
            let line = random_line(&mut rng);
            let vel = random_vel(&mut rng);
            let mut red = crate::geometry::reduce(&line);
            let om = omega_matrix(&red.h, &vel.nu, red.axis).unwrap();
            let (h0, _) = reduced_dynamics(
                &ReducedState {
                    chi_free: Vector2::zeros(),
                    ..red.clone()
                },
                &vel,
            )
            .unwrap();
            let chi_free = Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            red.chi_free = chi_free;
            let (h1, _) = reduced_dynamics(&red, &vel).unwrap();
            assert_relative_eq!(h1 - h0, om.m.transpose() * chi_free, epsilon = 1e-12);
        }
    }

    #[test]
    fn compensating_rotation_freezes_h() {
        // With omega = (nu.h) * chi the measurable dynamics cancel.
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let line = random_line(&mut rng);
            let nu = rng.random_range(-1.0..1.0) * random_unit(&mut rng);
            let omega = nu.dot(line.h()) * line.chi();
            let r = full_dynamics(&line, &CameraVelocity::new(nu, omega));
            assert!(r.h_dot.norm() < 1e-14 * (1.0 + nu.norm()), "{:e}", r.h_dot.norm());
        }
    }

    #[test]
    fn rk4_conserves_constraints_over_one_step() {
        let mut rng = ChaCha12Rng::seed_from_u64(20);
        for _ in 0..200 {
            let line = random_line(&mut rng);
            let vel = random_vel(&mut rng);
            let mut x = SVector::<f64, 7>::zeros();
            x.fixed_rows_mut::<3>(0).copy_from(line.d());
            x.fixed_rows_mut::<3>(3).copy_from(line.h());
            x[6] = line.l();
            let next = rk4_step(&x, 1e-3, |s| {
                let d = s.fixed_rows::<3>(0).into_owned();
                let h = s.fixed_rows::<3>(3).into_owned();
                let r = full_dynamics_raw(&d, &h, s[6], &vel);
                let mut out = SVector::<f64, 7>::zeros();
                out.fixed_rows_mut::<3>(0).copy_from(&r.d_dot);
                out.fixed_rows_mut::<3>(3).copy_from(&r.h_dot);
                out[6] = r.l_dot;
                out
            });
            let d = next.fixed_rows::<3>(0).into_owned();
            let h = next.fixed_rows::<3>(3).into_owned();
            assert!((d.norm() - 1.0).abs() < 1e-10);
            assert!((h.norm() - 1.0).abs() < 1e-10);
            assert!(d.dot(&h).abs() < 1e-10);
        }
    }
}
