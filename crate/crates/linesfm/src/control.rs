//! Eigenvalue analytics of ΩΩᵀ and the active camera-velocity law.
//!
//! The estimation error converges at a rate set by the smallest eigenvalue
//! of ΩΩᵀ, which depends on the measured h and the linear velocity. The
//! controller integrates
//!
//! ```text
//! ν̇ = k₁ J† (σ²_des − σ²) + k₂ (I₃ − J†J) ν
//! ```
//!
//! where J stacks the per-eigenvalue Jacobians ∂σᵢ²/∂ν. The null-space
//! projector uses I₃ (a 3-vector velocity requires the 3×3 projector). The
//! ṡ term of the eigenvalue dynamics is never inverted: it is suppressed by
//! the compensating angular velocity ω = (νᵀh)·χ̂, which holds the
//! interpretation plane fixed.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2, Vector2, Vector3};

use crate::error::Error;
use crate::geometry::Axis;
use crate::tolerances::{PINV_COND_MIN, PINV_DAMPING};

/// Control gains and the desired eigenvalues of ΩΩᵀ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlGains {
    pub k1: f64,
    pub k2: f64,
    pub sigma_des_sq: Vector2<f64>,
}

/// Eigen-decomposition of ΩΩᵀ plus the velocity Jacobian of its eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenAnalysis {
    /// Eigenvalues (σ₁², σ₂²) of ΩΩᵀ, ascending.
    pub sigma_sq: Vector2<f64>,
    /// Orthonormal eigenvectors, columns matching `sigma_sq`. Unset for
    /// aggregated analyses, where eigenvectors are not meaningful.
    pub eigvecs: Option<[Vector2<f64>; 2]>,
    /// Rows J_i = ∂σᵢ²/∂ν.
    pub j_nu: Matrix2x3<f64>,
}

/// Eigen-decomposition of a symmetric 2×2 matrix, ascending eigenvalues.
///
/// The second eigenvector is the exact perpendicular of the first, so the
/// basis is orthonormal by construction. In the repeated-eigenvalue case any
/// orthonormal basis spans the eigenspace; `fallback` (the previous step's
/// basis) is kept when provided so the Jacobian stays continuous.
fn sym_eig2(
    w: &Matrix2<f64>,
    fallback: Option<&[Vector2<f64>; 2]>,
) -> (Vector2<f64>, [Vector2<f64>; 2]) {
    let (a, b, c) = (w[(0, 0)], w[(0, 1)], w[(1, 1)]);
    let mid = 0.5 * (a + c);
    let half_gap = 0.5 * (a - c);
    let r = (half_gap * half_gap + b * b).sqrt();
    let vals = Vector2::new(mid - r, mid + r);
    let scale = a.abs().max(c.abs()).max(b.abs());
    if r <= 1e-14 * (1.0 + scale) {
        let vecs = fallback
            .copied()
            .unwrap_or([Vector2::x(), Vector2::y()]);
        return (vals, vecs);
    }
    // Eigenvector of the smaller eigenvalue; pick the better-conditioned row.
    let lo = vals[0];
    let v1 = if (lo - a).abs() > (lo - c).abs() {
        Vector2::new(b, lo - a)
    } else {
        Vector2::new(lo - c, b)
    };
    let v1 = v1.normalize();
    let v2 = Vector2::new(-v1[1], v1[0]);
    (vals, [v1, v2])
}

/// Eigenvalues, eigenvectors and velocity Jacobian of ΩΩᵀ for one line.
///
/// ΩΩᵀ = (νᵀh)²·BBᵀ, so ∂(ΩΩᵀ)/∂ν_k = 2(νᵀh)·h_k·BBᵀ and the Jacobian rows
/// follow from the quadratic form J_i[k] = vᵢᵀ ∂(ΩΩᵀ)/∂ν_k vᵢ. Eigenvector
/// signs are aligned with `prev` to avoid sign flips between control steps.
pub fn eigen_analysis(
    h: &Vector3<f64>,
    nu: &Vector3<f64>,
    axis: Axis,
    prev: Option<&[Vector2<f64>; 2]>,
) -> Result<EigenAnalysis, Error> {
    let b = crate::dynamics::omega_basis(h, axis)?;
    let gram_b = b * b.transpose();
    let q = nu.dot(h);
    let w = (q * q) * gram_b;
    let (sigma_sq, mut vecs) = sym_eig2(&w, prev);
    if let Some(prev) = prev {
        for i in 0..2 {
            if vecs[i].dot(&prev[i]) < 0.0 {
                vecs[i] = -vecs[i];
            }
        }
    }
    let mut j_nu = Matrix2x3::zeros();
    for i in 0..2 {
        let quad = (vecs[i].transpose() * gram_b * vecs[i])[0];
        j_nu.set_row(i, &(2.0 * q * quad * h.transpose()));
    }
    Ok(EigenAnalysis {
        sigma_sq,
        eigvecs: Some(vecs),
        j_nu,
    })
}

/// Moore-Penrose pseudo-inverse of the 2×3 Jacobian, switching to a damped
/// inverse Jᵀ(JJᵀ + λI)⁻¹ near rank loss so commands stay bounded. "Near"
/// is a relative conditioning test: once σ_min < PINV_COND_MIN·σ_max the
/// exact inverse would turn the eigenvalue error along the weak direction
/// into commands of order 1/σ_min, which destabilizes the Euler-integrated
/// velocity loop long before exact rank deficiency is reached.
pub fn pseudo_inverse(j: &Matrix2x3<f64>) -> Matrix3x2<f64> {
    let svd = j.svd(true, true);
    let sv = svd.singular_values;
    let smax = sv[0].max(sv[1]);
    let smin = sv[0].min(sv[1]);
    if smin > PINV_COND_MIN * smax {
        let u = svd.u.expect("svd requested u");
        let vt = svd.v_t.expect("svd requested v_t");
        let sinv = Matrix2::from_diagonal(&Vector2::new(1.0 / sv[0], 1.0 / sv[1]));
        return vt.transpose() * sinv * u.transpose();
    }
    let lambda = PINV_DAMPING + (PINV_COND_MIN * smax).powi(2);
    log::debug!(
        "eigenvalue Jacobian ill-conditioned (singular values {:.3e}, {:.3e}); damped pseudo-inverse",
        sv[0],
        sv[1]
    );
    let w = j * j.transpose();
    let damped = (w + lambda * Matrix2::identity())
        .try_inverse()
        .expect("damped normal matrix is positive definite");
    j.transpose() * damped
}

/// One Euler step of the velocity law; returns the updated ν.
pub fn velocity_command(
    analysis: &EigenAnalysis,
    nu: &Vector3<f64>,
    gains: &ControlGains,
    dt: f64,
) -> Vector3<f64> {
    let j = &analysis.j_nu;
    let j_pinv = pseudo_inverse(j);
    let err = gains.sigma_des_sq - analysis.sigma_sq;
    let projector = Matrix3::identity() - j_pinv * j;
    nu + dt * (gains.k1 * (j_pinv * err) + gains.k2 * (projector * nu))
}

/// Angular velocity ω = (νᵀh)·χ̂ that zeroes ḣ when χ̂ is exact, keeping the
/// interpretation plane fixed.
pub fn compensating_angular_velocity(
    h: &Vector3<f64>,
    nu: &Vector3<f64>,
    chi_hat_full: &Vector3<f64>,
) -> Vector3<f64> {
    nu.dot(h) * chi_hat_full
}

/// Multi-line aggregation: mean of the per-line eigenvalue pairs and of the
/// per-line Jacobians. Eigenvectors are unset on the result.
pub fn aggregate_multiline(per_line: &[EigenAnalysis]) -> Result<EigenAnalysis, Error> {
    if per_line.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let n = per_line.len() as f64;
    let sigma_sq = per_line
        .iter()
        .fold(Vector2::zeros(), |acc, a| acc + a.sigma_sq)
        / n;
    let j_nu = per_line
        .iter()
        .fold(Matrix2x3::zeros(), |acc, a| acc + a.j_nu)
        / n;
    Ok(EigenAnalysis {
        sigma_sq,
        eigvecs: None,
        j_nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
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

    #[test]
    fn eigen_analysis_hand_example() {
        // h = z, nu = z, axis Z: omega gram is the identity and both
        // Jacobian rows are [0, 0, 2].
        let analysis = eigen_analysis(&Vector3::z(), &Vector3::z(), Axis::Z, None).unwrap();
        assert_relative_eq!(analysis.sigma_sq, Vector2::new(1.0, 1.0), epsilon = 1e-14);
        for i in 0..2 {
            assert_relative_eq!(
                analysis.j_nu.row(i).transpose(),
                Vector3::new(0.0, 0.0, 2.0),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn eigen_analysis_orthogonal_velocity() {
        let analysis = eigen_analysis(&Vector3::z(), &Vector3::x(), Axis::Z, None).unwrap();
        assert_eq!(analysis.sigma_sq, Vector2::zeros());
        assert_eq!(analysis.j_nu, Matrix2x3::zeros());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        let mut tested = 0;
        while tested < 1000 {
            let h = random_unit(&mut rng);
            let nu = rng.random_range(0.2..2.0) * random_unit(&mut rng);
            let axis = Axis::from_largest(&h);
            // Skip near-degenerate draws: eigenvalue crossings (|h_a| -> 1)
            // and vanishing excitation.
            if nu.dot(&h).abs() < 0.1 || 1.0 / h[axis.index()].powi(2) - 1.0 < 0.05 {
                continue;
            }
            tested += 1;
            let analysis = eigen_analysis(&h, &nu, axis, None).unwrap();
            let step = 1e-6;
            for k in 0..3 {
                let mut e = Vector3::zeros();
                e[k] = step;
                let plus = eigen_analysis(&h, &(nu + e), axis, None).unwrap().sigma_sq;
                let minus = eigen_analysis(&h, &(nu - e), axis, None).unwrap().sigma_sq;
                let fd = (plus - minus) / (2.0 * step);
                for i in 0..2 {
                    let scale = fd[i].abs().max(1e-6);
                    assert!(
                        (analysis.j_nu[(i, k)] - fd[i]).abs() / scale < 1e-5,
                        "J[{i},{k}] = {} vs fd {}",
                        analysis.j_nu[(i, k)],
                        fd[i]
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalues_quadratic_in_velocity_scale() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..500 {
            let h = random_unit(&mut rng);
            let nu = random_unit(&mut rng);
            let axis = Axis::from_largest(&h);
            let c: f64 = rng.random_range(0.1..5.0);
            let a1 = eigen_analysis(&h, &nu, axis, None).unwrap();
            let a2 = eigen_analysis(&h, &(c * nu), axis, None).unwrap();
            assert_relative_eq!(
                a2.sigma_sq,
                c * c * a1.sigma_sq,
                epsilon = 1e-10 * (1.0 + a2.sigma_sq.norm())
            );
        }
    }

    #[test]
    fn eigenvector_sign_continuity() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..200 {
            let h = random_unit(&mut rng);
            let nu = random_unit(&mut rng);
            let axis = Axis::from_largest(&h);
            let first = eigen_analysis(&h, &nu, axis, None).unwrap();
            let prev = first.eigvecs.unwrap();
            // Small perturbation of nu: eigenvectors must stay aligned.
            let nu2 = nu + Vector3::<f64>::from_fn(|_, _| rng.random_range(-1e-4..1e-4));
            let second = eigen_analysis(&h, &nu2, axis, Some(&prev)).unwrap();
            for i in 0..2 {
                assert!(second.eigvecs.unwrap()[i].dot(&prev[i]) > 0.9);
            }
        }
    }

    #[test]
    fn projector_identities_at_full_rank() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..500 {
            let j = Matrix2x3::<f64>::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let sv = j.svd(false, false).singular_values;
            if sv[1] < 0.15 * sv[0] {
                continue;
            }
            let j_pinv = pseudo_inverse(&j);
            let projector = Matrix3::identity() - j_pinv * j;
            // (I - J†J) Jᵀ = 0 and J (I - J†J) v = 0 for any v.
            assert!((projector * j.transpose()).norm() < 1e-10 * (1.0 + j.norm()));
            let v = random_unit(&mut rng);
            assert!((j * (projector * v)).norm() < 1e-10 * (1.0 + j.norm()));
        }
    }

    #[test]
    fn damped_pinv_bounded_at_rank_loss() {
        let j = Matrix2x3::zeros();
        let j_pinv = pseudo_inverse(&j);
        assert_eq!(j_pinv, Matrix3x2::zeros());
        // Rank-1 Jacobian (the single-line closed-loop case).
        let j = Matrix2x3::new(0.2, 0.0, 0.4, 0.1, 0.0, 0.2);
        let j_pinv = pseudo_inverse(&j);
        assert!(j_pinv.norm().is_finite());
        assert!(j_pinv.norm() < 1e4);
    }

    #[test]
    fn zero_error_command_is_pure_null_space_motion() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        for _ in 0..200 {
            let j = Matrix2x3::<f64>::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let sv = j.svd(false, false).singular_values;
            if sv[1] < 0.15 * sv[0] {
                continue;
            }
            let sigma_sq = Vector2::new(0.1, 0.2);
            let analysis = EigenAnalysis {
                sigma_sq,
                eigvecs: None,
                j_nu: j,
            };
            let gains = ControlGains {
                k1: 1.0,
                k2: 1.0,
                sigma_des_sq: sigma_sq,
            };
            let nu = random_unit(&mut rng);
            let dt = 1e-3;
            let nu_next = velocity_command(&analysis, &nu, &gains, dt);
            let nudot = (nu_next - nu) / dt;
            // The eigenvalue error is zero, so the commanded motion must not
            // change the eigenvalues to first order.
            assert!((j * nudot).norm() < 1e-9 * (1.0 + j.norm() * nudot.norm()));
        }
    }

    #[test]
    fn aggregate_single_is_identity() {
        let a = eigen_analysis(&Vector3::z(), &Vector3::z(), Axis::Z, None).unwrap();
        let agg = aggregate_multiline(std::slice::from_ref(&a)).unwrap();
        assert_eq!(agg.sigma_sq, a.sigma_sq);
        assert_eq!(agg.j_nu, a.j_nu);
        assert!(agg.eigvecs.is_none());
    }

    #[test]
    fn aggregate_identical_and_linear() {
        let a = eigen_analysis(
            &Vector3::new(0.1, 0.2, 0.9).normalize(),
            &Vector3::new(0.3, 0.1, 0.8),
            Axis::Z,
            None,
        )
        .unwrap();
        let agg = aggregate_multiline(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert_relative_eq!(agg.sigma_sq, a.sigma_sq, epsilon = 1e-14);
        assert_relative_eq!(agg.j_nu, a.j_nu, epsilon = 1e-14);

        // Linearity: aggregating scaled analyses scales the output.
        let mut b = a.clone();
        b.sigma_sq *= 3.0;
        b.j_nu *= 3.0;
        let agg2 = aggregate_multiline(&[a.clone(), b]).unwrap();
        assert_relative_eq!(agg2.sigma_sq, 2.0 * a.sigma_sq, epsilon = 1e-14);
        assert_relative_eq!(agg2.j_nu, 2.0 * a.j_nu, epsilon = 1e-14);
    }

    #[test]
    fn aggregate_empty_rejected() {
        assert!(matches!(
            aggregate_multiline(&[]),
            Err(Error::EmptyAggregate)
        ));
    }

    #[test]
    fn jacobian_vanishes_with_orthogonal_velocity() {
        let mut rng = ChaCha12Rng::seed_from_u64(45);
        for _ in 0..200 {
            let h = random_unit(&mut rng);
            let r = random_unit(&mut rng);
            let nu = h.cross(&r);
            if nu.norm() < 1e-3 {
                continue;
            }
            let axis = Axis::from_largest(&h);
            let analysis = eigen_analysis(&h, &nu, axis, None).unwrap();
            assert!(analysis.j_nu.norm() < 1e-12 * (1.0 + nu.norm()));
        }
    }

    #[test]
    fn compensation_zero_when_orthogonal() {
        let h = Vector3::z();
        let nu = Vector3::x();
        let chi = Vector3::new(0.5, 0.2, 0.0);
        assert_eq!(compensating_angular_velocity(&h, &nu, &chi), Vector3::zeros());
    }
}
