//! Plücker-line representations and the change of variables χ = d/l.
//!
//! A 3D line is represented three ways, from most projective to most
//! explicit:
//!
//! - [`HomogeneousLine`]: (u, m) up to scale, with uᵀm = 0;
//! - [`PluckerLine`]: binormalized coordinates (d, l, h) with unit direction
//!   d, depth l > 0 and unit interpretation-plane normal h;
//! - [`ReducedState`]: the measurable h plus the two free components of
//!   χ = d/l that remain after eliminating one coordinate through the
//!   orthogonality constraint χᵀh = 0.
//!
//! Only h is measurable in the image; direction and depth are retrieved from
//! the estimated χ.

use std::fmt;

use nalgebra::{Vector2, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tolerances::{CHI_NORM_MIN, CONSTRUCTION_TOL, DEPTH_MIN, ELIMINATION_DENOM_MIN};

/// The coordinate of χ eliminated through χᵀh = 0.
///
/// Chosen once per run as the coordinate where |h| is largest; the controller
/// keeps the interpretation plane fixed, so no switching is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Index of the eliminated coordinate.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Indices of the two retained components of χ, in ascending order.
    pub fn free_indices(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }

    /// Axis carrying the largest absolute component of `h`.
    pub fn from_largest(h: &Vector3<f64>) -> Axis {
        let mut best = Axis::X;
        let mut max = h[0].abs();
        for axis in [Axis::Y, Axis::Z] {
            let v = h[axis.index()].abs();
            if v > max {
                max = v;
                best = axis;
            }
        }
        best
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}

/// Moment vector of the line through point `p` with unit direction `d`.
///
/// n = p × d; its norm is the orthogonal distance of the line to the origin,
/// independent of which point on the line is chosen.
pub fn moment_from_point(p: &Vector3<f64>, d: &Vector3<f64>) -> Vector3<f64> {
    p.cross(d)
}

/// Homogeneous Plücker coordinates (u, m), defined up to a common positive
/// scale and constrained to the Klein quadric uᵀm = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousLine {
    pub u: Vector3<f64>,
    pub m: Vector3<f64>,
}

impl HomogeneousLine {
    pub fn new(u: Vector3<f64>, m: Vector3<f64>) -> Result<Self, Error> {
        let un = u.norm();
        if un == 0.0 {
            return Err(Error::InvalidDirection);
        }
        let mn = m.norm();
        if mn > 0.0 && u.dot(&m).abs() > CONSTRUCTION_TOL * un * mn {
            return Err(Error::InvalidLine(format!(
                "Klein constraint violated: u.m = {:.3e}",
                u.dot(&m) / (un * mn)
            )));
        }
        Ok(Self { u, m })
    }

    /// Line through `p` with (not necessarily unit) direction `u`.
    pub fn from_point_direction(p: &Vector3<f64>, u: &Vector3<f64>) -> Result<Self, Error> {
        if u.norm() == 0.0 {
            return Err(Error::InvalidDirection);
        }
        Ok(Self {
            u: *u,
            m: p.cross(u),
        })
    }
}

/// Binormalized Plücker coordinates (d, l, h): unit direction, depth, and
/// unit moment direction. Explicit: one coordinate set per line.
///
/// Invariants enforced at construction: ‖d‖ = ‖h‖ = 1 and dᵀh = 0 (within
/// [`CONSTRUCTION_TOL`]), l > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerLine {
    d: Vector3<f64>,
    l: f64,
    h: Vector3<f64>,
}

impl PluckerLine {
    pub fn new(d: Vector3<f64>, l: f64, h: Vector3<f64>) -> Result<Self, Error> {
        if (d.norm() - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidLine(format!(
                "direction not unit: ||d|| = {}",
                d.norm()
            )));
        }
        if (h.norm() - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidLine(format!(
                "moment direction not unit: ||h|| = {}",
                h.norm()
            )));
        }
        if d.dot(&h).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidLine(format!(
                "d and h not orthogonal: d.h = {:.3e}",
                d.dot(&h)
            )));
        }
        if !(l > 0.0) {
            return Err(Error::InvalidLine(format!("depth not positive: l = {l}")));
        }
        Ok(Self { d, l, h })
    }

    /// Line through point `p` (meters) with direction `dir` (any scale).
    pub fn from_point_direction(p: &Vector3<f64>, dir: &Vector3<f64>) -> Result<Self, Error> {
        binormalize(&HomogeneousLine::from_point_direction(p, dir)?)
    }

    pub fn d(&self) -> &Vector3<f64> {
        &self.d
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn h(&self) -> &Vector3<f64> {
        &self.h
    }

    /// Moment vector n = l·h.
    pub fn moment(&self) -> Vector3<f64> {
        self.l * self.h
    }

    /// The six-vector [d, l·h] used for the total-error metric.
    pub fn plucker_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.d);
        v.fixed_rows_mut::<3>(3).copy_from(&(self.l * self.h));
        v
    }

    /// The transformed unknowns χ = d/l.
    pub fn chi(&self) -> Vector3<f64> {
        self.d / self.l
    }
}

/// Normalize homogeneous coordinates into binormalized ones.
///
/// Invariant to positive scaling of (u, m). Fails for lines through the
/// optical center, where the moment vanishes.
pub fn binormalize(line: &HomogeneousLine) -> Result<PluckerLine, Error> {
    let un = line.u.norm();
    if un == 0.0 {
        return Err(Error::InvalidDirection);
    }
    let mn = line.m.norm();
    let l = mn / un;
    if l < DEPTH_MIN {
        return Err(Error::DegenerateLine);
    }
    PluckerLine::new(line.u / un, l, line.m / mn)
}

/// The image measurement: unit normal of the interpretation plane.
pub fn project(line: &PluckerLine) -> Vector3<f64> {
    line.h
}

/// Measurable h plus the two free unknowns of χ after elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub h: Vector3<f64>,
    /// Non-eliminated components of χ, ordered by ascending coordinate index.
    pub chi_free: Vector2<f64>,
    pub axis: Axis,
}

/// Drop the coordinate of χ matching the largest |h| component.
pub fn reduce(line: &PluckerLine) -> ReducedState {
    // |h[axis]| >= 1/sqrt(3) for the argmax of a unit vector, so this
    // cannot hit the elimination singularity.
    reduce_with_axis(line, Axis::from_largest(&line.h)).expect("argmax component of unit h")
}

/// As [`reduce`], with an explicit elimination axis.
pub fn reduce_with_axis(line: &PluckerLine, axis: Axis) -> Result<ReducedState, Error> {
    let ha = line.h[axis.index()].abs();
    if ha < ELIMINATION_DENOM_MIN {
        return Err(Error::EliminationSingularity {
            axis,
            value: ha,
        });
    }
    let chi = line.chi();
    let (i, j) = axis.free_indices();
    Ok(ReducedState {
        h: line.h,
        chi_free: Vector2::new(chi[i], chi[j]),
        axis,
    })
}

/// Rebuild the full χ from its free components via χᵀh = 0:
/// χ[axis] = −(Σ_{j≠axis} χ_j h_j) / h[axis].
pub fn reconstruct_chi(
    h: &Vector3<f64>,
    chi_free: &Vector2<f64>,
    axis: Axis,
) -> Result<Vector3<f64>, Error> {
    let a = axis.index();
    let ha = h[a];
    if ha.abs() < ELIMINATION_DENOM_MIN {
        return Err(Error::EliminationSingularity {
            axis,
            value: ha.abs(),
        });
    }
    let (i, j) = axis.free_indices();
    let mut chi = Vector3::zeros();
    chi[i] = chi_free[0];
    chi[j] = chi_free[1];
    chi[a] = -(chi_free[0] * h[i] + chi_free[1] * h[j]) / ha;
    Ok(chi)
}

/// Invert [`reduce`]: reconstruct χ, then l = 1/‖χ‖ and d = χ·l.
///
/// The output satisfies dᵀh = 0 by construction of the eliminated component,
/// not by tolerance clipping.
pub fn recover(state: &ReducedState) -> Result<PluckerLine, Error> {
    let chi = reconstruct_chi(&state.h, &state.chi_free, state.axis)?;
    let n = chi.norm();
    if n < CHI_NORM_MIN {
        return Err(Error::DepthOverflow { chi_norm: n });
    }
    PluckerLine::new(chi / n, 1.0 / n, state.h)
}
