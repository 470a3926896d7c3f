//! Averaged two-slit current, trajectory velocity, and flux-line integration.
//!
//! Each channel `i` contributes a convective field `v_i` (drift plus the
//! dispersive term of a spreading packet) and an outward osmotic field `u_i`.
//! The total current mixes them through the relative phase:
//!
//! `J = P1 v1 + P2 v2 + sqrt(P1 P2) (v1 + v2) cos(phi) + sqrt(P1 P2) (u2 - u1) sin(phi)`
//!
//! Written with the inward branches `u_i- = -u_i` the last term reads
//! `sqrt(P1 P2) (u1- - u2-) sin(phi)`.

mod trajectories;

pub use trajectories::{
    flux_between, integrate_trajectories, seed_positions, SeedSpacing, TrajectoryOptions,
    TrajectorySet,
};

use crate::dispersion::sigma_t;
use crate::error::{Error, Result};
use crate::interference::{relative_phase, slit_densities};
use crate::params::{Slit, SlitConfig};

/// Per-channel convective and osmotic velocities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityDecomposition {
    pub v1: f64,
    pub v2: f64,
    /// Outward osmotic velocity of channel one, `u1+`.
    pub u1: f64,
    pub u2: f64,
}

impl VelocityDecomposition {
    pub fn u1_minus(&self) -> f64 {
        -self.u1
    }

    pub fn u2_minus(&self) -> f64 {
        -self.u2
    }

    /// Channel totals `v_i + u_i+/2 + u_i-/2`; the osmotic pair cancels.
    pub fn channel_totals(&self) -> (f64, f64) {
        (
            self.v1 + 0.5 * self.u1 + 0.5 * self.u1_minus(),
            self.v2 + 0.5 * self.u2 + 0.5 * self.u2_minus(),
        )
    }
}

pub fn velocity_decomposition(cfg: &SlitConfig, x: f64, t: f64) -> VelocityDecomposition {
    let one = cfg.packet(Slit::One);
    let two = cfg.packet(Slit::Two);
    VelocityDecomposition {
        v1: one.velocity_field(x, t),
        v2: two.velocity_field(x, t),
        u1: one.osmotic_velocity(x, t),
        u2: two.osmotic_velocity(x, t),
    }
}

struct Terms {
    p1: f64,
    p2: f64,
    /// `r sqrt(P1 P2)`
    cross: f64,
    cos: f64,
    sin: f64,
    vel: VelocityDecomposition,
}

fn terms(cfg: &SlitConfig, x: f64, t: f64) -> Terms {
    let (p1, p2) = slit_densities(cfg, x, t);
    let r = cfg.amplitude_ratio();
    let (sin, cos) = relative_phase(cfg, x, t).sin_cos();
    Terms {
        p1,
        p2: r * r * p2,
        cross: r * (p1 * p2).sqrt(),
        cos,
        sin,
        vel: velocity_decomposition(cfg, x, t),
    }
}

/// Averaged total current in closed form.
pub fn total_current(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let Terms {
        p1,
        p2,
        cross,
        cos,
        sin,
        vel,
    } = terms(cfg, x, t);
    p1 * vel.v1
        + p2 * vel.v2
        + cross * (vel.v1 + vel.v2) * cos
        + cross * (vel.u1_minus() - vel.u2_minus()) * sin
}

/// Averaged total current from the nine pairwise unit-vector terms.
///
/// Angles between the unit vectors of the two channels: `(v1, v2)` and
/// `(u1, u2)` enclose `phi`; within a channel the osmotic direction is
/// rotated by `-pi/2` against the convective one, so `(v1, u2)` encloses
/// `phi - pi/2` and `(u1, v2)` encloses `phi + pi/2`.
pub fn total_current_expanded(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let Terms {
        p1,
        p2,
        cross,
        cos,
        sin,
        vel,
    } = terms(cfg, x, t);
    let VelocityDecomposition { v1, v2, u1, u2 } = vel;
    let cos_v1v2 = cos;
    let cos_u1u2 = cos;
    let cos_v1u2 = sin;
    let cos_u1v2 = -sin;

    let mixed = (v1 + v2) * cos_v1v2
        + (v1 + u2 / 2.0) * cos_v1u2
        - (v1 - u2 / 2.0) * cos_v1u2
        + (u1 / 2.0 + v2) * cos_u1v2
        - (-u1 / 2.0 + v2) * cos_u1v2
        + (u1 / 2.0 + u2 / 2.0) * cos_u1u2
        - (u1 / 2.0 - u2 / 2.0) * cos_u1u2
        - (-u1 / 2.0 + u2 / 2.0) * cos_u1u2
        + (-u1 / 2.0 - u2 / 2.0) * cos_u1u2;
    p1 * v1 + p2 * v2 + cross * mixed
}

/// Upper bound `(1 + r)^2 / (sqrt(2 pi) sigma(t))` on the total intensity.
pub fn intensity_bound(cfg: &SlitConfig, t: f64) -> f64 {
    let r = cfg.amplitude_ratio();
    (1.0 + r).powi(2) / ((2.0 * std::f64::consts::PI).sqrt() * sigma_t(&cfg.params, t))
}

/// Density floor below which the trajectory velocity is treated as singular.
pub fn node_floor(cfg: &SlitConfig, t: f64) -> f64 {
    1e-14 * intensity_bound(cfg, t)
}

/// Trajectory velocity `J / P_tot`.
pub fn average_velocity(cfg: &SlitConfig, x: f64, t: f64) -> Result<f64> {
    let tm = terms(cfg, x, t);
    let density = (tm.p1 + tm.p2 + 2.0 * tm.cross * tm.cos).max(0.0);
    let floor = node_floor(cfg, t);
    if !(density > floor) {
        return Err(Error::NodeSingularity {
            x,
            t,
            density,
            floor,
        });
    }
    Ok(total_current(cfg, x, t) / density)
}
