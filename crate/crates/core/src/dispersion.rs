//! Free Gaussian packet: spreading width, osmotic and total velocity fields,
//! and the ballistic growth of the mean-square displacement.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Packet width `sigma(t) = sigma0 sqrt(1 + D^2 t^2 / sigma0^4)`. Even in `t`.
pub fn sigma_t(params: &PhysicalParams, t: f64) -> f64 {
    sigma_sq(params, t).sqrt()
}

pub(crate) fn sigma_sq(params: &PhysicalParams, t: f64) -> f64 {
    let s0 = params.sigma0();
    let d = params.diffusion_constant();
    s0 * s0 * (1.0 + (d * t).powi(2) / s0.powi(4))
}

/// Time-dependent diffusivity `u0^2 t` of ballistic diffusion.
///
/// Only defined after emission, so negative times are rejected.
pub fn ballistic_diffusivity(params: &PhysicalParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "diffusivity is defined for t >= 0 only",
        });
    }
    Ok(params.u0_sq() * t)
}

/// Mean-square osmotic fluctuation `u0^2 - D^2 / sigma(t)^2`.
pub fn delta_u_variance(params: &PhysicalParams, t: f64) -> f64 {
    let d = params.diffusion_constant();
    (params.u0_sq() - d * d / sigma_sq(params, t)).max(0.0)
}

/// `<x^2>(t) = <x^2>(0) + D_t(t) t`, which equals `<x^2>(0) + u0^2 t^2`.
pub fn mean_square_displacement(params: &PhysicalParams, x0_sq: f64, t: f64) -> Result<f64> {
    if !(x0_sq >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x0_sq",
            value: x0_sq,
            reason: "must be >= 0",
        });
    }
    Ok(x0_sq + ballistic_diffusivity(params, t)? * t)
}

/// A single Gaussian packet whose center moves with constant `drift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub params: PhysicalParams,
    pub center0: f64,
    pub drift: f64,
}

impl GaussianPacket {
    pub fn new(params: PhysicalParams, center0: f64, drift: f64) -> Self {
        Self {
            params,
            center0,
            drift,
        }
    }

    pub fn center(&self, t: f64) -> f64 {
        self.center0 + self.drift * t
    }

    pub fn sigma(&self, t: f64) -> f64 {
        sigma_t(&self.params, t)
    }

    /// Normalized probability density at `(x, t)`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let s2 = sigma_sq(&self.params, t);
        let dx = x - self.center(t);
        (-dx * dx / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt()
    }

    /// Outward osmotic velocity `u+ = -(hbar/2m) dP/dx / P`; `u- = -u+`.
    pub fn osmotic_velocity(&self, x: f64, t: f64) -> f64 {
        self.params.diffusion_constant() * (x - self.center(t)) / sigma_sq(&self.params, t)
    }

    /// Average velocity field: drift plus the dispersive term
    /// `(x - c(t)) u0^2 t / sigma(t)^2`.
    pub fn velocity_field(&self, x: f64, t: f64) -> f64 {
        self.drift + (x - self.center(t)) * self.params.u0_sq() * t / sigma_sq(&self.params, t)
    }
}
