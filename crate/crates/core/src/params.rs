//! Physical constants and two-slit geometry.
//!
//! All quantities are in dimensionless units by default (`hbar_eff = mass = 1`),
//! but every formula keeps its symbols explicit so other unit systems work too.

use crate::dispersion::GaussianPacket;
use crate::error::{require_finite, require_non_negative, require_positive, Result};

/// Effective action quantum, particle mass and initial packet width.
///
/// The diffusion constant `D = hbar_eff / (2 mass)` and the initial osmotic
/// speed `u0 = D / sigma0` are derived once at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    hbar_eff: f64,
    mass: f64,
    sigma0: f64,
    diffusion_constant: f64,
    u0: f64,
}

impl PhysicalParams {
    pub fn new(hbar_eff: f64, mass: f64, sigma0: f64) -> Result<Self> {
        let hbar_eff = require_positive("hbar_eff", hbar_eff)?;
        let mass = require_positive("mass", mass)?;
        let sigma0 = require_positive("sigma0", sigma0)?;
        let diffusion_constant = hbar_eff / (2.0 * mass);
        Ok(Self {
            hbar_eff,
            mass,
            sigma0,
            diffusion_constant,
            u0: diffusion_constant / sigma0,
        })
    }

    pub fn hbar_eff(&self) -> f64 {
        self.hbar_eff
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    /// The constant `hbar_eff / 2m`. Not to be confused with the
    /// time-dependent [`crate::dispersion::ballistic_diffusivity`].
    pub fn diffusion_constant(&self) -> f64 {
        self.diffusion_constant
    }

    /// Root-mean-square osmotic speed at emission, `D / sigma0`.
    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn u0_sq(&self) -> f64 {
        self.u0 * self.u0
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("unit parameters are valid")
    }
}

/// Which of the two slits a packet emerges from. Slit one sits at `+X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slit {
    One,
    Two,
}

/// Two Gaussian slits at `±X`, each emitting a packet that drifts
/// transversally with `±v_x` and moves forward with `v_y`.
///
/// Slit one's center is `c1(t) = X + v_x t`; slit two is its mirror image.
/// Negative `v_x` makes the packets approach each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitConfig {
    pub params: PhysicalParams,
    half_separation: f64,
    v_x: f64,
    v_y: f64,
    phi0: f64,
    amplitude_ratio: f64,
}

impl SlitConfig {
    pub fn new(params: PhysicalParams, half_separation: f64, v_x: f64, v_y: f64) -> Result<Self> {
        Ok(Self {
            params,
            half_separation: require_positive("half_separation", half_separation)?,
            v_x: require_finite("v_x", v_x)?,
            v_y: require_positive("v_y", v_y)?,
            phi0: 0.0,
            amplitude_ratio: 1.0,
        })
    }

    /// Initial phase common to both slits. It cancels in the relative phase
    /// and is kept only so configurations round-trip.
    pub fn with_phi0(mut self, phi0: f64) -> Result<Self> {
        self.phi0 = require_finite("phi0", phi0)?;
        Ok(self)
    }

    /// Amplitude of slit two relative to slit one, `R2 / R1`. Zero closes slit two.
    pub fn with_amplitude_ratio(mut self, ratio: f64) -> Result<Self> {
        self.amplitude_ratio = require_non_negative("amplitude_ratio", ratio)?;
        Ok(self)
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    pub fn v_x(&self) -> f64 {
        self.v_x
    }

    pub fn v_y(&self) -> f64 {
        self.v_y
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn amplitude_ratio(&self) -> f64 {
        self.amplitude_ratio
    }

    /// Transverse wave number `m |v_x| / hbar_eff`.
    pub fn k_x(&self) -> f64 {
        self.params.mass() * self.v_x.abs() / self.params.hbar_eff()
    }

    /// Displacement `X + v_x t` of slit one's center from the axis.
    pub fn displacement(&self, t: f64) -> f64 {
        self.half_separation + self.v_x * t
    }

    pub fn center(&self, slit: Slit, t: f64) -> f64 {
        match slit {
            Slit::One => self.displacement(t),
            Slit::Two => -self.displacement(t),
        }
    }

    /// Time at which the two packet centers coincide, if they ever do.
    pub fn coincidence_time(&self) -> Option<f64> {
        (self.v_x < 0.0).then(|| -self.half_separation / self.v_x)
    }

    /// Forward coordinate reached at time `t`.
    pub fn screen_y(&self, t: f64) -> f64 {
        self.v_y * t
    }

    pub fn packet(&self, slit: Slit) -> GaussianPacket {
        match slit {
            Slit::One => GaussianPacket::new(self.params, self.half_separation, self.v_x),
            Slit::Two => GaussianPacket::new(self.params, -self.half_separation, -self.v_x),
        }
    }
}

impl Default for SlitConfig {
    fn default() -> Self {
        Self::new(PhysicalParams::default(), 2.0, -0.5, 1.0).expect("default slits are valid")
    }
}
