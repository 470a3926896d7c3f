//! Complex-wavefunction reference for the real-valued model.
//!
//! Each slit emits the textbook free Gaussian with complex width
//! `sigma0 (1 + i tau)`, `tau = hbar t / (2 m sigma0^2)`. Densities, phases
//! and currents are computed from these amplitudes with analytic gradients,
//! sharing no code path with the interference and dynamics modules.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::GaussianPacket;
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::params::{Slit, SlitConfig};

/// A complex amplitude `Psi = R e^{i S / hbar}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexAmplitude(pub Complex64);

impl ComplexAmplitude {
    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    /// `|Psi|^2 = R^2`.
    pub fn density(&self) -> f64 {
        self.0.norm_sqr()
    }

    /// `R = |Psi|`.
    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    /// `S / hbar`, wrapped to `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        self.0.arg()
    }
}

/// Amplitude and its spatial derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeJet {
    pub value: Complex64,
    pub gradient: Complex64,
}

fn packet_jet(packet: &GaussianPacket, x: f64, t: f64) -> AmplitudeJet {
    let p = &packet.params;
    let s0 = p.sigma0();
    let tau = p.hbar_eff() * t / (2.0 * p.mass() * s0 * s0);
    let width = Complex64::new(1.0, tau);
    let k = p.mass() * packet.drift / p.hbar_eff();
    let omega = p.hbar_eff() * k * k / (2.0 * p.mass());
    let dx = x - packet.center(t);

    let norm = (2.0 * PI * s0 * s0).powf(-0.25) / width.sqrt();
    let exponent = -dx * dx / (4.0 * s0 * s0 * width)
        + Complex64::i() * (k * (x - packet.center0) - omega * t);
    let value = norm * exponent.exp();
    let log_gradient = -dx / (2.0 * s0 * s0 * width) + Complex64::i() * k;
    AmplitudeJet {
        value,
        gradient: value * log_gradient,
    }
}

/// Free Gaussian wavefunction of `packet` at `(x, t)`.
pub fn packet_wavefunction(packet: &GaussianPacket, x: f64, t: f64) -> ComplexAmplitude {
    ComplexAmplitude(packet_jet(packet, x, t).value)
}

/// `Psi = Psi1 + r Psi2` and its gradient, with `r` the amplitude ratio.
pub fn superposed_jet(cfg: &SlitConfig, x: f64, t: f64) -> AmplitudeJet {
    let a = packet_jet(&cfg.packet(Slit::One), x, t);
    let b = packet_jet(&cfg.packet(Slit::Two), x, t);
    let r = cfg.amplitude_ratio();
    AmplitudeJet {
        value: a.value + r * b.value,
        gradient: a.gradient + r * b.gradient,
    }
}

pub fn superposed_wavefunction(cfg: &SlitConfig, x: f64, t: f64) -> ComplexAmplitude {
    ComplexAmplitude(superposed_jet(cfg, x, t).value)
}

/// Pointwise `|Psi1 + r Psi2|^2`, not normalized.
pub fn superposed_density(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    superposed_wavefunction(cfg, x, t).density()
}

/// [`superposed_density`] sampled on `grid` and normalized to unit integral.
pub fn superposed_density_field(cfg: &SlitConfig, grid: Grid, t: f64) -> Result<ScalarField> {
    ScalarField::sample(grid, t, |x, t| superposed_density(cfg, x, t))?.normalized()
}

/// Probability current `(hbar/m) Im(Psi* dPsi/dx)`, which equals
/// `(1/m) Re(Psi* (-i hbar d/dx) Psi)`.
pub fn quantum_current(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let jet = superposed_jet(cfg, x, t);
    let p = &cfg.params;
    p.hbar_eff() / p.mass() * (jet.value.conj() * jet.gradient).im
}

/// Bohmian velocity `J / |Psi|^2`.
pub fn bohmian_velocity(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let jet = superposed_jet(cfg, x, t);
    let p = &cfg.params;
    p.hbar_eff() / p.mass() * (jet.gradient / jet.value).im
}

/// Wrapped phase difference `arg Psi1 - arg Psi2` in `(-pi, pi]`.
pub fn phase_difference(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let a = packet_jet(&cfg.packet(Slit::One), x, t).value;
    let b = packet_jet(&cfg.packet(Slit::Two), x, t).value;
    (a * b.conj()).arg()
}

/// Outcome of comparing two fields point by point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldComparison {
    /// Largest `|a - b| / max(|a|, |b|)` over unmasked points.
    pub max_rel_deviation: f64,
    pub worst_x: f64,
    pub time: f64,
    pub points_compared: usize,
    pub passed: bool,
}

/// Compares `a` and `b` where `max(|a|, |b|)` exceeds `mask_floor` times the
/// larger of the two field peaks.
pub fn compare_fields(
    a: &ScalarField,
    b: &ScalarField,
    rel_tol: f64,
    mask_floor: f64,
) -> Result<FieldComparison> {
    check_same_support(a, b)?;
    let cutoff = mask_floor * a.peak().max(b.peak());
    compare_masked(a, b, rel_tol, |i| {
        a.values()[i].abs().max(b.values()[i].abs()) > cutoff
    })
}

/// Compares `a` and `b` only where `weight` exceeds `weight_floor` times its
/// own peak, e.g. currents masked by the density.
pub fn compare_fields_weighted(
    a: &ScalarField,
    b: &ScalarField,
    weight: &ScalarField,
    rel_tol: f64,
    weight_floor: f64,
) -> Result<FieldComparison> {
    check_same_support(a, b)?;
    check_same_support(a, weight)?;
    let cutoff = weight_floor * weight.peak();
    compare_masked(a, b, rel_tol, |i| weight.values()[i] > cutoff)
}

fn check_same_support(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::FieldMismatch(format!(
            "grids differ: {:?} vs {:?}",
            a.grid(),
            b.grid()
        )));
    }
    if a.time() != b.time() {
        return Err(Error::FieldMismatch(format!(
            "times differ: {} vs {}",
            a.time(),
            b.time()
        )));
    }
    Ok(())
}

fn compare_masked(
    a: &ScalarField,
    b: &ScalarField,
    rel_tol: f64,
    keep: impl Fn(usize) -> bool,
) -> Result<FieldComparison> {
    let mut worst = 0.0f64;
    let mut worst_i = 0;
    let mut count = 0;
    for (i, (&va, &vb)) in a.values().iter().zip(b.values()).enumerate() {
        if !keep(i) {
            continue;
        }
        count += 1;
        let scale = va.abs().max(vb.abs());
        let dev = if scale > 0.0 { (va - vb).abs() / scale } else { 0.0 };
        if dev > worst {
            worst = dev;
            worst_i = i;
        }
    }
    Ok(FieldComparison {
        max_rel_deviation: worst,
        worst_x: a.grid().point(worst_i),
        time: a.time(),
        points_compared: count,
        passed: worst <= rel_tol,
    })
}
