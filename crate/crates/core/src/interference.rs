//! Two-slit intensity from real-valued densities and the relative phase.
//!
//! The averaged intensity is `P1 + P2 + 2 sqrt(P1 P2) cos(phi)`, where the
//! relative phase `phi` carries both the transverse drift and the dispersive
//! part of each packet's velocity field.

use crate::dispersion::sigma_sq;
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::params::{Slit, SlitConfig};

/// Relative phase between the two paths, unreduced:
///
/// `phi = 2 m v_x x / hbar - (X + v_x t) x (1/D) u0^2 t / sigma(t)^2`
///
/// with `D = hbar / 2m` the constant diffusion coefficient.
pub fn relative_phase(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let p = &cfg.params;
    let drift_term = 2.0 * p.mass() * cfg.v_x() * x / p.hbar_eff();
    let dispersive = cfg.displacement(t) * x * (1.0 / p.diffusion_constant())
        * (p.u0_sq() * t / sigma_sq(p, t));
    drift_term - dispersive
}

/// Normalized single-slit densities `(P1, P2)`, without amplitude weighting.
pub fn slit_densities(cfg: &SlitConfig, x: f64, t: f64) -> (f64, f64) {
    (
        cfg.packet(Slit::One).density(x, t),
        cfg.packet(Slit::Two).density(x, t),
    )
}

/// Averaged total intensity with slit two weighted by the amplitude ratio `r`:
/// `P1 + r^2 P2 + 2 r sqrt(P1 P2) cos(phi)`.
pub fn total_intensity(cfg: &SlitConfig, x: f64, t: f64) -> f64 {
    let (p1, p2) = slit_densities(cfg, x, t);
    let r = cfg.amplitude_ratio();
    let cross = 2.0 * r * (p1 * p2).sqrt() * relative_phase(cfg, x, t).cos();
    // nonnegative analytically; clip rounding at exact nodes
    (p1 + r * r * p2 + cross).max(0.0)
}

/// Samples [`total_intensity`] on `grid` at time `t`, without normalizing.
pub fn intensity_field(cfg: &SlitConfig, grid: Grid, t: f64) -> Result<ScalarField> {
    ScalarField::sample(grid, t, |x, t| total_intensity(cfg, x, t))
}

/// Rescales a field to unit trapezoid integral.
pub fn normalize(field: &ScalarField) -> Result<ScalarField> {
    field.normalized()
}

/// Dark-fringe positions `(n + 1/2) pi / k_x` for `n = 0..=n_max`, valid at the
/// moment the packet centers coincide.
pub fn dark_fringe_positions(cfg: &SlitConfig, n_max: usize) -> Result<Vec<f64>> {
    let k_x = cfg.k_x();
    if k_x == 0.0 {
        return Err(Error::InvalidParameter {
            name: "v_x",
            value: cfg.v_x(),
            reason: "dark fringes need a nonzero transverse velocity",
        });
    }
    Ok((0..=n_max)
        .map(|n| (n as f64 + 0.5) * std::f64::consts::PI / k_x)
        .collect())
}

/// An extremum located to sub-grid precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Interior extrema of a sampled intensity and the fringe visibility.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeReport {
    pub time: f64,
    pub minima: Vec<Extremum>,
    pub maxima: Vec<Extremum>,
    /// `(I_max - I_min) / (I_max + I_min)` for the brightest maximum and its
    /// deeper neighbouring minimum; zero without any minimum.
    pub visibility: f64,
}

impl FringeReport {
    pub fn minima_positions(&self) -> Vec<f64> {
        self.minima.iter().map(|e| e.x).collect()
    }

    pub fn maxima_positions(&self) -> Vec<f64> {
        self.maxima.iter().map(|e| e.x).collect()
    }
}

/// Finds strict interior local extrema by 3-point comparison and refines
/// each with the vertex of the parabola through the three samples. Equal
/// neighbouring samples are merged and reported at the centre of the run.
pub fn find_extrema(field: &ScalarField) -> Result<FringeReport> {
    let v = field.values();
    if v.len() < 5 {
        return Err(Error::InvalidGrid(format!(
            "extremum search needs at least 5 points, got {}",
            v.len()
        )));
    }
    let grid = field.grid();
    let dx = grid.dx();
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    let mut i = 1;
    while i < v.len() - 1 {
        // a run of equal samples counts as one candidate, centred on the run
        let mut j = i;
        while j + 1 < v.len() - 1 && v[j + 1] == v[i] {
            j += 1;
        }
        let (l, c, r) = (v[i - 1], v[i], v[j + 1]);
        let is_max = c > l && c > r;
        let is_min = c < l && c < r;
        if is_max || is_min {
            let ext = if i == j {
                let curvature = l - 2.0 * c + r;
                let offset = 0.5 * (l - r) / curvature;
                Extremum {
                    x: grid.point(i) + offset * dx,
                    value: c - 0.25 * (l - r) * offset,
                }
            } else {
                Extremum {
                    x: 0.5 * (grid.point(i) + grid.point(j)),
                    value: c,
                }
            };
            if is_max {
                maxima.push(ext);
            } else {
                minima.push(ext);
            }
        }
        i = j + 1;
    }
    let visibility = visibility(&minima, &maxima);
    Ok(FringeReport {
        time: field.time(),
        minima,
        maxima,
        visibility,
    })
}

fn visibility(minima: &[Extremum], maxima: &[Extremum]) -> f64 {
    let Some(brightest) = maxima
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
    else {
        return 0.0;
    };
    let left = minima.iter().rev().find(|m| m.x < brightest.x);
    let right = minima.iter().find(|m| m.x > brightest.x);
    let darkest = match (left, right) {
        (Some(a), Some(b)) => a.value.min(b.value),
        (Some(a), None) | (None, Some(a)) => a.value,
        (None, None) => return 0.0,
    }
    .max(0.0);
    let sum = brightest.value + darkest;
    if sum > 0.0 {
        ((brightest.value - darkest) / sum).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Modular momentum `p mod (h / d)`, in `[0, h/d)`.
pub fn modular_momentum(p: f64, d: f64, h: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "slit distance must be > 0",
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "action quantum must be > 0",
        });
    }
    let period = h / d;
    let r = p.rem_euclid(period);
    Ok(if r >= period { 0.0 } else { r })
}
