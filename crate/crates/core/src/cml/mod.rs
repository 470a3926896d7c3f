//! Coupled-map-lattice diffusion with the ballistic diffusivity `u0^2 t`.
//!
//! Each slit channel lives on the lattice in its own co-moving frame: the
//! lattice only diffuses, and the constant transverse drift is applied as a
//! frame offset when the channels are combined. Boundaries reflect, so every
//! step conserves each channel's mass.

mod walkers;

pub use walkers::{walker_ensemble_msd, WalkerEnsemble};

use crate::dispersion::ballistic_diffusivity;
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::params::{PhysicalParams, SlitConfig};

/// Initial occupation of each channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Gaussian of width `sigma0` around the slit center.
    Gaussian,
    /// All mass in the cell nearest the slit center.
    Delta,
}

/// Occupations of both channels (cell masses, each summing to one).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub grid: Grid,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub time: f64,
    params: PhysicalParams,
    /// Transverse drift of channel one; channel two drifts with the opposite sign.
    drift: f64,
}

pub fn cml_init(cfg: &SlitConfig, grid: Grid, profile: Profile) -> Result<LatticeState> {
    let reach = cfg.half_separation() + 6.0 * cfg.params.sigma0();
    if grid.x_min() > -reach || grid.x_max() < reach {
        return Err(Error::InvalidGrid(format!(
            "lattice [{}, {}] must cover ±{reach} (slit offset plus 6 sigma0)",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let channel = |center: f64| -> Vec<f64> {
        match profile {
            Profile::Gaussian => {
                let s0 = cfg.params.sigma0();
                let raw: Vec<f64> = grid
                    .points()
                    .map(|x| (-(x - center).powi(2) / (2.0 * s0 * s0)).exp())
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            }
            Profile::Delta => {
                let i = ((center - grid.x_min()) / grid.dx()).round() as usize;
                let mut cells = vec![0.0; grid.len()];
                cells[i.min(grid.len() - 1)] = 1.0;
                cells
            }
        }
    };
    Ok(LatticeState {
        grid,
        p1: channel(cfg.half_separation()),
        p2: channel(-cfg.half_separation()),
        time: 0.0,
        params: cfg.params,
        drift: cfg.v_x(),
    })
}

impl LatticeState {
    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// Coupling `alpha = D_t(t + dt/2) dt / dx^2` for a step of length `dt`.
    pub fn coupling(&self, dt: f64) -> f64 {
        let dx = self.grid.dx();
        self.params.u0_sq() * (self.time + 0.5 * dt) * dt / (dx * dx)
    }

    /// Largest `dt` with coupling at most `limit` from the current time.
    ///
    /// Solves `u0^2 (t + dt/2) dt = limit dx^2` exactly, which stays finite at
    /// `t = 0` where the diffusivity vanishes.
    pub fn max_dt(&self, limit: f64) -> f64 {
        let dx = self.grid.dx();
        let t = self.time;
        let q = 2.0 * limit * dx * dx / self.params.u0_sq();
        // -t + sqrt(t^2 + q), arranged to avoid cancellation
        q / (t + (t * t + q).sqrt())
    }

    /// Frame offset of channel one (two) at the current time.
    pub fn offsets(&self) -> (f64, f64) {
        (self.drift * self.time, -self.drift * self.time)
    }

    /// One explicit three-point diffusion step into a fresh state.
    pub fn step(&self, dt: f64) -> Result<LatticeState> {
        let mut next = self.clone();
        let mut scratch = vec![0.0; self.grid.len()];
        next.advance(dt, &mut scratch)?;
        Ok(next)
    }

    fn advance(&mut self, dt: f64, scratch: &mut Vec<f64>) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt,
                reason: "must be > 0",
            });
        }
        ballistic_diffusivity(&self.params, self.time)?;
        let alpha = self.coupling(dt);
        if alpha > 0.5 * (1.0 + 1e-12) {
            return Err(Error::Unstable {
                alpha,
                max_dt: self.max_dt(0.5),
            });
        }
        // within rounding of the limit; clamping keeps every cell nonnegative
        let alpha = alpha.min(0.5);
        diffuse(&mut self.p1, scratch, alpha);
        diffuse(&mut self.p2, scratch, alpha);
        self.time += dt;
        Ok(())
    }

    fn moments(cells: &[f64], grid: &Grid) -> (f64, f64) {
        let (mut m0, mut m1) = (0.0, 0.0);
        for (x, p) in grid.points().zip(cells) {
            m0 += p;
            m1 += p * x;
        }
        let mean = m1 / m0;
        let var = grid
            .points()
            .zip(cells)
            .map(|(x, p)| p * (x - mean) * (x - mean))
            .sum::<f64>()
            / m0;
        (mean, var)
    }

    /// Variances of channel one and two.
    pub fn variances(&self) -> (f64, f64) {
        (
            Self::moments(&self.p1, &self.grid).1,
            Self::moments(&self.p2, &self.grid).1,
        )
    }

    pub fn masses(&self) -> (f64, f64) {
        (self.p1.iter().sum(), self.p2.iter().sum())
    }

    /// Channel densities (mass per length) in the lab frame at grid point `x`.
    pub fn densities_at(&self, x: f64) -> (f64, f64) {
        let (o1, o2) = self.offsets();
        let dx = self.grid.dx();
        (
            interpolate(&self.p1, &self.grid, x - o1) / dx,
            interpolate(&self.p2, &self.grid, x - o2) / dx,
        )
    }
}

fn interpolate(cells: &[f64], grid: &Grid, x: f64) -> f64 {
    if !grid.contains(x) {
        return 0.0;
    }
    let s = (x - grid.x_min()) / grid.dx();
    let i = (s.floor() as usize).min(grid.len() - 2);
    let w = s - i as f64;
    cells[i] * (1.0 - w) + cells[i + 1] * w
}

/// `p_i += alpha (p_{i+1} - 2 p_i + p_{i-1})` with mirror ghost cells.
fn diffuse(cells: &mut Vec<f64>, scratch: &mut Vec<f64>, alpha: f64) {
    let n = cells.len();
    scratch.resize(n, 0.0);
    for i in 0..n {
        let left = cells[i.saturating_sub(1)];
        let right = cells[(i + 1).min(n - 1)];
        scratch[i] = cells[i] + alpha * (left - 2.0 * cells[i] + right);
    }
    std::mem::swap(cells, scratch);
}

/// Advances `state` by `dt`, returning the new state.
pub fn cml_step(state: &LatticeState, dt: f64) -> Result<LatticeState> {
    state.step(dt)
}

/// Channel variances recorded after every lattice step.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub variance1: Vec<f64>,
    pub variance2: Vec<f64>,
    pub final_state: LatticeState,
}

impl MomentSeries {
    /// Least-squares slope of `log(var - var(0))` against `log t` over
    /// `[t_end / 10, t_end]`, for channel one.
    pub fn growth_exponent(&self) -> Option<f64> {
        let t_end = *self.times.last()?;
        let base = self.variance1[0];
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.variance1)
            .filter(|(&t, &v)| t >= 0.1 * t_end && t > 0.0 && v > base)
            .map(|(&t, &v)| (t.ln(), (v - base).ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (x, y) in &pts {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        Some(sxy / sxx)
    }
}

/// Runs the lattice from its initial profile to `t_end` with adaptive
/// `dt`, chosen so the coupling stays at `safety * 0.5`.
pub fn cml_run(
    cfg: &SlitConfig,
    grid: Grid,
    profile: Profile,
    t_end: f64,
    safety: f64,
) -> Result<MomentSeries> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "safety",
            value: safety,
            reason: "must lie in (0, 1]",
        });
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be >= 0",
        });
    }
    let mut state = cml_init(cfg, grid, profile)?;
    let (v1, v2) = state.variances();
    let mut series = MomentSeries {
        times: vec![0.0],
        variance1: vec![v1],
        variance2: vec![v2],
        final_state: state.clone(),
    };
    let mut scratch = Vec::with_capacity(grid.len());
    while state.time < t_end {
        let remaining = t_end - state.time;
        let dt = state.max_dt(0.5 * safety);
        if dt >= remaining {
            state.advance(remaining, &mut scratch)?;
            state.time = t_end;
        } else {
            state.advance(dt, &mut scratch)?;
        }
        let (v1, v2) = state.variances();
        series.times.push(state.time);
        series.variance1.push(v1);
        series.variance2.push(v2);
    }
    series.final_state = state;
    Ok(series)
}

/// Combines both channels with the interference rule
/// `p1 + p2 + 2 sqrt(p1 p2) cos(phase(x, t))` and normalizes.
pub fn cml_interfere<F>(state: &LatticeState, phase_fn: F) -> Result<ScalarField>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    ScalarField::sample(state.grid, state.time, |x, t| {
        let (a, b) = state.densities_at(x);
        (a + b + 2.0 * (a * b).sqrt() * phase_fn(x, t).cos()).max(0.0)
    })?
    .normalized()
}
