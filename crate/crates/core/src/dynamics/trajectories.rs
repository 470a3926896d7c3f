use rayon::prelude::*;

use super::average_velocity;
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::interference::total_intensity;
use crate::params::{Slit, SlitConfig};

/// How initial positions are laid out around each slit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSpacing {
    /// Evenly spaced across `center ± span * sigma0` of each slit.
    Equidistant,
    /// Quantiles of the initial total intensity, so neighbouring seeds bound
    /// tubes of equal probability.
    Quantile,
}

/// Initial positions at `t0`, sorted ascending.
///
/// `Equidistant` splits `n` evenly between the slits; `Quantile` places all
/// `n` seeds at the midpoints of equal-probability bins of `P_tot(x, t0)`.
pub fn seed_positions(
    cfg: &SlitConfig,
    n: usize,
    span_sigmas: f64,
    spacing: SeedSpacing,
    t0: f64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n_seeds",
            value: n as f64,
            reason: "need at least 2 seeds",
        });
    }
    let span = span_sigmas * cfg.params.sigma0();
    if !(span > 0.0) {
        return Err(Error::InvalidParameter {
            name: "seed_span_sigmas",
            value: span_sigmas,
            reason: "must be > 0",
        });
    }
    let mut seeds = match spacing {
        SeedSpacing::Equidistant => {
            let per_slit = n / 2;
            let line = |c: f64, k: usize| {
                if k == 1 {
                    vec![c]
                } else {
                    (0..k)
                        .map(|i| c - span + 2.0 * span * i as f64 / (k - 1) as f64)
                        .collect::<Vec<_>>()
                }
            };
            let mut s = line(cfg.center(Slit::One, t0), n - per_slit);
            s.extend(line(cfg.center(Slit::Two, t0), per_slit));
            s
        }
        SeedSpacing::Quantile => {
            let reach = cfg.displacement(t0).abs() + span;
            let grid = Grid::new(-reach, reach, 20_001)?;
            let field = ScalarField::sample(grid, t0, |x, t| total_intensity(cfg, x, t))?;
            quantiles(&field, n)?
        }
    };
    seeds.sort_by(f64::total_cmp);
    seeds.dedup();
    Ok(seeds)
}

fn quantiles(field: &ScalarField, n: usize) -> Result<Vec<f64>> {
    let grid = field.grid();
    let v = field.values();
    let dx = grid.dx();
    let mut cdf = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for w in v.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dx;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::ZeroField);
    }
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let target = acc * (k as f64 + 0.5) / n as f64;
        while cdf[j + 1] < target {
            j += 1;
        }
        let w = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        out.push(grid.point(j) + w * dx);
    }
    Ok(out)
}

/// Step control for [`integrate_trajectories_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    /// Output spacing and largest step.
    pub dt_init: f64,
    /// A step is halved when `|v| dt` exceeds this length.
    pub max_step_length: f64,
    /// Smallest step as a fraction of `dt_init` before a trajectory stalls.
    pub min_dt_fraction: f64,
}

impl TrajectoryOptions {
    pub fn new(cfg: &SlitConfig, dt_init: f64) -> Self {
        Self {
            dt_init,
            max_step_length: cfg.params.sigma0() / 16.0,
            min_dt_fraction: (-20.0f64).exp2(),
        }
    }
}

/// Flux lines `dx/dt = J/P` for a family of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub seeds: Vec<f64>,
    pub times: Vec<f64>,
    /// `positions[seed][time]`
    pub positions: Vec<Vec<f64>>,
    /// Time at which a trajectory got stuck at a node; its position is held
    /// constant afterwards.
    pub stalled: Vec<Option<f64>>,
    pub v_y: f64,
}

impl TrajectorySet {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Forward coordinate `v_y t` for each stored time.
    pub fn y(&self) -> Vec<f64> {
        self.times.iter().map(|t| self.v_y * t).collect()
    }

    pub fn final_positions(&self) -> Vec<f64> {
        self.positions
            .iter()
            .map(|p| *p.last().expect("at least one stored time"))
            .collect()
    }

    /// First pair of seed-adjacent trajectories whose order flips.
    pub fn first_crossing(&self) -> Option<(usize, usize, f64)> {
        for (k, &t) in self.times.iter().enumerate() {
            for i in 1..self.len() {
                if self.positions[i - 1][k] >= self.positions[i][k] {
                    return Some((i - 1, i, t));
                }
            }
        }
        None
    }

    /// Number of sign changes of `x(t)` per trajectory.
    pub fn sign_changes(&self) -> Vec<usize> {
        self.positions
            .iter()
            .map(|p| {
                p.windows(2)
                    .filter(|w| w[0].signum() != w[1].signum() || w[1] == 0.0)
                    .count()
            })
            .collect()
    }
}

/// Integrates every seed from `t0` to `t1` with output spacing at most
/// `dt_init`.
pub fn integrate_trajectories(
    cfg: &SlitConfig,
    seeds: &[f64],
    t0: f64,
    t1: f64,
    dt_init: f64,
) -> Result<TrajectorySet> {
    integrate_trajectories_with(cfg, seeds, t0, t1, &TrajectoryOptions::new(cfg, dt_init))
}

pub fn integrate_trajectories_with(
    cfg: &SlitConfig,
    seeds: &[f64],
    t0: f64,
    t1: f64,
    opts: &TrajectoryOptions,
) -> Result<TrajectorySet> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter {
            name: "seeds",
            value: 0.0,
            reason: "need at least one seed",
        });
    }
    if !(t0 < t1) {
        return Err(Error::InvalidParameter {
            name: "t1",
            value: t1,
            reason: "must exceed t0",
        });
    }
    if !(opts.dt_init > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt_init",
            value: opts.dt_init,
            reason: "must be > 0",
        });
    }
    if let Some(&x) = seeds.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "seeds",
            value: x,
            reason: "must be finite",
        });
    }
    let n_out = ((t1 - t0) / opts.dt_init - 1e-9).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n_out)
        .map(|k| {
            if k == n_out {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / n_out as f64
            }
        })
        .collect();

    let solved: Vec<(Vec<f64>, Option<f64>)> = seeds
        .par_iter()
        .map(|&x0| integrate_one(cfg, x0, &times, opts))
        .collect();
    let (positions, stalled) = solved.into_iter().unzip();
    Ok(TrajectorySet {
        seeds: seeds.to_vec(),
        times,
        positions,
        stalled,
        v_y: cfg.v_y(),
    })
}

fn integrate_one(
    cfg: &SlitConfig,
    x0: f64,
    times: &[f64],
    opts: &TrajectoryOptions,
) -> (Vec<f64>, Option<f64>) {
    let dt_min = opts.dt_init * opts.min_dt_fraction;
    let mut path = Vec::with_capacity(times.len());
    path.push(x0);
    let mut x = x0;
    let mut h = opts.dt_init;
    let mut stalled = None;
    for w in times.windows(2) {
        if stalled.is_some() {
            path.push(x);
            continue;
        }
        let (mut t, t_end) = (w[0], w[1]);
        while t < t_end {
            let last = h >= t_end - t;
            let step = if last { t_end - t } else { h };
            match rk4_step(cfg, x, t, step, opts.max_step_length) {
                Some(next) => {
                    x = next;
                    t = if last { t_end } else { t + step };
                    h = (2.0 * h).min(opts.dt_init);
                }
                None => {
                    h = 0.5 * step;
                    if h < dt_min {
                        stalled = Some(t);
                        break;
                    }
                }
            }
        }
        path.push(x);
    }
    (path, stalled)
}

/// One classical fourth-order step; `None` when a stage hits a node or moves
/// farther than `max_len`.
fn rk4_step(cfg: &SlitConfig, x: f64, t: f64, h: f64, max_len: f64) -> Option<f64> {
    let vel = |x: f64, t: f64| {
        average_velocity(cfg, x, t)
            .ok()
            .filter(|v| v.abs() * h <= max_len)
    };
    let k1 = vel(x, t)?;
    let k2 = vel(x + 0.5 * h * k1, t + 0.5 * h)?;
    let k3 = vel(x + 0.5 * h * k2, t + 0.5 * h)?;
    let k4 = vel(x + h * k3, t + h)?;
    Some(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Probability carried between trajectories `a` and `b` at each stored time,
/// integrated from `frames[k]` sampled at `set.times[k]`.
pub fn flux_between(
    frames: &[ScalarField],
    set: &TrajectorySet,
    a: usize,
    b: usize,
) -> Result<Vec<f64>> {
    if frames.len() != set.times.len() {
        return Err(Error::FieldMismatch(format!(
            "{} frames for {} trajectory times",
            frames.len(),
            set.times.len()
        )));
    }
    if a >= set.len() || b >= set.len() {
        return Err(Error::FieldMismatch(format!(
            "trajectory index out of range: {a}, {b} of {}",
            set.len()
        )));
    }
    let (pa, pb) = (&set.positions[a], &set.positions[b]);
    if a != b && pa[0] >= pb[0] {
        return Err(Error::TrajectoryCrossing { a, b, t: set.times[0] });
    }
    frames
        .iter()
        .zip(&set.times)
        .enumerate()
        .map(|(k, (frame, &t))| {
            if frame.time() != t {
                return Err(Error::FieldMismatch(format!(
                    "frame {k} at t = {} but trajectory time is {t}",
                    frame.time()
                )));
            }
            if pa[k] > pb[k] {
                return Err(Error::TrajectoryCrossing { a, b, t });
            }
            Ok(frame.integral_between(pa[k], pb[k]))
        })
        .collect()
}
