//! Commands: compute, check against exact results, write artifacts.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use subquantum::cml::{cml_interfere, cml_run, walker_ensemble_msd};
use subquantum::dispersion::mean_square_displacement;
use subquantum::dynamics::{
    flux_between, integrate_trajectories, seed_positions, total_current, total_current_expanded,
    velocity_decomposition, TrajectorySet,
};
use subquantum::interference::{
    dark_fringe_positions, find_extrema, intensity_field, relative_phase, slit_densities,
    total_intensity,
};
use subquantum::oracle::{
    compare_fields, compare_fields_weighted, phase_difference, quantum_current,
    superposed_density, superposed_density_field,
};
use subquantum::ScalarField;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::output::{write_csv, write_heatmap, write_overlay, Columns};

const CURRENT_TOL: f64 = 1e-6;
const CURRENT_MASK: f64 = 1e-10;
const INTENSITY_TOL: f64 = 1e-8;
const PHASE_TOL: f64 = 1e-8;
const EXPANDED_TOL: f64 = 1e-12;
const FRINGE_TOL: f64 = 0.01;
const FLUX_DRIFT_TOL: f64 = 0.01;
const MIRROR_TOL: f64 = 1e-8;
const CML_VARIANCE_TOL: f64 = 0.02;
const CML_SLOPE_TOL: f64 = 0.1;
const CML_INTERFERENCE_TOL: f64 = 0.02;
const CML_MASK: f64 = 0.01;
const NON_ADDITIVE_MIN: f64 = 1e3 * CURRENT_TOL;
/// Rows kept in the moment-series CSV; the lattice takes far more steps.
const MOMENT_ROWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Intensity,
    Trajectories,
    Fringes,
    Cml,
    Verify,
    All,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Numeric(#[from] subquantum::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Unsupported(String),
}

type Result<T> = std::result::Result<T, RunError>;

/// Outcome of one check. `x` and `t` locate the worst deviation, NaN when
/// the check has no single location.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub x: f64,
    pub t: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} worst={:e} at x={}, t={}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst,
            self.x,
            self.t
        )
    }
}

fn check(name: &str, passed: bool, worst: f64, x: f64, t: f64) -> Check {
    Check {
        name: name.to_string(),
        passed,
        worst,
        x,
        t,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        self.checks.iter().map(|c| format!("{c}\n")).collect()
    }
}

struct Sink<'a> {
    cfg: &'a ExperimentConfig,
    summary: Summary,
}

impl Sink<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output.directory.join(name)
    }

    fn record(&mut self, path: PathBuf, result: std::io::Result<()>) -> Result<()> {
        result.map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.summary.artifacts.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &dyn crate::output::CsvTable) -> Result<()> {
        if !self.cfg.output.formats.csv {
            return Ok(());
        }
        let path = self.path(name);
        let r = write_csv(table, &path);
        self.record(path, r)
    }

    fn heatmap(&mut self, name: &str, frames: &[ScalarField]) -> Result<()> {
        if !self.cfg.output.formats.pgm {
            return Ok(());
        }
        let path = self.path(name);
        let r = write_heatmap(frames, &path);
        self.record(path, r)
    }

    fn overlay(&mut self, name: &str, frames: &[ScalarField], set: &TrajectorySet) -> Result<()> {
        if !self.cfg.output.formats.pgm {
            return Ok(());
        }
        let path = self.path(name);
        let r = write_overlay(frames, set, &path);
        self.record(path, r)
    }
}

/// Runs `command`, writes its artifacts under the output directory and
/// returns the checks in a fixed order.
pub fn run_pipeline(cfg: &ExperimentConfig, command: Command) -> Result<Summary> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut sink = Sink {
        cfg,
        summary: Summary::default(),
    };
    match command {
        Command::Intensity => intensity(&mut sink)?,
        Command::Trajectories => trajectories(&mut sink)?,
        Command::Fringes => fringes(&mut sink)?,
        Command::Cml => cml(&mut sink)?,
        Command::Verify => verify(&mut sink)?,
        Command::All => {
            intensity(&mut sink)?;
            trajectories(&mut sink)?;
            fringes(&mut sink)?;
            cml(&mut sink)?;
            verify(&mut sink)?;
        }
    }
    let path = sink.path("summary.txt");
    let text = sink.summary.render();
    let r = fs::write(&path, text);
    sink.record(path, r)?;
    Ok(sink.summary)
}

fn intensity_frames(cfg: &ExperimentConfig, times: &[f64]) -> Result<Vec<ScalarField>> {
    Ok(times
        .par_iter()
        .map(|&t| intensity_field(&cfg.slit, cfg.grid, t)?.normalized())
        .collect::<subquantum::Result<_>>()?)
}

fn intensity(sink: &mut Sink) -> Result<()> {
    let cfg = sink.cfg;
    let times = cfg.time.frame_times();
    let frames = intensity_frames(cfg, &times)?;
    let mut worst = (0.0, f64::NAN, f64::NAN);
    for frame in &frames {
        let exact = superposed_density_field(&cfg.slit, cfg.grid, frame.time())?;
        let cmp = compare_fields(frame, &exact, INTENSITY_TOL, 0.0)?;
        if cmp.max_rel_deviation >= worst.0 {
            worst = (cmp.max_rel_deviation, cmp.worst_x, frame.time());
        }
    }
    for (k, frame) in frames.iter().enumerate() {
        sink.csv(&format!("intensity_{k:04}.csv"), frame)?;
    }
    sink.heatmap("intensity.pgm", &frames)?;
    sink.summary.checks.push(check(
        "intensity-frames",
        worst.0 <= INTENSITY_TOL,
        worst.0,
        worst.1,
        worst.2,
    ));
    Ok(())
}

fn trajectories(sink: &mut Sink) -> Result<()> {
    let cfg = sink.cfg;
    let ts = &cfg.trajectory;
    let (t0, t1) = (cfg.time.t0, cfg.time.t1);
    let seeds = seed_positions(&cfg.slit, ts.n_seeds, ts.seed_span_sigmas, ts.spacing, t0)?;
    let set = integrate_trajectories(&cfg.slit, &seeds, t0, t1, ts.dt_init)?;

    // no trajectory changes side
    let changes = set.sign_changes();
    let crossings: usize = changes.iter().sum();
    let (cx, ct) = match changes.iter().position(|&c| c > 0) {
        Some(i) => {
            let k = set.positions[i]
                .windows(2)
                .position(|w| w[0].signum() != w[1].signum() || w[1] == 0.0)
                .unwrap_or(0);
            (set.seeds[i], set.times[k + 1])
        }
        None => (f64::NAN, f64::NAN),
    };
    sink.summary.checks.push(check(
        "no-crossing",
        crossings == 0,
        crossings as f64,
        cx,
        ct,
    ));

    // probability between neighbours stays put
    let flux_frames: Vec<ScalarField> = set
        .times
        .par_iter()
        .map(|&t| intensity_field(&cfg.slit, cfg.grid, t))
        .collect::<subquantum::Result<_>>()?;
    let mut drift = (0.0f64, f64::NAN, f64::NAN);
    for i in 0..set.len().saturating_sub(1) {
        let flux = flux_between(&flux_frames, &set, i, i + 1)?;
        let f0 = flux[0];
        for (k, f) in flux.iter().enumerate() {
            let d = (f - f0).abs() / f0;
            if d > drift.0 {
                drift = (d, set.positions[i][k], set.times[k]);
            }
        }
    }
    sink.summary.checks.push(check(
        "flux-drift",
        drift.0 <= FLUX_DRIFT_TOL,
        drift.0,
        drift.1,
        drift.2,
    ));

    // equal slits give mirror-image trajectories
    let mirrored = seeds
        .iter()
        .zip(seeds.iter().rev())
        .all(|(a, b)| (a + b).abs() <= 1e-12 * a.abs().max(1.0));
    if cfg.slit.amplitude_ratio() == 1.0 && mirrored {
        let n = set.len();
        let mut worst = (0.0f64, f64::NAN, f64::NAN);
        for i in 0..n {
            for (k, (a, b)) in set.positions[i].iter().zip(&set.positions[n - 1 - i]).enumerate() {
                if (a + b).abs() > worst.0 {
                    worst = ((a + b).abs(), *a, set.times[k]);
                }
            }
        }
        sink.summary.checks.push(check(
            "mirror-symmetry",
            worst.0 <= MIRROR_TOL,
            worst.0,
            worst.1,
            worst.2,
        ));
    }

    sink.csv("trajectories.csv", &set)?;
    if cfg.output.formats.pgm {
        let frames = intensity_frames(cfg, &cfg.time.frame_times())?;
        sink.heatmap("trajectories.pgm", &frames)?;
        sink.overlay("trajectories_overlay.pgm", &frames, &set)?;
    }
    Ok(())
}

fn fringes(sink: &mut Sink) -> Result<()> {
    let cfg = sink.cfg;
    let t_star = cfg.slit.coincidence_time().ok_or_else(|| {
        RunError::Unsupported(format!(
            "the packet centres never coincide for X={}, v_x={}",
            cfg.slit.half_separation(),
            cfg.slit.v_x()
        ))
    })?;
    let field = intensity_field(&cfg.slit, cfg.grid, t_star)?.normalized()?;
    let report = find_extrema(&field)?;
    let minima = report.minima_positions();

    // every predicted node inside the grid, on both sides of the axis
    let margin = 2.0 * cfg.grid.dx();
    let reach = cfg.grid.x_max().abs().max(cfg.grid.x_min().abs());
    let n_max = (reach * cfg.slit.k_x().abs() / PI).ceil() as usize;
    let mut predicted: Vec<f64> = dark_fringe_positions(&cfg.slit, n_max)?
        .into_iter()
        .flat_map(|x| [x, -x])
        .filter(|&x| x > cfg.grid.x_min() + margin && x < cfg.grid.x_max() - margin)
        .collect();
    predicted.sort_by(f64::total_cmp);

    let mut worst = (0.0f64, f64::NAN);
    for &x in &predicted {
        let offset = minima
            .iter()
            .map(|m| (m - x).abs())
            .fold(f64::INFINITY, f64::min);
        if offset > worst.0 || worst.1.is_nan() {
            worst = (offset, x);
        }
    }
    let passed = !predicted.is_empty() && worst.0 <= FRINGE_TOL;
    sink.summary
        .checks
        .push(check("dark-fringes", passed, worst.0, worst.1, t_star));

    sink.csv("fringe_field.csv", &field)?;
    let mut kind = Vec::new();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for m in &report.minima {
        kind.push(-1.0);
        xs.push(m.x);
        values.push(m.value);
    }
    for m in &report.maxima {
        kind.push(1.0);
        xs.push(m.x);
        values.push(m.value);
    }
    sink.csv(
        "fringes.csv",
        &Columns {
            names: &["kind", "x", "value"],
            columns: &[&kind, &xs, &values],
        },
    )?;
    sink.csv(
        "dark_fringes_predicted.csv",
        &Columns {
            names: &["x"],
            columns: &[&predicted],
        },
    )?;
    Ok(())
}

fn cml(sink: &mut Sink) -> Result<()> {
    let cfg = sink.cfg;
    let c = &cfg.cml;
    let params = cfg.params();
    let run = cml_run(&cfg.slit, cfg.grid, c.profile, c.t_end, c.safety)?;
    let t_end = run.final_state.time;

    let v0 = run.variance1[0];
    let var = *run.variance1.last().expect("at least the initial moment");
    let expected = v0 + params.u0_sq() * t_end * t_end;
    let dev = (var - expected).abs() / expected;
    sink.summary.checks.push(check(
        "cml-variance",
        dev <= CML_VARIANCE_TOL,
        dev,
        f64::NAN,
        t_end,
    ));

    let slope = run.growth_exponent().unwrap_or(f64::NAN);
    let dev = (slope - 2.0).abs();
    sink.summary.checks.push(check(
        "cml-growth-exponent",
        dev <= CML_SLOPE_TOL,
        dev,
        f64::NAN,
        t_end,
    ));

    let lattice = cml_interfere(&run.final_state, |x, t| relative_phase(&cfg.slit, x, t))?;
    let exact = ScalarField::sample(cfg.grid, t_end, |x, t| total_intensity(&cfg.slit, x, t))?
        .normalized()?;
    let cmp = compare_fields_weighted(&lattice, &exact, &exact, CML_INTERFERENCE_TOL, CML_MASK)?;
    sink.summary.checks.push(check(
        "cml-interference",
        cmp.passed,
        cmp.max_rel_deviation,
        cmp.worst_x,
        t_end,
    ));

    // statistical error of a mean of x^2 shrinks like 1/sqrt(n)
    let msd = walker_ensemble_msd(params, c.walker_count, t_end, c.rng_seed)?;
    let exact_msd = mean_square_displacement(params, params.sigma0().powi(2), t_end)?;
    let dev = (msd - exact_msd).abs() / exact_msd;
    let tol = 0.01f64.max(4.0 * (2.0 / c.walker_count as f64).sqrt());
    sink.summary
        .checks
        .push(check("walker-msd", dev <= tol, dev, f64::NAN, t_end));

    let stride = run.times.len().div_ceil(MOMENT_ROWS).max(1);
    let pick = |v: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().step_by(stride).copied().collect();
        if !(v.len() - 1).is_multiple_of(stride) {
            out.push(*v.last().unwrap());
        }
        out
    };
    let (t, v1, v2) = (pick(&run.times), pick(&run.variance1), pick(&run.variance2));
    sink.csv(
        "cml_moments.csv",
        &Columns {
            names: &["t", "variance1", "variance2"],
            columns: &[&t, &v1, &v2],
        },
    )?;
    sink.csv("cml_field.csv", &lattice)?;
    Ok(())
}

fn verify(sink: &mut Sink) -> Result<()> {
    let cfg = sink.cfg;
    let slit = &cfg.slit;
    let times = cfg.time.frame_times();

    let per_frame: Vec<(f64, f64, f64, f64, f64)> = times
        .par_iter()
        .map(|&t| -> subquantum::Result<_> {
            let j = ScalarField::sample(cfg.grid, t, |x, t| total_current(slit, x, t))?;
            let q = ScalarField::sample(cfg.grid, t, |x, t| quantum_current(slit, x, t))?;
            let p = ScalarField::sample(cfg.grid, t, |x, t| superposed_density(slit, x, t))?;
            let current = compare_fields_weighted(&j, &q, &p, CURRENT_TOL, CURRENT_MASK)?;
            let i = intensity_field(slit, cfg.grid, t)?;
            let intensity = compare_fields(&i, &p, INTENSITY_TOL, 0.0)?;
            Ok((
                t,
                current.max_rel_deviation,
                current.worst_x,
                intensity.max_rel_deviation,
                intensity.worst_x,
            ))
        })
        .collect::<subquantum::Result<_>>()?;
    let mut current = (0.0f64, f64::NAN, f64::NAN);
    let mut intensity = (0.0f64, f64::NAN, f64::NAN);
    for &(t, cd, cx, id, ix) in &per_frame {
        if cd >= current.0 {
            current = (cd, cx, t);
        }
        if id >= intensity.0 {
            intensity = (id, ix, t);
        }
    }
    sink.summary.checks.push(check(
        "current-identity",
        current.0 <= CURRENT_TOL,
        current.0,
        current.1,
        current.2,
    ));
    sink.summary.checks.push(check(
        "intensity-identity",
        intensity.0 <= INTENSITY_TOL,
        intensity.0,
        intensity.1,
        intensity.2,
    ));

    let points = random_points(cfg, 10_000);
    let mut phase = (0.0f64, f64::NAN, f64::NAN);
    for &(x, t) in &points[..1000] {
        let d = ((relative_phase(slit, x, t) - phase_difference(slit, x, t) + PI).rem_euclid(TAU)
            - PI)
            .abs();
        if d >= phase.0 {
            phase = (d, x, t);
        }
    }
    sink.summary.checks.push(check(
        "phase-identity",
        phase.0 <= PHASE_TOL,
        phase.0,
        phase.1,
        phase.2,
    ));

    let mut expanded = (0.0f64, f64::NAN, f64::NAN);
    for &(x, t) in &points {
        let a = total_current(slit, x, t);
        let b = total_current_expanded(slit, x, t);
        let scale = a.abs().max(b.abs());
        let d = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
        if d >= expanded.0 {
            expanded = (d, x, t);
        }
    }
    sink.summary.checks.push(check(
        "expanded-current",
        expanded.0 <= EXPANDED_TOL,
        expanded.0,
        expanded.1,
        expanded.2,
    ));

    // interference excess of the current at bright fringes, mid-window
    let t = 0.5 * (cfg.time.t0 + cfg.time.t1);
    let report = find_extrema(&intensity_field(slit, cfg.grid, t)?)?;
    let mut gap = (0.0f64, f64::NAN);
    for m in &report.maxima {
        let (p1, p2) = slit_densities(slit, m.x, t);
        let v = velocity_decomposition(slit, m.x, t);
        let r = slit.amplitude_ratio();
        let separate = p1 * v.v1 + r * r * p2 * v.v2;
        let d = (total_current(slit, m.x, t) - separate).abs();
        if d > gap.0 {
            gap = (d, m.x);
        }
    }
    sink.summary.checks.push(check(
        "non-additive-current",
        gap.0 > NON_ADDITIVE_MIN,
        gap.0,
        gap.1,
        t,
    ));
    Ok(())
}

/// Deterministic sample points across the grid and time window.
fn random_points(cfg: &ExperimentConfig, n: usize) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.cml.rng_seed);
    (0..n)
        .map(|_| {
            (
                rng.random_range(cfg.grid.x_min()..cfg.grid.x_max()),
                rng.random_range(cfg.time.t0..cfg.time.t1),
            )
        })
        .collect()
}
