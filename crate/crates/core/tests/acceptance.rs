//! Acceptance checks on the default two-slit configuration.
//!
//! Run with `cargo test -p subquantum --test acceptance`. Prints one line per
//! criterion and exits nonzero if any fails or runs over its time budget.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subquantum::cml::{cml_interfere, cml_run, walker_ensemble_msd, Profile};
use subquantum::dispersion::mean_square_displacement;
use subquantum::dynamics::{
    flux_between, integrate_trajectories, seed_positions, total_current, total_current_expanded,
    velocity_decomposition, SeedSpacing,
};
use subquantum::interference::{
    find_extrema, intensity_field, relative_phase, slit_densities, total_intensity,
};
use subquantum::oracle::{
    compare_fields, compare_fields_weighted, phase_difference, quantum_current,
    superposed_density, superposed_density_field,
};
use subquantum::{Grid, ScalarField, SlitConfig};

const CURRENT_TOL: f64 = 1e-6;
const CURRENT_MASK: f64 = 1e-10;
const INTENSITY_TOL: f64 = 1e-8;
const PHASE_TOL: f64 = 1e-8;
const FRINGE_TOL: f64 = 0.01;
const EXPANDED_TOL: f64 = 1e-12;
const MIRROR_TOL: f64 = 1e-8;
const FLUX_DRIFT_TOL: f64 = 0.01;
const VARIANCE_AT_3: f64 = 3.25;
const VARIANCE_TOL: f64 = 0.02;
const SLOPE_TOL: f64 = 0.1;
const WALKER_MSD_AT_2: f64 = 2.0;
const WALKER_TOL: f64 = 0.01;
const CML_INTERFERENCE_TOL: f64 = 0.02;
const CML_MASK: f64 = 0.01;
const NON_ADDITIVE_FACTOR: f64 = 1e3;

/// Name, check, time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn default_grid() -> Grid {
    Grid::new(-15.0, 15.0, 4096).unwrap()
}

fn sixteen_times() -> Vec<f64> {
    (0..16).map(|k| 8.0 * k as f64 / 15.0).collect()
}

fn current_identity() -> Outcome {
    let cfg = SlitConfig::default();
    let grid = default_grid();
    let mut worst = (0.0, 0.0, 0.0);
    for t in sixteen_times() {
        let j = ScalarField::sample(grid, t, |x, t| total_current(&cfg, x, t)).unwrap();
        let q = ScalarField::sample(grid, t, |x, t| quantum_current(&cfg, x, t)).unwrap();
        let p = ScalarField::sample(grid, t, |x, t| superposed_density(&cfg, x, t)).unwrap();
        let cmp = compare_fields_weighted(&j, &q, &p, CURRENT_TOL, CURRENT_MASK).unwrap();
        if cmp.max_rel_deviation >= worst.0 {
            worst = (cmp.max_rel_deviation, cmp.worst_x, t);
        }
    }
    outcome(
        worst.0 <= CURRENT_TOL,
        format!("max rel dev {:.3e} at x={:.4}, t={:.4}", worst.0, worst.1, worst.2),
    )
}

fn intensity_identity() -> Outcome {
    let cfg = SlitConfig::default();
    let grid = default_grid();
    let mut worst = (0.0, 0.0, 0.0);
    for t in sixteen_times() {
        let a = intensity_field(&cfg, grid, t).unwrap();
        let b = ScalarField::sample(grid, t, |x, t| superposed_density(&cfg, x, t)).unwrap();
        // masked only where both fields are exactly zero
        let cmp = compare_fields(&a, &b, INTENSITY_TOL, 0.0).unwrap();
        if cmp.max_rel_deviation >= worst.0 {
            worst = (cmp.max_rel_deviation, cmp.worst_x, t);
        }
        // normalized forms agree too
        let na = a.normalized().unwrap();
        let nb = superposed_density_field(&cfg, grid, t).unwrap();
        let cmp = compare_fields(&na, &nb, INTENSITY_TOL, 0.0).unwrap();
        if cmp.max_rel_deviation >= worst.0 {
            worst = (cmp.max_rel_deviation, cmp.worst_x, t);
        }
    }
    outcome(
        worst.0 <= INTENSITY_TOL,
        format!("max rel dev {:.3e} at x={:.4}, t={:.4}", worst.0, worst.1, worst.2),
    )
}

fn wrapped(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

fn phase_identity() -> Outcome {
    let cfg = SlitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst = (0.0f64, 0.0, 0.0);
    for _ in 0..1000 {
        let x = rng.random_range(-15.0..15.0);
        let t = rng.random_range(0.0..8.0);
        let d = wrapped(relative_phase(&cfg, x, t) - phase_difference(&cfg, x, t)).abs();
        if d >= worst.0 {
            worst = (d, x, t);
        }
    }
    outcome(
        worst.0 <= PHASE_TOL,
        format!("max abs dev {:.3e} rad at x={:.4}, t={:.4}", worst.0, worst.1, worst.2),
    )
}

fn dark_fringes() -> Outcome {
    let cfg = SlitConfig::default();
    let t_star = cfg.coincidence_time().unwrap();
    // the third node 5 pi lies just outside +-15
    let grid = Grid::new(-20.0, 20.0, 8192).unwrap();
    let field = intensity_field(&cfg, grid, t_star).unwrap();
    let report = find_extrema(&field).unwrap();
    let found: Vec<f64> = report
        .minima_positions()
        .into_iter()
        .filter(|&x| x > 0.0)
        .take(3)
        .collect();
    let expected = [PI, 3.0 * PI, 5.0 * PI];
    if found.len() < 3 {
        return outcome(false, format!("only {} positive minima: {found:?}", found.len()));
    }
    let worst = found
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= FRINGE_TOL,
        format!("t*={t_star}, minima {found:.5?}, max offset {worst:.3e}"),
    )
}

fn expanded_current() -> Outcome {
    let cfg = SlitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst = (0.0f64, 0.0, 0.0);
    for _ in 0..10_000 {
        let x = rng.random_range(-15.0..15.0);
        let t = rng.random_range(0.0..8.0);
        let a = total_current(&cfg, x, t);
        let b = total_current_expanded(&cfg, x, t);
        let scale = a.abs().max(b.abs());
        let d = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
        if d >= worst.0 {
            worst = (d, x, t);
        }
    }
    outcome(
        worst.0 <= EXPANDED_TOL,
        format!("max rel dev {:.3e} at x={:.4}, t={:.4}", worst.0, worst.1, worst.2),
    )
}

fn trajectories() -> Outcome {
    let cfg = SlitConfig::default();
    let grid = default_grid();
    let seeds = seed_positions(&cfg, 40, 3.0, SeedSpacing::Equidistant, 0.0).unwrap();
    let set = integrate_trajectories(&cfg, &seeds, 0.0, 8.0, 0.01).unwrap();
    let crossings: usize = set.sign_changes().iter().sum();

    let n = set.len();
    let mut mirror = 0.0f64;
    for i in 0..n {
        for (a, b) in set.positions[i].iter().zip(&set.positions[n - 1 - i]) {
            mirror = mirror.max((a + b).abs());
        }
    }

    let frames: Vec<ScalarField> = set
        .times
        .iter()
        .map(|&t| intensity_field(&cfg, grid, t).unwrap())
        .collect();
    let mut drift = 0.0f64;
    for i in 0..n - 1 {
        let flux = flux_between(&frames, &set, i, i + 1).unwrap();
        let f0 = flux[0];
        for f in &flux {
            drift = drift.max((f - f0).abs() / f0);
        }
    }
    let stalled = set.stalled.iter().filter(|s| s.is_some()).count();
    outcome(
        crossings == 0 && drift <= FLUX_DRIFT_TOL && mirror <= MIRROR_TOL,
        format!(
            "{n} seeds, {crossings} sign changes, flux drift {drift:.3e}, mirror {mirror:.3e}, {stalled} stalled"
        ),
    )
}

fn ballistic_diffusion() -> Outcome {
    let cfg = SlitConfig::default();
    let run = cml_run(&cfg, default_grid(), Profile::Gaussian, 3.0, 1.0).unwrap();
    let var = *run.variance1.last().unwrap();
    let slope = run.growth_exponent().unwrap_or(f64::NAN);
    let exact = mean_square_displacement(&cfg.params, cfg.params.sigma0().powi(2), 2.0).unwrap();
    let msd = walker_ensemble_msd(&cfg.params, 1_000_000, 2.0, 0x5eed_0007).unwrap();
    let var_ok = (var - VARIANCE_AT_3).abs() / VARIANCE_AT_3 <= VARIANCE_TOL;
    let slope_ok = (slope - 2.0).abs() <= SLOPE_TOL;
    let walker_ok = (msd - WALKER_MSD_AT_2).abs() / WALKER_MSD_AT_2 <= WALKER_TOL
        && (exact - WALKER_MSD_AT_2).abs() < 1e-12;
    outcome(
        var_ok && slope_ok && walker_ok,
        format!("sigma^2(3)={var:.5}, slope={slope:.4}, walker msd(2)={msd:.5}"),
    )
}

fn cml_interference() -> Outcome {
    let cfg = SlitConfig::default();
    let grid = default_grid();
    let run = cml_run(&cfg, grid, Profile::Gaussian, 3.0, 1.0).unwrap();
    let t = run.final_state.time;
    let lattice = cml_interfere(&run.final_state, |x, t| relative_phase(&cfg, x, t)).unwrap();
    let exact = ScalarField::sample(grid, t, |x, t| total_intensity(&cfg, x, t))
        .unwrap()
        .normalized()
        .unwrap();
    let cmp = compare_fields_weighted(&lattice, &exact, &exact, CML_INTERFERENCE_TOL, CML_MASK)
        .unwrap();
    outcome(
        cmp.passed,
        format!(
            "max rel dev {:.3e} at x={:.4}, t={t}, {} points",
            cmp.max_rel_deviation, cmp.worst_x, cmp.points_compared
        ),
    )
}

fn non_additivity() -> Outcome {
    let cfg = SlitConfig::default();
    let t = 2.0;
    let field = intensity_field(&cfg, default_grid(), t).unwrap();
    let report = find_extrema(&field).unwrap();
    let threshold = NON_ADDITIVE_FACTOR * CURRENT_TOL;
    // largest interference excess over the bright fringes off the axis
    let mut best = (0.0f64, f64::NAN);
    for m in report.maxima.iter().filter(|m| m.x.abs() > 0.5) {
        let x = m.x;
        let (p1, p2) = slit_densities(&cfg, x, t);
        let v = velocity_decomposition(&cfg, x, t);
        let separate = p1 * v.v1 + p2 * v.v2;
        let total = total_current(&cfg, x, t);
        // the fringe is confirmed against the exact current as well
        let oracle = quantum_current(&cfg, x, t);
        if (total - oracle).abs() > CURRENT_TOL * total.abs().max(oracle.abs()) {
            continue;
        }
        let gap = (total - separate).abs();
        if gap > best.0 {
            best = (gap, x);
        }
    }
    outcome(
        best.0 > threshold,
        format!("|J - (J1 + J2)| = {:.3e} at x={:.4}, t={t}", best.0, best.1),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 current identity", current_identity, 5),
        ("2 intensity identity", intensity_identity, 2),
        ("3 phase identity", phase_identity, 1),
        ("4 dark fringes", dark_fringes, 1),
        ("5 expanded vs closed current", expanded_current, 1),
        ("6 no-crossing and flux tubes", trajectories, 30),
        ("7 ballistic diffusion", ballistic_diffusion, 60),
        ("8 cml interference", cml_interference, 30),
        ("9 non-additive current", non_additivity, 1),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let passed = result.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "{}: {name}: {} ({:.2}s of {budget}s{})",
            if passed { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
