use std::fs;
use std::path::Path;
use std::process::Command as Process;

use subquantum::dynamics::TrajectorySet;
use subquantum::{Grid, ScalarField};
use subquantum_cli::config::RawConfig;
use subquantum_cli::{
    load_config, run_pipeline, write_csv, write_heatmap, write_overlay, Command, ConfigError,
    ExperimentConfig,
};

fn config_in(dir: &Path, overrides: &[&str]) -> ExperimentConfig {
    let mut raw = RawConfig::default();
    raw.set("directory", dir.to_str().unwrap()).unwrap();
    for o in overrides {
        raw.apply_override(o).unwrap();
    }
    raw.build().unwrap()
}

/// A reduced setup that still exercises every command quickly.
const SMALL: &[&str] = &[
    "--n_points=1024",
    "--n_frames=4",
    "--t_end=1",
    "--walker_count=20000",
    "--n_seeds=10",
];

fn read_pgm(path: &Path) -> (Vec<String>, usize, usize, Vec<u16>) {
    let bytes = fs::read(path).unwrap();
    let mut lines = Vec::new();
    let mut pos = 0;
    // magic, comments, size, maxval
    while lines.iter().filter(|l: &&String| !l.starts_with('#')).count() < 3 {
        let end = pos + bytes[pos..].iter().position(|&b| b == b'\n').unwrap();
        lines.push(String::from_utf8(bytes[pos..end].to_vec()).unwrap());
        pos = end + 1;
    }
    let header: Vec<&String> = lines.iter().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(header[0], "P5");
    assert_eq!(header[2], "65535");
    let mut dims = header[1].split_whitespace().map(|s| s.parse::<usize>().unwrap());
    let (w, h) = (dims.next().unwrap(), dims.next().unwrap());
    let pixels: Vec<u16> = bytes[pos..]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    assert_eq!(pixels.len(), w * h);
    (lines, w, h, pixels)
}

#[test]
fn load_config_examples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ini");

    fs::write(&path, "").unwrap();
    assert_eq!(load_config(&path).unwrap(), ExperimentConfig::default());

    fs::write(&path, "[params]\nmass = -1\n").unwrap();
    let e = load_config(&path).unwrap_err();
    assert!(matches!(&e, ConfigError::Invalid { key, .. } if key == "params.mass"), "{e}");

    fs::write(&path, "foo = 1\n").unwrap();
    let e = load_config(&path).unwrap_err();
    assert!(matches!(&e, ConfigError::UnknownKey { key } if key == "foo"), "{e}");

    fs::write(&path, "[time]\nt1 = 4\n\nbroken\n").unwrap();
    let e = load_config(&path).unwrap_err();
    assert!(e.to_string().starts_with("line 4:"), "{e}");

    let e = load_config(&dir.path().join("missing.ini")).unwrap_err();
    assert!(matches!(e, ConfigError::Io { .. }));
}

#[test]
fn verify_on_defaults_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), &[]);
    let summary = run_pipeline(&cfg, Command::Verify).unwrap();
    assert!(summary.passed(), "{}", summary.render());
    let current = summary
        .checks
        .iter()
        .find(|c| c.name == "current-identity")
        .unwrap();
    assert!(current.worst < 1e-6);
    // only the summary is written, nothing is read back
    assert_eq!(summary.artifacts, vec![dir.path().join("summary.txt")]);
    let text = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(text, summary.render());
    for line in text.lines() {
        assert!(line.contains(": PASS worst=") && line.contains(" at x=") && line.contains(", t="));
    }
}

#[test]
fn trajectories_on_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), &[]);
    let summary = run_pipeline(&cfg, Command::Trajectories).unwrap();
    assert!(summary.passed(), "{}", summary.render());
    let names: Vec<&str> = summary.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["no-crossing", "flux-drift", "mirror-symmetry"]);
    assert!(summary.checks[1].worst < 0.01);

    let csv = fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,y,x_seed_0,x_seed_1,"));
    assert!(header.ends_with(",x_seed_39"));
}

#[test]
fn single_frame_intensity_writes_one_csv_and_one_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), &["--n_frames=1"]);
    let summary = run_pipeline(&cfg, Command::Intensity).unwrap();
    assert!(summary.passed());
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["intensity.pgm", "intensity_0000.csv", "summary.txt"]);
    let (_, w, h, _) = read_pgm(&dir.path().join("intensity.pgm"));
    assert_eq!((w, h), (4096, 1));
}

#[test]
fn formats_select_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), &["--n_frames=2", "--formats=pgm"]);
    run_pipeline(&cfg, Command::Intensity).unwrap();
    assert!(!dir.path().join("intensity_0000.csv").exists());
    assert!(dir.path().join("intensity.pgm").exists());
}

#[test]
fn every_command_runs_and_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sa = run_pipeline(&config_in(a.path(), SMALL), Command::All).unwrap();
    let sb = run_pipeline(&config_in(b.path(), SMALL), Command::All).unwrap();
    assert_eq!(sa.render(), sb.render());
    assert!(sa.checks.len() >= 14);
    for path in &sa.artifacts {
        let name = path.file_name().unwrap();
        assert_eq!(fs::read(path).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
    let moments = fs::read_to_string(a.path().join("cml_moments.csv")).unwrap();
    assert!(moments.starts_with("t,variance1,variance2\n"));
    assert!(moments.lines().count() <= 1002);
}

#[test]
fn csv_examples() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(-1.0, 1.0, 3).unwrap();
    let values = vec![0.1, 1.0 / 3.0, 2.5e-300];
    let field = ScalarField::new(grid, values.clone(), 0.0).unwrap();
    let path = dir.path().join("f.csv");
    write_csv(&field, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "x,value");
    for (line, (x, v)) in lines[1..].iter().zip(grid.points().zip(&values)) {
        let (a, b) = line.split_once(',').unwrap();
        assert_eq!(a.parse::<f64>().unwrap().to_bits(), x.to_bits());
        assert_eq!(b.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    let set = TrajectorySet {
        seeds: vec![-1.0, 1.0],
        times: vec![0.0, 0.5],
        positions: vec![vec![-1.0, -1.25], vec![1.0, 1.25]],
        stalled: vec![None, None],
        v_y: 2.0,
    };
    write_csv(&set, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,y,x_seed_0,x_seed_1");
    let row: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row, vec![0.5, 1.0, -1.25, 1.25]);

    let blocked = dir.path().join("no_such_dir").join("f.csv");
    assert!(write_csv(&field, &blocked).is_err());
}

#[test]
fn heatmap_examples() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(0.0, 1.0, 8).unwrap();
    let uniform = ScalarField::new(grid, vec![0.7; 8], 0.0).unwrap();
    let path = dir.path().join("u.pgm");
    write_heatmap(std::slice::from_ref(&uniform), &path).unwrap();
    let (comments, w, h, pixels) = read_pgm(&path);
    assert_eq!((w, h), (8, 1));
    assert!(pixels.iter().all(|&p| p == pixels[0]));
    assert!(comments.iter().any(|l| l.starts_with('#') && l.contains("upward")));

    let ramp = ScalarField::new(grid, (0..8).map(f64::from).collect(), 1.0).unwrap();
    let frames = [uniform, ramp];
    write_heatmap(&frames, &path).unwrap();
    let (_, _, h, base) = read_pgm(&path);
    assert_eq!(h, 2);
    // the later frame is the top row
    assert_eq!(base[7], 65535);

    let set = TrajectorySet {
        seeds: vec![0.0],
        times: vec![0.0, 1.0],
        positions: vec![vec![0.0, 3.0 / 7.0]],
        stalled: vec![None],
        v_y: 1.0,
    };
    let over = dir.path().join("o.pgm");
    write_overlay(&frames, &set, &over).unwrap();
    let (_, _, _, overlay) = read_pgm(&over);
    let changed: Vec<usize> = (0..base.len()).filter(|&i| base[i] != overlay[i]).collect();
    // bottom-left start, top row column 3 end
    assert!(changed.iter().all(|&i| overlay[i] == 65535));
    assert!(changed.contains(&8) && changed.contains(&3));

    assert!(write_heatmap(&[], &path).is_err());
    assert!(write_heatmap(&frames, &dir.path().join("none/x.pgm")).is_err());
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_sim");
    let dir = tempfile::tempdir().unwrap();
    let out = format!("--output.directory={}", dir.path().display());

    let ok = Process::new(exe).args(["verify", &out]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("current-identity: PASS"));

    let bad = Process::new(exe).args(["verify", "--mass=-1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("params.mass"));

    let usage = Process::new(exe).arg("explode").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    let cfg = dir.path().join("c.ini");
    fs::write(&cfg, "[slit]\nv_x = 0.5\n").unwrap();
    let runtime = Process::new(exe)
        .args(["fringes", "--config", cfg.to_str().unwrap(), &out])
        .output()
        .unwrap();
    assert_eq!(runtime.status.code(), Some(3));

    // a failing check: too few walkers for the tolerance
    let failing = Process::new(exe)
        .args(["cml", &out, "--profile=delta", "--t_end=0.5"])
        .output()
        .unwrap();
    assert_eq!(failing.status.code(), Some(1), "{}", String::from_utf8_lossy(&failing.stdout));
    assert!(String::from_utf8_lossy(&failing.stdout).contains(": FAIL"));
}
