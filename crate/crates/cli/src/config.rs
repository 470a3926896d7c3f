//! Experiment configuration: flat `key = value` text under `[section]` headers.
//!
//! ```text
//! [slit]
//! X = 2.0        # half the slit separation
//! v_x = -0.5
//!
//! [cml]
//! profile = gaussian
//! ```
//!
//! `#` and `;` start comments. Every key can also be set from the command
//! line as `--section.key=value`, or `--key=value` since key names are unique
//! across sections.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use subquantum::cml::Profile;
use subquantum::dynamics::SeedSpacing;
use subquantum::{Grid, PhysicalParams, SlitConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("malformed override `{0}`, expected --key=value")]
    Override(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

const SECTIONS: &[(&str, &[&str])] = &[
    ("params", &["hbar_eff", "mass", "sigma0"]),
    ("slit", &["X", "v_x", "v_y", "phi0", "amplitude_ratio"]),
    ("grid", &["x_min", "x_max", "n_points"]),
    ("time", &["t0", "t1", "n_frames"]),
    ("trajectory", &["n_seeds", "seed_span_sigmas", "dt_init", "spacing"]),
    ("cml", &["profile", "safety", "walker_count", "rng_seed", "t_end"]),
    ("output", &["directory", "formats"]),
];

/// Resolves `section.key` or a bare key to its canonical `section.key` form.
fn canonical_key(key: &str) -> Result<String> {
    let unknown = || ConfigError::UnknownKey {
        key: key.to_string(),
    };
    match key.split_once('.') {
        Some((section, name)) => SECTIONS
            .iter()
            .find(|(s, keys)| *s == section && keys.contains(&name))
            .map(|_| key.to_string())
            .ok_or_else(unknown),
        None => SECTIONS
            .iter()
            .find(|(_, keys)| keys.contains(&key))
            .map(|(s, _)| format!("{s}.{key}"))
            .ok_or_else(unknown),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
    pub n_frames: usize,
}

impl TimeWindow {
    /// Evenly spaced frame times, ending exactly at `t1`.
    pub fn frame_times(&self) -> Vec<f64> {
        if self.n_frames == 1 {
            return vec![self.t0];
        }
        let last = self.n_frames - 1;
        (0..self.n_frames)
            .map(|k| {
                if k == last {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * k as f64 / last as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySettings {
    pub n_seeds: usize,
    pub seed_span_sigmas: f64,
    pub dt_init: f64,
    pub spacing: SeedSpacing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmlSettings {
    pub profile: Profile,
    pub safety: f64,
    pub walker_count: usize,
    pub rng_seed: u64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub pgm: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub formats: Formats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub slit: SlitConfig,
    pub grid: Grid,
    pub time: TimeWindow,
    pub trajectory: TrajectorySettings,
    pub cml: CmlSettings,
    pub output: OutputSettings,
}

impl ExperimentConfig {
    pub fn params(&self) -> &PhysicalParams {
        &self.slit.params
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        RawConfig::default()
            .build()
            .expect("built-in defaults are valid")
    }
}

/// Key/value pairs as written, before validation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        let mut section: Option<&str> = None;
        let mut seen_at = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let body = line
                .find(['#', ';'])
                .map_or(line, |cut| &line[..cut])
                .trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                    line: line_no,
                    message: format!("unterminated section header `{body}`"),
                })?;
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::UnknownKey {
                        key: format!("[{name}]"),
                    });
                }
                section = Some(name);
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{body}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: "missing key before `=`".into(),
                });
            }
            let qualified = match section {
                Some(s) => format!("{s}.{key}"),
                None => key.to_string(),
            };
            let canonical = canonical_key(&qualified)?;
            if let Some(first) = seen_at.insert(canonical.clone(), line_no) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("`{canonical}` already set on line {first}"),
                });
            }
            raw.values.insert(canonical, value.to_string());
        }
        Ok(raw)
    }

    /// Applies one `--key=value` argument; the leading dashes are optional.
    pub fn apply_override(&mut self, arg: &str) -> Result<()> {
        let body = arg.trim_start_matches('-');
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(arg.to_string()))?;
        let key = canonical_key(key.trim())?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = canonical_key(key)?;
        self.values.insert(key, value.into());
        Ok(())
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.text(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::Invalid {
                key: key.to_string(),
                reason: format!("cannot parse `{v}`"),
            }),
        }
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.parsed(key, default)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(key, "must be finite"))
        }
    }

    pub fn build(&self) -> Result<ExperimentConfig> {
        let params = PhysicalParams::new(
            self.number("params.hbar_eff", 1.0)?,
            self.number("params.mass", 1.0)?,
            self.number("params.sigma0", 1.0)?,
        )
        .map_err(core_error("params"))?;
        let (phi0, ratio) = (
            self.number("slit.phi0", 0.0)?,
            self.number("slit.amplitude_ratio", 1.0)?,
        );
        let slit = SlitConfig::new(
            params,
            self.number("slit.X", 2.0)?,
            self.number("slit.v_x", -0.5)?,
            self.number("slit.v_y", 1.0)?,
        )
        .and_then(|s| s.with_phi0(phi0))
        .and_then(|s| s.with_amplitude_ratio(ratio))
        .map_err(core_error("slit"))?;

        let x_min = self.number("grid.x_min", -15.0)?;
        let x_max = self.number("grid.x_max", 15.0)?;
        let n_points: usize = self.parsed("grid.n_points", 4096)?;
        if !(x_max > x_min) {
            return Err(invalid("grid.x_max", "must exceed grid.x_min"));
        }
        if n_points < 5 {
            return Err(invalid("grid.n_points", "need at least 5 points"));
        }
        let grid = Grid::new(x_min, x_max, n_points).map_err(|e| invalid("grid", &e.to_string()))?;

        let time = TimeWindow {
            t0: self.number("time.t0", 0.0)?,
            t1: self.number("time.t1", 8.0)?,
            n_frames: self.parsed("time.n_frames", 16)?,
        };
        if time.t0 < 0.0 {
            return Err(invalid("time.t0", "must be >= 0"));
        }
        if time.n_frames < 1 {
            return Err(invalid("time.n_frames", "need at least one frame"));
        }
        if !(time.t1 > time.t0) {
            return Err(invalid("time.t1", "must exceed time.t0"));
        }

        let spacing = match self.text("trajectory.spacing").unwrap_or("equidistant") {
            "equidistant" => SeedSpacing::Equidistant,
            "quantile" => SeedSpacing::Quantile,
            other => {
                return Err(invalid(
                    "trajectory.spacing",
                    &format!("`{other}` is not one of equidistant, quantile"),
                ))
            }
        };
        let trajectory = TrajectorySettings {
            n_seeds: self.parsed("trajectory.n_seeds", 40)?,
            seed_span_sigmas: self.number("trajectory.seed_span_sigmas", 3.0)?,
            dt_init: self.number("trajectory.dt_init", 0.01)?,
            spacing,
        };
        if trajectory.n_seeds < 2 {
            return Err(invalid("trajectory.n_seeds", "need at least two seeds"));
        }
        if !(trajectory.seed_span_sigmas > 0.0) {
            return Err(invalid("trajectory.seed_span_sigmas", "must be > 0"));
        }
        if !(trajectory.dt_init > 0.0) {
            return Err(invalid("trajectory.dt_init", "must be > 0"));
        }

        let profile = match self.text("cml.profile").unwrap_or("gaussian") {
            "gaussian" => Profile::Gaussian,
            "delta" => Profile::Delta,
            other => {
                return Err(invalid(
                    "cml.profile",
                    &format!("`{other}` is not one of gaussian, delta"),
                ))
            }
        };
        let cml = CmlSettings {
            profile,
            safety: self.number("cml.safety", 1.0)?,
            walker_count: self.parsed("cml.walker_count", 1_000_000)?,
            rng_seed: self.parsed("cml.rng_seed", 1)?,
            t_end: self.number("cml.t_end", 3.0)?,
        };
        if !(cml.safety > 0.0 && cml.safety <= 1.0) {
            return Err(invalid("cml.safety", "must lie in (0, 1]"));
        }
        if cml.walker_count < 1 {
            return Err(invalid("cml.walker_count", "need at least one walker"));
        }
        if !(cml.t_end > 0.0) {
            return Err(invalid("cml.t_end", "must be > 0"));
        }
        // the lattice needs room for both packets
        let reach = slit.half_separation() + 6.0 * params.sigma0();
        if grid.x_min() > -reach || grid.x_max() < reach {
            return Err(invalid(
                "grid",
                &format!("the lattice needs the grid to cover +-{reach}"),
            ));
        }

        let mut formats = Formats {
            csv: false,
            pgm: false,
        };
        for f in self
            .text("output.formats")
            .unwrap_or("csv,pgm")
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
        {
            match f {
                "csv" => formats.csv = true,
                "pgm" => formats.pgm = true,
                other => {
                    return Err(invalid(
                        "output.formats",
                        &format!("`{other}` is not one of csv, pgm"),
                    ))
                }
            }
        }
        let directory = PathBuf::from(self.text("output.directory").unwrap_or("out"));
        if directory.as_os_str().is_empty() {
            return Err(invalid("output.directory", "must not be empty"));
        }

        Ok(ExperimentConfig {
            slit,
            grid,
            time,
            trajectory,
            cml,
            output: OutputSettings { directory, formats },
        })
    }
}

fn invalid(key: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn core_error(section: &'static str) -> impl Fn(subquantum::Error) -> ConfigError {
    move |e| match e {
        subquantum::Error::InvalidParameter { name, reason, .. } => {
            let name = if name == "half_separation" { "X" } else { name };
            invalid(&format!("{section}.{name}"), reason)
        }
        other => invalid(section, &other.to_string()),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    RawConfig::parse(text)?.build()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    load_config_with(path, &[])
}

/// Loads `path` and applies command-line overrides before validating.
pub fn load_config_with(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut raw = RawConfig::parse(&text)?;
    for o in overrides {
        raw.apply_override(o)?;
    }
    raw.build()
}
