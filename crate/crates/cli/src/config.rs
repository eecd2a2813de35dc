//! `key = value` run configuration.
//!
//! ```text
//! # 1D focusing run
//! preset = conservation
//! params.dim = 1
//! params.p = 1.8
//! params.gamma = 0.05
//! params.m = 0.55
//! params.M = 6
//! params.M0 = 4
//! grid.length = 40
//! grid.points = 1024
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ghartree_core::{ChirpConvention, Grid, IntegratorConfig, ModelParameters, ParamSpec, ZeroMode};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("key '{key}' set twice, on lines {first} and {second}")]
    Duplicate { key: String, first: usize, second: usize },
    #[error("line {line}: {key}: {msg}")]
    InvalidValue { line: usize, key: String, msg: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Conservation,
    Virial,
    BlowupDemo,
    ScatterDemo,
    InequalitySuite,
    ParamsReport,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Conservation => "conservation",
            Preset::Virial => "virial",
            Preset::BlowupDemo => "blowup-demo",
            Preset::ScatterDemo => "scatter-demo",
            Preset::InequalitySuite => "inequality-suite",
            Preset::ParamsReport => "params-report",
        }
    }

    /// Presets that integrate the equation and so need a grid.
    pub fn needs_grid(&self) -> bool {
        matches!(
            self,
            Preset::Conservation | Preset::Virial | Preset::BlowupDemo | Preset::ScatterDemo
        )
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "conservation" => Preset::Conservation,
            "virial" => Preset::Virial,
            "blowup-demo" => Preset::BlowupDemo,
            "scatter-demo" => Preset::ScatterDemo,
            "inequality-suite" => Preset::InequalitySuite,
            "params-report" => Preset::ParamsReport,
            other => return Err(format!("unknown preset '{other}'")),
        })
    }
}

/// How the chirp of the initial data is chosen (always in the `b|x|²/4` convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChirpChoice {
    None,
    Fixed(f64),
    /// `factor ×` the negative threshold from the chirp ranges.
    BelowThreshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Gaussian {
        amplitude: f64,
        sigma: f64,
        chirp: ChirpChoice,
    },
    PowerWeight {
        amplitude: f64,
        m: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputToggles {
    pub dir: PathBuf,
    pub timeseries: bool,
    pub snapshot_times: Vec<f64>,
    pub reports: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub b_values: Vec<f64>,
    pub simulate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSpec {
    /// Pseudo-conformal times `τ` at which the residual is evaluated.
    pub taus: Vec<f64>,
    pub sobolev: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Preset,
    pub params: ModelParameters,
    pub chirp_convention: ChirpConvention,
    pub grid: Option<Grid>,
    pub integrator: IntegratorConfig,
    pub initial: InitialSpec,
    pub output: OutputToggles,
    pub seed: u64,
    pub scan: ScanSpec,
    pub scatter: ScatterSpec,
    pub suite_level: u32,
    /// Key/value pairs in file order, for the manifest.
    pub entries: Vec<(String, String)>,
}

const KEYS: &[&str] = &[
    "preset",
    "seed",
    "params.dim",
    "params.p",
    "params.gamma",
    "params.mu",
    "params.m",
    "params.M",
    "params.M0",
    "params.b",
    "params.zero_mode",
    "params.chirp_convention",
    "grid.length",
    "grid.points",
    "integrator.dt",
    "integrator.t_end",
    "integrator.record_every",
    "integrator.grad_factor",
    "integrator.tail_threshold",
    "integrator.modulus_floor",
    "initial.kind",
    "initial.amplitude",
    "initial.sigma",
    "initial.m",
    "initial.chirp",
    "initial.chirp_factor",
    "output.dir",
    "output.timeseries",
    "output.snapshots",
    "output.reports",
    "scan.b",
    "scan.simulate",
    "scatter.tau",
    "scatter.sobolev",
    "suite.level",
];

struct Entries {
    map: HashMap<String, (String, usize)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.map.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| ConfigError::InvalidValue {
                line,
                key: key.to_string(),
                msg: e.to_string(),
            }),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some((v, line)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| ConfigError::InvalidValue {
                        line,
                        key: key.to_string(),
                        msg: format!("'{s}': {e}"),
                    })
                })
                .collect(),
        }
    }

    fn invalid(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            line: self.raw(key).map_or(0, |(_, l)| l),
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}

fn tokenize(text: &str) -> Result<(Entries, Vec<(String, String)>), ConfigError> {
    let mut map: HashMap<String, (String, usize)> = HashMap::new();
    let mut order = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: "empty key or value".into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if let Some((_, first)) = map.get(key) {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                first: *first,
                second: line,
            });
        }
        map.insert(key.to_string(), (value.to_string(), line));
        order.push((key.to_string(), value.to_string()));
    }
    Ok((Entries { map }, order))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let (e, entries) = tokenize(text)?;
    let preset: Preset = e.required("preset")?;
    let convention: ChirpConvention = e.or("params.chirp_convention", ChirpConvention::Quarter)?;
    let zero_mode: ZeroMode = e.or("params.zero_mode", ZeroMode::default())?;
    let b = convention.to_quarter(e.or("params.b", 0.0)?);
    let spec = ParamSpec {
        dim: e.required("params.dim")?,
        p: e.required("params.p")?,
        gamma: e.required("params.gamma")?,
        mu: e.or("params.mu", 1.0)?,
        m: e.required("params.m")?,
        big_m: e.required("params.M")?,
        m0: e.required("params.M0")?,
        b,
    };
    let params =
        ModelParameters::with_zero_mode(spec, zero_mode).map_err(|err| ConfigError::Validation(err.to_string()))?;
    // The model is only defined for 1 < p < 2 and 0 < γ; other regime
    // conditions are reported by the presets rather than rejected here.
    let failed: Vec<String> = ["p < 2", "γ > 0"]
        .iter()
        .filter_map(|id| params.report().check(id))
        .filter(|c| !c.satisfied)
        .map(|c| c.message())
        .collect();
    if !failed.is_empty() {
        return Err(ConfigError::Validation(failed.join("; ")));
    }

    let grid = match (e.get::<f64>("grid.length")?, e.get::<usize>("grid.points")?) {
        (Some(l), Some(n)) => {
            Some(Grid::cube(spec.dim, l, n).map_err(|err| e.invalid("grid.points", err.to_string()))?)
        }
        (None, None) if !preset.needs_grid() => None,
        (None, _) => return Err(ConfigError::Missing("grid.length".into())),
        (_, None) => return Err(ConfigError::Missing("grid.points".into())),
    };

    let mut integrator = IntegratorConfig::new(e.or("integrator.dt", 1e-3)?, e.or("integrator.t_end", 1.0)?);
    integrator.record_every = e.or("integrator.record_every", 1)?;
    integrator.grad_factor = e.or("integrator.grad_factor", integrator.grad_factor)?;
    integrator.tail_threshold = e.or("integrator.tail_threshold", integrator.tail_threshold)?;
    integrator.modulus_floor = e.or("integrator.modulus_floor", 0.0)?;
    integrator.snapshot_times = e.list("output.snapshots")?;
    integrator
        .validate(&params)
        .map_err(|err| ConfigError::Validation(err.to_string()))?;

    let chirp = match (e.raw("initial.chirp"), e.get::<f64>("initial.chirp_factor")?) {
        (None, None) => ChirpChoice::None,
        (None, Some(_)) => return Err(e.invalid("initial.chirp_factor", "needs initial.chirp = below-threshold")),
        (Some(("below-threshold", _)), f) => {
            let f = f.unwrap_or(1.025);
            if !(f >= 1.0) {
                return Err(e.invalid("initial.chirp_factor", "must be at least 1"));
            }
            ChirpChoice::BelowThreshold(f)
        }
        (Some(_), Some(_)) => return Err(e.invalid("initial.chirp_factor", "only used with below-threshold")),
        (Some(_), None) => ChirpChoice::Fixed(convention.to_quarter(e.required("initial.chirp")?)),
    };
    let amplitude = e.or("initial.amplitude", 0.3)?;
    let initial = match e.or::<String>("initial.kind", "gaussian".into())?.as_str() {
        "gaussian" => InitialSpec::Gaussian {
            amplitude,
            sigma: e.or("initial.sigma", 1.0)?,
            chirp,
        },
        "power" => {
            if chirp != ChirpChoice::None {
                return Err(e.invalid("initial.chirp", "chirps apply to Gaussian data only"));
            }
            InitialSpec::PowerWeight {
                amplitude,
                m: e.or("initial.m", params.m())?,
            }
        }
        other => return Err(e.invalid("initial.kind", format!("unknown kind '{other}' (gaussian, power)"))),
    };

    let output = OutputToggles {
        dir: e.or("output.dir", PathBuf::from("out"))?,
        timeseries: e.or("output.timeseries", true)?,
        snapshot_times: integrator.snapshot_times.clone(),
        reports: e.or("output.reports", true)?,
    };
    let scan = ScanSpec {
        b_values: e
            .list("scan.b")?
            .into_iter()
            .map(|b| convention.to_quarter(b))
            .collect(),
        simulate: e.or("scan.simulate", false)?,
    };
    let scatter = ScatterSpec {
        taus: e.list("scatter.tau")?,
        sobolev: e.or("scatter.sobolev", 1.0)?,
    };
    let suite_level: u32 = e.or("suite.level", 0)?;
    if suite_level > 1 {
        return Err(e.invalid("suite.level", "must be 0 or 1"));
    }

    Ok(RunConfig {
        preset,
        params,
        chirp_convention: convention,
        grid,
        integrator,
        initial,
        output,
        seed: e.or("seed", 0)?,
        scan,
        scatter,
        suite_level,
        entries,
    })
}
