//! Run configuration: a flat `key = value` text format plus flag overrides.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | value |
//! |---|---|
//! | `experiment` | `phase_map`, `compare`, `beta_trace`, `converge`, `learn` |
//! | `dims`, `points` | grid dimension and points per axis |
//! | `lower`, `upper` | bounds of every grid axis |
//! | `pool` | `linspace LO HI N` or a list of betas |
//! | `trials`, `steps`, `queries` | counts |
//! | `metric` | `mse` or `ll` |
//! | `epsilon` | entropy threshold (nats) |
//! | `seed` | unsigned 64-bit master seed |
//! | `mu`, `sigma` | `LO HI N` sweep axes for `phase_map` |
//! | `beta` | teacher rationality for `converge` |
//! | `integer_ratings` | `true` for whole-number restaurant ratings |
//! | `full_scale` | `true` to force 21 points per axis and 100 trials |
//! | `out` | output directory |
//!
//! Unset keys take per-experiment defaults.

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;
use voi_core::voi::linspace;
use voi_core::{MetricKind, TeacherPool, WeightGrid};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("{field}: required for experiment {experiment}")]
    Missing { field: &'static str, experiment: Experiment },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    PhaseMap,
    Compare,
    BetaTrace,
    Converge,
    Learn,
}

impl Experiment {
    pub const ALL: [Experiment; 5] =
        [Experiment::PhaseMap, Experiment::Compare, Experiment::BetaTrace, Experiment::Converge, Experiment::Learn];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PhaseMap => "phase_map",
            Experiment::Compare => "compare",
            Experiment::BetaTrace => "beta_trace",
            Experiment::Converge => "converge",
            Experiment::Learn => "learn",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            invalid("experiment", format!("unknown value {s:?} (expected phase_map, compare, beta_trace, converge or learn)"))
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evenly spaced inclusive range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linspace {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

impl Linspace {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.lower, self.upper, self.count)
    }
}

impl fmt::Display for Linspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lower, self.upper, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PoolSpec {
    List(Vec<f64>),
    Linspace(Linspace),
}

impl PoolSpec {
    pub fn betas(&self) -> Vec<f64> {
        match self {
            PoolSpec::List(v) => v.clone(),
            PoolSpec::Linspace(l) => l.values(),
        }
    }

    pub fn to_pool(&self) -> Result<TeacherPool, ConfigError> {
        TeacherPool::from_betas(&self.betas()).map_err(|e| invalid("pool", e.to_string()))
    }
}

impl fmt::Display for PoolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoolSpec::List(v) => {
                let items: Vec<String> = v.iter().map(|b| b.to_string()).collect();
                f.write_str(&items.join(", "))
            }
            PoolSpec::Linspace(l) => write!(f, "linspace {l}"),
        }
    }
}

/// Hypercube grid `[lower, upper]^dims`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dims: usize,
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<WeightGrid, ConfigError> {
        WeightGrid::cube(self.dims, self.lower, self.upper, self.points).map_err(|e| invalid("grid", e.to_string()))
    }
}

/// Partially specified configuration, as read from a file or flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub experiment: Option<Experiment>,
    pub dims: Option<usize>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub points: Option<usize>,
    pub pool: Option<PoolSpec>,
    pub trials: Option<usize>,
    pub steps: Option<usize>,
    pub queries: Option<usize>,
    pub metric: Option<MetricKind>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub mu: Option<Linspace>,
    pub sigma: Option<Linspace>,
    pub beta: Option<f64>,
    pub integer_ratings: Option<bool>,
    pub full_scale: Option<bool>,
    pub out: Option<PathBuf>,
}

fn parse_usize(field: &'static str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| invalid(field, format!("expected a non-negative integer, got {v:?}")))
}

fn parse_f64(field: &'static str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(invalid(field, format!("expected a finite number, got {v:?}"))),
    }
}

fn parse_bool(field: &'static str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(field, format!("expected true or false, got {v:?}"))),
    }
}

fn parse_metric(v: &str) -> Result<MetricKind, ConfigError> {
    match v {
        "mse" | "mean_squared_error" => Ok(MetricKind::MeanSquaredError),
        "ll" | "log_loss" => Ok(MetricKind::LogLoss),
        _ => Err(invalid("metric", format!("unknown value {v:?} (expected mse or ll)"))),
    }
}

fn tokens(v: &str) -> Vec<&str> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect()
}

fn parse_linspace(field: &'static str, parts: &[&str]) -> Result<Linspace, ConfigError> {
    if parts.len() != 3 {
        return Err(invalid(field, format!("expected `LO HI N`, got {} values", parts.len())));
    }
    let ls = Linspace {
        lower: parse_f64(field, parts[0])?,
        upper: parse_f64(field, parts[1])?,
        count: parse_usize(field, parts[2])?,
    };
    if ls.count == 0 {
        return Err(invalid(field, "linspace needs at least one value"));
    }
    Ok(ls)
}

fn parse_pool(v: &str) -> Result<PoolSpec, ConfigError> {
    let parts = tokens(v);
    if parts.first() == Some(&"linspace") {
        return Ok(PoolSpec::Linspace(parse_linspace("pool", &parts[1..])?));
    }
    if parts.is_empty() {
        return Err(invalid("pool", "needs at least one teacher"));
    }
    Ok(PoolSpec::List(parts.iter().map(|p| parse_f64("pool", p)).collect::<Result<_, _>>()?))
}

pub const KEYS: &[&str] = &[
    "experiment", "dims", "lower", "upper", "points", "pool", "trials", "steps", "queries", "metric", "epsilon", "seed",
    "mu", "sigma", "beta", "integer_ratings", "full_scale", "out",
];

impl Settings {
    /// Sets one key from its text value. Returns `Ok(false)` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
        let value = value.trim();
        match key {
            "experiment" => self.experiment = Some(Experiment::parse(value)?),
            "dims" => self.dims = Some(parse_usize("dims", value)?),
            "lower" => self.lower = Some(parse_f64("lower", value)?),
            "upper" => self.upper = Some(parse_f64("upper", value)?),
            "points" => self.points = Some(parse_usize("points", value)?),
            "pool" => self.pool = Some(parse_pool(value)?),
            "trials" => self.trials = Some(parse_usize("trials", value)?),
            "steps" => self.steps = Some(parse_usize("steps", value)?),
            "queries" => self.queries = Some(parse_usize("queries", value)?),
            "metric" => self.metric = Some(parse_metric(value)?),
            "epsilon" => self.epsilon = Some(parse_f64("epsilon", value)?),
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| invalid("seed", format!("expected an unsigned 64-bit integer, got {value:?}")))?)
            }
            "mu" => self.mu = Some(parse_linspace("mu", &tokens(value))?),
            "sigma" => self.sigma = Some(parse_linspace("sigma", &tokens(value))?),
            "beta" => self.beta = Some(parse_f64("beta", value)?),
            "integer_ratings" => self.integer_ratings = Some(parse_bool("integer_ratings", value)?),
            "full_scale" => self.full_scale = Some(parse_bool("full_scale", value)?),
            "out" => {
                if value.is_empty() {
                    return Err(invalid("out", "must not be empty"));
                }
                self.out = Some(PathBuf::from(value))
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: line.to_string() })?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate { line: i + 1, key: key.to_string() });
            }
            if !s.set(key, value)? {
                return Err(ConfigError::UnknownKey { line: i + 1, key: key.to_string() });
            }
            seen.push(key.to_string());
        }
        Ok(s)
    }

    /// Values set in `over` win.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            experiment: over.experiment.or(self.experiment),
            dims: over.dims.or(self.dims),
            lower: over.lower.or(self.lower),
            upper: over.upper.or(self.upper),
            points: over.points.or(self.points),
            pool: over.pool.or(self.pool),
            trials: over.trials.or(self.trials),
            steps: over.steps.or(self.steps),
            queries: over.queries.or(self.queries),
            metric: over.metric.or(self.metric),
            epsilon: over.epsilon.or(self.epsilon),
            seed: over.seed.or(self.seed),
            mu: over.mu.or(self.mu),
            sigma: over.sigma.or(self.sigma),
            beta: over.beta.or(self.beta),
            integer_ratings: over.integer_ratings.or(self.integer_ratings),
            full_scale: over.full_scale.or(self.full_scale),
            out: over.out.or(self.out),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let experiment = self.experiment.ok_or(ConfigError::Invalid {
            field: "experiment",
            message: "not given".into(),
        })?;
        let base = RunConfig::defaults(experiment);
        let full = self.full_scale.unwrap_or(false);
        let mut cfg = RunConfig {
            experiment,
            grid: GridSpec {
                dims: self.dims.unwrap_or(base.grid.dims),
                lower: self.lower.unwrap_or(base.grid.lower),
                upper: self.upper.unwrap_or(base.grid.upper),
                points: self.points.unwrap_or(base.grid.points),
            },
            pool: self.pool.unwrap_or(base.pool),
            trials: self.trials.unwrap_or(base.trials),
            steps: self.steps.unwrap_or(base.steps),
            queries: self.queries.unwrap_or(base.queries),
            metric: self.metric.unwrap_or(base.metric),
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            seed: self.seed.unwrap_or(base.seed),
            mu: self.mu.unwrap_or(base.mu),
            sigma: self.sigma.unwrap_or(base.sigma),
            beta: self.beta.unwrap_or(base.beta),
            integer_ratings: self.integer_ratings.unwrap_or(base.integer_ratings),
            out: self.out.unwrap_or(base.out),
        };
        if full {
            match experiment {
                Experiment::Compare | Experiment::BetaTrace => {
                    cfg.grid.points = 21;
                    cfg.trials = 100;
                    cfg.steps = 100;
                }
                Experiment::Converge => cfg.trials = 100,
                Experiment::Learn => cfg.grid.points = 21,
                Experiment::PhaseMap => {}
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub grid: GridSpec,
    pub pool: PoolSpec,
    pub trials: usize,
    pub steps: usize,
    pub queries: usize,
    pub metric: MetricKind,
    pub epsilon: f64,
    pub seed: u64,
    pub mu: Linspace,
    pub sigma: Linspace,
    pub beta: f64,
    pub integer_ratings: bool,
    pub out: PathBuf,
}

impl RunConfig {
    /// Full-size restaurant setting for `compare`, `beta_trace` and `learn`;
    /// the one-dimensional Gaussian sweep for `phase_map`; the 11-cell
    /// single-teacher check for `converge`.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = RunConfig {
            experiment,
            grid: GridSpec { dims: 3, lower: -10.0, upper: 10.0, points: 21 },
            pool: PoolSpec::Linspace(Linspace { lower: 0.0, upper: 4.0, count: 21 }),
            trials: 100,
            steps: 100,
            queries: 2000,
            metric: MetricKind::LogLoss,
            epsilon: 0.1,
            seed: 0,
            mu: Linspace { lower: -4.0, upper: 4.0, count: 33 },
            sigma: Linspace { lower: 0.2, upper: 5.0, count: 25 },
            beta: 2.0,
            integer_ratings: false,
            out: PathBuf::from("out"),
        };
        match experiment {
            Experiment::PhaseMap => {
                cfg.grid = GridSpec { dims: 1, lower: -10.0, upper: 10.0, points: 201 };
                cfg.pool = PoolSpec::Linspace(Linspace { lower: 0.05, upper: 4.0, count: 40 });
            }
            Experiment::Converge => {
                cfg.grid = GridSpec { dims: 1, lower: -10.0, upper: 10.0, points: 11 };
            }
            Experiment::Learn => cfg.trials = 1,
            Experiment::Compare | Experiment::BetaTrace => {}
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if g.dims == 0 {
            return Err(invalid("dims", "must be at least 1"));
        }
        if g.points == 0 {
            return Err(invalid("points", "must be at least 1"));
        }
        if g.lower > g.upper || (g.points > 1 && g.lower == g.upper) {
            return Err(invalid("lower", format!("must be below upper ({} vs {})", g.lower, g.upper)));
        }
        if g.points.checked_pow(g.dims as u32).is_none_or(|n| n > 50_000_000) {
            return Err(invalid("points", "grid has too many cells"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.experiment == Experiment::Learn && self.steps == 0 {
            return Err(invalid("steps", "must be at least 1 for learn"));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(invalid("epsilon", "must be non-negative"));
        }
        self.pool.to_pool()?;
        match self.experiment {
            Experiment::PhaseMap => {
                if g.dims != 1 {
                    return Err(invalid("dims", "phase_map needs a one-dimensional grid"));
                }
                if self.sigma.lower <= 0.0 || self.sigma.upper <= 0.0 {
                    return Err(invalid("sigma", "values must be positive"));
                }
            }
            Experiment::Converge if self.beta <= 0.0 => {
                return Err(invalid("beta", "must be positive"));
            }
            Experiment::Compare | Experiment::BetaTrace | Experiment::Learn if g.dims != 3 => {
                return Err(invalid("dims", "restaurant queries have three features; use dims = 3"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Same `key = value` format as the input file, fully resolved.
    pub fn to_text(&self) -> String {
        let lines = [
            ("experiment", self.experiment.to_string()),
            ("dims", self.grid.dims.to_string()),
            ("lower", self.grid.lower.to_string()),
            ("upper", self.grid.upper.to_string()),
            ("points", self.grid.points.to_string()),
            ("pool", self.pool.to_string()),
            ("trials", self.trials.to_string()),
            ("steps", self.steps.to_string()),
            ("queries", self.queries.to_string()),
            ("metric", self.metric.short_name().to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("seed", self.seed.to_string()),
            ("mu", self.mu.to_string()),
            ("sigma", self.sigma.to_string()),
            ("beta", self.beta.to_string()),
            ("integer_ratings", self.integer_ratings.to_string()),
            ("out", self.out.display().to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
