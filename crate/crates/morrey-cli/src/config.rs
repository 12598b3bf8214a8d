//! Experiment configuration: a flat `key = value` text format whose
//! serialize/parse round trip reproduces the in-memory struct exactly.
//!
//! Unknown and duplicate keys are rejected so a typo cannot silently fall
//! back to a default. The `Default` configuration reproduces the reference
//! experiment: the 2D problem on `[-6, 6]^2` with `k = 10` (121 nodes per
//! axis), `p = 4`, fixed step `tau = 1e-10`, and a budget of `1e8`
//! iterations.

use std::path::PathBuf;

use morrey_core::{ConstraintSet, Grid, Node, SeminormMode};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    NotKeyValue { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// One optional post-descent analysis pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AnalysisKind {
    Symmetry,
    Bounds,
    Quasiconcavity,
    Midplane,
    GradientFloor,
    Seminorm,
    Singular,
    Gap,
    Stability,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 9] = [
        AnalysisKind::Symmetry,
        AnalysisKind::Bounds,
        AnalysisKind::Quasiconcavity,
        AnalysisKind::Midplane,
        AnalysisKind::GradientFloor,
        AnalysisKind::Seminorm,
        AnalysisKind::Singular,
        AnalysisKind::Gap,
        AnalysisKind::Stability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Symmetry => "symmetry",
            AnalysisKind::Bounds => "bounds",
            AnalysisKind::Quasiconcavity => "quasiconcavity",
            AnalysisKind::Midplane => "midplane",
            AnalysisKind::GradientFloor => "gradient_floor",
            AnalysisKind::Seminorm => "seminorm",
            AnalysisKind::Singular => "singular",
            AnalysisKind::Gap => "gap",
            AnalysisKind::Stability => "stability",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|kind| kind.name() == name)
    }
}

/// Parses a comma-separated analysis list; `all` and `none` are accepted
/// as shorthands. The result is deduplicated and kept in declaration
/// order of [`AnalysisKind::ALL`], so equal selections compare equal.
pub fn parse_analyses(text: &str) -> Result<Vec<AnalysisKind>, String> {
    let text = text.trim();
    if text.is_empty() || text == "none" {
        return Ok(Vec::new());
    }
    if text == "all" {
        return Ok(AnalysisKind::ALL.to_vec());
    }
    let mut selected = [false; AnalysisKind::ALL.len()];
    for part in text.split(',') {
        let part = part.trim();
        let kind =
            AnalysisKind::from_name(part).ok_or_else(|| format!("unknown analysis {part:?}"))?;
        selected[AnalysisKind::ALL.iter().position(|k| *k == kind).unwrap()] = true;
    }
    Ok(AnalysisKind::ALL
        .into_iter()
        .zip(selected)
        .filter_map(|(kind, on)| on.then_some(kind))
        .collect())
}

fn analyses_to_string(analyses: &[AnalysisKind]) -> String {
    if analyses.is_empty() {
        return "none".into();
    }
    if analyses.len() == AnalysisKind::ALL.len() {
        return "all".into();
    }
    analyses
        .iter()
        .map(|kind| kind.name())
        .collect::<Vec<_>>()
        .join(",")
}

/// Pinned nodes for the descent problem: either the canonical pair
/// `(0, +1) -> +1`, `(0, -1) -> -1` (in 1D the points `x = +1, -1`), or an
/// explicit list of `coordinates -> value` pins.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    Canonical,
    Explicit(Vec<Pin>),
}

/// One explicit pin: a node position in physical coordinates and its
/// prescribed value.
#[derive(Debug, Clone, PartialEq)]
pub struct Pin {
    pub coords: Vec<f64>,
    pub value: f64,
}

impl ConstraintSpec {
    fn to_string(&self) -> String {
        match self {
            ConstraintSpec::Canonical => "canonical".into(),
            ConstraintSpec::Explicit(pins) => pins
                .iter()
                .map(|pin| {
                    let mut parts: Vec<String> =
                        pin.coords.iter().map(|c| format!("{c}")).collect();
                    parts.push(format!("{}", pin.value));
                    parts.join(" ")
                })
                .collect::<Vec<_>>()
                .join("; "),
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if text == "canonical" {
            return Ok(ConstraintSpec::Canonical);
        }
        let mut pins = Vec::new();
        for group in text.split(';') {
            let numbers: Vec<f64> = group
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| format!("{tok:?} is not a number"))
                })
                .collect::<Result<_, _>>()?;
            if numbers.len() < 2 {
                return Err(format!(
                    "pin {group:?} needs coordinates followed by a value"
                ));
            }
            let (coords, value) = numbers.split_at(numbers.len() - 1);
            pins.push(Pin {
                coords: coords.to_vec(),
                value: value[0],
            });
        }
        Ok(ConstraintSpec::Explicit(pins))
    }

    /// Maps the spec onto `grid` nodes. Explicit pin coordinates must land
    /// on nodes exactly (up to round-off) and have the grid's dimension.
    pub fn resolve(&self, grid: &Grid) -> Result<ConstraintSet, ConfigError> {
        match self {
            ConstraintSpec::Canonical => Ok(ConstraintSet::canonical(grid)),
            ConstraintSpec::Explicit(pins) => {
                let mut entries = Vec::with_capacity(pins.len());
                for pin in pins {
                    if pin.coords.len() != grid.dim() {
                        return Err(ConfigError::Invalid(format!(
                            "pin has {} coordinates but the problem is {}-dimensional",
                            pin.coords.len(),
                            grid.dim()
                        )));
                    }
                    let axis_index = |x: f64| {
                        grid.index_of(x).ok_or_else(|| {
                            ConfigError::Invalid(format!("{x} is not a grid node coordinate"))
                        })
                    };
                    let node = match grid.dim() {
                        1 => Node::new(axis_index(pin.coords[0])?, 1),
                        _ => Node::new(axis_index(pin.coords[0])?, axis_index(pin.coords[1])?),
                    };
                    entries.push((node, pin.value));
                }
                ConstraintSet::new(grid, entries).map_err(|e| ConfigError::Invalid(e.to_string()))
            }
        }
    }
}

/// How the Holder seminorm scan is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeminormModeSpec {
    /// Exact for small grids, sampled otherwise.
    Auto,
    /// All live node pairs.
    Exact,
    /// A fixed number of sampled pairs.
    Sampled(usize),
}

impl SeminormModeSpec {
    pub fn to_mode(self, seed: u64) -> SeminormMode {
        match self {
            SeminormModeSpec::Auto => SeminormMode::Auto { seed },
            SeminormModeSpec::Exact => SeminormMode::Exact,
            SeminormModeSpec::Sampled(pairs) => SeminormMode::Sampled { pairs, seed },
        }
    }

    fn to_string(self) -> String {
        match self {
            SeminormModeSpec::Auto => "auto".into(),
            SeminormModeSpec::Exact => "exact".into(),
            SeminormModeSpec::Sampled(pairs) => format!("sampled:{pairs}"),
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        match text {
            "auto" => Ok(SeminormModeSpec::Auto),
            "exact" => Ok(SeminormModeSpec::Exact),
            _ => {
                let pairs = text.strip_prefix("sampled:").ok_or_else(|| {
                    format!("expected auto, exact, or sampled:<pairs>, got {text:?}")
                })?;
                pairs
                    .parse::<usize>()
                    .map(SeminormModeSpec::Sampled)
                    .map_err(|_| format!("{pairs:?} is not a pair count"))
            }
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub ell: u32,
    pub k: u32,
    pub p: f64,
    pub smoothing: f64,
    pub constraints: ConstraintSpec,
    pub tau: f64,
    pub max_iters: u64,
    pub grad_tol: f64,
    pub grad_tol_rel: f64,
    pub adaptive: bool,
    pub checkpoint_every: u64,
    pub analyses: Vec<AnalysisKind>,
    pub levels: Vec<f64>,
    pub seminorm_mode: SeminormModeSpec,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            ell: 6,
            k: 10,
            p: 4.0,
            smoothing: 0.0,
            constraints: ConstraintSpec::Canonical,
            tau: 1e-10,
            max_iters: 100_000_000,
            grad_tol: 0.0,
            grad_tol_rel: 1e-8,
            adaptive: false,
            checkpoint_every: 0,
            analyses: AnalysisKind::ALL.to_vec(),
            levels: vec![-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8],
            seminorm_mode: SeminormModeSpec::Auto,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// Keys in serialization order; `serialize` emits exactly these.
const KEYS: [&str; 17] = [
    "n",
    "ell",
    "k",
    "p",
    "smoothing",
    "constraints",
    "tau",
    "max_iters",
    "grad_tol",
    "grad_tol_rel",
    "adaptive",
    "checkpoint_every",
    "analysis",
    "levels",
    "seminorm_mode",
    "out",
    "seed",
];

fn levels_to_string(levels: &[f64]) -> String {
    levels
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-separated list of levels.
pub fn parse_levels(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| format!("{tok:?} is not a number"))
        })
        .collect()
}

impl ExperimentConfig {
    /// Renders the config as `key = value` lines in the fixed [`KEYS`]
    /// order. Floats use the shortest round-trip decimal form, so
    /// `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = match key {
                "n" => self.n.to_string(),
                "ell" => self.ell.to_string(),
                "k" => self.k.to_string(),
                "p" => format!("{}", self.p),
                "smoothing" => format!("{}", self.smoothing),
                "constraints" => self.constraints.to_string(),
                "tau" => format!("{}", self.tau),
                "max_iters" => self.max_iters.to_string(),
                "grad_tol" => format!("{}", self.grad_tol),
                "grad_tol_rel" => format!("{}", self.grad_tol_rel),
                "adaptive" => self.adaptive.to_string(),
                "checkpoint_every" => self.checkpoint_every.to_string(),
                "analysis" => analyses_to_string(&self.analyses),
                "levels" => levels_to_string(&self.levels),
                "seminorm_mode" => self.seminorm_mode.to_string(),
                "out" => self.out_dir.display().to_string(),
                "seed" => self.seed.to_string(),
                _ => unreachable!(),
            };
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// Parses the flat `key = value` format. Empty lines and `#` comments
    /// are skipped; unknown and duplicate keys are errors. Keys that do
    /// not appear keep their default values.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = ExperimentConfig::default();
        let mut seen = [false; KEYS.len()];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((lhs, rhs)) = trimmed.split_once('=') else {
                return Err(ConfigError::NotKeyValue {
                    line,
                    text: trimmed.into(),
                });
            };
            let key = lhs.trim();
            let value = rhs.trim();
            let slot =
                KEYS.iter()
                    .position(|k| *k == key)
                    .ok_or_else(|| ConfigError::UnknownKey {
                        line,
                        key: key.into(),
                    })?;
            if seen[slot] {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
            seen[slot] = true;
            let bad = |message: String| ConfigError::BadValue {
                line,
                key: key.into(),
                message,
            };
            match key {
                "n" => config.n = value.parse().map_err(|_| bad("not an integer".into()))?,
                "ell" => config.ell = value.parse().map_err(|_| bad("not an integer".into()))?,
                "k" => config.k = value.parse().map_err(|_| bad("not an integer".into()))?,
                "p" => config.p = value.parse().map_err(|_| bad("not a number".into()))?,
                "smoothing" => {
                    config.smoothing = value.parse().map_err(|_| bad("not a number".into()))?
                }
                "constraints" => config.constraints = ConstraintSpec::parse(value).map_err(bad)?,
                "tau" => config.tau = value.parse().map_err(|_| bad("not a number".into()))?,
                "max_iters" => {
                    config.max_iters = value.parse().map_err(|_| bad("not an integer".into()))?
                }
                "grad_tol" => {
                    config.grad_tol = value.parse().map_err(|_| bad("not a number".into()))?
                }
                "grad_tol_rel" => {
                    config.grad_tol_rel = value.parse().map_err(|_| bad("not a number".into()))?
                }
                "adaptive" => {
                    config.adaptive = value.parse().map_err(|_| bad("not a bool".into()))?
                }
                "checkpoint_every" => {
                    config.checkpoint_every =
                        value.parse().map_err(|_| bad("not an integer".into()))?
                }
                "analysis" => config.analyses = parse_analyses(value).map_err(bad)?,
                "levels" => config.levels = parse_levels(value).map_err(bad)?,
                "seminorm_mode" => {
                    config.seminorm_mode = SeminormModeSpec::parse(value).map_err(bad)?
                }
                "out" => config.out_dir = PathBuf::from(value),
                "seed" => config.seed = value.parse().map_err(|_| bad("not an integer".into()))?,
                _ => unreachable!(),
            }
        }
        Ok(config)
    }

    /// Structural checks that do not need a grid: dimension, exponent
    /// range, step size, iteration budget, and level finiteness.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n != 1 && self.n != 2 {
            return Err(ConfigError::Invalid(format!(
                "n must be 1 or 2, got {}",
                self.n
            )));
        }
        if !(self.p > self.n as f64) || !self.p.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "p must be finite and exceed n = {}, got {}",
                self.n, self.p
            )));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "tau must be positive and finite, got {}",
                self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(ConfigError::Invalid("max_iters must be >= 1".into()));
        }
        if !self.smoothing.is_finite() || self.smoothing < 0.0 {
            return Err(ConfigError::Invalid(format!(
                "smoothing must be nonnegative and finite, got {}",
                self.smoothing
            )));
        }
        if self.grad_tol < 0.0 || self.grad_tol_rel < 0.0 {
            return Err(ConfigError::Invalid(
                "gradient tolerances must be nonnegative".into(),
            ));
        }
        if let Some(bad) = self.levels.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "contour level {bad} is not finite"
            )));
        }
        if let ConstraintSpec::Explicit(pins) = &self.constraints {
            if pins.is_empty() {
                return Err(ConfigError::Invalid(
                    "explicit constraint list is empty".into(),
                ));
            }
            for pin in pins {
                if pin.coords.iter().any(|c| !c.is_finite()) || !pin.value.is_finite() {
                    return Err(ConfigError::Invalid("pin with nonfinite entry".into()));
                }
            }
        }
        Ok(())
    }

    /// The quasiconcavity sublist: levels strictly inside `(0, 1)`.
    /// Contour levels outside that range (0, negatives, out-of-range
    /// values) have no hull check counterpart.
    pub fn quasiconcavity_levels(&self) -> Vec<f64> {
        self.levels
            .iter()
            .copied()
            .filter(|t| *t > 0.0 && *t < 1.0)
            .collect()
    }
}
