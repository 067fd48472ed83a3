//! Flat `key = value` run configuration.
//!
//! Every key has a default, so empty text is a valid configuration. Lines
//! starting with `#` and trailing `# ...` comments are ignored. Unknown keys,
//! repeated keys and constraint violations are errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use torus_ns::{LatticeSpec, SolverParams, TruncationRule};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    RandomPhiBall,
    SingleMode,
    TwoMode,
    FromCheckpoint,
}

impl IcKind {
    pub fn name(&self) -> &'static str {
        match self {
            IcKind::RandomPhiBall => "random_phi_ball",
            IcKind::SingleMode => "single_mode",
            IcKind::TwoMode => "two_mode",
            IcKind::FromCheckpoint => "from_checkpoint",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [IcKind::RandomPhiBall, IcKind::SingleMode, IcKind::TwoMode, IcKind::FromCheckpoint]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Emit {
    NormSeries,
    Certificates,
    Fields,
}

impl Emit {
    pub fn name(&self) -> &'static str {
        match self {
            Emit::NormSeries => "norm_series",
            Emit::Certificates => "certificates",
            Emit::Fields => "fields",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Emit::NormSeries, Emit::Certificates, Emit::Fields].into_iter().find(|e| e.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SolverParams,
    pub lattice: LatticeSpec,
    pub reality_symmetry: bool,
    pub ic_kind: IcKind,
    pub ic_checkpoint: Option<PathBuf>,
    pub rng_seed: u64,
    pub horizon_m: u64,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    /// The Picard cross-check runs when `horizon_m <= oracle_horizon`; 0 disables it.
    pub oracle_horizon: u64,
    pub oracle_tol: f64,
    pub bisect_steps: u32,
    pub bisect_max_delta: f64,
    /// Number of induction steps per bisection probe.
    pub bisect_horizon: u64,
    /// Worker threads; 0 leaves the choice to the thread pool.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SolverParams::default(),
            lattice: LatticeSpec::ball(4),
            reality_symmetry: false,
            ic_kind: IcKind::RandomPhiBall,
            ic_checkpoint: None,
            rng_seed: 0,
            horizon_m: 5,
            output_dir: PathBuf::from("out"),
            emit: [Emit::NormSeries, Emit::Certificates].into_iter().collect(),
            oracle_horizon: 3,
            oracle_tol: 1e-9,
            bisect_steps: 20,
            bisect_max_delta: 1.0,
            bisect_horizon: 2,
            threads: 0,
        }
    }
}

/// Keys in serialization order.
pub const KEYS: &[&str] = &[
    "epsilon",
    "beta",
    "delta",
    "decay_c",
    "fp_tol",
    "fp_max_iter",
    "substeps",
    "eps_div",
    "k_max",
    "truncation_rule",
    "reality_symmetry",
    "ic_kind",
    "ic_checkpoint",
    "rng_seed",
    "horizon_m",
    "output_dir",
    "emit",
    "oracle_horizon",
    "oracle_tol",
    "bisect_steps",
    "bisect_max_delta",
    "bisect_horizon",
    "threads",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

impl RunConfig {
    /// Sets one key from its textual value without validating cross-key constraints.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "epsilon" => *p = p.with_epsilon(num(key, value)?),
            "beta" => p.beta = num(key, value)?,
            "delta" => p.delta = num(key, value)?,
            "decay_c" => p.decay_c = num(key, value)?,
            "fp_tol" => p.fp_tol = num(key, value)?,
            "fp_max_iter" => p.fp_max_iter = num(key, value)?,
            "substeps" => p.substeps = num(key, value)?,
            "eps_div" => p.eps_div = num(key, value)?,
            "k_max" => self.lattice.k_max = num(key, value)?,
            "truncation_rule" => {
                self.lattice.truncation_rule = TruncationRule::from_name(value).ok_or_else(|| {
                    CliError::Config(format!("truncation_rule: expected euclidean_ball or sup_cube, got {value:?}"))
                })?
            }
            "reality_symmetry" => self.reality_symmetry = flag(key, value)?,
            "ic_kind" => {
                self.ic_kind = IcKind::from_name(value)
                    .ok_or_else(|| CliError::Config(format!("ic_kind: unknown kind {value:?}")))?
            }
            "ic_checkpoint" => {
                self.ic_checkpoint = (!value.is_empty()).then(|| PathBuf::from(value));
            }
            "rng_seed" => self.rng_seed = num(key, value)?,
            "horizon_m" => self.horizon_m = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "emit" => {
                let mut set = BTreeSet::new();
                for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    set.insert(
                        Emit::from_name(name)
                            .ok_or_else(|| CliError::Config(format!("emit: unknown output {name:?}")))?,
                    );
                }
                self.emit = set;
            }
            "oracle_horizon" => self.oracle_horizon = num(key, value)?,
            "oracle_tol" => self.oracle_tol = num(key, value)?,
            "bisect_steps" => self.bisect_steps = num(key, value)?,
            "bisect_max_delta" => self.bisect_max_delta = num(key, value)?,
            "bisect_horizon" => self.bisect_horizon = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Cross-key and range checks. Messages name the violated inequality.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.lattice.k_max == 0 {
            return bad("k_max must be >= 1");
        }
        if self.horizon_m == 0 {
            return bad("horizon_m must be >= 1");
        }
        if self.ic_kind == IcKind::FromCheckpoint && self.ic_checkpoint.is_none() {
            return bad("ic_kind = from_checkpoint needs ic_checkpoint");
        }
        if !(self.oracle_tol > 0.0) {
            return bad("oracle_tol must be > 0");
        }
        if self.bisect_steps == 0 {
            return bad("bisect_steps must be >= 1");
        }
        if !(self.bisect_max_delta > 0.0 && self.bisect_max_delta.is_finite()) {
            return bad("bisect_max_delta must be > 0");
        }
        if self.bisect_horizon == 0 {
            return bad("bisect_horizon must be >= 1");
        }
        Ok(())
    }

    /// Resolved configuration text; parses back to an identical config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.value_of(key));
        }
        out
    }

    pub fn value_of(&self, key: &str) -> String {
        let p = &self.params;
        match key {
            "epsilon" => format!("{:?}", p.epsilon),
            "beta" => format!("{:?}", p.beta),
            "delta" => format!("{:?}", p.delta),
            "decay_c" => format!("{:?}", p.decay_c),
            "fp_tol" => format!("{:?}", p.fp_tol),
            "fp_max_iter" => p.fp_max_iter.to_string(),
            "substeps" => p.substeps.to_string(),
            "eps_div" => format!("{:?}", p.eps_div),
            "k_max" => self.lattice.k_max.to_string(),
            "truncation_rule" => self.lattice.truncation_rule.name().to_string(),
            "reality_symmetry" => self.reality_symmetry.to_string(),
            "ic_kind" => self.ic_kind.name().to_string(),
            "ic_checkpoint" => self.ic_checkpoint.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            "rng_seed" => self.rng_seed.to_string(),
            "horizon_m" => self.horizon_m.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "emit" => self.emit.iter().map(Emit::name).collect::<Vec<_>>().join(","),
            "oracle_horizon" => self.oracle_horizon.to_string(),
            "oracle_tol" => format!("{:?}", self.oracle_tol),
            "bisect_steps" => self.bisect_steps.to_string(),
            "bisect_max_delta" => format!("{:?}", self.bisect_max_delta),
            "bisect_horizon" => self.bisect_horizon.to_string(),
            "threads" => self.threads.to_string(),
            _ => unreachable!("value_of called with unknown key {key}"),
        }
    }
}

/// Splits one line into `(key, value)`, or `None` for blank and comment lines.
fn split_line(line: &str) -> Option<std::result::Result<(&str, &str), ()>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim();
    if body.is_empty() {
        return None;
    }
    Some(body.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or(()))
}

/// Parses and validates configuration text on top of the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    apply_text(&mut cfg, text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies configuration text to `cfg` without the final validation, so that
/// command-line overrides can still follow.
pub fn apply_text(cfg: &mut RunConfig, text: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let Some(parsed) = split_line(line) else { continue };
        let (key, value) = parsed.map_err(|_| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        if !seen.insert(key.to_string()) {
            return Err(CliError::Config(format!("line {}: key {key:?} given twice", n + 1)));
        }
        cfg.set(key, value).map_err(|e| CliError::Config(format!("line {}: {}", n + 1, e.detail())))?;
    }
    Ok(())
}
