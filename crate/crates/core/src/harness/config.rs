//! Experiment configuration: a flat INI-like file with `[problem]`, `[algorithm]`, `[bias]`
//! and `[output]` sections of `key = value` lines. `#` and `;` start comments.
//!
//! ```text
//! [problem]
//! name = stochastic_quadratic
//! dim = 10
//! kappa = 10
//! seed = 3
//!
//! [algorithm]
//! c = 0.1
//! theta = 0.6
//! iterations = 10000
//! replications = 50
//!
//! [bias]
//! mode = deterministic
//! q = 0.1
//! nu = 0.6
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_CHECKPOINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },

    #[error("line {line}: unknown key \"{key}\"")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key \"{key}\" (first set on line {first})")]
    DuplicateKey { line: usize, key: String, first: usize },

    #[error("line {line}: key \"{key}\" expects {expected}, got \"{found}\"")]
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        found: String,
    },

    #[error("{}key \"{key}\": {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    RangeViolation {
        line: Option<usize>,
        key: String,
        message: String,
    },

    #[error("missing required key \"{key}\"")]
    MissingKey { key: String },
}

impl ConfigError {
    /// Key the error is about, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } | ConfigError::UnknownSection { .. } => None,
            ConfigError::UnknownKey { key, .. }
            | ConfigError::DuplicateKey { key, .. }
            | ConfigError::TypeMismatch { key, .. }
            | ConfigError::RangeViolation { key, .. }
            | ConfigError::MissingKey { key } => Some(key),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    StochasticQuadratic { dim: usize, kappa: f64, seed: u64 },
    L1LeastSquares { dim: usize, lambda: f64, seed: u64 },
    SimplexRisk { dim: usize, seed: u64 },
    BlockCoupled { d1: usize, d2: usize, rho: f64, seed: u64 },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::StochasticQuadratic { .. } => "stochastic_quadratic",
            ProblemSpec::L1LeastSquares { .. } => "l1_least_squares",
            ProblemSpec::SimplexRisk { .. } => "simplex_risk",
            ProblemSpec::BlockCoupled { .. } => "block_coupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    Quadratic,
    Entropy,
}

impl AuxKind {
    pub fn name(self) -> &'static str {
        match self {
            AuxKind::Quadratic => "quadratic",
            AuxKind::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasKind {
    None,
    Deterministic,
    Random,
}

impl BiasKind {
    pub fn name(self) -> &'static str {
        match self {
            BiasKind::None => "none",
            BiasKind::Deterministic => "deterministic",
            BiasKind::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    pub mode: BiasKind,
    pub q: f64,
    pub nu: f64,
    /// Deterministic direction; the first basis vector when absent.
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    /// Falls back to the problem's recommended auxiliary function.
    pub aux: Option<AuxKind>,
    pub c: f64,
    pub theta: f64,
    pub bias: BiasSpec,
    pub iterations: usize,
    pub replications: usize,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
    pub decomposed: bool,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// θ > 1/2
    pub fn conforms_a14(&self) -> bool {
        self.theta > 0.5 && self.theta <= 1.0
    }

    /// θ + ν > 1, or no bias.
    pub fn conforms_a16(&self) -> bool {
        self.bias.mode == BiasKind::None || self.bias.q == 0.0 || self.theta + self.bias.nu > 1.0
    }

    /// Canonical rendering; parsing it back yields an equal config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# conforms_a14 = {}", self.conforms_a14());
        let _ = writeln!(s, "# conforms_a16 = {}", self.conforms_a16());
        let _ = writeln!(s, "[problem]");
        let _ = writeln!(s, "name = {}", self.problem.name());
        match &self.problem {
            ProblemSpec::StochasticQuadratic { dim, kappa, seed } => {
                let _ = writeln!(s, "dim = {dim}\nkappa = {kappa}\nseed = {seed}");
            }
            ProblemSpec::L1LeastSquares { dim, lambda, seed } => {
                let _ = writeln!(s, "dim = {dim}\nlambda = {lambda}\nseed = {seed}");
            }
            ProblemSpec::SimplexRisk { dim, seed } => {
                let _ = writeln!(s, "dim = {dim}\nseed = {seed}");
            }
            ProblemSpec::BlockCoupled { d1, d2, rho, seed } => {
                let _ = writeln!(s, "d1 = {d1}\nd2 = {d2}\nrho = {rho}\nseed = {seed}");
            }
        }
        let _ = writeln!(s, "\n[algorithm]");
        if let Some(aux) = self.aux {
            let _ = writeln!(s, "aux = {}", aux.name());
        }
        let _ = writeln!(s, "c = {}\ntheta = {}", self.c, self.theta);
        let _ = writeln!(s, "iterations = {}\nreplications = {}\nseed = {}", self.iterations, self.replications, self.seed);
        let _ = writeln!(s, "checkpoints = {}", join(&self.checkpoints));
        let _ = writeln!(s, "decomposed = {}", self.decomposed);
        let _ = writeln!(s, "\n[bias]");
        let _ = writeln!(s, "mode = {}\nq = {}\nnu = {}", self.bias.mode.name(), self.bias.q, self.bias.nu);
        if let Some(d) = &self.bias.direction {
            let _ = writeln!(s, "direction = {}", join(d));
        }
        if let Some(dir) = &self.out_dir {
            let _ = writeln!(s, "\n[output]\ndir = {}", dir.display());
        }
        s
    }
}

fn join<V: std::fmt::Display>(v: &[V]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// `count` log-spaced integers from 1 to `n`, deduplicated.
pub fn log_spaced_checkpoints(n: usize, count: usize) -> Vec<usize> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![n];
    }
    let top = (n as f64).log10();
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let v = 10f64.powf(top * i as f64 / (count - 1) as f64).round() as usize;
            v.clamp(1, n)
        })
        .collect();
    out.dedup();
    out
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("problem", &["name", "dim", "kappa", "lambda", "d1", "d2", "rho", "seed"]),
    (
        "algorithm",
        &["aux", "c", "theta", "iterations", "replications", "seed", "checkpoints", "checkpoint_count", "decomposed"],
    ),
    ("bias", &["mode", "q", "nu", "direction"]),
    ("output", &["dir"]),
];

struct Entry {
    value: String,
    line: usize,
}

struct Entries(BTreeMap<(String, String), Entry>);

impl Entries {
    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.0.get(&(section.to_string(), key.to_string()))
    }

    fn parse<V: std::str::FromStr>(&self, section: &str, key: &str, expected: &'static str) -> Result<Option<(V, usize)>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<V>().map(|v| Some((v, e.line))).map_err(|_| ConfigError::TypeMismatch {
                line: e.line,
                key: key.to_string(),
                expected,
                found: e.value.clone(),
            }),
        }
    }

    fn float(&self, section: &str, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        let v = self.parse::<f64>(section, key, "a number")?;
        if let Some((x, line)) = v {
            if !x.is_finite() {
                return Err(range(Some(line), key, "must be finite"));
            }
        }
        Ok(v)
    }

    fn count(&self, section: &str, key: &str) -> Result<Option<(usize, usize)>, ConfigError> {
        self.parse::<usize>(section, key, "a non-negative integer")
    }

    fn seed(&self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        Ok(self.parse::<u64>(section, key, "a 64-bit unsigned integer")?.map(|(v, _)| v))
    }

    fn list<V: std::str::FromStr>(&self, section: &str, key: &str, expected: &'static str) -> Result<Option<(Vec<V>, usize)>, ConfigError> {
        let Some(e) = self.raw(section, key) else {
            return Ok(None);
        };
        let items: Result<Vec<V>, _> = e.value.split(',').map(|s| s.trim().parse::<V>()).collect();
        items.map(|v| Some((v, e.line))).map_err(|_| ConfigError::TypeMismatch {
            line: e.line,
            key: key.to_string(),
            expected,
            found: e.value.clone(),
        })
    }
}

fn range(line: Option<usize>, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::RangeViolation {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    line[..cut].trim()
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut section: Option<&'static [&'static str]> = None;
    let mut section_name = String::new();
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        if let Some(inner) = body.strip_prefix('[') {
            let name = inner.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("malformed section header \"{body}\""),
            })?;
            let name = name.trim();
            let (_, keys) = SECTIONS.iter().find(|(s, _)| *s == name).ok_or_else(|| ConfigError::UnknownSection {
                line,
                section: name.to_string(),
            })?;
            section = Some(keys);
            section_name = name.to_string();
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected key = value, got \"{body}\""),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let keys = section.ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("key \"{key}\" appears before any section header"),
        })?;
        if !keys.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        }
        if value.is_empty() {
            return Err(ConfigError::TypeMismatch {
                line,
                key: key.to_string(),
                expected: "a value",
                found: String::new(),
            });
        }
        let slot = (section_name.clone(), key.to_string());
        if let Some(first) = map.get(&slot) {
            let first: &Entry = first;
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first: first.line,
            });
        }
        map.insert(
            slot,
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(Entries(map))
}

fn reject_unused(e: &Entries, section: &str, keys: &[&str], problem: &str) -> Result<(), ConfigError> {
    for key in keys {
        if let Some(entry) = e.raw(section, key) {
            return Err(range(Some(entry.line), key, format!("does not apply to problem {problem}")));
        }
    }
    Ok(())
}

fn positive_dim(e: &Entries, key: &str, min: usize) -> Result<usize, ConfigError> {
    match e.count("problem", key)? {
        None => Err(ConfigError::MissingKey { key: key.to_string() }),
        Some((v, line)) if v < min => Err(range(Some(line), key, format!("must be at least {min}"))),
        Some((v, _)) => Ok(v),
    }
}

/// Parses and validates; the first error in line order wins during tokenizing.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let e = tokenize(text)?;

    let name = e.raw("problem", "name").ok_or(ConfigError::MissingKey { key: "name".into() })?;
    let pseed = e.seed("problem", "seed")?.unwrap_or(0);
    let problem = match name.value.as_str() {
        "stochastic_quadratic" => {
            reject_unused(&e, "problem", &["lambda", "d1", "d2", "rho"], &name.value)?;
            let dim = positive_dim(&e, "dim", 1)?;
            let kappa = match e.float("problem", "kappa")? {
                None => 1.0,
                Some((k, line)) if k < 1.0 => return Err(range(Some(line), "kappa", "must be >= 1")),
                Some((k, _)) => k,
            };
            ProblemSpec::StochasticQuadratic { dim, kappa, seed: pseed }
        }
        "l1_least_squares" => {
            reject_unused(&e, "problem", &["kappa", "d1", "d2", "rho"], &name.value)?;
            let dim = positive_dim(&e, "dim", 1)?;
            let lambda = match e.float("problem", "lambda")? {
                None => return Err(ConfigError::MissingKey { key: "lambda".into() }),
                Some((l, line)) if l <= 0.0 => return Err(range(Some(line), "lambda", "must be > 0")),
                Some((l, _)) => l,
            };
            ProblemSpec::L1LeastSquares { dim, lambda, seed: pseed }
        }
        "simplex_risk" => {
            reject_unused(&e, "problem", &["kappa", "lambda", "d1", "d2", "rho"], &name.value)?;
            ProblemSpec::SimplexRisk {
                dim: positive_dim(&e, "dim", 2)?,
                seed: pseed,
            }
        }
        "block_coupled" => {
            reject_unused(&e, "problem", &["dim", "kappa", "lambda"], &name.value)?;
            ProblemSpec::BlockCoupled {
                d1: positive_dim(&e, "d1", 1)?,
                d2: positive_dim(&e, "d2", 1)?,
                rho: e.float("problem", "rho")?.map(|(r, _)| r).unwrap_or(0.0),
                seed: pseed,
            }
        }
        other => {
            return Err(range(
                Some(name.line),
                "name",
                format!("unknown problem \"{other}\" (expected stochastic_quadratic, l1_least_squares, simplex_risk or block_coupled)"),
            ))
        }
    };

    let aux = match e.raw("algorithm", "aux") {
        None => None,
        Some(a) => Some(match a.value.as_str() {
            "quadratic" => AuxKind::Quadratic,
            "entropy" => AuxKind::Entropy,
            other => return Err(range(Some(a.line), "aux", format!("unknown auxiliary function \"{other}\""))),
        }),
    };
    let c = match e.float("algorithm", "c")? {
        None => return Err(ConfigError::MissingKey { key: "c".into() }),
        Some((c, line)) if c <= 0.0 => return Err(range(Some(line), "c", "must be > 0")),
        Some((c, _)) => c,
    };
    let theta = match e.float("algorithm", "theta")? {
        None => return Err(ConfigError::MissingKey { key: "theta".into() }),
        Some((t, line)) if !(t > 0.0 && t <= 1.0) => return Err(range(Some(line), "theta", "must lie in (0, 1]")),
        Some((t, _)) => t,
    };
    let iterations = match e.count("algorithm", "iterations")? {
        None => return Err(ConfigError::MissingKey { key: "iterations".into() }),
        Some((0, line)) => return Err(range(Some(line), "iterations", "must be >= 1")),
        Some((n, _)) => n,
    };
    let replications = match e.count("algorithm", "replications")? {
        None => DEFAULT_REPLICATIONS,
        Some((0, line)) => return Err(range(Some(line), "replications", "must be >= 1")),
        Some((r, _)) => r,
    };
    let seed = e.seed("algorithm", "seed")?.unwrap_or(0);
    let explicit = e.list::<usize>("algorithm", "checkpoints", "a comma-separated list of integers")?;
    let count = e.count("algorithm", "checkpoint_count")?;
    let checkpoints = match (explicit, count) {
        (Some(_), Some((_, line))) => {
            return Err(range(Some(line), "checkpoint_count", "conflicts with an explicit checkpoint list"))
        }
        (Some((list, line)), None) => {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(range(Some(line), "checkpoints", "must be strictly increasing"));
            }
            if list.first().is_some_and(|&c| c == 0) || list.last().is_some_and(|&c| c > iterations) {
                return Err(range(Some(line), "checkpoints", format!("must lie in 1..={iterations}")));
            }
            list
        }
        (None, Some((c, _))) => log_spaced_checkpoints(iterations, c),
        (None, None) => log_spaced_checkpoints(iterations, DEFAULT_CHECKPOINTS),
    };
    let decomposed = e.parse::<bool>("algorithm", "decomposed", "true or false")?.map(|(b, _)| b).unwrap_or(false);

    let mode = match e.raw("bias", "mode") {
        None => BiasKind::None,
        Some(m) => match m.value.as_str() {
            "none" => BiasKind::None,
            "deterministic" => BiasKind::Deterministic,
            "random" => BiasKind::Random,
            other => return Err(range(Some(m.line), "mode", format!("unknown bias mode \"{other}\""))),
        },
    };
    let q = match e.float("bias", "q")? {
        None => 0.0,
        Some((q, line)) if q < 0.0 => return Err(range(Some(line), "q", "must be >= 0")),
        Some((q, _)) => q,
    };
    let nu = match e.float("bias", "nu")? {
        None => 0.0,
        Some((nu, line)) if nu < 0.0 => return Err(range(Some(line), "nu", "must be >= 0")),
        Some((nu, _)) => nu,
    };
    let direction = match e.list::<f64>("bias", "direction", "a comma-separated list of numbers")? {
        None => None,
        Some((_, line)) if mode != BiasKind::Deterministic => {
            return Err(range(Some(line), "direction", "only applies to deterministic bias"))
        }
        Some((d, line)) if d.iter().any(|v| !v.is_finite()) || d.iter().all(|&v| v == 0.0) => {
            return Err(range(Some(line), "direction", "must be finite and non-zero"))
        }
        Some((d, _)) => Some(d),
    };
    let out_dir = e.raw("output", "dir").map(|d| PathBuf::from(&d.value));

    Ok(ExperimentConfig {
        problem,
        aux,
        c,
        theta,
        bias: BiasSpec { mode, q, nu, direction },
        iterations,
        replications,
        seed,
        checkpoints,
        decomposed,
        out_dir,
    })
}
