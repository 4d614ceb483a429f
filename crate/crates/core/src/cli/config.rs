//! Experiment file schema (TOML) and its resolution into runnable parts.
//!
//! ```toml
//! k = 4
//! total_points = 200000
//! checkpoints = [1000, 100000, 200000]
//! designated_checkpoints = [200000]   # default: last checkpoint
//! trials = 60                         # default 60
//! base_seed = 1                       # default 0
//! bpca_log_base = "e"                 # "e" (default), "2" or "10"
//!
//! [stream]
//! kind = "synthetic"                  # or "bag_of_words" with `path`
//! d = 100
//! spectrum = { top = [0.12, 0.1, 0.08, 0.06], tail_first = 0.03, tail_ratio = 0.9 }
//! # eigenvalues = [...]               # instead of `spectrum`
//! rotation_seed = 7                   # omit for the identity basis
//! sampler = "sign_vector"             # or "eigendirection"
//!
//! [oracle]                            # bag_of_words only
//! iterations = 300
//! seed = 0
//!
//! [[grid]]
//! id = "spca-c100"
//! algorithm = "spca"                  # c, n0
//! c = 100.0
//! # alecton: rate; dbpca: gamma_sq, initial_block, or schedule = "theoretical"
//! # with delta0, chernoff_c, cbar, lambda_k, lambda_k1; bpca: block or l
//! ```
//!
//! Unknown keys are rejected. Dataset paths are relative to the config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::estimators::{bpca_block_with_log_base, Algorithm, BlockSchedule, EstimatorConfig, ScheduleParams};
use crate::harness::{ExperimentConfig, GridEntry};
use crate::metrics::{reference_oracle, Provenance, ReferenceSubspace};
use crate::streams::{load_bag_of_words, Backing, SamplerKind, StreamError, SyntheticModel, SyntheticSpec};

pub const DEFAULT_TRIALS: usize = 60;
pub const DEFAULT_ORACLE_ITERATIONS: usize = 300;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_oracle_iterations() -> usize {
    DEFAULT_ORACLE_ITERATIONS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    pub fn value(self) -> f64 {
        match self {
            LogBase::E => std::f64::consts::E,
            LogBase::Two => 2.0,
            LogBase::Ten => 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Synthetic,
    BagOfWords,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub top: Vec<f64>,
    pub tail_first: f64,
    pub tail_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSection {
    pub kind: StreamKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_oracle_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Spca,
    Alecton,
    Dbpca,
    Bpca,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Geometric,
    Theoretical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub id: String,
    pub algorithm: AlgorithmName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_block: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chernoff_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

/// Provenance block written into run manifests; ignored when a manifest is
/// used as a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub tool_version: String,
    pub rng: String,
    pub normalization: String,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_iterations_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_converged: Option<bool>,
    pub reference_eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: usize,
    pub total_points: u64,
    pub checkpoints: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designated_checkpoints: Option<Vec<u64>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bpca_log_base: Option<LogBase>,
    pub stream: StreamSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    pub grid: Vec<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
}

#[derive(Debug)]
pub enum ConfigError {
    /// Exit status 2.
    Schema { path: String, message: String },
    /// Exit status 3.
    Dataset(StreamError),
    /// Exit status 1.
    Other(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Schema { path, message } => write!(f, "config error at `{path}`: {message}"),
            ConfigError::Dataset(e) => write!(f, "dataset error: {e}"),
            ConfigError::Other(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for ConfigError {}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a config (or manifest) document.
pub fn parse_config(text: &str) -> Result<FileConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| schema("<document>", e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "<document>".into() } else { path }, e.inner().message().to_string())
    })
}

pub fn read_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| schema("<file>", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Everything needed to run an experiment.
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub backing: Backing,
    pub reference: ReferenceSubspace,
    /// The config with defaults filled in, dataset paths made absolute,
    /// `l` turned into `block` and theoretical eigenvalues made explicit.
    pub resolved: FileConfig,
    pub normalization: String,
}

fn require<T: Copy>(value: Option<T>, path: &str, what: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| schema(path, format!("{what} is required")))
}

fn forbid<T>(value: &Option<T>, path: String, algorithm: &str) -> Result<(), ConfigError> {
    match value {
        Some(_) => Err(schema(path, format!("not a parameter of {algorithm}"))),
        None => Ok(()),
    }
}

fn positive(value: f64, path: &str) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(schema(path, format!("must be a positive number, got {value}")))
    }
}

fn build_stream(
    stream: &mut StreamSection,
    base_dir: &Path,
) -> Result<(Backing, Option<Arc<SyntheticModel>>, String), ConfigError> {
    match stream.kind {
        StreamKind::Synthetic => {
            forbid(&stream.path, "stream.path".into(), "a synthetic stream")?;
            let d = require(stream.d, "stream.d", "dimension")?;
            let eigenvalues = match (&stream.eigenvalues, &stream.spectrum) {
                (Some(e), None) => e.clone(),
                (None, Some(s)) => SyntheticSpec::geometric_tail(d, &s.top, s.tail_first, s.tail_ratio, None)
                    .map_err(|e| schema("stream.spectrum", e.to_string()))?
                    .eigenvalues,
                _ => return Err(schema("stream", "give exactly one of `eigenvalues` or `spectrum`")),
            };
            let spec = SyntheticSpec {
                d,
                eigenvalues,
                rotation_seed: stream.rotation_seed,
                sampler: stream.sampler.unwrap_or_default(),
            };
            stream.sampler = Some(spec.sampler);
            let model = Arc::new(SyntheticModel::new(spec).map_err(|e| schema("stream", e.to_string()))?);
            Ok((Backing::Synthetic(model.clone()), Some(model), "none".into()))
        }
        StreamKind::BagOfWords => {
            for (value, key) in [
                (stream.d.is_some(), "d"),
                (stream.rotation_seed.is_some(), "rotation_seed"),
                (stream.sampler.is_some(), "sampler"),
                (stream.eigenvalues.is_some(), "eigenvalues"),
                (stream.spectrum.is_some(), "spectrum"),
            ] {
                if value {
                    return Err(schema(format!("stream.{key}"), "not a parameter of a bag_of_words stream"));
                }
            }
            let rel = stream.path.clone().ok_or_else(|| schema("stream.path", "path is required"))?;
            let path = base_dir.join(rel);
            let data = load_bag_of_words(&path).map_err(ConfigError::Dataset)?;
            if data.is_empty() {
                return Err(ConfigError::Dataset(StreamError::InvalidArgument(format!(
                    "{} contains no documents",
                    path.display()
                ))));
            }
            stream.path = Some(std::fs::canonicalize(&path).unwrap_or(path));
            Ok((
                Backing::Dataset(Arc::new(data)),
                None,
                crate::streams::DATASET_NORMALIZATION.into(),
            ))
        }
    }
}

fn build_algorithm(
    g: &mut GridSection,
    i: usize,
    cfg: &FileConfig,
    d: usize,
    model: Option<&SyntheticModel>,
) -> Result<Algorithm, ConfigError> {
    let p = |key: &str| format!("grid[{i}].{key}");
    let name = match g.algorithm {
        AlgorithmName::Spca => "spca",
        AlgorithmName::Alecton => "alecton",
        AlgorithmName::Dbpca => "dbpca",
        AlgorithmName::Bpca => "bpca",
    };
    let allowed: &[&str] = match (g.algorithm, g.schedule) {
        (AlgorithmName::Spca, _) => &["c", "n0"],
        (AlgorithmName::Alecton, _) => &["rate"],
        (AlgorithmName::Dbpca, Some(ScheduleKind::Theoretical)) => {
            &["schedule", "delta0", "chernoff_c", "cbar", "lambda_k", "lambda_k1"]
        }
        (AlgorithmName::Dbpca, _) => &["schedule", "gamma_sq", "initial_block"],
        (AlgorithmName::Bpca, _) => &["block", "l"],
    };
    let present = [
        ("c", g.c.is_some()),
        ("n0", g.n0.is_some()),
        ("rate", g.rate.is_some()),
        ("schedule", g.schedule.is_some()),
        ("gamma_sq", g.gamma_sq.is_some()),
        ("initial_block", g.initial_block.is_some()),
        ("delta0", g.delta0.is_some()),
        ("chernoff_c", g.chernoff_c.is_some()),
        ("cbar", g.cbar.is_some()),
        ("lambda_k", g.lambda_k.is_some()),
        ("lambda_k1", g.lambda_k1.is_some()),
        ("block", g.block.is_some()),
        ("l", g.l.is_some()),
    ];
    if let Some((key, _)) = present.iter().find(|(key, set)| *set && !allowed.contains(key)) {
        forbid(&Some(()), p(key), name)?;
    }

    let algorithm = match g.algorithm {
        AlgorithmName::Spca => {
            let c = positive(require(g.c, &p("c"), "c")?, &p("c"))?;
            let n0 = g.n0.unwrap_or(0.0);
            if !(n0.is_finite() && n0 >= 0.0) {
                return Err(schema(p("n0"), "must be a nonnegative number"));
            }
            Algorithm::Spca { c, n0 }
        }
        AlgorithmName::Alecton => Algorithm::Alecton {
            rate: positive(require(g.rate, &p("rate"), "rate")?, &p("rate"))?,
        },
        AlgorithmName::Dbpca if g.schedule == Some(ScheduleKind::Theoretical) => {
            let from_model = |idx: usize| model.and_then(|m| m.eigenvalues().get(idx).copied());
            let lambda_k = g.lambda_k.or_else(|| from_model(cfg.k - 1));
            let lambda_k1 = g.lambda_k1.or_else(|| from_model(cfg.k));
            g.lambda_k = Some(require(lambda_k, &p("lambda_k"), "lambda_k")?);
            g.lambda_k1 = Some(require(lambda_k1, &p("lambda_k1"), "lambda_k1")?);
            g.chernoff_c = Some(g.chernoff_c.unwrap_or(1.0));
            g.cbar = Some(g.cbar.unwrap_or(1.0));
            let params = ScheduleParams {
                lambda_k: g.lambda_k.unwrap(),
                lambda_k1: g.lambda_k1.unwrap(),
                delta0: require(g.delta0, &p("delta0"), "delta0")?,
                d,
                k: cfg.k,
                chernoff_c: g.chernoff_c.unwrap(),
                cbar: g.cbar.unwrap(),
            };
            params.validate().map_err(|e| schema(format!("grid[{i}]"), e.to_string()))?;
            Algorithm::Dbpca(BlockSchedule::Theoretical(params))
        }
        AlgorithmName::Dbpca => {
            let gamma_sq = require(g.gamma_sq, &p("gamma_sq"), "gamma_sq")?;
            if !(gamma_sq > 0.0 && gamma_sq < 1.0) {
                return Err(schema(p("gamma_sq"), format!("must lie in (0, 1), got {gamma_sq}")));
            }
            if g.initial_block == Some(0) {
                return Err(schema(p("initial_block"), "must be positive"));
            }
            Algorithm::Dbpca(BlockSchedule::Geometric {
                gamma_sq,
                initial_block: g.initial_block,
            })
        }
        AlgorithmName::Bpca => {
            let block = match (g.block, g.l) {
                (Some(0), None) => return Err(schema(p("block"), "must be positive")),
                (Some(b), None) => b,
                (None, Some(l)) => {
                    let base = cfg.bpca_log_base.unwrap_or(LogBase::E).value();
                    bpca_block_with_log_base(cfg.total_points, d, positive(l, &p("l"))?, base)
                        .map_err(|e| schema(p("l"), e.to_string()))?
                }
                _ => return Err(schema(format!("grid[{i}]"), "bpca needs exactly one of `block` or `l`")),
            };
            g.block = Some(block);
            g.l = None;
            Algorithm::Bpca { block }
        }
    };
    EstimatorConfig::new(cfg.k, 0, algorithm.clone())
        .validate()
        .map_err(|e| schema(format!("grid[{i}]"), e.to_string()))?;
    Ok(algorithm)
}

/// Validates `cfg`, loads or builds the stream, and computes the reference subspace.
pub fn resolve(cfg: &FileConfig, base_dir: &Path) -> Result<Resolved, ConfigError> {
    let mut out = cfg.clone();
    out.manifest = None;
    if cfg.k == 0 {
        return Err(schema("k", "must be at least 1"));
    }
    if cfg.trials == 0 {
        return Err(schema("trials", "must be at least 1"));
    }
    if cfg.total_points == 0 {
        return Err(schema("total_points", "must be at least 1"));
    }
    if cfg.checkpoints.is_empty() {
        return Err(schema("checkpoints", "at least one checkpoint is required"));
    }
    if cfg.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(schema("checkpoints", "must be strictly increasing"));
    }
    if *cfg.checkpoints.last().unwrap() > cfg.total_points {
        return Err(schema("checkpoints", "last checkpoint exceeds total_points"));
    }
    let designated = cfg
        .designated_checkpoints
        .clone()
        .unwrap_or_else(|| vec![*cfg.checkpoints.last().unwrap()]);
    if let Some(c) = designated.iter().find(|c| !cfg.checkpoints.contains(c)) {
        return Err(schema("designated_checkpoints", format!("{c} is not one of the checkpoints")));
    }
    out.designated_checkpoints = Some(designated.clone());
    if cfg.grid.is_empty() {
        return Err(schema("grid", "at least one [[grid]] entry is required"));
    }
    for (i, g) in cfg.grid.iter().enumerate() {
        if g.id.is_empty() || g.id.contains([',', '"', '\n', '\r']) {
            return Err(schema(format!("grid[{i}].id"), "must be non-empty without commas, quotes or newlines"));
        }
        if cfg.grid[..i].iter().any(|o| o.id == g.id) {
            return Err(schema(format!("grid[{i}].id"), format!("duplicate id {:?}", g.id)));
        }
    }
    match (&cfg.stream.kind, &cfg.oracle) {
        (StreamKind::Synthetic, Some(_)) => {
            return Err(schema("oracle", "synthetic streams use the analytic reference"))
        }
        (StreamKind::BagOfWords, Some(o)) if o.iterations == 0 => {
            return Err(schema("oracle.iterations", "must be at least 1"))
        }
        _ => {}
    }

    let (backing, model, normalization) = build_stream(&mut out.stream, base_dir)?;
    let d = backing.dim();
    if cfg.k > d {
        return Err(schema("k", format!("k = {} exceeds the stream dimension {d}", cfg.k)));
    }
    let mut grid = Vec::with_capacity(cfg.grid.len());
    for (i, g) in out.grid.iter_mut().enumerate() {
        let algorithm = build_algorithm(g, i, cfg, d, model.as_deref())?;
        grid.push(GridEntry::new(g.id.clone(), algorithm));
    }

    let reference = match (&model, &backing) {
        (Some(m), _) => ReferenceSubspace::analytic(m, cfg.k).map_err(|e| ConfigError::Other(e.to_string()))?,
        (None, Backing::Dataset(data)) => {
            let oracle = cfg.oracle.clone().unwrap_or(OracleSection {
                iterations: DEFAULT_ORACLE_ITERATIONS,
                seed: 0,
            });
            out.oracle = Some(oracle.clone());
            reference_oracle(data.as_ref(), cfg.k, oracle.iterations, oracle.seed)
                .map_err(|e| ConfigError::Other(format!("reference oracle failed: {e}")))?
        }
        (None, Backing::Synthetic(_)) => unreachable!(),
    };

    let experiment = ExperimentConfig {
        k: cfg.k,
        total_points: cfg.total_points,
        checkpoints: cfg.checkpoints.clone(),
        designated_checkpoints: designated,
        grid,
        trials: cfg.trials,
        base_seed: cfg.base_seed,
    };
    experiment.validate().map_err(|e| schema("<experiment>", e.to_string()))?;
    Ok(Resolved {
        experiment,
        backing,
        reference,
        resolved: out,
        normalization,
    })
}

impl Resolved {
    pub fn manifest(&self) -> FileConfig {
        let (reference, used, converged) = match self.reference.provenance() {
            Provenance::Analytic => ("analytic".to_string(), None, None),
            Provenance::Oracle {
                iterations,
                seed,
                used,
                converged,
            } => (
                format!("oracle (orthogonal iteration, iterations = {iterations}, seed = {seed})"),
                Some(*used),
                Some(*converged),
            ),
        };
        let mut m = self.resolved.clone();
        m.manifest = Some(ManifestInfo {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            rng: crate::linalg::RNG_ALGORITHM.into(),
            normalization: self.normalization.clone(),
            reference,
            oracle_iterations_used: used,
            oracle_converged: converged,
            reference_eigenvalues: self.reference.eigvals().to_vec(),
        });
        m
    }
}

/// Grid of the desk-scale comparison: four settings per family.
pub fn example_config(d: usize, k: usize, total_points: u64, trials: usize) -> FileConfig {
    let grid_entry = |id: String, algorithm: AlgorithmName| GridSection {
        id,
        algorithm,
        c: None,
        n0: None,
        rate: None,
        schedule: None,
        gamma_sq: None,
        initial_block: None,
        delta0: None,
        chernoff_c: None,
        cbar: None,
        lambda_k: None,
        lambda_k1: None,
        block: None,
        l: None,
    };
    let mut grid = Vec::new();
    for rate in [0.01, 0.1, 1.0, 10.0] {
        let mut g = grid_entry(format!("alecton-{rate}"), AlgorithmName::Alecton);
        g.rate = Some(rate);
        grid.push(g);
    }
    for c in [10.0, 100.0, 1000.0, 10000.0] {
        let mut g = grid_entry(format!("spca-{c}"), AlgorithmName::Spca);
        g.c = Some(c);
        grid.push(g);
    }
    for gamma_sq in [0.6, 0.7, 0.8, 0.9] {
        let mut g = grid_entry(format!("dbpca-{gamma_sq}"), AlgorithmName::Dbpca);
        g.gamma_sq = Some(gamma_sq);
        grid.push(g);
    }
    for l in [1.0, 5.0, 25.0, 125.0] {
        let mut g = grid_entry(format!("bpca-{l}"), AlgorithmName::Bpca);
        g.l = Some(l);
        grid.push(g);
    }
    let top: Vec<f64> = [0.12, 0.10, 0.08, 0.06].into_iter().take(k).collect();
    FileConfig {
        k,
        total_points,
        checkpoints: vec![1000, total_points / 2, total_points],
        designated_checkpoints: Some(vec![total_points / 2, total_points]),
        trials,
        base_seed: 1,
        bpca_log_base: None,
        stream: StreamSection {
            kind: StreamKind::Synthetic,
            d: Some(d),
            rotation_seed: None,
            sampler: Some(SamplerKind::SignVector),
            path: None,
            eigenvalues: None,
            spectrum: Some(SpectrumSection {
                top,
                tail_first: 0.03,
                tail_ratio: 0.9,
            }),
        },
        oracle: None,
        grid,
        manifest: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
k = 2
total_points = 1000
checkpoints = [0, 500, 1000]
trials = 2

[stream]
kind = "synthetic"
d = 20
spectrum = { top = [0.2, 0.15], tail_first = 0.05, tail_ratio = 0.8 }

[[grid]]
id = "s"
algorithm = "spca"
c = 50

[[grid]]
id = "b"
algorithm = "bpca"
l = 1
"#;

    fn schema_path(text: &str) -> String {
        let cfg = match parse_config(text) {
            Ok(cfg) => cfg,
            Err(ConfigError::Schema { path, .. }) => return path,
            Err(e) => panic!("{e}"),
        };
        match resolve(&cfg, Path::new(".")) {
            Err(ConfigError::Schema { path, .. }) => path,
            Err(e) => panic!("unexpected {e}"),
            Ok(_) => panic!("config accepted"),
        }
    }

    #[test]
    fn minimal_config_resolves() {
        let cfg = parse_config(MINIMAL).unwrap();
        let r = resolve(&cfg, Path::new(".")).unwrap();
        assert_eq!(r.experiment.trials, 2);
        assert_eq!(r.experiment.designated_checkpoints, vec![1000]);
        // ln 20 = 2.996, so T = 2
        assert_eq!(r.experiment.grid[1].algorithm, Algorithm::Bpca { block: 500 });
        assert_eq!(r.resolved.grid[1].block, Some(500));
        assert_eq!(r.resolved.grid[1].l, None);
        assert_eq!(r.reference.k(), 2);
    }

    #[test]
    fn defaults() {
        let cfg = parse_config(&MINIMAL.replace("trials = 2\n", "")).unwrap();
        assert_eq!(cfg.trials, 60);
        assert_eq!(cfg.base_seed, 0);
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        let r = resolve(&cfg, Path::new(".")).unwrap();
        let text = toml::to_string(&r.manifest()).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, r.manifest());
        let again = resolve(&back, Path::new(".")).unwrap();
        assert_eq!(again.experiment, r.experiment);
    }

    #[test]
    fn schema_errors_name_the_field() {
        assert_eq!(schema_path(&MINIMAL.replace("trials = 2", "trials = 0")), "trials");
        assert_eq!(schema_path(&MINIMAL.replace("trials = 2", "trails = 2")), "trails");
        assert_eq!(schema_path(&MINIMAL.replace("c = 50", "c = 50\nrate = 1")), "grid[0].rate");
        assert_eq!(schema_path(&MINIMAL.replace("c = 50", "c = -1")), "grid[0].c");
        assert_eq!(schema_path(&MINIMAL.replace("c = 50", "cc = 50")), "grid[0].cc");
        assert_eq!(schema_path(&MINIMAL.replace("d = 20", "d = \"x\"")), "stream.d");
        assert_eq!(schema_path(&MINIMAL.replace("[0, 500, 1000]", "[0, 500, 2000]")), "checkpoints");
        assert_eq!(schema_path(&MINIMAL.replace("id = \"b\"", "id = \"s\"")), "grid[1].id");
        assert_eq!(schema_path(&MINIMAL.replace("l = 1", "l = 1\nblock = 4")), "grid[1]");
        assert_eq!(schema_path(&MINIMAL.replace("kind = \"synthetic\"", "kind = \"csv\"")), "stream.kind");
    }

    #[test]
    fn missing_dataset_is_a_dataset_error() {
        let text = r#"
k = 1
total_points = 10
checkpoints = [10]
[stream]
kind = "bag_of_words"
path = "does/not/exist.txt"
[[grid]]
id = "a"
algorithm = "alecton"
rate = 0.1
"#;
        let cfg = parse_config(text).unwrap();
        assert!(matches!(resolve(&cfg, Path::new("/nonexistent")), Err(ConfigError::Dataset(_))));
    }

    #[test]
    fn example_config_is_valid() {
        let cfg = example_config(100, 4, 200_000, 20);
        let r = resolve(&cfg, Path::new(".")).unwrap();
        assert_eq!(r.experiment.grid.len(), 16);
        let blocks: Vec<u64> = r.resolved.grid[12..].iter().map(|g| g.block.unwrap()).collect();
        assert_eq!(blocks, vec![50_000, 8_695, 1_739, 347]);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
