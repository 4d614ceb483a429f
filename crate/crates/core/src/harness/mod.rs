//! Seeded benchmark runs: every grid entry is run for a number of trials and
//! its spectral error recorded at fixed sample counts.
//!
//! Trial `t` of the entry with id `c` uses `trial_seed(base_seed, c, t)`:
//!
//! ```text
//! trial_seed = splitmix64(splitmix64(base_seed ^ fnv1a64(c)) ^ t)
//! init_seed  = splitmix64(trial_seed ^ 0x1)   // Gaussian start
//! order_seed = splitmix64(trial_seed ^ 0x2)   // stream draws / permutations
//! ```
//!
//! so adding or removing entries never changes another entry's trials.

mod summary;

pub use summary::{aggregate, welch_t_test, BestEntry, CheckpointStat, Comparison, ConfigSummary, ExperimentSummary, WelchResult};

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::estimators::{Algorithm, EstimatorConfig, EstimatorError, Family, StreamingPca};
use crate::metrics::{spectral_error, MetricError, ReferenceSubspace};
use crate::streams::{make_stream, Backing, StreamError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error("grid entry {id}: {source}")]
    Estimator {
        id: String,
        #[source]
        source: EstimatorError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// One algorithm setting in the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEntry {
    pub id: String,
    pub algorithm: Algorithm,
}

impl GridEntry {
    pub fn new(id: impl Into<String>, algorithm: Algorithm) -> Self {
        Self { id: id.into(), algorithm }
    }

    pub fn family(&self) -> Family {
        self.algorithm.family()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub k: usize,
    /// Points fed to every trial.
    pub total_points: u64,
    /// Sample counts at which the error is recorded; strictly increasing.
    pub checkpoints: Vec<u64>,
    /// Checkpoints for the best-parameter tables and t-tests.
    pub designated_checkpoints: Vec<u64>,
    pub grid: Vec<GridEntry>,
    pub trials: usize,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.checkpoints.is_empty() {
            return bad("at least one checkpoint is required".into());
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly increasing".into());
        }
        if *self.checkpoints.last().unwrap() > self.total_points {
            return bad(format!(
                "last checkpoint {} exceeds total_points {}",
                self.checkpoints.last().unwrap(),
                self.total_points
            ));
        }
        if let Some(c) = self
            .designated_checkpoints
            .iter()
            .find(|c| !self.checkpoints.contains(c))
        {
            return bad(format!("designated checkpoint {c} is not a checkpoint"));
        }
        if self.grid.is_empty() {
            return bad("the algorithm grid is empty".into());
        }
        let mut ids = HashSet::new();
        for entry in &self.grid {
            if entry.id.is_empty() || entry.id.contains([',', '"', '\n', '\r']) {
                return bad(format!("grid id {:?} must be non-empty without commas, quotes or newlines", entry.id));
            }
            if !ids.insert(entry.id.as_str()) {
                return bad(format!("duplicate grid id {:?}", entry.id));
            }
            EstimatorConfig::new(self.k, 0, entry.algorithm.clone())
                .validate()
                .map_err(|source| HarnessError::Estimator {
                    id: entry.id.clone(),
                    source,
                })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    DegenerateBlock,
    RankDeficient,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::DegenerateBlock => "degenerate_block",
            TrialStatus::RankDeficient => "rank_deficient",
        }
    }
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Errors of one trial; `None` marks checkpoints after a failure.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub errors: Vec<Option<f64>>,
    pub status: TrialStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub config_id: String,
    pub trial: usize,
    pub seed: u64,
    pub errors: Vec<Option<f64>>,
    pub status: TrialStatus,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn trial_seed(base_seed: u64, config_id: &str, trial: usize) -> u64 {
    splitmix64(splitmix64(base_seed ^ fnv1a64(config_id.as_bytes())) ^ trial as u64)
}

pub fn init_seed(trial_seed: u64) -> u64 {
    splitmix64(trial_seed ^ 0x1)
}

pub fn order_seed(trial_seed: u64) -> u64 {
    splitmix64(trial_seed ^ 0x2)
}

/// Drives one estimator over `total_points` points, recording the spectral
/// error after exactly `c` points for each checkpoint `c` (0 is the start).
///
/// Block methods are evaluated on the basis of their last completed block.
pub fn run_trial(
    algorithm: &Algorithm,
    backing: &Backing,
    reference: &ReferenceSubspace,
    checkpoints: &[u64],
    total_points: u64,
    seed: u64,
) -> Result<TrialOutcome, HarnessError> {
    if backing.dim() != reference.dim() {
        return Err(HarnessError::InvalidConfig(format!(
            "stream dimension {} differs from reference dimension {}",
            backing.dim(),
            reference.dim()
        )));
    }
    let wrap = |source| HarnessError::Estimator {
        id: algorithm.describe(),
        source,
    };
    let config = EstimatorConfig::new(reference.k(), init_seed(seed), algorithm.clone());
    let mut est = StreamingPca::init(config, reference.dim()).map_err(wrap)?;
    let mut stream = make_stream(backing.clone(), order_seed(seed))?;

    let mut errors = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut status = TrialStatus::Ok;
    let mut n = 0u64;
    loop {
        while next.peek().is_some_and(|&&c| c == n) {
            next.next();
            errors.push(Some(spectral_error(reference, est.basis())?));
        }
        if n == total_points {
            break;
        }
        match est.update(stream.next_point()) {
            Ok(()) => n += 1,
            Err(EstimatorError::DegenerateBlock { .. }) => {
                status = TrialStatus::DegenerateBlock;
                break;
            }
            Err(EstimatorError::RankDeficient { .. }) => {
                status = TrialStatus::RankDeficient;
                break;
            }
            Err(other) => return Err(wrap(other)),
        }
    }
    errors.resize(checkpoints.len(), None);
    Ok(TrialOutcome { errors, status })
}

/// Runs every (grid entry, trial) pair on up to `threads` worker threads.
///
/// Records come back ordered by grid position, then trial, whatever the
/// thread count.
pub fn run_experiment(
    config: &ExperimentConfig,
    backing: &Backing,
    reference: &ReferenceSubspace,
    threads: usize,
) -> Result<Vec<TrialRecord>, HarnessError> {
    config.validate()?;
    if reference.k() != config.k {
        return Err(HarnessError::InvalidConfig(format!(
            "reference has k = {}, experiment has k = {}",
            reference.k(),
            config.k
        )));
    }
    let jobs: Vec<(&GridEntry, usize)> = config
        .grid
        .iter()
        .flat_map(|e| (0..config.trials).map(move |t| (e, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| HarnessError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(entry, trial)| {
                let seed = trial_seed(config.base_seed, &entry.id, trial);
                let outcome = run_trial(
                    &entry.algorithm,
                    backing,
                    reference,
                    &config.checkpoints,
                    config.total_points,
                    seed,
                )
                .map_err(|e| match e {
                    HarnessError::Estimator { source, .. } => HarnessError::Estimator {
                        id: entry.id.clone(),
                        source,
                    },
                    other => other,
                })?;
                Ok(TrialRecord {
                    config_id: entry.id.clone(),
                    trial,
                    seed,
                    errors: outcome.errors,
                    status: outcome.status,
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::BlockSchedule;
    use crate::streams::{SamplerKind, SyntheticModel, SyntheticSpec};
    use std::sync::Arc;

    fn setup() -> (Backing, ReferenceSubspace) {
        let spec = SyntheticSpec::geometric_tail(20, &[0.2, 0.15], 0.05, 0.8, Some(3)).unwrap();
        let model = SyntheticModel::new(spec).unwrap();
        let reference = ReferenceSubspace::analytic(&model, 2).unwrap();
        (Backing::Synthetic(Arc::new(model)), reference)
    }

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            k: 2,
            total_points: 3000,
            checkpoints: vec![0, 100, 3000],
            designated_checkpoints: vec![3000],
            grid: vec![
                GridEntry::new("spca", Algorithm::Spca { c: 50.0, n0: 0.0 }),
                GridEntry::new("alecton", Algorithm::Alecton { rate: 0.05 }),
                GridEntry::new(
                    "dbpca",
                    Algorithm::Dbpca(BlockSchedule::Geometric {
                        gamma_sq: 0.7,
                        initial_block: None,
                    }),
                ),
                GridEntry::new("bpca", Algorithm::Bpca { block: 500 }),
            ],
            trials: 3,
            base_seed: 42,
        }
    }

    #[test]
    fn hash_reference_values() {
        // published test vectors
        assert_eq!(fnv1a64(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xAF63_DC4C_8601_EC8C);
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn seeds_depend_only_on_own_entry() {
        let s = trial_seed(7, "spca", 3);
        assert_eq!(s, trial_seed(7, "spca", 3));
        assert_ne!(s, trial_seed(7, "spca", 4));
        assert_ne!(s, trial_seed(7, "spcb", 3));
        assert_ne!(s, trial_seed(8, "spca", 3));
        assert_ne!(init_seed(s), order_seed(s));
    }

    #[test]
    fn checkpoint_zero_is_the_initial_basis() {
        let (backing, reference) = setup();
        let alg = Algorithm::Alecton { rate: 0.1 };
        let out = run_trial(&alg, &backing, &reference, &[0], 0, 5).unwrap();
        let est = StreamingPca::init(EstimatorConfig::new(2, init_seed(5), alg), 20).unwrap();
        assert_eq!(out.errors, vec![Some(spectral_error(&reference, est.basis()).unwrap())]);
        assert_eq!(out.status, TrialStatus::Ok);
    }

    #[test]
    fn trial_is_deterministic() {
        let (backing, reference) = setup();
        let alg = Algorithm::Spca { c: 50.0, n0: 0.0 };
        let a = run_trial(&alg, &backing, &reference, &[10, 1000], 1000, 9).unwrap();
        let b = run_trial(&alg, &backing, &reference, &[10, 1000], 1000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.errors.iter().all(|e| e.is_some_and(|v| (0.0..=1.0).contains(&v))));
    }

    #[test]
    fn degenerate_trial_marks_remaining_checkpoints_absent() {
        let spec = SyntheticSpec {
            d: 3,
            eigenvalues: vec![0.5, 0.0001, 0.0001],
            rotation_seed: None,
            sampler: SamplerKind::Eigendirection,
        };
        let model = SyntheticModel::new(spec).unwrap();
        let reference = ReferenceSubspace::analytic(&model, 2).unwrap();
        let backing = Backing::Synthetic(Arc::new(model));
        // a block of 4 draws almost surely hits only the top axis, so S has rank 1
        let alg = Algorithm::Bpca { block: 4 };
        let failed = (0..20u64)
            .map(|s| run_trial(&alg, &backing, &reference, &[0, 4, 8], 8, s).unwrap())
            .find(|o| o.status == TrialStatus::DegenerateBlock)
            .expect("some trial degenerates");
        assert!(failed.errors[0].is_some());
        assert_eq!(&failed.errors[1..], &[None, None]);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let (backing, reference) = setup();
        let cfg = config();
        let one = run_experiment(&cfg, &backing, &reference, 1).unwrap();
        let three = run_experiment(&cfg, &backing, &reference, 3).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.len(), 12);
        assert_eq!((one[4].config_id.as_str(), one[4].trial), ("alecton", 1));
    }

    #[test]
    fn adding_entries_keeps_existing_trials() {
        let (backing, reference) = setup();
        let mut small = config();
        small.grid.truncate(1);
        let full = run_experiment(&config(), &backing, &reference, 1).unwrap();
        let part = run_experiment(&small, &backing, &reference, 1).unwrap();
        assert_eq!(&full[..3], &part[..]);
    }

    #[test]
    fn spca_improves_on_most_seeds() {
        let spec = SyntheticSpec::geometric_tail(100, &[0.12, 0.10, 0.08, 0.06], 0.03, 0.9, None).unwrap();
        let model = SyntheticModel::new(spec).unwrap();
        let reference = ReferenceSubspace::analytic(&model, 4).unwrap();
        let backing = Backing::Synthetic(Arc::new(model));
        let alg = Algorithm::Spca { c: 100.0, n0: 0.0 };
        let improved = (0..20u64)
            .filter(|&s| {
                let o = run_trial(&alg, &backing, &reference, &[1_000, 10_000, 100_000], 100_000, s).unwrap();
                o.errors[2].unwrap() < o.errors[0].unwrap()
            })
            .count();
        assert!(improved >= 16, "{improved}");
    }

    #[test]
    fn validation() {
        let mut c = config();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = config();
        c.checkpoints = vec![10, 10];
        assert!(c.validate().is_err());
        let mut c = config();
        c.checkpoints = vec![10, 4000];
        assert!(c.validate().is_err());
        let mut c = config();
        c.designated_checkpoints = vec![50];
        assert!(c.validate().is_err());
        let mut c = config();
        c.grid[1].id = "spca".into();
        assert!(c.validate().is_err());
        let mut c = config();
        c.grid[0].id = "a,b".into();
        assert!(c.validate().is_err());
        let mut c = config();
        c.grid[3].algorithm = Algorithm::Bpca { block: 0 };
        assert!(matches!(c.validate(), Err(HarnessError::Estimator { .. })));
        assert!(config().validate().is_ok());
    }
}
