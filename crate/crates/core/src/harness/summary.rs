use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{ExperimentConfig, TrialRecord, TrialStatus};
use crate::estimators::Family;

/// Mean and standard error of one entry at one checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointStat {
    pub checkpoint: u64,
    /// Trials with a recorded error at this checkpoint.
    pub count: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(count)`; 0 for a single trial.
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigSummary {
    pub config_id: String,
    pub family: Family,
    pub stats: Vec<CheckpointStat>,
    pub failed_trials: usize,
    /// Every trial failed; the entry is left out of the best-parameter tables.
    pub flagged: bool,
}

/// Best entry of a family at a designated checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct BestEntry {
    pub checkpoint: u64,
    pub family: Family,
    pub config_id: String,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Welch test between the best entries of two families.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub checkpoint: u64,
    pub first: BestEntry,
    pub second: BestEntry,
    /// `None` when either side has fewer than two successful trials.
    pub test: Option<WelchResult>,
}

impl Comparison {
    pub fn significant(&self) -> bool {
        self.test.is_some_and(|t| t.p_value < 0.05)
    }

    /// The family with the lower mean, if the difference is significant.
    pub fn winner(&self) -> Option<Family> {
        if !self.significant() {
            return None;
        }
        Some(if self.first.mean < self.second.mean {
            self.first.family
        } else {
            self.second.family
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub checkpoints: Vec<u64>,
    pub configs: Vec<ConfigSummary>,
    pub best: Vec<BestEntry>,
    pub comparisons: Vec<Comparison>,
}

impl ExperimentSummary {
    pub fn config(&self, id: &str) -> Option<&ConfigSummary> {
        self.configs.iter().find(|c| c.config_id == id)
    }

    pub fn best_for(&self, family: Family, checkpoint: u64) -> Option<&BestEntry> {
        self.best
            .iter()
            .find(|b| b.family == family && b.checkpoint == checkpoint)
    }

    pub fn comparison(&self, a: Family, b: Family, checkpoint: u64) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| {
            c.checkpoint == checkpoint
                && ((c.first.family == a && c.second.family == b) || (c.first.family == b && c.second.family == a))
        })
    }
}

fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

/// Two-sided Welch t-test. Needs at least two values per sample.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Option<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v / n, n)
    };
    let (ma, sa, na) = stats(a);
    let (mb, sb, nb) = stats(b);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Some(if ma == mb {
            WelchResult {
                t: 0.0,
                df: na + nb - 2.0,
                p_value: 1.0,
            }
        } else {
            WelchResult {
                t: if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY },
                df: na + nb - 2.0,
                p_value: 0.0,
            }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some(WelchResult {
        t,
        df,
        p_value: (2.0 * dist.sf(t.abs())).min(1.0),
    })
}

/// Per-entry statistics, best entry per family at each designated checkpoint
/// (lowest mean), and Welch tests between every pair of family winners.
///
/// `records` must come from [`super::run_experiment`] on `config`.
pub fn aggregate(config: &ExperimentConfig, records: &[TrialRecord]) -> ExperimentSummary {
    let checkpoints = config.checkpoints.clone();
    let mut values: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); checkpoints.len()]; config.grid.len()];
    let mut failed = vec![0usize; config.grid.len()];
    let mut totals = vec![0usize; config.grid.len()];
    for r in records {
        let Some(ci) = config.grid.iter().position(|e| e.id == r.config_id) else {
            continue;
        };
        totals[ci] += 1;
        if r.status != TrialStatus::Ok {
            failed[ci] += 1;
            continue;
        }
        for (slot, e) in values[ci].iter_mut().zip(&r.errors) {
            if let Some(e) = e {
                slot.push(*e);
            }
        }
    }

    let configs: Vec<ConfigSummary> = config
        .grid
        .iter()
        .enumerate()
        .map(|(ci, entry)| ConfigSummary {
            config_id: entry.id.clone(),
            family: entry.family(),
            stats: checkpoints
                .iter()
                .zip(&values[ci])
                .map(|(&checkpoint, v)| {
                    let (mean, stderr) = mean_stderr(v);
                    CheckpointStat {
                        checkpoint,
                        count: v.len(),
                        mean,
                        stderr,
                    }
                })
                .collect(),
            failed_trials: failed[ci],
            flagged: totals[ci] > 0 && failed[ci] == totals[ci],
        })
        .collect();

    let mut best = Vec::new();
    let mut winners = Vec::new();
    for &checkpoint in &config.designated_checkpoints {
        let pos = checkpoints.iter().position(|&c| c == checkpoint).expect("validated");
        for family in Family::ALL {
            let candidate = configs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.family == family && !c.flagged)
                .filter_map(|(ci, c)| {
                    let s = &c.stats[pos];
                    s.mean.map(|m| (ci, m, s))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((ci, mean, s)) = candidate {
                best.push(BestEntry {
                    checkpoint,
                    family,
                    config_id: configs[ci].config_id.clone(),
                    mean,
                    stderr: s.stderr.unwrap_or(0.0),
                    count: s.count,
                });
                winners.push((checkpoint, pos, ci, best.len() - 1));
            }
        }
    }

    let mut comparisons = Vec::new();
    for (i, &(cp, pos, ca, ba)) in winners.iter().enumerate() {
        for &(cp2, _, cb, bb) in &winners[i + 1..] {
            if cp2 != cp {
                continue;
            }
            comparisons.push(Comparison {
                checkpoint: cp,
                first: best[ba].clone(),
                second: best[bb].clone(),
                test: welch_t_test(&values[ca][pos], &values[cb][pos]),
            });
        }
    }

    ExperimentSummary {
        checkpoints,
        configs,
        best,
        comparisons,
    }
}
