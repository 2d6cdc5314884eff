//! Trials, sweeps and key-value config files.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{estimate_list, min_list_error, EstimateList, EstimatorConfig};
use crate::harness::scenario::{gen_corrupted, Adversary, ScenarioConfig};
use crate::oracle::{sparse_moment_max_exact_t2, DirectionOracle, DEFAULT_ENUM_BUDGET};
use crate::points::Points;
use crate::seed;
use crate::sparse::l2_dist;

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            return Err(Error::Format(format!(
                "line {}: expected key = value",
                lineno + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub min_list_error: f64,
    pub sample_mean_error: f64,
    pub inlier_mean_error: f64,
    pub list_size: usize,
    pub fail_count: usize,
}

/// Seed of trial `i` in a scenario.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    seed::derive(base, &[0x7a1, trial as u64])
}

/// Generates trial `trial` of `config` and runs the list estimator on it.
pub fn run_trial(
    config: &ScenarioConfig,
    trial: usize,
    rounds: Option<usize>,
    oracle: &dyn DirectionOracle,
    est: &EstimatorConfig,
) -> Result<(TrialResult, EstimateList)> {
    let s = trial_seed(config.seed, trial);
    let scenario = gen_corrupted(&ScenarioConfig {
        seed: s,
        ..config.clone()
    })?;
    let params = config.params()?;
    let rounds = rounds.unwrap_or_else(|| params.default_rounds());
    let list = estimate_list(&scenario.data, &params, oracle, est, rounds, s)?;
    let inliers = scenario.data.inlier_indices().unwrap_or_default();
    let result = TrialResult {
        trial,
        seed: s,
        min_list_error: min_list_error(&list, &scenario.mu_true),
        sample_mean_error: l2_dist(&scenario.data.mean(), &scenario.mu_true),
        inlier_mean_error: l2_dist(&scenario.data.mean_of(&inliers), &scenario.mu_true),
        list_size: list.len(),
        fail_count: list.fail_count,
    };
    Ok((result, list))
}

/// Trials run one after another; each already saturates the pool.
pub fn run_trials(
    config: &ScenarioConfig,
    rounds: Option<usize>,
    oracle: &dyn DirectionOracle,
    est: &EstimatorConfig,
) -> Result<Vec<TrialResult>> {
    (0..config.trials)
        .map(|i| run_trial(config, i, rounds, oracle, est).map(|(r, _)| r))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub adversary: Adversary,
    pub trial: usize,
    pub seed: u64,
    pub min_list_error: f64,
    pub sample_mean_error: f64,
    pub list_size: usize,
    pub fail_count: usize,
}

/// Every `(alpha, adversary)` combination, `config.trials` trials each.
pub fn sweep(
    config: &ScenarioConfig,
    alphas: &[f64],
    adversaries: &[Adversary],
    rounds: Option<usize>,
    oracle: &dyn DirectionOracle,
    est: &EstimatorConfig,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &adversary in adversaries {
            let cfg = ScenarioConfig {
                alpha,
                adversary,
                ..config.clone()
            };
            for r in run_trials(&cfg, rounds, oracle, est)? {
                rows.push(SweepRow {
                    alpha,
                    adversary,
                    trial: r.trial,
                    seed: r.seed,
                    min_list_error: r.min_list_error,
                    sample_mean_error: r.sample_mean_error,
                    list_size: r.list_size,
                    fail_count: r.fail_count,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `max_{|S| = k} lambda_max` of the centered second moment of the inlier
/// rows, normalized by their count.
pub fn inlier_sparse_variance(data: &Dataset, k: usize) -> Result<f64> {
    let idx = data
        .inlier_indices()
        .ok_or_else(|| Error::Parameter("dataset has no inlier mask".into()))?;
    let mu = data.mean_of(&idx);
    let centered: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| data.row(i).iter().zip(&mu).map(|(x, m)| x - m).collect())
        .collect();
    let best =
        sparse_moment_max_exact_t2(&Points::new(&centered, data.n()), k, DEFAULT_ENUM_BUDGET)?;
    Ok(best.value / idx.len() as f64)
}
