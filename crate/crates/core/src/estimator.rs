//! End-to-end pipeline and list construction.
//!
//! `difference_pairs -> dp_filter -> build_pair_graph -> rounding -> hk_truncate`.
//! A single run succeeds only with probability on the order of `alpha`, so
//! the list is built by running it many times with distinct seeds.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{param_err, Result};
use crate::filter::{dp_filter, FilterConfig, FilterOutcome};
use crate::graph::build_pair_graph;
use crate::oracle::DirectionOracle;
use crate::pairs::difference_pairs;
use crate::params::MomentParams;
use crate::rounding::{rounding, RoundingConfig, RoundingOutcome};
use crate::sparse::{hk_truncate, l2_dist, nonzero_count};
use crate::{par, seed};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EstimatorConfig {
    pub filter: FilterConfig,
    pub rounding: RoundingConfig,
    /// Overrides the list merge radius `M^{1/t} alpha^{-1/t}`.
    pub merge_radius: Option<f64>,
}

/// Everything one pipeline run produced.
#[derive(Debug, Clone)]
pub struct PipelineRun<'a> {
    pub filter: FilterOutcome<'a>,
    pub rounding: RoundingOutcome,
    /// Truncated estimate, `None` on FAIL.
    pub estimate: Option<Vec<f64>>,
}

/// Candidate list plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateList {
    pub candidates: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub fail_count: usize,
}

impl EstimateList {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn run_pipeline<'a>(
    data: &'a Dataset,
    params: &MomentParams,
    oracle: &dyn DirectionOracle,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<PipelineRun<'a>> {
    params.validate_for_dim(data.n())?;
    let pairs = difference_pairs(data)?;
    let filter = dp_filter(
        &pairs,
        params,
        oracle,
        &config.filter,
        seed::derive(seed, &[1]),
    )?;
    let graph = build_pair_graph(&filter.retained);
    let rounding = rounding(
        data,
        &graph,
        params.alpha,
        seed::derive(seed, &[2]),
        &config.rounding,
    )?;
    let estimate = match rounding.estimate() {
        Some(mean) => Some(hk_truncate(mean, params.k)?),
        None => None,
    };
    debug_assert!(estimate
        .as_ref()
        .is_none_or(|e| nonzero_count(e) <= params.k));
    Ok(PipelineRun {
        filter,
        rounding,
        estimate,
    })
}

/// One run of the pipeline; `Ok(None)` is a FAIL.
pub fn ld_sparse_mean(
    data: &Dataset,
    params: &MomentParams,
    oracle: &dyn DirectionOracle,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    Ok(run_pipeline(data, params, oracle, config, seed)?.estimate)
}

/// Runs the pipeline with seeds `seed+1 ..= seed+rounds` and merges
/// candidates closer than the merge radius, keeping the earliest.
pub fn estimate_list(
    data: &Dataset,
    params: &MomentParams,
    oracle: &dyn DirectionOracle,
    config: &EstimatorConfig,
    rounds: usize,
    seed: u64,
) -> Result<EstimateList> {
    if rounds < 1 {
        return param_err("rounds must be >= 1");
    }
    params.validate_for_dim(data.n())?;
    let seeds: Vec<u64> = (1..=rounds as u64).map(|r| seed.wrapping_add(r)).collect();
    let outputs = par::map_slice(&seeds, |&s| ld_sparse_mean(data, params, oracle, config, s));

    let radius = config.merge_radius.unwrap_or_else(|| params.merge_radius());
    let mut list = EstimateList {
        candidates: Vec::new(),
        seeds: Vec::new(),
        fail_count: 0,
    };
    for (s, out) in seeds.into_iter().zip(outputs) {
        match out? {
            None => list.fail_count += 1,
            Some(candidate) => {
                if list
                    .candidates
                    .iter()
                    .all(|c| l2_dist(c, &candidate) >= radius)
                {
                    list.candidates.push(candidate);
                    list.seeds.push(s);
                }
            }
        }
    }
    Ok(list)
}

/// `min_u |u - mu|_2` over the list, `+inf` when empty.
pub fn min_list_error(list: &EstimateList, mu_true: &[f64]) -> f64 {
    list.candidates
        .iter()
        .map(|c| l2_dist(c, mu_true))
        .fold(f64::INFINITY, f64::min)
}
