//! Randomized rounding of a bounded-moment pair graph to a candidate mean.
//!
//! Pick a uniformly random anchor vertex `x` and take its neighborhood `W`.
//! In the overlap graph `G' = R_delta(G)` with `delta = alpha^3 / 4608`, a
//! good anchor's neighborhood is nearly a clique; pruning it turns it into a
//! clique of `R_{beta/3}(G')` whose mean is close to the inlier mean.

use rand::Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{param_err, Result};
use crate::graph::{overlap_subgraph, prune, PairGraph};
use crate::seed;

pub const DEFAULT_DELTA_DENOMINATOR: f64 = 4608.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingConfig {
    /// `delta = alpha^3 / delta_denominator`.
    pub delta_denominator: f64,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            delta_denominator: DEFAULT_DELTA_DENOMINATOR,
        }
    }
}

impl RoundingConfig {
    pub fn delta(&self, alpha: f64) -> f64 {
        alpha.powi(3) / self.delta_denominator
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingEstimate {
    pub mean: Vec<f64>,
    pub anchor: usize,
    pub neighborhood: usize,
    /// Vertices surviving the prune, ascending.
    pub kept: Vec<usize>,
}

/// Why a rounding attempt returned FAIL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RoundingFailure {
    /// `|W| <= (alpha/4) m`.
    SmallNeighborhood { anchor: usize, size: usize },
    /// More than `(8 delta / alpha) m^2` pairs of `W` are non-adjacent in `G'`.
    SparseNeighborhood { anchor: usize, missing: usize },
    /// Pruning removed everything, so there is no mean to report.
    EmptyPrune { anchor: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RoundingOutcome {
    Estimate(RoundingEstimate),
    Fail(RoundingFailure),
}

impl RoundingOutcome {
    pub fn estimate(&self) -> Option<&[f64]> {
        match self {
            RoundingOutcome::Estimate(e) => Some(&e.mean),
            RoundingOutcome::Fail(_) => None,
        }
    }

    pub fn into_estimate(self) -> Option<Vec<f64>> {
        match self {
            RoundingOutcome::Estimate(e) => Some(e.mean),
            RoundingOutcome::Fail(_) => None,
        }
    }
}

pub fn rounding(
    data: &Dataset,
    g: &PairGraph,
    alpha: f64,
    seed: u64,
    config: &RoundingConfig,
) -> Result<RoundingOutcome> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return param_err(format!("alpha must lie in (0, 1/2), got {alpha}"));
    }
    if g.vertex_count() != data.m() {
        return param_err(format!(
            "graph has {} vertices but the dataset has {} samples",
            g.vertex_count(),
            data.m()
        ));
    }
    let m = data.m();
    let mf = m as f64;
    let anchor = seed::rng(seed, &[]).random_range(0..m);
    let w = g.neighbors(anchor);
    if w.len() as f64 <= alpha / 4.0 * mf {
        return Ok(RoundingOutcome::Fail(RoundingFailure::SmallNeighborhood {
            anchor,
            size: w.len(),
        }));
    }

    let delta = config.delta(alpha);
    // G' is only ever inspected on pairs inside W
    let local = overlap_subgraph(g, delta, &w)?;
    let total_pairs = w.len() * (w.len() - 1) / 2;
    let missing = total_pairs - local.edge_count();
    if missing as f64 > 8.0 * delta / alpha * mf * mf {
        return Ok(RoundingOutcome::Fail(RoundingFailure::SparseNeighborhood {
            anchor,
            missing,
        }));
    }

    let local_ids: Vec<usize> = (0..w.len()).collect();
    let kept: Vec<usize> = prune(&local, &local_ids)
        .into_iter()
        .map(|i| w[i])
        .collect();
    if kept.is_empty() {
        return Ok(RoundingOutcome::Fail(RoundingFailure::EmptyPrune {
            anchor,
        }));
    }
    Ok(RoundingOutcome::Estimate(RoundingEstimate {
        mean: data.mean_of(&kept),
        anchor,
        neighborhood: w.len(),
        kept,
    }))
}
