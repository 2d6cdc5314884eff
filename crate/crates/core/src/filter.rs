//! Difference-of-pairs moment filter.
//!
//! Starting from all pairwise differences `T`, the filter asks the oracle for
//! a sparse direction `v` with `sum_{x in T'} <v, x>^t > 6 M_eff |T|`. If one
//! exists, every pair is thrown out independently with probability
//! `<v, x>^t / max_x <v, x>^t` (the maximizer always goes), and the loop
//! repeats. Inlier differences carry little mass along any violating
//! direction, so they are rarely the ones removed.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{DirectionCertificate, DirectionOracle};
use crate::pairs::DifferenceSet;
use crate::params::MomentParams;
use crate::{par, seed};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterConfig {
    /// Overrides the moment scale `M_eff` (default `2^t * 8 * M`).
    pub filter_moment: Option<f64>,
    /// Aborts once this many iterations ran. Defaults to `|T|`, which argmax
    /// removal already guarantees.
    pub soft_cap: Option<usize>,
}

impl FilterConfig {
    pub fn filter_moment(&self, params: &MomentParams) -> f64 {
        self.filter_moment
            .unwrap_or_else(|| params.default_filter_moment())
    }

    /// `6 * M_eff * |T|`.
    pub fn threshold(&self, params: &MomentParams, initial_size: usize) -> f64 {
        6.0 * self.filter_moment(params) * initial_size as f64
    }
}

/// One filter iteration, as written to the JSON-lines trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterStep {
    pub iteration: usize,
    pub support: Vec<usize>,
    pub direction: Vec<f64>,
    pub value: f64,
    pub removed: usize,
    pub remaining: usize,
    /// Retention potential after the step; needs a ground-truth mask.
    pub potential: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FilterOutcome<'a> {
    pub retained: DifferenceSet<'a>,
    pub steps: Vec<FilterStep>,
    pub threshold: f64,
    /// The certificate that ended the loop.
    pub certificate: DirectionCertificate,
    /// Potential before the first step, when a mask is available.
    pub initial_potential: Option<f64>,
}

impl FilterOutcome<'_> {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn write_trace(&self, mut out: impl Write) -> Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// `(|T_g ∩ T'| - (alpha^2/6)|T'|) / |T|`.
pub fn filter_potential(
    current: &DifferenceSet<'_>,
    good: &DifferenceSet<'_>,
    initial_size: usize,
    alpha: f64,
) -> f64 {
    if initial_size == 0 {
        return 0.0;
    }
    potential_from_counts(
        current.intersection_count(good),
        current.len(),
        initial_size,
        alpha,
    )
}

pub fn potential_from_counts(
    good_retained: usize,
    retained: usize,
    initial_size: usize,
    alpha: f64,
) -> f64 {
    (good_retained as f64 - alpha * alpha / 6.0 * retained as f64) / initial_size as f64
}

pub fn dp_filter<'a>(
    pairs: &DifferenceSet<'a>,
    params: &MomentParams,
    oracle: &dyn DirectionOracle,
    config: &FilterConfig,
    seed: u64,
) -> Result<FilterOutcome<'a>> {
    params.validate_for_dim(pairs.data().n())?;
    let initial = pairs.len();
    let threshold = config.threshold(params, initial);
    let cap = config.soft_cap.unwrap_or(initial);
    let good = DifferenceSet::inlier_pairs(pairs.data());
    let potential = |set: &DifferenceSet<'_>| {
        good.as_ref()
            .map(|g| filter_potential(set, g, initial, params.alpha))
    };

    let mut current = pairs.clone();
    let mut steps = Vec::new();
    let initial_potential = potential(&current);
    loop {
        let iteration = steps.len();
        let certificate = oracle.certify(
            &current,
            params,
            threshold,
            seed::derive(seed, &[iteration as u64, 0]),
        )?;
        let Some(direction) = certificate
            .direction
            .clone()
            .filter(|_| certificate.is_violation())
        else {
            return Ok(FilterOutcome {
                retained: current,
                steps,
                threshold,
                certificate,
                initial_potential,
            });
        };
        if iteration >= cap {
            return Err(Error::IterationCap {
                cap,
                remaining: current.len(),
            });
        }

        let t = params.t as i32;
        let weights = par::map_range(current.len(), |p| current.projection(p, &direction).powi(t));
        let mut argmax = 0;
        for (p, &w) in weights.iter().enumerate() {
            if w > weights[argmax] {
                argmax = p;
            }
        }
        let max_w = weights[argmax];
        let list = current.pairs();
        let keep = par::map_range(current.len(), |p| {
            if p == argmax {
                return false;
            }
            if max_w <= 0.0 {
                return true;
            }
            let (i, j) = list[p];
            let u = seed::unit(seed, &[iteration as u64, 1, i as u64, j as u64]);
            u >= weights[p] / max_w
        });
        let next = current.retain_mask(&keep);
        let removed = current.len() - next.len();
        current = next;
        steps.push(FilterStep {
            iteration,
            support: direction.support().to_vec(),
            direction: direction.values().to_vec(),
            value: certificate.value,
            removed,
            remaining: current.len(),
            potential: potential(&current),
        });
    }
}
