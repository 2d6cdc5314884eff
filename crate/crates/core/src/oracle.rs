//! Violating-direction oracles.
//!
//! The filter needs to know, for the current point set, whether some
//! `k`-sparse unit direction `v` has a large power sum `sum_x <v, x>^t`, and
//! if so which one. Two oracles answer this:
//!
//! * [`sparse_moment_max_exact_t2`]: for `t = 2` the maximum over a fixed
//!   support is the top eigenvalue of the restricted second-moment matrix, so
//!   enumerating all `C(n, k)` supports gives the exact maximum.
//! * [`sparse_moment_max_ascent`]: for larger `t`, projected power ascent
//!   `v <- normalize(sum_x <v, x>^{t-1} x)` on every support with several
//!   restarts. The value is achieved by the returned direction, so it is a
//!   certified lower bound on the true maximum.
//!
//! Both reduce over supports in lexicographic order and keep the first
//! maximizer, so results do not depend on the worker count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::params::MomentParams;
use crate::points::PointSet;
use crate::sparse::{binomial, supports, SparseDirection};
use crate::{par, seed};

pub const DEFAULT_ENUM_BUDGET: u128 = 1_000_000;
pub const DEFAULT_RESTARTS: usize = 8;
pub const DEFAULT_ASCENT_ITERS: usize = 100;

/// Best direction found and its power sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMax {
    pub value: f64,
    pub direction: SparseDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    Bounded,
    Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCertificate {
    pub kind: CertificateKind,
    /// Present iff `kind == Violation`.
    pub direction: Option<SparseDirection>,
    /// Best power sum the oracle found.
    pub value: f64,
    /// Whether `value` is the exact maximum for this instance.
    pub exact: bool,
}

impl DirectionCertificate {
    pub fn is_violation(&self) -> bool {
        self.kind == CertificateKind::Violation
    }
}

/// Decides bounded-vs-violating for a point set.
pub trait DirectionOracle: Sync {
    fn certify(
        &self,
        points: &dyn PointSet,
        params: &MomentParams,
        threshold: f64,
        seed: u64,
    ) -> Result<DirectionCertificate>;
}

/// Exact enumeration at `t = 2`, power ascent otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseOracle {
    pub enum_budget: u128,
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for SparseOracle {
    fn default() -> Self {
        Self {
            enum_budget: DEFAULT_ENUM_BUDGET,
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_ASCENT_ITERS,
        }
    }
}

impl SparseOracle {
    pub fn with_budget(mut self, budget: u128) -> Self {
        self.enum_budget = budget;
        self
    }

    pub fn maximize(
        &self,
        points: &dyn PointSet,
        k: usize,
        t: u32,
        seed: u64,
    ) -> Result<SparseMax> {
        if t == 2 {
            exact_t2(points, k, self.enum_budget)
        } else {
            ascent(
                points,
                k,
                t,
                self.restarts,
                self.max_iters,
                seed,
                self.enum_budget,
            )
        }
    }
}

impl DirectionOracle for SparseOracle {
    fn certify(
        &self,
        points: &dyn PointSet,
        params: &MomentParams,
        threshold: f64,
        seed: u64,
    ) -> Result<DirectionCertificate> {
        if !(threshold > 0.0) {
            return param_err(format!(
                "oracle threshold must be positive, got {threshold}"
            ));
        }
        params.validate_for_dim(points.dim())?;
        let exact = params.t == 2;
        if points.is_empty() {
            return Ok(DirectionCertificate {
                kind: CertificateKind::Bounded,
                direction: None,
                value: 0.0,
                exact,
            });
        }
        let best = self.maximize(points, params.k, params.t, seed)?;
        Ok(if best.value > threshold {
            DirectionCertificate {
                kind: CertificateKind::Violation,
                direction: Some(best.direction),
                value: best.value,
                exact,
            }
        } else {
            DirectionCertificate {
                kind: CertificateKind::Bounded,
                direction: None,
                value: best.value,
                exact,
            }
        })
    }
}

/// Default-configured [`SparseOracle`] as a one-shot call.
pub fn certify_or_violate(
    points: &dyn PointSet,
    params: &MomentParams,
    threshold: f64,
    seed: u64,
) -> Result<DirectionCertificate> {
    SparseOracle::default().certify(points, params, threshold, seed)
}

/// Exact `max_{v k-sparse, |v|=1} sum_x <v, x>^2`.
pub fn sparse_moment_max_exact_t2(
    points: &dyn PointSet,
    k: usize,
    budget: u128,
) -> Result<SparseMax> {
    exact_t2(points, k, budget)
}

/// Best direction found by projected power ascent on `sum_x <v, x>^t`.
pub fn sparse_moment_max_ascent(
    points: &dyn PointSet,
    k: usize,
    t: u32,
    restarts: usize,
    seed: u64,
) -> Result<SparseMax> {
    ascent(
        points,
        k,
        t,
        restarts,
        DEFAULT_ASCENT_ITERS,
        seed,
        DEFAULT_ENUM_BUDGET,
    )
}

fn enumerate(n: usize, k: usize, budget: u128) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return param_err(format!("sparsity k = {k} outside 1..={n}"));
    }
    let count = binomial(n, k);
    if count > budget {
        return Err(Error::Budget {
            supports: count,
            budget,
        });
    }
    Ok(supports(n, k).collect())
}

/// Top eigenpair of a small symmetric matrix, eigenvector sign-normalized so
/// its largest-magnitude entry is positive.
pub(crate) fn top_eigen(mat: &[f64], k: usize) -> (f64, Vec<f64>) {
    if k == 1 {
        return (mat[0], vec![1.0]);
    }
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(k, k, mat));
    let (mut best, mut lambda) = (0, f64::NEG_INFINITY);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > lambda {
            lambda = l;
            best = i;
        }
    }
    let mut vec: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
    canonical_sign(&mut vec);
    (lambda, vec)
}

fn canonical_sign(v: &mut [f64]) {
    let mut pivot = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn restrict(full: &[f64], n: usize, support: &[usize]) -> Vec<f64> {
    let k = support.len();
    let mut out = vec![0.0; k * k];
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            out[a * k + b] = full[i * n + j];
        }
    }
    out
}

/// First strict maximum in order.
fn reduce_first_max(candidates: Vec<(f64, Vec<f64>)>, supports: &[Vec<usize>]) -> SparseMax {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.0 > candidates[best].0 {
            best = i;
        }
    }
    let (value, ref vec) = candidates[best];
    if value <= 0.0 {
        return SparseMax {
            value: 0.0,
            direction: SparseDirection::basis(supports[0][0]),
        };
    }
    SparseMax {
        value,
        direction: SparseDirection::from_support_values(&supports[best], vec),
    }
}

fn exact_t2(points: &dyn PointSet, k: usize, budget: u128) -> Result<SparseMax> {
    let n = points.dim();
    let sups = enumerate(n, k, budget)?;
    let gram = points.second_moment();
    let candidates = par::map_slice(&sups, |s| top_eigen(&restrict(&gram, n, s), s.len()));
    Ok(reduce_first_max(candidates, &sups))
}

/// `sum_x <v, x>^t` and the ascent step `sum_x <v, x>^{t-1} x` on projected points.
fn value_and_step(proj: &[f64], v: &[f64], t: u32) -> (f64, Vec<f64>) {
    let k = v.len();
    let mut value = 0.0;
    let mut step = vec![0.0; k];
    for x in proj.chunks_exact(k) {
        let p: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        let pt1 = p.powi(t as i32 - 1);
        value += pt1 * p;
        for (s, xc) in step.iter_mut().zip(x) {
            *s += pt1 * xc;
        }
    }
    (value, step)
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

fn ascent_on_support(
    proj: &[f64],
    k: usize,
    t: u32,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, vec![0.0; k]);
    for r in 0..restarts.max(1) {
        let mut v = if r == 0 {
            // warm start from the second-moment eigenvector
            let mut second = vec![0.0; k * k];
            for x in proj.chunks_exact(k) {
                for a in 0..k {
                    for b in 0..k {
                        second[a * k + b] += x[a] * x[b];
                    }
                }
            }
            top_eigen(&second, k).1
        } else {
            let mut rng = seed::rng(seed, &[r as u64]);
            let mut v: Vec<f64> = (0..k)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            if !normalize(&mut v) {
                v = vec![0.0; k];
                v[0] = 1.0;
            }
            v
        };
        for _ in 0..max_iters {
            let (value, mut step) = value_and_step(proj, &v, t);
            if value > best.0 {
                best = (value, v.clone());
            }
            if !normalize(&mut step) {
                break;
            }
            let moved: f64 = step.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = step;
            if moved < 1e-13 {
                break;
            }
        }
        let (value, _) = value_and_step(proj, &v, t);
        if value > best.0 {
            best = (value, v);
        }
    }
    canonical_sign(&mut best.1);
    best
}

fn ascent(
    points: &dyn PointSet,
    k: usize,
    t: u32,
    restarts: usize,
    max_iters: usize,
    seed: u64,
    budget: u128,
) -> Result<SparseMax> {
    if t < 2 || t % 2 != 0 {
        return param_err(format!("moment order t must be even and >= 2, got {t}"));
    }
    let n = points.dim();
    let sups = enumerate(n, k, budget)?;
    let candidates: Vec<(f64, Vec<f64>)> = par::map_range(sups.len(), |si| {
        let s = &sups[si];
        let proj = points.projected(s);
        ascent_on_support(
            &proj,
            s.len(),
            t,
            restarts,
            max_iters,
            seed::derive(seed, &[si as u64]),
        )
    });
    Ok(reduce_first_max(candidates, &sups))
}
