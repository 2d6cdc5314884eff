//! Sparse vectors: top-k truncation, the (2,k)-norm, unit directions with
//! small support, and lexicographic support enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

/// Unit-norm tolerance accepted by [`SparseDirection::new`].
pub const UNIT_TOL: f64 = 1e-12;

/// A unit vector with at most `k` nonzero coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseDirection {
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseDirection {
    /// Builds a direction, checking sorted support, alignment and unit norm.
    pub fn new(support: Vec<usize>, values: Vec<f64>, k: usize, n: usize) -> Result<Self> {
        if support.len() != values.len() {
            return param_err("support and values differ in length");
        }
        if support.is_empty() || support.len() > k {
            return param_err(format!("support size {} outside 1..={k}", support.len()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return param_err("support indices must be strictly increasing");
        }
        if support.last().is_some_and(|&i| i >= n) {
            return param_err(format!("support index out of range for n = {n}"));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return param_err(format!("direction has norm {norm}, expected 1"));
        }
        Ok(Self { support, values })
    }

    /// Normalizes `values` over `support`, dropping exact zeros. Returns
    /// `e_{support[0]}` when all values vanish.
    pub(crate) fn from_support_values(support: &[usize], values: &[f64]) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Self::basis(support[0]);
        }
        let (support, values): (Vec<_>, Vec<_>) = support
            .iter()
            .zip(values)
            .filter(|(_, &v)| v != 0.0)
            .map(|(&i, &v)| (i, v / norm))
            .unzip();
        Self { support, values }
    }

    pub fn basis(index: usize) -> Self {
        Self {
            support: vec![index],
            values: vec![1.0],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| v * x[i])
            .sum()
    }

    /// `<v, a - b>` without materializing the difference.
    #[inline]
    pub fn dot_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| v * (a[i] - b[i]))
            .sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return param_err(format!("sparsity k = {k} outside 1..={n}"));
    }
    Ok(())
}

/// Indices of the `k` largest-magnitude entries, ties to the lowest index.
fn top_k_indices(x: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps lower indices first among equal magnitudes
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    idx.truncate(k);
    idx
}

/// Keeps the `k` largest-magnitude entries of `x` and zeroes the rest.
pub fn hk_truncate(x: &[f64], k: usize) -> Result<Vec<f64>> {
    check_k(k, x.len())?;
    let mut out = vec![0.0; x.len()];
    for i in top_k_indices(x, k) {
        out[i] = x[i];
    }
    Ok(out)
}

/// `sup <v, x>` over `k`-sparse unit `v`: the l2 norm of the top-k magnitudes.
pub fn two_k_norm(x: &[f64], k: usize) -> Result<f64> {
    check_k(k, x.len())?;
    Ok(top_k_indices(x, k)
        .into_iter()
        .map(|i| x[i] * x[i])
        .sum::<f64>()
        .sqrt())
}

pub fn nonzero_count(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

pub fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn supports(n: usize, k: usize) -> Supports {
    Supports {
        n,
        current: if k <= n { Some((0..k).collect()) } else { None },
    }
}

pub struct Supports {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Supports {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
