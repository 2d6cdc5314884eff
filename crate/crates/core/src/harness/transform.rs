//! Signed permutations, the symmetry group of the (2,k)-norm.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{param_err, Result};
use crate::seed;

/// `(A x)_i = signs[i] * x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<f64>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&p, &s)| s * x[p])
            .collect()
    }

    pub fn apply_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let rows: Vec<Vec<f64>> = data.rows().map(|r| self.apply(r)).collect();
        let out = Dataset::from_rows(&rows)?;
        match data.inlier_mask() {
            Some(mask) => out.with_inlier_mask(mask.to_vec()),
            None => Ok(out),
        }
    }

    /// Dense row-major `n x n` matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            out[i * n + self.perm[i]] = self.signs[i];
        }
        out
    }
}

pub fn random_signed_permutation(n: usize, seed: u64) -> Result<SignedPermutation> {
    if n == 0 {
        return param_err("signed permutation needs n >= 1");
    }
    let mut rng = seed::rng(seed, &[0x5197]);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let signs = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    Ok(SignedPermutation { perm, signs })
}
