//! Point clouds seen by the direction oracles.
//!
//! The oracles only need three things from a point set: the second-moment
//! matrix, coordinates projected onto a support, and power sums along a
//! direction. [`PointSet`] exposes exactly that, so the filter can hand the
//! oracles its pair differences without ever materializing all of them.

use crate::par;
use crate::sparse::SparseDirection;

pub trait PointSet: Sync {
    fn dim(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the coordinates of point `idx` on `support` into `out`.
    fn project(&self, idx: usize, support: &[usize], out: &mut [f64]);

    /// `<v, x_idx>`.
    fn dot(&self, idx: usize, v: &SparseDirection) -> f64;

    /// `sum_x x x^T` as a row-major `n x n` matrix.
    fn second_moment(&self) -> Vec<f64> {
        let n = self.dim();
        let all: Vec<usize> = (0..n).collect();
        let mut acc = vec![0.0; n * n];
        let mut x = vec![0.0; n];
        for idx in 0..self.len() {
            self.project(idx, &all, &mut x);
            for a in 0..n {
                let xa = x[a];
                if xa == 0.0 {
                    continue;
                }
                for b in 0..n {
                    acc[a * n + b] += xa * x[b];
                }
            }
        }
        acc
    }

    /// All points projected onto `support`, row-major `len x |support|`.
    fn projected(&self, support: &[usize]) -> Vec<f64> {
        let k = support.len();
        let mut out = vec![0.0; self.len() * k];
        for (idx, row) in out.chunks_exact_mut(k.max(1)).enumerate().take(self.len()) {
            self.project(idx, support, row);
        }
        out
    }

    /// `sum_x <v, x>^t`.
    fn power_sum(&self, v: &SparseDirection, t: u32) -> f64 {
        par::chunked_sum(self.len(), |idx| self.dot(idx, v).powi(t as i32))
    }
}

/// Dense points, one `Vec` per point.
pub struct Points<'a> {
    rows: &'a [Vec<f64>],
    n: usize,
}

impl<'a> Points<'a> {
    /// `n` is taken from the first row; an empty list needs it explicitly.
    pub fn new(rows: &'a [Vec<f64>], n: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == n));
        Self { rows, n }
    }

    pub fn from_rows(rows: &'a [Vec<f64>]) -> Self {
        let n = rows.first().map_or(0, Vec::len);
        Self::new(rows, n)
    }
}

impl PointSet for Points<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn project(&self, idx: usize, support: &[usize], out: &mut [f64]) {
        let row = &self.rows[idx];
        for (o, &j) in out.iter_mut().zip(support) {
            *o = row[j];
        }
    }

    fn dot(&self, idx: usize, v: &SparseDirection) -> f64 {
        v.dot(&self.rows[idx])
    }
}
