//! Difference sets: unordered sample pairs standing for `x_i - x_j`.
//!
//! With even moment orders the orientation of a difference never matters, so
//! a pair `{i, j}` represents both `x_i - x_j` and `x_j - x_i`. Pairs are kept
//! as `(i, j)` with `i < j`, sorted.

use std::collections::HashSet;

use crate::dataset::Dataset;
use crate::error::{param_err, Result};
use crate::points::PointSet;
use crate::sparse::SparseDirection;

pub type Pair = (usize, usize);

#[derive(Debug, Clone)]
pub struct DifferenceSet<'a> {
    data: &'a Dataset,
    pairs: Vec<Pair>,
}

impl<'a> DifferenceSet<'a> {
    /// Validates and canonicalizes a pair list.
    pub fn new(data: &'a Dataset, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let m = data.m();
        let mut out = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return param_err(format!("self-pair {{{a}, {a}}}"));
            }
            if a >= m || b >= m {
                return param_err(format!("pair {{{a}, {b}}} out of range for m = {m}"));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        let before = out.len();
        out.dedup();
        if out.len() != before {
            return param_err("duplicate pairs");
        }
        Ok(Self { data, pairs: out })
    }

    /// All `C(m, 2)` pairs.
    pub fn all(data: &'a Dataset) -> Result<Self> {
        let m = data.m();
        if m < 2 {
            return param_err(format!("need at least 2 samples, got {m}"));
        }
        let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                pairs.push((i, j));
            }
        }
        Ok(Self { data, pairs })
    }

    /// Pairs with both endpoints flagged as inliers, if the dataset has a mask.
    pub fn inlier_pairs(data: &'a Dataset) -> Option<Self> {
        let idx = data.inlier_indices()?;
        let mut pairs = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                pairs.push((i, j));
            }
        }
        Some(Self { data, pairs })
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        let key = (pair.0.min(pair.1), pair.0.max(pair.1));
        self.pairs.binary_search(&key).is_ok()
    }

    /// Keeps the pairs whose flag in `keep` is set.
    pub fn retain_mask(&self, keep: &[bool]) -> Self {
        debug_assert_eq!(keep.len(), self.pairs.len());
        let pairs = self
            .pairs
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&p, _)| p)
            .collect();
        Self {
            data: self.data,
            pairs,
        }
    }

    pub fn intersection_count(&self, other: &DifferenceSet<'_>) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .pairs
            .iter()
            .filter(|&&p| large.pairs.binary_search(&p).is_ok())
            .count()
    }

    pub fn is_subset_of(&self, other: &DifferenceSet<'_>) -> bool {
        let theirs: HashSet<Pair> = other.pairs.iter().copied().collect();
        self.pairs.iter().all(|p| theirs.contains(p))
    }

    /// `<v, x_i - x_j>` for the pair at position `idx`.
    #[inline]
    pub fn projection(&self, idx: usize, v: &SparseDirection) -> f64 {
        let (i, j) = self.pairs[idx];
        v.dot_diff(self.data.row(i), self.data.row(j))
    }
}

/// `difference_pairs`: every unordered pair of distinct samples.
pub fn difference_pairs(data: &Dataset) -> Result<DifferenceSet<'_>> {
    DifferenceSet::all(data)
}

impl PointSet for DifferenceSet<'_> {
    fn dim(&self) -> usize {
        self.data.n()
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn project(&self, idx: usize, support: &[usize], out: &mut [f64]) {
        let (i, j) = self.pairs[idx];
        let (a, b) = (self.data.row(i), self.data.row(j));
        for (o, &c) in out.iter_mut().zip(support) {
            *o = a[c] - b[c];
        }
    }

    fn dot(&self, idx: usize, v: &SparseDirection) -> f64 {
        self.projection(idx, v)
    }

    /// `sum_{ij} (x_i - x_j)(x_i - x_j)^T = X^T L X` for the Laplacian `L` of
    /// the pair graph, evaluated on mean-centered rows (L kills constants).
    fn second_moment(&self) -> Vec<f64> {
        let n = self.data.n();
        let m = self.data.m();
        let center = self.data.mean();
        // lx[i] = sum over pairs touching i of (x_i - x_j)
        let mut lx = vec![0.0; m * n];
        for &(i, j) in &self.pairs {
            let (a, b) = (self.data.row(i), self.data.row(j));
            for c in 0..n {
                let d = a[c] - b[c];
                lx[i * n + c] += d;
                lx[j * n + c] -= d;
            }
        }
        let mut acc = vec![0.0; n * n];
        for i in 0..m {
            let row = self.data.row(i);
            let y = &lx[i * n..(i + 1) * n];
            if y.iter().all(|v| *v == 0.0) {
                continue;
            }
            for a in 0..n {
                let xa = row[a] - center[a];
                for b in 0..n {
                    acc[a * n + b] += xa * y[b];
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let s = 0.5 * (acc[a * n + b] + acc[b * n + a]);
                acc[a * n + b] = s;
                acc[b * n + a] = s;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::Points;

    fn line(m: usize) -> Dataset {
        Dataset::new(m, 1, (0..m).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn pair_counts() {
        assert_eq!(difference_pairs(&line(2)).unwrap().pairs(), &[(0, 1)]);
        assert_eq!(difference_pairs(&line(3)).unwrap().len(), 3);
        assert_eq!(difference_pairs(&line(100)).unwrap().len(), 4950);
        assert!(difference_pairs(&line(1)).is_err());
    }

    #[test]
    fn rejects_bad_pairs() {
        let d = line(3);
        assert!(DifferenceSet::new(&d, [(1, 1)]).is_err());
        assert!(DifferenceSet::new(&d, [(0, 3)]).is_err());
        assert!(DifferenceSet::new(&d, [(0, 1), (1, 0)]).is_err());
        let s = DifferenceSet::new(&d, [(2, 0), (1, 0)]).unwrap();
        assert_eq!(s.pairs(), &[(0, 1), (0, 2)]);
        assert!(s.contains((2, 0)));
    }

    #[test]
    fn laplacian_second_moment_matches_direct() {
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![100.0 + (i as f64).sin(), (i * i) as f64 * 0.3, -(i as f64)])
            .collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let s = DifferenceSet::new(&d, [(0, 1), (0, 5), (2, 6), (3, 4), (1, 6)]).unwrap();
        let diffs: Vec<Vec<f64>> = s
            .pairs()
            .iter()
            .map(|&(i, j)| rows[i].iter().zip(&rows[j]).map(|(a, b)| a - b).collect())
            .collect();
        let direct = Points::from_rows(&diffs).second_moment();
        for (a, b) in s.second_moment().iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn inlier_pairs_and_intersections() {
        let d = line(4)
            .with_inlier_mask(vec![true, false, true, true])
            .unwrap();
        let good = DifferenceSet::inlier_pairs(&d).unwrap();
        assert_eq!(good.pairs(), &[(0, 2), (0, 3), (2, 3)]);
        let all = DifferenceSet::all(&d).unwrap();
        assert_eq!(all.intersection_count(&good), 3);
        assert!(good.is_subset_of(&all));
        assert!(!all.is_subset_of(&good));
    }
}
