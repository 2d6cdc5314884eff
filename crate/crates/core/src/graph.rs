//! Pair graphs, overlap graphs and pruning.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{param_err, Result};
use crate::pairs::DifferenceSet;
use crate::par;
use crate::sparse::SparseDirection;

/// Simple undirected graph on `0..vertex_count`, stored as adjacency bit rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairGraph {
    vertex_count: usize,
    words: usize,
    bits: Vec<u64>,
}

impl PairGraph {
    pub fn empty(vertex_count: usize) -> Self {
        let words = vertex_count.div_ceil(64);
        Self {
            vertex_count,
            words,
            bits: vec![0; words * vertex_count],
        }
    }

    pub fn complete(vertex_count: usize) -> Self {
        let mut g = Self::empty(vertex_count);
        for i in 0..vertex_count {
            for j in i + 1..vertex_count {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Self::empty(vertex_count);
        for (a, b) in edges {
            if a == b {
                return param_err(format!("self-loop at {a}"));
            }
            if a >= vertex_count || b >= vertex_count {
                return param_err(format!("edge {{{a}, {b}}} out of range"));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b);
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
        self.bits[b * self.words + a / 64] |= 1 << (a % 64);
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `N_G(v)`, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.row(v).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    /// `|N_G(a) ∩ N_G(b)|`.
    #[inline]
    pub fn common_neighbors(&self, a: usize, b: usize) -> usize {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.vertex_count)
            .map(|v| self.degree(v))
            .sum::<usize>()
            / 2
    }

    /// Edges `(i, j)` with `i < j`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.vertex_count {
            out.extend(
                self.neighbors(i)
                    .into_iter()
                    .filter(|&j| j > i)
                    .map(|j| (i, j)),
            );
        }
        out
    }

    /// Unordered pairs of `vertices` that are not adjacent.
    pub fn non_adjacent_pairs_within(&self, vertices: &[usize]) -> usize {
        let mut count = 0;
        for (a, &x) in vertices.iter().enumerate() {
            for &y in &vertices[a + 1..] {
                if !self.has_edge(x, y) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        self.non_adjacent_pairs_within(vertices) == 0
    }

    /// Induced subgraph, relabeled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> PairGraph {
        let mut g = PairGraph::empty(vertices.len());
        for (a, &x) in vertices.iter().enumerate() {
            for (b, &y) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(x, y) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeList {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for PairGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EdgeList {
            vertex_count: self.vertex_count,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let list = EdgeList::deserialize(d)?;
        PairGraph::from_edges(list.vertex_count, list.edges).map_err(serde::de::Error::custom)
    }
}

/// Graph on the samples whose edges are the retained pairs.
pub fn build_pair_graph(pairs: &DifferenceSet<'_>) -> PairGraph {
    let mut g = PairGraph::empty(pairs.data().m());
    for &(i, j) in pairs.pairs() {
        g.add_edge(i, j);
    }
    g
}

/// Smallest integer common-neighbor count that satisfies `count >= gamma * m`.
fn overlap_threshold(gamma: f64, m: usize) -> usize {
    let need = gamma * m as f64;
    // counts are integers; exact real comparison `count >= need`
    need.ceil().max(0.0) as usize
}

/// `R_gamma(G)`: `{x, y}` is an edge iff `|N(x) ∩ N(y)| >= gamma * |V|`.
pub fn overlap_graph(g: &PairGraph, gamma: f64) -> Result<PairGraph> {
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let sub = overlap_subgraph(g, gamma, &all)?;
    Ok(sub)
}

/// `R_gamma(G)` induced on `vertices`, relabeled to `0..vertices.len()`.
/// Common neighbors are still counted in all of `G`.
pub fn overlap_subgraph(g: &PairGraph, gamma: f64, vertices: &[usize]) -> Result<PairGraph> {
    if !(gamma > 0.0) {
        return param_err(format!(
            "overlap threshold gamma must be positive, got {gamma}"
        ));
    }
    let need = overlap_threshold(gamma, g.vertex_count());
    let rows: Vec<Vec<usize>> = par::map_range(vertices.len(), |a| {
        let x = vertices[a];
        (a + 1..vertices.len())
            .filter(|&b| g.common_neighbors(x, vertices[b]) >= need)
            .collect()
    });
    let mut out = PairGraph::empty(vertices.len());
    for (a, row) in rows.into_iter().enumerate() {
        for b in row {
            out.add_edge(a, b);
        }
    }
    Ok(out)
}

/// Repeatedly drops the lowest-indexed vertex of `W'` with fewer than
/// `2|W|/3` neighbors inside `W'`, where `|W|` is the original size.
pub fn prune(g: &PairGraph, w: &[usize]) -> Vec<usize> {
    let mut members: Vec<usize> = w.to_vec();
    members.sort_unstable();
    members.dedup();
    let threshold = 2.0 * members.len() as f64 / 3.0;
    let mut alive = vec![true; members.len()];
    let mut degree: Vec<usize> = members
        .iter()
        .map(|&x| members.iter().filter(|&&y| g.has_edge(x, y)).count())
        .collect();
    loop {
        let victim = (0..members.len()).find(|&i| alive[i] && (degree[i] as f64) < threshold);
        let Some(i) = victim else { break };
        alive[i] = false;
        for j in 0..members.len() {
            if alive[j] && g.has_edge(members[i], members[j]) {
                degree[j] -= 1;
            }
        }
    }
    members
        .into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(x, _)| x)
        .collect()
}

/// `(1/m^2) sum_{{i,j} in E} <v, x_i - x_j>^t`, each unordered edge once.
pub fn graph_moment(g: &PairGraph, data: &Dataset, v: &SparseDirection, t: u32) -> f64 {
    let m = data.m();
    let sum: f64 = par::map_range(m, |i| {
        let xi = data.row(i);
        g.neighbors(i)
            .into_iter()
            .filter(|&j| j > i)
            .map(|j| v.dot_diff(xi, data.row(j)).powi(t as i32))
            .sum::<f64>()
    })
    .into_iter()
    .sum();
    sum / (m * m) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> PairGraph {
        PairGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn pair_graph_from_difference_sets() {
        let d = Dataset::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let empty = DifferenceSet::new(&d, []).unwrap();
        assert_eq!(build_pair_graph(&empty).edge_count(), 0);
        let all = DifferenceSet::all(&d).unwrap();
        assert_eq!(build_pair_graph(&all), PairGraph::complete(4));
        let path = DifferenceSet::new(&d, [(0, 1), (1, 2)]).unwrap();
        let g = build_pair_graph(&path);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn overlap_examples() {
        // K3 with gamma 1/3: every pair shares one neighbor, 1 >= 1
        let k3 = PairGraph::complete(3);
        assert_eq!(overlap_graph(&k3, 1.0 / 3.0).unwrap(), k3);
        // path a-b-c: only {a, c} share a neighbor
        assert_eq!(
            overlap_graph(&path3(), 1.0 / 3.0).unwrap().edges(),
            vec![(0, 2)]
        );
        // star with center 0 and leaves 1..3, gamma 1/4: triangle on the leaves
        let star = PairGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(
            overlap_graph(&star, 0.25).unwrap().edges(),
            vec![(1, 2), (1, 3), (2, 3)]
        );
        assert!(overlap_graph(&star, 0.0).is_err());
    }

    #[test]
    fn overlap_threshold_is_inclusive() {
        // gamma * m = 1 exactly: one common neighbor suffices
        assert_eq!(overlap_threshold(0.25, 4), 1);
        assert_eq!(overlap_threshold(0.26, 4), 2);
        assert_eq!(overlap_threshold(1e-9, 300), 1);
    }

    #[test]
    fn prune_examples() {
        let k5 = PairGraph::complete(5);
        assert_eq!(prune(&k5, &[0, 1, 2, 3, 4]), vec![0, 1, 2, 3, 4]);

        // a..e complete, f isolated: f has 0 < 4, the rest keep 4 >= 4
        let mut g = PairGraph::empty(6);
        for i in 0..5 {
            for j in i + 1..5 {
                g.add_edge(i, j);
            }
        }
        assert_eq!(prune(&g, &[0, 1, 2, 3, 4, 5]), vec![0, 1, 2, 3, 4]);

        let edgeless = PairGraph::empty(4);
        assert!(prune(&edgeless, &[0, 1, 2, 3]).is_empty());
    }

    #[test]
    fn prune_threshold_uses_original_size() {
        // W = {0..5}; 4 is attached to 0..2 only (3 < 4) and 5 is isolated.
        // After dropping 4 and 5 the others still need 4 neighbors out of
        // the original |W| = 6, which the K4 on 0..3 gives only 3 of.
        let mut g = PairGraph::empty(6);
        for i in 0..4 {
            for j in i + 1..4 {
                g.add_edge(i, j);
            }
        }
        for i in 0..3 {
            g.add_edge(i, 4);
        }
        assert!(prune(&g, &[0, 1, 2, 3, 4, 5]).is_empty());
    }

    #[test]
    fn graph_moment_examples() {
        let two = Dataset::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        let e1 = SparseDirection::basis(0);
        let g = PairGraph::complete(2);
        assert!((graph_moment(&g, &two, &e1, 2) - 1.0).abs() < 1e-15);
        assert_eq!(graph_moment(&PairGraph::empty(2), &two, &e1, 2), 0.0);

        let three = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let v = graph_moment(&PairGraph::complete(3), &three, &e1, 2);
        // (1 + 1 + 4) / 9
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_list_json() {
        let g = path3();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"vertex_count":3,"edges":[[0,1],[1,2]]}"#);
        let back: PairGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(
            serde_json::from_str::<PairGraph>(r#"{"vertex_count":2,"edges":[[1,1]]}"#).is_err()
        );
    }

    #[test]
    fn neighbors_across_word_boundary() {
        let mut g = PairGraph::empty(130);
        g.add_edge(0, 63);
        g.add_edge(0, 64);
        g.add_edge(0, 129);
        g.add_edge(64, 129);
        assert_eq!(g.neighbors(0), vec![63, 64, 129]);
        assert_eq!(g.common_neighbors(0, 64), 1);
        assert_eq!(g.degree(129), 2);
    }
}
