//! Brute-force checks of the structural inequalities the algorithm relies on.
//!
//! Every check is evaluated exactly on small random instances, over an
//! enumerated family of k-sparse directions. Failures keep a full dump of
//! the offending instance.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::error::{param_err, Result};
use crate::graph::{graph_moment, overlap_graph, prune, PairGraph};
use crate::oracle::SparseOracle;
use crate::points::Points;
use crate::sparse::{supports, SparseDirection};
use crate::{par, seed};

pub const CHECK_TOL: f64 = 1e-9;
const MAX_DUMPS: usize = 5;

pub const CLIQUE_MEAN: &str = "clique_mean_bound";
pub const OVERLAP_MOMENT: &str = "overlap_moment_transfer";
pub const OVERLAP_DENSE: &str = "overlap_dense_neighborhoods";
pub const TRIPLE_COUNT: &str = "overlap_triple_count_identity";
pub const PRUNE_CLIQUE: &str = "prune_to_clique";
pub const SUBSET_MEAN: &str = "subset_mean_bound";
pub const SUBMARTINGALE: &str = "submartingale_floor";

const EXACT_CHECKS: [(&str, &str); 6] = [
    (
        CLIQUE_MEAN,
        "C a clique of G, C_g in C, alpha = |C_g|/m: <v, mu_C - mu_g>^t <= 2 M_v(G) / alpha^2",
    ),
    (
        OVERLAP_MOMENT,
        "M_v(R_gamma(G)) <= 2 * 2^t * M_v(G) / gamma",
    ),
    (
        OVERLAP_DENSE,
        "mean over x of #pairs in N(x) non-adjacent in R_gamma(G) <= gamma m^2",
    ),
    (
        TRIPLE_COUNT,
        "sum_x #non-adjacent pairs in N(x) = sum over non-adjacent {y,z} of |N(y) & N(z)|",
    ),
    (
        PRUNE_CLIQUE,
        "if gamma <= beta^2/36: |prune(W)| >= |W| - 6 gamma m / beta and prune(W) is a clique of R_{beta/3}(G)",
    ),
    (
        SUBSET_MEAN,
        "T in S, alpha = |T|/|S|: <v, mu_S - mu_T>^t <= M_v(S) / alpha",
    ),
];

#[derive(Debug, Clone, Serialize)]
pub struct LemmaResult {
    pub name: String,
    pub statement: String,
    pub checks: u64,
    pub failures: u64,
    pub passed: bool,
    /// Smallest `(rhs - lhs) / max(1, |lhs|, |rhs|)` seen; negative on failure.
    pub worst_margin: f64,
    pub counterexamples: Vec<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub instances: usize,
    pub passed: bool,
    pub lemmas: Vec<LemmaResult>,
}

impl LemmaReport {
    pub fn lemma(&self, name: &str) -> Option<&LemmaResult> {
        self.lemmas.iter().find(|l| l.name == name)
    }
}

#[derive(Debug, Clone)]
struct Tally {
    checks: u64,
    failures: u64,
    worst_margin: f64,
    dumps: Vec<Value>,
}

impl Default for Tally {
    fn default() -> Self {
        Self {
            checks: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            dumps: Vec::new(),
        }
    }
}

impl Tally {
    /// Records `lhs <= rhs` up to `CHECK_TOL` relative slack.
    fn le(&mut self, lhs: f64, rhs: f64, dump: impl FnOnce() -> Value) {
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        let margin = (rhs - lhs) / scale;
        self.checks += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -CHECK_TOL || margin.is_nan() {
            self.fail(json!({"lhs": lhs, "rhs": rhs, "detail": dump()}));
        }
    }

    fn holds(&mut self, ok: bool, dump: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.worst_margin = self.worst_margin.min(-1.0);
            self.fail(dump());
        } else {
            self.worst_margin = self.worst_margin.min(0.0);
        }
    }

    fn fail(&mut self, v: Value) {
        self.failures += 1;
        if self.dumps.len() < MAX_DUMPS {
            self.dumps.push(v);
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failures += other.failures;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        for d in other.dumps {
            if self.dumps.len() < MAX_DUMPS {
                self.dumps.push(d);
            }
        }
    }
}

/// A random small instance: data plus its shape.
struct Instance {
    index: usize,
    k: usize,
    t: u32,
    data: Dataset,
}

impl Instance {
    fn m(&self) -> usize {
        self.data.m()
    }

    fn n(&self) -> usize {
        self.data.n()
    }

    fn header(&self) -> Value {
        json!({
            "instance": self.index,
            "m": self.m(),
            "n": self.n(),
            "k": self.k,
            "t": self.t,
            "rows": self.data.rows().map(<[f64]>::to_vec).collect::<Vec<_>>(),
        })
    }
}

fn random_instance(rng: &mut ChaCha8Rng, index: usize) -> Result<Instance> {
    let m = rng.random_range(6..=40);
    let n = rng.random_range(1..=8);
    let k = rng.random_range(1..=n.min(3));
    let t = if rng.random_bool(0.5) { 2 } else { 4 };
    let centers: Vec<Vec<f64>> = (0..rng.random_range(1..=3))
        .map(|_| {
            (0..n)
                .map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    // integer-valued data now and then, to exercise ties
    let integral = rng.random_bool(0.25);
    let mut values = Vec::with_capacity(m * n);
    for _ in 0..m {
        let c = &centers[rng.random_range(0..centers.len())];
        for &cj in c {
            let x = cj + rng.sample::<f64, _>(StandardNormal);
            values.push(if integral { x.round() } else { x });
        }
    }
    Ok(Instance {
        index,
        k,
        t,
        data: Dataset::new(m, n, values)?,
    })
}

fn random_graph(rng: &mut ChaCha8Rng, m: usize, p: f64) -> PairGraph {
    let mut g = PairGraph::empty(m);
    for i in 0..m {
        for j in i + 1..m {
            if rng.random_bool(p) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

fn random_subset(rng: &mut ChaCha8Rng, m: usize, size: usize) -> Vec<usize> {
    let mut s = sample(rng, m, size).into_vec();
    s.sort_unstable();
    s
}

/// Basis vectors, two random directions per support, and each `extra`
/// restricted to each support.
fn directions(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    extras: &[Vec<f64>],
) -> Vec<SparseDirection> {
    let mut out: Vec<SparseDirection> = (0..n).map(SparseDirection::basis).collect();
    for s in supports(n, k) {
        for _ in 0..2 {
            let vals: Vec<f64> = s.iter().map(|_| rng.sample(StandardNormal)).collect();
            out.push(SparseDirection::from_support_values(&s, &vals));
        }
        for e in extras {
            let vals: Vec<f64> = s.iter().map(|&i| e[i]).collect();
            if vals.iter().any(|v| *v != 0.0) {
                out.push(SparseDirection::from_support_values(&s, &vals));
            }
        }
    }
    out
}

fn dir_json(v: &SparseDirection) -> Value {
    json!({"support": v.support(), "values": v.values()})
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_clique_mean(inst: &Instance, rng: &mut ChaCha8Rng, tally: &mut Tally) {
    let m = inst.m();
    // one random planted clique and the full K_m
    for full in [false, true] {
        let c = if full {
            (0..m).collect()
        } else {
            let size = rng.random_range(2..=m);
            random_subset(rng, m, size)
        };
        let g_size = rng.random_range(1..=c.len());
        let cg: Vec<usize> = {
            let mut idx = sample(rng, c.len(), g_size).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| c[i]).collect()
        };
        let mut g = {
            let p = rng.random_range(0.0..0.5);
            random_graph(rng, m, p)
        };
        for (a, &x) in c.iter().enumerate() {
            for &y in &c[a + 1..] {
                g.add_edge(x, y);
            }
        }
        let alpha = cg.len() as f64 / m as f64;
        let diff = sub(&inst.data.mean_of(&c), &inst.data.mean_of(&cg));
        for v in directions(rng, inst.n(), inst.k, std::slice::from_ref(&diff)) {
            let lhs = v.dot(&diff).powi(inst.t as i32);
            let rhs = 2.0 * graph_moment(&g, &inst.data, &v, inst.t) / (alpha * alpha);
            tally.le(lhs, rhs, || {
                json!({"instance": inst.header(), "clique": c, "good": cg, "graph": g, "direction": dir_json(&v)})
            });
        }
    }
}

fn check_overlap(inst: &Instance, rng: &mut ChaCha8Rng, tallies: &mut [Tally; 3]) -> Result<()> {
    let m = inst.m();
    let mf = m as f64;
    let g = {
        let p = rng.random_range(0.1..0.9);
        random_graph(rng, m, p)
    };
    let gamma = rng.random_range(0.5 / mf..0.6);
    let r = overlap_graph(&g, gamma)?;

    // the direction that loads R most heavily, as found by the oracle
    let diffs: Vec<Vec<f64>> = r
        .edges()
        .into_iter()
        .map(|(i, j)| sub(inst.data.row(i), inst.data.row(j)))
        .collect();
    let mut extras = Vec::new();
    if !diffs.is_empty() {
        let points = Points::new(&diffs, inst.n());
        let best = SparseOracle::default().maximize(
            &points,
            inst.k,
            inst.t,
            seed::derive(inst.index as u64, &[7]),
        )?;
        extras.push(best.direction.to_dense(inst.n()));
    }
    let [moment, dense, triple] = tallies;
    for v in directions(rng, inst.n(), inst.k, &extras) {
        let lhs = graph_moment(&r, &inst.data, &v, inst.t);
        let rhs = 2.0 * 2f64.powi(inst.t as i32) * graph_moment(&g, &inst.data, &v, inst.t) / gamma;
        moment.le(lhs, rhs, || {
            json!({"instance": inst.header(), "gamma": gamma, "graph": g, "direction": dir_json(&v)})
        });
    }

    // per-anchor count of non-adjacent pairs inside N(x), by enumeration
    let per_anchor: Vec<usize> = (0..m)
        .map(|x| r.non_adjacent_pairs_within(&g.neighbors(x)))
        .collect();
    let total: usize = per_anchor.iter().sum();
    dense.le(
        total as f64 / mf,
        gamma * mf * mf,
        || json!({"instance": inst.header(), "gamma": gamma, "graph": g, "per_anchor": per_anchor}),
    );

    let mut by_pair = 0usize;
    for y in 0..m {
        for z in y + 1..m {
            if !r.has_edge(y, z) {
                by_pair += g.common_neighbors(y, z);
            }
        }
    }
    triple.holds(total == by_pair, || {
        json!({"instance": inst.header(), "gamma": gamma, "graph": g, "by_anchor": total, "by_pair": by_pair})
    });
    Ok(())
}

fn check_prune(inst: &Instance, rng: &mut ChaCha8Rng, tally: &mut Tally) {
    let m = inst.m();
    let mf = m as f64;
    // the degree rule keeps a clique only when |W| - 1 >= 2|W|/3
    let w_size = rng.random_range(3..=m);
    let w = random_subset(rng, m, w_size);
    let mut g = {
        let p = rng.random_range(0.0..0.6);
        random_graph(rng, m, p)
    };
    let allowed = w_size * w_size / 36;
    // sometimes exceed the precondition on purpose; those draws are skipped
    let missing_target = rng.random_range(0..=allowed + 2);
    let mut within: Vec<(usize, usize)> = Vec::new();
    for (a, &x) in w.iter().enumerate() {
        for &y in &w[a + 1..] {
            within.push((x, y));
        }
    }
    let dropped: Vec<usize> =
        sample(rng, within.len(), missing_target.min(within.len())).into_vec();
    let mut drop_mask = vec![false; within.len()];
    for d in dropped {
        drop_mask[d] = true;
    }
    for (idx, &(x, y)) in within.iter().enumerate() {
        if drop_mask[idx] {
            if g.has_edge(x, y) {
                // rebuild without this edge
                let edges: Vec<(usize, usize)> =
                    g.edges().into_iter().filter(|&e| e != (x, y)).collect();
                g = PairGraph::from_edges(m, edges).expect("edges come from a valid graph");
            }
        } else {
            g.add_edge(x, y);
        }
    }

    let missing = g.non_adjacent_pairs_within(&w);
    let beta = w_size as f64 / mf;
    let gamma = missing as f64 / (mf * mf);
    if gamma > beta * beta / 36.0 {
        return;
    }
    let kept = prune(&g, &w);
    tally.le(
        w_size as f64 - 6.0 * gamma / beta * mf,
        kept.len() as f64,
        || json!({"instance": inst.header(), "graph": g, "w": w, "kept": kept, "part": "size"}),
    );
    // clique of R_{beta/3}(G): common neighbours >= |W|/3, in integers
    let mut bad = None;
    'outer: for (a, &x) in kept.iter().enumerate() {
        for &y in &kept[a + 1..] {
            if 3 * g.common_neighbors(x, y) < w_size {
                bad = Some((x, y));
                break 'outer;
            }
        }
    }
    tally.holds(bad.is_none(), || {
        json!({"instance": inst.header(), "graph": g, "w": w, "kept": kept, "part": "clique", "pair": bad})
    });
}

fn check_subset_mean(inst: &Instance, rng: &mut ChaCha8Rng, tally: &mut Tally) {
    let m = inst.m();
    let size = rng.random_range(1..=m);
    let subset = random_subset(rng, m, size);
    let alpha = size as f64 / m as f64;
    let mu_s = inst.data.mean();
    let diff = sub(&mu_s, &inst.data.mean_of(&subset));
    let t = inst.t as i32;
    for v in directions(rng, inst.n(), inst.k, std::slice::from_ref(&diff)) {
        let center = v.dot(&mu_s);
        let moment = inst
            .data
            .rows()
            .map(|x| (v.dot(x) - center).powi(t))
            .sum::<f64>()
            / m as f64;
        let lhs = v.dot(&diff).powi(t);
        tally.le(
            lhs,
            moment / alpha,
            || json!({"instance": inst.header(), "subset": subset, "direction": dir_json(&v)}),
        );
    }
}

fn run_instance(seed: u64, index: usize) -> Result<Vec<Tally>> {
    let mut rng = seed::rng(seed, &[index as u64]);
    let inst = random_instance(&mut rng, index)?;
    let mut clique = Tally::default();
    let mut overlap: [Tally; 3] = Default::default();
    let mut pruned = Tally::default();
    let mut subset = Tally::default();
    check_clique_mean(&inst, &mut rng, &mut clique);
    check_overlap(&inst, &mut rng, &mut overlap)?;
    check_prune(&inst, &mut rng, &mut pruned);
    check_subset_mean(&inst, &mut rng, &mut subset);
    let [a, b, c] = overlap;
    Ok(vec![clique, a, b, c, pruned, subset])
}

/// A bounded process on `[0, 1]` used to test the hitting bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmartingaleSpec {
    pub start: f64,
    /// Probability of the up step; `>= 1/2` makes it a submartingale.
    pub up_prob: f64,
    /// Step size cap; steps are `min(step, X, 1 - X)`.
    pub step: f64,
    pub horizon: usize,
    pub floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmartingaleEstimate {
    pub hit_free: f64,
    pub bound: f64,
    pub std_err: f64,
    pub passed: bool,
}

/// Estimates `P[min_i X_i >= floor]` and compares it against
/// `(X_1 - floor) / (1 - floor) - 3 SE`.
pub fn submartingale_check(
    spec: &SubmartingaleSpec,
    runs: usize,
    seed: u64,
) -> SubmartingaleEstimate {
    let hits: Vec<bool> = par::map_range(runs, |r| {
        let mut rng = seed::rng(seed, &[r as u64]);
        let mut x = spec.start;
        let mut low = x;
        for _ in 1..spec.horizon {
            let s = spec.step.min(x).min(1.0 - x);
            x += if rng.random_bool(spec.up_prob) { s } else { -s };
            low = low.min(x);
        }
        low >= spec.floor
    });
    let p = hits.iter().filter(|h| **h).count() as f64 / runs as f64;
    let std_err = (p * (1.0 - p) / runs as f64).sqrt();
    let bound = (spec.start - spec.floor) / (1.0 - spec.floor);
    SubmartingaleEstimate {
        hit_free: p,
        bound,
        std_err,
        passed: p >= bound - 3.0 * std_err,
    }
}

fn submartingale_suite(seed: u64, cases: usize) -> Tally {
    let mut tally = Tally::default();
    let mut rng = seed::rng(seed, &[u64::MAX]);
    // the constant process first
    let mut specs = vec![SubmartingaleSpec {
        start: 0.9,
        up_prob: 0.5,
        step: 0.0,
        horizon: 20,
        floor: 0.5,
    }];
    for _ in 1..cases {
        let start = rng.random_range(0.3..0.95);
        specs.push(SubmartingaleSpec {
            start,
            up_prob: rng.random_range(0.5..0.7),
            step: rng.random_range(0.01..0.2),
            horizon: rng.random_range(10..80),
            floor: rng.random_range(0.05..start),
        });
    }
    for (i, spec) in specs.iter().enumerate() {
        let est = submartingale_check(spec, 2000, seed::derive(seed, &[u64::MAX, i as u64]));
        tally.le(
            est.bound - 3.0 * est.std_err,
            est.hit_free,
            || json!({"spec": spec, "estimate": est}),
        );
    }
    tally
}

/// Runs every check on `instances` random instances.
pub fn verify_lemmas(seed: u64, instances: usize) -> Result<LemmaReport> {
    if instances == 0 {
        return param_err("instances must be >= 1");
    }
    let per_instance = par::map_range(instances, |i| run_instance(seed, i));
    let mut totals: Vec<Tally> = vec![Tally::default(); EXACT_CHECKS.len()];
    for tallies in per_instance {
        for (acc, t) in totals.iter_mut().zip(tallies?) {
            acc.merge(t);
        }
    }
    totals.push(submartingale_suite(seed, 12));

    let statements = EXACT_CHECKS.iter().copied().chain([(
        SUBMARTINGALE,
        "X in [0,1] a submartingale: P[min_i X_i >= f] >= (X_1 - f)/(1 - f), Monte Carlo within 3 SE",
    )]);
    let lemmas: Vec<LemmaResult> = statements
        .zip(totals)
        .map(|((name, statement), t)| LemmaResult {
            name: name.to_string(),
            statement: statement.to_string(),
            checks: t.checks,
            failures: t.failures,
            passed: t.failures == 0 && t.checks > 0,
            worst_margin: t.worst_margin,
            counterexamples: t.dumps,
        })
        .collect();
    Ok(LemmaReport {
        seed,
        instances,
        passed: lemmas.iter().all(|l| l.passed),
        lemmas,
    })
}
