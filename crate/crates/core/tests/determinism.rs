use ldsparse::harness::{gen_corrupted, random_signed_permutation, verify_lemmas, ScenarioConfig};
use ldsparse::{
    estimate_list, graph_moment, par, Dataset, EstimatorConfig, FilterConfig, PairGraph,
    SparseDirection, SparseOracle,
};

fn small_scenario() -> ScenarioConfig {
    ScenarioConfig {
        n: 6,
        m: 60,
        k: 2,
        alpha: 0.25,
        seed: 4,
        ..Default::default()
    }
}

#[test]
fn estimate_list_ignores_worker_count() {
    let cfg = small_scenario();
    let params = cfg.params().unwrap();
    let data = gen_corrupted(&cfg).unwrap().data;
    // an active filter exercises the per-pair draws too
    let est = EstimatorConfig {
        filter: FilterConfig {
            filter_moment: Some(0.5),
            soft_cap: None,
        },
        ..Default::default()
    };
    let run = |w| {
        par::with_workers(w, || {
            estimate_list(&data, &params, &SparseOracle::default(), &est, 12, 9).unwrap()
        })
    };
    let one = run(1);
    assert_eq!(one.fail_count + one.len() <= 12, true);
    for w in [2, 3, 8] {
        assert_eq!(run(w), one, "workers = {w}");
    }
    assert_eq!(run(1).to_json().unwrap(), one.to_json().unwrap());
}

#[test]
fn lemma_report_ignores_worker_count() {
    let a = par::with_workers(1, || {
        serde_json::to_string(&verify_lemmas(2, 6).unwrap()).unwrap()
    });
    let b = par::with_workers(5, || {
        serde_json::to_string(&verify_lemmas(2, 6).unwrap()).unwrap()
    });
    assert_eq!(a, b);
}

fn random_graph(m: usize, seed: u64) -> PairGraph {
    let edges = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| ldsparse::seed::unit(seed, &[i as u64, j as u64]) < 0.4);
    PairGraph::from_edges(m, edges).unwrap()
}

#[test]
fn graph_moment_invariances() {
    let data = gen_corrupted(&small_scenario()).unwrap().data;
    let m = data.m();
    let g = random_graph(m, 1);
    let v = SparseDirection::new(vec![1, 4], vec![0.6, -0.8], 2, 6).unwrap();
    let base = graph_moment(&g, &data, &v, 4);

    // relabel vertices by reversing the sample order
    let rev: Vec<usize> = (0..m).rev().collect();
    let data_rev = data.select(&rev).unwrap();
    let g_rev = PairGraph::from_edges(
        m,
        g.edges().into_iter().map(|(i, j)| (m - 1 - i, m - 1 - j)),
    )
    .unwrap();
    assert!((graph_moment(&g_rev, &data_rev, &v, 4) - base).abs() <= 1e-12 * base);

    // translating every sample leaves differences unchanged
    let shifted: Vec<Vec<f64>> = data
        .rows()
        .map(|r| r.iter().map(|x| x + 13.0).collect())
        .collect();
    let shifted = Dataset::from_rows(&shifted).unwrap();
    assert!((graph_moment(&g, &shifted, &v, 4) - base).abs() <= 1e-9 * base);

    // a signed permutation applied to both samples and direction
    let a = random_signed_permutation(6, 3).unwrap();
    let moved = a.apply_dataset(&data).unwrap();
    let dense = a.apply(&v.to_dense(6));
    let support: Vec<usize> = (0..6).filter(|&i| dense[i] != 0.0).collect();
    let values: Vec<f64> = support.iter().map(|&i| dense[i]).collect();
    let av = SparseDirection::new(support, values, 2, 6).unwrap();
    assert!((graph_moment(&g, &moved, &av, 4) - base).abs() <= 1e-12 * base);
}
