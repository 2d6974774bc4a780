mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use roletransfer::aggregate::{aggregate, AggregationConfig};
use roletransfer::eval::{roc_auc, top_k_analysis};
use roletransfer::features::{base_features, PageRankParams, BASE_FEATURES};
use roletransfer::forest::{model_to_bytes, predict_proba, train, ForestConfig};
use roletransfer::graph::{load_edge_list, ParseOptions};
use roletransfer::powerlaw::fit_power_law;
use roletransfer::transform::{
    apply_plan, fit_plan, power_law_transform, quantile_transform, TransformPlan,
};
use roletransfer::{FeatureMatrix, Graph, RoleLabels};

fn graph_strategy(max_n: usize, max_e: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(move |n| {
        (Just(n), prop::collection::vec((0..n, 0..n), 0..=max_e))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sums_equal_edge_count((n, edges) in graph_strategy(30, 120)) {
        let g = Graph::from_edges(n, edges.clone()).unwrap();
        let d = g.degrees();
        let m = edges.len() as u64;
        prop_assert_eq!(d.out.iter().sum::<u64>(), m);
        prop_assert_eq!(d.inn.iter().sum::<u64>(), m);
        prop_assert_eq!(g.total_edges(), m);
    }

    #[test]
    fn symmetrization_is_idempotent((n, edges) in graph_strategy(30, 120)) {
        let v = Graph::from_edges(n, edges).unwrap().symmetrize_simple();
        prop_assert_eq!(v.resymmetrize(), v.clone());
        for u in 0..n {
            prop_assert!(!v.neighbors(u).contains(&u));
            for &w in v.neighbors(u) {
                prop_assert!(v.contains(w, u));
            }
        }
    }

    #[test]
    fn edge_list_round_trip((n, edges) in graph_strategy(30, 120)) {
        let g = Graph::from_edges(n, edges).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        g.write_edge_list(&path).unwrap();
        let back = load_edge_list(&path, ParseOptions::default()).unwrap();
        let key = |g: &Graph| {
            let mut e: Vec<(String, String, u64)> = g
                .edges()
                .iter()
                .map(|&(s, d, m)| (g.ids()[s].clone(), g.ids()[d].clone(), m))
                .collect();
            e.sort();
            e
        };
        prop_assert_eq!(key(&back), key(&g));
    }

    #[test]
    fn base_feature_invariants((n, edges) in graph_strategy(30, 120)) {
        let g = Graph::from_edges(n, edges).unwrap();
        let bf = base_features(&g, &PageRankParams::default()).unwrap();
        let pr = bf.matrix.column_by_name("pagerank").unwrap();
        prop_assert!(pr.iter().all(|&p| p >= 0.0));
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        let cc = bf.matrix.column_by_name("clustering").unwrap();
        prop_assert!(cc.iter().all(|&c| (0.0..=1.0).contains(&c)));
        let d = g.degrees();
        let as_f = |v: &[u64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        prop_assert_eq!(bf.matrix.column_by_name("degree").unwrap(), &as_f(&d.total)[..]);
        prop_assert_eq!(bf.matrix.column_by_name("indegree").unwrap(), &as_f(&d.inn)[..]);
        prop_assert_eq!(bf.matrix.column_by_name("outdegree").unwrap(), &as_f(&d.out)[..]);
    }

    #[test]
    fn features_are_permutation_equivariant(
        (n, edges) in graph_strategy(25, 100),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let g = Graph::from_edges(n, edges.clone()).unwrap();
        let h = Graph::from_edges(n, edges.iter().map(|&(s, d)| (perm[s], perm[d]))).unwrap();
        let params = PageRankParams { tol: 1e-14, max_iter: 2000, ..Default::default() };
        let fg = base_features(&g, &params).unwrap().matrix;
        let fh = base_features(&h, &params).unwrap().matrix;
        for name in BASE_FEATURES {
            let a = fg.column_by_name(name).unwrap();
            let b = fh.column_by_name(name).unwrap();
            for u in 0..n {
                prop_assert!((a[u] - b[perm[u]]).abs() < 1e-12, "{} node {}", name, u);
            }
        }
    }

    #[test]
    fn clustering_bounds_on_cliques_and_bipartite(k in 3usize..9, a in 1usize..6, b in 1usize..6) {
        let mut clique = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    clique.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(k, clique).unwrap();
        let bf = base_features(&g, &PageRankParams::default()).unwrap();
        prop_assert!(bf.matrix.column_by_name("clustering").unwrap().iter().all(|&c| c == 1.0));

        let bip: Vec<(usize, usize)> = (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))).collect();
        let g = Graph::from_edges(a + b, bip).unwrap();
        let bf = base_features(&g, &PageRankParams::default()).unwrap();
        prop_assert!(bf.matrix.column_by_name("clustering").unwrap().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn power_law_scale_equivariance(
        xs in prop::collection::vec(1.0f64..1e4, 20..200),
        s in 0.01f64..100.0,
    ) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
        let a = fit_power_law(&xs, 1).unwrap();
        let b = fit_power_law(&scaled, 1).unwrap();
        prop_assert!(a.alpha > 1.0);
        prop_assert!((a.alpha - b.alpha).abs() < 1e-9 * a.alpha.max(1.0), "{} vs {}", a.alpha, b.alpha);
        prop_assert!((a.x_min * s - b.x_min).abs() <= 1e-9 * b.x_min);
    }

    #[test]
    fn power_law_duplication_invariance(xs in prop::collection::vec(1.0f64..1e4, 20..200)) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let doubled: Vec<f64> = xs.iter().chain(xs.iter()).copied().collect();
        let a = fit_power_law(&xs, 1).unwrap();
        let b = fit_power_law(&doubled, 1).unwrap();
        prop_assert_eq!(a.x_min, b.x_min);
        prop_assert!((a.alpha - b.alpha).abs() < 1e-9);
    }

    #[test]
    fn quantile_is_monotone_in_unit_interval(xs in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let q = quantile_transform(&xs);
        prop_assert!(q.iter().all(|&v| (0.0..1.0).contains(&v)));
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if xs[i] <= xs[j] {
                    prop_assert!(q[i] <= q[j]);
                }
            }
        }
    }

    #[test]
    fn power_law_transform_preserves_order(xs in prop::collection::vec(1.0f64..1e4, 20..200)) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let fit = fit_power_law(&xs, 1).unwrap();
        let t = power_law_transform(&xs, &fit);
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                prop_assert_eq!(xs[i] < xs[j], t[i] < t[j]);
            }
        }
    }

    #[test]
    fn plan_none_is_bit_exact_identity((n, edges) in graph_strategy(30, 120)) {
        let g = Graph::from_edges(n, edges).unwrap();
        let fm = base_features(&g, &PageRankParams::default()).unwrap().matrix;
        let fits = fit_plan(&fm, TransformPlan::None, 1).unwrap();
        let out = apply_plan(&fm, TransformPlan::None, &fits, &g, 0.15).unwrap();
        prop_assert_eq!(out, fm);
    }

    #[test]
    fn aggregation_shape_and_constants(
        (n, edges) in graph_strategy(30, 120),
        rounds in 0usize..6,
        c in -10.0f64..10.0,
    ) {
        let g = Graph::from_edges(n, edges).unwrap();
        let view = g.symmetrize_simple();
        let fm = FeatureMatrix::from_columns(n, [("a".into(), vec![c; n]), ("b".into(), vec![1.0; n])]).unwrap();
        let cfg = AggregationConfig { rounds, emit_diagnostics: false };
        let out = aggregate(&fm, &view, &cfg).unwrap().matrix;
        prop_assert_eq!(out.width(), 2 * (rounds + 1));
        // Nodes with neighbors keep the constant; isolated nodes drop to 0.
        for j in 0..out.width() {
            let col = out.column(j);
            let base = if j % 2 == 0 { c } else { 1.0 };
            for u in 0..n {
                let expect = if j < 2 || view.degree(u) > 0 { base } else { 0.0 };
                prop_assert!((col[u] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn auc_properties(
        data in prop::collection::vec((0u8..20, any::<bool>()), 2..300),
    ) {
        let scores: Vec<f64> = data.iter().map(|d| d.0 as f64).collect();
        let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let a = roc_auc(&scores, &labels).unwrap();
        prop_assert_eq!(a, common::auc_pairs(&scores, &labels));
        prop_assert!((0.0..=1.0).contains(&a));
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        prop_assert!((a + roc_auc(&scores, &flipped).unwrap() - 1.0).abs() < 1e-12);
        let warped: Vec<f64> = scores.iter().map(|s| (s * 0.3).exp() - 7.0).collect();
        prop_assert_eq!(roc_auc(&warped, &labels).unwrap(), a);
    }

    #[test]
    fn top_k_at_n_is_base_rate(
        data in prop::collection::vec((0.0f64..1.0, any::<bool>()), 1..300),
    ) {
        let p: Vec<f64> = data.iter().map(|d| d.0).collect();
        let f: Vec<bool> = data.iter().map(|d| d.1).collect();
        let n = f.len();
        let curve = top_k_analysis(&p, &f, &[n]).unwrap();
        let rate = f.iter().filter(|&&x| x).count() as f64 / n as f64;
        prop_assert!((curve[0].1 - rate).abs() <= 1e-12);
    }
}

fn random_training_set(rows: &[(f64, f64, bool)]) -> (FeatureMatrix, RoleLabels) {
    let n = rows.len();
    let fm = FeatureMatrix::from_columns(
        n,
        [
            ("x".into(), rows.iter().map(|r| r.0).collect()),
            ("y".into(), rows.iter().map(|r| r.1).collect()),
        ],
    )
    .unwrap();
    let labels = RoleLabels::new(
        vec!["neg".into(), "pos".into()],
        rows.iter().map(|r| Some(usize::from(r.2))).collect(),
    )
    .unwrap();
    (fm, labels)
}

fn two_class_rows() -> impl Strategy<Value = Vec<(f64, f64, bool)>> {
    prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, any::<bool>()), 4..80).prop_filter(
        "both classes",
        |v| v.iter().any(|r| r.2) && v.iter().any(|r| !r.2),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forest_is_deterministic(rows in two_class_rows(), seed in any::<u64>()) {
        let (fm, labels) = random_training_set(&rows);
        let cfg = ForestConfig { n_trees: 8, ..Default::default() };
        let a = train(&fm, &labels, &cfg, seed).unwrap();
        let b = train(&fm, &labels, &cfg, seed).unwrap();
        prop_assert_eq!(model_to_bytes(&a), model_to_bytes(&b));
        prop_assert_eq!(predict_proba(&a, &fm).unwrap(), predict_proba(&b, &fm).unwrap());
    }

    #[test]
    fn forest_ignores_row_order_without_bootstrap(rows in two_class_rows(), seed in any::<u64>()) {
        let (fm, labels) = random_training_set(&rows);
        let mut rev = rows.clone();
        rev.reverse();
        let (fm_r, labels_r) = random_training_set(&rev);
        let cfg = ForestConfig { n_trees: 4, bootstrap: false, max_features: Some(2), ..Default::default() };
        let a = train(&fm, &labels, &cfg, seed).unwrap();
        let b = train(&fm_r, &labels_r, &cfg, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn duplicating_a_row_never_lowers_its_class_probability(
        rows in two_class_rows(),
        pick in any::<prop::sample::Index>(),
        copies in 1usize..4,
    ) {
        let (fm, labels) = random_training_set(&rows);
        let cfg = ForestConfig { n_trees: 1, bootstrap: false, max_features: Some(2), ..Default::default() };
        let i = pick.index(rows.len());
        let class = usize::from(rows[i].2);
        let query = FeatureMatrix::from_columns(1, [("x".into(), vec![rows[i].0]), ("y".into(), vec![rows[i].1])]).unwrap();
        let before = predict_proba(&train(&fm, &labels, &cfg, 0).unwrap(), &query).unwrap().rows()[0][class];

        let mut more = rows.clone();
        more.extend(std::iter::repeat(rows[i]).take(copies));
        let (fm2, labels2) = random_training_set(&more);
        let after = predict_proba(&train(&fm2, &labels2, &cfg, 0).unwrap(), &query).unwrap().rows()[0][class];
        prop_assert!(after >= before, "{} -> {}", before, after);
    }
}

#[test]
fn aggregation_converges_to_a_fixed_direction() {
    // Two dense clusters joined by a few edges, plus odd cycles so the walk is
    // aperiodic: the second eigenvalue is well separated from the rest.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let n = 200;
    let mut edges = Vec::new();
    for _ in 0..2000 {
        let c = rng.gen_range(0..2) * 100;
        edges.push((c + rng.gen_range(0..100), c + rng.gen_range(0..100)));
    }
    for _ in 0..10 {
        edges.push((rng.gen_range(0..100), 100 + rng.gen_range(0..100)));
    }
    let g = Graph::from_edges(n, edges).unwrap();
    let fm = base_features(&g, &PageRankParams::default()).unwrap().matrix;
    let cfg = AggregationConfig { rounds: 10, emit_diagnostics: true };
    let agg = aggregate(&fm, &g.symmetrize_simple(), &cfg).unwrap();
    let mut by_feature: HashMap<&str, f64> = HashMap::new();
    for d in &agg.diagnostics {
        if d.round == 10 {
            by_feature.insert(d.feature.as_str(), d.rho);
        }
    }
    for name in ["degree", "indegree", "outdegree", "pagerank"] {
        assert!(by_feature[name] >= 0.999, "{name}: {}", by_feature[name]);
    }
}
