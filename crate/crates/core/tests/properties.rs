//! Property tests: graph invariants, engine linearity, sparse/dense
//! agreement, per-op gradient checks, and metric oracle equivalence.

use grafair_core::autodiff::{finite_diff_check, Tape};
use grafair_core::graph::{
    build_graph, normalize_adjacency, AggregationKind, AttributedGraph, SplitSpec,
};
use grafair_core::metrics;
use grafair_core::Mat;
use ndarray::Array2;
use proptest::prelude::*;
use std::sync::Arc;

fn graph_from_parts(
    n: usize,
    edges: &[(usize, usize)],
    sensitive: &[u8],
    labels: &[u8],
) -> AttributedGraph<f64> {
    let mut features = Mat::<f64>::zeros((n, 3));
    for i in 0..n {
        features[(i, 0)] = sensitive[i] as f64;
        features[(i, 1)] = (i as f64 * 0.37).sin();
        features[(i, 2)] = (i as f64 * 0.11).cos();
    }
    build_graph(
        features,
        edges,
        0,
        labels,
        &SplitSpec::Explicit {
            train: vec![true; n],
            val: vec![false; n],
            test: vec![false; n],
        },
    )
    .unwrap()
}

fn arb_graph() -> impl Strategy<Value = AttributedGraph<f64>> {
    (2usize..50).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n), 0..(3 * n));
        let sensitive = prop::collection::vec(0u8..2, n);
        let labels = prop::collection::vec(0u8..2, n);
        (Just(n), edges, sensitive, labels)
            .prop_map(|(n, edges, sens, labels)| graph_from_parts(n, &edges, &sens, &labels))
    })
}

fn spectral_radius(m: &Array2<f64>, iters: usize) -> f64 {
    let n = m.nrows();
    let mut v = Array2::<f64>::from_elem((n, 1), 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = m.dot(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w / norm;
    }
    lambda
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_gcn_is_symmetric_with_unit_spectral_bound(g in arb_graph()) {
        let adj = normalize_adjacency(&g, AggregationKind::SymmetricGcn);
        let dense = adj.to_dense();
        let n = dense.nrows();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((dense[(i, j)] - dense[(j, i)]).abs() < 1e-12);
            }
        }
        let rho = spectral_radius(&dense, 300);
        prop_assert!(rho <= 1.0 + 1e-9, "spectral radius {rho}");
    }

    #[test]
    fn flip_is_idempotent(g in arb_graph(), target in 0u8..2) {
        let once = g.flip_sensitive(target);
        let twice = once.flip_sensitive(target);
        prop_assert_eq!(once.features(), twice.features());
        prop_assert_eq!(once.sensitive(), twice.sensitive());
    }

    #[test]
    fn build_is_permutation_consistent(
        n in 2usize..20,
        raw_edges in prop::collection::vec((0usize..20, 0usize..20), 0..40),
        perm_seed in 0u64..1000,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let edges: Vec<(usize, usize)> =
            raw_edges.iter().map(|&(a, b)| (a % n, b % n)).collect();
        let sens: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        let g = graph_from_parts(n, &edges, &sens, &labels);

        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
        perm.shuffle(&mut rng);
        let relabeled: Vec<(usize, usize)> =
            edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let sens_p: Vec<u8> = {
            let mut v = vec![0u8; n];
            for i in 0..n { v[perm[i]] = sens[i]; }
            v
        };
        let labels_p: Vec<u8> = {
            let mut v = vec![0u8; n];
            for i in 0..n { v[perm[i]] = labels[i]; }
            v
        };
        let gp = graph_from_parts(n, &relabeled, &sens_p, &labels_p);

        let mut degrees: Vec<usize> = (0..n).map(|i| g.edges().degree(i)).collect();
        let mut degrees_p: Vec<usize> = (0..n).map(|i| gp.edges().degree(i)).collect();
        degrees.sort_unstable();
        degrees_p.sort_unstable();
        prop_assert_eq!(degrees, degrees_p);

        let mut mapped: Vec<(usize, usize)> = g
            .edges()
            .undirected_pairs()
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, gp.edges().undirected_pairs());
    }

    #[test]
    fn gradient_is_linear_in_the_loss(
        vals in prop::collection::vec(-2.0f64..2.0, 25),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let x = Array2::from_shape_vec((5, 5), vals).unwrap();
        let grad_of = |weight_f: f64, weight_g: f64| -> Mat<f64> {
            let mut t = Tape::new();
            let id = t.leaf(x.clone(), true);
            let sq = t.square(id);
            let f = t.mean_all(sq);
            let sp = t.softplus(id);
            let g = t.sum_all(sp);
            let wf = t.scalar_mul(weight_f, f);
            let wg = t.scalar_mul(weight_g, g);
            let root = t.add(wf, wg).unwrap();
            t.backward(root).unwrap();
            t.grad_or_zeros(id)
        };
        let combined = grad_of(a, b);
        let gf = grad_of(1.0, 0.0);
        let gg = grad_of(0.0, 1.0);
        for i in 0..5 {
            for j in 0..5 {
                let expected = a * gf[(i, j)] + b * gg[(i, j)];
                prop_assert!((combined[(i, j)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sparse_matmul_agrees_with_densified_product(g in arb_graph(), cols in 1usize..6) {
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let n = g.node_count();
        let x = Array2::from_shape_fn((n, cols), |(i, j)| ((i * 7 + j * 3) as f64 * 0.13).sin());
        let mut t = Tape::new();
        let xv = t.constant(x.clone());
        let y = t.sparse_matmul(&adj, xv).unwrap();
        let dense = adj.to_dense().dot(&x);
        let max_err = t
            .data(y)
            .iter()
            .zip(dense.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        prop_assert!(max_err < 1e-12, "sparse vs dense error {max_err}");
    }
}

#[test]
fn every_op_passes_finite_difference_check() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    let mat = |r: usize, c: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        Array2::from_shape_fn((r, c), |_| rng.random_range(-2.0..2.0))
    };
    let pos = |r: usize, c: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        Array2::from_shape_fn((r, c), |_| rng.random_range(0.5..2.0))
    };

    type Builder = Box<
        dyn Fn(
            &mut Tape<f64>,
            &[grafair_core::autodiff::ValueId],
        ) -> Result<grafair_core::autodiff::ValueId, grafair_core::autodiff::DiffError>,
    >;
    let g = graph_from_parts(4, &[(0, 1), (1, 2), (2, 3)], &[0, 1, 0, 1], &[0, 1, 1, 0]);
    let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));

    let cases: Vec<(&str, Vec<Mat<f64>>, Builder)> = vec![
        (
            "matmul",
            vec![mat(3, 4, &mut rng), mat(4, 2, &mut rng)],
            Box::new(|t, ids| {
                let y = t.matmul(ids[0], ids[1])?;
                Ok(t.mean_all(y))
            }),
        ),
        (
            "sparse_matmul",
            vec![mat(4, 3, &mut rng)],
            Box::new(move |t, ids| {
                let y = t.sparse_matmul(&adj, ids[0])?;
                let sq = t.square(y);
                Ok(t.mean_all(sq))
            }),
        ),
        (
            "add",
            vec![mat(3, 3, &mut rng), mat(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.add(ids[0], ids[1])?;
                let sq = t.square(y);
                Ok(t.sum_all(sq))
            }),
        ),
        (
            "add_row",
            vec![mat(4, 3, &mut rng), mat(1, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.add_row(ids[0], ids[1])?;
                let sq = t.square(y);
                Ok(t.mean_all(sq))
            }),
        ),
        (
            "concat_cols",
            vec![mat(3, 2, &mut rng), mat(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.concat_cols(ids[0], ids[1])?;
                let sp = t.softplus(y);
                Ok(t.sum_all(sp))
            }),
        ),
        (
            "slice_cols",
            vec![mat(3, 5, &mut rng)],
            Box::new(|t, ids| {
                let y = t.slice_cols(ids[0], 1, 4)?;
                let sq = t.square(y);
                Ok(t.mean_all(sq))
            }),
        ),
        (
            "softplus",
            vec![mat(4, 4, &mut rng)],
            Box::new(|t, ids| {
                let y = t.softplus(ids[0]);
                Ok(t.sum_all(y))
            }),
        ),
        (
            "exp",
            vec![mat(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.exp(ids[0]);
                Ok(t.mean_all(y))
            }),
        ),
        (
            "log",
            vec![pos(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.log(ids[0]);
                Ok(t.sum_all(y))
            }),
        ),
        (
            "square",
            vec![mat(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.square(ids[0]);
                Ok(t.mean_all(y))
            }),
        ),
        (
            "clamp_min",
            vec![pos(3, 3, &mut rng)],
            Box::new(|t, ids| {
                // inputs in [0.5, 2] keep us away from the kink at 0.25
                let y = t.clamp_min(ids[0], 0.25);
                let lg = t.log(y);
                Ok(t.sum_all(lg))
            }),
        ),
        (
            "elementwise_mul",
            vec![mat(3, 3, &mut rng), mat(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.elementwise_mul(ids[0], ids[1])?;
                Ok(t.sum_all(y))
            }),
        ),
        (
            "scalar_mul",
            vec![mat(3, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.scalar_mul(-1.7, ids[0]);
                let sq = t.square(y);
                Ok(t.mean_all(sq))
            }),
        ),
        (
            "row_gather",
            vec![mat(5, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.row_gather(ids[0], vec![0, 2, 2, 4])?;
                let sq = t.square(y);
                Ok(t.sum_all(sq))
            }),
        ),
        (
            "mean_all",
            vec![mat(4, 2, &mut rng)],
            Box::new(|t, ids| {
                let sq = t.square(ids[0]);
                Ok(t.mean_all(sq))
            }),
        ),
        (
            "softmax_rows",
            vec![mat(4, 3, &mut rng)],
            Box::new(|t, ids| {
                let y = t.softmax_rows(ids[0]);
                let picked = t.row_gather(y, vec![0, 1, 2, 3])?;
                let lg = t.log(picked);
                Ok(t.mean_all(lg))
            }),
        ),
    ];

    for (name, params, builder) in cases {
        let err = finite_diff_check(|t, ids| builder(t, ids), &params, 1e-5).unwrap();
        assert!(err < 1e-4, "op {name}: relative error {err}");
    }
}

// Brute-force per-node counting oracle; second implementation kept
// deliberately separate from the metrics module.
mod oracle {
    pub fn f1(pred: &[u8], labels: &[u8], mask: &[bool]) -> f64 {
        let nodes: Vec<usize> = (0..pred.len()).filter(|&i| mask[i]).collect();
        let tp = nodes.iter().filter(|&&i| pred[i] == 1 && labels[i] == 1).count();
        let fp = nodes.iter().filter(|&&i| pred[i] == 1 && labels[i] == 0).count();
        let fn_ = nodes.iter().filter(|&&i| pred[i] == 0 && labels[i] == 1).count();
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        if p + r == 0.0 {
            0.0
        } else {
            100.0 * 2.0 * p * r / (p + r)
        }
    }

    pub fn statistical_parity(pred: &[u8], sens: &[u8], mask: &[bool]) -> Option<f64> {
        let group = |s: u8| -> Vec<usize> {
            (0..pred.len()).filter(|&i| mask[i] && sens[i] == s).collect()
        };
        let (g0, g1) = (group(0), group(1));
        if g0.is_empty() || g1.is_empty() {
            return None;
        }
        let rate = |g: &[usize]| {
            g.iter().filter(|&&i| pred[i] == 1).count() as f64 / g.len() as f64
        };
        Some(100.0 * (rate(&g1) - rate(&g0)).abs())
    }

    pub fn equal_opportunity(
        pred: &[u8],
        labels: &[u8],
        sens: &[u8],
        mask: &[bool],
    ) -> Option<f64> {
        let positives = |s: u8| -> Vec<usize> {
            (0..pred.len())
                .filter(|&i| mask[i] && sens[i] == s && labels[i] == 1)
                .collect()
        };
        let (p0, p1) = (positives(0), positives(1));
        if p0.is_empty() || p1.is_empty() {
            return None;
        }
        let tpr = |g: &[usize]| {
            g.iter().filter(|&&i| pred[i] == 1).count() as f64 / g.len() as f64
        };
        Some(100.0 * (tpr(&p1) - tpr(&p0)).abs())
    }
}

#[test]
fn metrics_equal_counting_oracle_on_200_random_instances() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.random_range(2..=50);
        let pred: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let sens: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.random_range(0.0..1.0) < 0.8).collect();
        if mask.iter().filter(|&&b| b).count() == 0 {
            continue;
        }
        assert_eq!(
            metrics::f1_score(&pred, &labels, &mask).unwrap(),
            oracle::f1(&pred, &labels, &mask),
        );
        match oracle::statistical_parity(&pred, &sens, &mask) {
            Some(expected) => assert_eq!(
                metrics::statistical_parity(&pred, &sens, &mask).unwrap(),
                expected
            ),
            None => assert!(metrics::statistical_parity(&pred, &sens, &mask).is_err()),
        }
        match oracle::equal_opportunity(&pred, &labels, &sens, &mask) {
            Some(expected) => assert_eq!(
                metrics::equal_opportunity(&pred, &labels, &sens, &mask).unwrap(),
                expected
            ),
            None => assert!(metrics::equal_opportunity(&pred, &labels, &sens, &mask).is_err()),
        }
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_relabeling_leaves_gaps_unchanged(
        n in 4usize..40,
        seed in 0u64..5000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pred: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let sens: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let flipped: Vec<u8> = sens.iter().map(|&s| 1 - s).collect();
        let mask = vec![true; n];
        if let Ok(sp) = metrics::statistical_parity(&pred, &sens, &mask) {
            prop_assert_eq!(sp, metrics::statistical_parity(&pred, &flipped, &mask).unwrap());
        }
        if let Ok(eo) = metrics::equal_opportunity(&pred, &labels, &sens, &mask) {
            prop_assert_eq!(eo, metrics::equal_opportunity(&pred, &labels, &flipped, &mask).unwrap());
        }
    }

    #[test]
    fn metrics_are_permutation_invariant(
        n in 4usize..40,
        seed in 0u64..5000,
    ) {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pred: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let sens: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.random_range(0.0..1.0) < 0.9).collect();

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let apply_u8 = |v: &[u8]| -> Vec<u8> { perm.iter().map(|&i| v[i]).collect() };
        let apply_b = |v: &[bool]| -> Vec<bool> { perm.iter().map(|&i| v[i]).collect() };
        let (pp, lp, sp_, mp) = (apply_u8(&pred), apply_u8(&labels), apply_u8(&sens), apply_b(&mask));

        if let Ok(v) = metrics::f1_score(&pred, &labels, &mask) {
            prop_assert_eq!(v, metrics::f1_score(&pp, &lp, &mp).unwrap());
        }
        if let Ok(v) = metrics::statistical_parity(&pred, &sens, &mask) {
            prop_assert_eq!(v, metrics::statistical_parity(&pp, &sp_, &mp).unwrap());
        }
        if let Ok(v) = metrics::equal_opportunity(&pred, &labels, &sens, &mask) {
            prop_assert_eq!(v, metrics::equal_opportunity(&pp, &lp, &sp_, &mp).unwrap());
        }
    }
}
