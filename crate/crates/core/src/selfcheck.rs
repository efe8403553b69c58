//! Independent numeric oracles, runnable both from tests and from the
//! `verify` command: a quadrature route for the closed-form divergence
//! and end-to-end finite-difference checks of the training gradients.

use crate::autodiff::{finite_diff_check, DiffError, Tape, ValueId};
use crate::graph::{build_graph, normalize_adjacency, AggregationKind, AttributedGraph, SplitSpec};
use crate::loss::{loss_on_tape, LossError};
use crate::model::{init_weights, GrafairModel, ModelDims, ModelError, StagedParams, Variant};
use crate::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Loss(#[from] LossError),
}

/// Trapezoid-rule value of `KL(N(mu, e^{log_var}) || N(0,1))` over 12
/// standardized deviations either side of the mean, an
/// implementation-independent cross-check of the closed form.
pub fn kl_quadrature(mu: f64, log_var: f64, points: usize) -> f64 {
    let sigma = (0.5 * log_var).exp();
    let (lo, hi) = (mu - 12.0 * sigma, mu + 12.0 * sigma);
    let h = (hi - lo) / (points - 1) as f64;
    let log_norm = |z: f64, mean: f64, std: f64| -> f64 {
        let d = (z - mean) / std;
        -0.5 * d * d - std.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    };
    let integrand = |z: f64| -> f64 {
        let lp = log_norm(z, mu, sigma);
        let lq = log_norm(z, 0.0, 1.0);
        lp.exp() * (lp - lq)
    };
    let mut acc = 0.5 * (integrand(lo) + integrand(hi));
    for k in 1..points - 1 {
        acc += integrand(lo + k as f64 * h);
    }
    acc * h
}

/// Max absolute disagreement between the closed-form divergence and
/// quadrature over a grid of `(mu, log_var)` pairs.
pub fn kl_grid_max_error(grid: usize, points: usize) -> f64 {
    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (grid - 1) as f64;
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let mu = lin(-3.0, 3.0, i);
            let lv = lin(-2.0, 2.0, j);
            let closed = crate::loss::gaussian_kl(
                &Mat::from_elem((1, 1), mu),
                &Mat::from_elem((1, 1), lv),
            )
            .expect("finite grid inputs");
            let quad = kl_quadrature(mu, lv, points);
            worst = worst.max((closed - quad).abs());
        }
    }
    worst
}

/// Small random instance for gradient checking: 10 nodes, 4 features,
/// hidden width 5, two encoder layers, all nodes in the train mask.
pub fn gradient_check_instance(seed: u64) -> (AttributedGraph<f64>, ModelDims) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 10;
    let d = 4;
    let mut features = Mat::<f64>::zeros((n, d));
    let mut labels = vec![0u8; n];
    for i in 0..n {
        features[(i, 0)] = (i % 2) as f64;
        for j in 1..d {
            features[(i, j)] = rng.random_range(-1.5..1.5);
        }
        labels[i] = rng.random_range(0..2u8);
    }
    // both classes must appear so the likelihood term is non-trivial
    labels[0] = 0;
    labels[1] = 1;
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    edges.push((0, 5));
    edges.push((2, 7));
    let g = build_graph(
        features,
        &edges,
        0,
        &labels,
        &SplitSpec::Explicit {
            train: vec![true; n],
            val: vec![false; n],
            test: vec![false; n],
        },
    )
    .expect("valid gradient-check instance");
    let dims = ModelDims {
        in_dim: d,
        hidden_dim: 5,
        encoder_layers: 2,
        classifier_layers: 1,
        classes: 2,
    };
    (g, dims)
}

fn reassemble(ids: &[ValueId], encoder_layers: usize) -> StagedParams {
    let encoder = ids[..encoder_layers].to_vec();
    let decoder = ids[encoder_layers..]
        .chunks(2)
        .map(|pair| (pair[0], pair[1]))
        .collect();
    StagedParams { encoder, decoder }
}

/// Builds the full objective for `model` on `g` with frozen noise and
/// returns the worst relative error between backward gradients and
/// central differences over every parameter entry.
pub fn loss_gradient_error(
    model: &GrafairModel<f64>,
    g: &AttributedGraph<f64>,
    beta: f64,
    eps: f64,
    noise_seed: u64,
) -> Result<f64, CheckError> {
    let adj = Arc::new(normalize_adjacency(g, AggregationKind::SymmetricGcn));
    let epsilon = model.draw_epsilon(g.node_count(), noise_seed);
    let params: Vec<Mat<f64>> = model.params().into_iter().cloned().collect();
    let encoder_layers = model.encoder_layer_count();
    let one_hot = g.one_hot_sensitive();
    let build = |tape: &mut Tape<f64>, ids: &[ValueId]| -> Result<ValueId, DiffError> {
        let staged = reassemble(ids, encoder_layers);
        let mut run = || -> Result<ValueId, CheckError> {
            let posterior = model.encode_on_tape(tape, &staged, g, &adj, true, &epsilon)?;
            let prob = model.decode_on_tape(tape, &staged, posterior.z, &one_hot)?;
            let loss = loss_on_tape(
                tape,
                &posterior,
                prob,
                g.labels(),
                g.train_mask(),
                beta,
                model.variant,
            )?;
            Ok(loss.total)
        };
        run().map_err(|e| match e {
            CheckError::Diff(d) => d,
            // model/loss construction cannot fail shape checks here;
            // surface anything else as a mismatch on the root
            _ => DiffError::NonScalarRoot((0, 0)),
        })
    };
    Ok(finite_diff_check(build, &params, eps)?)
}

/// Gradient check of the full objective for every variant on the
/// standard small instance. Returns `(variant, max relative error)`.
pub fn gradient_check_all_variants(seed: u64, eps: f64) -> Result<Vec<(Variant, f64)>, CheckError> {
    let (g, dims) = gradient_check_instance(seed);
    let mut out = Vec::new();
    for variant in Variant::ALL {
        let model = init_weights::<f64>(dims, variant, seed.wrapping_add(17));
        let err = loss_gradient_error(&model, &g, 2.5, eps, seed.wrapping_add(99))?;
        out.push((variant, err));
    }
    Ok(out)
}
