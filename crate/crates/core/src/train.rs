//! Single-seed training loop: stage parameters on a fresh tape each
//! epoch, run the stochastic forward pass, differentiate the objective,
//! and apply Adam. Evaluation always runs with sampling off.

use crate::autodiff::DiffError;
use crate::config::{AggregationMode, TrainConfig};
use crate::graph::{
    normalize_adjacency, sample_neighbor_adjacency, AttributedGraph, NormalizedAdjacency,
};
use crate::loss::{loss_on_tape, LossBreakdown, LossError};
use crate::metrics::{evaluate_model, MetricError, MetricsReport};
use crate::model::{init_weights, GrafairModel, ModelDims, ModelError};
use crate::optim::{Adam, OptimError};
use crate::scalar::Scalar;
use crate::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Outcome of one seed: the per-epoch loss trace and the final metrics.
/// Wall-clock timings are kept out of the serialized form so that
/// reports are byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub trace: Vec<LossBreakdown>,
    pub metrics: MetricsReport,
    #[serde(skip)]
    pub epoch_seconds: Vec<f64>,
}

impl RunResult {
    pub fn mean_epoch_seconds(&self) -> f64 {
        if self.epoch_seconds.is_empty() {
            0.0
        } else {
            self.epoch_seconds.iter().sum::<f64>() / self.epoch_seconds.len() as f64
        }
    }
}

/// Trains one model from scratch. Fully reproducible: weights, latent
/// noise, neighbor samples and evaluation all derive from `seed`.
pub fn train<T: Scalar>(
    g: &AttributedGraph<T>,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(GrafairModel<T>, RunResult), TrainError> {
    let dims = ModelDims {
        in_dim: g.feature_dim(),
        hidden_dim: cfg.hidden_dim,
        encoder_layers: cfg.encoder_layers,
        classifier_layers: cfg.classifier_layers,
        classes: 2,
    };
    let mut model = init_weights::<T>(dims, cfg.variant, seed);
    model.sample_final_only = cfg.sample_final_only;

    let fixed_adj = Arc::new(normalize_adjacency(g, cfg.aggregation.fixed_kind()));
    let mut stream = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe_f00d_d00d);

    let shapes: Vec<(usize, usize)> = model.params().iter().map(|p| p.dim()).collect();
    let mut adam = Adam::<T>::new(cfg.lr, &shapes);

    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut epoch_seconds = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        let noise_seed: u64 = stream.random();
        let adj: Arc<NormalizedAdjacency<T>> = match cfg.aggregation {
            AggregationMode::Sampled(k) => {
                Arc::new(sample_neighbor_adjacency(g, k, &mut stream))
            }
            _ => Arc::clone(&fixed_adj),
        };

        let mut tape = crate::autodiff::Tape::new();
        let staged = model.stage_params(&mut tape, true);
        let epsilon = model.draw_epsilon(g.node_count(), noise_seed);
        let posterior = model.encode_on_tape(&mut tape, &staged, g, &adj, true, &epsilon)?;
        let one_hot = g.one_hot_sensitive();
        let prob = model.decode_on_tape(&mut tape, &staged, posterior.z, &one_hot)?;
        let loss = loss_on_tape(
            &mut tape,
            &posterior,
            prob,
            g.labels(),
            g.train_mask(),
            cfg.beta,
            cfg.variant,
        )?;

        let kl = tape.scalar_value(loss.kl).to_f64().unwrap_or(f64::NAN);
        let nll = tape.scalar_value(loss.nll).to_f64().unwrap_or(f64::NAN);
        let breakdown = LossBreakdown {
            kl_term: kl,
            nll_term: nll,
            beta: cfg.beta,
            total: kl + cfg.beta * nll,
        };
        if !breakdown.total.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }

        tape.backward(loss.total)?;
        let grads: Vec<Mat<T>> = staged
            .flat()
            .into_iter()
            .map(|id| tape.grad_or_zeros(id))
            .collect();
        adam.step(&mut model.params_mut(), &grads)?;

        trace.push(breakdown);
        epoch_seconds.push(started.elapsed().as_secs_f64());
    }

    let eval_adj = match cfg.aggregation {
        // evaluation needs a deterministic view; full-neighborhood sum
        AggregationMode::Sampled(_) => {
            Arc::new(normalize_adjacency(g, cfg.aggregation.fixed_kind()))
        }
        _ => fixed_adj,
    };
    let metrics = evaluate_model(
        &model,
        g,
        &eval_adj,
        g.test_mask(),
        cfg.noise_std,
        cfg.rs_trials,
        seed,
    )?;
    Ok((
        model,
        RunResult {
            seed,
            trace,
            metrics,
            epoch_seconds,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_biased_graph;

    fn quick_cfg() -> TrainConfig {
        let mut cfg = TrainConfig::default();
        cfg.epochs = 15;
        cfg.hidden_dim = 8;
        cfg.seeds = vec![0];
        cfg.synth.n = 60;
        cfg
    }

    #[test]
    fn zero_epochs_yields_init_metrics_and_empty_trace() {
        let g = synth_biased_graph::<f64>(60, 0.7, 0.5, 2).unwrap();
        let mut cfg = quick_cfg();
        cfg.epochs = 0;
        let (_, run) = train(&g, &cfg, 0).unwrap();
        assert!(run.trace.is_empty());
        assert!(run.metrics.f1.is_finite());
    }

    #[test]
    fn training_decreases_loss() {
        let g = synth_biased_graph::<f64>(60, 0.7, 0.5, 2).unwrap();
        let mut cfg = quick_cfg();
        cfg.epochs = 40;
        let (_, run) = train(&g, &cfg, 1).unwrap();
        assert!(
            run.trace.last().unwrap().total < run.trace[0].total,
            "loss went {} -> {}",
            run.trace[0].total,
            run.trace.last().unwrap().total
        );
    }

    #[test]
    fn vanilla_has_no_divergence_term() {
        let g = synth_biased_graph::<f64>(60, 0.7, 0.5, 2).unwrap();
        let mut cfg = quick_cfg();
        cfg.variant = crate::model::Variant::Vanilla;
        let (_, run) = train(&g, &cfg, 3).unwrap();
        assert!(run.trace.iter().all(|b| b.kl_term == 0.0));
    }

    #[test]
    fn identical_seed_identical_run() {
        let g = synth_biased_graph::<f64>(60, 0.7, 0.5, 2).unwrap();
        let cfg = quick_cfg();
        let (_, a) = train(&g, &cfg, 7).unwrap();
        let (_, b) = train(&g, &cfg, 7).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn sampled_aggregation_trains() {
        let g = synth_biased_graph::<f64>(60, 0.7, 0.5, 2).unwrap();
        let mut cfg = quick_cfg();
        cfg.aggregation = AggregationMode::Sampled(5);
        let (_, run) = train(&g, &cfg, 1).unwrap();
        assert_eq!(run.trace.len(), cfg.epochs);
    }
}
