//! Variational encoder/decoder for fair node classification, plus the
//! ablation variants used in the evaluation harness.
//!
//! The encoder stacks graph-aggregated linear layers whose output splits
//! into a mean half and a variance half (softplus keeps variances
//! positive). Latents are drawn per layer as `z = mu + sigma .* eps`
//! with `eps` entering the tape as a constant, so gradients flow through
//! mean and variance only. The decoder optionally concatenates a one-hot
//! encoding of the sensitive attribute before the affine+softmax head.

use crate::autodiff::{DiffError, Tape, ValueId};
use crate::graph::{AttributedGraph, NormalizedAdjacency};
use crate::scalar::{cast, Scalar};
use crate::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("{what} has shape {got:?}, expected {expected:?}")]
    BadWeightShape {
        what: &'static str,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("sensitive vector has length {got}, expected {expected}")]
    SensitiveLength { got: usize, expected: usize },
    #[error("checkpoint io: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    CheckpointFormat(#[from] serde_json::Error),
}

/// Model family member. `Full` is the shipped objective; the others are
/// the ablation and baseline configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// KL-regularized stochastic encoder, sensitive attribute
    /// concatenated into the decoder input.
    Full,
    /// Stochastic encoder without the KL term.
    NoKl,
    /// KL-regularized stochastic encoder, decoder never sees the
    /// sensitive attribute.
    NoSConcat,
    /// Plain auto-encoder: no sampling, no KL, concatenation kept.
    Deterministic,
    /// Plain graph-convolution classifier.
    Vanilla,
    /// Vanilla with the sensitive feature column zeroed on input.
    VanillaWoS,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Vanilla,
        Variant::VanillaWoS,
        Variant::Full,
        Variant::NoKl,
        Variant::NoSConcat,
        Variant::Deterministic,
    ];

    /// Whether training draws latent noise.
    pub fn samples(&self) -> bool {
        matches!(self, Variant::Full | Variant::NoKl | Variant::NoSConcat)
    }

    /// Whether the decoder input is `z || onehot(s)`.
    pub fn concats_sensitive(&self) -> bool {
        matches!(self, Variant::Full | Variant::NoKl | Variant::Deterministic)
    }

    /// Whether the loss keeps its divergence term.
    pub fn uses_kl(&self) -> bool {
        matches!(self, Variant::Full | Variant::NoSConcat)
    }

    /// Whether the sensitive feature column is zeroed before encoding.
    pub fn zeroes_sensitive_input(&self) -> bool {
        matches!(self, Variant::VanillaWoS)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoKl => "no-kl",
            Variant::NoSConcat => "no-s-concat",
            Variant::Deterministic => "deterministic",
            Variant::Vanilla => "vanilla",
            Variant::VanillaWoS => "vanilla-wo-s",
        }
    }

    pub fn parse(s: &str) -> Result<Variant, ModelError> {
        match s {
            "full" => Ok(Variant::Full),
            "no-kl" => Ok(Variant::NoKl),
            "no-s-concat" => Ok(Variant::NoSConcat),
            "deterministic" | "gae" => Ok(Variant::Deterministic),
            "vanilla" => Ok(Variant::Vanilla),
            "vanilla-wo-s" => Ok(Variant::VanillaWoS),
            other => Err(ModelError::UnknownVariant(other.to_string())),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderLayer<T> {
    pub weight: Mat<T>,
    /// 1 x out bias row.
    pub bias: Mat<T>,
}

/// Trainable weights plus the variant flags that shape inference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrafairModel<T> {
    pub variant: Variant,
    pub hidden_dim: usize,
    /// Layer `l` maps width `f_in` to `2 * hidden_dim`; the first half of
    /// the output is the mean head, the second the variance head.
    pub encoder_weights: Vec<Mat<T>>,
    pub decoder: Vec<DecoderLayer<T>>,
    /// Restrict latent sampling to the last encoder layer.
    pub sample_final_only: bool,
}

/// Architecture description used by [`init_weights`].
#[derive(Debug, Clone, Copy)]
pub struct ModelDims {
    pub in_dim: usize,
    pub hidden_dim: usize,
    pub encoder_layers: usize,
    pub classifier_layers: usize,
    pub classes: usize,
}

/// Per-node Gaussian posterior and the latent draw taken from it.
#[derive(Debug, Clone)]
pub struct EncodedPosterior<T> {
    pub mu: Mat<T>,
    /// ln(sigma^2), elementwise.
    pub log_var: Mat<T>,
    pub z: Mat<T>,
    /// The noise actually used; zeros when sampling was off.
    pub epsilon: Mat<T>,
}

/// Tape handles for one staged forward pass.
pub struct TapedPosterior {
    pub mu: ValueId,
    pub var: ValueId,
    pub log_var: ValueId,
    pub z: ValueId,
}

/// Tape leaves holding the staged copy of the model parameters, in
/// [`GrafairModel::params`] order.
pub struct StagedParams {
    pub encoder: Vec<ValueId>,
    pub decoder: Vec<(ValueId, ValueId)>,
}

impl StagedParams {
    pub fn flat(&self) -> Vec<ValueId> {
        let mut out = self.encoder.clone();
        for (w, b) in &self.decoder {
            out.push(*w);
            out.push(*b);
        }
        out
    }
}

fn glorot<T: Scalar, R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat<T> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Mat::from_shape_fn((rows, cols), |_| {
        cast::<T>(rng.random_range(-bound..bound))
    })
}

/// Glorot-uniform initialization of all weights, deterministic per seed.
pub fn init_weights<T: Scalar>(
    dims: ModelDims,
    variant: Variant,
    rng_seed: u64,
) -> GrafairModel<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let f = dims.hidden_dim;
    let mut encoder_weights = Vec::with_capacity(dims.encoder_layers);
    let mut width = dims.in_dim;
    for _ in 0..dims.encoder_layers {
        encoder_weights.push(glorot::<T, _>(width, 2 * f, &mut rng));
        width = f;
    }
    let mut decoder = Vec::with_capacity(dims.classifier_layers);
    let mut dec_in = if variant.concats_sensitive() { f + 2 } else { f };
    for layer in 0..dims.classifier_layers {
        let out = if layer + 1 == dims.classifier_layers {
            dims.classes
        } else {
            f
        };
        decoder.push(DecoderLayer {
            weight: glorot::<T, _>(dec_in, out, &mut rng),
            bias: Mat::zeros((1, out)),
        });
        dec_in = out;
    }
    GrafairModel {
        variant,
        hidden_dim: f,
        encoder_weights,
        decoder,
        sample_final_only: false,
    }
}

impl<T: Scalar> GrafairModel<T> {
    pub fn encoder_layer_count(&self) -> usize {
        self.encoder_weights.len()
    }

    pub fn class_count(&self) -> usize {
        self.decoder.last().map(|l| l.weight.ncols()).unwrap_or(0)
    }

    /// All trainable matrices in a fixed order (encoder layers, then
    /// decoder weight/bias pairs). [`StagedParams`] and the optimizer
    /// rely on this order.
    pub fn params(&self) -> Vec<&Mat<T>> {
        let mut out: Vec<&Mat<T>> = self.encoder_weights.iter().collect();
        for l in &self.decoder {
            out.push(&l.weight);
            out.push(&l.bias);
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Mat<T>> {
        let mut out: Vec<&mut Mat<T>> = Vec::new();
        for w in &mut self.encoder_weights {
            out.push(w);
        }
        for l in &mut self.decoder {
            out.push(&mut l.weight);
            out.push(&mut l.bias);
        }
        out
    }

    /// Copies the parameters onto a tape as leaves.
    pub fn stage_params(&self, tape: &mut Tape<T>, requires_grad: bool) -> StagedParams {
        let encoder = self
            .encoder_weights
            .iter()
            .map(|w| tape.leaf(w.clone(), requires_grad))
            .collect();
        let decoder = self
            .decoder
            .iter()
            .map(|l| {
                (
                    tape.leaf(l.weight.clone(), requires_grad),
                    tape.leaf(l.bias.clone(), requires_grad),
                )
            })
            .collect();
        StagedParams { encoder, decoder }
    }

    /// Draws the per-layer latent noise for one stochastic forward pass.
    /// Layers that do not sample get `None`.
    pub fn draw_epsilon(&self, n: usize, rng_seed: u64) -> Vec<Option<Mat<T>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let layers = self.encoder_layer_count();
        (0..layers)
            .map(|l| {
                if self.layer_samples(l) {
                    Some(Mat::from_shape_fn((n, self.hidden_dim), |_| {
                        cast::<T>(rng.sample::<f64, _>(StandardNormal))
                    }))
                } else {
                    None
                }
            })
            .collect()
    }

    fn layer_samples(&self, layer: usize) -> bool {
        self.variant.samples()
            && (!self.sample_final_only || layer + 1 == self.encoder_layer_count())
    }

    fn validate_input_width(&self, d: usize) -> Result<(), ModelError> {
        let expected = self.encoder_weights[0].nrows();
        if d != expected {
            return Err(ModelError::BadWeightShape {
                what: "first encoder layer",
                got: (expected, self.encoder_weights[0].ncols()),
                expected: (d, 2 * self.hidden_dim),
            });
        }
        Ok(())
    }

    /// Records the encoder on `tape`. When `sample` is false (or the
    /// variant never samples) every layer propagates its mean and
    /// `epsilon` entries are ignored.
    pub fn encode_on_tape(
        &self,
        tape: &mut Tape<T>,
        params: &StagedParams,
        g: &AttributedGraph<T>,
        adj: &Arc<NormalizedAdjacency<T>>,
        sample: bool,
        epsilon: &[Option<Mat<T>>],
    ) -> Result<TapedPosterior, ModelError> {
        self.validate_input_width(g.feature_dim())?;
        let f = self.hidden_dim;
        let mut x = g.features().clone();
        if self.variant.zeroes_sensitive_input() {
            x.column_mut(g.sensitive_col()).fill(T::zero());
        }
        let mut h = tape.constant(x);
        let mut last = None;
        for (l, &w) in params.encoder.iter().enumerate() {
            let lin = tape.matmul(h, w)?;
            let agg = tape.sparse_matmul(adj, lin)?;
            let mu = tape.slice_cols(agg, 0, f)?;
            let pre_var = tape.slice_cols(agg, f, 2 * f)?;
            let var = tape.softplus(pre_var);
            let log_var = tape.log(var);
            let z = if sample && self.layer_samples(l) {
                let eps = epsilon
                    .get(l)
                    .and_then(|e| e.clone())
                    .unwrap_or_else(|| Mat::zeros((g.node_count(), f)));
                let eps = tape.constant(eps);
                let half_log_var = tape.scalar_mul(cast::<T>(0.5), log_var);
                let sigma = tape.exp(half_log_var);
                let noise = tape.elementwise_mul(sigma, eps)?;
                tape.add(mu, noise)?
            } else {
                mu
            };
            last = Some(TapedPosterior {
                mu,
                var,
                log_var,
                z,
            });
            h = z;
        }
        Ok(last.expect("at least one encoder layer"))
    }

    /// Records the decoder on `tape`; returns the class-probability node.
    pub fn decode_on_tape(
        &self,
        tape: &mut Tape<T>,
        params: &StagedParams,
        z: ValueId,
        one_hot_sensitive: &Mat<T>,
    ) -> Result<ValueId, ModelError> {
        let mut h = if self.variant.concats_sensitive() {
            let s = tape.constant(one_hot_sensitive.clone());
            tape.concat_cols(z, s)?
        } else {
            z
        };
        let layers = self.decoder.len();
        for (i, &(w, b)) in params.decoder.iter().enumerate() {
            let lin = tape.matmul(h, w)?;
            h = tape.add_row(lin, b)?;
            if i + 1 < layers {
                h = tape.softplus(h);
            }
        }
        Ok(tape.softmax_rows(h))
    }

    /// Plain-matrix encoding: runs the tape internally and extracts the
    /// posterior. The stored epsilon reproduces the final-layer draw, so
    /// `z == mu + exp(0.5 * log_var) .* epsilon` holds exactly.
    pub fn encode(
        &self,
        g: &AttributedGraph<T>,
        adj: &Arc<NormalizedAdjacency<T>>,
        sample: bool,
        rng_seed: u64,
    ) -> Result<EncodedPosterior<T>, ModelError> {
        let mut tape = Tape::new();
        let params = self.stage_params(&mut tape, false);
        let eps = if sample && self.variant.samples() {
            self.draw_epsilon(g.node_count(), rng_seed)
        } else {
            vec![None; self.encoder_layer_count()]
        };
        let post = self.encode_on_tape(&mut tape, &params, g, adj, sample, &eps)?;
        let final_eps = if sample && self.layer_samples(self.encoder_layer_count() - 1) {
            eps.last()
                .and_then(|e| e.clone())
                .unwrap_or_else(|| Mat::zeros((g.node_count(), self.hidden_dim)))
        } else {
            Mat::zeros((g.node_count(), self.hidden_dim))
        };
        Ok(EncodedPosterior {
            mu: tape.data(post.mu).clone(),
            log_var: tape.data(post.log_var).clone(),
            z: tape.data(post.z).clone(),
            epsilon: final_eps,
        })
    }

    /// Class probabilities for an encoded posterior.
    pub fn decode(
        &self,
        posterior: &EncodedPosterior<T>,
        sensitive: &[u8],
    ) -> Result<Mat<T>, ModelError> {
        if sensitive.len() != posterior.z.nrows() {
            return Err(ModelError::SensitiveLength {
                got: sensitive.len(),
                expected: posterior.z.nrows(),
            });
        }
        let mut one_hot = Mat::<T>::zeros((sensitive.len(), 2));
        for (i, &s) in sensitive.iter().enumerate() {
            one_hot[(i, s as usize)] = T::one();
        }
        let mut tape = Tape::new();
        let params = self.stage_params(&mut tape, false);
        let z = tape.constant(posterior.z.clone());
        let prob = self.decode_on_tape(&mut tape, &params, z, &one_hot)?;
        Ok(tape.data(prob).clone())
    }

    /// Deterministic end-to-end prediction (sampling off).
    pub fn predict(
        &self,
        g: &AttributedGraph<T>,
        adj: &Arc<NormalizedAdjacency<T>>,
    ) -> Result<Vec<u8>, ModelError> {
        let posterior = self.encode(g, adj, false, 0)?;
        let prob = self.decode(&posterior, g.sensitive())?;
        Ok(predict_labels(&prob))
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<(), ModelError>
    where
        T: Serialize,
    {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self, ModelError>
    where
        T: for<'de> Deserialize<'de>,
    {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// Row-wise argmax; exact ties resolve to class 0.
pub fn predict_labels<T: Scalar>(prob: &Mat<T>) -> Vec<u8> {
    prob.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best as u8
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, normalize_adjacency, AggregationKind, SplitSpec};
    use ndarray::array;

    fn line_graph(n: usize, d: usize) -> AttributedGraph<f64> {
        let mut features = Mat::<f64>::zeros((n, d));
        for i in 0..n {
            features[(i, 0)] = (i % 2) as f64;
            for j in 1..d {
                features[(i, j)] = ((i + j) as f64).sin();
            }
        }
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        build_graph(
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
        .unwrap()
    }

    fn model_for(g: &AttributedGraph<f64>, variant: Variant, seed: u64) -> GrafairModel<f64> {
        init_weights(
            ModelDims {
                in_dim: g.feature_dim(),
                hidden_dim: 5,
                encoder_layers: 2,
                classifier_layers: 1,
                classes: 2,
            },
            variant,
            seed,
        )
    }

    #[test]
    fn no_sampling_returns_mean() {
        let g = line_graph(6, 4);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let m = model_for(&g, Variant::Full, 1);
        let p = m.encode(&g, &adj, false, 99).unwrap();
        assert_eq!(p.z, p.mu);
        assert!(p.epsilon.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let g = line_graph(6, 4);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let m = model_for(&g, Variant::Full, 1);
        let a = m.encode(&g, &adj, true, 7).unwrap();
        let b = m.encode(&g, &adj, true, 7).unwrap();
        assert_eq!(a.z, b.z);
        let c = m.encode(&g, &adj, true, 8).unwrap();
        assert!(a.z != c.z);
    }

    #[test]
    fn reparameterization_reconstructs_exactly() {
        let g = line_graph(6, 4);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let m = model_for(&g, Variant::Full, 1);
        let p = m.encode(&g, &adj, true, 5).unwrap();
        let rebuilt = &p.mu + &(p.log_var.mapv(|lv| (0.5 * lv).exp()) * &p.epsilon);
        assert_eq!(p.z, rebuilt);
        assert!(p.log_var.iter().all(|&lv| lv.exp() > 0.0));
    }

    #[test]
    fn zero_second_half_gives_softplus_zero_variance() {
        // single isolated node, single layer, zero weights: the variance
        // pre-activation is 0, so sigma^2 = softplus(0) = ln 2
        let g = line_graph(1, 3);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let mut m = model_for(&g, Variant::Full, 1);
        m.encoder_weights = vec![Mat::zeros((3, 10))];
        let p = m.encode(&g, &adj, false, 0).unwrap();
        for &lv in p.log_var.iter() {
            assert!((lv.exp() - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_decoder_gives_uniform_probabilities() {
        let g = line_graph(4, 3);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let mut m = model_for(&g, Variant::Full, 1);
        for l in &mut m.decoder {
            l.weight.fill(0.0);
            l.bias.fill(0.0);
        }
        let p = m.encode(&g, &adj, false, 0).unwrap();
        let prob = m.decode(&p, g.sensitive()).unwrap();
        for &v in prob.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let g = line_graph(5, 3);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let m = model_for(&g, Variant::Full, 3);
        let p = m.encode(&g, &adj, false, 0).unwrap();
        let prob = m.decode(&p, g.sensitive()).unwrap();
        for row in prob.rows() {
            let s: f64 = row.sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sensitive_flip_matters_only_with_concat() {
        let g = line_graph(3, 3);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        for (variant, expect_change) in [(Variant::Full, true), (Variant::NoSConcat, false)] {
            let m = model_for(&g, variant, 11);
            let p = m.encode(&g, &adj, false, 0).unwrap();
            let a = m.decode(&p, &[0, 0, 0]).unwrap();
            let b = m.decode(&p, &[1, 1, 1]).unwrap();
            assert_eq!(a != b, expect_change, "variant {variant:?}");
        }
    }

    #[test]
    fn predict_labels_argmax_and_tie_break() {
        let prob = array![[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]];
        assert_eq!(predict_labels(&prob), vec![0, 0, 1]);
    }

    #[test]
    fn argmax_invariant_under_monotone_transform() {
        let prob = array![[0.7, 0.3], [0.25, 0.75], [0.6, 0.4]];
        let squashed = prob.mapv(|v: f64| v.powi(3) + 1.0);
        assert_eq!(predict_labels(&prob), predict_labels(&squashed));
    }

    #[test]
    fn init_is_seed_deterministic_and_bounded() {
        let dims = ModelDims {
            in_dim: 7,
            hidden_dim: 4,
            encoder_layers: 2,
            classifier_layers: 2,
            classes: 2,
        };
        let a = init_weights::<f64>(dims, Variant::Full, 5);
        let b = init_weights::<f64>(dims, Variant::Full, 5);
        assert_eq!(a.encoder_weights, b.encoder_weights);
        let c = init_weights::<f64>(dims, Variant::Full, 6);
        assert!(a.encoder_weights[0] != c.encoder_weights[0]);
        let bound = (6.0 / (7 + 8) as f64).sqrt();
        for &w in a.encoder_weights[0].iter() {
            assert!(w.abs() <= bound);
        }
        // decoder widths: (f+2) -> f -> classes for two classifier layers
        assert_eq!(a.decoder[0].weight.dim(), (6, 4));
        assert_eq!(a.decoder[1].weight.dim(), (4, 2));
    }

    #[test]
    fn decoder_width_tracks_concat_variants() {
        let g = line_graph(4, 3);
        for variant in Variant::ALL {
            let m = model_for(&g, variant, 2);
            let expected = if variant.concats_sensitive() { 7 } else { 5 };
            assert_eq!(m.decoder[0].weight.nrows(), expected, "{variant}");
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = line_graph(4, 3);
        let m = model_for(&g, Variant::NoSConcat, 13);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        m.save_checkpoint(&path).unwrap();
        let back = GrafairModel::<f64>::load_checkpoint(&path).unwrap();
        assert_eq!(back.variant, m.variant);
        assert_eq!(back.encoder_weights, m.encoder_weights);
        assert_eq!(back.decoder[0].weight, m.decoder[0].weight);
        assert_eq!(back.decoder[0].bias, m.decoder[0].bias);
    }

    #[test]
    fn vanilla_wo_s_ignores_sensitive_column() {
        let g = line_graph(5, 3);
        let adj = Arc::new(normalize_adjacency(&g, AggregationKind::SymmetricGcn));
        let m = model_for(&g, Variant::VanillaWoS, 21);
        let a = m.predict(&g, &adj).unwrap();
        let b = m.predict(&g.flip_sensitive(1), &adj).unwrap();
        assert_eq!(a, b);
    }
}
