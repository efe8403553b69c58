//! Training objective: a closed-form Gaussian divergence term plus a
//! beta-weighted conditional negative log-likelihood, with per-variant
//! gating for the ablation configurations.

use crate::autodiff::{DiffError, Tape, ValueId};
use crate::model::{EncodedPosterior, TapedPosterior, Variant};
use crate::scalar::{cast, Scalar};
use crate::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probabilities are floored here before any logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("non-finite input to divergence term")]
    NonFiniteInput,
    #[error("train mask selects no nodes")]
    EmptyTrainMask,
    #[error("beta {0} is invalid; the trade-off weight must be >= 1")]
    InvalidBeta(f64),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// One evaluation of the objective, split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub kl_term: f64,
    pub nll_term: f64,
    pub beta: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn new(kl_term: f64, nll_term: f64, beta: f64) -> Self {
        LossBreakdown {
            kl_term,
            nll_term,
            beta,
            total: kl_term + beta * nll_term,
        }
    }
}

/// Node-averaged divergence of `N(mu, diag sigma^2)` from `N(0, I)`:
/// `(1/N) sum_i 0.5 sum_j (mu_ij^2 + sigma_ij^2 - 1 - ln sigma_ij^2)`.
pub fn gaussian_kl<T: Scalar>(mu: &Mat<T>, log_var: &Mat<T>) -> Result<T, LossError> {
    if mu.iter().any(|v| !v.is_finite()) || log_var.iter().any(|v| !v.is_finite()) {
        return Err(LossError::NonFiniteInput);
    }
    let mut acc = T::zero();
    for (&m, &lv) in mu.iter().zip(log_var.iter()) {
        acc += m * m + lv.exp() - T::one() - lv;
    }
    let n = cast::<T>(mu.nrows() as f64);
    Ok(acc / (cast::<T>(2.0) * n))
}

/// Mean negative log-probability of the true class over train-mask
/// nodes.
pub fn conditional_nll<T: Scalar>(
    prob: &Mat<T>,
    labels: &[u8],
    train_mask: &[bool],
) -> Result<T, LossError> {
    let floor = cast::<T>(PROB_FLOOR);
    let mut acc = T::zero();
    let mut count = 0usize;
    for i in 0..prob.nrows() {
        if !train_mask[i] {
            continue;
        }
        acc -= prob[(i, labels[i] as usize)].max(floor).ln();
        count += 1;
    }
    if count == 0 {
        return Err(LossError::EmptyTrainMask);
    }
    Ok(acc / cast::<T>(count as f64))
}

/// Assembles the objective from an already-computed posterior and
/// probability matrix. Variants without a divergence term report
/// `kl_term = 0`.
pub fn cfb_loss<T: Scalar>(
    posterior: &EncodedPosterior<T>,
    prob: &Mat<T>,
    labels: &[u8],
    train_mask: &[bool],
    beta: f64,
    variant: Variant,
) -> Result<LossBreakdown, LossError> {
    if beta < 1.0 {
        return Err(LossError::InvalidBeta(beta));
    }
    let kl = if variant.uses_kl() {
        gaussian_kl(&posterior.mu, &posterior.log_var)?
            .to_f64()
            .expect("kl representable as f64")
    } else {
        0.0
    };
    let nll = conditional_nll(prob, labels, train_mask)?
        .to_f64()
        .expect("nll representable as f64");
    Ok(LossBreakdown::new(kl, nll, beta))
}

/// Tape handles for the recorded objective.
pub struct TapedLoss {
    pub total: ValueId,
    pub kl: ValueId,
    pub nll: ValueId,
}

/// Records the objective on the tape so it can be differentiated.
/// Mirrors [`cfb_loss`]: same terms, same gating.
pub fn loss_on_tape<T: Scalar>(
    tape: &mut Tape<T>,
    posterior: &TapedPosterior,
    prob: ValueId,
    labels: &[u8],
    train_mask: &[bool],
    beta: f64,
    variant: Variant,
) -> Result<TapedLoss, LossError> {
    if beta < 1.0 {
        return Err(LossError::InvalidBeta(beta));
    }
    let train_idx: Vec<usize> = (0..labels.len()).filter(|&i| train_mask[i]).collect();
    if train_idx.is_empty() {
        return Err(LossError::EmptyTrainMask);
    }

    // -1/|train| * sum_i ln p_i[y_i]
    let classes = tape.shape(prob).1;
    let mut one_hot = Mat::<T>::zeros((train_idx.len(), classes));
    for (r, &i) in train_idx.iter().enumerate() {
        one_hot[(r, labels[i] as usize)] = T::one();
    }
    let count = train_idx.len();
    let picked_rows = tape.row_gather(prob, train_idx)?;
    let floored = tape.clamp_min(picked_rows, cast::<T>(PROB_FLOOR));
    let log_p = tape.log(floored);
    let one_hot = tape.constant(one_hot);
    let selected = tape.elementwise_mul(log_p, one_hot)?;
    let total_log = tape.sum_all(selected);
    let nll = tape.scalar_mul(cast::<T>(-1.0 / count as f64), total_log);

    // 1/(2N) * sum_ij (mu^2 + sigma^2 - 1 - ln sigma^2)
    let kl = if variant.uses_kl() {
        let n = tape.shape(posterior.mu).0;
        let mu_sq = tape.square(posterior.mu);
        let with_var = tape.add(mu_sq, posterior.var)?;
        let shifted = tape.add_scalar(with_var, cast::<T>(-1.0));
        let neg_log_var = tape.scalar_mul(cast::<T>(-1.0), posterior.log_var);
        let summand = tape.add(shifted, neg_log_var)?;
        let sum = tape.sum_all(summand);
        tape.scalar_mul(cast::<T>(0.5 / n as f64), sum)
    } else {
        tape.constant(Mat::zeros((1, 1)))
    };

    let weighted_nll = tape.scalar_mul(cast::<T>(beta), nll);
    let total = tape.add(kl, weighted_nll)?;
    Ok(TapedLoss { total, kl, nll })
}

/// Mean `-ln q(y_i | s_i)` over train nodes, with `q` the empirical
/// train-set label frequency per sensitive group. Evaluation-only: this
/// term is constant in the model parameters and never enters the
/// optimized objective, but it completes the reported objective value.
pub fn empirical_label_given_sensitive_nll(
    labels: &[u8],
    sensitive: &[u8],
    train_mask: &[bool],
) -> Result<f64, LossError> {
    let mut counts = [[0usize; 2]; 2]; // [s][y]
    let mut total = 0usize;
    for i in 0..labels.len() {
        if train_mask[i] {
            counts[sensitive[i] as usize][labels[i] as usize] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(LossError::EmptyTrainMask);
    }
    let mut acc = 0.0;
    for i in 0..labels.len() {
        if !train_mask[i] {
            continue;
        }
        let s = sensitive[i] as usize;
        let group = counts[s][0] + counts[s][1];
        let q = counts[s][labels[i] as usize] as f64 / group as f64;
        acc -= q.max(PROB_FLOOR).ln();
    }
    Ok(acc / total as f64)
}
