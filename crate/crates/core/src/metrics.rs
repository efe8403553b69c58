//! Utility, group-fairness, counterfactual-fairness and robustness
//! metrics. All values are percentages in [0, 100].

use crate::graph::{AttributedGraph, GraphError, NormalizedAdjacency};
use crate::model::{GrafairModel, ModelError};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("mask selects no nodes")]
    EmptyMask,
    #[error("sensitive group {group} is {problem} within the mask")]
    DegenerateGroup {
        group: u8,
        problem: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Joint counts over evaluated nodes, indexed `[prediction][label][sensitive]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts(pub [[[usize; 2]; 2]; 2]);

impl GroupCounts {
    pub fn tally(pred: &[u8], labels: &[u8], sensitive: &[u8], mask: &[bool]) -> Self {
        let mut c = [[[0usize; 2]; 2]; 2];
        for i in 0..pred.len() {
            if mask[i] {
                c[pred[i] as usize][labels[i] as usize][sensitive[i] as usize] += 1;
            }
        }
        GroupCounts(c)
    }

    pub fn total(&self) -> usize {
        self.0
            .iter()
            .flat_map(|a| a.iter().flat_map(|b| b.iter()))
            .sum()
    }
}

/// Per-run metric bundle. The change-rate fields are secondary
/// diagnostics; the primary robustness and counterfactual numbers are
/// the accuracy differences.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricsReport {
    pub f1: f64,
    pub delta_sp: f64,
    pub delta_eo: f64,
    pub delta_cf: f64,
    pub delta_rs: f64,
    /// Fraction (percent) of mask nodes whose prediction differs between
    /// the two sensitive-attribute interventions.
    pub cf_flip_rate: f64,
    /// Mean percentage of mask nodes whose prediction changes under
    /// feature noise.
    pub rs_label_change: f64,
    pub group_counts: GroupCounts,
}

fn mask_count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// F1 of the positive class, in percent. Returns 0 when precision and
/// recall are both zero.
pub fn f1_score(pred: &[u8], labels: &[u8], mask: &[bool]) -> Result<f64, MetricError> {
    if mask_count(mask) == 0 {
        return Err(MetricError::EmptyMask);
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for i in 0..pred.len() {
        if !mask[i] {
            continue;
        }
        match (pred[i], labels[i]) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(100.0 * 2.0 * precision * recall / (precision + recall))
}

/// Absolute gap in positive-prediction rates between sensitive groups,
/// in percent.
pub fn statistical_parity(
    pred: &[u8],
    sensitive: &[u8],
    mask: &[bool],
) -> Result<f64, MetricError> {
    let mut positives = [0usize; 2];
    let mut sizes = [0usize; 2];
    for i in 0..pred.len() {
        if !mask[i] {
            continue;
        }
        let s = sensitive[i] as usize;
        sizes[s] += 1;
        positives[s] += (pred[i] == 1) as usize;
    }
    for group in [0u8, 1u8] {
        if sizes[group as usize] == 0 {
            return Err(MetricError::DegenerateGroup {
                group,
                problem: "absent",
            });
        }
    }
    let rate0 = positives[0] as f64 / sizes[0] as f64;
    let rate1 = positives[1] as f64 / sizes[1] as f64;
    Ok(100.0 * (rate1 - rate0).abs())
}

/// Absolute gap in true-positive rates between sensitive groups, in
/// percent.
pub fn equal_opportunity(
    pred: &[u8],
    labels: &[u8],
    sensitive: &[u8],
    mask: &[bool],
) -> Result<f64, MetricError> {
    let mut true_pos = [0usize; 2];
    let mut pos = [0usize; 2];
    for i in 0..pred.len() {
        if !mask[i] || labels[i] != 1 {
            continue;
        }
        let s = sensitive[i] as usize;
        pos[s] += 1;
        true_pos[s] += (pred[i] == 1) as usize;
    }
    for group in [0u8, 1u8] {
        if pos[group as usize] == 0 {
            return Err(MetricError::DegenerateGroup {
                group,
                problem: "without positive labels",
            });
        }
    }
    let tpr0 = true_pos[0] as f64 / pos[0] as f64;
    let tpr1 = true_pos[1] as f64 / pos[1] as f64;
    Ok(100.0 * (tpr1 - tpr0).abs())
}

fn accuracy_on(pred: &[u8], labels: &[u8], mask: &[bool]) -> f64 {
    let mut hit = 0usize;
    let mut total = 0usize;
    for i in 0..pred.len() {
        if mask[i] {
            total += 1;
            hit += (pred[i] == labels[i]) as usize;
        }
    }
    hit as f64 / total as f64
}

#[derive(Debug, Clone, Copy)]
pub struct CounterfactualOutcome {
    /// `100 * |acc(s<-1) - acc(s<-0)|` over the mask.
    pub delta: f64,
    /// Percent of mask nodes whose prediction flips between interventions.
    pub flip_rate: f64,
}

/// Accuracy sensitivity to intervening on the sensitive attribute.
/// Inference is deterministic (sampling off) on both counterfactual
/// views; edge storage is shared so only features change.
pub fn counterfactual_fairness<T: Scalar>(
    model: &GrafairModel<T>,
    g: &AttributedGraph<T>,
    adj: &Arc<NormalizedAdjacency<T>>,
    mask: &[bool],
) -> Result<CounterfactualOutcome, MetricError> {
    if mask_count(mask) == 0 {
        return Err(MetricError::EmptyMask);
    }
    let pred1 = model.predict(&g.flip_sensitive(1), adj)?;
    let pred0 = model.predict(&g.flip_sensitive(0), adj)?;
    let acc1 = accuracy_on(&pred1, g.labels(), mask);
    let acc0 = accuracy_on(&pred0, g.labels(), mask);
    let flips = (0..pred1.len())
        .filter(|&i| mask[i] && pred1[i] != pred0[i])
        .count();
    Ok(CounterfactualOutcome {
        delta: 100.0 * (acc1 - acc0).abs(),
        flip_rate: 100.0 * flips as f64 / mask_count(mask) as f64,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RobustnessOutcome {
    /// Mean over trials of `100 * |clean acc - perturbed acc|`.
    pub delta: f64,
    /// Mean percent of mask nodes whose prediction changes under noise.
    pub label_change: f64,
}

/// Accuracy degradation under Gaussian feature noise on test nodes,
/// averaged over `n_trials` independent draws.
pub fn robustness_score<T: Scalar>(
    model: &GrafairModel<T>,
    g: &AttributedGraph<T>,
    adj: &Arc<NormalizedAdjacency<T>>,
    mask: &[bool],
    noise_std: f64,
    n_trials: usize,
    seed: u64,
) -> Result<RobustnessOutcome, MetricError> {
    assert!(n_trials >= 1, "robustness needs at least one trial");
    if mask_count(mask) == 0 {
        return Err(MetricError::EmptyMask);
    }
    let clean = model.predict(g, adj)?;
    let clean_acc = accuracy_on(&clean, g.labels(), mask);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trial_seeds: Vec<u64> = (0..n_trials).map(|_| rng.random()).collect();
    let mut delta_sum = 0.0;
    let mut change_sum = 0.0;
    for trial_seed in trial_seeds {
        let noisy = g.perturb_features(noise_std, trial_seed)?;
        let pred = model.predict(&noisy, adj)?;
        let acc = accuracy_on(&pred, g.labels(), mask);
        delta_sum += (clean_acc - acc).abs();
        let changed = (0..pred.len())
            .filter(|&i| mask[i] && pred[i] != clean[i])
            .count();
        change_sum += changed as f64 / mask_count(mask) as f64;
    }
    Ok(RobustnessOutcome {
        delta: 100.0 * delta_sum / n_trials as f64,
        label_change: 100.0 * change_sum / n_trials as f64,
    })
}

/// Everything the evaluation tables need, computed on `mask` with
/// deterministic inference.
pub fn evaluate_model<T: Scalar>(
    model: &GrafairModel<T>,
    g: &AttributedGraph<T>,
    adj: &Arc<NormalizedAdjacency<T>>,
    mask: &[bool],
    noise_std: f64,
    rs_trials: usize,
    seed: u64,
) -> Result<MetricsReport, MetricError> {
    let pred = model.predict(g, adj)?;
    let f1 = f1_score(&pred, g.labels(), mask)?;
    let delta_sp = statistical_parity(&pred, g.sensitive(), mask)?;
    let delta_eo = equal_opportunity(&pred, g.labels(), g.sensitive(), mask)?;
    let cf = counterfactual_fairness(model, g, adj, mask)?;
    let rs = robustness_score(model, g, adj, mask, noise_std, rs_trials, seed)?;
    Ok(MetricsReport {
        f1,
        delta_sp,
        delta_eo,
        delta_cf: cf.delta,
        delta_rs: rs.delta,
        cf_flip_rate: cf.flip_rate,
        rs_label_change: rs.label_change,
        group_counts: GroupCounts::tally(&pred, g.labels(), g.sensitive(), mask),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [bool; 4] = [true, true, true, true];

    #[test]
    fn f1_perfect_is_hundred() {
        let pred = [1u8, 0, 1, 0];
        assert_eq!(f1_score(&pred, &pred, &ALL).unwrap(), 100.0);
    }

    #[test]
    fn f1_all_negative_predictions_is_zero() {
        assert_eq!(f1_score(&[0, 0, 0, 0], &[1, 0, 1, 0], &ALL).unwrap(), 0.0);
    }

    #[test]
    fn f1_counting_example() {
        // TP=2, FP=1, FN=1 -> P=R=2/3 -> F1 = 66.67
        let pred = [1u8, 1, 1, 0, 0];
        let labels = [1u8, 1, 0, 1, 0];
        let mask = [true; 5];
        let f1 = f1_score(&pred, &labels, &mask).unwrap();
        assert!((f1 - 100.0 * (2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn f1_empty_mask_is_error() {
        assert!(matches!(
            f1_score(&[1], &[1], &[false]),
            Err(MetricError::EmptyMask)
        ));
    }

    #[test]
    fn sp_extreme_and_constant() {
        let s = [1u8, 1, 0, 0];
        assert_eq!(statistical_parity(&[1, 1, 0, 0], &s, &ALL).unwrap(), 100.0);
        assert_eq!(statistical_parity(&[1, 1, 1, 1], &s, &ALL).unwrap(), 0.0);
        assert_eq!(statistical_parity(&[1, 0, 1, 0], &s, &ALL).unwrap(), 0.0);
    }

    #[test]
    fn sp_degenerate_group_is_error() {
        let err = statistical_parity(&[1, 0], &[1, 1], &[true, true]).unwrap_err();
        assert!(matches!(err, MetricError::DegenerateGroup { group: 0, .. }));
    }

    #[test]
    fn eo_tpr_gap() {
        // group 1: positives at 0,1,2,3 with preds 1,1,1,0 -> TPR 0.75
        // group 0: positives at 4,5 with preds 1,0 -> TPR 0.5
        let pred = [1u8, 1, 1, 0, 1, 0];
        let labels = [1u8; 6];
        let sens = [1u8, 1, 1, 1, 0, 0];
        let mask = [true; 6];
        let eo = equal_opportunity(&pred, &labels, &sens, &mask).unwrap();
        assert!((eo - 25.0).abs() < 1e-12);
    }

    #[test]
    fn eo_all_positive_predictions_is_zero() {
        let labels = [1u8, 1, 0, 1];
        let sens = [0u8, 1, 0, 1];
        assert_eq!(
            equal_opportunity(&[1, 1, 1, 1], &labels, &sens, &ALL).unwrap(),
            0.0
        );
    }

    #[test]
    fn eo_requires_positives_in_both_groups() {
        let err = equal_opportunity(&[1, 1], &[1, 0], &[1, 0], &[true, true]).unwrap_err();
        assert!(matches!(err, MetricError::DegenerateGroup { .. }));
    }

    #[test]
    fn group_counts_sum_to_mask_size() {
        let pred = [1u8, 0, 1, 0, 1];
        let labels = [1u8, 1, 0, 0, 1];
        let sens = [0u8, 1, 0, 1, 1];
        let mask = [true, true, false, true, true];
        let gc = GroupCounts::tally(&pred, &labels, &sens, &mask);
        assert_eq!(gc.total(), 4);
        assert_eq!(gc.0[1][1][0], 1);
    }
}
