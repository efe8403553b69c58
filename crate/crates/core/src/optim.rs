//! Adam with bias correction, the constants everyone uses.

use crate::scalar::{cast, Scalar};
use crate::Mat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("parameter {index}: gradient shape {got:?} does not match state {expected:?}")]
    ShapeMismatch {
        index: usize,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("expected {expected} gradients, got {got}")]
    CountMismatch { got: usize, expected: usize },
}

pub struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    step_count: u32,
    m: Vec<Mat<T>>,
    v: Vec<Mat<T>>,
}

impl<T: Scalar> Adam<T> {
    /// beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    pub fn new(lr: f64, shapes: &[(usize, usize)]) -> Self {
        Adam {
            lr: cast::<T>(lr),
            beta1: cast::<T>(0.9),
            beta2: cast::<T>(0.999),
            eps: cast::<T>(1e-8),
            step_count: 0,
            m: shapes.iter().map(|&s| Mat::zeros(s)).collect(),
            v: shapes.iter().map(|&s| Mat::zeros(s)).collect(),
        }
    }

    pub fn step(&mut self, params: &mut [&mut Mat<T>], grads: &[Mat<T>]) -> Result<(), OptimError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(OptimError::CountMismatch {
                got: grads.len(),
                expected: self.m.len(),
            });
        }
        for (i, g) in grads.iter().enumerate() {
            if g.dim() != self.m[i].dim() {
                return Err(OptimError::ShapeMismatch {
                    index: i,
                    got: g.dim(),
                    expected: self.m[i].dim(),
                });
            }
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = T::one() - self.beta1.powi(t);
        let bc2 = T::one() - self.beta2.powi(t);
        let one = T::one();
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            ndarray::Zip::from(&mut **p)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = self.beta1 * *m + (one - self.beta1) * g;
                    *v = self.beta2 * *v + (one - self.beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p = *p - self.lr * m_hat / (v_hat.sqrt() + self.eps);
                });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = array![[1.0, -2.0]];
        let before = p.clone();
        let mut adam = Adam::new(0.1, &[(1, 2)]);
        adam.step(&mut [&mut p], &[Mat::zeros((1, 2))]).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        // with bias correction, step 1 moves each coordinate by
        // lr * g / (|g| + eps) which is lr * sign(g) up to eps
        let mut p = array![[0.0f64, 0.0]];
        let g = array![[0.3, -7.0]];
        let mut adam = Adam::new(0.01, &[(1, 2)]);
        adam.step(&mut [&mut p], &[g]).unwrap();
        assert!((p[(0, 0)] + 0.01).abs() < 1e-6);
        assert!((p[(0, 1)] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn trajectories_are_deterministic() {
        let run = || {
            let mut p = array![[1.0], [2.0]];
            let mut adam = Adam::new(0.05, &[(2, 1)]);
            for k in 0..20 {
                let g = p.mapv(|x: f64| x * 0.5 + k as f64 * 0.01);
                adam.step(&mut [&mut p], &[g]).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut p = array![[1.0]];
        let mut adam = Adam::new(0.1, &[(1, 1)]);
        let err = adam
            .step(&mut [&mut p], &[Mat::zeros((2, 2))])
            .unwrap_err();
        assert!(matches!(err, OptimError::ShapeMismatch { .. }));
    }
}
