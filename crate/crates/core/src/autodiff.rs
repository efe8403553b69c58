//! Reverse-mode differentiation over dense matrices plus sparse-times-
//! dense products.
//!
//! A [`Tape`] records one forward pass as an append-only node list, so
//! every node's inputs precede it and the provenance graph is acyclic by
//! construction. [`Tape::backward`] walks the list in reverse. Gradients
//! accumulate across repeated backward calls; use [`Tape::zero_grads`]
//! to reset.
//!
//! Randomness (e.g. reparameterization noise) enters as a constant leaf,
//! never as an op, so backward never differentiates through sampling.

use crate::graph::NormalizedAdjacency;
use crate::scalar::{cast, Scalar};
use crate::Mat;
use ndarray::{s, Axis};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("{op}: shape mismatch {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("backward root must be 1x1, got {0:?}")]
    NonScalarRoot((usize, usize)),
    #[error("row_gather index {index} out of range for {rows} rows")]
    GatherOutOfRange { index: usize, rows: usize },
}

/// Handle to a value on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueId(usize);

enum Op<T> {
    Leaf,
    Matmul(ValueId, ValueId),
    SparseMatmul(Arc<NormalizedAdjacency<T>>, ValueId),
    Add(ValueId, ValueId),
    AddRow(ValueId, ValueId),
    AddScalar(ValueId),
    ConcatCols(ValueId, ValueId),
    SliceCols(ValueId, usize, usize),
    Softplus(ValueId),
    Exp(ValueId),
    Log(ValueId),
    Square(ValueId),
    ClampMin(ValueId, T),
    ElementwiseMul(ValueId, ValueId),
    ScalarMul(T, ValueId),
    RowGather(ValueId, Arc<Vec<usize>>),
    MeanAll(ValueId),
    SumAll(ValueId),
    SoftmaxRows(ValueId),
}

struct Node<T> {
    data: Mat<T>,
    grad: Option<Mat<T>>,
    op: Op<T>,
    requires_grad: bool,
}

/// Recorded forward pass.
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

fn stable_softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + x.abs().neg().exp().ln_1p()
}

fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn data(&self, id: ValueId) -> &Mat<T> {
        &self.nodes[id.0].data
    }

    pub fn shape(&self, id: ValueId) -> (usize, usize) {
        self.nodes[id.0].data.dim()
    }

    /// Gradient of the last backward root w.r.t. `id`, if any was ever
    /// propagated there.
    pub fn grad(&self, id: ValueId) -> Option<&Mat<T>> {
        self.nodes[id.0].grad.as_ref()
    }

    /// Like [`Tape::grad`] but materializes zeros for values the root
    /// does not depend on.
    pub fn grad_or_zeros(&self, id: ValueId) -> Mat<T> {
        match self.grad(id) {
            Some(g) => g.clone(),
            None => Mat::zeros(self.shape(id)),
        }
    }

    /// Value of a 1x1 node.
    pub fn scalar_value(&self, id: ValueId) -> T {
        let d = self.data(id);
        assert_eq!(d.dim(), (1, 1), "scalar_value on non-scalar node");
        d[(0, 0)]
    }

    pub fn zero_grads(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    fn push(&mut self, data: Mat<T>, op: Op<T>, requires_grad: bool) -> ValueId {
        self.nodes.push(Node {
            data,
            grad: None,
            op,
            requires_grad,
        });
        ValueId(self.nodes.len() - 1)
    }

    fn requires(&self, id: ValueId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// Introduces a leaf value. Gradients flow into it iff `requires_grad`.
    pub fn leaf(&mut self, data: Mat<T>, requires_grad: bool) -> ValueId {
        self.push(data, Op::Leaf, requires_grad)
    }

    /// Constant leaf.
    pub fn constant(&mut self, data: Mat<T>) -> ValueId {
        self.leaf(data, false)
    }

    fn check_same_shape(
        &self,
        op: &'static str,
        a: ValueId,
        b: ValueId,
    ) -> Result<(), DiffError> {
        let (la, lb) = (self.shape(a), self.shape(b));
        if la != lb {
            return Err(DiffError::ShapeMismatch {
                op,
                lhs: la,
                rhs: lb,
            });
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, DiffError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.0 {
            return Err(DiffError::ShapeMismatch {
                op: "matmul",
                lhs: sa,
                rhs: sb,
            });
        }
        let data = self.data(a).dot(self.data(b));
        let req = self.requires(a) || self.requires(b);
        Ok(self.push(data, Op::Matmul(a, b), req))
    }

    /// Sparse aggregation product `adj * x`.
    pub fn sparse_matmul(
        &mut self,
        adj: &Arc<NormalizedAdjacency<T>>,
        x: ValueId,
    ) -> Result<ValueId, DiffError> {
        let sx = self.shape(x);
        if adj.node_count() != sx.0 {
            return Err(DiffError::ShapeMismatch {
                op: "sparse_matmul",
                lhs: (adj.node_count(), adj.node_count()),
                rhs: sx,
            });
        }
        let data = adj.matmul_dense(self.data(x));
        let req = self.requires(x);
        Ok(self.push(data, Op::SparseMatmul(Arc::clone(adj), x), req))
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, DiffError> {
        self.check_same_shape("add", a, b)?;
        let data = self.data(a) + self.data(b);
        let req = self.requires(a) || self.requires(b);
        Ok(self.push(data, Op::Add(a, b), req))
    }

    /// Adds a 1 x k row vector to every row of an m x k matrix.
    pub fn add_row(&mut self, a: ValueId, row: ValueId) -> Result<ValueId, DiffError> {
        let (sa, sr) = (self.shape(a), self.shape(row));
        if sr.0 != 1 || sr.1 != sa.1 {
            return Err(DiffError::ShapeMismatch {
                op: "add_row",
                lhs: sa,
                rhs: sr,
            });
        }
        let data = self.data(a) + self.data(row);
        let req = self.requires(a) || self.requires(row);
        Ok(self.push(data, Op::AddRow(a, row), req))
    }

    pub fn add_scalar(&mut self, x: ValueId, c: T) -> ValueId {
        let data = self.data(x).mapv(|v| v + c);
        let req = self.requires(x);
        self.push(data, Op::AddScalar(x), req)
    }

    pub fn concat_cols(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, DiffError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.0 != sb.0 {
            return Err(DiffError::ShapeMismatch {
                op: "concat_cols",
                lhs: sa,
                rhs: sb,
            });
        }
        let data = ndarray::concatenate(Axis(1), &[self.data(a).view(), self.data(b).view()])
            .expect("concat shapes checked");
        let req = self.requires(a) || self.requires(b);
        Ok(self.push(data, Op::ConcatCols(a, b), req))
    }

    /// Columns `lo..hi` of `x`.
    pub fn slice_cols(&mut self, x: ValueId, lo: usize, hi: usize) -> Result<ValueId, DiffError> {
        let sx = self.shape(x);
        if lo >= hi || hi > sx.1 {
            return Err(DiffError::ShapeMismatch {
                op: "slice_cols",
                lhs: sx,
                rhs: (lo, hi),
            });
        }
        let data = self.data(x).slice(s![.., lo..hi]).to_owned();
        let req = self.requires(x);
        Ok(self.push(data, Op::SliceCols(x, lo, hi), req))
    }

    pub fn softplus(&mut self, x: ValueId) -> ValueId {
        let data = self.data(x).mapv(stable_softplus);
        let req = self.requires(x);
        self.push(data, Op::Softplus(x), req)
    }

    pub fn exp(&mut self, x: ValueId) -> ValueId {
        let data = self.data(x).mapv(T::exp);
        let req = self.requires(x);
        self.push(data, Op::Exp(x), req)
    }

    pub fn log(&mut self, x: ValueId) -> ValueId {
        let data = self.data(x).mapv(T::ln);
        let req = self.requires(x);
        self.push(data, Op::Log(x), req)
    }

    pub fn square(&mut self, x: ValueId) -> ValueId {
        let data = self.data(x).mapv(|v| v * v);
        let req = self.requires(x);
        self.push(data, Op::Square(x), req)
    }

    /// Elementwise `max(x, c)`.
    pub fn clamp_min(&mut self, x: ValueId, c: T) -> ValueId {
        let data = self.data(x).mapv(|v| v.max(c));
        let req = self.requires(x);
        self.push(data, Op::ClampMin(x, c), req)
    }

    pub fn elementwise_mul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, DiffError> {
        self.check_same_shape("elementwise_mul", a, b)?;
        let data = self.data(a) * self.data(b);
        let req = self.requires(a) || self.requires(b);
        Ok(self.push(data, Op::ElementwiseMul(a, b), req))
    }

    pub fn scalar_mul(&mut self, c: T, x: ValueId) -> ValueId {
        let data = self.data(x).mapv(|v| v * c);
        let req = self.requires(x);
        self.push(data, Op::ScalarMul(c, x), req)
    }

    /// Selects rows of `x` in the given order (repeats allowed).
    pub fn row_gather(&mut self, x: ValueId, indices: Vec<usize>) -> Result<ValueId, DiffError> {
        let rows = self.shape(x).0;
        for &i in &indices {
            if i >= rows {
                return Err(DiffError::GatherOutOfRange { index: i, rows });
            }
        }
        let data = self.data(x).select(Axis(0), &indices);
        let req = self.requires(x);
        Ok(self.push(data, Op::RowGather(x, Arc::new(indices)), req))
    }

    pub fn mean_all(&mut self, x: ValueId) -> ValueId {
        let d = self.data(x);
        let count = cast::<T>((d.len()) as f64);
        let mean = d.iter().copied().sum::<T>() / count;
        let req = self.requires(x);
        self.push(Mat::from_elem((1, 1), mean), Op::MeanAll(x), req)
    }

    pub fn sum_all(&mut self, x: ValueId) -> ValueId {
        let sum = self.data(x).iter().copied().sum::<T>();
        let req = self.requires(x);
        self.push(Mat::from_elem((1, 1), sum), Op::SumAll(x), req)
    }

    /// Row-wise softmax (shift-stabilized).
    pub fn softmax_rows(&mut self, x: ValueId) -> ValueId {
        let d = self.data(x);
        let mut out = d.clone();
        for mut row in out.rows_mut() {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            row.mapv_inplace(|v| (v - max).exp());
            let total = row.iter().copied().sum::<T>();
            row.mapv_inplace(|v| v / total);
        }
        let req = self.requires(x);
        self.push(out, Op::SoftmaxRows(x), req)
    }

    fn accumulate(slot: &mut Option<Mat<T>>, shape: (usize, usize), delta: &Mat<T>) {
        match slot {
            Some(g) => *g += delta,
            None => {
                let mut g = Mat::zeros(shape);
                g += delta;
                *slot = Some(g);
            }
        }
    }

    /// Propagates `d(root)/d(value)` into the grad field of every value
    /// with `requires_grad` that `root` depends on. `root` must be 1x1.
    /// Repeated calls accumulate.
    pub fn backward(&mut self, root: ValueId) -> Result<(), DiffError> {
        if self.shape(root) != (1, 1) {
            return Err(DiffError::NonScalarRoot(self.shape(root)));
        }
        // the traversal works on a scratch buffer so that the persistent
        // grad fields receive exactly one d(root)/d(node) per call
        let mut scratch: Vec<Option<Mat<T>>> = Vec::with_capacity(root.0 + 1);
        scratch.resize_with(root.0 + 1, || None);
        scratch[root.0] = Some(Mat::from_elem((1, 1), T::one()));
        for i in (0..=root.0).rev() {
            if scratch[i].is_none() || !self.nodes[i].requires_grad {
                continue;
            }
            let inputs = &self.nodes;
            let node = &self.nodes[i];
            let g = scratch[i].as_ref().expect("checked above").clone();
            // deltas are computed first (reading inputs), then applied
            let mut deltas: Vec<(ValueId, Mat<T>)> = Vec::with_capacity(2);
            let mut send = |target: ValueId, delta: Mat<T>| deltas.push((target, delta));
            match &node.op {
                Op::Leaf => {}
                Op::Matmul(a, b) => {
                    let (da, db) = (&inputs[a.0].data, &inputs[b.0].data);
                    send(*a, g.dot(&db.t()));
                    send(*b, da.t().dot(&g));
                }
                Op::SparseMatmul(adj, x) => {
                    send(*x, adj.transpose_matmul_dense(&g));
                }
                Op::Add(a, b) => {
                    send(*a, g.clone());
                    send(*b, g.clone());
                }
                Op::AddRow(a, row) => {
                    send(*a, g.clone());
                    send(*row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
                Op::AddScalar(x) => send(*x, g.clone()),
                Op::ConcatCols(a, b) => {
                    let split = inputs[a.0].data.ncols();
                    send(*a, g.slice(s![.., ..split]).to_owned());
                    send(*b, g.slice(s![.., split..]).to_owned());
                }
                Op::SliceCols(x, lo, hi) => {
                    let mut gx = Mat::zeros(inputs[x.0].data.dim());
                    gx.slice_mut(s![.., *lo..*hi]).assign(&g);
                    send(*x, gx);
                }
                Op::Softplus(x) => {
                    let gx = ndarray::Zip::from(&g)
                        .and(&inputs[x.0].data)
                        .map_collect(|&gv, &xv| gv * sigmoid(xv));
                    send(*x, gx);
                }
                Op::Exp(x) => {
                    send(*x, &g * &node.data);
                }
                Op::Log(x) => {
                    send(*x, &g / &inputs[x.0].data);
                }
                Op::Square(x) => {
                    let two = cast::<T>(2.0);
                    let gx = ndarray::Zip::from(&g)
                        .and(&inputs[x.0].data)
                        .map_collect(|&gv, &xv| two * xv * gv);
                    send(*x, gx);
                }
                Op::ClampMin(x, c) => {
                    let gx = ndarray::Zip::from(&g)
                        .and(&inputs[x.0].data)
                        .map_collect(|&gv, &xv| if xv > *c { gv } else { T::zero() });
                    send(*x, gx);
                }
                Op::ElementwiseMul(a, b) => {
                    send(*a, &g * &inputs[b.0].data);
                    send(*b, &g * &inputs[a.0].data);
                }
                Op::ScalarMul(c, x) => {
                    send(*x, g.mapv(|v| v * *c));
                }
                Op::RowGather(x, idx) => {
                    let mut gx = Mat::zeros(inputs[x.0].data.dim());
                    for (r, &src) in idx.iter().enumerate() {
                        for c in 0..gx.ncols() {
                            gx[(src, c)] += g[(r, c)];
                        }
                    }
                    send(*x, gx);
                }
                Op::MeanAll(x) => {
                    let shape = inputs[x.0].data.dim();
                    let scale = g[(0, 0)] / cast::<T>((shape.0 * shape.1) as f64);
                    send(*x, Mat::from_elem(shape, scale));
                }
                Op::SumAll(x) => {
                    let shape = inputs[x.0].data.dim();
                    send(*x, Mat::from_elem(shape, g[(0, 0)]));
                }
                Op::SoftmaxRows(x) => {
                    let y = &node.data;
                    let mut gx = Mat::zeros(y.dim());
                    for r in 0..y.nrows() {
                        let mut dot = T::zero();
                        for c in 0..y.ncols() {
                            dot += g[(r, c)] * y[(r, c)];
                        }
                        for c in 0..y.ncols() {
                            gx[(r, c)] = y[(r, c)] * (g[(r, c)] - dot);
                        }
                    }
                    send(*x, gx);
                }
            }
            drop(send);
            for (target, delta) in deltas {
                if self.nodes[target.0].requires_grad {
                    let shape = self.nodes[target.0].data.dim();
                    Self::accumulate(&mut scratch[target.0], shape, &delta);
                }
            }
        }
        for (i, slot) in scratch.into_iter().enumerate() {
            if let Some(s) = slot {
                if self.nodes[i].requires_grad {
                    let shape = self.nodes[i].data.dim();
                    Self::accumulate(&mut self.nodes[i].grad, shape, &s);
                }
            }
        }
        Ok(())
    }
}

/// Maximum relative error between analytic gradients and central finite
/// differences of a scalar-valued tape program.
///
/// `build` must be deterministic: it is re-run with perturbed copies of
/// `params` as constant leaves, so any randomness has to be baked into
/// captured constants. The error denominator is
/// `max(|analytic|, |numeric|, 1e-8)`.
pub fn finite_diff_check<T, F>(build: F, params: &[Mat<T>], eps: T) -> Result<T, DiffError>
where
    T: Scalar,
    F: Fn(&mut Tape<T>, &[ValueId]) -> Result<ValueId, DiffError>,
{
    assert!(eps > T::zero(), "finite_diff_check requires eps > 0");
    // analytic pass
    let mut tape = Tape::new();
    let ids: Vec<ValueId> = params.iter().map(|p| tape.leaf(p.clone(), true)).collect();
    let root = build(&mut tape, &ids)?;
    tape.backward(root)?;
    let analytic: Vec<Mat<T>> = ids.iter().map(|&id| tape.grad_or_zeros(id)).collect();

    let eval = |mats: &[Mat<T>]| -> Result<T, DiffError> {
        let mut t = Tape::new();
        let ids: Vec<ValueId> = mats.iter().map(|p| t.leaf(p.clone(), false)).collect();
        let root = build(&mut t, &ids)?;
        Ok(t.scalar_value(root))
    };

    let floor = cast::<T>(1e-8);
    let two = cast::<T>(2.0);
    let mut worst = T::zero();
    let mut work: Vec<Mat<T>> = params.to_vec();
    for (pi, p) in params.iter().enumerate() {
        for idx in 0..p.len() {
            let (r, c) = (idx / p.ncols(), idx % p.ncols());
            let orig = work[pi][(r, c)];
            work[pi][(r, c)] = orig + eps;
            let plus = eval(&work)?;
            work[pi][(r, c)] = orig - eps;
            let minus = eval(&work)?;
            work[pi][(r, c)] = orig;
            let numeric = (plus - minus) / (two * eps);
            let a = analytic[pi][(r, c)];
            let denom = a.abs().max(numeric.abs()).max(floor);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}
