//! Immutable attributed-graph data model and its linear-algebra views.
//!
//! A graph is built once and never mutated; counterfactual and perturbed
//! views are new graphs that share the edge storage through an `Arc`.

use crate::scalar::{cast, Scalar};
use crate::Mat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("{what} index {index} out of range for {n} nodes")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        n: usize,
    },
    #[error("{column} value {value} at node {node} is not in {{0,1}}")]
    NonBinaryColumn {
        column: &'static str,
        value: f64,
        node: usize,
    },
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("negative noise standard deviation {0}")]
    NegativeStd(f64),
    #[error("split fractions {train}+{val} must leave room for a test set")]
    InvalidSplit { train: f64, val: f64 },
}

/// Undirected edge set in compressed sparse row form, no self-loops.
/// Both directions of every edge are stored; column indices per row are
/// sorted, so iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrEdges {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrEdges {
    /// Builds the symmetric edge set from an arbitrary pair list:
    /// duplicates and reversed pairs collapse, self-loops are dropped.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            for (what, idx) in [("edge source", a), ("edge target", b)] {
                if idx >= n {
                    return Err(GraphError::IndexOutOfRange {
                        what,
                        index: idx,
                        n,
                    });
                }
            }
            if a == b {
                continue;
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut degree = vec![0usize; n];
        for &(a, b) in &canon {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree[i];
        }
        let mut cursor = row_ptr.clone();
        let mut col_idx = vec![0usize; row_ptr[n]];
        for &(a, b) in &canon {
            col_idx[cursor[a]] = b;
            cursor[a] += 1;
            col_idx[cursor[b]] = a;
            cursor[b] += 1;
        }
        for i in 0..n {
            col_idx[row_ptr[i]..row_ptr[i + 1]].sort_unstable();
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.col_idx.len() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Sorted (min, max) pairs, one per undirected edge.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// How train/val/test masks are assigned at construction time.
#[derive(Debug, Clone)]
pub enum SplitSpec {
    /// Seeded stratified split on labels; the remainder after train and
    /// val goes to test.
    Stratified { train: f64, val: f64, seed: u64 },
    /// Explicit masks, e.g. read from a mask file.
    Explicit {
        train: Vec<bool>,
        val: Vec<bool>,
        test: Vec<bool>,
    },
}

impl SplitSpec {
    /// The default 50/25/25 stratified split.
    pub fn default_stratified(seed: u64) -> Self {
        SplitSpec::Stratified {
            train: 0.5,
            val: 0.25,
            seed,
        }
    }
}

/// Immutable attributed graph: dense node features, a symmetric sparse
/// edge set, binary sensitive attributes and labels, and split masks.
#[derive(Debug, Clone)]
pub struct AttributedGraph<T> {
    features: Mat<T>,
    edges: Arc<CsrEdges>,
    sensitive: Vec<u8>,
    labels: Vec<u8>,
    sensitive_col: usize,
    train_mask: Vec<bool>,
    val_mask: Vec<bool>,
    test_mask: Vec<bool>,
}

impl<T: Scalar> AttributedGraph<T> {
    pub fn node_count(&self) -> usize {
        self.features.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Mat<T> {
        &self.features
    }

    pub fn edges(&self) -> &CsrEdges {
        &self.edges
    }

    pub fn shared_edges(&self) -> Arc<CsrEdges> {
        Arc::clone(&self.edges)
    }

    pub fn sensitive(&self) -> &[u8] {
        &self.sensitive
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn sensitive_col(&self) -> usize {
        self.sensitive_col
    }

    pub fn train_mask(&self) -> &[bool] {
        &self.train_mask
    }

    pub fn val_mask(&self) -> &[bool] {
        &self.val_mask
    }

    pub fn test_mask(&self) -> &[bool] {
        &self.test_mask
    }

    /// One-hot encoding of the sensitive attribute, n x 2.
    pub fn one_hot_sensitive(&self) -> Mat<T> {
        let n = self.node_count();
        let mut m = Mat::<T>::zeros((n, 2));
        for (i, &s) in self.sensitive.iter().enumerate() {
            m[(i, s as usize)] = T::one();
        }
        m
    }

    /// Counterfactual view with the sensitive attribute forced to
    /// `target` for every node; edge storage is shared with `self`.
    pub fn flip_sensitive(&self, target: u8) -> AttributedGraph<T> {
        let mut features = self.features.clone();
        let t = cast::<T>(target as f64);
        for i in 0..self.node_count() {
            features[(i, self.sensitive_col)] = t;
        }
        AttributedGraph {
            features,
            edges: Arc::clone(&self.edges),
            sensitive: vec![target; self.node_count()],
            labels: self.labels.clone(),
            sensitive_col: self.sensitive_col,
            train_mask: self.train_mask.clone(),
            val_mask: self.val_mask.clone(),
            test_mask: self.test_mask.clone(),
        }
    }

    /// View with i.i.d. Gaussian noise of standard deviation `noise_std`
    /// added to every non-sensitive feature of the test-mask nodes.
    /// Train/val rows are untouched; deterministic for a fixed seed.
    pub fn perturb_features(
        &self,
        noise_std: f64,
        rng_seed: u64,
    ) -> Result<AttributedGraph<T>, GraphError> {
        if noise_std < 0.0 {
            return Err(GraphError::NegativeStd(noise_std));
        }
        let mut features = self.features.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for i in 0..self.node_count() {
            if !self.test_mask[i] {
                continue;
            }
            for j in 0..self.feature_dim() {
                if j == self.sensitive_col {
                    continue;
                }
                let noise: f64 = rng.sample(StandardNormal);
                features[(i, j)] = features[(i, j)] + cast::<T>(noise * noise_std);
            }
        }
        Ok(AttributedGraph {
            features,
            edges: Arc::clone(&self.edges),
            sensitive: self.sensitive.clone(),
            labels: self.labels.clone(),
            sensitive_col: self.sensitive_col,
            train_mask: self.train_mask.clone(),
            val_mask: self.val_mask.clone(),
            test_mask: self.test_mask.clone(),
        })
    }
}

fn binary_value(v: f64, column: &'static str, node: usize) -> Result<u8, GraphError> {
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(GraphError::NonBinaryColumn {
            column,
            value: v,
            node,
        })
    }
}

fn stratified_masks(
    labels: &[u8],
    train: f64,
    val: f64,
    seed: u64,
) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>), GraphError> {
    if !(train > 0.0 && val >= 0.0 && train + val < 1.0) {
        return Err(GraphError::InvalidSplit { train, val });
    }
    let n = labels.len();
    let mut train_mask = vec![false; n];
    let mut val_mask = vec![false; n];
    let mut test_mask = vec![false; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in [0u8, 1u8] {
        let mut ids: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        ids.shuffle(&mut rng);
        let k = ids.len();
        let n_train = (train * k as f64).round() as usize;
        let n_val = (val * k as f64).round() as usize;
        for (rank, &i) in ids.iter().enumerate() {
            if rank < n_train {
                train_mask[i] = true;
            } else if rank < n_train + n_val {
                val_mask[i] = true;
            } else {
                test_mask[i] = true;
            }
        }
    }
    Ok((train_mask, val_mask, test_mask))
}

/// Validates inputs and assembles an [`AttributedGraph`].
///
/// Duplicate and reversed edge pairs are collapsed, self-loops dropped.
/// The sensitive attribute is read out of `features[:, sensitive_col]`
/// and must be binary, as must `labels`.
pub fn build_graph<T: Scalar>(
    features: Mat<T>,
    edge_list: &[(usize, usize)],
    sensitive_col: usize,
    labels: &[u8],
    split: &SplitSpec,
) -> Result<AttributedGraph<T>, GraphError> {
    let n = features.nrows();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if labels.len() != n {
        return Err(GraphError::LengthMismatch {
            what: "labels",
            got: labels.len(),
            expected: n,
        });
    }
    if sensitive_col >= features.ncols() {
        return Err(GraphError::IndexOutOfRange {
            what: "sensitive column",
            index: sensitive_col,
            n: features.ncols(),
        });
    }
    for (i, &y) in labels.iter().enumerate() {
        binary_value(y as f64, "label", i)?;
    }
    let mut sensitive = Vec::with_capacity(n);
    for i in 0..n {
        let v = features[(i, sensitive_col)]
            .to_f64()
            .expect("feature not representable as f64");
        sensitive.push(binary_value(v, "sensitive", i)?);
    }
    let edges = Arc::new(CsrEdges::from_pairs(n, edge_list)?);

    let (train_mask, val_mask, test_mask) = match split {
        SplitSpec::Stratified { train, val, seed } => {
            stratified_masks(labels, *train, *val, *seed)?
        }
        SplitSpec::Explicit { train, val, test } => {
            for (what, m) in [("train mask", train), ("val mask", val), ("test mask", test)] {
                if m.len() != n {
                    return Err(GraphError::LengthMismatch {
                        what,
                        got: m.len(),
                        expected: n,
                    });
                }
            }
            (train.clone(), val.clone(), test.clone())
        }
    };
    for i in 0..n {
        let overlap = (train_mask[i] as u8) + (val_mask[i] as u8) + (test_mask[i] as u8);
        if overlap > 1 {
            return Err(GraphError::LengthMismatch {
                what: "masks must be pairwise disjoint; node in several",
                got: overlap as usize,
                expected: 1,
            });
        }
    }

    Ok(AttributedGraph {
        features,
        edges,
        sensitive,
        labels: labels.to_vec(),
        sensitive_col,
        train_mask,
        val_mask,
        test_mask,
    })
}

/// Aggregation matrix flavor used for message passing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AggregationKind {
    /// D^{-1/2} (A+I) D^{-1/2} with D the closed-neighborhood degree.
    SymmetricGcn,
    /// (A+I) with every row scaled to sum to one.
    RowMean,
    /// (A+I) with unit weights.
    Sum,
}

/// Sparse aggregation matrix in compressed row form. Entries per row are
/// ordered by column index.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    kind: AggregationKind,
}

impl<T: Scalar> NormalizedAdjacency<T> {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> AggregationKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as (column, value) pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| (j, v))
    }

    /// Dense product `self * x`, sequential with a fixed reduction order.
    pub fn matmul_dense(&self, x: &Mat<T>) -> Mat<T> {
        let cols = x.ncols();
        let mut out = Mat::<T>::zeros((self.n, cols));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                for c in 0..cols {
                    out[(i, c)] += v * x[(j, c)];
                }
            }
        }
        out
    }

    /// Dense product `self^T * x` (scatter form).
    pub fn transpose_matmul_dense(&self, x: &Mat<T>) -> Mat<T> {
        let cols = x.ncols();
        let mut out = Mat::<T>::zeros((self.n, cols));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                for c in 0..cols {
                    out[(j, c)] += v * x[(i, c)];
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Mat<T> {
        let mut m = Mat::<T>::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Builds the aggregation matrix for `g` in the requested flavor.
/// Self-loops enter here, not in the stored edge set.
pub fn normalize_adjacency<T: Scalar>(
    g: &AttributedGraph<T>,
    kind: AggregationKind,
) -> NormalizedAdjacency<T> {
    let edges = g.edges();
    let n = edges.node_count();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);

    let closed_degree = |i: usize| (edges.degree(i) + 1) as f64;

    for i in 0..n {
        // closed neighborhood, column-sorted: neighbors are sorted and i
        // is spliced into position
        let mut cols: Vec<usize> = Vec::with_capacity(edges.degree(i) + 1);
        let mut inserted = false;
        for &j in edges.neighbors(i) {
            if !inserted && i < j {
                cols.push(i);
                inserted = true;
            }
            cols.push(j);
        }
        if !inserted {
            cols.push(i);
        }
        for &j in &cols {
            let v = match kind {
                AggregationKind::SymmetricGcn => {
                    1.0 / (closed_degree(i).sqrt() * closed_degree(j).sqrt())
                }
                AggregationKind::RowMean => 1.0 / closed_degree(i),
                AggregationKind::Sum => 1.0,
            };
            col_idx.push(j);
            values.push(cast::<T>(v));
        }
        row_ptr.push(col_idx.len());
    }
    NormalizedAdjacency {
        n,
        row_ptr,
        col_idx,
        values,
        kind,
    }
}

/// Sum-aggregation matrix over self plus at most `k` neighbors drawn
/// uniformly without replacement per node.
pub fn sample_neighbor_adjacency<T: Scalar, R: Rng>(
    g: &AttributedGraph<T>,
    k: usize,
    rng: &mut R,
) -> NormalizedAdjacency<T> {
    let edges = g.edges();
    let n = edges.node_count();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        let neigh = edges.neighbors(i);
        let mut cols: Vec<usize> = if neigh.len() <= k {
            neigh.to_vec()
        } else {
            let mut pool = neigh.to_vec();
            pool.partial_shuffle(rng, k);
            pool.truncate(k);
            pool
        };
        cols.push(i);
        cols.sort_unstable();
        for &j in &cols {
            col_idx.push(j);
            values.push(T::one());
        }
        row_ptr.push(col_idx.len());
    }
    NormalizedAdjacency {
        n,
        row_ptr,
        col_idx,
        values,
        kind: AggregationKind::Sum,
    }
}
