//! Fair node classification on attributed graphs.
//!
//! The library trains a variational graph encoder whose objective trades
//! task information against compression and sensitive-attribute leakage,
//! and evaluates the result with utility, group-fairness,
//! counterfactual-fairness and robustness metrics. Everything numeric is
//! generic over the scalar type; the aliases below pin the shipped
//! double-precision configuration.

pub mod autodiff;
pub mod bounds;
pub mod config;
pub mod data;
pub mod experiment;
pub mod graph;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod scalar;
pub mod selfcheck;
pub mod train;

/// Dense real matrix.
pub type Mat<T> = ndarray::Array2<T>;

pub use scalar::Scalar;

/// Double-precision aliases used by the harness and the CLI.
pub type Graph64 = graph::AttributedGraph<f64>;
pub type Adjacency64 = graph::NormalizedAdjacency<f64>;
pub type Tape64 = autodiff::Tape<f64>;
pub type Model64 = model::GrafairModel<f64>;
pub type Posterior64 = model::EncodedPosterior<f64>;
