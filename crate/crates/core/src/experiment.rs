//! Multi-seed experiments: aggregation with population standard
//! deviation, the beta sweep, the variant ablation matrix, and report
//! serialization to a config-hash-named directory.

use crate::config::TrainConfig;
use crate::data::{load_dataset, DataError, LoadedDataset};
use crate::graph::AttributedGraph;
use crate::loss::empirical_label_given_sensitive_nll;
use crate::metrics::MetricsReport;
use crate::model::{GrafairModel, Variant};
use crate::scalar::Scalar;
use crate::train::{train, RunResult, TrainError};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("report serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// The five headline numbers plus the secondary diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricsSummary {
    pub f1: f64,
    pub delta_sp: f64,
    pub delta_eo: f64,
    pub delta_cf: f64,
    pub delta_rs: f64,
    pub cf_flip_rate: f64,
    pub rs_label_change: f64,
}

impl MetricsSummary {
    fn fields(r: &MetricsReport) -> [f64; 7] {
        [
            r.f1,
            r.delta_sp,
            r.delta_eo,
            r.delta_cf,
            r.delta_rs,
            r.cf_flip_rate,
            r.rs_label_change,
        ]
    }

    fn from_array(a: [f64; 7]) -> Self {
        MetricsSummary {
            f1: a[0],
            delta_sp: a[1],
            delta_eo: a[2],
            delta_cf: a[3],
            delta_rs: a[4],
            cf_flip_rate: a[5],
            rs_label_change: a[6],
        }
    }
}

/// Mean and population standard deviation over seeds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AggregateMetrics {
    pub mean: MetricsSummary,
    pub std: MetricsSummary,
}

/// Population (N-divisor) aggregation, matching a mean +- std table over
/// repeated executions.
pub fn aggregate(reports: &[MetricsReport]) -> AggregateMetrics {
    assert!(!reports.is_empty(), "aggregate needs at least one report");
    let n = reports.len() as f64;
    let mut mean = [0.0; 7];
    for r in reports {
        for (m, v) in mean.iter_mut().zip(MetricsSummary::fields(r)) {
            *m += v / n;
        }
    }
    let mut var = [0.0; 7];
    for r in reports {
        for ((s, v), m) in var.iter_mut().zip(MetricsSummary::fields(r)).zip(mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    AggregateMetrics {
        mean: MetricsSummary::from_array(mean),
        std: MetricsSummary::from_array(var.map(f64::sqrt)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub source: String,
    pub nodes: usize,
    pub features: usize,
    pub edges: usize,
    pub train_nodes: usize,
    pub val_nodes: usize,
    pub test_nodes: usize,
    pub warnings: Vec<String>,
}

impl DatasetInfo {
    pub fn of<T: Scalar>(loaded: &LoadedDataset<T>) -> Self {
        let g = &loaded.graph;
        let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
        DatasetInfo {
            source: loaded.source.clone(),
            nodes: g.node_count(),
            features: g.feature_dim(),
            edges: g.edges().edge_count(),
            train_nodes: count(g.train_mask()),
            val_nodes: count(g.val_mask()),
            test_nodes: count(g.test_mask()),
            warnings: loaded.warnings.clone(),
        }
    }
}

/// Full record of one experiment: config echo, dataset provenance,
/// per-seed traces and metrics, and the aggregate.
#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub config: TrainConfig,
    pub dataset: DatasetInfo,
    /// Constant empirical `-E[ln q(y|s)]` term on the train split; adds
    /// the parameter-free part back onto the optimized objective.
    pub label_given_sensitive_nll: f64,
    pub per_seed: Vec<RunResult>,
    pub aggregate: AggregateMetrics,
}

/// Trains one model per seed (in parallel, results sorted by seed) and
/// aggregates the final metrics.
pub fn run_experiment_on<T: Scalar>(
    g: &AttributedGraph<T>,
    dataset: DatasetInfo,
    cfg: &TrainConfig,
) -> Result<(ExperimentReport, Vec<(u64, GrafairModel<T>)>), ExperimentError> {
    let mut outcomes: Vec<(u64, GrafairModel<T>, RunResult)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| train(g, cfg, seed).map(|(m, r)| (seed, m, r)))
        .collect::<Result<Vec<_>, TrainError>>()?;
    outcomes.sort_by_key(|(seed, _, _)| *seed);

    let reports: Vec<MetricsReport> = outcomes.iter().map(|(_, _, r)| r.metrics).collect();
    let aggregate = aggregate(&reports);
    let label_given_sensitive_nll =
        empirical_label_given_sensitive_nll(g.labels(), g.sensitive(), g.train_mask())
            .map_err(TrainError::from)?;
    let mut per_seed = Vec::with_capacity(outcomes.len());
    let mut models = Vec::with_capacity(outcomes.len());
    for (seed, model, run) in outcomes {
        per_seed.push(run);
        models.push((seed, model));
    }
    Ok((
        ExperimentReport {
            config: cfg.clone(),
            dataset,
            label_given_sensitive_nll,
            per_seed,
            aggregate,
        },
        models,
    ))
}

/// Loads the configured dataset and runs the experiment.
pub fn run_experiment<T: Scalar>(
    cfg: &TrainConfig,
) -> Result<(ExperimentReport, Vec<(u64, GrafairModel<T>)>), ExperimentError> {
    let loaded = load_dataset::<T>(cfg)?;
    let info = DatasetInfo::of(&loaded);
    run_experiment_on(&loaded.graph, info, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub delta_sp_mean: f64,
    pub delta_sp_std: f64,
}

/// One experiment per beta, identical seeds across rows; rows keep the
/// input order.
pub fn sweep_beta<T: Scalar>(
    g: &AttributedGraph<T>,
    dataset: DatasetInfo,
    cfg: &TrainConfig,
    betas: &[f64],
) -> Result<(Vec<SweepRow>, Vec<ExperimentReport>), ExperimentError> {
    assert!(!betas.is_empty(), "sweep needs at least one beta");
    let mut rows = Vec::with_capacity(betas.len());
    let mut reports = Vec::with_capacity(betas.len());
    for &beta in betas {
        let mut sub = cfg.clone();
        sub.beta = beta;
        let (report, _) = run_experiment_on(g, dataset.clone(), &sub)?;
        rows.push(SweepRow {
            beta,
            f1_mean: report.aggregate.mean.f1,
            f1_std: report.aggregate.std.f1,
            delta_sp_mean: report.aggregate.mean.delta_sp,
            delta_sp_std: report.aggregate.std.delta_sp,
        });
        reports.push(report);
    }
    Ok((rows, reports))
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub variant: String,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub delta_sp_mean: f64,
    pub delta_sp_std: f64,
    pub delta_eo_mean: f64,
    pub delta_cf_mean: f64,
    pub delta_rs_mean: f64,
}

/// One experiment per variant, same seeds and data everywhere.
pub fn ablation_matrix<T: Scalar>(
    g: &AttributedGraph<T>,
    dataset: DatasetInfo,
    cfg: &TrainConfig,
) -> Result<(Vec<AblationRow>, Vec<ExperimentReport>), ExperimentError> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for variant in Variant::ALL {
        let mut sub = cfg.clone();
        sub.variant = variant;
        let (report, _) = run_experiment_on(g, dataset.clone(), &sub)?;
        rows.push(AblationRow {
            variant: variant.name().to_string(),
            f1_mean: report.aggregate.mean.f1,
            f1_std: report.aggregate.std.f1,
            delta_sp_mean: report.aggregate.mean.delta_sp,
            delta_sp_std: report.aggregate.std.delta_sp,
            delta_eo_mean: report.aggregate.mean.delta_eo,
            delta_cf_mean: report.aggregate.mean.delta_cf,
            delta_rs_mean: report.aggregate.mean.delta_rs,
        });
        reports.push(report);
    }
    Ok((rows, reports))
}

/// FNV-1a over the canonical JSON form of the config; stable across
/// runs, so identical configs land in the same directory.
pub fn config_hash(cfg: &TrainConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{hash:016x}")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let mut f = std::fs::File::create(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(bytes).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `report.json` (deterministic) and `timing.json` (wall-clock,
/// excluded from the determinism guarantee) under
/// `<out_dir>/<config-hash>/`; returns the directory.
pub fn write_experiment(report: &ExperimentReport) -> Result<PathBuf, ExperimentError> {
    let dir = report.config.out_dir.join(config_hash(&report.config));
    std::fs::create_dir_all(&dir).map_err(|source| ExperimentError::Io {
        path: dir.clone(),
        source,
    })?;
    let json = serde_json::to_string_pretty(report)?;
    write_file(&dir.join("report.json"), json.as_bytes())?;

    #[derive(Serialize)]
    struct Timing {
        seed: u64,
        mean_epoch_seconds: f64,
    }
    let timing: Vec<Timing> = report
        .per_seed
        .iter()
        .map(|r| Timing {
            seed: r.seed,
            mean_epoch_seconds: r.mean_epoch_seconds(),
        })
        .collect();
    write_file(
        &dir.join("timing.json"),
        serde_json::to_string_pretty(&timing)?.as_bytes(),
    )?;
    Ok(dir)
}

pub fn write_sweep_csv(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf, ExperimentError> {
    let path = dir.join("sweep.csv");
    let mut text = String::from("beta,f1_mean,f1_std,delta_sp_mean,delta_sp_std\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.beta, r.f1_mean, r.f1_std, r.delta_sp_mean, r.delta_sp_std
        ));
    }
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

pub fn write_ablation_csv(dir: &Path, rows: &[AblationRow]) -> Result<PathBuf, ExperimentError> {
    let path = dir.join("ablation.csv");
    let mut text = String::from(
        "variant,f1_mean,f1_std,delta_sp_mean,delta_sp_std,delta_eo_mean,delta_cf_mean,delta_rs_mean\n",
    );
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.variant,
            r.f1_mean,
            r.f1_std,
            r.delta_sp_mean,
            r.delta_sp_std,
            r.delta_eo_mean,
            r.delta_cf_mean,
            r.delta_rs_mean
        ));
    }
    write_file(&path, text.as_bytes())?;
    Ok(path)
}
