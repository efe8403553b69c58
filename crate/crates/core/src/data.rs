//! Dataset plumbing: CSV/edge/mask file IO, the named-dataset loader
//! with statistics validation, and the synthetic biased-graph generator
//! used for desk-scale experiments and fixtures.

use crate::config::TrainConfig;
use crate::graph::{build_graph, AttributedGraph, GraphError, SplitSpec};
use crate::scalar::{cast, Scalar};
use crate::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown dataset `{0}` (german, credit, bail, synth, synth-german, custom)")]
    UnknownDataset(String),
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> DataError {
    DataError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Feature CSV: header row, then one row of real values per node.
/// Returns `(header, rows)`.
pub fn read_features_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), DataError> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if record.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} columns, got {}", header.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_err(
                    path,
                    line,
                    format!("column `{}`: `{field}` is not a number", header[col]),
                )
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Edge file: two integer node indices per line, comma- or
/// whitespace-separated. Order and duplication are irrelevant.
pub fn read_edge_file(path: &Path) -> Result<Vec<(usize, usize)>, DataError> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.trim();
        if stripped.is_empty() || stripped.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = stripped
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        if parts.len() != 2 {
            return Err(parse_err(path, line, "expected two node indices"));
        }
        let a: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("`{}` is not an index", parts[0])))?;
        let b: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(path, line, format!("`{}` is not an index", parts[1])))?;
        edges.push((a, b));
    }
    Ok(edges)
}

/// Mask CSV with columns `node_id,split` where split is one of
/// train/val/test.
pub fn read_mask_file(path: &Path, n: usize) -> Result<SplitSpec, DataError> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let mut train = vec![false; n];
    let mut val = vec![false; n];
    let mut test = vec![false; n];
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_err(path, line, "expected `node_id,split`"));
        }
        let node: usize = record[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("`{}` is not a node id", &record[0])))?;
        if node >= n {
            return Err(parse_err(
                path,
                line,
                format!("node id {node} out of range for {n} nodes"),
            ));
        }
        match &record[1] {
            "train" => train[node] = true,
            "val" => val[node] = true,
            "test" => test[node] = true,
            other => {
                return Err(parse_err(
                    path,
                    line,
                    format!("split `{other}` is not train/val/test"),
                ))
            }
        }
    }
    Ok(SplitSpec::Explicit { train, val, test })
}

/// Writes `graph` as the standard three files (`features.csv` including
/// a trailing label column, `edges.txt`, `masks.csv`) under `dir`.
pub fn write_dataset<T: Scalar>(graph: &AttributedGraph<T>, dir: &Path) -> Result<(), DataError> {
    std::fs::create_dir_all(dir).map_err(|source| DataError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let io_err = |path: &Path, source: std::io::Error| DataError::Io {
        path: path.to_path_buf(),
        source,
    };

    let features_path = dir.join("features.csv");
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&features_path).map_err(|e| io_err(&features_path, e))?,
    );
    let d = graph.feature_dim();
    let mut header: Vec<String> = (0..d)
        .map(|j| {
            if j == graph.sensitive_col() {
                "sensitive".to_string()
            } else {
                format!("f{j}")
            }
        })
        .collect();
    header.push("label".to_string());
    writeln!(out, "{}", header.join(",")).map_err(|e| io_err(&features_path, e))?;
    for i in 0..graph.node_count() {
        let mut fields: Vec<String> = (0..d)
            .map(|j| {
                let v = graph.features()[(i, j)].to_f64().expect("finite feature");
                format!("{v}")
            })
            .collect();
        fields.push(format!("{}", graph.labels()[i]));
        writeln!(out, "{}", fields.join(",")).map_err(|e| io_err(&features_path, e))?;
    }
    drop(out);

    let edges_path = dir.join("edges.txt");
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&edges_path).map_err(|e| io_err(&edges_path, e))?,
    );
    for (a, b) in graph.edges().undirected_pairs() {
        writeln!(out, "{a} {b}").map_err(|e| io_err(&edges_path, e))?;
    }
    drop(out);

    let masks_path = dir.join("masks.csv");
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&masks_path).map_err(|e| io_err(&masks_path, e))?,
    );
    writeln!(out, "node_id,split").map_err(|e| io_err(&masks_path, e))?;
    for i in 0..graph.node_count() {
        let split = if graph.train_mask()[i] {
            "train"
        } else if graph.val_mask()[i] {
            "val"
        } else if graph.test_mask()[i] {
            "test"
        } else {
            continue;
        };
        writeln!(out, "{i},{split}").map_err(|e| io_err(&masks_path, e))?;
    }
    Ok(())
}

/// Full parameter set of the generator. [`synth_biased_graph`] fills the
/// secondary knobs with defaults; presets override them.
///
/// Labels are drawn per community: every group splits into
/// `communities_per_group` equal-sized communities, each carrying a
/// positive rate of either `tilt_low` or `tilt_high`. `bias_strength`
/// skews how many low-rate communities each group receives, which is
/// what correlates labels with the sensitive attribute; 0 gives both
/// groups the same composition. Edge mass is allocated exactly:
/// `homophily` of it within groups (so 0.5 is group-blind), and
/// `intra_community_frac` of the within-group mass inside communities.
/// Dense communities give message passing a resolvable fingerprint per
/// community; how crisp it is is set by `feature_scale`.
#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub n: usize,
    /// Share of edge mass on same-group pairs, in [0, 1].
    pub homophily: f64,
    /// Strength of the planted label/sensitive correlation, in [0, 1].
    pub bias_strength: f64,
    pub seed: u64,
    /// Total feature count including the sensitive column (column 0).
    pub feature_dim: usize,
    pub signal_dims: usize,
    pub leak_dims: usize,
    /// Label rates of the two community flavors.
    pub tilt_low: f64,
    pub tilt_high: f64,
    pub communities_per_group: usize,
    /// Share of within-group edge mass kept inside communities.
    pub intra_community_frac: f64,
    /// Per-node label-propensity signal written into the signal columns.
    pub signal_gain: f64,
    pub signal_noise: f64,
    /// Group offset and noise on the leak columns.
    pub leak_gain: f64,
    pub leak_noise: f64,
    /// Extra per-node label shift in logits applied by group membership.
    pub direct_bias_logit: f64,
    /// Multiplier on every non-sensitive feature column.
    pub feature_scale: f64,
    pub avg_degree: f64,
    pub train_frac: f64,
    pub val_frac: f64,
    pub split_seed: u64,
}

impl SynthSpec {
    pub fn basic(n: usize, homophily: f64, bias_strength: f64, seed: u64) -> Self {
        SynthSpec {
            n,
            homophily,
            bias_strength,
            seed,
            feature_dim: 8,
            signal_dims: 1,
            leak_dims: 2,
            tilt_low: 0.45,
            tilt_high: 0.85,
            communities_per_group: 5,
            intra_community_frac: 0.85,
            signal_gain: 0.3,
            signal_noise: 1.0,
            leak_gain: 0.8,
            leak_noise: 0.6,
            direct_bias_logit: 0.0,
            feature_scale: 1.0,
            avg_degree: 12.0,
            train_frac: 0.5,
            val_frac: 0.25,
            split_seed: 42,
        }
    }

    /// Stand-in matched to the published statistics of the 1000-node
    /// credit-scoring graph: 27 features, ~22242 edges, gendered
    /// sensitive attribute, ~0.66 positive rate.
    pub fn german_like(seed: u64) -> Self {
        SynthSpec {
            n: 1000,
            homophily: 0.9,
            bias_strength: 0.45,
            seed,
            feature_dim: 27,
            signal_dims: 2,
            leak_dims: 3,
            tilt_low: 0.44,
            tilt_high: 0.88,
            communities_per_group: 8,
            intra_community_frac: 0.85,
            signal_gain: 0.3,
            signal_noise: 1.0,
            leak_gain: 0.8,
            leak_noise: 0.6,
            direct_bias_logit: 0.0,
            feature_scale: 1.0,
            avg_degree: 2.0 * 22242.0 / 1000.0,
            train_frac: 0.5,
            val_frac: 0.25,
            split_seed: 42,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn synth_with_spec<T: Scalar>(spec: SynthSpec) -> Result<AttributedGraph<T>, DataError> {
    if spec.n < 10 {
        return Err(DataError::InvalidParameter(format!(
            "synthetic graph needs n >= 10, got {}",
            spec.n
        )));
    }
    if !(0.0..=1.0).contains(&spec.homophily) {
        return Err(DataError::InvalidParameter(format!(
            "homophily must be in [0,1], got {}",
            spec.homophily
        )));
    }
    if !(0.0..=1.0).contains(&spec.bias_strength) {
        return Err(DataError::InvalidParameter(format!(
            "bias_strength must be in [0,1], got {}",
            spec.bias_strength
        )));
    }
    if spec.feature_dim < 1 + spec.signal_dims + spec.leak_dims {
        return Err(DataError::InvalidParameter(
            "feature_dim too small for the requested signal/leak columns".into(),
        ));
    }
    if spec.communities_per_group == 0 {
        return Err(DataError::InvalidParameter(
            "communities_per_group must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let c = spec.communities_per_group;

    let sensitive: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let community: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();

    // community label rates: bias_strength skews how many low-rate
    // communities each group gets, around an even split
    let skew = 0.5 * spec.bias_strength;
    let low_count = |frac: f64| -> usize { ((frac * c as f64).round() as usize).min(c) };
    let low_per_group = [low_count(0.5 + skew), low_count(0.5 - skew)];
    let rate_of = |s: u8, comm: usize| -> f64 {
        if comm < low_per_group[s as usize] {
            spec.tilt_low
        } else {
            spec.tilt_high
        }
    };

    let logit = |p: f64| (p / (1.0 - p)).ln();
    let labels: Vec<u8> = (0..n)
        .map(|i| {
            let base = logit(rate_of(sensitive[i], community[i]));
            let shifted = sigmoid(base + spec.direct_bias_logit * (2.0 * sensitive[i] as f64 - 1.0));
            u8::from(rng.random_range(0.0..1.0) < shifted)
        })
        .collect();

    let mut features = Mat::<T>::zeros((n, spec.feature_dim));
    let fs = spec.feature_scale;
    for i in 0..n {
        features[(i, 0)] = cast::<T>(sensitive[i] as f64);
        let propensity = logit(rate_of(sensitive[i], community[i]));
        let mut col = 1;
        for _ in 0..spec.signal_dims {
            let noise: f64 = rng.sample(StandardNormal);
            features[(i, col)] =
                cast::<T>(fs * (spec.signal_gain * propensity + spec.signal_noise * noise));
            col += 1;
        }
        for _ in 0..spec.leak_dims {
            let noise: f64 = rng.sample(StandardNormal);
            let group = 2.0 * sensitive[i] as f64 - 1.0;
            features[(i, col)] =
                cast::<T>(fs * (spec.leak_gain * group + spec.leak_noise * noise));
            col += 1;
        }
        while col < spec.feature_dim {
            features[(i, col)] = cast::<T>(fs * rng.sample::<f64, _>(StandardNormal));
            col += 1;
        }
    }

    // exact edge-mass allocation: `homophily` of the expected edges land
    // on same-group pairs (intra_community_frac of those inside
    // communities), the rest across groups
    let mut same_comm_pairs = 0f64;
    let mut same_group_pairs = 0f64;
    let mut cross_pairs = 0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            if sensitive[i] != sensitive[j] {
                cross_pairs += 1.0;
            } else if community[i] == community[j] {
                same_comm_pairs += 1.0;
            } else {
                same_group_pairs += 1.0;
            }
        }
    }
    let total = spec.avg_degree * n as f64 / 2.0;
    let intra_mass = spec.homophily * total;
    let comm_mass = spec.intra_community_frac * intra_mass;
    let p_comm = if same_comm_pairs > 0.0 { (comm_mass / same_comm_pairs).min(1.0) } else { 0.0 };
    let p_group = if same_group_pairs > 0.0 {
        ((intra_mass - comm_mass) / same_group_pairs).min(1.0)
    } else {
        0.0
    };
    let p_cross = if cross_pairs > 0.0 {
        ((1.0 - spec.homophily) * total / cross_pairs).min(1.0)
    } else {
        0.0
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if sensitive[i] != sensitive[j] {
                p_cross
            } else if community[i] == community[j] {
                p_comm
            } else {
                p_group
            };
            if rng.random_range(0.0..1.0) < p {
                edges.push((i, j));
            }
        }
    }

    let split = SplitSpec::Stratified {
        train: spec.train_frac,
        val: spec.val_frac,
        seed: spec.split_seed,
    };
    Ok(build_graph(features, &edges, 0, &labels, &split)?)
}

/// Generator entry point with default secondary knobs.
pub fn synth_biased_graph<T: Scalar>(
    n: usize,
    homophily: f64,
    bias_strength: f64,
    seed: u64,
) -> Result<AttributedGraph<T>, DataError> {
    synth_with_spec(SynthSpec::basic(n, homophily, bias_strength, seed))
}

/// Published statistics of the named datasets: nodes, features, edges.
fn expected_stats(name: &str) -> Option<(usize, usize, usize, &'static str)> {
    match name {
        "german" => Some((1000, 27, 22242, "Gender")),
        "credit" => Some((30000, 13, 1436858, "Age")),
        "bail" => Some((18876, 18, 321308, "Race")),
        _ => None,
    }
}

/// A loaded dataset plus provenance and any validation warnings.
#[derive(Debug)]
pub struct LoadedDataset<T> {
    pub graph: AttributedGraph<T>,
    pub source: String,
    pub warnings: Vec<String>,
}

fn default_columns(name: &str) -> (&'static str, &'static str) {
    match name {
        "german" => ("Gender", "GoodCustomer"),
        "credit" => ("Age", "NoDefaultNextMonth"),
        "bail" => ("WHITE", "RECID"),
        _ => ("sensitive", "label"),
    }
}

fn normalize_binary(
    values: &mut [f64],
    what: &str,
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<(), DataError> {
    let negatives = values.iter().any(|&v| v == -1.0);
    if negatives {
        warnings.push(format!("{what}: mapped -1/1 coding to 0/1"));
        for v in values.iter_mut() {
            if *v == -1.0 {
                *v = 0.0;
            }
        }
    }
    for (i, &v) in values.iter().enumerate() {
        if v != 0.0 && v != 1.0 {
            return Err(parse_err(
                path,
                i + 2,
                format!("{what} value {v} is not binary"),
            ));
        }
    }
    Ok(())
}

fn load_from_files<T: Scalar>(
    features_path: &Path,
    edges_path: &Path,
    masks_path: Option<&Path>,
    sensitive_col: &str,
    label_col: &str,
    cfg: &TrainConfig,
) -> Result<(AttributedGraph<T>, Vec<String>), DataError> {
    let mut warnings = Vec::new();
    let (header, rows) = read_features_csv(features_path)?;
    let find = |name: &str| -> Result<usize, DataError> {
        header.iter().position(|h| h == name).ok_or_else(|| {
            parse_err(
                features_path,
                1,
                format!("column `{name}` not found in header"),
            )
        })
    };
    let label_idx = find(label_col)?;
    let sens_idx_raw = find(sensitive_col)?;

    let n = rows.len();
    let mut labels_f: Vec<f64> = rows.iter().map(|r| r[label_idx]).collect();
    normalize_binary(&mut labels_f, "label column", features_path, &mut warnings)?;
    let labels: Vec<u8> = labels_f.iter().map(|&v| v as u8).collect();

    // feature matrix drops the label column; sensitive stays in place
    let keep: Vec<usize> = (0..header.len()).filter(|&j| j != label_idx).collect();
    let sensitive_col_idx = keep
        .iter()
        .position(|&j| j == sens_idx_raw)
        .expect("sensitive column kept");
    let mut sens_values: Vec<f64> = rows.iter().map(|r| r[sens_idx_raw]).collect();
    normalize_binary(
        &mut sens_values,
        "sensitive column",
        features_path,
        &mut warnings,
    )?;
    let mut features = Mat::<T>::zeros((n, keep.len()));
    for (i, row) in rows.iter().enumerate() {
        for (out_j, &j) in keep.iter().enumerate() {
            let v = if j == sens_idx_raw {
                sens_values[i]
            } else {
                row[j]
            };
            features[(i, out_j)] = cast::<T>(v);
        }
    }

    let edges = read_edge_file(edges_path)?;
    let split = match masks_path {
        Some(p) if p.exists() => read_mask_file(p, n)?,
        _ => SplitSpec::Stratified {
            train: cfg.train_frac,
            val: cfg.val_frac,
            seed: cfg.split_seed,
        },
    };
    let graph = build_graph(features, &edges, sensitive_col_idx, &labels, &split)?;
    Ok((graph, warnings))
}

/// Loads the dataset named by `cfg.dataset`.
///
/// Named datasets read `<data_dir>/<name>/<name>.csv`,
/// `<name>_edges.txt` and optionally `<name>_masks.csv`, then compare
/// against the published statistics; a mismatch is a warning, not an
/// error. `synth` and `synth-german` are generated in memory.
pub fn load_dataset<T: Scalar>(cfg: &TrainConfig) -> Result<LoadedDataset<T>, DataError> {
    match cfg.dataset.as_str() {
        "synth" => Ok(LoadedDataset {
            graph: synth_with_spec(SynthSpec {
                train_frac: cfg.train_frac,
                val_frac: cfg.val_frac,
                split_seed: cfg.split_seed,
                ..SynthSpec::basic(
                    cfg.synth.n,
                    cfg.synth.homophily,
                    cfg.synth.bias_strength,
                    cfg.synth.seed,
                )
            })?,
            source: format!(
                "synthetic(n={}, homophily={}, bias={}, seed={})",
                cfg.synth.n, cfg.synth.homophily, cfg.synth.bias_strength, cfg.synth.seed
            ),
            warnings: Vec::new(),
        }),
        "synth-german" => Ok(LoadedDataset {
            graph: synth_with_spec(SynthSpec {
                train_frac: cfg.train_frac,
                val_frac: cfg.val_frac,
                split_seed: cfg.split_seed,
                ..SynthSpec::german_like(cfg.synth.seed)
            })?,
            source: format!(
                "synthetic stand-in with german statistics (seed={})",
                cfg.synth.seed
            ),
            warnings: Vec::new(),
        }),
        "custom" => {
            let features_path = cfg
                .features_path
                .clone()
                .ok_or_else(|| DataError::InvalidParameter("custom dataset needs features_path".into()))?;
            let edges_path = cfg
                .edges_path
                .clone()
                .ok_or_else(|| DataError::InvalidParameter("custom dataset needs edges_path".into()))?;
            let sensitive = cfg
                .sensitive_col
                .clone()
                .ok_or_else(|| DataError::InvalidParameter("custom dataset needs sensitive_col".into()))?;
            let label = cfg
                .label_col
                .clone()
                .ok_or_else(|| DataError::InvalidParameter("custom dataset needs label_col".into()))?;
            let (graph, warnings) = load_from_files(
                &features_path,
                &edges_path,
                cfg.masks_path.as_deref(),
                &sensitive,
                &label,
                cfg,
            )?;
            Ok(LoadedDataset {
                graph,
                source: features_path.display().to_string(),
                warnings,
            })
        }
        name @ ("german" | "credit" | "bail") => {
            let dir = cfg.data_dir.join(name);
            let features_path = cfg
                .features_path
                .clone()
                .unwrap_or_else(|| dir.join(format!("{name}.csv")));
            let edges_path = cfg
                .edges_path
                .clone()
                .unwrap_or_else(|| dir.join(format!("{name}_edges.txt")));
            let masks_path = cfg
                .masks_path
                .clone()
                .unwrap_or_else(|| dir.join(format!("{name}_masks.csv")));
            let (default_sens, default_label) = default_columns(name);
            let sensitive = cfg
                .sensitive_col
                .clone()
                .unwrap_or_else(|| default_sens.to_string());
            let label = cfg
                .label_col
                .clone()
                .unwrap_or_else(|| default_label.to_string());
            let (graph, mut warnings) = load_from_files(
                &features_path,
                &edges_path,
                Some(&masks_path),
                &sensitive,
                &label,
                cfg,
            )?;
            if let Some((nodes, dims, edges, _)) = expected_stats(name) {
                if graph.node_count() != nodes {
                    warnings.push(format!(
                        "{name}: expected {nodes} nodes, file has {}",
                        graph.node_count()
                    ));
                }
                if graph.feature_dim() != dims {
                    warnings.push(format!(
                        "{name}: expected {dims} features, file has {}",
                        graph.feature_dim()
                    ));
                }
                let got = graph.edges().edge_count();
                if got != edges {
                    warnings.push(format!("{name}: expected {edges} edges, file has {got}"));
                }
            }
            Ok(LoadedDataset {
                graph,
                source: features_path.display().to_string(),
                warnings,
            })
        }
        other => Err(DataError::UnknownDataset(other.to_string())),
    }
}
