//! Declarative experiments: build the shared context from a TOML config, run
//! the requested algorithms on it, and write one trace CSV per algorithm plus
//! a JSON summary.
//!
//! Output files are `<name>__<algorithm>.csv` and `<name>__summary.json`.

mod config;
pub mod fetch;

pub use config::{
    validate_config, Algorithm, CenterLayout, ConfigError, DatasetConfig, DatasetSource, DsfSection,
    ExperimentConfig, GraphConfig, GraphKind,
};

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::baselines::{run_dsf, tune_dsf, DsfConfig, TuningResult};
use crate::data::surrogate::SurrogateSpec;
use crate::data::{load_libsvm, partition_iid, DataError, Dataset, ParseOptions, Partition};
use crate::dpoem::{run_dpoem, DpoemConfig, FeasibleBall, Problem};
use crate::metrics::{reference_minimum, BoundCheck, InvariantMonitor, RunTrace};
use crate::network::{erdos_renyi_with_attempts, Graph, MixingMatrix};
use crate::oracle::{full_objective, share, HingeObjective, SyntheticObjective};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Where the objective data came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataOrigin {
    Libsvm { path: String, fingerprint: String },
    Surrogate { name: String, fingerprint: String },
    Synthetic,
}

/// Graph, mixing matrix, partition and objectives shared by every algorithm.
#[derive(Debug, Clone)]
pub struct ExperimentContext {
    pub config: ExperimentConfig,
    pub graph: Graph,
    /// Erdős–Rényi draws needed to get a connected graph (1 otherwise).
    pub graph_attempts: u32,
    pub problem: Problem,
    pub dataset: Option<Arc<Dataset>>,
    pub partition: Option<Partition>,
    pub origin: DataOrigin,
    /// SHA-256 over graph, weights, partition, start point and data.
    pub fingerprint: String,
}

impl ExperimentContext {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.agents;
        let (graph, graph_attempts) = match cfg.graph.kind {
            GraphKind::ErdosRenyi => {
                erdos_renyi_with_attempts(n, cfg.graph.p, derive_seed(cfg.seed, "graph"), cfg.graph.max_attempts)?
            }
            GraphKind::Path => (Graph::path(n), 1),
            GraphKind::Complete => (Graph::complete(n), 1),
        };
        let mixing = MixingMatrix::metropolis(&graph)?;
        let ball = FeasibleBall::new(cfg.ball_radius)?;

        let mut hasher = Sha256::new();
        hasher.update(graph.to_edge_list().as_bytes());
        for i in 0..n {
            for v in mixing.row(i) {
                hasher.update(v.to_le_bytes());
            }
        }

        let ds = &cfg.dataset;
        let (objectives, dataset, partition, origin) = match ds.source {
            DatasetSource::Libsvm | DatasetSource::Surrogate => {
                let (mut data, origin) = load_dataset(ds)?;
                if ds.max_samples > 0 && ds.max_samples < data.len() {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "subsample"));
                    let mut keep = sample_indices(&mut rng, data.len(), ds.max_samples).into_vec();
                    keep.sort_unstable();
                    data = data.select(&keep)?;
                }
                if ds.scale {
                    data.scale_max_abs();
                }
                let origin = match origin {
                    DataOrigin::Libsvm { path, .. } => DataOrigin::Libsvm { path, fingerprint: data.fingerprint() },
                    DataOrigin::Surrogate { name, .. } => {
                        DataOrigin::Surrogate { name, fingerprint: data.fingerprint() }
                    }
                    DataOrigin::Synthetic => DataOrigin::Synthetic,
                };
                let data = Arc::new(data);
                let partition = partition_iid(data.len(), n, derive_seed(cfg.seed, "partition"))?;
                for block in partition.blocks() {
                    for &i in block {
                        hasher.update((i as u64).to_le_bytes());
                    }
                    hasher.update(b";");
                }
                let objs = share(HingeObjective::for_partition(Arc::clone(&data), &partition)?);
                (objs, Some(data), Some(partition), origin)
            }
            DatasetSource::Linear | DatasetSource::Distance => {
                let vectors = synthetic_vectors(cfg);
                for v in &vectors {
                    for x in v {
                        hasher.update(x.to_le_bytes());
                    }
                }
                hasher.update(ds.noise.to_le_bytes());
                let objs = vectors
                    .into_iter()
                    .map(|v| match ds.source {
                        DatasetSource::Linear => SyntheticObjective::linear(v, ds.noise),
                        _ => SyntheticObjective::distance(v, ds.noise),
                    })
                    .collect();
                (share(objs), None, None, DataOrigin::Synthetic)
            }
        };
        if let DataOrigin::Libsvm { fingerprint, .. } | DataOrigin::Surrogate { fingerprint, .. } = &origin {
            hasher.update(fingerprint.as_bytes());
        }
        let problem = Problem::new(objectives, mixing, ball, None)?;
        for v in &problem.x0 {
            hasher.update(v.to_le_bytes());
        }
        Ok(Self {
            config: cfg.clone(),
            graph,
            graph_attempts,
            problem,
            dataset,
            partition,
            origin,
            fingerprint: hex::encode(hasher.finalize()),
        })
    }

    pub fn dpoem_config(&self) -> DpoemConfig {
        let c = &self.config;
        DpoemConfig {
            r_eps: c.r_eps,
            horizon: c.horizon,
            seed: c.seed,
            metric_stride: c.metric_stride,
            agent_stride: c.agent_stride,
        }
    }

    /// Runs one algorithm. DSF-T tunes on the grid first, then reruns the winner.
    pub fn run(&self, algorithm: Algorithm) -> Result<AlgorithmRun> {
        let c = &self.config;
        let run = match algorithm {
            Algorithm::Dpoem => AlgorithmRun {
                algorithm,
                trace: run_dpoem(&self.problem, &self.dpoem_config())?,
                dsf: None,
                tuning: Vec::new(),
            },
            Algorithm::DsfD => {
                let dsf = c.dsf.default_config();
                AlgorithmRun {
                    algorithm,
                    trace: run_dsf(&self.problem, &dsf, c.horizon, c.seed, c.metric_stride)?,
                    dsf: Some(dsf),
                    tuning: Vec::new(),
                }
            }
            Algorithm::DsfT => {
                let (best, tuning) = self.tune()?;
                AlgorithmRun {
                    algorithm,
                    trace: run_dsf(&self.problem, &best, c.horizon, c.seed, c.metric_stride)?,
                    dsf: Some(best),
                    tuning,
                }
            }
        };
        let mut run = run;
        run.trace.algorithm = algorithm.as_str().to_string();
        Ok(run)
    }

    pub fn tune(&self) -> Result<(DsfConfig, Vec<TuningResult>)> {
        let c = &self.config;
        Ok(tune_dsf(&self.problem, &c.dsf.grid(), c.horizon, c.seed)?)
    }
}

/// Resolves the cache directory: `$DPOEM_DATA_DIR`, else `data`.
pub fn data_dir() -> PathBuf {
    std::env::var_os(fetch::DATA_DIR_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

fn load_dataset(ds: &DatasetConfig) -> Result<(Dataset, DataOrigin)> {
    let opts = ParseOptions { dim: ds.dim, labels: ds.labels };
    let surrogate = |name: &str| -> Result<(Dataset, DataOrigin)> {
        let spec = SurrogateSpec::by_name(name).ok_or_else(|| Error::Fetch(format!("no surrogate named {name}")))?;
        Ok((spec.generate()?, DataOrigin::Surrogate { name: name.to_string(), fingerprint: String::new() }))
    };
    if ds.source == DatasetSource::Surrogate {
        return surrogate(ds.name.as_deref().unwrap_or_default());
    }
    let path = match (&ds.path, &ds.name) {
        (Some(p), _) => p.clone(),
        (None, Some(name)) => data_dir().join(name),
        (None, None) => unreachable!("validated"),
    };
    match load_libsvm(&path, opts) {
        Ok(data) => Ok((data, DataOrigin::Libsvm { path: path.display().to_string(), fingerprint: String::new() })),
        Err(DataError::Io { .. }) if ds.surrogate_fallback => surrogate(ds.name.as_deref().unwrap_or_default()),
        Err(e) => Err(e.into()),
    }
}

fn synthetic_vectors(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    let ds = &cfg.dataset;
    if let Some(v) = &ds.vector {
        return vec![v.clone(); cfg.agents];
    }
    let d = ds.dim.expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "synthetic"));
    let mut draw = || {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        g.into_iter().map(|x| ds.center_radius * x / norm).collect::<Vec<f64>>()
    };
    match ds.centers {
        CenterLayout::Common => vec![draw(); cfg.agents],
        CenterLayout::Spread => (0..cfg.agents).map(|_| draw()).collect(),
    }
}

/// One algorithm's trace plus what was used to produce it.
#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub trace: RunTrace,
    pub dsf: Option<DsfConfig>,
    pub tuning: Vec<TuningResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub csv: String,
    pub final_f_xbar: f64,
    pub final_f_xtilde: f64,
    pub final_consensus_error: f64,
    pub tau: Option<usize>,
    pub f_xtilde_tau: Option<f64>,
    /// Only for D-POEM, whose output weights are the radius proxies.
    pub bound: Option<BoundCheck>,
    pub oracle_calls_total: u64,
    pub comm_rounds_total: u64,
    pub invariants: InvariantMonitor,
    pub dsf: Option<DsfConfig>,
    pub tuning: Vec<TuningResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub fingerprint: String,
    pub data: DataOrigin,
    pub agents: usize,
    pub dim: usize,
    pub edges: usize,
    pub graph_attempts: u32,
    pub sigma: f64,
    pub f_star: Option<f64>,
    pub wall_time_secs: f64,
    pub algorithms: Vec<AlgorithmSummary>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub runs: Vec<AlgorithmRun>,
    /// Files written, CSVs first and the summary last.
    pub files: Vec<PathBuf>,
}

pub fn csv_file_name(name: &str, algorithm: Algorithm) -> String {
    format!("{name}__{}.csv", algorithm.as_str())
}

pub fn summary_file_name(name: &str) -> String {
    format!("{name}__summary.json")
}

/// Builds the context, runs every configured algorithm and writes the outputs
/// into `out_dir` (default: the config's `output_dir`).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let ctx = ExperimentContext::build(cfg)?;
    let out_dir = out_dir.map_or_else(|| cfg.output_dir.clone(), Path::to_path_buf);
    std::fs::create_dir_all(&out_dir).map_err(|source| io_err(&out_dir, source))?;

    let f_star = (cfg.reference_iters > 0)
        .then(|| reference_minimum(&ctx.problem.objectives, &ctx.problem.ball, cfg.reference_iters).value);

    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    let mut files = Vec::new();
    for &alg in &cfg.algorithms {
        let run = ctx.run(alg)?;
        let csv_name = csv_file_name(&cfg.name, alg);
        let path = out_dir.join(&csv_name);
        write_atomic(&path, run.trace.to_csv().as_bytes())?;
        files.push(path);
        summaries.push(summarize(&ctx, &run, csv_name)?);
        runs.push(run);
    }

    let summary = ExperimentSummary {
        name: cfg.name.clone(),
        fingerprint: ctx.fingerprint.clone(),
        data: ctx.origin.clone(),
        agents: ctx.problem.agents(),
        dim: ctx.problem.dim(),
        edges: ctx.graph.edge_count(),
        graph_attempts: ctx.graph_attempts,
        sigma: ctx.problem.mixing.sigma(),
        f_star,
        wall_time_secs: started.elapsed().as_secs_f64(),
        algorithms: summaries,
        config: cfg.clone(),
    };
    let path = out_dir.join(summary_file_name(&cfg.name));
    let json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    write_atomic(&path, &json)?;
    files.push(path);
    Ok(ExperimentOutcome { summary, runs, files })
}

fn summarize(ctx: &ExperimentContext, run: &AlgorithmRun, csv: String) -> Result<AlgorithmSummary> {
    let trace = &run.trace;
    let objs = &ctx.problem.objectives;
    let last = trace.last_row().expect("horizon is at least 1");
    let selection = trace.output();
    let f_xtilde_tau = match &selection {
        Some(s) => Some(full_objective(objs, &s.x_out)?),
        None => None,
    };
    let bound = (run.algorithm == Algorithm::Dpoem)
        .then(|| trace.bound_check(ctx.problem.ball.diameter(), ctx.config.r_eps));
    Ok(AlgorithmSummary {
        algorithm: run.algorithm.as_str().to_string(),
        csv,
        final_f_xbar: last.f_xbar,
        final_f_xtilde: last.f_xtilde,
        final_consensus_error: last.consensus_error,
        tau: selection.as_ref().map(|s| s.tau),
        f_xtilde_tau,
        bound,
        oracle_calls_total: last.oracle_calls_total,
        comm_rounds_total: last.comm_rounds_total,
        invariants: trace.invariants,
        dsf: run.dsf,
        tuning: run.tuning.clone(),
    })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Writes through a temp file in the same directory, then renames.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}
