//! Decentralized stochastic zeroth-order convex optimization.
//!
//! The crate simulates `n` agents on a connected communication graph that
//! jointly minimize `f(x) = (1/n) Σ f_i(x)` over a Euclidean ball while each
//! agent only sees noisy function values of its own `f_i`. It contains:
//!
//! - [`network`]: Erdős–Rényi graphs, Metropolis mixing matrices, `σ = ‖W − J‖₂`
//!   and one gossip round ([`MixingMatrix::mix`]).
//! - [`data`]: a LIBSVM parser, i.i.d. partitioning across agents and seeded
//!   surrogate datasets shaped like the standard benchmark files.
//! - [`oracle`]: stochastic objectives with a same-sample two-point query.
//! - [`estimator`]: uniform sphere directions and the symmetric two-point
//!   gradient estimator.
//! - [`dpoem`]: the parameter-free D-POEM round driver.
//! - [`baselines`]: the distributed subgradient-free method (DSF) with preset
//!   schedules, plus grid tuning.
//! - [`metrics`]: network averages, consensus error, the radius-weighted output
//!   iterate and the runtime invariant checks.
//! - [`experiment`]: declarative TOML experiments, trace CSVs and summaries,
//!   as driven by the `dpoem` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod baselines;
pub mod data;
pub mod dpoem;
pub mod estimator;
pub mod experiment;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod rng;

pub use baselines::{run_dsf, tune_dsf, DsfConfig};
pub use data::{parse_libsvm, partition_iid, Dataset, Partition, Sample};
pub use dpoem::{run_dpoem, DpoemConfig, FeasibleBall, Problem};
pub use estimator::{estimate_gradient, sample_sphere, Direction, GradientEstimate};
pub use metrics::{consensus_error, network_average, RunTrace};
pub use network::{erdos_renyi, Graph, MixingMatrix};
pub use oracle::{full_objective, HingeObjective, SampleToken, StochasticObjective, SyntheticObjective};

use thiserror::Error;

/// Crate-level error, grouping the per-module failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Network(#[from] network::NetworkError),
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Run(#[from] dpoem::RunError),
    #[error(transparent)]
    Config(#[from] experiment::ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("fetch failed: {0}")]
    Fetch(String),
}

impl Error {
    /// Process exit code used by the `dpoem` binary: 2 config, 3 data, 4 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Fetch(_) => 3,
            Error::Io { .. } => 4,
            Error::Network(_) | Error::Oracle(_) | Error::Run(_) => 4,
        }
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::Fetch(_) => "fetch",
            Error::Io { .. } => "io",
            Error::Network(_) => "network",
            Error::Oracle(_) => "oracle",
            Error::Run(_) => "runtime",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
