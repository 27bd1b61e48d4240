use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Fills every unset field of `self` from `file`.
macro_rules! overlay {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            pub fn overlay(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

/// Layout of the `--config` TOML file: one optional table per subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub kernel: KernelArgs,
    #[serde(default)]
    pub simulate: SimulateArgs,
    #[serde(default)]
    pub verify: VerifyArgs,
    #[serde(default, rename = "eynard-check")]
    pub eynard_check: EynardCheckArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    /// Interlaced particle system from the packed start (integer positions).
    Discrete,
    /// Extended kernel of the Hermitian minor diffusion.
    Gue,
    /// Minor kernel of a single Hermitian matrix (times fixed to 1).
    GueStatic,
    /// Diffusion limit of the particle system in variables (ξ, n, τ).
    Scaled,
    /// Extended kernel of the Wishart minor process.
    Lue,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub name: Option<KernelName>,
    /// Evaluate on the diagonal: the second point equals the first.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub diag: Option<bool>,
    /// Level of the first point.
    #[arg(long)]
    pub n: Option<usize>,
    /// Time of the first point (τ for the scaled kernel).
    #[arg(long)]
    pub t: Option<f64>,
    /// Single position of the first point; overrides the grid.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    /// Grid size on [xmin, xmax]; the discrete kernel uses every integer instead.
    #[arg(long)]
    pub points: Option<usize>,
    /// Position of the second point; omitted means the diagonal.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Level of the second point (defaults to --n).
    #[arg(long)]
    pub n2: Option<usize>,
    /// Time of the second point (defaults to --t).
    #[arg(long)]
    pub t2: Option<f64>,
    /// Row count of the Wishart process (lue only).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub circle_nodes: Option<usize>,
    #[arg(long)]
    pub line_nodes: Option<usize>,
    /// Quadrature self-convergence target.
    #[arg(long)]
    pub tol: Option<f64>,
}

overlay!(KernelArgs { name, diag, n, t, x, xmin, xmax, points, y, n2, t2, p, epsilon, circle_nodes, line_nodes, tol });

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Hermitian Brownian matrix, eigenvalues of its principal minors.
    DbmMinors,
    /// Complex Brownian p × n matrix, eigenvalues of A*A over column minors.
    Wishart,
    /// Interlaced particles with blocking and pushing from the packed start.
    Particles,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent samples (replicas for particles).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Samples per random sub-stream.
    #[arg(long)]
    pub chunk: Option<usize>,
    /// Matrix size, Wishart column count, or number of particle levels.
    #[arg(long, visible_alias = "n")]
    pub size: Option<usize>,
    /// Wishart row count (defaults to --size).
    #[arg(long)]
    pub p: Option<usize>,
    /// Increasing observation times.
    #[arg(long, visible_alias = "t", value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Levels to record (defaults to all).
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
}

overlay!(SimulateArgs { model, seed, samples, chunk, size, p, times, levels });

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Hciz,
    Eynard,
    Montecarlo,
    All,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random weight specs in the enumeration-oracle suite.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sample count for every Monte Carlo check (defaults per suite).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Gate on |z| for statistical checks (defaults per suite).
    #[arg(long)]
    pub z_max: Option<f64>,
    /// Multiplies every tolerance and z gate.
    #[arg(long)]
    pub tolerance_scale: Option<f64>,
}

overlay!(VerifyArgs { suite, seed, trials, samples, z_max, tolerance_scale });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EynardCheckArgs {
    /// Weight spec in the JSON table layout.
    pub spec: Option<PathBuf>,
    /// Largest point-set size compared (1 to 3).
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Absolute tolerance on each correlation.
    #[arg(long)]
    pub tol: Option<f64>,
}

overlay!(EynardCheckArgs { spec, max_points, tol });
