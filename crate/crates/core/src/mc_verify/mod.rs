//! Statistical and deterministic comparisons of simulations and identities
//! against kernel predictions.

mod correlation;
mod hciz;
mod histogram;
mod identities;
mod montecarlo;
mod oracle;
mod report;

pub use correlation::{
    cell_average_2d, empirical_one_point, empirical_pair_correlation, two_point_determinant, Cell,
    CorrelationEstimate,
};
pub use hciz::{
    hciz_check, hciz_closed_form, hciz_monte_carlo, hciz_rect_check, hciz_rect_closed_form,
    hciz_rect_monte_carlo, hciz_suite, vandermonde, HcizSuiteConfig, MonteCarloMean, HCIZ_CHUNK, HCIZ_STREAM,
    MIN_VANDERMONDE,
};
pub use histogram::{
    compare_bins, empirical_density, freedman_diaconis_edges, merge_sparse_bins, predicted_bin_density, predicted_bin_density_fixed,
    uniform_edges,
    BinnedCounts, Bins, Histogram, DEFAULT_MIN_BIN_WIDTH,
};
pub use identities::{
    biorthogonality_checks, dual_representation_checks, gue_lemma_checks, identity_suite,
    kernel_algebra_checks, lue_lemma_checks, orthogonality_checks, trace_checks, Blocks,
    IdentityConfig, IdentityTolerances,
};
pub use montecarlo::{
    diffusion_smoke, gue_monte_carlo, kernel_lue_swapped_exponent, lue_monte_carlo, pair_density,
    particle_monte_carlo, CellPair, CellSpec, DiffusionSmokeConfig, GueMonteCarloConfig, LueMonteCarloConfig,
    MatrixChecks, ParticleMonteCarloConfig, DIFFUSION_STREAM, GUE_STREAM, LUE_STREAM, PARTICLE_STREAM,
};
pub use oracle::{eynard_oracle, EynardOracleConfig, ORACLE_STREAM};
pub use report::{CheckReport, SuiteReport, EXACT_MATCH_TOL};
