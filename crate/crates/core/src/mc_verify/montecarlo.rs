use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    kernel_diffusion_scaled, kernel_discrete, kernel_gue_extended, kernel_lue, lue_first_term, lue_second_term,
    LueParams, QuadratureOptions, SpaceTimePoint,
};
use crate::particles::{diffusion_rescale, observe, SimClock};
use crate::rmt_sim::{chunked, sample_dbm_minors, sample_wishart_minors, RngStream};

use super::correlation::{cell_average_2d, empirical_pair_correlation, Cell};
use super::histogram::{
    compare_bins, freedman_diaconis_edges, merge_sparse_bins, predicted_bin_density_fixed, uniform_edges, BinnedCounts,
};
use super::report::{CheckReport, SuiteReport};

/// Random stream selectors, one per suite.
pub const GUE_STREAM: u64 = 21;
pub const LUE_STREAM: u64 = 22;
pub const PARTICLE_STREAM: u64 = 23;
pub const DIFFUSION_STREAM: u64 = 24;

/// Interval `[lo, hi)` at one (level, time) of a sampled process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub level: usize,
    pub time: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellPair {
    pub a: CellSpec,
    pub b: CellSpec,
}

/// Checks shared by the matrix-valued simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixChecks {
    pub density_level: usize,
    pub density_time: f64,
    pub min_bin_width: f64,
    /// Sparse tail bins are merged until each expects this many points.
    pub min_expected_count: f64,
    /// Gauss–Legendre nodes per bin for the predicted bin averages.
    pub bin_order: usize,
    /// Gauss–Legendre nodes per axis for predicted cell averages.
    pub cell_order: usize,
    pub pairs: Vec<CellPair>,
    pub z_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GueMonteCarloConfig {
    pub seed: u64,
    pub samples: usize,
    pub chunk: usize,
    pub matrix_size: usize,
    pub times: Vec<f64>,
    pub levels: Vec<usize>,
    pub checks: MatrixChecks,
}

impl Default for GueMonteCarloConfig {
    fn default() -> Self {
        let cell = |level, time, lo, hi| CellSpec { level, time, lo, hi };
        Self {
            seed: 2024,
            samples: 100_000,
            chunk: 5_000,
            matrix_size: 3,
            times: vec![0.5, 1.0],
            levels: vec![2, 3],
            checks: MatrixChecks {
                density_level: 2,
                density_time: 1.0,
                min_bin_width: super::DEFAULT_MIN_BIN_WIDTH,
                min_expected_count: 5.0,
                bin_order: 5,
                cell_order: 8,
                pairs: vec![
                    CellPair { a: cell(2, 1.0, -1.0, -0.25), b: cell(2, 1.0, 0.25, 1.0) },
                    CellPair { a: cell(2, 1.0, -0.5, 0.5), b: cell(3, 0.5, -0.5, 0.5) },
                ],
                z_max: 3.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LueMonteCarloConfig {
    pub seed: u64,
    pub samples: usize,
    pub chunk: usize,
    pub p: usize,
    pub columns: usize,
    pub times: Vec<f64>,
    pub levels: Vec<usize>,
    pub checks: MatrixChecks,
    /// Off-diagonal space-like pair on which the two readings of the second
    /// term's `z`-exponent differ.
    pub reading_pair: CellPair,
}

impl Default for LueMonteCarloConfig {
    fn default() -> Self {
        let cell = |level, time, lo, hi| CellSpec { level, time, lo, hi };
        Self {
            seed: 2024,
            samples: 100_000,
            chunk: 5_000,
            p: 2,
            columns: 2,
            times: vec![0.5, 1.0],
            levels: vec![1, 2],
            checks: MatrixChecks {
                density_level: 1,
                density_time: 1.0,
                min_bin_width: super::DEFAULT_MIN_BIN_WIDTH,
                min_expected_count: 5.0,
                bin_order: 5,
                cell_order: 8,
                pairs: vec![],
                z_max: 3.0,
            },
            reading_pair: CellPair { a: cell(1, 1.0, 0.0, 1.0), b: cell(2, 0.5, 0.0, 1.0) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleMonteCarloConfig {
    pub seed: u64,
    pub replicas: usize,
    pub chunk: usize,
    pub levels: usize,
    pub time: f64,
    /// Largest site examined on every level; sites start at `−level`.
    pub max_site: i64,
    pub z_max: f64,
}

impl Default for ParticleMonteCarloConfig {
    fn default() -> Self {
        Self { seed: 2024, replicas: 100_000, chunk: 5_000, levels: 3, time: 1.0, max_site: 10, z_max: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSmokeConfig {
    pub seed: u64,
    pub replicas: usize,
    pub chunk: usize,
    pub levels: usize,
    pub t: f64,
    pub tau: f64,
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    /// Bias allowance `bias_coefficient · t^{−1/2} · max ρ` added to `z_max·σ`.
    pub bias_coefficient: f64,
    pub z_max: f64,
}

impl Default for DiffusionSmokeConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            replicas: 20_000,
            chunk: 1_000,
            levels: 2,
            t: 400.0,
            tau: 1.0,
            lo: -3.0,
            hi: 3.0,
            bins: 24,
            bias_coefficient: 1.0,
            z_max: 3.0,
        }
    }
}

type Sample = Vec<Vec<f64>>;

fn coord_of(times: &[f64], levels: &[usize], level: usize, time: f64) -> Result<usize> {
    let ti = times
        .iter()
        .position(|&t| t == time)
        .ok_or_else(|| Error::Invalid(format!("time {time} is not sampled")))?;
    let li = levels
        .iter()
        .position(|&l| l == level)
        .ok_or_else(|| Error::Invalid(format!("level {level} is not sampled")))?;
    Ok(ti * levels.len() + li)
}

fn flatten(eigenvalues: Vec<Vec<Vec<f64>>>) -> Sample {
    eigenvalues.into_iter().flatten().collect()
}

fn collect_samples<F>(stream: &RngStream, total: usize, chunk: usize, draw: F) -> Result<Vec<Sample>>
where
    F: Fn(&mut ChaCha20Rng) -> Result<Sample> + Sync,
{
    let parts = chunked(stream, total, chunk, |rng, count| (0..count).map(|_| draw(rng)).collect::<Result<Vec<_>>>());
    let mut out = Vec::with_capacity(total);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// `det [[K(a,a), K(a,b)], [K(b,a), K(b,b)]]`.
pub fn pair_density<K>(kernel: &K, a: &SpaceTimePoint, b: &SpaceTimePoint) -> Result<f64>
where
    K: Fn(&SpaceTimePoint, &SpaceTimePoint) -> Result<f64>,
{
    Ok(kernel(a, a)? * kernel(b, b)? - kernel(a, b)? * kernel(b, a)?)
}

fn predicted_pair<K>(kernel: &K, pair: &CellPair, order: usize) -> Result<f64>
where
    K: Fn(&SpaceTimePoint, &SpaceTimePoint) -> Result<f64>,
{
    let (ca, cb) = (Cell::new(0, pair.a.lo, pair.a.hi)?, Cell::new(1, pair.b.lo, pair.b.hi)?);
    cell_average_2d(
        |x, y| {
            pair_density(
                kernel,
                &SpaceTimePoint::new(x, pair.a.level, pair.a.time),
                &SpaceTimePoint::new(y, pair.b.level, pair.b.time),
            )
        },
        &ca,
        &cb,
        order,
    )
}

fn pair_name(prefix: &str, pair: &CellPair) -> String {
    format!(
        "{prefix}-pair(n{}t{}[{},{}),n{}t{}[{},{}))",
        pair.a.level, pair.a.time, pair.a.lo, pair.a.hi, pair.b.level, pair.b.time, pair.b.lo, pair.b.hi
    )
}

fn pair_check<K>(
    prefix: &str,
    samples: &[Sample],
    coord: impl Fn(&CellSpec) -> Result<usize>,
    kernel: &K,
    pair: &CellPair,
    checks: &MatrixChecks,
) -> Result<CheckReport>
where
    K: Fn(&SpaceTimePoint, &SpaceTimePoint) -> Result<f64>,
{
    let a = Cell::new(coord(&pair.a)?, pair.a.lo, pair.a.hi)?;
    let b = Cell::new(coord(&pair.b)?, pair.b.lo, pair.b.hi)?;
    let est = empirical_pair_correlation(samples, &a, &b)?;
    let predicted = predicted_pair(kernel, pair, checks.cell_order)?;
    Ok(CheckReport::statistical(pair_name(prefix, pair), predicted, est.estimate, est.stderr, checks.z_max))
}

fn density_checks<K>(
    prefix: &str,
    samples: &[Sample],
    coord: usize,
    kernel: &K,
    checks: &MatrixChecks,
) -> Result<Vec<CheckReport>>
where
    K: Fn(&SpaceTimePoint, &SpaceTimePoint) -> Result<f64>,
{
    let values: Vec<f64> = samples.iter().flat_map(|s| s[coord].iter().copied()).collect();
    let fine = freedman_diaconis_edges(&values, checks.min_bin_width)?;
    let (level, time) = (checks.density_level, checks.density_time);
    let predicted = predicted_bin_density_fixed(
        |x| {
            let p = SpaceTimePoint::new(x, level, time);
            kernel(&p, &p)
        },
        &fine,
        checks.bin_order,
    )?;
    let (edges, predicted) = merge_sparse_bins(&fine, &predicted, samples.len(), checks.min_expected_count)?;
    let mut counts = BinnedCounts::new(edges)?;
    for s in samples {
        counts.add_sample(&s[coord]);
    }
    Ok(compare_bins(&format!("{prefix}-density-n{level}-t{time}"), &counts, &predicted, checks.z_max))
}

fn gue_kernel(a: &SpaceTimePoint, b: &SpaceTimePoint) -> Result<f64> {
    Ok(kernel_gue_extended(a, b)?.value)
}

/// Eigenvalue density and two-point cell correlations of Hermitian Brownian
/// minors against the extended kernel.
pub fn gue_monte_carlo(cfg: &GueMonteCarloConfig) -> Result<SuiteReport> {
    let stream = RngStream::new(cfg.seed, GUE_STREAM);
    let samples = collect_samples(&stream, cfg.samples, cfg.chunk, |rng| {
        Ok(flatten(sample_dbm_minors(cfg.matrix_size, &cfg.times, &cfg.levels, rng)?.eigenvalues))
    })?;
    let coord = |c: &CellSpec| coord_of(&cfg.times, &cfg.levels, c.level, c.time);
    let checks = &cfg.checks;
    let mut report = SuiteReport::new("gue-monte-carlo");
    let dc = coord_of(&cfg.times, &cfg.levels, checks.density_level, checks.density_time)?;
    for c in density_checks("gue", &samples, dc, &gue_kernel, checks)? {
        report.push(c);
    }
    for pair in &checks.pairs {
        report.push(pair_check("gue", &samples, coord, &gue_kernel, pair, checks)?);
    }
    Ok(report)
}

/// LUE kernel with the second term's `z`-exponent evaluated at the second
/// argument's position instead of the first. Used only to test which reading
/// of the kernel formula the simulation supports.
pub fn kernel_lue_swapped_exponent(a: &SpaceTimePoint, b: &SpaceTimePoint, params: &LueParams) -> Result<f64> {
    let opts = QuadratureOptions::default();
    let first = lue_first_term(a, b, params, &opts)?.value;
    let moved = SpaceTimePoint::new(b.x, a.n, a.t);
    if a.x < 0.0 || b.x < 0.0 {
        return Ok(first);
    }
    Ok(first + lue_second_term(&moved, b, params, &opts)?.value)
}

/// Eigenvalue density of Wishart minors against the LUE kernel diagonal, plus
/// an off-diagonal pair comparing both readings of the kernel formula. The
/// swapped reading is reported in `info`.
pub fn lue_monte_carlo(cfg: &LueMonteCarloConfig) -> Result<SuiteReport> {
    let stream = RngStream::new(cfg.seed, LUE_STREAM);
    let samples = collect_samples(&stream, cfg.samples, cfg.chunk, |rng| {
        Ok(flatten(sample_wishart_minors(cfg.p, cfg.columns, &cfg.times, &cfg.levels, rng)?.eigenvalues))
    })?;
    let params = LueParams { p: cfg.p };
    let kernel = |a: &SpaceTimePoint, b: &SpaceTimePoint| Ok(kernel_lue(a, b, &params)?.value);
    let swapped = |a: &SpaceTimePoint, b: &SpaceTimePoint| kernel_lue_swapped_exponent(a, b, &params);
    let coord = |c: &CellSpec| coord_of(&cfg.times, &cfg.levels, c.level, c.time);
    let checks = &cfg.checks;
    let mut report = SuiteReport::new("lue-monte-carlo");
    let dc = coord_of(&cfg.times, &cfg.levels, checks.density_level, checks.density_time)?;
    for c in density_checks("lue", &samples, dc, &kernel, checks)? {
        report.push(c);
    }
    for pair in &checks.pairs {
        report.push(pair_check("lue", &samples, coord, &kernel, pair, checks)?);
    }
    report.push(pair_check("lue-reading-first-position", &samples, coord, &kernel, &cfg.reading_pair, checks)?);
    report.push_info(pair_check("lue-reading-second-position", &samples, coord, &swapped, &cfg.reading_pair, checks)?);
    Ok(report)
}

fn poisson_pmf(mean: f64, k: u64) -> f64 {
    let log = -mean + k as f64 * mean.ln() - (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
    log.exp()
}

#[derive(Default)]
struct Occupation {
    // occupied[level-1][site offset]
    occupied: Vec<Vec<u64>>,
    interlacing_failures: u64,
    replicas: u64,
}

/// One-point occupation probabilities of the interlaced particle system
/// against the discrete kernel diagonal, the level-1 Poisson law and the
/// interlacing invariant.
pub fn particle_monte_carlo(cfg: &ParticleMonteCarloConfig) -> Result<SuiteReport> {
    if cfg.levels == 0 {
        return Err(Error::Invalid("need at least one level".into()));
    }
    let stream = RngStream::new(cfg.seed, PARTICLE_STREAM);
    let width = |m: usize| (cfg.max_site + m as i64 + 1).max(0) as usize;
    let parts = chunked(&stream, cfg.replicas, cfg.chunk, |rng, count| -> Result<Occupation> {
        let mut clock = SimClock::from_rng(rng.clone());
        let mut occ = Occupation {
            occupied: (1..=cfg.levels).map(|m| vec![0; width(m)]).collect(),
            ..Default::default()
        };
        for _ in 0..count {
            clock.time = 0.0;
            let cfg_t = observe(cfg.levels, &[cfg.time], &mut clock)?.remove(0);
            if !cfg_t.is_interlaced() {
                occ.interlacing_failures += 1;
            }
            for (m, row) in cfg_t.x.iter().enumerate() {
                for &x in row {
                    let offset = x + m as i64 + 1;
                    if offset >= 0 && (offset as usize) < occ.occupied[m].len() {
                        occ.occupied[m][offset as usize] += 1;
                    }
                }
            }
            occ.replicas += 1;
        }
        Ok(occ)
    });
    let mut total = Occupation { occupied: (1..=cfg.levels).map(|m| vec![0; width(m)]).collect(), ..Default::default() };
    for part in parts {
        let part = part?;
        for (acc, row) in total.occupied.iter_mut().zip(&part.occupied) {
            for (a, b) in acc.iter_mut().zip(row) {
                *a += b;
            }
        }
        total.interlacing_failures += part.interlacing_failures;
        total.replicas += part.replicas;
    }
    let s = total.replicas as f64;
    let mut report = SuiteReport::new("particle-monte-carlo");
    for (m, row) in total.occupied.iter().enumerate() {
        let level = m + 1;
        for (offset, &count) in row.iter().enumerate() {
            let x = offset as i64 - level as i64;
            let p = SpaceTimePoint::new(x as f64, level, cfg.time);
            let predicted = kernel_discrete(&p, &p)?;
            let q = predicted.clamp(0.0, 1.0);
            let se = (q * (1.0 - q) / s).sqrt();
            report.push(CheckReport::statistical(
                format!("particles-one-point-n{level}-x{x}"),
                predicted,
                count as f64 / s,
                se,
                cfg.z_max,
            ));
        }
    }
    for (offset, &count) in total.occupied[0].iter().enumerate() {
        let q = poisson_pmf(cfg.time, offset as u64);
        report.push(CheckReport::statistical(
            format!("particles-level1-poisson-k{offset}"),
            q,
            count as f64 / s,
            (q * (1.0 - q) / s).sqrt(),
            cfg.z_max,
        ));
    }
    report.push(CheckReport::deviation(
        "particles-interlacing-failures",
        0.0,
        total.interlacing_failures as f64,
        0.5,
    ));
    Ok(report)
}

/// Rescaled one-point densities of levels `1..=levels` at time `τt/2` against
/// the diffusion-limit kernel diagonal. Every check is informational.
pub fn diffusion_smoke(cfg: &DiffusionSmokeConfig) -> Result<SuiteReport> {
    let stream = RngStream::new(cfg.seed, DIFFUSION_STREAM);
    let when = 0.5 * cfg.tau * cfg.t;
    let samples = collect_samples(&stream, cfg.replicas, cfg.chunk, |rng| {
        let mut clock = SimClock::from_rng(ChaCha20Rng::from_rng(rng));
        let snap = observe(cfg.levels, &[when], &mut clock)?.remove(0);
        Ok(snap.x.iter().map(|row| diffusion_rescale(row, cfg.t, cfg.tau)).collect())
    })?;
    let edges = uniform_edges(cfg.lo, cfg.hi, cfg.bins)?;
    let mut report = SuiteReport::new("diffusion-smoke");
    for level in 1..=cfg.levels {
        let mut counts = BinnedCounts::new(edges.clone())?;
        for s in &samples {
            counts.add_sample(&s[level - 1]);
        }
        let predicted = predicted_bin_density_fixed(
            |x| {
                let p = SpaceTimePoint::new(x, level, cfg.tau);
                Ok(kernel_diffusion_scaled(&p, &p)?.value)
            },
            &edges,
            5,
        )?;
        let peak = predicted.iter().copied().fold(0.0, f64::max);
        let allowance = cfg.bias_coefficient * peak / cfg.t.sqrt();
        let density = counts.density();
        let stderr = counts.stderr();
        for i in 0..density.len() {
            let tol = cfg.z_max * stderr[i] + allowance;
            report.push_info(CheckReport::deviation(
                format!("diffusion-n{level}[{:.3},{:.3})", edges[i], edges[i + 1]),
                predicted[i],
                density[i],
                tol,
            ));
        }
    }
    Ok(report)
}
