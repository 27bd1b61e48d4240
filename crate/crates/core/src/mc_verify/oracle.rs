use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eynard::{make_upper_triangular, random_spec, Enumeration, EynardKernel, LevelTimePoint, SpaceLikeWeightSpec};
use crate::error::Result;
use crate::rmt_sim::RngStream;

use super::report::{CheckReport, SuiteReport};

pub const ORACLE_STREAM: u64 = 31;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EynardOracleConfig {
    pub seed: u64,
    pub specs: usize,
    pub max_levels: usize,
    pub max_set: usize,
    pub max_copies: usize,
    /// Every `triangular_every`-th spec is made upper triangular.
    pub triangular_every: usize,
    /// Random three-point sets compared per spec.
    pub triples: usize,
    pub tol: f64,
}

impl Default for EynardOracleConfig {
    fn default() -> Self {
        Self { seed: 2024, specs: 50, max_levels: 3, max_set: 4, max_copies: 1, triangular_every: 5, triples: 30, tol: 1e-9 }
    }
}

fn all_points(spec: &SpaceLikeWeightSpec) -> Vec<LevelTimePoint> {
    let mut out = Vec::new();
    for (n, (&size, &copies)) in spec.set_sizes.iter().zip(&spec.copies).enumerate() {
        for a in 0..=copies {
            for x in 0..size {
                out.push(LevelTimePoint::new(n + 1, a, x));
            }
        }
    }
    out
}

fn det_of<K>(kernel: K, points: &[LevelTimePoint]) -> Result<Complex64>
where
    K: Fn(&LevelTimePoint, &LevelTimePoint) -> Result<Complex64>,
{
    let k = points.len();
    let mut m = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = kernel(&points[i], &points[j])?;
        }
    }
    Ok(m.determinant())
}

struct MaxDeviation {
    worst: f64,
}

impl MaxDeviation {
    fn new() -> Self {
        Self { worst: 0.0 }
    }

    fn record(&mut self, predicted: Complex64, estimate: Complex64) {
        let d = (estimate - predicted).norm();
        if !(d <= self.worst) {
            self.worst = d;
        }
    }

    fn report(&self, name: String, tol: f64) -> CheckReport {
        CheckReport::deviation(name, 0.0, self.worst, tol)
    }
}

fn spec_checks(
    index: usize,
    spec: &SpaceLikeWeightSpec,
    triangular: bool,
    cfg: &EynardOracleConfig,
    rng: &mut impl Rng,
) -> Result<Vec<CheckReport>> {
    let kernel = EynardKernel::new(spec)?;
    let brute = Enumeration::new(spec)?;
    let points = all_points(spec);
    let mut sets: Vec<Vec<LevelTimePoint>> = points.iter().map(|&p| vec![p]).collect();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            sets.push(vec![points[i], points[j]]);
        }
    }
    if points.len() >= 3 {
        for _ in 0..cfg.triples {
            sets.push(points.choose_multiple(rng, 3).copied().collect());
        }
    }
    let tag = if triangular { "triangular" } else { "general" };
    let mut general = MaxDeviation::new();
    let mut simplified = MaxDeviation::new();
    for set in &sets {
        let exact = brute.correlation(set)?;
        general.record(exact, kernel.correlation(set)?);
        if triangular {
            simplified.record(exact, det_of(|a, b| kernel.kernel_triangular(a, b), set)?);
        }
    }
    let mut out = vec![general.report(format!("eynard-spec{index:02}-{tag}-kernel"), cfg.tol)];
    if triangular {
        out.push(simplified.report(format!("eynard-spec{index:02}-triangular-simplified"), cfg.tol));
    }
    Ok(out)
}

/// Correlations from kernel determinants against brute-force enumeration of
/// all configurations, on random space-like weight specs. Each check's
/// estimate is the worst absolute deviation over all one- and two-point sets and a random
/// selection of three-point sets.
pub fn eynard_oracle(cfg: &EynardOracleConfig) -> Result<SuiteReport> {
    let mut rng = RngStream::new(cfg.seed, ORACLE_STREAM).rng();
    let mut report = SuiteReport::new("eynard-oracle");
    for i in 0..cfg.specs {
        let levels = rng.random_range(1..=cfg.max_levels.max(1));
        let mut spec = random_spec(&mut rng, levels, cfg.max_set, cfg.max_copies);
        let triangular = cfg.triangular_every > 0 && i % cfg.triangular_every == 0;
        if triangular {
            make_upper_triangular(&mut spec, &mut rng)?;
        }
        match spec_checks(i, &spec, triangular, cfg, &mut rng) {
            Ok(checks) => checks.into_iter().for_each(|c| report.push(c)),
            Err(_) => report.push(CheckReport::errored(format!("eynard-spec{i:02}"), 0.0)),
        }
    }
    Ok(report)
}
