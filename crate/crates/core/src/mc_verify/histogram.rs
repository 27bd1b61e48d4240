use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::contour::integrate_real_adaptive;
use crate::error::{Error, Result};

use super::report::CheckReport;

/// Smallest bin width chosen by [`freedman_diaconis_edges`].
pub const DEFAULT_MIN_BIN_WIDTH: f64 = 0.05;

/// How to bin a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Bins {
    FreedmanDiaconis { min_width: f64 },
    Uniform { lo: f64, hi: f64, count: usize },
    Edges(Vec<f64>),
}

impl Default for Bins {
    fn default() -> Self {
        Bins::FreedmanDiaconis { min_width: DEFAULT_MIN_BIN_WIDTH }
    }
}

impl Bins {
    pub fn edges(&self, samples: &[f64]) -> Result<Vec<f64>> {
        match self {
            Bins::FreedmanDiaconis { min_width } => freedman_diaconis_edges(samples, *min_width),
            Bins::Uniform { lo, hi, count } => uniform_edges(*lo, *hi, *count),
            Bins::Edges(e) => {
                check_edges(e)?;
                Ok(e.clone())
            }
        }
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::Invalid("need at least two bin edges".into()));
    }
    if !edges.iter().all(|e| e.is_finite()) || !edges.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Invalid("bin edges must be finite and strictly ascending".into()));
    }
    Ok(())
}

pub fn uniform_edges(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !(hi > lo) {
        return Err(Error::Invalid(format!("bad uniform bins [{lo}, {hi}] × {count}")));
    }
    let h = (hi - lo) / count as f64;
    Ok((0..=count).map(|i| if i == count { hi } else { lo + i as f64 * h }).collect())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// Edges of width `max(2·IQR·n^{−1/3}, min_width)` covering the sample range.
pub fn freedman_diaconis_edges(samples: &[f64], min_width: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Invalid("empty sample".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let width = (2.0 * iqr * (sorted.len() as f64).powf(-1.0 / 3.0)).max(min_width);
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let count = (((hi - lo) / width).ceil() as usize).max(1);
    Ok((0..=count).map(|i| lo + i as f64 * width).collect())
}

/// Counts of a sample in fixed bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: usize,
    pub underflow: u64,
    pub overflow: u64,
}

/// Index of the bin `[e_i, e_{i+1})` containing `x`; the last bin is closed.
fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if x < edges[0] || x > edges[last] || x.is_nan() {
        return None;
    }
    if x == edges[last] {
        return Some(last - 1);
    }
    Some(edges.partition_point(|&e| e <= x) - 1)
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        let bins = edges.len() - 1;
        Ok(Self { edges, counts: vec![0; bins], total: 0, underflow: 0, overflow: 0 })
    }

    pub fn add(&mut self, x: f64) {
        self.total += 1;
        match bin_index(&self.edges, x) {
            Some(i) => self.counts[i] += 1,
            None if x < self.edges[0] => self.underflow += 1,
            None => self.overflow += 1,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `counts / (total · width)`.
    pub fn density(&self) -> Vec<f64> {
        let n = self.total.max(1) as f64;
        self.counts.iter().zip(self.widths()).map(|(&c, w)| c as f64 / (n * w)).collect()
    }

    /// Binomial standard error of [`Self::density`].
    pub fn density_stderr(&self) -> Vec<f64> {
        let n = self.total.max(1) as f64;
        self.counts
            .iter()
            .zip(self.widths())
            .map(|(&c, w)| {
                let p = c as f64 / n;
                (p * (1.0 - p) / n).sqrt() / w
            })
            .collect()
    }

    /// CSV with header `lo,hi,count,density,stderr`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lo,hi,count,density,stderr")?;
        let d = self.density();
        let s = self.density_stderr();
        for i in 0..self.bins() {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{:.16e},{:.16e}",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                d[i],
                s[i]
            )?;
        }
        Ok(())
    }
}

/// Histogram of `samples` normalized as a probability density.
pub fn empirical_density(samples: &[f64], bins: &Bins) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::Invalid("empty sample".into()));
    }
    let mut h = Histogram::new(bins.edges(samples)?)?;
    for &x in samples {
        h.add(x);
    }
    Ok(h)
}

/// Per-bin point counts accumulated sample by sample, for point processes
/// with several points per sample. Standard errors come from the sample
/// variance of the per-sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCounts {
    pub edges: Vec<f64>,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub samples: usize,
}

impl BinnedCounts {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        let bins = edges.len() - 1;
        Ok(Self { edges, sum: vec![0.0; bins], sum_sq: vec![0.0; bins], samples: 0 })
    }

    pub fn add_sample(&mut self, points: &[f64]) {
        let mut local = vec![0u32; self.sum.len()];
        for &x in points {
            if let Some(i) = bin_index(&self.edges, x) {
                local[i] += 1;
            }
        }
        for (i, &c) in local.iter().enumerate() {
            let c = c as f64;
            self.sum[i] += c;
            self.sum_sq[i] += c * c;
        }
        self.samples += 1;
    }

    /// Adds another accumulator with identical edges.
    pub fn merge(&mut self, other: &BinnedCounts) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::Dimension("bin edges differ".into()));
        }
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.samples += other.samples;
        Ok(())
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Mean number of points per unit length in each bin.
    pub fn density(&self) -> Vec<f64> {
        let s = self.samples.max(1) as f64;
        self.sum.iter().zip(self.widths()).map(|(c, w)| c / (s * w)).collect()
    }

    pub fn stderr(&self) -> Vec<f64> {
        let s = self.samples as f64;
        if self.samples < 2 {
            return vec![f64::INFINITY; self.sum.len()];
        }
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .zip(self.widths())
            .map(|((a, b), w)| {
                let mean = a / s;
                let var = (b / s - mean * mean).max(0.0) * s / (s - 1.0);
                (var / s).sqrt() / w
            })
            .collect()
    }
}

/// Bin averages `(1/|B|) ∫_B f` of a predicted density.
pub fn predicted_bin_density<F>(f: F, edges: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    check_edges(edges)?;
    edges
        .windows(2)
        .map(|w| Ok(integrate_real_adaptive(&f, w[0], w[1], tol)? / (w[1] - w[0])))
        .collect()
}

/// Bin averages of a smooth predicted density by `order`-point Gauss–Legendre
/// per bin.
pub fn predicted_bin_density_fixed<F>(f: F, edges: &[f64], order: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    check_edges(edges)?;
    let (xs, ws) = crate::contour::gauss_legendre(order);
    edges
        .windows(2)
        .map(|e| {
            let mut total = 0.0;
            for (x, w) in xs.iter().zip(&ws) {
                total += 0.5 * w * f(e[0] + 0.5 * (x + 1.0) * (e[1] - e[0]))?;
            }
            Ok(total)
        })
        .collect()
}

/// Merges adjacent bins left to right until each expects at least
/// `min_expected` points over `samples` draws under `predicted`; a sparse
/// remainder joins the last merged bin. Merged predictions are width-weighted
/// averages, so no new kernel evaluations are needed.
pub fn merge_sparse_bins(
    edges: &[f64],
    predicted: &[f64],
    samples: usize,
    min_expected: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_edges(edges)?;
    if predicted.len() + 1 != edges.len() {
        return Err(Error::Dimension("one prediction per bin is required".into()));
    }
    let s = samples as f64;
    let mut out_edges = vec![edges[0]];
    let mut out_pred: Vec<f64> = Vec::new();
    let mut mass = 0.0;
    for i in 0..predicted.len() {
        mass += predicted[i] * (edges[i + 1] - edges[i]);
        if mass * s >= min_expected {
            let lo = *out_edges.last().expect("edges start non-empty");
            out_pred.push(mass / (edges[i + 1] - lo));
            out_edges.push(edges[i + 1]);
            mass = 0.0;
        }
    }
    let end = edges[edges.len() - 1];
    if *out_edges.last().expect("edges start non-empty") < end {
        if out_pred.is_empty() {
            out_pred.push(mass / (end - edges[0]));
            out_edges.push(end);
        } else {
            let k = out_pred.len();
            let (lo, hi) = (out_edges[k - 1], out_edges[k]);
            let total = out_pred[k - 1] * (hi - lo) + mass;
            out_edges[k] = end;
            out_pred[k - 1] = total / (end - lo);
        }
    }
    Ok((out_edges, out_pred))
}

/// One check per bin comparing `counts` with `predicted`. The standard error
/// is binomial under the prediction: with `q = ρ̄·|B|` the expected count per
/// sample, `σ = √(q(1−q)/S)/|B|`.
pub fn compare_bins(name: &str, counts: &BinnedCounts, predicted: &[f64], z_max: f64) -> Vec<CheckReport> {
    let density = counts.density();
    let widths = counts.widths();
    let s = counts.samples.max(1) as f64;
    (0..density.len())
        .map(|i| {
            let q = (predicted[i] * widths[i]).clamp(0.0, 1.0);
            let se = (q * (1.0 - q) / s).sqrt() / widths[i];
            CheckReport::statistical(
                format!("{name}[{:.4},{:.4})", counts.edges[i], counts.edges[i + 1]),
                predicted[i],
                density[i],
                se,
                z_max,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    use crate::rmt_sim::RngStream;

    #[test]
    fn uniform_draws_fill_bins_evenly() {
        let mut rng = RngStream::new(1, 0).rng();
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let h = empirical_density(&xs, &Bins::Uniform { lo: 0.0, hi: 1.0, count: 10 }).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>() as usize, h.total);
        for (d, se) in h.density().iter().zip(h.density_stderr()) {
            assert!((d - 1.0).abs() < 4.0 * se, "{d} ± {se}");
        }
    }

    #[test]
    fn gaussian_draws_match_density() {
        let mut rng = RngStream::new(2, 0).rng();
        let xs: Vec<f64> = (0..100_000).map(|_| rng.sample::<f64, _>(StandardNormal) / 2f64.sqrt()).collect();
        let h = empirical_density(&xs, &Bins::Uniform { lo: -2.0, hi: 2.0, count: 16 }).unwrap();
        let pred =
            predicted_bin_density(|x| (-x * x).exp() / std::f64::consts::PI.sqrt(), &h.edges, 1e-12).unwrap();
        for ((d, se), p) in h.density().iter().zip(h.density_stderr()).zip(pred) {
            assert!((d - p).abs() < 4.0 * se, "{d} vs {p} ± {se}");
        }
        let mass: f64 = h.density().iter().zip(h.widths()).map(|(d, w)| d * w).sum();
        assert!(mass <= 1.0);
    }

    #[test]
    fn bin_halving_is_consistent() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.618).fract()).collect();
        let coarse = empirical_density(&xs, &Bins::Uniform { lo: 0.0, hi: 1.0, count: 5 }).unwrap();
        let fine = empirical_density(&xs, &Bins::Uniform { lo: 0.0, hi: 1.0, count: 10 }).unwrap();
        for i in 0..5 {
            assert_eq!(coarse.counts[i], fine.counts[2 * i] + fine.counts[2 * i + 1]);
        }
    }

    #[test]
    fn freedman_diaconis_floor() {
        let xs = [0.0, 0.001, 0.002, 0.003, 1.0];
        let e = freedman_diaconis_edges(&xs, 0.05).unwrap();
        assert!(e.windows(2).all(|w| w[1] - w[0] >= 0.05 - 1e-15));
        assert!(e[0] <= 0.0 && *e.last().unwrap() >= 1.0);
        assert!(empirical_density(&[], &Bins::default()).is_err());
    }

    #[test]
    fn binned_counts_merge_and_outliers() {
        let edges = uniform_edges(0.0, 1.0, 2).unwrap();
        let mut a = BinnedCounts::new(edges.clone()).unwrap();
        a.add_sample(&[0.1, 0.2, 0.7]);
        let mut b = BinnedCounts::new(edges).unwrap();
        b.add_sample(&[0.6, 1.5]);
        a.merge(&b).unwrap();
        assert_eq!(a.samples, 2);
        assert_eq!(a.sum, vec![2.0, 2.0]);
        assert_eq!(a.sum_sq, vec![4.0, 2.0]);
        let mut h = Histogram::new(vec![0.0, 1.0]).unwrap();
        h.add(-1.0);
        h.add(2.0);
        h.add(1.0);
        assert_eq!((h.underflow, h.overflow, h.counts[0]), (1, 1, 1));
    }

    #[test]
    fn sparse_bins_merge_to_minimum_count() {
        let edges = uniform_edges(0.0, 4.0, 8).unwrap();
        let pred = vec![0.001, 0.01, 0.3, 0.5, 0.5, 0.3, 0.01, 0.001];
        let (e, p) = merge_sparse_bins(&edges, &pred, 1000, 5.0).unwrap();
        assert_eq!(e.first(), Some(&0.0));
        assert_eq!(e.last(), Some(&4.0));
        let total: f64 = e.windows(2).zip(&p).map(|(w, d)| d * (w[1] - w[0])).sum();
        let expected: f64 = pred.iter().map(|d| d * 0.5).sum();
        assert!((total - expected).abs() < 1e-15);
        for (w, d) in e.windows(2).zip(&p) {
            assert!(d * (w[1] - w[0]) * 1000.0 >= 5.0);
        }
        let (e, _) = merge_sparse_bins(&edges, &pred, 10_000_000, 5.0).unwrap();
        assert_eq!(e, edges);
    }
}
