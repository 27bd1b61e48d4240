use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmt_sim::{chunked, haar_unitary, RngStream};
use crate::specfun::{bessel_i, factorial};

use super::report::{CheckReport, SuiteReport};

/// Smallest accepted `|Δ(a)|`, `|Δ(b)|`.
pub const MIN_VANDERMONDE: f64 = 1e-8;

/// Samples per independent random stream.
pub const HCIZ_CHUNK: usize = 10_000;

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMean {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// `Π_{i<j} (v_j − v_i)`.
pub fn vandermonde(v: &[f64]) -> f64 {
    let mut d = 1.0;
    for j in 0..v.len() {
        for i in 0..j {
            d *= v[j] - v[i];
        }
    }
    d
}

fn superfactorial(n: usize) -> f64 {
    (1..=n).map(factorial).product()
}

fn check_spectra(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::Dimension(format!("spectra of lengths {} and {}", a.len(), b.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite spectrum".into()));
    }
    let (da, db) = (vandermonde(a), vandermonde(b));
    if da.abs() < MIN_VANDERMONDE || db.abs() < MIN_VANDERMONDE {
        return Err(Error::Domain(format!("near-degenerate spectra: Δ(a) = {da:e}, Δ(b) = {db:e}")));
    }
    Ok((da, db))
}

/// `Π_{p=1}^{N−1} p! · det[e^{a_i b_j}] / (Δ(a) Δ(b))`.
pub fn hciz_closed_form(a: &[f64], b: &[f64]) -> Result<f64> {
    let (da, db) = check_spectra(a, b)?;
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| (a[i] * b[j]).exp());
    Ok(superfactorial(n - 1) * m.determinant() / (da * db))
}

/// Rectangular analogue for `N₁ ≥ N₂` with positive `a`, `b` of length `N₂`:
/// `Π_{p<N₂} p! Π_{q<N₁} q! / Π_{r<N₁−N₂} r! · det[I_{N₁−N₂}(2√(a_i b_j))]
/// / (Δ(a) Δ(b) Π_i (a_i b_i)^{(N₁−N₂)/2})`. Empty products equal one.
pub fn hciz_rect_closed_form(n1: usize, n2: usize, a: &[f64], b: &[f64]) -> Result<f64> {
    check_rect(n1, n2, a, b)?;
    let (da, db) = check_spectra(a, b)?;
    let nu = (n1 - n2) as i64;
    let mut m = DMatrix::zeros(n2, n2);
    for i in 0..n2 {
        for j in 0..n2 {
            m[(i, j)] = bessel_i(nu, 2.0 * (a[i] * b[j]).sqrt())?;
        }
    }
    let prefactor = superfactorial(n2 - 1) * superfactorial(n1 - 1) / superfactorial((n1 - n2).saturating_sub(1));
    let power: f64 = a.iter().zip(b).map(|(x, y)| (x * y).powf(0.5 * nu as f64)).product();
    Ok(prefactor * m.determinant() / (da * db * power))
}

fn check_rect(n1: usize, n2: usize, a: &[f64], b: &[f64]) -> Result<()> {
    if n2 == 0 || n1 < n2 {
        return Err(Error::Dimension(format!("need N1 ≥ N2 ≥ 1, got ({n1}, {n2})")));
    }
    if a.len() != n2 || b.len() != n2 {
        return Err(Error::Dimension(format!("spectra must have length N2 = {n2}")));
    }
    if a.iter().chain(b).any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("rectangular spectra must be positive".into()));
    }
    Ok(())
}

fn mc_mean<F>(stream: &RngStream, samples: usize, f: F) -> Result<MonteCarloMean>
where
    F: Fn(&mut rand_chacha::ChaCha20Rng) -> f64 + Sync,
{
    if samples < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let parts = chunked(stream, samples, HCIZ_CHUNK, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..count {
            let v = f(rng);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (s, s2) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(MonteCarloMean { mean, stderr: (var / n).sqrt(), samples })
}

/// Haar average of `exp(Tr(A U B U*))` with `A = diag(a)`, `B = diag(b)`.
pub fn hciz_monte_carlo(a: &[f64], b: &[f64], samples: usize, stream: &RngStream) -> Result<MonteCarloMean> {
    check_spectra(a, b)?;
    let n = a.len();
    mc_mean(stream, samples, |rng| {
        let u = haar_unitary(n, rng);
        let mut tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr += a[i] * b[j] * u[(i, j)].norm_sqr();
            }
        }
        tr.exp()
    })
}

/// Double Haar average of `exp(Tr(A U B V*) + Tr(B* U* A* V))` with
/// `U ∈ U(N₂)`, `V ∈ U(N₁)`, `A*A = diag(a)` and `B B* = diag(b)`.
pub fn hciz_rect_monte_carlo(
    n1: usize,
    n2: usize,
    a: &[f64],
    b: &[f64],
    samples: usize,
    stream: &RngStream,
) -> Result<MonteCarloMean> {
    check_rect(n1, n2, a, b)?;
    check_spectra(a, b)?;
    let sa: Vec<f64> = a.iter().map(|v| v.sqrt()).collect();
    let sb: Vec<f64> = b.iter().map(|v| v.sqrt()).collect();
    mc_mean(stream, samples, |rng| {
        let u = haar_unitary(n2, rng);
        let v = haar_unitary(n1, rng);
        let mut tr = 0.0;
        for i in 0..n2 {
            for k in 0..n2 {
                tr += sa[i] * sb[k] * (u[(i, k)] * v[(i, k)].conj()).re;
            }
        }
        (2.0 * tr).exp()
    })
}

/// Monte Carlo check of the square formula, gated on `|z| < z_max`.
pub fn hciz_check(a: &[f64], b: &[f64], samples: usize, stream: &RngStream, z_max: f64) -> Result<CheckReport> {
    let predicted = hciz_closed_form(a, b)?;
    let mc = hciz_monte_carlo(a, b, samples, stream)?;
    Ok(CheckReport::statistical(format!("hciz N={}", a.len()), predicted, mc.mean, mc.stderr, z_max))
}

/// Monte Carlo check of the rectangular formula, gated on `|z| < z_max`.
pub fn hciz_rect_check(
    n1: usize,
    n2: usize,
    a: &[f64],
    b: &[f64],
    samples: usize,
    stream: &RngStream,
    z_max: f64,
) -> Result<CheckReport> {
    let predicted = hciz_rect_closed_form(n1, n2, a, b)?;
    let mc = hciz_rect_monte_carlo(n1, n2, a, b, samples, stream)?;
    Ok(CheckReport::statistical(format!("hciz-rect N1={n1} N2={n2}"), predicted, mc.mean, mc.stderr, z_max))
}

/// First stream selector of [`hciz_suite`]; case `i` uses `HCIZ_STREAM + i`.
pub const HCIZ_STREAM: u64 = 41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcizSuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub z_max: f64,
}

impl Default for HcizSuiteConfig {
    fn default() -> Self {
        Self { seed: 2024, samples: 1_000_000, z_max: 4.0 }
    }
}

/// Square formula at `N = 2, 3` and rectangular formula at
/// `(N₁, N₂) ∈ {(1,1), (2,1), (2,2)}`, each against its own Haar stream.
pub fn hciz_suite(cfg: &HcizSuiteConfig) -> Result<SuiteReport> {
    let (s, z) = (cfg.samples, cfg.z_max);
    let stream = |i: u64| RngStream::new(cfg.seed, HCIZ_STREAM + i);
    let mut report = SuiteReport::new("hciz");
    report.push(hciz_check(&[0.3, 0.9], &[0.2, 0.7], s, &stream(0), z)?);
    report.push(hciz_check(&[0.2, 0.5, 0.9], &[0.1, 0.4, 0.8], s, &stream(1), z)?);
    report.push(hciz_rect_check(1, 1, &[0.6], &[0.8], s, &stream(2), z)?);
    report.push(hciz_rect_check(2, 1, &[0.6], &[0.8], s, &stream(3), z)?);
    report.push(hciz_rect_check(2, 2, &[0.3, 0.9], &[0.2, 0.7], s, &stream(4), z)?);
    Ok(report)
}
