use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_times, complex_gaussian, hermitian_eigenvalues};
use crate::error::{Error, Result};

/// Dense Hermitian matrix; the constructor enforces `H = H*`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("Hermitian matrix must be square".into()));
        }
        let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::Invalid(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let mut m = m;
        for i in 0..m.nrows() {
            m[(i, i)].im = 0.0;
        }
        Ok(Self { m })
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::from_element(n, n, Complex64::new(0.0, 0.0)) }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut h = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            h.m[(i, i)] = Complex64::new(v, 0.0);
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.m.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Principal `n × n` submatrix (first `n` rows and columns).
    pub fn minor(&self, n: usize) -> Self {
        Self { m: self.m.view((0, 0), (n, n)).into_owned() }
    }

    /// Adds an independent Gaussian increment with density `∝ e^{−Tr(X²)/dt}`:
    /// diagonal variance `dt/2`, real and imaginary parts off the diagonal `dt/4`.
    pub fn add_gaussian_increment<R: Rng + ?Sized>(&mut self, rng: &mut R, dt: f64) {
        let n = self.dim();
        for i in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            self.m[(i, i)].re += g * (dt / 2.0).sqrt();
            for j in i + 1..n {
                let z = complex_gaussian(rng, dt / 4.0);
                self.m[(i, j)] += z;
                self.m[(j, i)] += z.conj();
            }
        }
    }
}

/// Hermitian Brownian motion `H(t)` started at 0, sampled exactly at `times`.
pub fn sample_hermitian_path<R: Rng + ?Sized>(n: usize, times: &[f64], rng: &mut R) -> Result<Vec<HermitianMatrix>> {
    check_times(times)?;
    let mut h = HermitianMatrix::zeros(n);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        h.add_gaussian_increment(rng, t - prev);
        prev = t;
        out.push(h.clone());
    }
    Ok(out)
}

/// Eigenvalues (ascending) of the principal minors `H(n)` for each `n` in `levels`.
pub fn minor_eigenvalues(h: &HermitianMatrix, levels: &[usize]) -> Result<Vec<Vec<f64>>> {
    levels
        .iter()
        .map(|&n| {
            if n == 0 || n > h.dim() {
                return Err(Error::Dimension(format!("level {n} outside 1..={}", h.dim())));
            }
            hermitian_eigenvalues(&h.minor(n))
        })
        .collect()
}

/// Minor eigenvalues along a time grid: `eigenvalues[i][j]` holds the sorted
/// eigenvalues of level `levels[j]` at `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorEigenSample {
    pub times: Vec<f64>,
    pub levels: Vec<usize>,
    pub eigenvalues: Vec<Vec<Vec<f64>>>,
}

impl MinorEigenSample {
    /// Checks `λ_k^{m+1} ≤ λ_k^m ≤ λ_{k+1}^{m+1}` for consecutive listed levels.
    pub fn is_interlaced(&self, slack: f64) -> bool {
        self.eigenvalues.iter().all(|per_time| {
            self.levels.windows(2).zip(per_time.windows(2)).all(|(lv, ev)| {
                if lv[1] != lv[0] + 1 {
                    return true;
                }
                let (low, high) = (&ev[0], &ev[1]);
                low.iter().enumerate().all(|(k, &l)| high[k] <= l + slack && l <= high[k + 1] + slack)
            })
        })
    }
}

/// Samples a Hermitian Brownian path and records minor eigenvalues.
pub fn sample_dbm_minors<R: Rng + ?Sized>(
    n: usize,
    times: &[f64],
    levels: &[usize],
    rng: &mut R,
) -> Result<MinorEigenSample> {
    let path = sample_hermitian_path(n, times, rng)?;
    let eigenvalues = path.iter().map(|h| minor_eigenvalues(h, levels)).collect::<Result<_>>()?;
    Ok(MinorEigenSample { times: times.to_vec(), levels: levels.to_vec(), eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt_sim::RngStream;

    #[test]
    fn entry_variances_follow_density() {
        let mut rng = RngStream::new(1, 0).rng();
        let samples = 40_000;
        let (mut d, mut re, mut im) = (0.0, 0.0, 0.0);
        for _ in 0..samples {
            let h = &sample_hermitian_path(2, &[1.0], &mut rng).unwrap()[0];
            d += h.get(0, 0).re.powi(2);
            re += h.get(0, 1).re.powi(2);
            im += h.get(0, 1).im.powi(2);
        }
        let n = samples as f64;
        // Variance estimators have relative stderr √(2/n) ≈ 0.7%.
        assert!((d / n - 0.5).abs() < 0.03);
        assert!((re / n - 0.25).abs() < 0.015);
        assert!((im / n - 0.25).abs() < 0.015);
    }

    #[test]
    fn minors_interlace_and_match_entries() {
        let mut rng = RngStream::new(2, 0).rng();
        for _ in 0..200 {
            let s = sample_dbm_minors(4, &[0.5, 1.0], &[1, 2, 3, 4], &mut rng).unwrap();
            assert!(s.is_interlaced(1e-12));
        }
        let h = HermitianMatrix::from_diagonal(&[1.0, 3.0]);
        assert_eq!(minor_eigenvalues(&h, &[1, 2]).unwrap(), vec![vec![1.0], vec![1.0, 3.0]]);
        let path = sample_hermitian_path(3, &[1.0], &mut rng).unwrap();
        let ev = minor_eigenvalues(&path[0], &[1]).unwrap();
        assert_eq!(ev[0][0], path[0].get(0, 0).re);
    }

    #[test]
    fn eigen_identities() {
        let mut rng = RngStream::new(3, 0).rng();
        for n in [1usize, 5, 17, 64] {
            let h = &sample_hermitian_path(n, &[1.0], &mut rng).unwrap()[0];
            let ev = hermitian_eigenvalues(h).unwrap();
            let s: f64 = ev.iter().sum();
            let s2: f64 = ev.iter().map(|x| x * x).sum();
            assert!((s - h.trace()).abs() < 1e-10 * h.frobenius_sq().sqrt().max(1.0));
            assert!((s2 - h.frobenius_sq()).abs() < 1e-10 * h.frobenius_sq());
        }
    }
}
