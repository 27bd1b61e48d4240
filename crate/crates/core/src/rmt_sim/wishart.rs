use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{check_times, complex_gaussian, hermitian_eigenvalues, HermitianMatrix, MinorEigenSample};
use crate::error::{Error, Result};

/// Rectangular complex matrix `A` of shape `p × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectComplexMatrix {
    pub m: DMatrix<Complex64>,
}

impl RectComplexMatrix {
    pub fn zeros(p: usize, n: usize) -> Self {
        Self { m: DMatrix::from_element(p, n, Complex64::new(0.0, 0.0)) }
    }

    /// Adds an increment with density `∝ e^{−Tr(X*X)/dt}`: real and imaginary
    /// parts of each entry have variance `dt/2`.
    pub fn add_gaussian_increment<R: Rng + ?Sized>(&mut self, rng: &mut R, dt: f64) {
        for v in self.m.iter_mut() {
            *v += complex_gaussian(rng, dt / 2.0);
        }
    }

    /// `A*A` restricted to the first `n` columns.
    pub fn gram(&self, n: usize) -> HermitianMatrix {
        let cols = self.m.columns(0, n);
        let g = cols.adjoint() * cols;
        HermitianMatrix::new(g).expect("Gram matrices are Hermitian")
    }
}

fn check_shape(p: usize, n: usize) -> Result<()> {
    if n == 0 || p < n {
        return Err(Error::Dimension(format!("need p ≥ n ≥ 1, got p = {p}, n = {n}")));
    }
    Ok(())
}

/// Eigenvalues of `A(n,t)*A(n,t)` at each time, for a complex Brownian `p × n` matrix.
pub fn sample_wishart_path<R: Rng + ?Sized>(p: usize, n: usize, times: &[f64], rng: &mut R) -> Result<Vec<Vec<f64>>> {
    Ok(sample_wishart_minors(p, n, times, &[n], rng)?.eigenvalues.into_iter().map(|mut v| v.remove(0)).collect())
}

/// Eigenvalues of `A(m,t)*A(m,t)` for each `m` in `levels`, where `A(m,t)`
/// keeps the first `m` columns of a `p × n` complex Brownian matrix.
pub fn sample_wishart_minors<R: Rng + ?Sized>(
    p: usize,
    n: usize,
    times: &[f64],
    levels: &[usize],
    rng: &mut R,
) -> Result<MinorEigenSample> {
    check_shape(p, n)?;
    check_times(times)?;
    if levels.iter().any(|&m| m == 0 || m > n) {
        return Err(Error::Dimension(format!("levels must lie in 1..={n}")));
    }
    let mut a = RectComplexMatrix::zeros(p, n);
    let mut prev = 0.0;
    let mut eigenvalues = Vec::with_capacity(times.len());
    for &t in times {
        a.add_gaussian_increment(rng, t - prev);
        prev = t;
        let per_level = levels.iter().map(|&m| hermitian_eigenvalues(&a.gram(m))).collect::<Result<Vec<_>>>()?;
        eigenvalues.push(per_level);
    }
    Ok(MinorEigenSample { times: times.to_vec(), levels: levels.to_vec(), eigenvalues })
}
