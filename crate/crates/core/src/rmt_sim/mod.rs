//! Exact samplers for Hermitian Brownian motion and the Laguerre (Wishart)
//! process, a Hermitian eigensolver, and Haar-distributed unitary matrices.

mod eigen;
mod haar;
mod hermitian;
mod rng;
mod wishart;

pub use eigen::{hermitian_eigenvalues, symmetric_tridiagonal_eigenvalues, tridiagonalize, MAX_QL_ITERATIONS};
pub use haar::haar_unitary;
pub use hermitian::{minor_eigenvalues, sample_dbm_minors, sample_hermitian_path, HermitianMatrix, MinorEigenSample};
pub use rng::{chunked, complex_gaussian, RngStream};
pub use wishart::{sample_wishart_minors, sample_wishart_path, RectComplexMatrix};

use crate::error::{Error, Result};

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Invalid("at least one time is required".into()));
    }
    if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invalid("times must be positive, finite and strictly increasing".into()));
    }
    Ok(())
}
