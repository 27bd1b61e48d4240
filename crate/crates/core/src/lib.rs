//! Correlation kernels of random-matrix minor processes and interlaced particle
//! systems along space-like paths, together with exact simulators and the
//! numerical and Monte Carlo checks that tie them together.
//!
//! Module overview:
//! - [`specfun`]: Hermite and Laguerre polynomials, modified Bessel functions.
//! - [`contour`]: circle and vertical-line quadrature normalized by `1/(2πi)`.
//! - [`kernels`]: the Ψ/Φ/T building blocks and the five correlation kernels.
//! - [`eynard`]: determinantal weights on finite sets and their kernel.
//! - [`rmt_sim`]: Hermitian and Wishart matrix diffusions, eigensolver, Haar unitaries.
//! - [`particles`]: the 2+1 dimensional block-and-push dynamics.
//! - [`mc_verify`]: histograms, correlation estimates, HCIZ and identity checks.

pub mod contour;
pub mod error;
pub mod eynard;
pub mod kernels;
pub mod mc_verify;
pub mod particles;
pub mod rmt_sim;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
