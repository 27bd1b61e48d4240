use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::complex_gaussian;

/// Haar-distributed `N × N` unitary: QR of a complex Ginibre matrix with the
/// columns of `Q` rotated by the phases of `diag(R)`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng, 0.5));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
