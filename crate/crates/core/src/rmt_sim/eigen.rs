use nalgebra::DMatrix;
use num_complex::Complex64;

use super::HermitianMatrix;
use crate::error::{Error, Result};

/// Iteration cap per eigenvalue in the QL sweep.
pub const MAX_QL_ITERATIONS: usize = 60;

/// Householder reduction of a Hermitian matrix to a real symmetric
/// tridiagonal matrix with the same spectrum: returns `(diagonal, off_diagonal)`.
/// The complex sub-diagonal is made real by a diagonal unitary similarity.
pub fn tridiagonalize(h: &HermitianMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.dim();
    let mut a: DMatrix<Complex64> = h.as_matrix().clone();
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v = vec![zero; n];
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // A ← (I − 2vv*) A (I − 2vv*) = A − 2vw* − 2wv* + 4(v*w)vv*, with w = Av.
        let mut w = vec![zero; n];
        for i in 0..n {
            let mut s = zero;
            for j in k + 1..n {
                s += a[(i, j)] * v[j];
            }
            w[i] = s;
        }
        let vw: Complex64 = (k + 1..n).map(|i| v[i].conj() * w[i]).sum();
        for i in 0..n {
            for j in 0..n {
                let upd = 2.0 * v[i] * w[j].conj() + 2.0 * w[i] * v[j].conj() - 4.0 * vw * v[i] * v[j].conj();
                a[(i, j)] -= upd;
            }
        }
    }
    let d = (0..n).map(|i| a[(i, i)].re).collect();
    let e = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)].norm()).collect();
    (d, e)
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit-shift QL,
/// returned in ascending order.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if off.len() + 1 != n.max(1) {
        return Err(Error::Dimension("off-diagonal must have length n − 1".into()));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenNoConvergence { iterations: MAX_QL_ITERATIONS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// All eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    if h.dim() == 0 {
        return Ok(Vec::new());
    }
    let (d, e) = tridiagonalize(h);
    symmetric_tridiagonal_eigenvalues(&d, &e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt_sim::{complex_gaussian, RngStream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_examples() {
        let h = HermitianMatrix::from_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(hermitian_eigenvalues(&h).unwrap(), vec![-1.0, 2.0, 3.0]);
        let h = HermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)])).unwrap();
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert!((ev[0] - 0.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    /// Number of eigenvalues below `x` from the Sturm sequence of the tridiagonal form.
    fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
        let mut count = 0;
        let mut q = d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..d.len() {
            let denom = if q == 0.0 { f64::EPSILON } else { q };
            q = d[i] - x - e[i - 1] * e[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn matches_sturm_bisection() {
        let mut rng = RngStream::new(9, 0).rng();
        let n = 6;
        let mut m = DMatrix::from_element(n, n, c(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = c(complex_gaussian(&mut rng, 1.0).re, 0.0);
            for j in i + 1..n {
                let z = complex_gaussian(&mut rng, 0.5);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let h = HermitianMatrix::new(m).unwrap();
        let (d, e) = tridiagonalize(&h);
        let ev = hermitian_eigenvalues(&h).unwrap();
        for (k, &lam) in ev.iter().enumerate() {
            let (mut lo, mut hi) = (-50.0, 50.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(&d, &e, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            assert!((lam - 0.5 * (lo + hi)).abs() < 1e-8, "{lam} vs {}", 0.5 * (lo + hi));
        }
    }
}
