use serde::{Deserialize, Serialize};

use crate::contour::gauss_legendre;
use crate::error::{Error, Result};

/// Interval `[lo, hi)` of the point coordinate `coord` (for instance a
/// (level, time) index of a sampled configuration).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coord: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Cell {
    pub fn new(coord: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid(format!("empty cell [{lo}, {hi})")));
        }
        Ok(Self { coord, lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn count(&self, sample: &[Vec<f64>]) -> Result<usize> {
        let points = sample
            .get(self.coord)
            .ok_or_else(|| Error::Dimension(format!("sample has no coordinate {}", self.coord)))?;
        Ok(points.iter().filter(|&&x| x >= self.lo && x < self.hi).count())
    }
}

/// Empirical correlation function averaged over one or two cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub cells: Vec<Cell>,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let (mut n, mut s, mut s2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        s += v;
        s2 += v * v;
    }
    if n == 0 {
        return (f64::NAN, f64::INFINITY, 0);
    }
    let nf = n as f64;
    let mean = s / nf;
    let stderr = if n > 1 { ((s2 / nf - mean * mean).max(0.0) / (nf - 1.0)).sqrt() } else { f64::INFINITY };
    (mean, stderr, n)
}

/// `E[N_A] / |A|` where each sample lists the points of every coordinate.
pub fn empirical_one_point(samples: &[Vec<Vec<f64>>], cell: &Cell) -> Result<CorrelationEstimate> {
    if samples.is_empty() {
        return Err(Error::Invalid("no samples".into()));
    }
    let counts = samples.iter().map(|s| cell.count(s).map(|c| c as f64)).collect::<Result<Vec<_>>>()?;
    let (mean, se, n) = mean_and_stderr(counts.into_iter());
    Ok(CorrelationEstimate { cells: vec![*cell], estimate: mean / cell.width(), stderr: se / cell.width(), samples: n })
}

/// `E[N_A N_B] / (|A||B|)`, the cell average of the two-point correlation
/// function. Cells on the same coordinate must be disjoint or identical; an
/// identical pair returns the one-point estimate.
pub fn empirical_pair_correlation(samples: &[Vec<Vec<f64>>], a: &Cell, b: &Cell) -> Result<CorrelationEstimate> {
    if a == b {
        return empirical_one_point(samples, a);
    }
    if a.coord == b.coord && a.lo < b.hi && b.lo < a.hi {
        return Err(Error::Invalid("cells on one coordinate must be disjoint or identical".into()));
    }
    if samples.is_empty() {
        return Err(Error::Invalid("no samples".into()));
    }
    let products = samples
        .iter()
        .map(|s| Ok((a.count(s)? * b.count(s)?) as f64))
        .collect::<Result<Vec<_>>>()?;
    let (mean, se, n) = mean_and_stderr(products.into_iter());
    let area = a.width() * b.width();
    Ok(CorrelationEstimate { cells: vec![*a, *b], estimate: mean / area, stderr: se / area, samples: n })
}

/// `(1/(|A||B|)) ∫_A ∫_B f(x, y)` by a tensor Gauss–Legendre rule.
pub fn cell_average_2d<F>(f: F, a: &Cell, b: &Cell, order: usize) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let (xs, ws) = gauss_legendre(order);
    let map = |c: &Cell, u: f64| c.lo + 0.5 * (u + 1.0) * c.width();
    let mut total = 0.0;
    for (u, wu) in xs.iter().zip(&ws) {
        for (v, wv) in xs.iter().zip(&ws) {
            total += 0.25 * wu * wv * f(map(a, *u), map(b, *v))?;
        }
    }
    Ok(total)
}

/// `det [[K(x,x), K(x,y)], [K(y,x), K(y,y)]]`.
pub fn two_point_determinant<K>(kernel: K, x: f64, y: f64) -> Result<f64>
where
    K: Fn(f64, f64) -> Result<f64>,
{
    Ok(kernel(x, x)? * kernel(y, y)? - kernel(x, y)? * kernel(y, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};

    use crate::rmt_sim::RngStream;

    fn poisson_samples(n: usize, rates: [f64; 2]) -> Vec<Vec<Vec<f64>>> {
        let mut rng = RngStream::new(5, 0).rng();
        (0..n)
            .map(|_| {
                rates
                    .iter()
                    .map(|&r| {
                        let k: f64 = Poisson::new(r).unwrap().sample(&mut rng);
                        (0..k as usize).map(|_| rng.random::<f64>()).collect()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn independent_process_factorizes() {
        let s = poisson_samples(50_000, [3.0, 2.0]);
        let a = Cell::new(0, 0.1, 0.4).unwrap();
        let b = Cell::new(1, 0.5, 0.9).unwrap();
        let e = empirical_pair_correlation(&s, &a, &b).unwrap();
        assert!((e.estimate - 6.0).abs() < 3.0 * e.stderr, "{e:?}");
        let c = Cell::new(0, 0.6, 0.8).unwrap();
        let e = empirical_pair_correlation(&s, &a, &c).unwrap();
        assert!((e.estimate - 9.0).abs() < 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn identical_cell_is_one_point() {
        let s = poisson_samples(20_000, [3.0, 2.0]);
        let a = Cell::new(1, 0.0, 0.5).unwrap();
        let pair = empirical_pair_correlation(&s, &a, &a).unwrap();
        assert_eq!(pair, empirical_one_point(&s, &a).unwrap());
        assert!((pair.estimate - 2.0).abs() < 3.0 * pair.stderr);
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(Cell::new(0, 1.0, 1.0).is_err());
        let s = poisson_samples(10, [1.0, 1.0]);
        let a = Cell::new(0, 0.0, 0.5).unwrap();
        let b = Cell::new(0, 0.4, 0.8).unwrap();
        assert!(empirical_pair_correlation(&s, &a, &b).is_err());
        assert!(empirical_pair_correlation(&[], &a, &Cell::new(1, 0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn cell_average_of_polynomial() {
        let a = Cell::new(0, 0.0, 1.0).unwrap();
        let b = Cell::new(0, 1.0, 3.0).unwrap();
        let v = cell_average_2d(|x, y| Ok(x * y), &a, &b, 4).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }
}
