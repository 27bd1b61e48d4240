//! Special functions: physicists' Hermite polynomials, generalized Laguerre
//! polynomials, modified Bessel functions of integer order and log-factorials.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const LOG_FACTORIAL_TABLE_LEN: usize = 1024;
const BESSEL_MAX_TERMS: usize = 500;
const BESSEL_ASYMPTOTIC_FROM: f64 = 700.0;

/// Physicists' Hermite polynomial `p_n(x)`, normalized so that
/// `∫ e^{-x²} p_n p_m dx = δ_{nm} √π 2ⁿ n!`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All Hermite polynomials `p_0(x), …, p_nmax(x)`.
pub fn hermite_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax >= 1 {
        out.push(2.0 * x);
    }
    for k in 1..nmax {
        let next = 2.0 * x * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// Generalized Laguerre polynomial `L^p_k(x)` of degree `k` and order `p`.
pub fn laguerre(k: usize, p: usize, x: f64) -> f64 {
    let p = p as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + p - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + p - x) * cur - (jf + p) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_FACTORIAL_TABLE_LEN);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LOG_FACTORIAL_TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`: tabulated direct summation for small `n`, Stirling series beyond.
pub fn log_factorial(n: usize) -> f64 {
    if n < LOG_FACTORIAL_TABLE_LEN {
        return log_factorial_table()[n];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `n!` as a float; exact products up to 170, `+∞` beyond.
pub fn factorial(n: usize) -> f64 {
    if n > 170 {
        return f64::INFINITY;
    }
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Exponentially scaled modified Bessel function `e^{-x} I_n(x)` for `x ≥ 0`.
///
/// The power series is summed in log space so the result never overflows;
/// for very large arguments the Hankel asymptotic expansion is used.
pub fn bessel_i_scaled(n: i64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel argument must be finite and ≥ 0, got {x}")));
    }
    let n = n.unsigned_abs() as usize;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x > BESSEL_ASYMPTOTIC_FROM && (n as f64) * (n as f64) < 0.05 * x {
        return Ok(bessel_i_scaled_asymptotic(n, x));
    }
    let lhalf = (0.5 * x).ln();
    let nf = n as f64;
    let mut log_term = nf * lhalf - log_factorial(n) - x;
    let mut log_max = log_term;
    let mut scaled_sum = 1.0;
    for k in 0..BESSEL_MAX_TERMS {
        let kf = k as f64;
        log_term += 2.0 * lhalf - (kf + 1.0).ln() - (kf + 1.0 + nf).ln();
        if log_term > log_max {
            scaled_sum = scaled_sum * (log_max - log_term).exp() + 1.0;
            log_max = log_term;
        } else {
            let rel = (log_term - log_max).exp();
            scaled_sum += rel;
            if rel < 1e-16 * scaled_sum {
                return Ok(scaled_sum * log_max.exp());
            }
        }
    }
    Err(Error::Overflow(format!(
        "bessel series for I_{n}({x}) not converged after {BESSEL_MAX_TERMS} terms"
    )))
}

fn bessel_i_scaled_asymptotic(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Modified Bessel function `I_n(x)` of integer order, `x ≥ 0`.
pub fn bessel_i(n: i64, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(n, x)?;
    if x > 709.0 {
        return Err(Error::Overflow(format!("I_{n}({x}) exceeds the f64 range")));
    }
    Ok(scaled * x.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, 3.7), 1.0);
        for &x in &[-1.3, 0.0, 0.25, 2.0] {
            assert_relative_eq!(hermite(1, x), 2.0 * x);
        }
        assert_relative_eq!(hermite(3, 0.5), -5.0, epsilon = 1e-14);
        let all = hermite_all(7, 0.8);
        for (n, v) in all.iter().enumerate() {
            assert_relative_eq!(*v, hermite(n, 0.8), max_relative = 1e-14);
        }
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre(0, 3, 1.7), 1.0);
        assert_relative_eq!(laguerre(1, 2, 0.5), 2.5, epsilon = 1e-14);
        assert_relative_eq!(laguerre(2, 0, 2.0), -1.0, epsilon = 1e-14);
        let x: f64 = 1.3;
        let l3 = 1.0 - 3.0 * x + 1.5 * x * x - x.powi(3) / 6.0;
        assert_relative_eq!(laguerre(3, 0, x), l3, epsilon = 1e-13);
    }

    #[test]
    fn bessel_examples() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_relative_eq!(bessel_i(1, 1.0).unwrap(), 0.565_159_103_992_485, max_relative = 1e-13);
        assert_eq!(bessel_i(3, 2.5).unwrap(), bessel_i(-3, 2.5).unwrap());
        assert!(bessel_i(0, 800.0).is_err());
        assert!(bessel_i_scaled(-1, 1.0).is_ok());
        assert!(bessel_i_scaled(0, -1.0).is_err());
    }

    #[test]
    fn bessel_scaled_matches_asymptotic_crossover() {
        let below = bessel_i_scaled(2, 699.0).unwrap();
        let above = bessel_i_scaled_asymptotic(2, 699.0);
        assert_relative_eq!(below, above, max_relative = 1e-12);
    }

    #[test]
    fn log_factorial_examples() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert_relative_eq!(log_factorial(10), 15.104_412_573_075_516, max_relative = 1e-13);
        let direct: f64 = (1..=2000).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(log_factorial(2000), direct, max_relative = 1e-12);
        assert_relative_eq!(factorial(5), 120.0);
        assert!(factorial(171).is_infinite());
    }
}
