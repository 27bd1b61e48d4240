use proptest::prelude::*;
use spacelike::contour::integrate_real_adaptive;
use spacelike::specfun::{bessel_i, hermite, hermite_all, laguerre};

fn factorial(n: u64) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

fn binomial(n: u64, k: u64) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn hermite_explicit(n: u64, x: f64) -> f64 {
    (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(n) * (2.0 * x).powi((n - 2 * m) as i32) / (factorial(m) * factorial(n - 2 * m))
        })
        .sum()
}

fn laguerre_explicit(k: u64, p: u64, x: f64) -> f64 {
    (0..=k)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k + p, k - j) * x.powi(j as i32) / factorial(j)
        })
        .sum()
}

fn bessel_series(n: u64, x: f64) -> f64 {
    (0..80u64).map(|m| (0.5 * x).powi((2 * m + n) as i32) / (factorial(m) * factorial(m + n))).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_matches_explicit_sum(n in 0u64..12, x in -3.0f64..3.0) {
        let expected = hermite_explicit(n, x);
        let scale = hermite_explicit(n, 3.0).abs().max(1.0);
        prop_assert!((hermite(n as usize, x) - expected).abs() < 1e-12 * scale);
        prop_assert_eq!(hermite_all(n as usize, x)[n as usize], hermite(n as usize, x));
    }

    #[test]
    fn laguerre_matches_explicit_sum(k in 0u64..10, p in 0u64..6, x in 0.0f64..20.0) {
        let expected = laguerre_explicit(k, p, x);
        let scale: f64 = (0..=k).map(|j| binomial(k + p, k - j) * x.powi(j as i32) / factorial(j)).sum();
        prop_assert!((laguerre(k as usize, p as usize, x) - expected).abs() < 1e-12 * scale.max(1.0));
    }

    #[test]
    fn bessel_is_even_in_order(n in 0i64..10, x in 0.0f64..40.0) {
        prop_assert_eq!(bessel_i(n, x).unwrap(), bessel_i(-n, x).unwrap());
    }

    #[test]
    fn bessel_matches_power_series(n in 0u64..6, x in 0.0f64..12.0) {
        let expected = bessel_series(n, x);
        prop_assert!((bessel_i(n as i64, x).unwrap() - expected).abs() < 1e-12 * expected.max(1e-300));
    }

    #[test]
    fn mehler_partial_sum(x in -2.0f64..2.0, y in -2.0f64..2.0, high in proptest::bool::ANY) {
        let q: f64 = if high { 0.6 } else { 0.3 };
        let (px, py) = (hermite_all(60, x), hermite_all(60, y));
        let mut norm = 1.0;
        let mut sum = 0.0;
        for k in 0..=60 {
            if k > 0 {
                norm *= 2.0 * k as f64;
            }
            sum += px[k] * py[k] * q.powi(k as i32) / norm;
        }
        let lhs = (-x * x).exp() * sum / std::f64::consts::PI.sqrt();
        let gauss = ((2.0 * x * y * q - (x * x + y * y) * q * q) / (1.0 - q * q)).exp() / (1.0 - q * q).sqrt();
        let rhs = (-x * x).exp() * gauss / std::f64::consts::PI.sqrt();
        prop_assert!((lhs - rhs).abs() < 1e-8, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn gaussian_antiderivative(n in 1usize..=8, x in -3.0f64..3.0) {
        let integral = integrate_real_adaptive(|y| (-y * y).exp() * hermite(n, y), x, 12.0, 1e-13).unwrap();
        let expected = (-x * x).exp() * hermite(n - 1, x);
        prop_assert!((integral - expected).abs() < 1e-8, "{} vs {}", integral, expected);
    }
}

#[test]
fn orthogonality_norms() {
    for n in 0..=10 {
        for m in 0..=10 {
            let norm = std::f64::consts::PI.sqrt() * 2f64.powi(n.max(m) as i32) * factorial(n.max(m) as u64);
            let f = |x: f64| (-x * x).exp() * hermite(n, x) * hermite(m, x);
            let v = integrate_real_adaptive(f, -12.0, 12.0, 1e-12 * norm).unwrap();
            let expected = if n == m { norm } else { 0.0 };
            assert!((v - expected).abs() < 1e-8 * norm, "({n},{m}): {v}");
        }
    }
}
