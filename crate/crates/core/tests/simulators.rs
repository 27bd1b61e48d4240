use nalgebra::DMatrix;
use proptest::prelude::*;
use spacelike::particles::{observe, InterlacedConfig, JumpOutcome, SimClock};
use spacelike::rmt_sim::{
    complex_gaussian, hermitian_eigenvalues, sample_dbm_minors, sample_hermitian_path, sample_wishart_minors,
    HermitianMatrix, RectComplexMatrix, RngStream,
};

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn two_sample_z(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_and_se(a);
    let (mb, sb) = mean_and_se(b);
    (ma - mb) / (sa * sa + sb * sb).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenvalues_preserve_trace_and_frobenius(n in 1usize..=64, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut m = DMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng, 1.0));
        m = &m + m.adjoint();
        let h = HermitianMatrix::new(m).unwrap();
        let ev = hermitian_eigenvalues(&h).unwrap();
        let tr: f64 = ev.iter().sum();
        let fro: f64 = ev.iter().map(|x| x * x).sum();
        prop_assert!((tr - h.trace()).abs() < 1e-10 * h.frobenius_sq().sqrt().max(1.0));
        prop_assert!((fro - h.frobenius_sq()).abs() < 1e-10 * h.frobenius_sq());
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn wishart_eigenvalue_sum_is_frobenius_norm(p in 1usize..8, extra in 0usize..4, seed in any::<u64>()) {
        let n = p;
        let mut a = RectComplexMatrix::zeros(p + extra, n);
        a.add_gaussian_increment(&mut RngStream::new(seed, 0).rng(), 1.3);
        let ev = hermitian_eigenvalues(&a.gram(n)).unwrap();
        let fro: f64 = a.m.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((ev.iter().sum::<f64>() - fro).abs() < 1e-10 * fro);
        prop_assert!(ev.iter().all(|&x| x > -1e-12));
    }

    #[test]
    fn sampled_minors_interlace(n in 2usize..7, seed in any::<u64>()) {
        let levels: Vec<usize> = (1..=n).collect();
        let mut rng = RngStream::new(seed, 0).rng();
        let s = sample_dbm_minors(n, &[0.3, 1.0, 2.5], &levels, &mut rng).unwrap();
        prop_assert!(s.is_interlaced(1e-10));
        let w = sample_wishart_minors(n + 1, n, &[0.5, 1.5], &levels, &mut rng).unwrap();
        prop_assert!(w.is_interlaced(1e-10));
    }

    #[test]
    fn random_rings_keep_interlacing(levels in 1usize..6, rings in proptest::collection::vec((0usize..100, 0usize..100), 0..200)) {
        let mut cfg = InterlacedConfig::packed(levels).unwrap();
        for (a, b) in rings {
            let m = 1 + a % levels;
            let k = 1 + b % m;
            let before = cfg.get(m, k);
            match cfg.ring(m, k) {
                JumpOutcome::Blocked => prop_assert_eq!(cfg.get(m, k), before),
                JumpOutcome::Moved(c) => {
                    prop_assert_eq!(cfg.get(m, k), before + 1);
                    prop_assert!(c >= 1 && m + c - 1 <= levels);
                }
            }
            prop_assert!(cfg.is_interlaced());
            let tasep = cfg.tasep_projection();
            prop_assert!(tasep.windows(2).all(|w| w[1] < w[0]));
        }
    }
}

#[test]
fn one_step_and_two_step_increments_agree() {
    let samples = 20_000;
    let mut one_rng = RngStream::new(5, 1).rng();
    let mut two_rng = RngStream::new(5, 2).rng();
    let (mut tr1, mut tr2, mut q1, mut q2) = (vec![], vec![], vec![], vec![]);
    for _ in 0..samples {
        let h1 = sample_hermitian_path(2, &[1.0], &mut one_rng).unwrap().pop().unwrap();
        let h2 = sample_hermitian_path(2, &[0.35, 1.0], &mut two_rng).unwrap().pop().unwrap();
        tr1.push(h1.frobenius_sq());
        tr2.push(h2.frobenius_sq());
        q1.push(h1.get(0, 0).re.powi(4));
        q2.push(h2.get(0, 0).re.powi(4));
    }
    assert!(two_sample_z(&tr1, &tr2).abs() < 3.0);
    assert!(two_sample_z(&q1, &q2).abs() < 3.0);
    // E[Tr H(1)²] = n²/2 at n = 2.
    let (m, se) = mean_and_se(&tr1);
    assert!(((m - 2.0) / se).abs() < 3.0, "{m} ± {se}");
}

#[test]
fn lower_levels_evolve_autonomously() {
    let replicas = 20_000;
    let positions = |levels: usize, stream: u64| -> Vec<[f64; 3]> {
        (0..replicas)
            .map(|i| {
                let mut clock = SimClock::new(&RngStream::new(17, stream).child(i as u64));
                let c = observe(levels, &[1.5], &mut clock).unwrap().pop().unwrap();
                [c.get(1, 1) as f64, c.get(2, 1) as f64, c.get(2, 2) as f64]
            })
            .collect()
    };
    let short = positions(2, 1);
    let tall = positions(3, 2);
    for j in 0..3 {
        let a: Vec<f64> = short.iter().map(|p| p[j]).collect();
        let b: Vec<f64> = tall.iter().map(|p| p[j]).collect();
        let z = two_sample_z(&a, &b);
        assert!(z.abs() < 3.0, "coordinate {j}: z = {z}");
    }
}

#[test]
fn level_one_is_a_poisson_count() {
    let replicas = 20_000;
    let t = 1.0;
    let counts: Vec<f64> = (0..replicas)
        .map(|i| {
            let mut clock = SimClock::new(&RngStream::new(3, 0).child(i));
            (observe(1, &[t], &mut clock).unwrap()[0].get(1, 1) + 1) as f64
        })
        .collect();
    let (m, se) = mean_and_se(&counts);
    assert!(((m - t) / se).abs() < 3.0);
    let zeros = counts.iter().filter(|&&c| c == 0.0).count() as f64 / replicas as f64;
    let p0 = (-t).exp();
    assert!(((zeros - p0) / (p0 * (1.0 - p0) / replicas as f64).sqrt()).abs() < 3.0);
}
