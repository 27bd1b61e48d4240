use std::process::ExitCode;
use std::time::Instant;

use spacelike::kernels::{
    kernel_diffusion_scaled, kernel_discrete, kernel_gue_extended, kernel_lue, LueParams, SpaceTimePoint,
};
use spacelike::mc_verify::*;
use spacelike::rmt_sim::RngStream;

const ORACLE_SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    gated: bool,
    summary: String,
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome { pass, gated: true, summary }
}

fn worst(report: &SuiteReport) -> f64 {
    report.max_deviation("")
}

fn max_abs_z(report: &SuiteReport) -> f64 {
    report.checks.iter().filter_map(|c| c.z).map(f64::abs).fold(0.0, f64::max)
}

fn describe_failures(report: &SuiteReport) -> String {
    let names: Vec<String> = report
        .failures()
        .take(5)
        .map(|c| format!("{} (pred {:.6e}, est {:.6e}, z {:?})", c.name, c.predicted, c.estimate, c.z))
        .collect();
    if names.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", names.join(", "))
    }
}

// Independent oracles.

fn hermite_density(n: usize, x: f64) -> f64 {
    // Σ_{k<n} H_k(x)² e^{−x²} / (√π 2^k k!) via the normalized recurrence.
    let pi_quarter = std::f64::consts::PI.powf(-0.25);
    let mut h_prev = 0.0;
    let mut h = pi_quarter * (-0.5 * x * x).exp();
    let mut total = 0.0;
    for k in 0..n {
        total += h * h;
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * h - (k as f64 / (k as f64 + 1.0)).sqrt() * h_prev;
        h_prev = h;
        h = next;
    }
    total
}

fn factorial(k: u64) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn bessel_i_series(nu: u32, x: f64) -> f64 {
    (0..60u64)
        .map(|m| (0.5 * x).powi((2 * m + nu as u64) as i32) / (factorial(m) * factorial(m + nu as u64)))
        .sum()
}

fn hciz_two_by_two(a: [f64; 2], b: [f64; 2]) -> f64 {
    // |U₁₁|² is uniform on [0, 1] for Haar U(2).
    let c0 = a[0] * b[1] + a[1] * b[0];
    let slope = a[0] * b[0] + a[1] * b[1] - c0;
    c0.exp() * (slope.exp() - 1.0) / slope
}

fn orthogonality() -> Outcome {
    let start = Instant::now();
    let r = orthogonality_checks(&IdentityConfig::default());
    let secs = start.elapsed().as_secs_f64();
    let pass = r.passed() && secs < 5.0;
    outcome(pass, format!("{} checks, max dev {:.2e}, {secs:.2} s (limit 5 s){}", r.checks.len(), worst(&r), describe_failures(&r)))
}

fn lemmas() -> Outcome {
    let start = Instant::now();
    let cfg = IdentityConfig::default();
    let blocks = Blocks::default();
    let mut r = gue_lemma_checks(&cfg, &blocks);
    r.extend(lue_lemma_checks(&cfg, &blocks));
    let secs = start.elapsed().as_secs_f64();
    let pass = r.passed() && worst(&r) < 1e-6 && secs < 60.0;
    outcome(pass, format!("{} checks, max dev {:.2e}, {secs:.1} s (limit 60 s){}", r.checks.len(), worst(&r), describe_failures(&r)))
}

fn biorthogonality() -> Outcome {
    let r = biorthogonality_checks(&IdentityConfig::default(), &Blocks::default());
    let pass = r.passed() && worst(&r) < 1e-8;
    outcome(pass, format!("{} checks, max |value − δ| {:.2e}{}", r.checks.len(), worst(&r), describe_failures(&r)))
}

fn kernel_algebra() -> Outcome {
    let cfg = IdentityConfig::default();
    let algebra = kernel_algebra_checks(&cfg);
    let dual = dual_representation_checks(&cfg, &Blocks::default());
    let pass = algebra.passed() && dual.passed() && worst(&dual) < 1e-9;
    outcome(
        pass,
        format!(
            "{} kernel pairs (relative tol 1e-6), {} dual checks max dev {:.2e}{}{}",
            algebra.checks.len(),
            dual.checks.len(),
            worst(&dual),
            describe_failures(&algebra),
            describe_failures(&dual)
        ),
    )
}

fn traces() -> Outcome {
    let start = Instant::now();
    let r = trace_checks(&IdentityConfig::default());
    let pass = r.passed() && worst(&r) < 1e-6;
    outcome(
        pass,
        format!("{} traces, max |∫K − n| {:.2e}, {:.1} s{}", r.checks.len(), worst(&r), start.elapsed().as_secs_f64(), describe_failures(&r)),
    )
}

fn eynard() -> Outcome {
    let start = Instant::now();
    let cfg = EynardOracleConfig::default();
    let r = eynard_oracle(&cfg).expect("oracle run");
    let secs = start.elapsed().as_secs_f64();
    let specs = r.checks.iter().filter(|c| c.name.ends_with("-kernel")).count();
    let triangular = r.checks.iter().filter(|c| c.name.ends_with("triangular-simplified")).count();
    let pass = r.passed() && specs == 50 && triangular >= 5 && secs < 120.0;
    outcome(
        pass,
        format!("{specs} specs ({triangular} upper-triangular), max |Δρ| {:.2e}, {secs:.2} s{}", worst(&r), describe_failures(&r)),
    )
}

fn hciz() -> Outcome {
    let start = Instant::now();
    let samples = 1_000_000;
    let z_max = 4.0;
    let a2 = [0.3, 0.9];
    let b2 = [0.2, 0.7];
    let oracle_gap = (hciz_closed_form(&a2, &b2).unwrap() - hciz_two_by_two(a2, b2)).abs();
    let c = 2.0 * (0.6f64 * 0.8).sqrt();
    let rect_gap = (hciz_rect_closed_form(1, 1, &[0.6], &[0.8]).unwrap() - bessel_i_series(0, c)).abs()
        + (hciz_rect_closed_form(2, 1, &[0.6], &[0.8]).unwrap() - 2.0 * bessel_i_series(1, c) / c).abs();
    let checks = vec![
        hciz_check(&a2, &b2, samples, &RngStream::new(ORACLE_SEED, 41), z_max),
        hciz_check(&[0.2, 0.5, 0.9], &[0.1, 0.4, 0.8], samples, &RngStream::new(ORACLE_SEED, 42), z_max),
        hciz_rect_check(1, 1, &[0.6], &[0.8], samples, &RngStream::new(ORACLE_SEED, 43), z_max),
        hciz_rect_check(2, 1, &[0.6], &[0.8], samples, &RngStream::new(ORACLE_SEED, 44), z_max),
        hciz_rect_check(2, 2, &[0.3, 0.9], &[0.2, 0.7], samples, &RngStream::new(ORACLE_SEED, 45), z_max),
    ];
    let mut parts = Vec::new();
    let mut pass = oracle_gap < 1e-12 && rect_gap < 1e-12;
    for c in checks {
        let c = c.expect("hciz check");
        pass &= c.pass;
        parts.push(format!("{} z={:+.2}", c.name, c.z.unwrap_or(f64::NAN)));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 600.0;
    outcome(
        pass,
        format!("{}; closed forms vs independent oracles {:.1e}; {secs:.1} s", parts.join(", "), oracle_gap + rect_gap),
    )
}

fn gue_mc() -> Outcome {
    let oracle_gap = [-2.0, -0.7, 0.0, 0.4, 1.5, 3.0]
        .iter()
        .map(|&x| {
            let p = SpaceTimePoint::new(x, 2, 1.0);
            (kernel_gue_extended(&p, &p).unwrap().value - hermite_density(2, x)).abs()
        })
        .fold(0.0, f64::max);
    let r = gue_monte_carlo(&GueMonteCarloConfig::default()).expect("gue run");
    let pairs: Vec<String> = r
        .checks
        .iter()
        .filter(|c| c.name.contains("pair"))
        .map(|c| format!("{} pred {:.4} est {:.4} z={:+.2}", c.name, c.predicted, c.estimate, c.z.unwrap_or(f64::NAN)))
        .collect();
    let bins = r.checks.iter().filter(|c| c.name.contains("density")).count();
    outcome(
        r.passed() && oracle_gap < 1e-8,
        format!(
            "{bins} density bins, max |z| {:.2}; {}; diagonal vs Hermite oracle {:.1e}{}",
            max_abs_z(&r),
            pairs.join("; "),
            oracle_gap,
            describe_failures(&r)
        ),
    )
}

fn lue_mc() -> Outcome {
    let params = LueParams { p: 2 };
    let oracle_gap = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&x| {
            let p = SpaceTimePoint::new(x, 1, 1.0);
            (kernel_lue(&p, &p, &params).unwrap().value - x * (-x).exp()).abs()
        })
        .fold(0.0, f64::max);
    let r = lue_monte_carlo(&LueMonteCarloConfig::default()).expect("lue run");
    let reading = |checks: &[CheckReport], key: &str| {
        checks.iter().find(|c| c.name.contains(key)).map(|c| (c.predicted, c.estimate, c.z.unwrap_or(f64::NAN))).unwrap()
    };
    let (p1, e1, z1) = reading(&r.checks, "first-position");
    let (p2, _, z2) = reading(&r.info, "second-position");
    let bins = r.checks.iter().filter(|c| c.name.contains("density")).count();
    outcome(
        r.passed() && oracle_gap < 1e-10 && z2.abs() > 10.0,
        format!(
            "{bins} density bins, max |z| {:.2}; diagonal vs x·e^(−x) {:.1e}; reading pair est {e1:.4}: first-position pred {p1:.4} z={z1:+.2}, second-position pred {p2:.4} z={z2:+.1} (rejected){}",
            max_abs_z(&r),
            oracle_gap,
            describe_failures(&r)
        ),
    )
}

fn particles() -> Outcome {
    let oracle_gap = (-1..8)
        .map(|x: i64| {
            let p = SpaceTimePoint::new(x as f64, 1, 1.0);
            let k = (x + 1) as u64;
            (kernel_discrete(&p, &p).unwrap() - (-1f64).exp() / factorial(k)).abs()
        })
        .fold(0.0, f64::max);
    let r = particle_monte_carlo(&ParticleMonteCarloConfig::default()).expect("particle run");
    let failures = r.checks.iter().find(|c| c.name == "particles-interlacing-failures").map(|c| c.estimate).unwrap();
    outcome(
        r.passed() && oracle_gap < 1e-10,
        format!(
            "{} occupation/Poisson checks, max |z| {:.2}, interlacing failures {failures}; level-1 diagonal vs Poisson pmf {:.1e}{}",
            r.checks.len() - 1,
            max_abs_z(&r),
            oracle_gap,
            describe_failures(&r)
        ),
    )
}

fn diffusion() -> Outcome {
    let oracle_gap = [-1.5, 0.0, 0.8]
        .iter()
        .map(|&x: &f64| {
            let p = SpaceTimePoint::new(x, 1, 1.0);
            (kernel_diffusion_scaled(&p, &p).unwrap().value - (-x * x).exp() / std::f64::consts::PI.sqrt()).abs()
        })
        .fold(0.0, f64::max);
    let r = diffusion_smoke(&DiffusionSmokeConfig::default()).expect("diffusion run");
    let within = r.info.iter().filter(|c| c.pass).count();
    let worst = r.info.iter().map(|c| c.abs_deviation() - c.tolerance).fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: within == r.info.len() && oracle_gap < 1e-10,
        gated: false,
        summary: format!(
            "{within}/{} bins within 3σ + t^(−1/2) allowance (worst excess {worst:+.3}); level-1 diagonal vs e^(−ξ²)/√π {oracle_gap:.1e}",
            r.info.len()
        ),
    }
}

fn determinism() -> Outcome {
    let particle_cfg = ParticleMonteCarloConfig { replicas: 20_000, ..Default::default() };
    let gue_cfg = GueMonteCarloConfig { samples: 10_000, ..Default::default() };
    let run = || {
        let mut bytes = serde_json::to_vec(&particle_monte_carlo(&particle_cfg).unwrap()).unwrap();
        bytes.extend(serde_json::to_vec(&gue_monte_carlo(&gue_cfg).unwrap()).unwrap());
        bytes.extend(
            serde_json::to_vec(&hciz_check(&[0.3, 0.9], &[0.2, 0.7], 50_000, &RngStream::new(ORACLE_SEED, 41), 4.0).unwrap())
                .unwrap(),
        );
        bytes
    };
    let first = run();
    let second = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let threaded = pool.install(run);
    outcome(
        first == second && first == threaded,
        format!(
            "{} report bytes; rerun identical: {}; 3-worker rerun identical: {}",
            first.len(),
            first == second,
            first == threaded
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("orthogonality", orthogonality),
        ("lemma identities", lemmas),
        ("biorthogonality", biorthogonality),
        ("kernel algebra and dual forms", kernel_algebra),
        ("trace identities", traces),
        ("enumeration oracle", eynard),
        ("HCIZ Monte Carlo", hciz),
        ("GUE minors Monte Carlo", gue_mc),
        ("LUE minors Monte Carlo", lue_mc),
        ("particle simulator", particles),
        ("diffusion scaling (soft)", diffusion),
        ("determinism", determinism),
    ];
    let mut gated_failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = match (o.pass, o.gated) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "SOFT-FAIL",
        };
        if !o.pass && o.gated {
            gated_failures += 1;
        }
        println!("criterion {:2} {status} [{name}] {} ({:.1} s)", i + 1, o.summary, start.elapsed().as_secs_f64());
    }
    if gated_failures == 0 {
        println!("acceptance: all gated criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {gated_failures} gated criteria failed");
        ExitCode::FAILURE
    }
}
