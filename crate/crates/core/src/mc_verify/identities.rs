use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{integrate_real_adaptive, integrate_real_piecewise};
use crate::error::Result;
use crate::kernels::{
    bessel_transition, bessel_transition_circle, bessel_transition_shifted, gue_biorthogonal_sum,
    gue_second_term, heat_kernel, kernel_discrete, kernel_gue_extended, kernel_lue, lue_biorthogonal_sum,
    lue_second_term, phi_gue, phi_gue_contour, phi_lue, phi_lue_contour, psi_gue, psi_gue_line, psi_lue,
    psi_lue_eq62, psi_lue_shifted, LueParams, QuadratureOptions, SpaceTimePoint,
};
use crate::rmt_sim::RngStream;
use crate::specfun::{factorial, hermite, laguerre, log_factorial};

use super::report::{CheckReport, SuiteReport};

/// The building blocks exercised by the suite. Replacing one with a faulty
/// implementation must make the suite fail.
#[derive(Clone, Copy)]
pub struct Blocks {
    pub psi_gue: fn(usize, f64, i64, f64) -> Result<f64>,
    pub phi_gue: fn(usize, f64, usize, f64) -> Result<f64>,
    pub heat_kernel: fn(f64, f64, f64, f64) -> Result<f64>,
    pub psi_lue: fn(usize, f64, i64, f64) -> Result<f64>,
    pub phi_lue: fn(usize, f64, usize, f64) -> Result<f64>,
    pub bessel_transition: fn(usize, f64, f64, f64, f64) -> Result<f64>,
}

impl Default for Blocks {
    fn default() -> Self {
        Self { psi_gue, phi_gue, heat_kernel, psi_lue, phi_lue, bessel_transition }
    }
}

/// Pass thresholds of the identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTolerances {
    /// Relative, on normalized inner products.
    pub orthogonality: f64,
    /// Absolute, worst point of each lemma identity.
    pub lemma: f64,
    pub biorthogonality: f64,
    /// Relative, sum against double contour integral.
    pub kernel_algebra: f64,
    pub dual_representation: f64,
    pub trace: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        Self {
            orthogonality: 1e-8,
            lemma: 1e-6,
            biorthogonality: 1e-8,
            kernel_algebra: 1e-6,
            dual_representation: 1e-9,
            trace: 1e-6,
        }
    }
}

/// Parameters of the identity suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    pub tolerances: IdentityTolerances,
    /// Triples `t > s > r > 0`.
    pub time_grids: Vec<[f64; 3]>,
    pub max_level: usize,
    pub max_p: usize,
    pub points: usize,
    pub max_orthogonality_index: usize,
    pub max_biorthogonality_level: usize,
    pub kernel_pairs: usize,
    pub seed: u64,
    /// Relative accuracy of real-line integrals.
    pub integration_tol: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            tolerances: IdentityTolerances::default(),
            time_grids: vec![[2.0, 1.0, 0.5], [3.0, 2.0, 1.0]],
            max_level: 5,
            max_p: 6,
            points: 20,
            max_orthogonality_index: 10,
            max_biorthogonality_level: 6,
            kernel_pairs: 10,
            seed: 2024,
            integration_tol: 1e-11,
            quadrature: QuadratureOptions::default(),
        }
    }
}

/// Worst deviation of `lhs(x)` from `rhs(x)` over `xs`.
fn worst<L, R>(name: String, xs: &[f64], lhs: L, rhs: R, tol: f64) -> CheckReport
where
    L: Fn(f64) -> Result<f64>,
    R: Fn(f64) -> Result<f64>,
{
    let mut report: Option<CheckReport> = None;
    for &x in xs {
        let (l, r) = match (lhs(x), rhs(x)) {
            (Ok(l), Ok(r)) => (l, r),
            _ => return CheckReport::errored(format!("{name} at x={x}"), f64::NAN),
        };
        let c = CheckReport::deviation(name.clone(), r, l, tol);
        if !c.abs_deviation().is_finite() {
            return CheckReport::errored(name, r);
        }
        if report.as_ref().is_none_or(|w| c.abs_deviation() > w.abs_deviation()) {
            report = Some(c);
        }
    }
    report.unwrap_or_else(|| CheckReport::errored(name, f64::NAN))
}

fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / count as f64).collect()
}

/// Hermite and Laguerre orthogonality, normalized so that the expected
/// matrix is the identity.
pub fn orthogonality_checks(config: &IdentityConfig) -> SuiteReport {
    let mut report = SuiteReport::new("orthogonality");
    let tol = config.tolerances.orthogonality;
    let itol = config.integration_tol;
    let nmax = config.max_orthogonality_index;
    let hermite_norm = |n: usize| (PI.sqrt() * 2f64.powi(n as i32) * factorial(n)).sqrt();
    let hermite_breaks = [-14.0, -7.0, -3.5, 0.0, 3.5, 7.0, 14.0];
    for n in 0..=nmax {
        for m in 0..=n {
            let name = format!("hermite n={n} m={m}");
            let v = integrate_real_piecewise(
                |x| (-x * x).exp() * hermite(n, x) * hermite(m, x),
                &hermite_breaks,
                itol,
            );
            let expected = if n == m { 1.0 } else { 0.0 };
            report.push(match v {
                Ok(v) => CheckReport::deviation(name, expected, v / (hermite_norm(n) * hermite_norm(m)), tol),
                Err(_) => CheckReport::errored(name, expected),
            });
        }
    }
    let laguerre_breaks = [0.0, 5.0, 15.0, 30.0, 60.0, 100.0, 160.0, 250.0];
    for p in 0..=nmax {
        let norm = |k: usize| (0.5 * (log_factorial(p + k) - log_factorial(k))).exp();
        for k in 0..=nmax {
            for l in 0..=k {
                let name = format!("laguerre p={p} k={k} l={l}");
                let v = integrate_real_piecewise(
                    |x| {
                        let w = if p == 0 { (-x).exp() } else if x == 0.0 { 0.0 } else { (p as f64 * x.ln() - x).exp() };
                        w * laguerre(k, p, x) * laguerre(l, p, x)
                    },
                    &laguerre_breaks,
                    itol,
                );
                let expected = if k == l { 1.0 } else { 0.0 };
                report.push(match v {
                    Ok(v) => CheckReport::deviation(name, expected, v / (norm(k) * norm(l)), tol),
                    Err(_) => CheckReport::errored(name, expected),
                });
            }
        }
    }
    report
}

/// The four relations between Ψ, the step kernel and the heat kernel of the
/// GUE minor process.
pub fn gue_lemma_checks(config: &IdentityConfig, blocks: &Blocks) -> SuiteReport {
    let mut report = SuiteReport::new("gue-lemma");
    let tol = config.tolerances.lemma;
    let itol = config.integration_tol;
    for &[t, s, r] in &config.time_grids {
        let xs = grid(-2.5 * t.sqrt(), 2.5 * t.sqrt(), config.points);
        let tag = format!("(t,s,r)=({t},{s},{r})");
        for n in 1..=config.max_level {
            for k in 1..=n {
                let idx = (n - k) as i64;
                report.push(worst(
                    format!("gue-lemma-i n={n} k={k} {tag}"),
                    &xs,
                    |x| {
                        let upper = x.max(0.0) + 14.0 * t.sqrt();
                        integrate_real_adaptive(|y| (blocks.psi_gue)(n, t, idx, y).unwrap_or(f64::NAN), x, upper, itol)
                    },
                    |x| (blocks.psi_gue)(n - 1, t, idx - 1, x),
                    tol,
                ));
                let d = t - s;
                report.push(worst(
                    format!("gue-lemma-ii n={n} k={k} {tag}"),
                    &xs,
                    |x| {
                        let w = 14.0 * d.sqrt();
                        integrate_real_adaptive(
                            |y| {
                                (blocks.heat_kernel)(t, s, x, y).unwrap_or(f64::NAN)
                                    * (blocks.psi_gue)(n, s, idx, y).unwrap_or(f64::NAN)
                            },
                            x - w,
                            x + w,
                            itol,
                        )
                    },
                    |x| (blocks.psi_gue)(n, t, idx, x),
                    tol,
                ));
            }
        }
        let d = t - s;
        let w = 14.0 * d.sqrt();
        let pairs = grid(-1.5, 1.5, config.points);
        let partner = |x: f64| 0.7 * x + 0.3 * d.sqrt();
        report.push(worst(
            format!("gue-lemma-iii {tag}"),
            &pairs,
            |x| {
                let y = partner(x);
                integrate_real_adaptive(
                    |z| (blocks.heat_kernel)(t, s, z, y).unwrap_or(f64::NAN),
                    x,
                    x.max(y) + w,
                    itol,
                )
            },
            |x| {
                let y = partner(x);
                integrate_real_adaptive(
                    |z| (blocks.heat_kernel)(t, s, x, z).unwrap_or(f64::NAN),
                    x.min(y) - w,
                    y,
                    itol,
                )
            },
            tol,
        ));
        report.push(worst(
            format!("gue-lemma-iv {tag}"),
            &pairs,
            |x| {
                let y = partner(x);
                let w = 14.0 * (t - r).sqrt();
                integrate_real_adaptive(
                    |z| {
                        (blocks.heat_kernel)(t, s, x, z).unwrap_or(f64::NAN)
                            * (blocks.heat_kernel)(s, r, z, y).unwrap_or(f64::NAN)
                    },
                    x.min(y) - w,
                    x.max(y) + w,
                    itol,
                )
            },
            |x| (blocks.heat_kernel)(t, r, x, partner(x)),
            tol,
        ));
    }
    report
}

/// Upper integration limit for functions decaying like `e^{−x/t}` on ℝ₊.
fn lue_upper(x: f64, t: f64, p: usize) -> f64 {
    x + (60.0 + 4.0 * p as f64) * t
}

/// The four relations of the Laguerre process. The step convolution of
/// `Ψ_0` produces an extra constant one, from the residue at the origin.
pub fn lue_lemma_checks(config: &IdentityConfig, blocks: &Blocks) -> SuiteReport {
    let mut report = SuiteReport::new("lue-lemma");
    let tol = config.tolerances.lemma;
    let itol = config.integration_tol;
    for &[t, s, r] in &config.time_grids {
        let xs = grid(0.05 * t, 8.0 * t, config.points);
        let tag = format!("(t,s,r)=({t},{s},{r})");
        for p in 1..=config.max_p {
            for n in 1..=config.max_level.min(p) {
                let nu = p - n;
                for k in 1..=n {
                    let idx = (n - k) as i64;
                    let boundary = if idx == 0 { 1.0 } else { 0.0 };
                    report.push(worst(
                        format!("lue-lemma-i p={p} n={n} k={k} {tag}"),
                        &xs,
                        |x| integrate_real_adaptive(|y| (blocks.psi_lue)(nu, t, idx, y).unwrap_or(f64::NAN), 0.0, x, itol),
                        |x| Ok((blocks.psi_lue)(nu + 1, t, idx - 1, x)? + boundary),
                        tol,
                    ));
                    report.push(worst(
                        format!("lue-lemma-ii p={p} n={n} k={k} {tag}"),
                        &xs,
                        |x| {
                            integrate_real_piecewise(
                                |y| {
                                    (blocks.bessel_transition)(nu, t, s, x, y).unwrap_or(f64::NAN)
                                        * (blocks.psi_lue)(nu, s, idx, y).unwrap_or(f64::NAN)
                                },
                                &[0.0, 0.5 * x, x, 2.0 * x + t, lue_upper(x, t, p)],
                                itol,
                            )
                        },
                        |x| (blocks.psi_lue)(nu, t, idx, x),
                        tol,
                    ));
                }
                if n < 2 {
                    continue;
                }
                let d = t - s;
                let partner = |x: f64| 0.6 * x + 0.5 * d;
                report.push(worst(
                    format!("lue-lemma-iii p={p} n={n} {tag}"),
                    &xs,
                    |x| {
                        let y = partner(x);
                        integrate_real_piecewise(
                            |z| (blocks.bessel_transition)(nu, t, s, z, y).unwrap_or(f64::NAN),
                            &[0.0, 0.5 * x.min(y), x.min(y), x],
                            itol,
                        )
                    },
                    |x| {
                        let y = partner(x);
                        integrate_real_piecewise(
                            |z| (blocks.bessel_transition)(nu + 1, t, s, x, z).unwrap_or(f64::NAN),
                            &[y, y.max(x), 2.0 * y.max(x) + d, lue_upper(x.max(y), t, p)],
                            itol,
                        )
                    },
                    tol,
                ));
                report.push(worst(
                    format!("lue-lemma-iv p={p} n={n} {tag}"),
                    &xs,
                    |x| {
                        let y = partner(x);
                        let (lo, hi) = (x.min(y), x.max(y));
                        integrate_real_piecewise(
                            |z| {
                                (blocks.bessel_transition)(nu, t, s, x, z).unwrap_or(f64::NAN)
                                    * (blocks.bessel_transition)(nu, s, r, z, y).unwrap_or(f64::NAN)
                            },
                            &[0.0, 0.5 * lo, lo, hi, 2.0 * hi + t, lue_upper(hi, t, p)],
                            itol,
                        )
                    },
                    |x| (blocks.bessel_transition)(nu, t, r, x, partner(x)),
                    tol,
                ));
            }
        }
    }
    report
}

/// `∫ Ψ_k Φ_ℓ = δ_{kℓ}` for both processes.
pub fn biorthogonality_checks(config: &IdentityConfig, blocks: &Blocks) -> SuiteReport {
    let mut report = SuiteReport::new("biorthogonality");
    let tol = config.tolerances.biorthogonality;
    let itol = config.integration_tol;
    for &t in &[1.0, 2.0] {
        for n in 1..=config.max_biorthogonality_level {
            for k in 0..n {
                for l in 0..n {
                    let expected = if k == l { 1.0 } else { 0.0 };
                    let w = 14.0 * f64::sqrt(t);
                    let name = format!("gue-biorth t={t} n={n} k={k} l={l}");
                    let v = integrate_real_piecewise(
                        |x| {
                            (blocks.psi_gue)(n, t, k as i64, x).unwrap_or(f64::NAN)
                                * (blocks.phi_gue)(n, t, l, x).unwrap_or(f64::NAN)
                        },
                        &[-w, -0.5 * w, 0.0, 0.5 * w, w],
                        itol,
                    );
                    report.push(match v {
                        Ok(v) => CheckReport::deviation(name, expected, v, tol),
                        Err(_) => CheckReport::errored(name, expected),
                    });
                    let name = format!("lue-biorth t={t} n={n} k={k} l={l}");
                    let v = integrate_real_piecewise(
                        |x| {
                            (blocks.psi_lue)(n, t, k as i64, x).unwrap_or(f64::NAN)
                                * (blocks.phi_lue)(n, t, l, x).unwrap_or(f64::NAN)
                        },
                        &[0.0, 5.0 * t, 15.0 * t, 40.0 * t, 100.0 * t],
                        itol,
                    );
                    report.push(match v {
                        Ok(v) => CheckReport::deviation(name, expected, v, tol),
                        Err(_) => CheckReport::errored(name, expected),
                    });
                }
            }
        }
    }
    report
}

/// Closed forms against their contour representations.
pub fn dual_representation_checks(config: &IdentityConfig, blocks: &Blocks) -> SuiteReport {
    let mut report = SuiteReport::new("dual");
    let tol = config.tolerances.dual_representation;
    let q = &config.quadrature;
    let scaled = |v: f64| v.abs().max(1.0);
    for &t in &[0.5f64, 1.0, 2.0] {
        let xs = grid(0.05 * t, 8.0 * t, config.points);
        for n in 0..=4usize {
            for k in -2i64..=5 {
                let direct = |x| (blocks.psi_lue)(n, t, k, x);
                if k >= 0 {
                    report.push(worst(
                        format!("dual-psi-lue-circle t={t} n={n} k={k}"),
                        &xs,
                        direct,
                        |x| psi_lue_eq62(n, t, k, x, q),
                        tol,
                    ));
                }
                report.push(worst(
                    format!("dual-psi-lue-shifted t={t} n={n} k={k}"),
                    &xs,
                    |x| psi_lue_eq62(n, t, k, x, q),
                    |x| psi_lue_shifted(n, t, k, x, q),
                    tol,
                ));
            }
            for l in 0..=5usize {
                report.push(worst(
                    format!("dual-phi-lue t={t} n={n} l={l}"),
                    &xs,
                    |x| Ok((blocks.phi_lue)(n, t, l, x)? / scaled((blocks.phi_lue)(n, t, l, x)?)),
                    |x| Ok(phi_lue_contour(n, t, l, x, q)? / scaled((blocks.phi_lue)(n, t, l, x)?)),
                    tol,
                ));
            }
        }
        let s = 0.5 * t;
        let partner = |x: f64| 0.6 * x + 0.4 * t;
        for n in 0..=4usize {
            report.push(worst(
                format!("dual-bessel-circle t={t} s={s} n={n}"),
                &xs,
                |x| (blocks.bessel_transition)(n, t, s, x, partner(x)),
                |x| bessel_transition_circle(n, t, s, x, partner(x), q),
                tol,
            ));
            report.push(worst(
                format!("dual-bessel-shifted t={t} s={s} n={n}"),
                &xs,
                |x| (blocks.bessel_transition)(n, t, s, x, partner(x)),
                |x| bessel_transition_shifted(n, t, s, x, partner(x), q),
                tol,
            ));
        }
        let gx = grid(-2.5 * t.sqrt(), 2.5 * t.sqrt(), config.points);
        for k in -3i64..=5 {
            report.push(worst(
                format!("dual-psi-gue t={t} k={k}"),
                &gx,
                |x| if k >= 0 { (blocks.psi_gue)(3, t, k, x) } else { psi_gue_line(3, t, k, x, q) },
                |x| if k >= 0 { psi_gue_line(3, t, k, x, q) } else { (blocks.psi_gue)(3, t, k, x) },
                tol,
            ));
        }
        for l in 0..=5usize {
            report.push(worst(
                format!("dual-phi-gue t={t} l={l}"),
                &gx,
                |x| (blocks.phi_gue)(3, t, l, x),
                |x| phi_gue_contour(3, t, l, x, q),
                tol,
            ));
        }
    }
    report
}

fn random_spacelike_pair<R: Rng>(rng: &mut R, max_level: usize, positive: bool) -> (SpaceTimePoint, SpaceTimePoint) {
    let n1 = rng.random_range(1..=max_level);
    let n2 = rng.random_range(n1..=max_level);
    let t2 = rng.random_range(0.5..1.5);
    let t1 = if n1 == n2 { t2 + rng.random_range(0.2..1.0) } else { t2 + rng.random_range(0.0..1.0) };
    let (x1, x2) = if positive {
        (rng.random_range(0.2..6.0), rng.random_range(0.2..6.0))
    } else {
        (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
    };
    let a = SpaceTimePoint::new(x1, n1, t1);
    let b = SpaceTimePoint::new(x2, n2, t2);
    if rng.random::<bool>() { (a, b) } else { (b, a) }
}

fn relative_check(name: String, predicted: f64, estimate: f64, rel: f64) -> CheckReport {
    let mut c = CheckReport::deviation(name, predicted, estimate, rel * predicted.abs().max(1e-3));
    c.tolerance = rel;
    c
}

/// The second kernel term as a finite Ψ·Φ sum against its double contour
/// integral, at random space-like pairs.
pub fn kernel_algebra_checks(config: &IdentityConfig) -> SuiteReport {
    let mut report = SuiteReport::new("kernel-algebra");
    let rel = config.tolerances.kernel_algebra;
    let q = &config.quadrature;
    let mut rng = RngStream::new(config.seed, 11).rng();
    for i in 0..config.kernel_pairs {
        let (a, b) = random_spacelike_pair(&mut rng, 4, false);
        let name = format!("gue-second-term #{i} ({},{},{})→({},{},{})", a.x, a.n, a.t, b.x, b.n, b.t);
        report.push(match (gue_biorthogonal_sum(&a, &b, q), gue_second_term(&a, &b, q)) {
            (Ok(sum), Ok(v)) => relative_check(name, sum, v.value, rel),
            _ => CheckReport::errored(name, f64::NAN),
        });
    }
    let params = LueParams { p: 4 };
    for i in 0..config.kernel_pairs {
        let (a, b) = random_spacelike_pair(&mut rng, 4, true);
        let name = format!("lue-second-term #{i} ({},{},{})→({},{},{})", a.x, a.n, a.t, b.x, b.n, b.t);
        report.push(match (lue_biorthogonal_sum(&a, &b, &params, q), lue_second_term(&a, &b, &params, q)) {
            (Ok(sum), Ok(v)) => relative_check(name, sum, v.value, rel),
            _ => CheckReport::errored(name, f64::NAN),
        });
    }
    report
}

/// Smallest `w` with `P(Poisson(λ) > w) < tail`.
fn poisson_window(lambda: f64, tail: f64) -> usize {
    let mut term = (-lambda).exp();
    let mut cdf = term;
    let mut k = 0usize;
    while 1.0 - cdf >= tail && k < 10_000 {
        k += 1;
        term *= lambda / k as f64;
        cdf += term;
    }
    k
}

enum TraceCase {
    Gue { n: usize, t: f64 },
    Lue { p: usize, n: usize, t: f64 },
    Discrete { n: usize, t: f64 },
}

fn trace_check(case: &TraceCase, tol: f64) -> CheckReport {
    let itol = 1e-8;
    let (name, expected, value) = match *case {
        TraceCase::Gue { n, t } => {
            let w = (4.0 * (n as f64).sqrt() + 8.0) * t.sqrt();
            let v = integrate_real_piecewise(
                |x| {
                    let p = SpaceTimePoint::new(x, n, t);
                    kernel_gue_extended(&p, &p).map(|k| k.value).unwrap_or(f64::NAN)
                },
                &[-w, 0.0, w],
                itol,
            );
            (format!("trace-gue n={n} t={t}"), n as f64, v)
        }
        TraceCase::Lue { p, n, t } => {
            let params = LueParams { p };
            let v = integrate_real_piecewise(
                |x| {
                    let pt = SpaceTimePoint::new(x, n, t);
                    kernel_lue(&pt, &pt, &params).map(|k| k.value).unwrap_or(f64::NAN)
                },
                &[0.0, 8.0 * t, 25.0 * t, 70.0 * t],
                itol,
            );
            (format!("trace-lue p={p} n={n} t={t}"), n as f64, v)
        }
        TraceCase::Discrete { n, t } => {
            let cone = (n * (n + 1) / 2) as f64;
            let hi = poisson_window(cone * t, 1e-10) as i64;
            let v = (-(n as i64)..=hi)
                .map(|x| {
                    let p = SpaceTimePoint::new(x as f64, n, t);
                    kernel_discrete(&p, &p)
                })
                .sum();
            (format!("trace-discrete n={n} t={t} window=[{},{}]", -(n as i64), hi), n as f64, v)
        }
    };
    match value {
        Ok(v) => CheckReport::deviation(name, expected, v, tol),
        Err(_) => CheckReport::errored(name, expected),
    }
}

/// `∫ K(x, x) dx = n` on one level (and `Σ_x K = n` in the discrete case).
/// Cases run in parallel; the report order is fixed.
pub fn trace_checks(config: &IdentityConfig) -> SuiteReport {
    let mut cases = Vec::new();
    for &t in &[0.5, 1.0, 2.0] {
        for n in 1..=config.max_level {
            cases.push(TraceCase::Gue { n, t });
        }
    }
    for p in [3usize, 4] {
        for n in 1..=3usize {
            cases.push(TraceCase::Lue { p, n, t: 1.0 });
        }
    }
    for n in 1..=3usize {
        cases.push(TraceCase::Discrete { n, t: 1.0 });
    }
    let tol = config.tolerances.trace;
    let mut report = SuiteReport::new("trace");
    report.checks = cases.par_iter().map(|c| trace_check(c, tol)).collect();
    report
}

/// Every identity check, in a fixed order.
pub fn identity_suite(config: &IdentityConfig, blocks: &Blocks) -> SuiteReport {
    let mut report = SuiteReport::new("identities");
    report.extend(orthogonality_checks(config));
    report.extend(gue_lemma_checks(config, blocks));
    report.extend(lue_lemma_checks(config, blocks));
    report.extend(biorthogonality_checks(config, blocks));
    report.extend(dual_representation_checks(config, blocks));
    report.extend(kernel_algebra_checks(config));
    report.extend(trace_checks(config));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_window_bounds_tail() {
        assert_eq!(poisson_window(1.0, 0.5), 1);
        let w = poisson_window(1.0, 1e-10);
        assert!((12..16).contains(&w));
    }

    #[test]
    fn small_suite_passes_and_canary_fails() {
        let config = IdentityConfig { max_level: 2, max_p: 2, points: 4, time_grids: vec![[2.0, 1.0, 0.5]], ..Default::default() };
        let good = gue_lemma_checks(&config, &Blocks::default());
        assert!(good.passed(), "{:?}", good.failures().collect::<Vec<_>>());
        fn bad_psi(n: usize, t: f64, k: i64, x: f64) -> Result<f64> {
            Ok(psi_gue(n, t, k, x)? * if k >= 0 { 1.01 } else { 1.0 })
        }
        let blocks = Blocks { psi_gue: bad_psi, ..Default::default() };
        assert!(!gue_lemma_checks(&config, &blocks).passed());
    }
}
