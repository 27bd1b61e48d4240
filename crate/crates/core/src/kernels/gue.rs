use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    cauchy_double_sum, precedes, real_part_checked, sample_circle, sample_line, self_converge,
    step_power, KernelValue, QuadratureOptions, SpaceTimePoint,
};
use crate::contour::{
    integrate_circle, integrate_vline_adaptive, CircleContour, VerticalLineContour,
};
use crate::error::{Error, Result};
use crate::specfun::{factorial, hermite};

fn require_positive_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// `Ψ^{n,t}_k(x)`: closed Hermite form for `k ≥ 0`, line integral for `k < 0`.
/// The value does not depend on `n`.
pub fn psi_gue(n: usize, t: f64, k: i64, x: f64) -> Result<f64> {
    psi_gue_with(n, t, k, x, &QuadratureOptions::default())
}

pub fn psi_gue_with(n: usize, t: f64, k: i64, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    require_positive_time(t)?;
    if k < 0 {
        return psi_gue_line(n, t, k, x, opts);
    }
    let y = x / t.sqrt();
    let k = k as usize;
    Ok(hermite(k, y) * (-y * y).exp() / (PI.sqrt() * t.powf((k as f64 + 1.0) / 2.0)))
}

/// `Ψ^{n,t}_k(x) = 2^{k+1} t^{-(k+1)/2} (1/2πi)∫_{ε+iℝ} e^{w² − 2wx/√t} w^k dw`.
pub fn psi_gue_line(_n: usize, t: f64, k: i64, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    require_positive_time(t)?;
    opts.validate()?;
    let y = x / t.sqrt();
    let eps = opts.epsilon.max(y);
    let line = VerticalLineContour::for_gaussian(eps, 1.0, opts.line_nodes)?;
    let kk = k as i32;
    let q = integrate_vline_adaptive(|w| (w * w - 2.0 * y * w).exp() * w.powi(kk), &line, opts.tol)?;
    let scale = 2f64.powi(kk + 1) / t.powf((k as f64 + 1.0) / 2.0);
    real_part_checked(q.value * scale, scale)
}

/// `Φ^{n,t}_ℓ(x) = t^{ℓ/2} p_ℓ(x/√t) / (2^ℓ ℓ!)`, a polynomial of degree `ℓ`.
pub fn phi_gue(_n: usize, t: f64, l: usize, x: f64) -> Result<f64> {
    require_positive_time(t)?;
    let y = x / t.sqrt();
    Ok(t.powf(l as f64 / 2.0) * hermite(l, y) / (2f64.powi(l as i32) * factorial(l)))
}

/// `Φ^{n,t}_ℓ(x) = (t^{ℓ/2}/2^ℓ)(1/2πi)∮_{Γ_0} e^{−z² + 2zx/√t} z^{−ℓ−1} dz`.
pub fn phi_gue_contour(_n: usize, t: f64, l: usize, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    require_positive_time(t)?;
    let y = x / t.sqrt();
    let circle = CircleContour::real_center(0.0, 1.0, opts.circle_nodes)?;
    let p = -(l as i32) - 1;
    let v = integrate_circle(|z| (-z * z + 2.0 * y * z).exp() * z.powi(p), &circle)?;
    let scale = t.powf(l as f64 / 2.0) / 2f64.powi(l as i32);
    real_part_checked(v * scale, scale)
}

/// Gaussian transition `T_{t,s}(x,y) = e^{−(x−y)²/(t−s)} / √(π(t−s))`.
pub fn heat_kernel(t: f64, s: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > s) {
        return Err(Error::Domain(format!("heat kernel needs t > s, got t = {t}, s = {s}")));
    }
    let d = t - s;
    Ok((-(x - y) * (x - y) / d).exp() / (PI * d).sqrt())
}

/// `(1/2πi)∫ e^{τw² − 2δw} w^{−m} dw` along any vertical line right of the
/// origin. The line is moved to the saddle `δ/τ` once it is farther than
/// `c_min` from the origin; a saddle on the left picks up the residue at
/// `w = 0`, the coefficient of `w^{m−1}` in `e^{τw² − 2δw}`.
fn gaussian_line_integral(tau: f64, delta: f64, m: i32, c_min: f64, opts: &QuadratureOptions) -> Result<Complex64> {
    let saddle = delta / tau;
    let c = if saddle.abs() > c_min { saddle } else { c_min };
    let line = VerticalLineContour::for_gaussian(c, tau, opts.line_nodes)?;
    let q = integrate_vline_adaptive(|w| (tau * w * w - 2.0 * delta * w).exp() * w.powi(-m), &line, opts.tol)?;
    if c > 0.0 {
        return Ok(q.value);
    }
    let k = (m - 1) as usize;
    let residue: f64 = (0..=k / 2)
        .map(|j| tau.powi(j as i32) / factorial(j) * (-2.0 * delta).powi((k - 2 * j) as i32) / factorial(k - 2 * j))
        .sum();
    Ok(q.value + residue)
}

/// Space-like composition of step and heat kernels from `a` to `b`:
/// heat kernel for equal levels, `(x_b − x_a)^{m−1}/(m−1)!·1[x_b > x_a]` for
/// equal times, and a single line integral otherwise. Zero unless `a ≺ b`.
pub fn phi_spacelike_gue(a: &SpaceTimePoint, b: &SpaceTimePoint) -> Result<f64> {
    phi_spacelike_gue_with(a, b, &QuadratureOptions::default())
}

pub fn phi_spacelike_gue_with(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    opts: &QuadratureOptions,
) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if !precedes(a, b) {
        return Ok(0.0);
    }
    let m = b.n - a.n;
    let dt = a.t - b.t;
    if m == 0 {
        return heat_kernel(a.t, b.t, a.x, b.x);
    }
    if dt == 0.0 {
        let d = b.x - a.x;
        return Ok(if d > 0.0 { step_power(d, m) } else { 0.0 });
    }
    let q = gaussian_line_integral(dt, a.x - b.x, m as i32, 0.5, opts)?;
    let scale = 2f64.powi(1 - m as i32);
    real_part_checked(q * scale, scale)
}

/// Extended kernel of Hermitian Brownian minors along space-like paths.
pub fn kernel_gue_extended(a: &SpaceTimePoint, b: &SpaceTimePoint) -> Result<KernelValue> {
    kernel_gue_extended_with(a, b, &QuadratureOptions::default())
}

pub fn kernel_gue_extended_with(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    a.validate()?;
    b.validate()?;
    require_positive_time(a.t)?;
    require_positive_time(b.t)?;
    opts.validate()?;
    let first = if precedes(a, b) {
        -2f64.powi((b.n - a.n) as i32) * phi_spacelike_gue_with(a, b, opts)?
    } else {
        0.0
    };
    let second = gue_second_term(a, b, opts)?;
    Ok(KernelValue {
        value: first + second.value,
        quadrature_error_estimate: second.quadrature_error_estimate,
    })
}

/// Static minor kernel: the extended kernel at `t₁ = t₂ = 1`.
pub fn kernel_gue_static(x1: f64, n1: usize, x2: f64, n2: usize) -> Result<KernelValue> {
    kernel_gue_extended(&SpaceTimePoint::new(x1, n1, 1.0), &SpaceTimePoint::new(x2, n2, 1.0))
}

/// Contours of the double integral: the `z`-circle radius `ρ`, shrunk
/// towards the saddle `n₂/(2|x₂|)` of its integrand, and the abscissa `σ` of
/// the `w`-line. The line passes through the saddle `x₁/t₁` of its integrand
/// when that lies left of `−ε`; it then crosses the circle and the residue at
/// `w = z` has to be added back (`crossed = true`).
pub(crate) struct SecondTermContours {
    pub sigma: f64,
    pub rho: f64,
    pub crossed: bool,
}

pub(crate) fn second_term_contours(a: &SpaceTimePoint, b: &SpaceTimePoint, eps: f64) -> SecondTermContours {
    let rho = if b.x != 0.0 {
        (0.5 * eps).min(b.n as f64 / (2.0 * b.x.abs())).max(MIN_CIRCLE_RADIUS)
    } else {
        0.5 * eps
    };
    let saddle = a.x / a.t;
    if saddle < -eps {
        SecondTermContours { sigma: saddle, rho, crossed: true }
    } else {
        SecondTermContours { sigma: saddle.max(eps), rho, crossed: false }
    }
}

const MIN_CIRCLE_RADIUS: f64 = 1e-3;

/// `(2/(2πi)²)∮_{|z|=ρ}dz ∫_{σ+iℝ}dw e^{t₁w²−2x₁w} w^{n₁} / (e^{t₂z²−2x₂z} z^{n₂} (w−z))`
/// with the line right of the circle.
pub fn gue_second_term(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    let c = second_term_contours(a, b, opts.epsilon);
    let (n1, n2) = (a.n as i32, b.n as i32);
    let f = |w: Complex64| (a.t * w * w - 2.0 * a.x * w).exp() * w.powi(n1);
    let g = |z: Complex64| (-b.t * z * z + 2.0 * b.x * z).exp() * z.powi(-n2);
    let base_line = VerticalLineContour::for_gaussian(c.sigma, a.t, opts.line_nodes)?;
    let base_circle = CircleContour::real_center(0.0, c.rho, opts.circle_nodes)?;
    let (value, err) = self_converge(
        |level| {
            let scale = 1usize << level;
            let (ws, fw) = sample_line(f, &base_line.with_nodes(base_line.nodes * scale))?;
            let (zs, gz) = sample_circle(g, &base_circle.with_nodes(base_circle.nodes * scale))?;
            let mut v = cauchy_double_sum(&zs, &gz, &ws, &fw);
            if c.crossed {
                v += zs.iter().zip(&gz).map(|(z, gv)| gv * f(*z)).sum::<Complex64>();
            }
            Ok(2.0 * v)
        },
        opts.tol,
    )?;
    Ok(KernelValue { value: real_part_checked(value, value.norm())?, quadrature_error_estimate: err })
}

/// `2^{n₂−n₁} Σ_{k=1}^{n₂} Ψ^{n₁,t₁}_{n₁−k}(x₁) Φ^{n₂,t₂}_{n₂−k}(x₂)`.
pub fn gue_biorthogonal_sum(a: &SpaceTimePoint, b: &SpaceTimePoint, opts: &QuadratureOptions) -> Result<f64> {
    let mut total = 0.0;
    for k in 1..=b.n {
        let psi = psi_gue_with(a.n, a.t, a.n as i64 - k as i64, a.x, opts)?;
        let phi = phi_gue(b.n, b.t, b.n - k, b.x)?;
        total += psi * phi;
    }
    Ok(total * 2f64.powi(b.n as i32 - a.n as i32))
}

/// Kernel of the diffusion limit of the interlaced particle system, in the
/// variables `(ξ, n, τ)`. Evaluated with contours rescaled by `√τ`.
pub fn kernel_diffusion_scaled(a: &SpaceTimePoint, b: &SpaceTimePoint) -> Result<KernelValue> {
    kernel_diffusion_scaled_with(a, b, &QuadratureOptions::default())
}

pub fn kernel_diffusion_scaled_with(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    a.validate()?;
    b.validate()?;
    require_positive_time(a.t)?;
    require_positive_time(b.t)?;
    opts.validate()?;
    let (n1, n2) = (a.n as i32, b.n as i32);
    let first = if precedes(a, b) {
        let m = n2 - n1;
        let dt = a.t - b.t;
        if m == 0 {
            -heat_kernel(a.t, b.t, a.x, b.x)?
        } else if dt == 0.0 {
            let d = b.x - a.x;
            if d > 0.0 {
                -2f64.powi(m) * step_power(d, m as usize)
            } else {
                0.0
            }
        } else {
            let sd = dt.sqrt();
            let y = (a.x - b.x) / sd;
            let q = gaussian_line_integral(1.0, y, m, 0.5 * sd, opts)?;
            let scale = 2.0 * sd.powi(m - 1);
            -real_part_checked(q * scale, scale)?
        }
    } else {
        0.0
    };

    let (s1, s2) = (a.t.sqrt(), b.t.sqrt());
    let (y1, y2) = (a.x / s1, b.x / s2);
    let c = second_term_contours(a, b, opts.epsilon);
    let f = |w: Complex64| (w * w - 2.0 * y1 * w).exp() * w.powi(n1);
    let g = |z: Complex64| (-z * z + 2.0 * y2 * z).exp() * z.powi(-n2);
    let base_line = VerticalLineContour::for_gaussian(c.sigma * s1, 1.0, opts.line_nodes)?;
    let base_circle = CircleContour::real_center(0.0, c.rho * s2, opts.circle_nodes)?;
    let prefactor = 2.0 * s1.powi(-n1 - 1) * s2.powi(n2 - 1);
    let (value, err) = self_converge(
        |level| {
            let scale = 1usize << level;
            let (ws, fw) = sample_line(f, &base_line.with_nodes(base_line.nodes * scale))?;
            let (zs, gz) = sample_circle(g, &base_circle.with_nodes(base_circle.nodes * scale))?;
            let mut v = cauchy_double_sum(
                &zs.iter().map(|z| z / s2).collect::<Vec<_>>(),
                &gz,
                &ws.iter().map(|w| w / s1).collect::<Vec<_>>(),
                &fw,
            );
            if c.crossed {
                // Residue at ŵ/√t₁ = ẑ/√t₂, with dŵ/(ŵ − √t₁ẑ/√t₂) = dw/(w − z).
                v += zs.iter().zip(&gz).map(|(z, gv)| gv * f(z * s1 / s2) * s1).sum::<Complex64>();
            }
            Ok(prefactor * v)
        },
        opts.tol,
    )?;
    let second = real_part_checked(value, value.norm())?;
    Ok(KernelValue { value: first + second, quadrature_error_estimate: err })
}
