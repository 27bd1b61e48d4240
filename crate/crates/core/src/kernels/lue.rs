use num_complex::Complex64;

use super::{
    cauchy_double_sum, precedes, real_part_checked, sample_circle, self_converge, step_power,
    KernelValue, LueParams, QuadratureOptions, SpaceTimePoint,
};
use crate::contour::{integrate_circle_adaptive, CircleContour};
use crate::error::{Error, Result};
use crate::specfun::{bessel_i_scaled, laguerre, log_factorial};

fn require_positive_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn circle_integral<F>(f: F, center: f64, radius: f64, opts: &QuadratureOptions) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Complex64,
{
    let c = CircleContour::real_center(center, radius, opts.circle_nodes)?;
    let q = integrate_circle_adaptive(f, &c, opts.tol)?;
    Ok((q.value, q.error_estimate))
}

/// `Ψ^{n,t}_k(x)` of the Laguerre process: for `k ≥ 0` the closed form
/// `k!/((n+k)! t^{k+1}) (x/t)^n e^{−x/t} L^n_k(x/t)`, otherwise a circle integral.
/// Vanishes for `x < 0`.
pub fn psi_lue(n: usize, t: f64, k: i64, x: f64) -> Result<f64> {
    require_positive_time(t)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    if k < 0 {
        return psi_lue_shifted(n, t, k, x, &QuadratureOptions::default());
    }
    let k = k as usize;
    let u = x / t;
    let power = if n == 0 {
        0.0
    } else if u == 0.0 {
        return Ok(0.0);
    } else {
        n as f64 * u.ln()
    };
    let log_prefactor =
        log_factorial(k) - log_factorial(n + k) - (k as f64 + 1.0) * t.ln() + power - u;
    Ok(log_prefactor.exp() * laguerre(k, n, u))
}

fn psi_lue_radius(n: usize, k: i64, u: f64) -> f64 {
    let order = (n as i64 + k + 1).max(1) as f64;
    if u > 0.0 {
        (order / u).clamp(0.05, 0.8)
    } else {
        0.8
    }
}

/// `Ψ^{n,t}_k(x) = t^{−(k+1)} (1/2πi)∮_{Γ_0} (z−1)^k z^{−n−k−1} e^{x(z−1)/t} dz`.
pub fn psi_lue_eq62(n: usize, t: f64, k: i64, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    require_positive_time(t)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let u = x / t;
    let r = psi_lue_radius(n, k, u);
    let (kk, order) = (k as i32, -(n as i32) - k as i32 - 1);
    let (v, _) = circle_integral(|z| (z - 1.0).powi(kk) * z.powi(order) * (u * (z - 1.0)).exp(), 0.0, r, opts)?;
    let scale = t.powi(-(kk + 1));
    real_part_checked(v * scale, scale)
}

/// `Ψ^{n,t}_k(x) = −(1/2πi)∮_{Γ_0} (z−t)^{n−1} z^{−n−k−1} e^{x/(z−t)} dz`, the
/// contour excluding `t`.
pub fn psi_lue_shifted(n: usize, t: f64, k: i64, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    require_positive_time(t)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let r = t * psi_lue_radius(n, k, x / t);
    let (a, order) = (n as i32 - 1, -(n as i32) - k as i32 - 1);
    let (v, _) = circle_integral(|z| (z - t).powi(a) * z.powi(order) * (x / (z - t)).exp(), 0.0, r, opts)?;
    real_part_checked(-v, 1.0)
}

/// `Φ^{n,t}_ℓ(x) = t^ℓ L^n_ℓ(x/t)`.
pub fn phi_lue(n: usize, t: f64, l: usize, x: f64) -> Result<f64> {
    require_positive_time(t)?;
    Ok(t.powi(l as i32) * laguerre(l, n, x / t))
}

/// `Φ^{n,t}_ℓ(x) = (1/2πi)∮_{Γ_{0,t}} w^{n+ℓ} (w−t)^{−n−1} e^{−x/(w−t)} dw`.
pub fn phi_lue_contour(n: usize, t: f64, l: usize, x: f64, opts: &QuadratureOptions) -> Result<f64> {
    require_positive_time(t)?;
    let rho = t.max(x.abs());
    let (a, b) = ((n + l) as i32, -(n as i32) - 1);
    let (v, _) = circle_integral(|w| w.powi(a) * (w - t).powi(b) * (-x / (w - t)).exp(), t, rho, opts)?;
    real_part_checked(v, v.norm())
}

/// Squared-Bessel transition density
/// `T^n_{t,s}(x,y) = (x/y)^{n/2} I_n(2√(xy)/(t−s)) e^{−(x+y)/(t−s)}/(t−s)`,
/// normalized in its first (later-time) argument.
pub fn bessel_transition(n: usize, t: f64, s: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > s) {
        return Err(Error::Domain(format!("transition needs t > s, got t = {t}, s = {s}")));
    }
    if x < 0.0 || y < 0.0 {
        return Ok(0.0);
    }
    let d = t - s;
    let nf = n as f64;
    if y == 0.0 {
        let log = nf * x.ln() - nf * d.ln() - log_factorial(n) - x / d;
        return Ok(if n == 0 { (-x / d).exp() / d } else if x == 0.0 { 0.0 } else { log.exp() / d });
    }
    if x == 0.0 {
        return Ok(if n == 0 { (-y / d).exp() / d } else { 0.0 });
    }
    let arg = 2.0 * (x * y).sqrt() / d;
    let scaled = bessel_i_scaled(n as i64, arg)?;
    let gap = x.sqrt() - y.sqrt();
    let log = 0.5 * nf * (x.ln() - y.ln()) - gap * gap / d;
    Ok(scaled * log.exp() / d)
}

fn require_positive_pair(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("contour transition needs x, y > 0, got {x}, {y}")));
    }
    Ok(())
}

/// `T^n_{t,s}(x,y) = (1/(2πi(t−s)))∮_{Γ_0} z^{−n−1} e^{−(x(1−z) + y(1−1/z))/(t−s)} dz`.
pub fn bessel_transition_circle(n: usize, t: f64, s: f64, x: f64, y: f64, opts: &QuadratureOptions) -> Result<f64> {
    if !(t > s) {
        return Err(Error::Domain(format!("transition needs t > s, got t = {t}, s = {s}")));
    }
    require_positive_pair(x, y)?;
    let d = t - s;
    let r = (y / x).sqrt().clamp(1e-3, 1e3);
    let order = -(n as i32) - 1;
    let (v, _) = circle_integral(|z| z.powi(order) * (-(x * (1.0 - z) + y * (1.0 - 1.0 / z)) / d).exp(), 0.0, r, opts)?;
    real_part_checked(v / d, 1.0 / d)
}

/// `T^n_{t,s}(x,y) = −(1/2πi)∮_{Γ_s} (w−t)^{n−1} (w−s)^{−n−1} e^{x/(w−t) − y/(w−s)} dw`,
/// the contour excluding `t`.
pub fn bessel_transition_shifted(n: usize, t: f64, s: f64, x: f64, y: f64, opts: &QuadratureOptions) -> Result<f64> {
    if !(t > s) {
        return Err(Error::Domain(format!("transition needs t > s, got t = {t}, s = {s}")));
    }
    require_positive_pair(x, y)?;
    let d = t - s;
    // Apollonius circle |w − s| = r|w − t|, the image of |z| = r under
    // z = (w − s)/(w − t); it passes through the real saddle.
    let r = (y / x).sqrt().clamp(0.05, 0.9);
    let center = (s - r * r * t) / (1.0 - r * r);
    let rho = r * d / (1.0 - r * r);
    let (a, b) = (n as i32 - 1, -(n as i32) - 1);
    let (v, _) = circle_integral(
        |w| (w - t).powi(a) * (w - s).powi(b) * (x / (w - t) - y / (w - s)).exp(),
        center,
        rho,
        opts,
    )?;
    real_part_checked(-v, 1.0)
}

fn validate_lue(a: &SpaceTimePoint, b: &SpaceTimePoint, params: &LueParams) -> Result<()> {
    a.validate()?;
    b.validate()?;
    if a.n > params.p || b.n > params.p {
        return Err(Error::Domain(format!(
            "levels {} and {} must not exceed p = {}",
            a.n, b.n, params.p
        )));
    }
    Ok(())
}

/// Integrand `e^{−x(1−w)/Δ − y(1−1/w)/Δ} / (w^{p+1−n₂} (w−1)^m)` of the
/// space-like convolution after the substitution `w = (z−t₂)/(z−t₁)`.
fn spacelike_integrand(x: f64, y: f64, dt: f64, order: i32, m: i32) -> impl Fn(Complex64) -> Complex64 {
    move |w: Complex64| {
        (-(x * (1.0 - w) + y * (1.0 - 1.0 / w)) / dt).exp() * w.powi(-order) * (w - 1.0).powi(-m)
    }
}

/// Largest radius used for the saddle circle of the space-like integrand.
const MAX_SADDLE_RADIUS: f64 = 50.0;

/// Radius `√(y/x)` minimizing `Re(x w + y/w)` over circles `|w| = r`.
fn saddle_radius(x: f64, y: f64) -> f64 {
    if x > 0.0 {
        (y / x).sqrt().min(MAX_SADDLE_RADIUS)
    } else {
        MAX_SADDLE_RADIUS
    }
}

/// Distance kept between the saddle circle and the pole at `w = 1`. Near
/// `|w| = 1` the integrand grows like `e^{y δ²/Δ}`, so `δ ≈ √(Δ/y)` keeps it bounded.
fn pole_gap(x: f64, y: f64, dt: f64) -> f64 {
    (dt / (x + y)).sqrt().clamp(0.02, 0.5)
}

/// `∮` around `w = 1` alone, on a circle small enough that `e^{(y−x)ρ/Δ}` stays moderate.
fn unit_pole_integral<F>(h: &F, x: f64, y: f64, dt: f64, opts: &QuadratureOptions) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Complex64,
{
    let rho = (2.0 * dt / (x + y + 1.0)).clamp(1e-3, 0.5).min(0.5 * pole_gap(x, y, dt));
    circle_integral(h, 1.0, rho, opts)
}

/// `∮` of the space-like integrand around `w = 0` alone. When the saddle
/// lies outside the unit circle, a circle through it would also enclose
/// `w = 1`, so the pole contribution is subtracted from the enclosing circle.
fn origin_integral<F>(h: &F, x: f64, y: f64, dt: f64, opts: &QuadratureOptions) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Complex64,
{
    let r = saddle_radius(x, y);
    let gap = pole_gap(x, y, dt);
    if r <= 1.0 {
        return circle_integral(h, 0.0, r.clamp(0.05, 1.0 - gap), opts);
    }
    let (all, e_all) = circle_integral(h, 0.0, r.max(1.0 + gap), opts)?;
    let (g1, e1) = unit_pole_integral(h, x, y, dt, opts)?;
    Ok((all - g1, e_all + e1))
}

/// `∮` of the space-like integrand around both `w = 0` and `w = 1`.
fn both_poles_integral<F>(h: &F, x: f64, y: f64, dt: f64, opts: &QuadratureOptions) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Complex64,
{
    let r = saddle_radius(x, y);
    if r > 1.0 {
        return circle_integral(h, 0.0, r.max(1.0 + pole_gap(x, y, dt)), opts);
    }
    let (g0, e0) = origin_integral(h, x, y, dt, opts)?;
    let (g1, e1) = unit_pole_integral(h, x, y, dt, opts)?;
    Ok((g0 + g1, e0 + e1))
}

/// Space-like convolution of Bessel transitions and the LUE step kernel
/// `1[x ≥ y]` from `a` to `b`. Zero unless `a ≺ b`.
pub fn phi_spacelike_lue(a: &SpaceTimePoint, b: &SpaceTimePoint, params: &LueParams) -> Result<f64> {
    validate_lue(a, b, params)?;
    if !precedes(a, b) {
        return Ok(0.0);
    }
    let opts = QuadratureOptions::default();
    let m = b.n - a.n;
    let dt = a.t - b.t;
    if m == 0 {
        return bessel_transition(params.p - a.n, a.t, b.t, a.x, b.x);
    }
    if dt == 0.0 {
        let d = a.x - b.x;
        return Ok(if d >= 0.0 { step_power(d, m) } else { 0.0 });
    }
    if a.x < 0.0 || b.x < 0.0 {
        return Ok(0.0);
    }
    let order = (params.p + 1 - b.n) as i32;
    let h = spacelike_integrand(a.x, b.x, dt, order, m as i32);
    let (g, _) = both_poles_integral(&h, a.x, b.x, dt, &opts)?;
    let scale = dt.powi(m as i32 - 1);
    real_part_checked(g * scale, scale)
}

/// First (space-like) term of the LUE kernel, nonzero only when `a ≺ b`.
///
/// Equal times give `(x₁−x₂)^{m−1}/(m−1)!·1[x₂ > x₁]`; otherwise the circle
/// integral around `w = 0` alone, `−Δ^{m−1}(1/2πi)∮_{|w|<1}`.
pub fn lue_first_term(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    params: &LueParams,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    validate_lue(a, b, params)?;
    if !precedes(a, b) || a.x < 0.0 || b.x < 0.0 {
        return Ok(KernelValue::exact(0.0));
    }
    let m = b.n - a.n;
    let dt = a.t - b.t;
    if dt == 0.0 {
        let v = if b.x > a.x { step_power(a.x - b.x, m) } else { 0.0 };
        return Ok(KernelValue::exact(v));
    }
    let order = (params.p + 1 - b.n) as i32;
    let h = spacelike_integrand(a.x, b.x, dt, order, m as i32);
    let (g0, err) = origin_integral(&h, a.x, b.x, dt, opts)?;
    let scale = dt.powi(m as i32 - 1);
    Ok(KernelValue {
        value: -real_part_checked(g0 * scale, scale)?,
        quadrature_error_estimate: err * scale,
    })
}

/// `−(1/(2πi)²)∮_{Γ_0}dz∮_{Γ_{z,t₂}}dw e^{x₁/(z−t₁)−x₂/(w−t₂)} (z−t₁)^{p−1−n₁} w^p
/// / ((w−t₂)^{p+1−n₂} z^p (w−z))`, with the `w`-circle centered at `t₂`
/// enclosing the whole `z`-circle.
pub fn lue_second_term(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    params: &LueParams,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    validate_lue(a, b, params)?;
    if a.x < 0.0 || b.x < 0.0 {
        return Ok(KernelValue::exact(0.0));
    }
    let (t1, t2, x1, x2) = (a.t, b.t, a.x, b.x);
    let p = params.p as i32;
    let rz = t1 / 2.0;
    let rw = (t2 + rz + 0.5).max(x2 / 2.0).max(1.0);
    if rw - (t2 + rz) < 0.25 {
        return Err(Error::ContourSeparation(format!(
            "w-circle radius {rw} around {t2} does not clear the z-circle of radius {rz}"
        )));
    }
    let z_circle = CircleContour::real_center(0.0, rz, opts.circle_nodes)?;
    let w_circle = CircleContour::real_center(t2, rw, opts.circle_nodes)?;
    let (az, bw) = (p - 1 - a.n as i32, -(p + 1 - b.n as i32));
    let (value, err) = self_converge(
        |level| {
            let scale = 1usize << level;
            let (zs, fz) = sample_circle(
                |z| (x1 / (z - t1)).exp() * (z - t1).powi(az) * z.powi(-p),
                &z_circle.with_nodes(z_circle.nodes * scale),
            )?;
            let (ws, gw) = sample_circle(
                |w| (-x2 / (w - t2)).exp() * (w - t2).powi(bw) * w.powi(p),
                &w_circle.with_nodes(w_circle.nodes * scale),
            )?;
            Ok(-cauchy_double_sum(&zs, &fz, &ws, &gw))
        },
        opts.tol,
    )?;
    Ok(KernelValue { value: real_part_checked(value, value.norm())?, quadrature_error_estimate: err })
}

/// `Σ_{k=1}^{n₂} Ψ^{p−n₁,t₁}_{n₁−k}(x₁) Φ^{p−n₂,t₂}_{n₂−k}(x₂)`.
pub fn lue_biorthogonal_sum(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    params: &LueParams,
    opts: &QuadratureOptions,
) -> Result<f64> {
    validate_lue(a, b, params)?;
    let mut total = 0.0;
    for k in 1..=b.n {
        let idx = a.n as i64 - k as i64;
        let psi = if idx >= 0 {
            psi_lue(params.p - a.n, a.t, idx, a.x)?
        } else {
            psi_lue_shifted(params.p - a.n, a.t, idx, a.x, opts)?
        };
        total += psi * phi_lue(params.p - b.n, b.t, b.n - k, b.x)?;
    }
    Ok(total)
}

/// Kernel of the eigenvalues of `A*A` minors for a `p × n` complex Brownian
/// matrix `A`, along space-like paths.
pub fn kernel_lue(a: &SpaceTimePoint, b: &SpaceTimePoint, params: &LueParams) -> Result<KernelValue> {
    kernel_lue_with(a, b, params, &QuadratureOptions::default())
}

pub fn kernel_lue_with(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    params: &LueParams,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    validate_lue(a, b, params)?;
    require_positive_time(a.t)?;
    require_positive_time(b.t)?;
    opts.validate()?;
    let first = lue_first_term(a, b, params, opts)?;
    let second = lue_second_term(a, b, params, opts)?;
    Ok(KernelValue {
        value: first.value + second.value,
        quadrature_error_estimate: first.quadrature_error_estimate + second.quadrature_error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x: f64, n: usize, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(x, n, t)
    }

    #[test]
    fn psi_representations_agree() {
        let o = QuadratureOptions::default();
        assert_relative_eq!(psi_lue(0, 2.0, 0, 1.5).unwrap(), (-0.75f64).exp() / 2.0, epsilon = 1e-15);
        for n in 0..4 {
            for k in -3i64..5 {
                for &x in &[0.3, 1.7, 4.0] {
                    let a = psi_lue_eq62(n, 1.3, k, x, &o).unwrap();
                    let b = psi_lue_shifted(n, 1.3, k, x, &o).unwrap();
                    assert!((a - b).abs() < 1e-10, "n={n} k={k} x={x}: {a} vs {b}");
                    if k >= 0 {
                        let c = psi_lue(n, 1.3, k, x).unwrap();
                        assert!((a - c).abs() < 1e-10, "closed n={n} k={k} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let o = QuadratureOptions::default();
        assert_eq!(phi_lue(3, 1.1, 0, 2.0).unwrap(), 1.0);
        assert_relative_eq!(phi_lue(2, 1.0, 1, 0.7).unwrap(), 2.3, epsilon = 1e-14);
        for l in 0..6 {
            let a = phi_lue(2, 1.5, l, 2.2).unwrap();
            let b = phi_lue_contour(2, 1.5, l, 2.2, &o).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn transition_representations_agree() {
        let o = QuadratureOptions::default();
        for n in 0..6 {
            for &(x, y) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.7), (7.4, 4.6), (12.0, 9.0)] {
                let a = bessel_transition(n, 2.0, 1.0, x, y).unwrap();
                let b = bessel_transition_circle(n, 2.0, 1.0, x, y, &o).unwrap();
                let c = bessel_transition_shifted(n, 2.0, 1.0, x, y, &o).unwrap();
                assert!((a - b).abs() < 1e-10 && (a - c).abs() < 1e-10, "{a} {b} {c}");
            }
        }
        assert!(bessel_transition(1, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn spacelike_reductions() {
        let p = LueParams { p: 3 };
        let v = phi_spacelike_lue(&pt(1.2, 2, 2.0), &pt(0.5, 2, 1.0), &p).unwrap();
        assert_relative_eq!(v, bessel_transition(1, 2.0, 1.0, 1.2, 0.5).unwrap(), epsilon = 1e-14);
        assert_eq!(phi_spacelike_lue(&pt(1.2, 1, 1.0), &pt(0.5, 2, 1.0), &p).unwrap(), 1.0);
        assert_eq!(phi_spacelike_lue(&pt(0.2, 1, 1.0), &pt(0.5, 2, 1.0), &p).unwrap(), 0.0);
        assert_eq!(phi_spacelike_lue(&pt(0.2, 2, 1.0), &pt(0.5, 1, 1.0), &p).unwrap(), 0.0);
    }

    #[test]
    fn one_by_one_density() {
        let p = LueParams { p: 1 };
        for &x in &[0.1, 1.0, 3.0] {
            let k = kernel_lue(&pt(x, 1, 1.0), &pt(x, 1, 1.0), &p).unwrap();
            assert_relative_eq!(k.value, (-x).exp(), epsilon = 1e-10);
        }
    }

    #[test]
    fn second_term_matches_sum() {
        let o = QuadratureOptions::default();
        let p = LueParams { p: 4 };
        for (a, b) in [
            (pt(0.8, 2, 1.0), pt(1.5, 3, 0.5)),
            (pt(2.1, 3, 0.7), pt(0.4, 1, 1.4)),
            (pt(1.0, 2, 1.0), pt(3.0, 2, 1.0)),
        ] {
            let q = lue_second_term(&a, &b, &p, &o).unwrap().value;
            let s = lue_biorthogonal_sum(&a, &b, &p, &o).unwrap();
            assert!((q - s).abs() < 1e-9 * s.abs().max(1.0), "{q} vs {s}");
        }
    }
}
