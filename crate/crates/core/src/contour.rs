//! Quadrature for `(1/2πi)∮` over circles and `(1/2πi)∫` over truncated
//! vertical lines `ε + iℝ`, plus composite Gauss–Legendre rules on intervals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of nodes on a circle.
pub const DEFAULT_CIRCLE_NODES: usize = 256;
/// Default number of nodes on a vertical line.
pub const DEFAULT_LINE_NODES: usize = 400;
/// Tail bound used to truncate vertical lines.
pub const LINE_TAIL_TOLERANCE: f64 = 1e-14;
/// Relative endpoint magnitude above which a truncated line is flagged.
pub const TAIL_WARNING_RATIO: f64 = 1e-13;
/// Self-convergence target for adaptive node doubling.
pub const SELF_CONVERGENCE_TOL: f64 = 1e-9;

const PANEL_ORDER: usize = 16;
const MAX_DOUBLINGS: usize = 8;

/// Positively oriented circle `center + radius·e^{iθ}` sampled at `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleContour {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl CircleContour {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Invalid(format!("circle radius must be positive, got {radius}")));
        }
        if nodes < 8 {
            return Err(Error::Invalid(format!("circle needs at least 8 nodes, got {nodes}")));
        }
        Ok(Self { center, radius, nodes })
    }

    pub fn real_center(center: f64, radius: f64, nodes: usize) -> Result<Self> {
        Self::new(Complex64::new(center, 0.0), radius, nodes)
    }

    /// Nodes `z_j` with weights `ω_j` such that `Σ ω_j f(z_j) ≈ (1/2πi)∮ f(z) dz`.
    pub fn points(&self) -> Vec<(Complex64, Complex64)> {
        let m = self.nodes as f64;
        (0..self.nodes)
            .map(|j| {
                let offset = Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / m);
                (self.center + offset, offset / m)
            })
            .collect()
    }

    /// Whether `z` lies strictly inside the circle.
    pub fn encloses(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Distance from `z` to the circle itself.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        Self { nodes, ..*self }
    }
}

/// Vertical segment from `ε − iL` to `ε + iL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalLineContour {
    pub real_part: f64,
    pub half_length: f64,
    pub nodes: usize,
}

impl VerticalLineContour {
    pub fn new(real_part: f64, half_length: f64, nodes: usize) -> Result<Self> {
        if !real_part.is_finite() {
            return Err(Error::Invalid(format!("line real part must be finite, got {real_part}")));
        }
        if !(half_length > real_part.abs()) || !half_length.is_finite() {
            return Err(Error::Invalid(format!(
                "half length {half_length} must exceed the distance {} to the imaginary axis",
                real_part.abs()
            )));
        }
        if nodes < PANEL_ORDER {
            return Err(Error::Invalid(format!("line needs at least {PANEL_ORDER} nodes")));
        }
        Ok(Self { real_part, half_length, nodes })
    }

    /// Line for integrands carrying `e^{t·w²}`: truncation keeps the tail below
    /// [`LINE_TAIL_TOLERANCE`] for the given time scale `t`.
    pub fn for_gaussian(real_part: f64, t: f64, nodes: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("gaussian time scale must be positive, got {t}")));
        }
        Self::new(real_part, gaussian_half_length(real_part, t), nodes)
    }

    /// Nodes `w_j` with weights `ω_j` such that `Σ ω_j f(w_j) ≈ (1/2πi)∫ f(w) dw`.
    pub fn points(&self) -> Vec<(Complex64, Complex64)> {
        let panels = self.nodes.div_ceil(PANEL_ORDER);
        let (xs, ws) = gauss_legendre_default();
        let h = 2.0 * self.half_length / panels as f64;
        let mut out = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let mid = -self.half_length + (p as f64 + 0.5) * h;
            for (x, w) in xs.iter().zip(ws) {
                let y = mid + 0.5 * h * x;
                out.push((
                    Complex64::new(self.real_part, y),
                    Complex64::new(0.5 * h * w / (2.0 * PI), 0.0),
                ));
            }
        }
        out
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        Self { nodes, ..*self }
    }
}

/// `|ε| + sqrt(ln(1/τ)/t + ε²)` with `τ =` [`LINE_TAIL_TOLERANCE`].
pub fn gaussian_half_length(real_part: f64, t: f64) -> f64 {
    real_part.abs() + ((1.0 / LINE_TAIL_TOLERANCE).ln() / t + real_part * real_part).sqrt()
}

/// Result of a contour quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    pub nodes: usize,
}

/// Result of a single vertical-line quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegral {
    pub value: Complex64,
    /// Largest endpoint magnitude relative to the accumulated `Σ|ω f|`.
    pub tail_ratio: f64,
}

impl LineIntegral {
    pub fn tail_warning(&self) -> bool {
        self.tail_ratio > TAIL_WARNING_RATIO
    }

    pub fn checked(self) -> Result<Complex64> {
        if self.tail_warning() {
            Err(Error::TailTooLarge { ratio: self.tail_ratio })
        } else {
            Ok(self.value)
        }
    }
}

fn checked_eval<F>(f: &F, index: usize, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let v = f(z);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteNode { index, node: z, value: v })
    }
}

/// `(1/2πi)∮ f(z) dz` by the trapezoid rule on a circle.
pub fn integrate_circle<F>(f: F, c: &CircleContour) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, (z, w)) in c.points().into_iter().enumerate() {
        acc += w * checked_eval(&f, j, z)?;
    }
    Ok(acc)
}

/// Circle quadrature with node doubling until two successive values differ by
/// less than `tol · max(1, |value|)`.
pub fn integrate_circle_adaptive<F>(f: F, c: &CircleContour, tol: f64) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut contour = *c;
    let mut prev = integrate_circle(&f, &contour)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        contour = contour.with_nodes(contour.nodes * 2);
        let cur = integrate_circle(&f, &contour)?;
        change = (cur - prev).norm();
        prev = cur;
        if change <= tol * cur.norm().max(1.0) {
            return Ok(Quadrature { value: cur, error_estimate: change, nodes: contour.nodes });
        }
    }
    Err(Error::NoConvergence { change, tol })
}

/// `(1/2πi)∫_{ε−iL}^{ε+iL} f(w) dw` by composite Gauss–Legendre panels.
pub fn integrate_vline<F>(f: F, c: &VerticalLineContour) -> Result<LineIntegral>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for (j, (w, weight)) in c.points().into_iter().enumerate() {
        let term = weight * checked_eval(&f, j, w)?;
        acc += term;
        magnitude += term.norm();
    }
    let top = checked_eval(&f, usize::MAX, Complex64::new(c.real_part, c.half_length))?.norm();
    let bottom = checked_eval(&f, usize::MAX, Complex64::new(c.real_part, -c.half_length))?.norm();
    let tail_ratio = if magnitude > 0.0 { top.max(bottom) / magnitude } else { 0.0 };
    Ok(LineIntegral { value: acc, tail_ratio })
}

/// Vertical-line quadrature that lengthens the line while the tail check fires
/// and doubles nodes until self-convergence below `tol · max(1, |value|)`.
pub fn integrate_vline_adaptive<F>(f: F, c: &VerticalLineContour, tol: f64) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut contour = *c;
    let mut first = integrate_vline(&f, &contour)?;
    let mut stretches = 0;
    while first.tail_warning() {
        stretches += 1;
        if stretches > 12 {
            return Err(Error::TailTooLarge { ratio: first.tail_ratio });
        }
        contour.half_length *= 1.25;
        contour.nodes = (contour.nodes as f64 * 1.25).ceil() as usize;
        first = integrate_vline(&f, &contour)?;
    }
    let mut prev = first.value;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        contour = contour.with_nodes(contour.nodes * 2);
        let cur = integrate_vline(&f, &contour)?.value;
        change = (cur - prev).norm();
        prev = cur;
        if change <= tol * cur.norm().max(1.0) {
            return Ok(Quadrature { value: cur, error_estimate: change, nodes: contour.nodes });
        }
    }
    Err(Error::NoConvergence { change, tol })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gauss_legendre_default() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Composite Gauss–Legendre nodes on `[a, b]` with `panels` panels of order 16.
pub fn real_panel_points(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre_default();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(ws) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// `∫_a^b f(x) dx` on composite Gauss–Legendre panels.
pub fn integrate_real<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    real_panel_points(a, b, panels).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// `∫_a^b f` with panel doubling until the change is below `tol · max(1, |value|)`.
pub fn integrate_real_adaptive<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut panels = 8;
    let mut prev = integrate_real(&f, a, b, panels);
    let mut change = f64::INFINITY;
    for _ in 0..10 {
        panels *= 2;
        let cur = integrate_real(&f, a, b, panels);
        change = (cur - prev).abs();
        prev = cur;
        if !cur.is_finite() {
            return Err(Error::Invalid(format!("non-finite integral on [{a}, {b}]")));
        }
        if change <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
    }
    Err(Error::NoConvergence { change, tol })
}

/// Integral over several consecutive intervals split at `breaks` (sorted).
pub fn integrate_real_piecewise<F>(f: F, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut total = 0.0;
    for pair in breaks.windows(2) {
        if pair[1] > pair[0] {
            total += integrate_real_adaptive(&f, pair[0], pair[1], tol)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_examples() {
        let unit = CircleContour::real_center(0.0, 1.0, 256).unwrap();
        let v = integrate_circle(|z| 1.0 / z, &unit).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-14);
        assert!(v.im.abs() < 1e-14);

        let off = CircleContour::new(c(0.3, -0.2), 0.7, 64).unwrap();
        assert!(integrate_circle(|z| z, &off).unwrap().norm() < 1e-14);

        let small = CircleContour::real_center(0.0, 0.5, 256).unwrap();
        let v = integrate_circle(|z| z.exp() / (z * z), &small).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn circle_laurent_monomials_exact() {
        let circle = CircleContour::new(c(0.4, 0.1), 0.9, 64).unwrap();
        for k in -31i32..31 {
            let v = integrate_circle(|z| (z - circle.center).powi(k), &circle).unwrap();
            let expected = if k == -1 { 1.0 } else { 0.0 };
            assert!((v - expected).norm() < 1e-12, "k = {k}: {v}");
        }
    }

    #[test]
    fn circle_reports_non_finite_node() {
        let circle = CircleContour::real_center(1.0, 1.0, 16).unwrap();
        let err = integrate_circle(|z| 1.0 / (z - 2.0), &circle).unwrap_err();
        assert!(matches!(err, Error::NonFiniteNode { index: 0, .. }));
    }

    #[test]
    fn vline_gaussian_examples() {
        for (a, expected) in [(0.0, 0.282_094_791_773_878_1), (1.0, 0.103_776_874_355_148_7)] {
            let line = VerticalLineContour::for_gaussian(1.0, 1.0, DEFAULT_LINE_NODES).unwrap();
            let v = integrate_vline(|w| (w * w - 2.0 * a * w).exp(), &line).unwrap();
            assert!(!v.tail_warning());
            assert_relative_eq!(v.value.re, expected, epsilon = 1e-12);
            assert!(v.value.im.abs() < 1e-12);
        }
        let line = VerticalLineContour::for_gaussian(1.0, 1.0, DEFAULT_LINE_NODES).unwrap();
        let v = integrate_vline(|w| (w * w).exp(), &line).unwrap();
        assert_relative_eq!(2.0 * v.value.re, 1.0 / PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn vline_tail_warning_fires_on_short_line() {
        let line = VerticalLineContour::new(1.0, 2.0, 64).unwrap();
        let v = integrate_vline(|w| (w * w).exp(), &line).unwrap();
        assert!(v.tail_warning());
        assert!(v.checked().is_err());
        let q = integrate_vline_adaptive(|w| (w * w).exp(), &line, 1e-12).unwrap();
        assert_relative_eq!(q.value.re, 0.5 / PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (xs, ws) = gauss_legendre(16);
        for k in 0..32 {
            let v: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(k)).sum();
            let expected = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - expected).abs() < 1e-14, "k = {k}");
        }
        let v = integrate_real_adaptive(|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-13).unwrap();
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn invalid_contours_rejected() {
        assert!(CircleContour::real_center(0.0, 0.0, 64).is_err());
        assert!(CircleContour::real_center(0.0, 1.0, 4).is_err());
        assert!(VerticalLineContour::new(f64::NAN, 3.0, 64).is_err());
        assert!(VerticalLineContour::new(-1.0, 0.5, 64).is_err());
        assert!(VerticalLineContour::new(1.0, 0.5, 64).is_err());
    }
}
