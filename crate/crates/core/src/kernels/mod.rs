//! Building blocks (Ψ, Φ, transition kernels, space-like convolutions) and the
//! correlation kernels of the GUE minor process, the Wishart/Laguerre minor
//! process, the 2+1 dimensional particle system and its diffusion limit.
//!
//! Every kernel is evaluated by contour quadrature. Closed forms are used for
//! the building blocks where available, and the contour representations are
//! exposed separately so that both can be compared.

mod discrete;
mod gue;
mod lue;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{
    CircleContour, VerticalLineContour, DEFAULT_CIRCLE_NODES, DEFAULT_LINE_NODES,
    TAIL_WARNING_RATIO,
};
use crate::error::{Error, Result};

pub use discrete::{kernel_discrete, kernel_discrete_with, DiscreteContours};
pub use gue::{
    gue_biorthogonal_sum, gue_second_term, heat_kernel, kernel_diffusion_scaled,
    kernel_diffusion_scaled_with, kernel_gue_extended, kernel_gue_extended_with, kernel_gue_static,
    phi_gue, phi_gue_contour, phi_spacelike_gue, phi_spacelike_gue_with, psi_gue, psi_gue_line,
    psi_gue_with,
};
pub use lue::{
    bessel_transition, bessel_transition_circle, bessel_transition_shifted, kernel_lue,
    kernel_lue_with, lue_biorthogonal_sum, lue_first_term, lue_second_term, phi_lue,
    phi_lue_contour, phi_spacelike_lue, psi_lue, psi_lue_eq62, psi_lue_shifted,
};

/// A point `(x, n, t)`: position, level and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub n: usize,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, n: usize, t: f64) -> Self {
        Self { x, n, t }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("level must be at least 1".into()));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::Domain(format!("time must be finite and ≥ 0, got {}", self.t)));
        }
        if !self.x.is_finite() {
            return Err(Error::Domain(format!("position must be finite, got {}", self.x)));
        }
        Ok(())
    }
}

/// Ambient row count `p` of the `p × n` matrices of the Laguerre process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LueParams {
    pub p: usize,
}

/// Kernel value together with the quadrature self-convergence estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub quadrature_error_estimate: f64,
}

impl KernelValue {
    pub(crate) fn exact(value: f64) -> Self {
        Self { value, quadrature_error_estimate: 0.0 }
    }
}

/// Contour parameters shared by all kernel evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Real part of vertical lines; nested `z`-circles use radius `epsilon / 2`.
    pub epsilon: f64,
    pub circle_nodes: usize,
    pub line_nodes: usize,
    /// Self-convergence target for node doubling.
    pub tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            circle_nodes: DEFAULT_CIRCLE_NODES,
            line_nodes: DEFAULT_LINE_NODES,
            tol: 1e-10,
        }
    }
}

impl QuadratureOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.circle_nodes < 8 || self.line_nodes < 16 {
            return Err(Error::Invalid("node counts too small".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Space-like order: `n_a ≤ n_b`, `t_a ≥ t_b` and `(n_a, t_a) ≠ (n_b, t_b)`.
pub fn precedes(a: &SpaceTimePoint, b: &SpaceTimePoint) -> bool {
    a.n <= b.n && a.t >= b.t && (a.n != b.n || a.t != b.t)
}

/// Largest imaginary part tolerated on a real-valued kernel.
pub(crate) const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

pub(crate) fn real_part_checked(v: Complex64, scale: f64) -> Result<f64> {
    if v.im.abs() > IMAGINARY_RESIDUE_TOL * scale.max(1.0) {
        return Err(Error::NoConvergence { change: v.im.abs(), tol: IMAGINARY_RESIDUE_TOL });
    }
    Ok(v.re)
}

/// `Σ_i Σ_j a_i b_j / (w_j − z_i)` for separable double contour integrals.
pub(crate) fn cauchy_double_sum(
    zs: &[Complex64],
    a: &[Complex64],
    ws: &[Complex64],
    b: &[Complex64],
) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (z, ai) in zs.iter().zip(a) {
        let mut row = Complex64::new(0.0, 0.0);
        for (w, bj) in ws.iter().zip(b) {
            row += bj / (w - z);
        }
        total += ai * row;
    }
    total
}

/// Nodes and weighted values `ω_j f(z_j)` on a circle.
pub(crate) fn sample_circle<F>(f: F, c: &CircleContour) -> Result<(Vec<Complex64>, Vec<Complex64>)>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut zs = Vec::with_capacity(c.nodes);
    let mut vals = Vec::with_capacity(c.nodes);
    for (index, (z, w)) in c.points().into_iter().enumerate() {
        let value = f(z);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFiniteNode { index, node: z, value });
        }
        zs.push(z);
        vals.push(w * value);
    }
    Ok((zs, vals))
}

/// Nodes and weighted values on a vertical line, lengthening the line until
/// the endpoint magnitude is negligible.
pub(crate) fn sample_line<F>(
    f: F,
    line: &VerticalLineContour,
) -> Result<(Vec<Complex64>, Vec<Complex64>)>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut line = *line;
    for _ in 0..12 {
        let mut ws = Vec::with_capacity(line.nodes);
        let mut vals = Vec::with_capacity(line.nodes);
        let mut magnitude = 0.0;
        for (index, (w, weight)) in line.points().into_iter().enumerate() {
            let value = f(w);
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::NonFiniteNode { index, node: w, value });
            }
            ws.push(w);
            vals.push(weight * value);
            magnitude += (weight * value).norm();
        }
        let top = f(Complex64::new(line.real_part, line.half_length)).norm();
        let bottom = f(Complex64::new(line.real_part, -line.half_length)).norm();
        let ratio = if magnitude > 0.0 { top.max(bottom) / magnitude } else { 0.0 };
        if ratio <= TAIL_WARNING_RATIO {
            return Ok((ws, vals));
        }
        line.half_length *= 1.25;
        line.nodes = (line.nodes as f64 * 1.25).ceil() as usize;
    }
    Err(Error::TailTooLarge { ratio: f64::NAN })
}

/// Repeats `eval(level)` with node counts scaled by `2^level` until two
/// successive values agree to `tol · max(1, |value|)`.
pub(crate) fn self_converge<F>(mut eval: F, tol: f64) -> Result<(Complex64, f64)>
where
    F: FnMut(usize) -> Result<Complex64>,
{
    let mut prev = eval(0)?;
    let mut change = f64::INFINITY;
    for level in 1..=MAX_KERNEL_DOUBLINGS {
        let cur = eval(level)?;
        change = (cur - prev).norm();
        if change <= tol * cur.norm().max(1.0) {
            return Ok((cur, change));
        }
        prev = cur;
    }
    Err(Error::NoConvergence { change, tol })
}

const MAX_KERNEL_DOUBLINGS: usize = 3;

/// `(x)^{m-1} / (m-1)!` for `m ≥ 1`.
pub(crate) fn step_power(x: f64, m: usize) -> f64 {
    debug_assert!(m >= 1);
    let mut v = 1.0;
    for j in 1..m {
        v *= x / j as f64;
    }
    v
}
