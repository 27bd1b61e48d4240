use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    cauchy_double_sum, precedes, real_part_checked, sample_circle, self_converge, KernelValue,
    QuadratureOptions, SpaceTimePoint,
};
use crate::contour::{integrate_circle_adaptive, CircleContour};
use crate::error::{Error, Result};

/// Circles used by the discrete kernel. `outer` encloses 0 and 1, `gamma1`
/// encloses 1 but not 0, and the `w`-circle (center 0) encloses `gamma1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteContours {
    pub outer_center: f64,
    pub outer_radius: f64,
    pub gamma1_center: f64,
    pub gamma1_radius: f64,
    pub w_radius: f64,
}

impl Default for DiscreteContours {
    fn default() -> Self {
        Self { outer_center: 0.5, outer_radius: 1.2, gamma1_center: 1.0, gamma1_radius: 0.4, w_radius: 2.0 }
    }
}

impl DiscreteContours {
    fn validate(&self) -> Result<()> {
        let encloses = |c: f64, r: f64, p: f64| (p - c).abs() < r;
        if !(encloses(self.outer_center, self.outer_radius, 0.0)
            && encloses(self.outer_center, self.outer_radius, 1.0))
        {
            return Err(Error::ContourSeparation("outer circle must enclose 0 and 1".into()));
        }
        if !encloses(self.gamma1_center, self.gamma1_radius, 1.0)
            || encloses(self.gamma1_center, self.gamma1_radius, 0.0)
        {
            return Err(Error::ContourSeparation("Γ_1 must enclose 1 and exclude 0".into()));
        }
        if self.w_radius <= self.gamma1_center.abs() + self.gamma1_radius {
            return Err(Error::ContourSeparation("w-circle must enclose Γ_1".into()));
        }
        Ok(())
    }
}

fn integer_position(p: &SpaceTimePoint) -> Result<i32> {
    if p.x.fract() != 0.0 || p.x.abs() > 1e6 {
        return Err(Error::Domain(format!("discrete kernel needs integer positions, got {}", p.x)));
    }
    Ok(p.x as i32)
}

/// Kernel of the interlaced particle system started from the packed
/// configuration `x_k^m(0) = k − m − 1`.
pub fn kernel_discrete(a: &SpaceTimePoint, b: &SpaceTimePoint) -> Result<f64> {
    Ok(kernel_discrete_with(a, b, &DiscreteContours::default(), &QuadratureOptions::default())?.value)
}

pub fn kernel_discrete_with(
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    contours: &DiscreteContours,
    opts: &QuadratureOptions,
) -> Result<KernelValue> {
    a.validate()?;
    b.validate()?;
    contours.validate()?;
    let (x1, x2) = (integer_position(a)?, integer_position(b)?);
    let (n1, n2) = (a.n as i32, b.n as i32);
    let (t1, t2) = (a.t, b.t);

    let (first, first_err) = if precedes(a, b) {
        let dt = t1 - t2;
        let order = x1 + n1 - x2 - n2 + 1;
        let c = CircleContour::real_center(contours.outer_center, contours.outer_radius, opts.circle_nodes)?;
        let q = integrate_circle_adaptive(
            |w| (1.0 - w).powi(n1 - n2) * (dt * w).exp() * w.powi(-order),
            &c,
            opts.tol,
        )?;
        (-real_part_checked(q.value, q.value.norm())?, q.error_estimate)
    } else {
        (0.0, 0.0)
    };

    let z_circle = CircleContour::real_center(contours.gamma1_center, contours.gamma1_radius, opts.circle_nodes)?;
    let w_circle = CircleContour::real_center(0.0, contours.w_radius, opts.circle_nodes)?;
    let (value, err) = self_converge(
        |level| {
            let scale = 1usize << level;
            let (zs, gz) = sample_circle(
                |z: Complex64| z.powi(x2 + n2) * (-t2 * z).exp() * (1.0 - z).powi(-n2),
                &z_circle.with_nodes(z_circle.nodes * scale),
            )?;
            let (ws, fw) = sample_circle(
                |w: Complex64| (t1 * w).exp() * (1.0 - w).powi(n1) * w.powi(-(x1 + n1 + 1)),
                &w_circle.with_nodes(w_circle.nodes * scale),
            )?;
            Ok(cauchy_double_sum(&zs, &gz, &ws, &fw))
        },
        opts.tol,
    )?;
    let second = real_part_checked(value, value.norm())?;
    Ok(KernelValue { value: first + second, quadrature_error_estimate: first_err + err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x: f64, n: usize, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(x, n, t)
    }

    #[test]
    fn level_one_is_poisson() {
        let e = (-1.0f64).exp();
        assert_relative_eq!(kernel_discrete(&pt(-1.0, 1, 1.0), &pt(-1.0, 1, 1.0)).unwrap(), e, epsilon = 1e-12);
        assert_relative_eq!(kernel_discrete(&pt(1.0, 1, 1.0), &pt(1.0, 1, 1.0)).unwrap(), e / 2.0, epsilon = 1e-12);
        assert!(kernel_discrete(&pt(-2.0, 1, 1.0), &pt(-2.0, 1, 1.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn packed_start_at_time_zero() {
        for n in 1..4usize {
            for x in -(n as i32) - 2..3 {
                let p = pt(x as f64, n, 0.0);
                let v = kernel_discrete(&p, &p).unwrap();
                let occupied = x >= -(n as i32) && x <= -1;
                assert!((v - if occupied { 1.0 } else { 0.0 }).abs() < 1e-10, "n={n} x={x}: {v}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kernel_discrete(&pt(0.5, 1, 1.0), &pt(0.0, 1, 1.0)).is_err());
        let bad = DiscreteContours { w_radius: 1.2, ..Default::default() };
        let o = QuadratureOptions::default();
        assert!(matches!(
            kernel_discrete_with(&pt(0.0, 1, 1.0), &pt(0.0, 1, 1.0), &bad, &o),
            Err(Error::ContourSeparation(_))
        ));
    }
}
