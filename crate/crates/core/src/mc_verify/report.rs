use serde::{Deserialize, Serialize};

/// Relative agreement accepted when an estimator has zero variance.
pub const EXACT_MATCH_TOL: f64 = 1e-12;

/// One comparison between a prediction and an estimate.
///
/// Statistical checks carry a standard error and pass when `|z|` is below the
/// tolerance. Deterministic checks carry no standard error and pass when the
/// absolute deviation is below the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub predicted: f64,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub z: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Statistical comparison gated on `|z| < z_max`.
    pub fn statistical(name: impl Into<String>, predicted: f64, estimate: f64, stderr: f64, z_max: f64) -> Self {
        let z = if stderr > 0.0 {
            (estimate - predicted) / stderr
        } else if (estimate - predicted).abs() <= EXACT_MATCH_TOL * predicted.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            name: name.into(),
            predicted,
            estimate,
            stderr: Some(stderr),
            z: Some(z),
            tolerance: z_max,
            pass: z.abs() < z_max,
        }
    }

    /// Deterministic comparison gated on `|estimate − predicted| < tol`.
    pub fn deviation(name: impl Into<String>, predicted: f64, estimate: f64, tol: f64) -> Self {
        let pass = (estimate - predicted).abs() < tol;
        Self { name: name.into(), predicted, estimate, stderr: None, z: None, tolerance: tol, pass }
    }

    /// A check whose evaluation failed; recorded as a failure.
    pub fn errored(name: impl Into<String>, predicted: f64) -> Self {
        Self {
            name: name.into(),
            predicted,
            estimate: f64::NAN,
            stderr: None,
            z: None,
            tolerance: 0.0,
            pass: false,
        }
    }

    pub fn abs_deviation(&self) -> f64 {
        (self.estimate - self.predicted).abs()
    }
}

/// A named collection of checks. Entries in `info` are reported but do not
/// affect [`SuiteReport::passed`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckReport>,
    #[serde(default)]
    pub info: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self { suite: suite.into(), checks: Vec::new(), info: Vec::new() }
    }

    pub fn push(&mut self, check: CheckReport) {
        self.checks.push(check);
    }

    pub fn push_info(&mut self, check: CheckReport) {
        self.info.push(check);
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
        self.info.extend(other.info);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Largest absolute deviation among checks whose name starts with `prefix`.
    pub fn max_deviation(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .map(|c| if c.estimate.is_nan() { f64::INFINITY } else { c.abs_deviation() })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_and_pass() {
        let c = CheckReport::statistical("a", 1.0, 1.3, 0.1, 4.0);
        assert!((c.z.unwrap() - 3.0).abs() < 1e-12);
        assert!(c.pass);
        assert!(!CheckReport::statistical("b", 1.0, 1.5, 0.1, 4.0).pass);
        assert!(CheckReport::deviation("c", 1.0, 1.0 + 1e-9, 1e-8).pass);
        assert!(!CheckReport::errored("d", 1.0).pass);
    }

    #[test]
    fn schema_is_stable() {
        let c = CheckReport::deviation("x", 0.5, 0.5, 1e-6);
        let v = serde_json::to_value(&c).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["estimate", "name", "pass", "predicted", "stderr", "tolerance", "z"]);
    }
}
