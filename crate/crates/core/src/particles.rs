//! Continuous-time interlaced particle dynamics with blocking and pushing.
//!
//! Level `m` carries particles `x_1^m < … < x_m^m` on ℤ subject to
//! `x_k^{m+1} < x_k^m ≤ x_{k+1}^{m+1}`. Each particle tries to jump right at
//! rate one; the jump is blocked by the level below and pushes the particles
//! above it that would otherwise break the interlacing. The leftmost
//! particles `x_1^m` perform TASEP with step initial condition.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmt_sim::RngStream;

/// Triangular array `x[m-1][k-1] = x_k^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterlacedConfig {
    pub x: Vec<Vec<i64>>,
}

/// Outcome of a single clock ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpOutcome {
    Blocked,
    /// Number of particles that moved (the ringing one plus those pushed).
    Moved(usize),
}

impl InterlacedConfig {
    /// Packed start `x_k^m = k − m − 1`.
    pub fn packed(n_levels: usize) -> Result<Self> {
        if n_levels == 0 {
            return Err(Error::Invalid("need at least one level".into()));
        }
        let x = (1..=n_levels).map(|m| (1..=m).map(|k| k as i64 - m as i64 - 1).collect()).collect();
        Ok(Self { x })
    }

    pub fn n_levels(&self) -> usize {
        self.x.len()
    }

    pub fn particle_count(&self) -> usize {
        let n = self.n_levels();
        n * (n + 1) / 2
    }

    /// `x_k^m` with one-based indices.
    pub fn get(&self, m: usize, k: usize) -> i64 {
        self.x[m - 1][k - 1]
    }

    pub fn is_interlaced(&self) -> bool {
        let shape_ok = self.x.iter().enumerate().all(|(i, row)| row.len() == i + 1);
        shape_ok
            && (1..self.n_levels()).all(|m| {
                (1..=m).all(|k| self.get(m + 1, k) < self.get(m, k) && self.get(m, k) <= self.get(m + 1, k + 1))
            })
    }

    /// Rings the clock of `x_k^m`: blocked if `x_k^m = x_k^{m−1} − 1`, otherwise
    /// the maximal string `x_k^m = x_{k+1}^{m+1} = …` moves right by one.
    pub fn ring(&mut self, m: usize, k: usize) -> JumpOutcome {
        if m >= 2 && k < m && self.get(m, k) == self.get(m - 1, k) - 1 {
            return JumpOutcome::Blocked;
        }
        let start = self.get(m, k);
        let mut c = 1;
        while m + c <= self.n_levels() && self.get(m + c, k + c) == start {
            c += 1;
        }
        for j in 0..c {
            self.x[m + j - 1][k + j - 1] += 1;
        }
        debug_assert!(self.is_interlaced(), "interlacing broken after ring({m}, {k})");
        JumpOutcome::Moved(c)
    }

    /// Leftmost particle `x_1^m` of every level.
    pub fn tasep_projection(&self) -> Vec<i64> {
        self.x.iter().map(|row| row[0]).collect()
    }
}

/// Current time and random stream of a replica.
#[derive(Debug, Clone)]
pub struct SimClock {
    pub time: f64,
    rng: ChaCha20Rng,
}

impl SimClock {
    pub fn new(stream: &RngStream) -> Self {
        Self { time: 0.0, rng: stream.rng() }
    }

    pub fn from_rng(rng: ChaCha20Rng) -> Self {
        Self { time: 0.0, rng }
    }
}

/// Runs the dynamics until `until`. Events arrive at total rate equal to the
/// particle count and ring a uniformly chosen particle.
pub fn evolve(cfg: &mut InterlacedConfig, until: f64, clock: &mut SimClock) -> Result<()> {
    if !(until >= clock.time) {
        return Err(Error::Invalid(format!("cannot evolve backwards from {} to {until}", clock.time)));
    }
    let n = cfg.n_levels();
    let total = cfg.particle_count();
    let wait = Exp::new(total as f64).map_err(|e| Error::Invalid(e.to_string()))?;
    loop {
        let next = clock.time + wait.sample(&mut clock.rng);
        if next > until {
            clock.time = until;
            return Ok(());
        }
        clock.time = next;
        let mut idx = clock.rng.random_range(0..total);
        let mut m = 1;
        while idx >= m {
            idx -= m;
            m += 1;
        }
        debug_assert!(m <= n);
        cfg.ring(m, idx + 1);
    }
}

/// Snapshots of the configuration at increasing observation times.
pub fn observe(n_levels: usize, times: &[f64], clock: &mut SimClock) -> Result<Vec<InterlacedConfig>> {
    let mut cfg = InterlacedConfig::packed(n_levels)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        evolve(&mut cfg, t, clock)?;
        out.push(cfg.clone());
    }
    Ok(out)
}

/// `(x − τt/2)/√t` for positions observed at time `τt/2`.
pub fn diffusion_rescale(positions: &[i64], t: f64, tau: f64) -> Vec<f64> {
    let shift = 0.5 * tau * t;
    let s = t.sqrt();
    positions.iter().map(|&x| (x as f64 - shift) / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_examples() {
        assert_eq!(InterlacedConfig::packed(1).unwrap().x, vec![vec![-1]]);
        let c = InterlacedConfig::packed(2).unwrap();
        assert_eq!(c.x, vec![vec![-1], vec![-2, -1]]);
        assert!(c.is_interlaced());
        assert_eq!(InterlacedConfig::packed(4).unwrap().tasep_projection(), vec![-1, -2, -3, -4]);
    }

    #[test]
    fn block_and_push() {
        let mut c = InterlacedConfig::packed(2).unwrap();
        assert_eq!(c.ring(2, 1), JumpOutcome::Blocked);
        assert_eq!(c.ring(1, 1), JumpOutcome::Moved(2));
        assert_eq!(c.x, vec![vec![0], vec![-2, 0]]);
        assert_eq!(c.ring(2, 1), JumpOutcome::Moved(1));
        assert_eq!(c.x, vec![vec![0], vec![-1, 0]]);
        let mut c = InterlacedConfig::packed(3).unwrap();
        assert_eq!(c.ring(1, 1), JumpOutcome::Moved(3));
        assert_eq!(c.x, vec![vec![0], vec![-2, 0], vec![-3, -2, 0]]);
    }

    #[test]
    fn interlacing_preserved() {
        let mut clock = SimClock::new(&RngStream::new(8, 0));
        let mut c = InterlacedConfig::packed(5).unwrap();
        for step in 1..50 {
            evolve(&mut c, step as f64 * 0.2, &mut clock).unwrap();
            assert!(c.is_interlaced());
            let p = c.tasep_projection();
            assert!(p.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn rescale_centering() {
        assert_eq!(diffusion_rescale(&[200], 400.0, 1.0), vec![0.0]);
    }
}
