//! Determinantal weights on products of finite sets, with levels connected by
//! transition tables and several time copies per level.
//!
//! A configuration holds exactly `n` points in each copy of `𝔛_n`. Its weight
//! is a product of determinants of the transition tables, and the resulting
//! (possibly complex) point process is determinantal with a kernel built from
//! the inverse of the `N × N` matrix [`m_matrix`]. [`Enumeration`] computes
//! correlations by brute force for cross-checking.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of configurations [`Enumeration`] will visit by default.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;
/// Condition number above which `M` is rejected.
pub const MAX_CONDITION: f64 = 1e12;

type CMatrix = DMatrix<Complex64>;

/// Ground sets, copy counts and transition tables on `N` levels.
///
/// Indices are zero-based: `phi[n-1]` maps `𝔛_{n−1} × 𝔛_n` (row = first
/// index, empty for `n = 1`), `phi_virt[n-1]` is the virtual row on `𝔛_n`,
/// `transitions[n-1][a-1]` is the table from copy `a` to copy `a−1` of `𝔛_n`,
/// and `psi[j]` is `Ψ^N_j` on `𝔛_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct SpaceLikeWeightSpec {
    pub set_sizes: Vec<usize>,
    pub copies: Vec<usize>,
    pub phi: Vec<CMatrix>,
    pub phi_virt: Vec<DVector<Complex64>>,
    pub transitions: Vec<Vec<CMatrix>>,
    pub psi: Vec<DVector<Complex64>>,
    pub times: Option<Vec<Vec<f64>>>,
}

/// A location in copy `copy` of `𝔛_level` (level is one-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelTimePoint {
    pub level: usize,
    pub copy: usize,
    pub location: usize,
}

impl LevelTimePoint {
    pub fn new(level: usize, copy: usize, location: usize) -> Self {
        Self { level, copy, location }
    }
}

/// `subsets[n-1][a]` lists the points of copy `a` of `𝔛_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub subsets: Vec<Vec<Vec<usize>>>,
}

impl SpaceLikeWeightSpec {
    pub fn levels(&self) -> usize {
        self.set_sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n_levels = self.levels();
        if n_levels == 0 {
            return Err(Error::Dimension("at least one level is required".into()));
        }
        let dim = |what: &str| Err(Error::Dimension(what.to_string()));
        if self.copies.len() != n_levels
            || self.phi.len() != n_levels
            || self.phi_virt.len() != n_levels
            || self.transitions.len() != n_levels
        {
            return dim("per-level tables must have one entry per level");
        }
        for n in 1..=n_levels {
            let size = self.set_sizes[n - 1];
            if size < n {
                return Err(Error::Dimension(format!("|𝔛_{n}| = {size} is smaller than {n}")));
            }
            let prev = if n == 1 { 0 } else { self.set_sizes[n - 2] };
            let phi = &self.phi[n - 1];
            if phi.nrows() != prev || phi.ncols() != size {
                return Err(Error::Dimension(format!(
                    "φ_{n} must be {prev}×{size}, got {}×{}",
                    phi.nrows(),
                    phi.ncols()
                )));
            }
            if self.phi_virt[n - 1].len() != size {
                return Err(Error::Dimension(format!("virtual row of φ_{n} must have length {size}")));
            }
            if self.transitions[n - 1].len() != self.copies[n - 1] {
                return Err(Error::Dimension(format!("level {n} needs {} transition tables", self.copies[n - 1])));
            }
            for t in &self.transitions[n - 1] {
                if t.nrows() != size || t.ncols() != size {
                    return Err(Error::Dimension(format!("transition tables on level {n} must be {size}×{size}")));
                }
            }
        }
        let top = self.set_sizes[n_levels - 1];
        if self.psi.len() != n_levels || self.psi.iter().any(|v| v.len() != top) {
            return Err(Error::Dimension(format!("need {n_levels} functions Ψ^N_j of length {top}")));
        }
        if let Some(times) = &self.times {
            if times.len() != n_levels {
                return dim("times must have one row per level");
            }
            for n in 1..=n_levels {
                let row = &times[n - 1];
                if row.len() != self.copies[n - 1] + 1 {
                    return Err(Error::Dimension(format!("level {n} needs {} time labels", self.copies[n - 1] + 1)));
                }
                if row.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Invalid(format!("time labels on level {n} must be nondecreasing")));
                }
                if n > 1 && times[n - 2][0] != row[row.len() - 1] {
                    return Err(Error::Invalid(format!(
                        "last time on level {n} must equal the first time on level {}",
                        n - 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_point(&self, p: &LevelTimePoint) -> Result<()> {
        if p.level == 0 || p.level > self.levels() {
            return Err(Error::Dimension(format!("level {} out of range", p.level)));
        }
        if p.copy > self.copies[p.level - 1] {
            return Err(Error::Dimension(format!("copy {} out of range on level {}", p.copy, p.level)));
        }
        if p.location >= self.set_sizes[p.level - 1] {
            return Err(Error::Dimension(format!("location {} out of range on level {}", p.location, p.level)));
        }
        Ok(())
    }

    /// Transitions from copy `a1` to copy `a2 ≤ a1` on level `n`.
    fn level_chain(&self, n: usize, a1: usize, a2: usize) -> CMatrix {
        let size = self.set_sizes[n - 1];
        let mut out = CMatrix::identity(size, size);
        for a in (a2 + 1..=a1).rev() {
            out *= &self.transitions[n - 1][a - 1];
        }
        out
    }

    /// Composition of all transitions from `(n1, a1)` to `(n2, a2)`; the
    /// identity when the two coincide. Requires `(n1, a1)` not after `(n2, a2)`.
    pub fn chain(&self, n1: usize, a1: usize, n2: usize, a2: usize) -> Result<CMatrix> {
        if !(n1 < n2 || (n1 == n2 && a1 >= a2)) {
            return Err(Error::Invalid(format!("no transitions from ({n1}, {a1}) to ({n2}, {a2})")));
        }
        if n1 == n2 {
            return Ok(self.level_chain(n1, a1, a2));
        }
        let mut out = self.level_chain(n1, a1, 0);
        for n in n1 + 1..n2 {
            out *= &self.phi[n - 1];
            out *= self.level_chain(n, self.copies[n - 1], 0);
        }
        out *= &self.phi[n2 - 1];
        out *= self.level_chain(n2, self.copies[n2 - 1], a2);
        Ok(out)
    }

    /// `|𝔛_N| × N` matrix whose column `k−1` is `Ψ^N_{N−k}`.
    fn psi_columns(&self) -> CMatrix {
        let n_levels = self.levels();
        let size = self.set_sizes[n_levels - 1];
        CMatrix::from_fn(size, n_levels, |x, k| self.psi[n_levels - 1 - k][x])
    }

    /// Row vector `φ_l(virt, ·)` pushed forward to `(n, a)`.
    fn virtual_row(&self, l: usize, n: usize, a: usize) -> Result<DVector<Complex64>> {
        let chain = self.chain(l, self.copies[l - 1], n, a)?;
        Ok(chain.tr_mul(&self.phi_virt[l - 1]))
    }
}

/// Whether `(n1, a1)` lies strictly before `(n2, a2)` along the chain of copies.
pub fn structurally_precedes(n1: usize, a1: usize, n2: usize, a2: usize) -> bool {
    n1 < n2 || (n1 == n2 && a1 > a2)
}

fn determinant(m: CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.determinant()
}

/// Weight of a configuration: the product of determinants of the level
/// transitions, the copy transitions and the final `Ψ` functions.
pub fn weight(spec: &SpaceLikeWeightSpec, x: &PointConfiguration) -> Result<Complex64> {
    spec.validate()?;
    let n_levels = spec.levels();
    if x.subsets.len() != n_levels {
        return Err(Error::Dimension("configuration must list every level".into()));
    }
    for n in 1..=n_levels {
        let copies = &x.subsets[n - 1];
        if copies.len() != spec.copies[n - 1] + 1 {
            return Err(Error::Dimension(format!("level {n} needs {} copies", spec.copies[n - 1] + 1)));
        }
        for s in copies {
            if s.iter().any(|&p| p >= spec.set_sizes[n - 1]) {
                return Err(Error::Dimension(format!("location out of range on level {n}")));
            }
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != n || s.len() != n {
                return Ok(Complex64::new(0.0, 0.0));
            }
        }
    }
    Ok(weight_unchecked(spec, &x.subsets))
}

fn weight_unchecked(spec: &SpaceLikeWeightSpec, subsets: &[Vec<Vec<usize>>]) -> Complex64 {
    let n_levels = spec.levels();
    let mut w = Complex64::new(1.0, 0.0);
    for n in 1..=n_levels {
        let latest = &subsets[n - 1][spec.copies[n - 1]];
        let phi = &spec.phi[n - 1];
        let virt = &spec.phi_virt[n - 1];
        let m = CMatrix::from_fn(n, n, |k, l| {
            if k + 1 == n {
                virt[latest[l]]
            } else {
                phi[(subsets[n - 2][0][k], latest[l])]
            }
        });
        w *= determinant(m);
        for a in 1..=spec.copies[n - 1] {
            let t = &spec.transitions[n - 1][a - 1];
            let (later, earlier) = (&subsets[n - 1][a], &subsets[n - 1][a - 1]);
            w *= determinant(CMatrix::from_fn(n, n, |k, l| t[(later[k], earlier[l])]));
        }
    }
    let bottom = &subsets[n_levels - 1][0];
    w *= determinant(CMatrix::from_fn(n_levels, n_levels, |k, l| spec.psi[n_levels - 1 - l][bottom[k]]));
    w
}

/// `M_{k,l} = (φ_k ∗ T^k ∗ ⋯ ∗ φ_N ∗ T^N ∗ Ψ^N_{N−l})(virt)`.
pub fn m_matrix(spec: &SpaceLikeWeightSpec) -> Result<CMatrix> {
    spec.validate()?;
    let n_levels = spec.levels();
    let psi = spec.psi_columns();
    let mut m = CMatrix::zeros(n_levels, n_levels);
    for k in 1..=n_levels {
        let row = spec.virtual_row(k, n_levels, 0)?;
        let r = psi.tr_mul(&row);
        for l in 0..n_levels {
            m[(k - 1, l)] = r[l];
        }
    }
    Ok(m)
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse of `M` via partial-pivot LU, with the 1-norm condition number.
pub fn invert_checked(m: &CMatrix) -> Result<(CMatrix, f64)> {
    let inv = m.clone().lu().try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let condition = norm1(m) * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    Ok((inv, condition))
}

/// Precomputed data for repeated kernel evaluations on one spec.
#[derive(Debug, Clone)]
pub struct EynardKernel<'a> {
    spec: &'a SpaceLikeWeightSpec,
    m: CMatrix,
    m_inv: CMatrix,
    psi: CMatrix,
    pub condition: f64,
}

impl<'a> EynardKernel<'a> {
    pub fn new(spec: &'a SpaceLikeWeightSpec) -> Result<Self> {
        let m = m_matrix(spec)?;
        let (_, condition) = invert_checked(&m)?;
        // The kernel depends on Ψ only through Ψ·M⁻¹, which is unchanged by
        // Ψ → Ψ·G. Orthonormal columns keep the inverted matrix well conditioned.
        let psi = spec.psi_columns().qr().q();
        let n_levels = spec.levels();
        let mut gauged = CMatrix::zeros(n_levels, n_levels);
        for k in 1..=n_levels {
            let r = psi.tr_mul(&spec.virtual_row(k, n_levels, 0)?);
            for l in 0..n_levels {
                gauged[(k - 1, l)] = r[l];
            }
        }
        let (m_inv, _) = invert_checked(&gauged)?;
        Ok(Self { spec, m, m_inv, psi, condition })
    }

    pub fn m(&self) -> &CMatrix {
        &self.m
    }

    /// `Ψ^{n,t_a}_{n−k}` for `k = 1..N` as the columns of a `|𝔛_n| × N`
    /// matrix, in the basis where the top-level functions are orthonormal.
    pub fn psi_functions(&self, level: usize, copy: usize) -> Result<CMatrix> {
        let n_levels = self.spec.levels();
        Ok(self.spec.chain(level, copy, n_levels, 0)? * &self.psi)
    }

    /// Space-like composition `φ^{(a,b)}(x_a, x_b)`, zero unless `a` lies
    /// strictly before `b`.
    pub fn phi_spacelike(&self, a: &LevelTimePoint, b: &LevelTimePoint) -> Result<Complex64> {
        if !structurally_precedes(a.level, a.copy, b.level, b.copy) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.spec.chain(a.level, a.copy, b.level, b.copy)?[(a.location, b.location)])
    }

    /// Kernel with the full double sum through `M^{-1}`.
    pub fn kernel(&self, a: &LevelTimePoint, b: &LevelTimePoint) -> Result<Complex64> {
        self.spec.check_point(a)?;
        self.spec.check_point(b)?;
        let psi = self.psi_functions(a.level, a.copy)?;
        let mut total = -self.phi_spacelike(a, b)?;
        for l in 1..=b.level {
            let row = self.spec.virtual_row(l, b.level, b.copy)?;
            let phi = row[b.location];
            for k in 0..self.spec.levels() {
                total += psi[(a.location, k)] * self.m_inv[(k, l - 1)] * phi;
            }
        }
        Ok(total)
    }

    /// `Φ^{n,t_a}_{n−k}(x) = Σ_{l ≤ n} [M^{-1}]_{k,l}(φ_l ∗ φ^{(c(l), a)})(virt, x)`
    /// for `k = 1..n`, as the columns of a `|𝔛_n| × n` matrix, dual to
    /// [`EynardKernel::psi_functions`].
    pub fn phi_functions(&self, level: usize, copy: usize) -> Result<CMatrix> {
        let size = self.spec.set_sizes[level - 1];
        let mut out = CMatrix::zeros(size, level);
        for l in 1..=level {
            let row = self.spec.virtual_row(l, level, copy)?;
            for k in 0..level {
                let c = self.m_inv[(k, l - 1)];
                for x in 0..size {
                    out[(x, k)] += c * row[x];
                }
            }
        }
        Ok(out)
    }

    /// Kernel in biorthogonal form, valid when `M` is upper triangular.
    pub fn kernel_triangular(&self, a: &LevelTimePoint, b: &LevelTimePoint) -> Result<Complex64> {
        self.spec.check_point(a)?;
        self.spec.check_point(b)?;
        let psi = self.psi_functions(a.level, a.copy)?;
        let phi = self.phi_functions(b.level, b.copy)?;
        let mut total = -self.phi_spacelike(a, b)?;
        for k in 0..b.level {
            total += psi[(a.location, k)] * phi[(b.location, k)];
        }
        Ok(total)
    }

    /// `det[K(p_i, p_j)]`.
    pub fn correlation(&self, points: &[LevelTimePoint]) -> Result<Complex64> {
        let k = points.len();
        let mut m = CMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = self.kernel(&points[i], &points[j])?;
            }
        }
        Ok(determinant(m))
    }
}

/// Kernel at a pair of points (one-shot convenience).
pub fn correlation_kernel(spec: &SpaceLikeWeightSpec, a: &LevelTimePoint, b: &LevelTimePoint) -> Result<Complex64> {
    EynardKernel::new(spec)?.kernel(a, b)
}

/// Whether all entries strictly below the diagonal are below `tol · max|M|`.
pub fn is_upper_triangular(m: &CMatrix, tol: f64) -> bool {
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    (0..m.nrows()).all(|i| (0..i.min(m.ncols())).all(|j| m[(i, j)].norm() <= tol * scale))
}

fn subsets_of(size: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, size: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..size {
            if size - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, size, k, cur, out);
            cur.pop();
        }
    }
    rec(0, size, k, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All configurations with nonzero cardinality pattern, their weights and
/// the partition function, enumerated lexicographically over per-copy subsets.
#[derive(Debug, Clone)]
pub struct Enumeration {
    /// `(level, copy)` for each slot, in enumeration order.
    slots: Vec<(usize, usize)>,
    /// Location bitmasks of each candidate subset per slot.
    masks: Vec<Vec<u64>>,
    /// Chosen subset index per slot for each configuration.
    choices: Vec<Vec<u32>>,
    weights: Vec<Complex64>,
    pub partition: Complex64,
}

impl Enumeration {
    pub fn new(spec: &SpaceLikeWeightSpec) -> Result<Self> {
        Self::with_budget(spec, ENUMERATION_BUDGET)
    }

    pub fn with_budget(spec: &SpaceLikeWeightSpec, budget: u128) -> Result<Self> {
        spec.validate()?;
        let n_levels = spec.levels();
        if spec.set_sizes.iter().any(|&s| s > 64) {
            return Err(Error::Invalid("enumeration supports ground sets of at most 64 points".into()));
        }
        let mut needed = 1u128;
        for n in 1..=n_levels {
            let per_copy = binomial(spec.set_sizes[n - 1], n);
            for _ in 0..=spec.copies[n - 1] {
                needed = needed.saturating_mul(per_copy);
            }
        }
        if needed > budget {
            return Err(Error::Budget { needed, budget });
        }
        let mut slots = Vec::new();
        let mut options = Vec::new();
        for n in 1..=n_levels {
            let subsets = subsets_of(spec.set_sizes[n - 1], n);
            for a in 0..=spec.copies[n - 1] {
                slots.push((n, a));
                options.push(subsets.clone());
            }
        }
        let masks = options
            .iter()
            .map(|subs| subs.iter().map(|s| s.iter().fold(0u64, |m, &i| m | (1 << i))).collect())
            .collect();

        let mut choices = Vec::with_capacity(needed as usize);
        let mut weights = Vec::with_capacity(needed as usize);
        let mut partition = Complex64::new(0.0, 0.0);
        let mut counter = vec![0usize; slots.len()];
        let mut config: Vec<Vec<Vec<usize>>> =
            (1..=n_levels).map(|n| vec![Vec::new(); spec.copies[n - 1] + 1]).collect();
        loop {
            for (slot, &(n, a)) in slots.iter().enumerate() {
                config[n - 1][a] = options[slot][counter[slot]].clone();
            }
            let w = weight_unchecked(spec, &config);
            partition += w;
            choices.push(counter.iter().map(|&c| c as u32).collect());
            weights.push(w);
            let mut slot = slots.len();
            loop {
                if slot == 0 {
                    if partition.norm() == 0.0 {
                        return Err(Error::ZeroPartition);
                    }
                    return Ok(Self { slots, masks, choices, weights, partition });
                }
                slot -= 1;
                counter[slot] += 1;
                if counter[slot] < options[slot].len() {
                    break;
                }
                counter[slot] = 0;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ_{X ⊇ points} W(X) / Z`.
    pub fn correlation(&self, points: &[LevelTimePoint]) -> Result<Complex64> {
        let mut wanted: Vec<(usize, u64)> = Vec::with_capacity(points.len());
        for p in points {
            let slot = self
                .slots
                .iter()
                .position(|&(n, a)| n == p.level && a == p.copy)
                .ok_or_else(|| Error::Dimension(format!("no copy {} on level {}", p.copy, p.level)))?;
            if p.location >= 64 {
                return Err(Error::Dimension(format!("location {} out of range", p.location)));
            }
            wanted.push((slot, 1u64 << p.location));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (choice, w) in self.choices.iter().zip(&self.weights) {
            if wanted.iter().all(|&(slot, bit)| self.masks[slot][choice[slot] as usize] & bit != 0) {
                total += w;
            }
        }
        Ok(total / self.partition)
    }
}

/// Correlation function by direct enumeration of all configurations.
pub fn brute_force_correlations(spec: &SpaceLikeWeightSpec, points: &[LevelTimePoint]) -> Result<Complex64> {
    if points.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    for p in points {
        spec.check_point(p)?;
    }
    Enumeration::new(spec)?.correlation(points)
}

/// Random spec with entries uniform in `[0.1, 1)`, `|𝔛_n| ∈ [n, max(n, max_set)]`
/// and `c(n) ∈ [0, max_copies]`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, levels: usize, max_set: usize, max_copies: usize) -> SpaceLikeWeightSpec {
    let entry = |rng: &mut R| Complex64::new(rng.random_range(0.1..1.0), 0.0);
    let set_sizes: Vec<usize> = (1..=levels).map(|n| rng.random_range(n..=max_set.max(n))).collect();
    let copies: Vec<usize> = (0..levels).map(|_| rng.random_range(0..=max_copies)).collect();
    let mut phi = Vec::with_capacity(levels);
    let mut phi_virt = Vec::with_capacity(levels);
    let mut transitions = Vec::with_capacity(levels);
    for n in 1..=levels {
        let size = set_sizes[n - 1];
        let prev = if n == 1 { 0 } else { set_sizes[n - 2] };
        phi.push(CMatrix::from_fn(prev, size, |_, _| entry(rng)));
        phi_virt.push(DVector::from_fn(size, |_, _| entry(rng)));
        transitions.push((0..copies[n - 1]).map(|_| CMatrix::from_fn(size, size, |_, _| entry(rng))).collect());
    }
    let top = set_sizes[levels - 1];
    let psi = (0..levels).map(|_| DVector::from_fn(top, |_, _| entry(rng))).collect();
    SpaceLikeWeightSpec { set_sizes, copies, phi, phi_virt, transitions, psi, times: None }
}

/// Replaces `Ψ^N` by random functions chosen so that `M` is upper triangular:
/// `Ψ^N_{N−l}` is projected orthogonally (in the bilinear pairing) to the
/// pushed-forward virtual rows of levels `l+1, …, N`.
pub fn make_upper_triangular<R: Rng + ?Sized>(spec: &mut SpaceLikeWeightSpec, rng: &mut R) -> Result<()> {
    spec.validate()?;
    let n_levels = spec.levels();
    let top = spec.set_sizes[n_levels - 1];
    let rows: Vec<DVector<Complex64>> =
        (1..=n_levels).map(|k| spec.virtual_row(k, n_levels, 0)).collect::<Result<_>>()?;
    for l in 1..=n_levels {
        let r = DVector::from_fn(top, |_, _| Complex64::new(rng.random_range(0.1..1.0), 0.0));
        let others = &rows[l..];
        let psi = if others.is_empty() {
            r
        } else {
            let v = CMatrix::from_fn(others.len(), top, |i, x| others[i][x]);
            let gram = &v * v.transpose();
            let coeffs = gram
                .lu()
                .solve(&(&v * &r))
                .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
            r - v.transpose() * coeffs
        };
        spec.psi[n_levels - l] = psi;
    }
    Ok(())
}

/// Single-time spec whose levels are GUE minors discretized on a uniform grid
/// of `points` nodes in `[−half_width, half_width]`: step transitions
/// `1[x ≤ y]`, unit virtual rows and `Ψ^N_j = h·Ψ^{N,t}_j` on the grid.
pub fn gue_discretized_spec(levels: usize, t: f64, half_width: f64, points: usize) -> Result<SpaceLikeWeightSpec> {
    if levels == 0 || points < levels {
        return Err(Error::Invalid("need at least as many grid points as levels".into()));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| -half_width + h * i as f64).collect();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut phi = Vec::with_capacity(levels);
    let mut phi_virt = Vec::with_capacity(levels);
    for n in 1..=levels {
        let prev = if n == 1 { 0 } else { points };
        phi.push(CMatrix::from_fn(prev, points, |i, j| if grid[i] <= grid[j] { one } else { zero }));
        phi_virt.push(DVector::from_element(points, one));
    }
    let mut psi = Vec::with_capacity(levels);
    for j in 0..levels {
        let v: Vec<Complex64> = grid
            .iter()
            .map(|&x| crate::kernels::psi_gue(levels, t, j as i64, x).map(|p| Complex64::new(h * p, 0.0)))
            .collect::<Result<_>>()?;
        psi.push(DVector::from_vec(v));
    }
    Ok(SpaceLikeWeightSpec {
        set_sizes: vec![points; levels],
        copies: vec![0; levels],
        phi,
        phi_virt,
        transitions: vec![Vec::new(); levels],
        psi,
        times: None,
    })
}

/// A table entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Scalar> for Complex64 {
    fn from(s: Scalar) -> Self {
        match s {
            Scalar::Real(r) => Complex64::new(r, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for Scalar {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            Scalar::Real(c.re)
        } else {
            Scalar::Complex([c.re, c.im])
        }
    }
}

type Rows = Vec<Vec<Scalar>>;

/// On-disk layout of [`SpaceLikeWeightSpec`]: tables as nested arrays with the
/// row as the first index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecFile {
    pub set_sizes: Vec<usize>,
    pub copies: Vec<usize>,
    pub phi: Vec<Rows>,
    pub phi_virt: Vec<Vec<Scalar>>,
    pub transitions: Vec<Vec<Rows>>,
    pub psi: Vec<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<Vec<f64>>>,
}

fn rows_to_matrix(rows: &Rows, nrows: usize, ncols: usize) -> std::result::Result<CMatrix, String> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("expected a {nrows}×{ncols} table"));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].into()))
}

fn matrix_to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

fn to_vector(v: &[Scalar]) -> DVector<Complex64> {
    DVector::from_iterator(v.len(), v.iter().map(|&s| s.into()))
}

fn from_vector(v: &DVector<Complex64>) -> Vec<Scalar> {
    v.iter().map(|&c| c.into()).collect()
}

impl TryFrom<SpecFile> for SpaceLikeWeightSpec {
    type Error = String;

    fn try_from(f: SpecFile) -> std::result::Result<Self, String> {
        let n_levels = f.set_sizes.len();
        if f.phi.len() != n_levels || f.transitions.len() != n_levels {
            return Err("phi and transitions need one entry per level".into());
        }
        let mut phi = Vec::with_capacity(n_levels);
        let mut transitions = Vec::with_capacity(n_levels);
        for n in 1..=n_levels {
            let size = f.set_sizes[n - 1];
            let prev = if n == 1 { 0 } else { f.set_sizes[n - 2] };
            phi.push(rows_to_matrix(&f.phi[n - 1], prev, size).map_err(|e| format!("phi[{}]: {e}", n - 1))?);
            let ts = f.transitions[n - 1]
                .iter()
                .map(|t| rows_to_matrix(t, size, size))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| format!("transitions[{}]: {e}", n - 1))?;
            transitions.push(ts);
        }
        let spec = SpaceLikeWeightSpec {
            set_sizes: f.set_sizes,
            copies: f.copies,
            phi,
            phi_virt: f.phi_virt.iter().map(|v| to_vector(v)).collect(),
            transitions,
            psi: f.psi.iter().map(|v| to_vector(v)).collect(),
            times: f.times,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl From<SpaceLikeWeightSpec> for SpecFile {
    fn from(s: SpaceLikeWeightSpec) -> Self {
        SpecFile {
            phi: s.phi.iter().map(matrix_to_rows).collect(),
            phi_virt: s.phi_virt.iter().map(from_vector).collect(),
            transitions: s.transitions.iter().map(|ts| ts.iter().map(matrix_to_rows).collect()).collect(),
            psi: s.psi.iter().map(from_vector).collect(),
            set_sizes: s.set_sizes,
            copies: s.copies,
            times: s.times,
        }
    }
}
