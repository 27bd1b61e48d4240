use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use spacelike::eynard::{Enumeration, EynardKernel, LevelTimePoint, SpaceLikeWeightSpec};
use spacelike::kernels::{
    kernel_diffusion_scaled_with, kernel_discrete_with, kernel_gue_extended_with, kernel_lue_with,
    DiscreteContours, KernelValue, LueParams, QuadratureOptions, SpaceTimePoint,
};
use spacelike::mc_verify::{
    diffusion_smoke, eynard_oracle, gue_monte_carlo, hciz_suite, identity_suite, lue_monte_carlo,
    particle_monte_carlo, Blocks, DiffusionSmokeConfig, EynardOracleConfig, GueMonteCarloConfig, HcizSuiteConfig,
    IdentityConfig, LueMonteCarloConfig, ParticleMonteCarloConfig, SuiteReport,
};
use spacelike::particles::{observe, InterlacedConfig, SimClock};
use spacelike::rmt_sim::{chunked, sample_dbm_minors, sample_wishart_minors, MinorEigenSample, RngStream};

use crate::args::{EynardCheckArgs, KernelArgs, KernelName, Model, SimulateArgs, Suite, VerifyArgs};
use crate::output::{float, manifest, manifest_path, write_json, Csv};
use crate::{CmdResult, Failure};

pub const DEFAULT_SEED: u64 = 2024;
pub const DBM_STREAM: u64 = 51;
pub const WISHART_STREAM: u64 = 52;
pub const PARTICLES_STREAM: u64 = 53;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Debug, Serialize)]
struct KernelRun {
    name: KernelName,
    n: usize,
    t: f64,
    x: Option<f64>,
    xmin: f64,
    xmax: f64,
    points: usize,
    diagonal: bool,
    y: Option<f64>,
    n2: usize,
    t2: f64,
    p: Option<usize>,
    quadrature: QuadratureOptions,
}

impl KernelRun {
    fn resolve(a: KernelArgs) -> Result<Self, Failure> {
        let name = a.name.ok_or_else(|| usage("kernel needs --name"))?;
        let diagonal = a.diag.unwrap_or(false) || a.y.is_none();
        if a.diag == Some(true) && (a.y.is_some() || a.n2.is_some() || a.t2.is_some()) {
            return Err(usage("--diag cannot be combined with --y, --n2 or --t2"));
        }
        let (t, t2) = if name == KernelName::GueStatic {
            (1.0, 1.0)
        } else {
            let t = a.t.unwrap_or(1.0);
            (t, if diagonal { t } else { a.t2.unwrap_or(t) })
        };
        let n = a.n.unwrap_or(1);
        let n2 = if diagonal { n } else { a.n2.unwrap_or(n) };
        if name == KernelName::Lue && a.p.is_none() {
            return Err(usage("the lue kernel needs --p"));
        }
        let defaults = QuadratureOptions::default();
        let quadrature = QuadratureOptions {
            epsilon: a.epsilon.unwrap_or(defaults.epsilon),
            circle_nodes: a.circle_nodes.unwrap_or(defaults.circle_nodes),
            line_nodes: a.line_nodes.unwrap_or(defaults.line_nodes),
            tol: a.tol.unwrap_or(defaults.tol),
        };
        quadrature.validate()?;
        let run = Self {
            name,
            n,
            t,
            x: a.x,
            xmin: a.xmin.unwrap_or(-3.0),
            xmax: a.xmax.unwrap_or(3.0),
            points: a.points.unwrap_or(61),
            diagonal,
            y: if diagonal { None } else { a.y },
            n2,
            t2,
            p: a.p,
            quadrature,
        };
        if run.x.is_none() && !(run.xmin <= run.xmax) {
            return Err(usage(format!("empty grid: xmin {} > xmax {}", run.xmin, run.xmax)));
        }
        if run.points == 0 {
            return Err(usage("--points must be positive"));
        }
        Ok(run)
    }

    fn positions(&self) -> Vec<f64> {
        if let Some(x) = self.x {
            return vec![x];
        }
        if self.name == KernelName::Discrete {
            let (lo, hi) = (self.xmin.ceil() as i64, self.xmax.floor() as i64);
            return (lo..=hi).map(|x| x as f64).collect();
        }
        if self.points == 1 {
            return vec![self.xmin];
        }
        let step = (self.xmax - self.xmin) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.xmax } else { self.xmin + step * i as f64 }).collect()
    }

    fn evaluate(&self, a: &SpaceTimePoint, b: &SpaceTimePoint) -> spacelike::Result<KernelValue> {
        let q = &self.quadrature;
        match self.name {
            KernelName::Discrete => kernel_discrete_with(a, b, &DiscreteContours::default(), q),
            KernelName::Gue | KernelName::GueStatic => kernel_gue_extended_with(a, b, q),
            KernelName::Scaled => kernel_diffusion_scaled_with(a, b, q),
            KernelName::Lue => kernel_lue_with(a, b, &LueParams { p: self.p.unwrap_or(0) }, q),
        }
    }
}

pub fn kernel(args: KernelArgs, out: &Path) -> CmdResult {
    let run = KernelRun::resolve(args)?;
    let xs = run.positions();
    if xs.is_empty() {
        return Err(usage("the grid contains no admissible positions"));
    }
    let mut csv = Csv::new(&["x1", "n1", "t1", "x2", "n2", "t2", "value", "error_estimate"]);
    for &x in &xs {
        let a = SpaceTimePoint::new(x, run.n, run.t);
        let b = if run.diagonal { a } else { SpaceTimePoint::new(run.y.unwrap_or(x), run.n2, run.t2) };
        let v = run.evaluate(&a, &b)?;
        csv.row(&[
            float(a.x),
            a.n.to_string(),
            float(a.t),
            float(b.x),
            b.n.to_string(),
            float(b.t),
            float(v.value),
            float(v.quadrature_error_estimate),
        ]);
    }
    let path = out.join("kernel.csv");
    csv.write(&path)?;
    write_json(&manifest_path(&path), &manifest("kernel", None, &run, &[&path])?)?;
    println!("kernel: {} rows written to {}", csv.rows(), path.display());
    Ok(true)
}

#[derive(Debug, Serialize)]
struct SimulateRun {
    model: Model,
    seed: u64,
    stream: u64,
    samples: usize,
    chunk: usize,
    size: usize,
    p: Option<usize>,
    times: Vec<f64>,
    levels: Vec<usize>,
}

impl SimulateRun {
    fn resolve(a: SimulateArgs) -> Result<Self, Failure> {
        let model = a.model.ok_or_else(|| usage("simulate needs --model"))?;
        let size = a.size.unwrap_or(3);
        if size == 0 {
            return Err(usage("--size must be positive"));
        }
        let levels = a.levels.unwrap_or_else(|| (1..=size).collect());
        if levels.is_empty() || levels.iter().any(|&m| m == 0 || m > size) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage(format!("--levels must be increasing values in 1..={size}")));
        }
        let times = a.times.unwrap_or_else(|| vec![1.0]);
        if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t > 0.0)) || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("--times must be increasing positive values"));
        }
        let samples = a.samples.unwrap_or(1000);
        if samples == 0 {
            return Err(usage("--samples must be positive"));
        }
        let (stream, p) = match model {
            Model::DbmMinors => (DBM_STREAM, None),
            Model::Wishart => (WISHART_STREAM, Some(a.p.unwrap_or(size))),
            Model::Particles => (PARTICLES_STREAM, None),
        };
        Ok(Self { model, seed: a.seed.unwrap_or(DEFAULT_SEED), stream, samples, chunk: a.chunk.unwrap_or(100).max(1), size, p, times, levels })
    }
}

fn eigen_rows(samples: &[MinorEigenSample], csv: &mut Csv) -> usize {
    let mut failures = 0;
    for (i, s) in samples.iter().enumerate() {
        let scale = s.eigenvalues.iter().flatten().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        if !s.is_interlaced(1e-9 * scale) {
            failures += 1;
        }
        for (time, per_level) in s.times.iter().zip(&s.eigenvalues) {
            for (level, eig) in s.levels.iter().zip(per_level) {
                for (k, lambda) in eig.iter().enumerate() {
                    csv.row(&[i.to_string(), float(*time), level.to_string(), (k + 1).to_string(), float(*lambda)]);
                }
            }
        }
    }
    failures
}

fn particle_rows(replicas: &[Vec<InterlacedConfig>], run: &SimulateRun, csv: &mut Csv) -> usize {
    let mut failures = 0;
    for (i, snapshots) in replicas.iter().enumerate() {
        for (time, cfg) in run.times.iter().zip(snapshots) {
            if !cfg.is_interlaced() {
                failures += 1;
            }
            for &m in &run.levels {
                for k in 1..=m {
                    csv.row(&[i.to_string(), float(*time), m.to_string(), k.to_string(), cfg.get(m, k).to_string()]);
                }
            }
        }
    }
    failures
}

fn flatten<T>(chunks: Vec<spacelike::Result<Vec<T>>>) -> Result<Vec<T>, Failure> {
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn simulate(args: SimulateArgs, out: &Path) -> CmdResult {
    let run = SimulateRun::resolve(args)?;
    let stream = RngStream::new(run.seed, run.stream);
    let (name, csv, failures) = match run.model {
        Model::DbmMinors | Model::Wishart => {
            let samples = flatten(chunked(&stream, run.samples, run.chunk, |rng, count| {
                (0..count)
                    .map(|_| match run.p {
                        None => sample_dbm_minors(run.size, &run.times, &run.levels, rng),
                        Some(p) => sample_wishart_minors(p, run.size, &run.times, &run.levels, rng),
                    })
                    .collect::<spacelike::Result<Vec<_>>>()
            }))?;
            let mut csv = Csv::new(&["sample", "time", "level", "k", "lambda"]);
            let failures = eigen_rows(&samples, &mut csv);
            let name = if run.model == Model::Wishart { "wishart" } else { "dbm-minors" };
            (name, csv, failures)
        }
        Model::Particles => {
            let replicas = flatten(chunked(&stream, run.samples, run.chunk, |rng, count| {
                let mut clock = SimClock::from_rng(rng.clone());
                (0..count)
                    .map(|_| {
                        clock.time = 0.0;
                        observe(run.size, &run.times, &mut clock)
                    })
                    .collect::<spacelike::Result<Vec<_>>>()
            }))?;
            let mut csv = Csv::new(&["run_id", "obs_time", "level", "k", "position"]);
            let failures = particle_rows(&replicas, &run, &mut csv);
            ("particles", csv, failures)
        }
    };
    let path = out.join(format!("{name}.csv"));
    csv.write(&path)?;
    let mut m = manifest("simulate", Some(run.seed), &run, &[&path])?;
    m["summary"] = json!({ "rows": csv.rows(), "interlacing_failures": failures });
    write_json(&manifest_path(&path), &m)?;
    println!("simulate: {} rows written to {}", csv.rows(), path.display());
    if failures > 0 {
        return Err(Failure::Runtime(format!("{failures} sampled configurations violate interlacing")));
    }
    Ok(true)
}

#[derive(Debug, Serialize)]
struct MonteCarloRun {
    gue: GueMonteCarloConfig,
    lue: LueMonteCarloConfig,
    particles: ParticleMonteCarloConfig,
    diffusion: DiffusionSmokeConfig,
}

#[derive(Debug, Serialize)]
struct VerifyRun {
    suite: Suite,
    seed: u64,
    tolerance_scale: f64,
    identities: Option<IdentityConfig>,
    hciz: Option<HcizSuiteConfig>,
    eynard: Option<EynardOracleConfig>,
    montecarlo: Option<MonteCarloRun>,
}

impl VerifyRun {
    fn resolve(a: VerifyArgs) -> Result<Self, Failure> {
        let suite = a.suite.ok_or_else(|| usage("verify needs --suite"))?;
        let seed = a.seed.unwrap_or(DEFAULT_SEED);
        let scale = a.tolerance_scale.unwrap_or(1.0);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(usage("--tolerance-scale must be positive"));
        }
        if a.samples == Some(0) || a.trials == Some(0) {
            return Err(usage("--samples and --trials must be positive"));
        }
        if a.z_max.is_some_and(|z| !(z > 0.0)) {
            return Err(usage("--z-max must be positive"));
        }
        let z = |default: f64| a.z_max.unwrap_or(default) * scale;
        let wants = |s: Suite| suite == s || suite == Suite::All;

        let identities = wants(Suite::Identities).then(|| {
            let mut c = IdentityConfig { seed, ..Default::default() };
            let t = &mut c.tolerances;
            for v in [
                &mut t.orthogonality,
                &mut t.lemma,
                &mut t.biorthogonality,
                &mut t.kernel_algebra,
                &mut t.dual_representation,
                &mut t.trace,
            ] {
                *v *= scale;
            }
            c
        });
        let hciz = wants(Suite::Hciz).then(|| {
            let d = HcizSuiteConfig::default();
            HcizSuiteConfig { seed, samples: a.samples.unwrap_or(d.samples), z_max: z(d.z_max) }
        });
        let eynard = wants(Suite::Eynard).then(|| {
            let d = EynardOracleConfig::default();
            EynardOracleConfig { seed, specs: a.trials.unwrap_or(d.specs), tol: d.tol * scale, ..d }
        });
        let montecarlo = wants(Suite::Montecarlo).then(|| {
            let mut gue = GueMonteCarloConfig { seed, ..Default::default() };
            gue.samples = a.samples.unwrap_or(gue.samples);
            gue.checks.z_max = z(gue.checks.z_max);
            let mut lue = LueMonteCarloConfig { seed, ..Default::default() };
            lue.samples = a.samples.unwrap_or(lue.samples);
            lue.checks.z_max = z(lue.checks.z_max);
            let mut particles = ParticleMonteCarloConfig { seed, ..Default::default() };
            particles.replicas = a.samples.unwrap_or(particles.replicas);
            particles.z_max = z(particles.z_max);
            let mut diffusion = DiffusionSmokeConfig { seed, ..Default::default() };
            diffusion.replicas = a.samples.unwrap_or(diffusion.replicas);
            diffusion.z_max = z(diffusion.z_max);
            MonteCarloRun { gue, lue, particles, diffusion }
        });
        Ok(Self { suite, seed, tolerance_scale: scale, identities, hciz, eynard, montecarlo })
    }

    fn execute(&self) -> Result<Vec<SuiteReport>, Failure> {
        let mut reports = Vec::new();
        if let Some(c) = &self.identities {
            reports.push(identity_suite(c, &Blocks::default()));
        }
        if let Some(c) = &self.hciz {
            reports.push(hciz_suite(c)?);
        }
        if let Some(c) = &self.eynard {
            reports.push(eynard_oracle(c)?);
        }
        if let Some(c) = &self.montecarlo {
            reports.push(gue_monte_carlo(&c.gue)?);
            reports.push(lue_monte_carlo(&c.lue)?);
            reports.push(particle_monte_carlo(&c.particles)?);
            reports.push(diffusion_smoke(&c.diffusion)?);
        }
        Ok(reports)
    }
}

fn suite_file_name(suite: Suite) -> &'static str {
    match suite {
        Suite::Identities => "verify-identities.json",
        Suite::Hciz => "verify-hciz.json",
        Suite::Eynard => "verify-eynard.json",
        Suite::Montecarlo => "verify-montecarlo.json",
        Suite::All => "verify-all.json",
    }
}

pub fn verify(args: VerifyArgs, out: &Path) -> CmdResult {
    let run = VerifyRun::resolve(args)?;
    let reports = run.execute()?;
    let passed = reports.iter().all(SuiteReport::passed);
    for r in &reports {
        let failed = r.failures().count();
        println!("{}: {} checks, {} failed, {} informational", r.suite, r.checks.len(), failed, r.info.len());
        for f in r.failures().take(10) {
            println!("  FAIL {} predicted {:.6e} estimate {:.6e} tolerance {:.3e}", f.name, f.predicted, f.estimate, f.tolerance);
        }
    }
    let path = out.join(suite_file_name(run.suite));
    let report = json!({
        "manifest": manifest("verify", Some(run.seed), &run, &[&path])?,
        "passed": passed,
        "suites": reports,
    });
    write_json(&path, &report)?;
    println!("verify: {} ({})", if passed { "PASS" } else { "FAIL" }, path.display());
    Ok(passed)
}

#[derive(Debug, Serialize)]
struct EynardCheckRun {
    spec: PathBuf,
    max_points: usize,
    tol: f64,
}

fn all_points(spec: &SpaceLikeWeightSpec) -> Vec<LevelTimePoint> {
    let mut out = Vec::new();
    for (n, (&size, &copies)) in spec.set_sizes.iter().zip(&spec.copies).enumerate() {
        for a in 0..=copies {
            for x in 0..size {
                out.push(LevelTimePoint::new(n + 1, a, x));
            }
        }
    }
    out
}

/// Every subset of `points` with between one and `max` elements, in
/// lexicographic order of indices.
fn subsets(points: &[LevelTimePoint], max: usize) -> Vec<Vec<LevelTimePoint>> {
    fn extend(points: &[LevelTimePoint], start: usize, max: usize, cur: &mut Vec<LevelTimePoint>, out: &mut Vec<Vec<LevelTimePoint>>) {
        for i in start..points.len() {
            cur.push(points[i]);
            out.push(cur.clone());
            if cur.len() < max {
                extend(points, i + 1, max, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(points, 0, max, &mut Vec::new(), &mut out);
    out
}

pub fn eynard_check(args: EynardCheckArgs, out: &Path) -> CmdResult {
    let run = EynardCheckRun {
        spec: args.spec.ok_or_else(|| usage("eynard-check needs a spec file"))?,
        max_points: args.max_points.unwrap_or(2),
        tol: args.tol.unwrap_or(1e-9),
    };
    if !(1..=3).contains(&run.max_points) {
        return Err(usage("--max-points must be 1, 2 or 3"));
    }
    if !(run.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    let text = std::fs::read_to_string(&run.spec)
        .map_err(|e| usage(format!("cannot read spec {}: {e}", run.spec.display())))?;
    let spec: SpaceLikeWeightSpec =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid spec {}: {e}", run.spec.display())))?;
    let kernel = EynardKernel::new(&spec)?;
    let brute = Enumeration::new(&spec)?;
    let mut csv = Csv::new(&["points", "kernel_re", "kernel_im", "enumeration_re", "enumeration_im", "abs_deviation"]);
    let mut worst = 0.0f64;
    let sets = subsets(&all_points(&spec), run.max_points);
    for set in &sets {
        let k = kernel.correlation(set)?;
        let e = brute.correlation(set)?;
        let d = (k - e).norm();
        worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
        let label: Vec<String> = set.iter().map(|p| format!("{}:{}:{}", p.level, p.copy, p.location)).collect();
        csv.row(&[label.join(" "), float(k.re), float(k.im), float(e.re), float(e.im), float(d)]);
    }
    let passed = worst < run.tol;
    let path = out.join("eynard-check.csv");
    csv.write(&path)?;
    let mut m = manifest("eynard-check", None, &run, &[&path])?;
    m["summary"] = json!({ "sets": sets.len(), "max_abs_deviation": worst, "passed": passed });
    write_json(&manifest_path(&path), &m)?;
    println!("eynard-check: {} point sets, max |Δ| {:.3e}: {}", sets.len(), worst, if passed { "PASS" } else { "FAIL" });
    Ok(passed)
}
