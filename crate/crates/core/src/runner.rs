//! The experiments behind the command line tool. Every command echoes its
//! normalised configuration into the output directory next to its results.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Engine, Experiment, OmegaRange, RunConfig};
use crate::diagnostics::{time_spectrum, Distance, ManifoldProbe, SpectrumReport, YMetric, YMetricSpec};
use crate::dirac::{max_abs, DiracAlgebra, Momentum};
use crate::dynamics::{
    free_projection, initial_data, kernel, kernel_at, reconstruct_field, solve_volterra, write_snapshot,
    InitialData, SpectralEngine, TrajectoryRecord, VolterraSolution,
};
use crate::grid::{FourierGrid, SpinorField};
use crate::model::{sigma, sigma_curve, Coupling, CouplingProfile, PolynomialPotential};
use crate::solitary::{build_atlas, check_assumptions, AtlasOptions, ManifoldAtlas};
use crate::{Complex64, Error, Mat4, Result};

fn prepare_output(cfg: &RunConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// ω samples of a range given in units of m.
fn scaled(range: &OmegaRange, m: f64) -> Vec<f64> {
    range.values().into_iter().map(|w| w * m).collect()
}

/// Sphere radii probed by the assumption checker, in units of m.
const SPHERE_PROBES: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Serialize)]
pub struct SigmaSummary {
    pub rows: usize,
    pub zeros: Vec<f64>,
}

/// σ curve CSV (omega, sigma, err) and the assumption report.
pub fn cmd_sigma(cfg: &RunConfig, out: &Path) -> Result<SigmaSummary> {
    let Experiment::Sigma { omega } = &cfg.experiment else {
        return Err(Error::Config("sigma needs a sigma experiment block".into()));
    };
    prepare_output(cfg, out)?;
    let rho = cfg.coupling()?;
    let u = cfg.potential()?;
    let m = rho.mass();
    let grid = scaled(omega, m);
    let curve = sigma_curve(&rho, &grid, cfg.tolerances.sigma)?;
    let mut w = create(&out.join("sigma.csv"))?;
    writeln!(w, "omega,sigma,err")?;
    for i in 0..curve.omega.len() {
        writeln!(w, "{:.12e},{:.12e},{:.12e}", curve.omega[i], curve.sigma[i], curve.quad_error[i])?;
    }
    w.flush()?;
    let probes: Vec<f64> = SPHERE_PROBES.iter().map(|r| r * m).collect();
    let report = check_assumptions(&rho, &u, &probes, &grid, cfg.tolerances.sigma)?;
    write_json(&out.join("assumptions.json"), &report)?;
    Ok(SigmaSummary { rows: curve.omega.len(), zeros: curve.zeros })
}

/// One materialised atlas wave.
#[derive(Debug, Clone, Serialize)]
pub struct AtlasRow {
    pub omega: f64,
    pub sigma: f64,
    pub branch: usize,
    pub root_r: f64,
    pub charge: f64,
    pub residual: f64,
    /// |σ·g(rσ²) + 1|.
    pub amplitude_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtlasSummary {
    pub rows: Vec<AtlasRow>,
    pub max_residual: f64,
    pub max_amplitude_defect: f64,
}

/// Atlas plus every wave's charge and grid residual.
pub fn atlas_rows<C: Coupling + ?Sized>(
    rho: &C,
    u: &PolynomialPotential,
    omega: &[f64],
    grid: FourierGrid,
    opts: AtlasOptions,
) -> Result<(ManifoldAtlas, Vec<AtlasRow>)> {
    let atlas = build_atlas(rho, u, omega, grid, opts)?;
    let mut rows = Vec::new();
    for (i, roots) in atlas.branches.iter().enumerate() {
        for (b, &r) in roots.iter().enumerate() {
            let wave = atlas.wave(rho, u, i, b, 0.0, grid)?;
            let s = atlas.sigma[i];
            rows.push(AtlasRow {
                omega: atlas.omega_grid[i],
                sigma: s,
                branch: b,
                root_r: r,
                charge: wave.charge,
                residual: wave.residual,
                amplitude_defect: (s * u.g(r * s * s) + 1.0).abs(),
            });
        }
    }
    Ok((atlas, rows))
}

pub fn cmd_atlas(cfg: &RunConfig, out: &Path) -> Result<AtlasSummary> {
    let Experiment::Atlas { omega } = &cfg.experiment else {
        return Err(Error::Config("atlas needs an atlas experiment block".into()));
    };
    prepare_output(cfg, out)?;
    let rho = cfg.coupling()?;
    let u = cfg.potential()?;
    let grid = cfg.grid()?;
    let opts = AtlasOptions { sigma_tol: cfg.tolerances.sigma, root_tol: cfg.tolerances.root };
    let (atlas, rows) = atlas_rows(&rho, &u, &scaled(omega, rho.mass()), grid, opts)?;
    let mut w = create(&out.join("atlas.csv"))?;
    writeln!(w, "omega,sigma,branchIndex,rootR,charge,residual")?;
    for r in &rows {
        writeln!(
            w,
            "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e}",
            r.omega, r.sigma, r.branch, r.root_r, r.charge, r.residual
        )?;
    }
    w.flush()?;
    let summary = AtlasSummary {
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        max_amplitude_defect: rows.iter().map(|r| r.amplitude_defect).fold(0.0, f64::max),
        rows,
    };
    write_json(
        &out.join("atlas.json"),
        &serde_json::json!({ "atlas": atlas, "waves": summary.rows }),
    )?;
    Ok(summary)
}

/// A spectral-engine run: sampled records, y at every step, final field.
#[derive(Debug, Clone)]
pub struct SpectralRun {
    pub record: TrajectoryRecord,
    pub y: Vec<Complex64>,
    pub final_field: SpinorField,
}

/// Runs the spectral engine for `steps` steps, recording every
/// `record_stride` steps. `hook` sees the engine after every step.
pub fn run_spectral<C, H>(
    psi0: &SpinorField,
    rho: &C,
    u: &PolynomialPotential,
    dt: f64,
    steps: usize,
    record_stride: usize,
    mut hook: H,
) -> Result<SpectralRun>
where
    C: Coupling + ?Sized,
    H: FnMut(&SpectralEngine) -> Result<()>,
{
    let stride = record_stride.max(1);
    let mut engine = SpectralEngine::new(psi0, rho, u, dt)?;
    let mut record = TrajectoryRecord::default();
    let mut y = Vec::with_capacity(steps + 1);
    let push = |engine: &SpectralEngine, record: &mut TrajectoryRecord| -> Result<()> {
        let o = engine.observables();
        if !(o.charge.is_finite() && o.kinetic.is_finite()) {
            return Err(Error::InvalidInput(format!("spectral engine diverged at t = {}", engine.time())));
        }
        record.push(engine.time(), o.y, o.charge, o.kinetic - u.value(o.y))
    };
    y.push(engine.y());
    push(&engine, &mut record)?;
    hook(&engine)?;
    for step in 1..=steps {
        engine.advance();
        y.push(engine.y());
        if step % stride == 0 || step == steps {
            push(&engine, &mut record)?;
        }
        hook(&engine)?;
    }
    Ok(SpectralRun { record, y, final_field: engine.field() })
}

/// Volterra engine on the same time grid: kernel, free projection, march.
pub fn run_volterra<C: Coupling + ?Sized>(
    psi0: &SpinorField,
    rho: &C,
    u: &PolynomialPotential,
    dt: f64,
    steps: usize,
    kernel_tol: f64,
) -> Result<VolterraSolution> {
    let k = kernel(rho, dt, dt * steps as f64, kernel_tol)?;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * dt).collect();
    let y0 = free_projection(rho, psi0, &times)?;
    solve_volterra(&k, &y0, u)
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossValidation {
    pub max_gap: f64,
    pub tolerance: f64,
    pub flagged: bool,
    /// ‖ψ_volt(T) − ψ_spec(T)‖ / ‖ψ_spec(T)‖ with the reconstructed field.
    pub field_gap: f64,
}

pub fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn relative_field_gap(a: &SpinorField, b: &SpinorField) -> f64 {
    let mut diff = a.clone();
    diff.axpy(Complex64::from(-1.0), b);
    (diff.norm_sqr() / b.norm_sqr()).sqrt()
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub spectral: Option<SpectralRun>,
    pub volterra: Option<VolterraSolution>,
    pub cross: Option<CrossValidation>,
}

fn warn_if_zero(psi0: &SpinorField, quiet: bool) {
    if psi0.norm_sqr() == 0.0 && !quiet {
        eprintln!("warning: initial field is zero and evolves trivially");
    }
}

pub fn cmd_evolve(cfg: &RunConfig, out: &Path, engine: Option<Engine>, quiet: bool) -> Result<EvolveOutcome> {
    let Experiment::Evolve { initial, engine: configured } = &cfg.experiment else {
        return Err(Error::Config("evolve needs an evolve experiment block".into()));
    };
    let engine = engine.unwrap_or(*configured);
    prepare_output(cfg, out)?;
    let rho = cfg.coupling()?;
    let u = cfg.potential()?;
    let grid = cfg.grid()?;
    let steps = cfg.steps()?;
    let dt = cfg.time.dt;
    let psi0 = initial_data(initial, &rho, &u, grid, cfg.seed)?;
    warn_if_zero(&psi0, quiet);

    let spectral = if matches!(engine, Engine::Spectral | Engine::Both) {
        let snap_stride = cfg.time.snapshot_stride;
        let snap_dir = out.join("snapshots");
        if snap_stride > 0 {
            fs::create_dir_all(&snap_dir)?;
        }
        let mut snapshots = Vec::new();
        let mut run = run_spectral(&psi0, &rho, &u, dt, steps, cfg.time.record_stride, |e| {
            if snap_stride > 0 && e.steps() % snap_stride == 0 {
                let name = format!("snap_{:07}.bin", e.steps());
                write_snapshot(create(&snap_dir.join(&name))?, &e.field(), rho.mass(), e.time())?;
                snapshots.push((e.time(), name));
            }
            Ok(())
        })?;
        run.record.snapshots = snapshots;
        let mut w = create(&out.join("trajectory_spectral.csv"))?;
        run.record.write_csv(&mut w)?;
        w.flush()?;
        Some(run)
    } else {
        None
    };

    let volterra = if matches!(engine, Engine::Volterra | Engine::Both) {
        let sol = run_volterra(&psi0, &rho, &u, dt, steps, cfg.tolerances.kernel)?;
        let mut w = create(&out.join("trajectory_volterra.csv"))?;
        writeln!(w, "t,re_y,im_y")?;
        for (j, z) in sol.y.iter().enumerate() {
            if j % cfg.time.record_stride == 0 || j == steps {
                writeln!(w, "{:.12e},{:.12e},{:.12e}", j as f64 * dt, z.re, z.im)?;
            }
        }
        w.flush()?;
        Some(sol)
    } else {
        None
    };

    let cross = match (&spectral, &volterra) {
        (Some(s), Some(v)) => {
            let gap = max_gap(&s.y, &v.y);
            let field = reconstruct_field(&v.y, dt, &psi0, dt * steps as f64, &rho, &u)?;
            let report = CrossValidation {
                max_gap: gap,
                tolerance: cfg.tolerances.engine_gap,
                flagged: gap > cfg.tolerances.engine_gap,
                field_gap: relative_field_gap(&field, &s.final_field),
            };
            if report.flagged && !quiet {
                eprintln!("warning: engines disagree by {gap:.3e} (tolerance {:.1e})", report.tolerance);
            }
            write_json(&out.join("cross_validation.json"), &report)?;
            Some(report)
        }
        _ => None,
    };
    Ok(EvolveOutcome { spectral, volterra, cross })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistSample {
    pub t: f64,
    #[serde(flatten)]
    pub distance: Distance,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractSummary {
    pub distances: Vec<DistSample>,
    pub spectra: Vec<SpectrumReport>,
    /// Least-squares slope of log dist against t.
    pub dist_log_slope: f64,
    /// dist at the last sample over dist at the first.
    pub dist_ratio: f64,
    /// Outside-gap mass of the last window over the first.
    pub outside_mass_ratio: f64,
    pub late_peak: f64,
    pub late_single_peak: bool,
    /// |late peak − ω of the dist minimizer| within one frequency bin.
    pub peak_matches_minimizer: bool,
}

/// Secondary-peak bound for a "single dominant peak".
pub const DOMINANCE_RATIO: f64 = 0.1;

pub fn cmd_attract(cfg: &RunConfig, out: &Path, quiet: bool) -> Result<AttractSummary> {
    let Experiment::Attract { initial, atlas: range, metric, .. } = &cfg.experiment else {
        return Err(Error::Config("attract needs an attract experiment block".into()));
    };
    prepare_output(cfg, out)?;
    let rho = cfg.coupling()?;
    let u = cfg.potential()?;
    let grid = cfg.grid()?;
    let m = rho.mass();
    let steps = cfg.steps()?;
    let dt = cfg.time.dt;
    let psi0 = initial_data(initial, &rho, &u, grid, cfg.seed)?;
    warn_if_zero(&psi0, quiet);
    let opts = AtlasOptions { sigma_tol: cfg.tolerances.sigma, root_tol: cfg.tolerances.root };
    let atlas = build_atlas(&rho, &u, &scaled(range, m), grid, opts)?;
    let spec = metric.unwrap_or_else(|| YMetricSpec::for_grid(&grid));
    let probe = ManifoldProbe::new(&atlas, &rho, &u, YMetric::new(spec, grid, m)?)?;
    let windows = cfg.windows();
    let targets: Vec<usize> = cfg.dist_times().iter().map(|t| (t / dt).round() as usize).collect();
    let mut distances = Vec::new();
    let run = run_spectral(&psi0, &rho, &u, dt, steps, cfg.time.record_stride, |e| {
        if targets.contains(&e.steps()) {
            let d = probe.distance(&e.field())?;
            if !quiet {
                eprintln!("t = {:8.3}  dist = {:.6e}  ω* = {:.6}", e.time(), d.d, d.omega_star);
            }
            distances.push(DistSample { t: e.time(), distance: d });
        }
        Ok(())
    })?;
    let mut w = create(&out.join("trajectory_spectral.csv"))?;
    run.record.write_csv(&mut w)?;
    w.flush()?;

    let mut w = create(&out.join("dist.csv"))?;
    writeln!(w, "t,dist,omega_star,theta_star,dist_zero")?;
    for s in &distances {
        let d = &s.distance;
        writeln!(w, "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", s.t, d.d, d.omega_star, d.theta_star, d.d_zero)?;
    }
    w.flush()?;

    let mut spectra = Vec::new();
    for (k, &win) in windows.iter().enumerate() {
        let r = time_spectrum(&run.y, 0.0, dt, win, m, cfg.tolerances.gap_delta * m)?;
        let mut w = create(&out.join(format!("spectrum_{k}.csv")))?;
        r.write_csv(&mut w)?;
        w.flush()?;
        spectra.push(r);
    }

    let summary = summarise(distances, spectra);
    write_json(&out.join("attract.json"), &summary)?;
    Ok(summary)
}

fn summarise(distances: Vec<DistSample>, spectra: Vec<SpectrumReport>) -> AttractSummary {
    let pts: Vec<(f64, f64)> =
        distances.iter().filter(|s| s.distance.d > 0.0).map(|s| (s.t, s.distance.d.ln())).collect();
    let dist_log_slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        num / den
    } else {
        f64::NAN
    };
    let dist_ratio = match (distances.first(), distances.last()) {
        (Some(a), Some(b)) if distances.len() >= 2 => b.distance.d / a.distance.d,
        _ => f64::NAN,
    };
    let outside_mass_ratio = match (spectra.first(), spectra.last()) {
        (Some(a), Some(b)) if spectra.len() >= 2 => b.mass_outside_gap / a.mass_outside_gap,
        _ => f64::NAN,
    };
    let (late_peak, late_single_peak, bin) = spectra
        .last()
        .map_or((f64::NAN, false, f64::NAN), |r| (r.peak_omega, r.single_dominant_peak(DOMINANCE_RATIO), r.bin_width));
    let minimizer = distances.last().map_or(f64::NAN, |s| s.distance.omega_star);
    AttractSummary {
        distances,
        spectra,
        dist_log_slope,
        dist_ratio,
        outside_mass_ratio,
        late_peak,
        late_single_peak,
        peak_matches_minimizer: (late_peak - minimizer).abs() <= bin,
    }
}

/// Test hooks for the self-test.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestHooks {
    /// Flips the sign of one diagonal entry of β.
    pub corrupt_beta: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SelftestReport {
    fn add(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value.is_finite() && value <= tolerance;
        self.pass &= pass;
        self.checks.push(Check { name: name.into(), value, tolerance, pass });
    }

    fn add_range(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        let pass = value >= lo && value <= hi;
        self.pass &= pass;
        self.checks.push(Check { name: name.into(), value, tolerance: hi - lo, pass });
    }
}

/// Worst violation of the projector and symbol identities over random momenta.
pub fn symbol_defect(alg: &DiracAlgebra, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = Mat4::identity();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let xi = Momentum(std::array::from_fn(|_| rng.random_range(-10.0..10.0)));
        let s = alg.symbol(xi);
        let (pp, pm) = s.projectors();
        let l2 = Complex64::from(s.lambda * s.lambda);
        for defect in [
            s.d * s.d - id * l2,
            pp * pp - pp,
            pm * pm - pm,
            pp * pm,
            pp + pm - id,
            s.d - s.d.adjoint(),
        ] {
            worst = worst.max(max_abs(&defect) / s.lambda.max(1.0).powi(2));
        }
    }
    worst
}

/// Worst violation of unitarity, the group law and the eigenphases
/// e^{∓iλt} on Π±.
pub fn propagator_defect(alg: &DiracAlgebra, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = Mat4::identity();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let xi = Momentum(std::array::from_fn(|_| rng.random_range(-10.0..10.0)));
        let (t, s) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let sym = alg.symbol(xi);
        let (ut, us, uts) = (sym.propagator(t), sym.propagator(s), sym.propagator(t + s));
        let (pp, pm) = sym.projectors();
        for defect in [
            ut.adjoint() * ut - id,
            ut * us - uts,
            ut * pp - pp * Complex64::from_polar(1.0, -sym.lambda * t),
            ut * pm - pm * Complex64::from_polar(1.0, sym.lambda * t),
        ] {
            worst = worst.max(max_abs(&defect));
        }
    }
    worst
}

/// ‖ρ‖² of a Gaussian coupling from the closed-form pair overlaps.
pub fn gaussian_norm_sqr(rho: &CouplingProfile) -> f64 {
    let mut total = Complex64::new(0.0, 0.0);
    for a in rho.terms() {
        for b in rho.terms() {
            let s = 1.0 / (1.0 / (a.width * a.width) + 1.0 / (b.width * b.width));
            let overlap = crate::dirac::dot(&a.direction, &b.direction);
            total += a.amplitude.conj() * b.amplitude * overlap * (2.0 * std::f64::consts::PI * s).powf(1.5);
        }
    }
    total.re
}

/// Observed order of y(T) under dt halving: log₂ of successive differences.
pub fn observed_order<C: Coupling + ?Sized>(
    psi0: &SpinorField,
    rho: &C,
    u: &PolynomialPotential,
    dt: f64,
    horizon: f64,
) -> Result<f64> {
    let mut finals = Vec::new();
    for k in 0..3 {
        let h = dt / (1 << k) as f64;
        let steps = (horizon / h).round() as usize;
        let mut e = SpectralEngine::new(psi0, rho, u, h)?;
        for _ in 0..steps {
            e.advance();
        }
        finals.push(e.y());
    }
    let d1 = (finals[0] - finals[1]).norm();
    let d2 = (finals[1] - finals[2]).norm();
    Ok((d1 / d2).log2())
}

/// Closed form σ(0) for the unit-norm Gaussian β-eigenvector coupling, m = 1.
pub fn sigma_zero_closed_form() -> f64 {
    let pi = std::f64::consts::PI;
    let erfc1 = 0.157_299_207_050_285_13_f64;
    -(4.0 / pi.sqrt()) * (pi.sqrt() / 2.0 - (pi / 2.0) * std::f64::consts::E * erfc1)
}

/// The full invariant suite on a small grid; fails when any check fails.
pub fn selftest(cfg: &RunConfig, hooks: SelftestHooks) -> Result<SelftestReport> {
    let mut report = SelftestReport { checks: Vec::new(), pass: true };
    let rho = cfg.coupling()?;
    let u = cfg.potential()?;
    let m = rho.mass();
    let mut alg = DiracAlgebra::new(m)?;
    if hooks.corrupt_beta {
        alg.beta[(3, 3)] = Complex64::new(1.0, 0.0);
    }
    report.add("anticommutation and hermiticity", alg.identity_defect(), 1e-12);
    report.add("symbol and projector identities", symbol_defect(&alg, 1000, cfg.seed), 1e-12);
    report.add("propagator unitarity, group law, eigenphases", propagator_defect(&alg, 1000, cfg.seed ^ 1), 1e-12);

    if rho == CouplingProfile::normalized_gaussian(1.0)? {
        let s = sigma(&rho, 0.0, 1e-12)?.value;
        report.add("sigma(0) closed form", (s - sigma_zero_closed_form()).abs(), 1e-8);
        report.add("sigma(-m) vanishes", sigma(&rho, -m, 1e-12)?.value.abs(), 1e-8);
    }
    let k0 = kernel_at(&rho, 0.0, 1e-12)?.value;
    let norm = gaussian_norm_sqr(&rho);
    report.add("K(0) equals the coupling norm", (k0 - norm).norm() / norm, 1e-9);

    // conservation on a small box
    let l = 8.0 / m;
    let grid = FourierGrid::new(16, l)?;
    let omega = 0.5 * m;
    let initial = InitialData::perturbed(omega, 0.1);
    let psi0 = match initial_data(&initial, &rho, &u, grid, cfg.seed) {
        Ok(p) => p,
        Err(_) => initial_data(
            &InitialData::GaussianPacket {
                spinor: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.2, 0.0), Complex64::new(0.0, 0.0)],
                center: [0.0; 3],
                width: 1.0 / m,
                momentum: [0.3 * m, 0.0, 0.0],
            },
            &rho,
            &u,
            grid,
            cfg.seed,
        )?,
    };
    let dt = 0.02 / m;
    let run = run_spectral(&psi0, &rho, &u, dt, 100, 1, |_| Ok(()))?;
    report.add("charge drift", run.record.charge_drift(), 1e-10);
    report.add("energy drift", run.record.energy_drift(), 1e-4);
    let order = observed_order(&psi0, &rho, &u, 0.1 / m, 2.0 / m)?;
    report.add_range("time-step order", order, 1.8, 2.2);
    Ok(report)
}

pub fn cmd_selftest(cfg: &RunConfig, out: &Path, hooks: SelftestHooks) -> Result<SelftestReport> {
    prepare_output(cfg, out)?;
    let report = selftest(cfg, hooks)?;
    write_json(&out.join("selftest.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_sigma_value() {
        assert!((sigma_zero_closed_form() + 0.484_255_687_717_375_65).abs() < 1e-15);
    }

    #[test]
    fn clean_algebra_passes_and_corrupted_beta_fails() {
        let alg = DiracAlgebra::new(1.0).unwrap();
        assert!(symbol_defect(&alg, 100, 0) < 1e-12);
        assert!(propagator_defect(&alg, 100, 0) < 1e-12);
        let mut bad = alg.clone();
        bad.beta[(3, 3)] = Complex64::new(1.0, 0.0);
        assert!(bad.identity_defect() > 0.5);
    }

    #[test]
    fn gaussian_norm_of_default_coupling() {
        let rho = CouplingProfile::normalized_gaussian(1.0).unwrap();
        assert!((gaussian_norm_sqr(&rho) - 1.0).abs() < 1e-14);
    }
}
