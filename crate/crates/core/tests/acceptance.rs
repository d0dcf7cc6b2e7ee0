use std::f64::consts::{E, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use mfdirac::config::RunConfig;
use mfdirac::dirac::{max_abs, DiracAlgebra, Momentum};
use mfdirac::dynamics::{initial_data, InitialData};
use mfdirac::grid::FourierGrid;
use mfdirac::model::{sigma, CouplingProfile, PolynomialPotential};
use mfdirac::runner::{atlas_rows, cmd_attract, max_gap, run_spectral, run_volterra, SpectralRun};
use mfdirac::solitary::{build_atlas, wave_at, AtlasOptions};
use mfdirac::{Complex64, Error, Mat4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use statrs::function::erf::erfc;

struct Outcome {
    pass: bool,
    detail: String,
}

fn gaussian() -> CouplingProfile {
    CouplingProfile::normalized_gaussian(1.0).unwrap()
}

fn quartic() -> PolynomialPotential {
    PolynomialPotential::new(vec![0.0, 1.0]).unwrap()
}

fn random_momenta(count: usize, seed: u64) -> Vec<Momentum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Momentum([rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)]))
        .collect()
}

fn anti(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b + b * a
}

fn algebra_suite() -> Outcome {
    let start = Instant::now();
    let alg = DiracAlgebra::new(1.0).unwrap();
    let id = Mat4::identity();
    let two = Complex64::new(2.0, 0.0);
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            let expect = if j == k { id * two } else { Mat4::zeros() };
            worst = worst.max(max_abs(&(anti(&alg.alpha[j], &alg.alpha[k]) - expect)));
        }
        worst = worst.max(max_abs(&anti(&alg.alpha[j], &alg.beta)));
        worst = worst.max(max_abs(&(alg.alpha[j].adjoint() - alg.alpha[j])));
    }
    worst = worst.max(max_abs(&(alg.beta * alg.beta - id)));
    worst = worst.max(max_abs(&(alg.beta.adjoint() - alg.beta)));
    for xi in random_momenta(1000, 1) {
        let sym = alg.symbol(xi);
        let lam = Complex64::new(sym.lambda, 0.0);
        let (pp, pm) = sym.projectors();
        let defects = [
            sym.d.adjoint() - sym.d,
            (sym.d * sym.d - id * lam * lam) / (lam * lam),
            pp * pp - pp,
            pm * pm - pm,
            pp * pm,
            pp + pm - id,
            pp.adjoint() - pp,
            sym.d * pp - pp * lam,
            sym.d * pm + pm * lam,
        ];
        for d in &defects {
            worst = worst.max(max_abs(d));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-12 && elapsed < 1.0,
        detail: format!("max entrywise defect {worst:.2e} over 1000 momenta in {elapsed:.3} s"),
    }
}

fn propagator_suite() -> Outcome {
    let start = Instant::now();
    let alg = DiracAlgebra::new(1.0).unwrap();
    let id = Mat4::identity();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for xi in random_momenta(1000, 3) {
        let sym = alg.symbol(xi);
        let t: f64 = rng.random_range(-10.0..10.0);
        let s: f64 = rng.random_range(-10.0..10.0);
        let (ut, us) = (sym.propagator(t), sym.propagator(s));
        let (pp, pm) = sym.projectors();
        let phase = Complex64::from_polar(1.0, -sym.lambda * t);
        let defects = [
            ut.adjoint() * ut - id,
            ut * us - sym.propagator(t + s),
            sym.propagator(0.0) - id,
            ut * pp - pp * phase,
            ut * pm - pm * phase.conj(),
        ];
        for d in &defects {
            worst = worst.max(max_abs(d));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-12 && elapsed < 1.0,
        detail: format!("max defect {worst:.2e} over 1000 momenta in {elapsed:.3} s"),
    }
}

fn sigma_oracle() -> Outcome {
    let rho = gaussian();
    let expect = -(4.0 / PI.sqrt()) * (PI.sqrt() / 2.0 - (PI / 2.0) * E * erfc(1.0));
    let at_zero = (sigma(&rho, 0.0, 1e-12).unwrap().value - expect).abs();
    let at_minus = sigma(&rho, -1.0, 1e-12).unwrap().value.abs();
    let points = 999;
    let worst = (1..=points)
        .map(|k| sigma(&rho, k as f64 / (points + 1) as f64, 1e-10).unwrap().value)
        .fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: at_zero <= 1e-8 && at_minus <= 1e-8 && worst < 0.0,
        detail: format!(
            "|σ(0) − oracle| = {at_zero:.1e}, |σ(−1)| = {at_minus:.1e}, max σ on {points} points of (0,1) = {worst:.4}"
        ),
    }
}

fn manifold_certification() -> Outcome {
    let (rho, u) = (gaussian(), quartic());
    let omega: Vec<f64> = (0..39).map(|i| -0.95 + 0.05 * i as f64).collect();
    let mut maxima = Vec::new();
    let mut defect: f64 = 0.0;
    for (n, l) in [(64, 32.0), (96, 48.0)] {
        let (_, rows) = atlas_rows(&rho, &u, &omega, FourierGrid::new(n, l).unwrap(), AtlasOptions::default()).unwrap();
        defect = rows.iter().map(|r| r.amplitude_defect).fold(defect, f64::max);
        maxima.push(rows.iter().map(|r| r.residual).fold(0.0, f64::max));
    }
    Outcome {
        pass: defect <= 1e-12 && maxima[0] <= 1e-3 && maxima[1] < maxima[0],
        detail: format!(
            "amplitude defect {defect:.1e}, max residual {:.2e} at N=64 and {:.2e} at N=96 over 39 waves",
            maxima[0], maxima[1]
        ),
    }
}

fn perturbed_run(n: usize, l: f64, dt: f64, t: f64) -> (mfdirac::grid::SpinorField, SpectralRun) {
    let (rho, u) = (gaussian(), quartic());
    let grid = FourierGrid::new(n, l).unwrap();
    let psi0 = initial_data(&InitialData::perturbed(0.5, 0.2), &rho, &u, grid, 1).unwrap();
    let steps = (t / dt).round() as usize;
    let run = run_spectral(&psi0, &rho, &u, dt, steps, 10, |_| Ok(())).unwrap();
    (psi0, run)
}

fn conservation(coarse: &SpectralRun, fine: &SpectralRun) -> Outcome {
    let (q1, q2) = (coarse.record.charge_drift(), fine.record.charge_drift());
    let (e1, e2) = (coarse.record.energy_drift(), fine.record.energy_drift());
    let pq = (q1 / q2).log2();
    let pe = (e1 / e2).log2();
    let bounds = q1 <= 1e-6 && e1 <= 1e-5;
    let orders = (pq - 2.0).abs() <= 0.2 && (pe - 2.0).abs() <= 0.2;
    Outcome {
        pass: bounds && orders,
        detail: format!(
            "charge drift {q1:.2e} -> {q2:.2e} (exponent {pq:.2}), energy drift {e1:.2e} -> {e2:.2e} (exponent {pe:.2})"
        ),
    }
}

fn dual_engine(coarse: &SpectralRun, coarse_psi0: &mfdirac::grid::SpinorField) -> Outcome {
    let (rho, u) = (gaussian(), quartic());
    let (dt, t) = (0.01f64, 20.0);
    let steps = (t / dt).round() as usize;
    let volt = run_volterra(coarse_psi0, &rho, &u, dt, steps, 1e-10).unwrap();
    let g64 = max_gap(&coarse.y, &volt.y);
    let (psi0, fine) = perturbed_run(96, 48.0, dt, t);
    let volt = run_volterra(&psi0, &rho, &u, dt, steps, 1e-10).unwrap();
    let g96 = max_gap(&fine.y, &volt.y);
    Outcome {
        pass: g64 <= 5e-3 && g96 <= 5e-3 && g96 < g64,
        detail: format!("max |y_spec − y_volt| = {g64:.3e} at (64,32), {g96:.3e} at (96,48)"),
    }
}

fn attraction(dir: &Path) -> Outcome {
    let mut cfg = RunConfig::default();
    cfg.time.t = 50.0;
    cfg.experiment = serde_json::from_value(json!({
        "name": "attract",
        "initial": { "kind": "perturbedSolitary", "omega": 0.5, "branch": 0, "phase": 0.0, "delta": 0.2 }
    }))
    .unwrap();
    let s = cmd_attract(&cfg, dir, true).unwrap();
    let dist_ok = s.dist_ratio < 0.5;
    let mass_ok = s.outside_mass_ratio <= 0.1;
    let peak_ok = s.late_single_peak && s.late_peak.abs() < 1.0 && s.peak_matches_minimizer;
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    Outcome {
        pass: dist_ok && mass_ok && peak_ok,
        detail: format!(
            "dist ratio {:.3} [{}]; outside-gap mass late/early {:.3} needs <= 0.1 [{}]; late peak ω* = {:.4}, single {}, minimizer match {} [{}]",
            s.dist_ratio,
            mark(dist_ok),
            s.outside_mass_ratio,
            mark(mass_ok),
            s.late_peak,
            s.late_single_peak,
            s.peak_matches_minimizer,
            mark(peak_ok)
        ),
    }
}

fn exclusion() -> Outcome {
    let (rho, u) = (gaussian(), quartic());
    let grid = FourierGrid::new(16, 8.0).unwrap();
    let outside = [1.0, -1.0, 1.0 + 1e-12, -1.5, 3.0];
    let rejected = outside.iter().all(|&w| {
        let atlas = build_atlas(&rho, &u, &[0.0, w], grid, AtlasOptions::default());
        let wave = wave_at(&rho, &u, w, 0, 0.0, grid);
        matches!(atlas, Err(Error::OmegaOutOfRange { .. })) && matches!(wave, Err(Error::OmegaOutOfRange { .. }))
    });
    let inside = wave_at(&rho, &u, 0.99, 0, 0.0, grid).is_ok();
    Outcome {
        pass: rejected && inside,
        detail: format!("{} frequencies with |ω| ≥ m rejected by atlas and wave requests: {rejected}", outside.len()),
    }
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn reproducibility(dir: &Path) -> Outcome {
    let cfg = json!({
        "grid": { "n": 32, "l": 16.0 },
        "time": { "dt": 0.01, "t": 10.0, "record_stride": 10 },
        "seed": 17,
        "experiment": { "name": "evolve" }
    });
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let mut outputs = Vec::new();
    for (k, sub) in ["first", "second"].iter().enumerate() {
        let out = dir.join(sub);
        for args in [&["evolve", "--engine", "both"][..], &["atlas"][..], &["sigma"][..]] {
            let status = Command::new(env!("CARGO_BIN_EXE_mfdirac"))
                .args(args)
                .arg("--config")
                .arg(&path)
                .arg("--out")
                .arg(&out)
                .arg("--quiet")
                .status()
                .unwrap();
            assert!(status.success(), "run {k} of {args:?} failed");
        }
        outputs.push(csv_files(&out));
    }
    let identical = outputs[0] == outputs[1] && !outputs[0].is_empty();
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    Outcome { pass: identical, detail: format!("byte-identical {}: {}", names.join(", "), identical) }
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |k: usize, name: &'static str, o: Outcome| {
        println!("criterion {k} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, name, o));
    };

    report(1, "algebra", algebra_suite());
    report(2, "propagator", propagator_suite());
    report(3, "sigma oracle", sigma_oracle());
    report(4, "manifold certification", manifold_certification());
    let (psi64, coarse) = perturbed_run(64, 32.0, 0.01, 20.0);
    let (_, fine) = perturbed_run(64, 32.0, 0.005, 20.0);
    report(5, "conservation", conservation(&coarse, &fine));
    report(6, "dual-engine equivalence", dual_engine(&coarse, &psi64));
    report(7, "attraction trend", attraction(&scratch.path().join("attract")));
    report(8, "exclusion", exclusion());
    report(9, "reproducibility", reproducibility(scratch.path()));

    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| format!("{} ({})", r.0, r.1)).collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
