use std::f64::consts::PI;

use mfdirac::diagnostics::{
    charge, dist_to_manifold, energy, kinetic, time_spectrum, ynorm, ManifoldProbe, YMetric, YMetricSpec,
};
use mfdirac::dynamics::smooth_noise;
use mfdirac::grid::{Fft3, FourierGrid, Space, SpinorField};
use mfdirac::model::{rho_hat_field, CouplingProfile, PolynomialPotential};
use mfdirac::solitary::{build_atlas, wave_at, AtlasOptions};
use mfdirac::{Complex64, Error, Spinor};

fn quartic() -> PolynomialPotential {
    PolynomialPotential::new(vec![0.0, 1.0]).unwrap()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn coupling_energy_matches_radial_quadrature() {
    let rho = CouplingProfile::normalized_gaussian(1.0).unwrap();
    let grid = FourierGrid::new(32, 16.0).unwrap();
    let psi = rho_hat_field(&rho, grid);
    // ½(2π)⁻³∫ρ̂†𝒟ρ̂ with ρ̂†𝒟ρ̂ = m|ρ̂|² = 8π^{3/2}e^{−r²}
    let radial = simpson(|r| r * r * (-r * r).exp(), 0.0, 12.0, 20000);
    let expect = 0.5 * 8.0 * PI.powf(1.5) * 4.0 * PI * radial / (2.0 * PI).powi(3);
    assert!((kinetic(&psi, 1.0) - expect).abs() < 1e-10);
    // y = ‖ρ‖² = 1, so U(y) = 1
    assert!((energy(&psi, &rho, &quartic()) - (expect - 1.0)).abs() < 1e-10);
    let pos = psi.to_position(&Fft3::for_grid(&grid));
    assert!((charge(&pos) - charge(&psi)).abs() < 1e-12);
    assert!((kinetic(&pos, 1.0) - kinetic(&psi, 1.0)).abs() < 1e-12);
}

#[test]
fn ynorm_homogeneity_triangle_and_dominance() {
    let grid = FourierGrid::new(32, 16.0).unwrap();
    let spec = YMetricSpec::for_grid(&grid);
    let metric = YMetric::new(spec, grid, 1.0).unwrap();
    let weights: f64 = (1..=spec.rmax).map(|r| 0.5f64.powi(r as i32)).sum();
    for seed in 0..4 {
        let a = smooth_noise(grid, 1.0, 3.0, 2.0, 1.0, seed).unwrap();
        let b = smooth_noise(grid, 1.0, 6.0, 3.0, 0.5, seed + 100).unwrap();
        let na = metric.ynorm(&a).unwrap().value;
        let mut twice = a.clone();
        twice.scale(Complex64::from(2.0));
        assert!((metric.ynorm(&twice).unwrap().value - 2.0 * na).abs() < 1e-12 * na);
        let mut sum = a.clone();
        sum.axpy(Complex64::from(1.0), &b);
        assert!(metric.ynorm(&sum).unwrap().value <= na + metric.ynorm(&b).unwrap().value + 1e-14);
        // multiplier (m² + |ξ|²)^{−ε/2} ≤ m^{−ε}, and each cutoff has modulus ≤ 1
        assert!(na <= weights * a.norm_sqr().sqrt() + 1e-14);
    }
    let zero = SpinorField::zeros(grid, Space::Momentum);
    assert_eq!(ynorm(&zero, spec, 1.0).unwrap().value, 0.0);
}

struct Setup {
    rho: CouplingProfile,
    u: PolynomialPotential,
    grid: FourierGrid,
}

fn setup() -> Setup {
    Setup {
        rho: CouplingProfile::normalized_gaussian(1.0).unwrap(),
        u: quartic(),
        grid: FourierGrid::new(32, 16.0).unwrap(),
    }
}

#[test]
fn distance_of_manifold_points() {
    let s = setup();
    let omega: Vec<f64> = (0..9).map(|i| 0.1 + 0.1 * i as f64).collect();
    let atlas = build_atlas(&s.rho, &s.u, &omega, s.grid, AtlasOptions::default()).unwrap();
    let metric = YMetric::new(YMetricSpec::for_grid(&s.grid), s.grid, 1.0).unwrap();
    let probe = ManifoldProbe::new(&atlas, &s.rho, &s.u, metric).unwrap();

    let wave = wave_at(&s.rho, &s.u, 0.5, 0, 0.0, s.grid).unwrap();
    let d = probe.distance(&wave.profile_hat).unwrap();
    assert!(d.d <= 1e-6, "{d:?}");
    assert!((d.omega_star - 0.5).abs() < 1e-4);
    assert!(d.theta_star.abs() < 1e-8);
    assert!(!d.zero_wave_wins);

    let theta0 = 1.1;
    let mut turned = wave.profile_hat.clone();
    turned.scale(Complex64::from_polar(1.0, theta0));
    let dt = probe.distance(&turned).unwrap();
    assert!((dt.d - d.d).abs() <= 1e-6);
    assert!((dt.theta_star - theta0).abs() < 1e-8, "{}", dt.theta_star);

    let zero = SpinorField::zeros(s.grid, Space::Momentum);
    let dz = probe.distance(&zero).unwrap();
    assert!(dz.zero_wave_wins && dz.d == 0.0);
}

#[test]
fn distance_of_a_bumped_wave() {
    let s = setup();
    let omega = [0.4, 0.5, 0.6];
    let atlas = build_atlas(&s.rho, &s.u, &omega, s.grid, AtlasOptions::default()).unwrap();
    let spec = YMetricSpec::for_grid(&s.grid);
    let wave = wave_at(&s.rho, &s.u, 0.5, 0, 0.0, s.grid).unwrap();
    // localised bump carried by a fast plane wave: nearly orthogonal to the
    // smooth manifold tangent
    let bump = SpinorField::from_fn(s.grid, Space::Position, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let v = Complex64::from_polar(0.05 * (-r2 / 2.0).exp(), 4.0 * x[0]);
        Spinor::new(Complex64::new(0.0, 0.0), v, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    })
    .to_momentum(&Fft3::for_grid(&s.grid));
    let delta = ynorm(&bump, spec, 1.0).unwrap().value;
    let mut psi = wave.profile_hat.clone();
    psi.axpy(Complex64::from(1.0), &bump);
    let d = dist_to_manifold(&psi, &atlas, &s.rho, &s.u, spec).unwrap();
    assert!(d.d >= 0.0 && d.d <= delta * (1.0 + 1e-9), "{} vs {delta}", d.d);
    assert!(d.d >= 0.9 * delta, "{} vs {delta}", d.d);
}

#[test]
fn metric_rejects_oversized_cutoff() {
    let grid = FourierGrid::new(16, 8.0).unwrap();
    assert!(matches!(
        YMetric::new(YMetricSpec { epsilon: 0.5, rmax: 3 }, grid, 1.0),
        Err(Error::RmaxTooLarge { .. })
    ));
}

#[test]
fn two_tone_spectrum_splits_by_parseval() {
    let dt = 0.01;
    let y: Vec<Complex64> = (0..=20000)
        .map(|j| {
            let t = j as f64 * dt;
            Complex64::from_polar(1.0, -0.5 * t) + Complex64::from_polar(0.1, -3.0 * t)
        })
        .collect();
    let r = time_spectrum(&y, 0.0, dt, (0.0, 200.0), 1.0, 0.1).unwrap();
    let expect = 0.01 / 1.01;
    assert!((r.outside_fraction() - expect).abs() < 1e-3, "{}", r.outside_fraction());
    assert!((r.peak_omega - 0.5).abs() <= r.bin_width);
    assert!((r.mass_inside_gap + r.mass_outside_gap - r.total).abs() < 1e-12 * r.total);
}

#[test]
fn short_windows_are_rejected() {
    let y = vec![Complex64::new(1.0, 0.0); 1000];
    assert!(matches!(
        time_spectrum(&y, 0.0, 0.01, (0.0, 2.0), 1.0, 0.1),
        Err(Error::WindowTooShort { .. })
    ));
    assert!(time_spectrum(&y, 0.0, 0.01, (0.0, 20.0), 1.0, 0.1).is_err());
}
