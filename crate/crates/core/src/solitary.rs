//! The solitary manifold: amplitude roots, wave assembly, residual
//! certification, the ω-atlas and the coupling assumption checker.
//!
//! A solitary wave φ e^{−iωt} has φ̂ = C·Σ̂(·, ω); the self-consistency
//! C = F(C·σ(ω)) reduces, with r = |C|², to the scalar equation
//! σ·g(r·σ²) = −1. Only r enters, so every root carries a full U(1) orbit.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dirac::{apply_symbol, dot};
use crate::grid::{FourierGrid, Space, SpinorField};
use crate::model::{profile_sigma_hat, sigma, sphere_mass, sigma_curve, Coupling, PolynomialPotential, SolitaryProfile};
use crate::{Complex64, Error, Result, Spinor};

/// Points with |σ| below this are flagged near-singular in the atlas.
pub const NEAR_SINGULAR_SIGMA: f64 = 1e-6;

/// h(r) = σ·g(r·σ²) + 1.
fn amplitude_defect(u: &PolynomialPotential, sigma: f64, r: f64) -> f64 {
    sigma * u.g(r * sigma * sigma) + 1.0
}

/// All r > 0 with σ·g(r·σ²) = −1, ascending, each certified to `root_tol`.
pub fn amplitude_roots(u: &PolynomialPotential, sigma: f64, root_tol: f64) -> Vec<f64> {
    if sigma == 0.0 || !sigma.is_finite() || u.is_zero() {
        return Vec::new();
    }
    let s2 = sigma * sigma;
    // coefficients of rʲ, j = 0..p−1
    let mut coef: Vec<f64> = u
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, &uk)| sigma * 2.0 * (j + 1) as f64 * uk * s2.powi(j as i32))
        .collect();
    coef[0] += 1.0;
    while coef.len() > 1 && *coef.last().unwrap() == 0.0 {
        coef.pop();
    }
    let deg = coef.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coef[deg];
    let candidates: Vec<Complex64> = if deg == 1 {
        vec![Complex64::new(-coef[0] / lead, 0.0)]
    } else {
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -coef[i] / lead;
        }
        comp.complex_eigenvalues().iter().copied().collect()
    };
    let mut roots: Vec<f64> = Vec::new();
    for z in candidates {
        if z.im.abs() > 1e-6 * (1.0 + z.norm()) || z.re <= 0.0 {
            continue;
        }
        let mut r = z.re;
        for _ in 0..50 {
            let h = amplitude_defect(u, sigma, r);
            let dh = sigma * s2 * u.g_prime(r * s2);
            if dh == 0.0 {
                break;
            }
            let step = h / dh;
            r -= step;
            if step.abs() <= 1e-16 * r.abs() {
                break;
            }
        }
        if r > 0.0 && amplitude_defect(u, sigma, r).abs() <= root_tol {
            roots.push(r);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * b.abs());
    roots
}

/// A materialised solitary wave on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitaryWave {
    pub omega: f64,
    pub amplitude: Complex64,
    pub profile_hat: SpinorField,
    pub charge: f64,
    pub residual: f64,
}

/// Assembles φ̂ = C·Σ̂ with C = √r·e^{iθ} and checks C = F(C·σ).
pub fn build_wave<C: Coupling + ?Sized>(
    rho: &C,
    u: &PolynomialPotential,
    root_r: f64,
    phase: f64,
    profile: &SolitaryProfile,
    sigma_value: f64,
    tol: f64,
) -> Result<SolitaryWave> {
    if !(root_r > 0.0 && root_r.is_finite()) {
        return Err(Error::InconsistentWave(format!("amplitude root {root_r} must be positive")));
    }
    let c = Complex64::from_polar(root_r.sqrt(), phase);
    let defect = (c - u.force(c * sigma_value)).norm();
    if defect > tol * c.norm() {
        return Err(Error::InconsistentWave(format!(
            "|C − F(Cσ)| = {defect:e} exceeds {tol:e}·|C| at ω = {}",
            profile.omega
        )));
    }
    let mut field = profile.field();
    field.scale(c);
    let charge = field.norm_sqr();
    let mut wave = SolitaryWave { omega: profile.omega, amplitude: c, profile_hat: field, charge, residual: 0.0 };
    wave.residual = residual(&wave, rho, u)?;
    Ok(wave)
}

/// ‖(𝒟 − ω)φ̂ + ρ̂·F(⟨ρ, φ⟩)‖ / ‖φ̂‖ on the grid, entirely in momentum space.
pub fn residual<C: Coupling + ?Sized>(wave: &SolitaryWave, rho: &C, u: &PolynomialPotential) -> Result<f64> {
    let field = &wave.profile_hat;
    if field.space != Space::Momentum {
        return Err(Error::InvalidInput("residual needs a momentum-space profile".into()));
    }
    let grid = field.grid;
    let m = rho.mass();
    let rho_hat: Vec<Spinor> = grid.momenta().map(|xi| rho.rho_hat(xi)).collect();
    let y = rho_hat.iter().zip(&field.data).fold(Complex64::new(0.0, 0.0), |acc, (r, p)| acc + dot(r, p))
        * grid.momentum_weight();
    let f = u.force(y);
    let w = Complex64::from(wave.omega);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (p, r)) in field.data.iter().zip(&rho_hat).enumerate() {
        let xi = grid.momentum(i);
        let res = apply_symbol(xi, m, p) - p * w + r * f;
        num += res.norm_squared();
        den += p.norm_squared();
    }
    if den == 0.0 {
        return Err(Error::ZeroWave);
    }
    Ok((num / den).sqrt())
}

/// Atlas entry status.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    NearSingular,
    QuadratureFailed(String),
}

/// Roots of the amplitude equation on an ω grid; waves are built on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldAtlas {
    pub m: f64,
    pub omega_grid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_err: Vec<f64>,
    pub branches: Vec<Vec<f64>>,
    pub status: Vec<PointStatus>,
    pub potential: Vec<f64>,
    pub coupling: serde_json::Value,
    pub grid: FourierGrid,
}

#[derive(Debug, Clone, Copy)]
pub struct AtlasOptions {
    pub sigma_tol: f64,
    pub root_tol: f64,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        AtlasOptions { sigma_tol: 1e-10, root_tol: 1e-12 }
    }
}

/// σ and amplitude roots at every ω. Frequencies with |ω| ≥ m are refused:
/// no nonzero square-integrable solitary waves live there.
pub fn build_atlas<C: Coupling + ?Sized>(
    rho: &C,
    u: &PolynomialPotential,
    omega_grid: &[f64],
    grid: FourierGrid,
    opts: AtlasOptions,
) -> Result<ManifoldAtlas> {
    let m = rho.mass();
    if let Some(&bad) = omega_grid.iter().find(|w| !(w.abs() < m)) {
        return Err(Error::OmegaOutOfRange { omega: bad, m });
    }
    if omega_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("ω grid must be strictly increasing".into()));
    }
    let entries: Vec<(f64, f64, Vec<f64>, PointStatus)> = omega_grid
        .par_iter()
        .map(|&w| match sigma(rho, w, opts.sigma_tol) {
            Ok(s) if s.value.abs() < NEAR_SINGULAR_SIGMA => (s.value, s.err, Vec::new(), PointStatus::NearSingular),
            Ok(s) => (s.value, s.err, amplitude_roots(u, s.value, opts.root_tol), PointStatus::Ok),
            Err(e) => {
                let best = match e {
                    Error::QuadratureNotConverged { best, .. } => best,
                    _ => f64::NAN,
                };
                (best, f64::NAN, Vec::new(), PointStatus::QuadratureFailed(e.to_string()))
            }
        })
        .collect();
    let mut atlas = ManifoldAtlas {
        m,
        omega_grid: omega_grid.to_vec(),
        sigma: Vec::with_capacity(entries.len()),
        sigma_err: Vec::with_capacity(entries.len()),
        branches: Vec::with_capacity(entries.len()),
        status: Vec::with_capacity(entries.len()),
        potential: u.coefficients().to_vec(),
        coupling: rho.describe(),
        grid,
    };
    for (s, e, b, st) in entries {
        atlas.sigma.push(s);
        atlas.sigma_err.push(e);
        atlas.branches.push(b);
        atlas.status.push(st);
    }
    Ok(atlas)
}

impl ManifoldAtlas {
    pub fn len(&self) -> usize {
        self.omega_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_grid.is_empty()
    }

    /// Number of (ω, branch) pairs.
    pub fn wave_count(&self) -> usize {
        self.branches.iter().map(Vec::len).sum()
    }

    /// Materialises the wave at grid point `index`, branch `branch`.
    pub fn wave<C: Coupling + ?Sized>(
        &self,
        rho: &C,
        u: &PolynomialPotential,
        index: usize,
        branch: usize,
        phase: f64,
        grid: FourierGrid,
    ) -> Result<SolitaryWave> {
        let omega = self.omega_grid[index];
        let r = *self.branches[index].get(branch).ok_or_else(|| {
            Error::InvalidInput(format!("no branch {branch} at ω = {omega}"))
        })?;
        let profile = profile_sigma_hat(rho, omega, grid)?;
        build_wave(rho, u, r, phase, &profile, self.sigma[index], 1e-10)
    }
}

/// Solitary wave at an arbitrary interior frequency (not necessarily an
/// atlas grid point), branch `branch` in ascending-root order.
pub fn wave_at<C: Coupling + ?Sized>(
    rho: &C,
    u: &PolynomialPotential,
    omega: f64,
    branch: usize,
    phase: f64,
    grid: FourierGrid,
) -> Result<SolitaryWave> {
    let m = rho.mass();
    if !(omega.abs() < m) {
        return Err(Error::OmegaOutOfRange { omega, m });
    }
    let s = sigma(rho, omega, 1e-12)?;
    let roots = amplitude_roots(u, s.value, 1e-12);
    let r = *roots
        .get(branch)
        .ok_or_else(|| Error::InvalidInput(format!("no branch {branch} at ω = {omega}")))?;
    let profile = profile_sigma_hat(rho, omega, grid)?;
    build_wave(rho, u, r, phase, &profile, s.value, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Untested,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereProbe {
    pub radius: f64,
    pub plus_mass: f64,
    pub minus_mass: f64,
}

/// Outcome of the coupling/potential assumption checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// Growth condition on U (p ≥ 2, u_p > 0).
    pub potential: Verdict,
    /// Both branch projections of ρ̂ non-vanishing on every probed sphere.
    pub sphere_item: Verdict,
    pub sphere_probes: Vec<SphereProbe>,
    /// σ has at most one zero on [−m, m].
    pub sigma_item: Verdict,
    pub sigma_zeros: Vec<f64>,
    pub omega_sigma: Option<f64>,
}

/// Classifies sphere probes: untested when empty, pass when every mass is
/// positive relative to roundoff.
pub fn sphere_verdict(probes: &[SphereProbe]) -> Verdict {
    if probes.is_empty() {
        return Verdict::Untested;
    }
    let ok = probes.iter().all(|p| {
        let scale = (p.plus_mass + p.minus_mass).abs();
        p.plus_mass > 1e-12 * scale && p.minus_mass > 1e-12 * scale
    });
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// At most one zero of σ is allowed.
pub fn zero_verdict(zeros: &[f64]) -> Verdict {
    if zeros.len() <= 1 {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

pub fn check_assumptions<C: Coupling + ?Sized>(
    rho: &C,
    u: &PolynomialPotential,
    lambda_probes: &[f64],
    omega_grid: &[f64],
    tol: f64,
) -> Result<AssumptionReport> {
    let potential = if PolynomialPotential::new(u.coefficients().to_vec()).is_ok() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut probes = Vec::with_capacity(lambda_probes.len());
    for &l in lambda_probes {
        let (p, mi) = sphere_mass(rho, l)?;
        probes.push(SphereProbe { radius: l, plus_mass: p, minus_mass: mi });
    }
    let curve = sigma_curve(rho, omega_grid, tol)?;
    Ok(AssumptionReport {
        potential,
        sphere_item: sphere_verdict(&probes),
        sphere_probes: probes,
        sigma_item: zero_verdict(&curve.zeros),
        omega_sigma: curve.omega_sigma_zero,
        sigma_zeros: curve.zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CouplingProfile;

    fn quartic() -> PolynomialPotential {
        PolynomialPotential::new(vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn no_roots_for_zero_sigma() {
        assert!(amplitude_roots(&quartic(), 0.0, 1e-12).is_empty());
    }

    #[test]
    fn quartic_root_closed_form() {
        let s = -0.48427;
        let r = amplitude_roots(&quartic(), s, 1e-12);
        assert_eq!(r.len(), 1);
        let expect = -1.0 / (4.0 * s * s * s);
        assert!((r[0] - expect).abs() < 1e-12 * expect);
        assert!((expect - 2.2008).abs() < 1e-3);
        // wrong sign of σ: g ≥ 0 can never reach −1/σ < 0
        assert!(amplitude_roots(&quartic(), 0.3, 1e-12).is_empty());
    }

    #[test]
    fn linear_solve_case() {
        let u = PolynomialPotential::new(vec![2.0, 1.0]).unwrap();
        let r = amplitude_roots(&u, -0.1, 1e-12);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 150.0).abs() < 1e-9);
    }

    #[test]
    fn multiple_branches_from_sextic() {
        // g(s) = 2u₁ + 4u₂s + 6u₃s², σ = −1: need g(s) = 1 at s = r.
        // u = (1.5, −1, 1/6) gives 3 − 4s + s² = 1 → s² − 4s + 2 = 0.
        let u = PolynomialPotential::new(vec![1.5, -1.0, 1.0 / 6.0]).unwrap();
        let r = amplitude_roots(&u, -1.0, 1e-12);
        assert_eq!(r.len(), 2);
        assert!((r[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!((r[1] - (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn zero_potential_has_no_roots() {
        let u = PolynomialPotential::unchecked(vec![0.0, 0.0]);
        assert!(amplitude_roots(&u, -0.5, 1e-12).is_empty());
    }

    #[test]
    fn atlas_refuses_outside_gap() {
        let rho = CouplingProfile::normalized_gaussian(1.0).unwrap();
        let g = FourierGrid::new(8, 8.0).unwrap();
        for w in [1.0, -1.0, 1.5, -3.0] {
            assert!(matches!(
                build_atlas(&rho, &quartic(), &[w], g, AtlasOptions::default()),
                Err(Error::OmegaOutOfRange { .. })
            ));
        }
        let empty = build_atlas(&rho, &quartic(), &[], g, AtlasOptions::default()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.wave_count(), 0);
    }

    #[test]
    fn verdict_helpers() {
        assert_eq!(sphere_verdict(&[]), Verdict::Untested);
        let bad = SphereProbe { radius: 1.0, plus_mass: 1.0, minus_mass: 0.0 };
        assert_eq!(sphere_verdict(&[bad]), Verdict::Fail);
        assert_eq!(zero_verdict(&[-1.0]), Verdict::Pass);
        assert_eq!(zero_verdict(&[-0.3, 0.2]), Verdict::Fail);
    }
}
