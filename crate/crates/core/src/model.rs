//! Static model data: the polynomial potential and its nonlinearity, the
//! spinor coupling ρ with its Fourier transform, the spectral function σ(ω)
//! and the solitary profiles Σ̂(ξ, ω).

use std::f64::consts::PI;

use serde::Serialize;

use crate::dirac::{apply_symbol, dot, DiracAlgebra, Momentum};
use crate::grid::{FourierGrid, Space, SpinorField};
use crate::quadrature::{integrate, AngularRule, QuadOptions};
use crate::{Complex64, Error, Result, Spinor};

/// U(z) = Σₖ uₖ|z|^{2k}, k = 1..p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialPotential {
    u: Vec<f64>,
}

impl PolynomialPotential {
    /// Requires p ≥ 2 and uₚ > 0.
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::InvalidPotential(format!(
                "degree parameter p = {} must be at least 2",
                u.len()
            )));
        }
        if u.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        let up = *u.last().unwrap();
        if up <= 0.0 {
            return Err(Error::InvalidPotential(format!("leading coefficient u_p = {up} must be positive")));
        }
        Ok(PolynomialPotential { u })
    }

    /// Skips the growth condition. Used for the linear validation mode
    /// (all coefficients zero, F ≡ 0).
    pub fn unchecked(u: Vec<f64>) -> Self {
        PolynomialPotential { u }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.u
    }

    pub fn degree(&self) -> usize {
        self.u.len()
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().all(|&c| c == 0.0)
    }

    /// U as a function of s = |z|².
    pub fn value_at(&self, s: f64) -> f64 {
        self.u.iter().rev().fold(0.0, |acc, &c| acc * s + c) * s
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.value_at(z.norm_sqr())
    }

    /// g(s) = Σₖ 2k·uₖ·s^{k−1}, so that F(z) = −g(|z|²)·z.
    pub fn g(&self, s: f64) -> f64 {
        self.u
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * s + 2.0 * (k + 1) as f64 * c)
    }

    /// g′(s).
    pub fn g_prime(&self, s: f64) -> f64 {
        self.u
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * s + 2.0 * ((k + 1) * k) as f64 * c)
    }

    /// F(z) = −∇U = −g(|z|²)·z.
    pub fn force(&self, z: Complex64) -> Complex64 {
        -z * self.g(z.norm_sqr())
    }
}

/// A spinor coupling function, described by its Fourier transform.
pub trait Coupling: Sync {
    fn mass(&self) -> f64;

    /// ρ̂(ξ) = ∫ρ(x) e^{−iξ·x} d³x.
    fn rho_hat(&self, xi: [f64; 3]) -> Spinor;

    /// Momentum radius beyond which ρ̂ is negligible in every integral.
    fn radial_cutoff(&self) -> f64;

    /// True when ρ̂(ξ) = Σ fᵢ(|ξ|)·dᵢ with constant spinors dᵢ. Sphere
    /// averages then reduce exactly to the antipodal rule.
    fn is_radial(&self) -> bool;

    fn angular_rule(&self) -> AngularRule {
        if self.is_radial() {
            AngularRule::antipodal()
        } else {
            AngularRule::product(16, 32)
        }
    }

    fn describe(&self) -> serde_json::Value;
}

/// One Gaussian-radial, constant-spinor term a·e^{−|x|²/(2w²)}·d.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: Complex64,
    pub width: f64,
    pub direction: Spinor,
}

/// Finite sum of [`GaussianTerm`]s sharing the mass m.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    terms: Vec<GaussianTerm>,
    m: f64,
}

impl CouplingProfile {
    /// Directions are normalised; zero directions, non-positive widths and
    /// combinations that cancel to ρ ≡ 0 are rejected.
    pub fn new(terms: Vec<GaussianTerm>, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidMass(m));
        }
        if terms.is_empty() {
            return Err(Error::InvalidCoupling("no terms".into()));
        }
        let mut normed = Vec::with_capacity(terms.len());
        for t in terms {
            if !(t.width.is_finite() && t.width > 0.0) {
                return Err(Error::InvalidCoupling(format!("width {} must be positive", t.width)));
            }
            let n = t.direction.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidCoupling("zero spinor direction".into()));
            }
            if !(t.amplitude.re.is_finite() && t.amplitude.im.is_finite()) {
                return Err(Error::InvalidCoupling("non-finite amplitude".into()));
            }
            normed.push(GaussianTerm { direction: t.direction / Complex64::from(n), ..t });
        }
        // Gaussians of distinct widths are linearly independent, so ρ ≡ 0
        // iff the amplitude-weighted directions cancel within each width.
        let mut by_width: Vec<(f64, Spinor, f64)> = Vec::new();
        for t in &normed {
            let v = t.direction * t.amplitude;
            match by_width.iter_mut().find(|(w, _, _)| (*w - t.width).abs() <= 1e-14 * t.width) {
                Some(entry) => {
                    entry.1 += v;
                    entry.2 += t.amplitude.norm();
                }
                None => by_width.push((t.width, v, t.amplitude.norm())),
            }
        }
        if by_width.iter().all(|(_, v, scale)| v.norm() <= 1e-13 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::InvalidCoupling("coupling vanishes identically".into()));
        }
        Ok(CouplingProfile { terms: normed, m })
    }

    /// π^{−3/4} e^{−|x|²/2} e₁: unit L² norm, β-eigenvector with eigenvalue +1.
    pub fn normalized_gaussian(m: f64) -> Result<Self> {
        Self::new(
            vec![GaussianTerm {
                amplitude: Complex64::new(PI.powf(-0.75), 0.0),
                width: 1.0,
                direction: Spinor::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ),
            }],
            m,
        )
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    /// ρ(x) in position space.
    pub fn rho(&self, x: [f64; 3]) -> Spinor {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        self.terms.iter().fold(Spinor::zeros(), |acc, t| {
            acc + t.direction * (t.amplitude * (-r2 / (2.0 * t.width * t.width)).exp())
        })
    }
}

impl Coupling for CouplingProfile {
    fn mass(&self) -> f64 {
        self.m
    }

    fn rho_hat(&self, xi: [f64; 3]) -> Spinor {
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let c = (2.0 * PI).powf(1.5);
        self.terms.iter().fold(Spinor::zeros(), |acc, t| {
            let w = t.width;
            acc + t.direction * (t.amplitude * (c * w * w * w * (-w * w * k2 / 2.0).exp()))
        })
    }

    fn radial_cutoff(&self) -> f64 {
        let wmin = self.terms.iter().map(|t| t.width).fold(f64::INFINITY, f64::min);
        12.0 / wmin
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": "gaussian",
            "m": self.m,
            "terms": self.terms.iter().map(|t| serde_json::json!({
                "amplitude": [t.amplitude.re, t.amplitude.im],
                "width": t.width,
                "direction": t.direction.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Π±(ξ)ρ̂(ξ) for a base Gaussian coupling: a Schwartz coupling living on a
/// single branch of the free dispersion relation.
#[derive(Debug, Clone)]
pub struct ProjectedCoupling {
    pub base: CouplingProfile,
    pub positive: bool,
}

impl Coupling for ProjectedCoupling {
    fn mass(&self) -> f64 {
        self.base.m
    }

    fn rho_hat(&self, xi: [f64; 3]) -> Spinor {
        let r = self.base.rho_hat(xi);
        let m = self.base.m;
        let lambda = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + m * m).sqrt();
        let d = apply_symbol(xi, m, &r) / Complex64::from(lambda);
        let s = if self.positive { 1.0 } else { -1.0 };
        (r + d * Complex64::from(s)) * Complex64::from(0.5)
    }

    fn radial_cutoff(&self) -> f64 {
        self.base.radial_cutoff()
    }

    fn is_radial(&self) -> bool {
        false
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": if self.positive { "projected+" } else { "projected-" },
            "base": self.base.describe(),
        })
    }
}

/// Sphere integral ∫_{|ξ|=r} h(ξ, ρ̂(ξ)) dΩ with the coupling's angular rule.
pub fn shell_integral<C, H>(c: &C, rule: &AngularRule, r: f64, h: H) -> Complex64
where
    C: Coupling + ?Sized,
    H: Fn([f64; 3], &Spinor) -> Complex64,
{
    rule.integrate(|n| {
        let xi = [r * n[0], r * n[1], r * n[2]];
        h(xi, &c.rho_hat(xi))
    })
}

/// (2π)⁻³ ∫ h(ξ, ρ̂(ξ)) d³ξ by sphere rule × adaptive radial quadrature.
pub fn momentum_integral<C, H>(c: &C, h: H, opts: &QuadOptions) -> Result<crate::quadrature::Estimate>
where
    C: Coupling + ?Sized,
    H: Fn([f64; 3], &Spinor) -> Complex64,
{
    let rule = c.angular_rule();
    let norm = (2.0 * PI).powi(-3);
    let scaled = QuadOptions { tol: opts.tol / norm, ..*opts };
    let est = integrate(
        |r| shell_integral(c, &rule, r, &h) * (r * r),
        0.0,
        c.radial_cutoff(),
        &scaled,
    )
    .map_err(|e| match e {
        Error::QuadratureNotConverged { best, err } => Error::QuadratureNotConverged {
            best: best * norm,
            err: err * norm,
        },
        other => other,
    })?;
    Ok(crate::quadrature::Estimate { value: est.value * norm, err: est.err * norm })
}

/// σ(ω) with its quadrature error and the imaginary residue of the
/// (Hermitian, hence real) integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaValue {
    pub value: f64,
    pub err: f64,
    pub imag: f64,
}

/// σ(ω) = (2π)⁻³ ∫ ρ̂†(ω + 𝒟(ξ))ρ̂ / (ω² − |ξ|² − m²) d³ξ for ω ∈ [−m, m].
pub fn sigma<C: Coupling + ?Sized>(c: &C, omega: f64, tol: f64) -> Result<SigmaValue> {
    let m = c.mass();
    if !(omega.abs() <= m) {
        return Err(Error::OmegaOutOfRange { omega, m });
    }
    let opts = QuadOptions { tol, initial_pieces: 8, ..Default::default() };
    let est = momentum_integral(
        c,
        |xi, r| {
            let lam2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + m * m;
            let num = dot(r, &(r * Complex64::from(omega) + apply_symbol(xi, m, r)));
            num / (omega * omega - lam2)
        },
        &opts,
    )?;
    Ok(SigmaValue { value: est.value.re, err: est.err, imag: est.value.im })
}

/// Sampled σ curve with detected zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaCurve {
    pub omega: Vec<f64>,
    pub sigma: Vec<f64>,
    pub quad_error: Vec<f64>,
    /// Every detected zero of σ on [−m, m], ascending.
    pub zeros: Vec<f64>,
    /// The exceptional point ω_σ when σ has exactly one zero.
    pub omega_sigma_zero: Option<f64>,
}

/// Samples σ on a sorted grid in [−m, m] and locates its zeros by
/// sign-change bisection plus endpoint checks.
pub fn sigma_curve<C: Coupling + ?Sized>(c: &C, omega: &[f64], tol: f64) -> Result<SigmaCurve> {
    if omega.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("ω grid must be strictly increasing".into()));
    }
    let mut vals = Vec::with_capacity(omega.len());
    let mut errs = Vec::with_capacity(omega.len());
    for &w in omega {
        let s = sigma(c, w, tol)?;
        vals.push(s.value);
        errs.push(s.err);
    }
    let zeros = find_zeros(c, omega, &vals, tol)?;
    let omega_sigma_zero = if zeros.len() == 1 { Some(zeros[0]) } else { None };
    Ok(SigmaCurve { omega: omega.to_vec(), sigma: vals, quad_error: errs, zeros, omega_sigma_zero })
}

fn find_zeros<C: Coupling + ?Sized>(c: &C, omega: &[f64], vals: &[f64], tol: f64) -> Result<Vec<f64>> {
    let m = c.mass();
    let zero_tol = 10.0 * tol;
    let mut zeros = Vec::new();
    // endpoints, whether or not they are grid points
    let lo = sigma(c, -m, tol)?.value;
    let hi = sigma(c, m, tol)?.value;
    let mut pts: Vec<(f64, f64)> = vec![(-m, lo)];
    pts.extend(omega.iter().copied().zip(vals.iter().copied()).filter(|(w, _)| w.abs() < m));
    pts.push((m, hi));
    for &(w, s) in &pts {
        if s.abs() <= zero_tol {
            zeros.push(w);
        }
    }
    for pair in pts.windows(2) {
        let ((mut a, mut fa), (mut b, fb)) = (pair[0], pair[1]);
        if fa.abs() <= zero_tol || fb.abs() <= zero_tol || fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            let fm = sigma(c, mid, tol)?.value;
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            if b - a < 1e-13 * m {
                break;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    zeros.sort_by(f64::total_cmp);
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * m);
    Ok(zeros)
}

/// ∫_{|ξ|=λ} |Π±(ξ)ρ̂(ξ)|² dΩ as (plus, minus).
pub fn sphere_mass<C: Coupling + ?Sized>(c: &C, radius: f64) -> Result<(f64, f64)> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput(format!("sphere radius {radius} must be positive")));
    }
    let m = c.mass();
    let lam = (radius * radius + m * m).sqrt();
    let rule = c.angular_rule();
    let total = shell_integral(c, &rule, radius, |_, r| Complex64::from(r.norm_squared())).re;
    let signed = shell_integral(c, &rule, radius, |xi, r| dot(r, &apply_symbol(xi, m, r)) / lam).re;
    Ok((0.5 * (total + signed), 0.5 * (total - signed)))
}

/// Samples of Σ̂(ξ, ω) on a grid's dual lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitaryProfile {
    pub omega: f64,
    pub grid: FourierGrid,
    pub sigma_hat: Vec<Spinor>,
}

impl SolitaryProfile {
    pub fn field(&self) -> SpinorField {
        SpinorField { grid: self.grid, data: self.sigma_hat.clone(), space: Space::Momentum }
    }
}

/// ρ̂ sampled on the dual lattice.
pub fn rho_hat_field<C: Coupling + ?Sized>(c: &C, grid: FourierGrid) -> SpinorField {
    SpinorField::from_fn(grid, Space::Momentum, |xi| c.rho_hat(xi))
}

/// Σ̂(ξ, ω) = (ω + 𝒟(ξ))ρ̂(ξ) / (ω² − |ξ|² − m²) on the grid.
///
/// Interior frequencies only, except ω = ±m when Π±(0)ρ̂(0) = 0; there the
/// ξ = 0 sample is set to zero (the leading term is odd in ξ).
pub fn profile_sigma_hat<C: Coupling + ?Sized>(c: &C, omega: f64, grid: FourierGrid) -> Result<SolitaryProfile> {
    let m = c.mass();
    if !omega.is_finite() || omega.abs() > m {
        return Err(Error::OmegaOutOfRange { omega, m });
    }
    let endpoint = omega.abs() >= m;
    if endpoint {
        let alg = DiracAlgebra::new(m)?;
        let (pp, pm) = alg.symbol(Momentum::zero()).projectors();
        let r0 = c.rho_hat([0.0; 3]);
        let branch = if omega > 0.0 { pp * r0 } else { pm * r0 };
        if branch.norm() > 1e-12 * r0.norm().max(1.0) {
            return Err(Error::OmegaOutOfRange { omega, m });
        }
    }
    let w = Complex64::from(omega);
    let sigma_hat = (0..grid.len())
        .map(|i| {
            let xi = grid.momentum(i);
            let r = c.rho_hat(xi);
            let den = omega * omega - (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + m * m);
            if endpoint && den == 0.0 {
                return Spinor::zeros();
            }
            (r * w + apply_symbol(xi, m, &r)) / Complex64::from(den)
        })
        .collect();
    Ok(SolitaryProfile { omega, grid, sigma_hat })
}
