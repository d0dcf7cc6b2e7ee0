//! Exact scalar reduction of the dynamics.
//!
//! Duhamel's formula projected on ρ gives a closed equation for y = ⟨ρ, ψ⟩:
//!
//! ```text
//! y(t) = Y₀(t) − i ∫₀ᵗ K(t − s) F(y(s)) ds,
//! Y₀(t) = ⟨ρ, e^{−i𝒟t}ψ₀⟩,   K(τ) = ⟨ρ, e^{−i𝒟τ}ρ⟩.
//! ```
//!
//! The kernel is computed in the continuum; Y₀ is projected from the grid
//! field. Both sums over the lattice are binned by shell |n|², on which
//! cos(λt) and sin(λt)/λ are constant.

use crate::dirac::{apply_symbol, dot};
use crate::grid::{Space, SpinorField};
use crate::model::{momentum_integral, rho_hat_field, Coupling, PolynomialPotential};
use crate::quadrature::QuadOptions;
use crate::{Complex64, Error, Result, Spinor};

/// Hard cap on the number of Volterra steps (the history sum is quadratic).
pub const MAX_VOLTERRA_STEPS: usize = 20_000;

/// K(τ) sampled at τ = j·dt, j = 0..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel {
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// Largest quadrature error estimate over the samples.
    pub max_err: f64,
}

impl MemoryKernel {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }
}

/// K(τ) = (2π)⁻³ ∫ [cos(λτ)|ρ̂|² − i·sin(λτ)/λ·ρ̂†𝒟ρ̂] d³ξ.
pub fn kernel_at<C: Coupling + ?Sized>(rho: &C, tau: f64, tol: f64) -> Result<crate::quadrature::Estimate> {
    let m = rho.mass();
    // one piece per half oscillation across the cutoff keeps bisection shallow
    let pieces = ((rho.radial_cutoff() * tau.abs() / std::f64::consts::PI).ceil() as usize).max(8);
    let opts = QuadOptions { tol, initial_pieces: pieces, max_intervals: 4 * pieces + 4000 };
    momentum_integral(
        rho,
        |xi, r| {
            let lam = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + m * m).sqrt();
            let (s, c) = (lam * tau).sin_cos();
            let free = dot(r, r) * c;
            let odd = dot(r, &apply_symbol(xi, m, r)) * (s / lam);
            free - Complex64::i() * odd
        },
        &opts,
    )
    .map_err(|e| match e {
        Error::QuadratureNotConverged { err, .. } => Error::KernelNotConverged { tau, err },
        other => other,
    })
}

/// K on [0, horizon] with step `dt`.
pub fn kernel<C: Coupling + ?Sized>(rho: &C, dt: f64, horizon: f64, tol: f64) -> Result<MemoryKernel> {
    use rayon::prelude::*;
    let n = step_count(dt, horizon)?;
    let samples: Vec<Result<crate::quadrature::Estimate>> =
        (0..=n).into_par_iter().map(|j| kernel_at(rho, j as f64 * dt, tol)).collect();
    let mut values = Vec::with_capacity(n + 1);
    let mut max_err: f64 = 0.0;
    for s in samples {
        let s = s?;
        values.push(s.value);
        max_err = max_err.max(s.err);
    }
    Ok(MemoryKernel { dt, values, max_err })
}

fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0 && horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidInput(format!("need dt > 0 and horizon ≥ 0, got {dt}, {horizon}")));
    }
    let n = (horizon / dt).round() as usize;
    if (n as f64 * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::TimeOffGrid(horizon));
    }
    if n > MAX_VOLTERRA_STEPS {
        return Err(Error::InvalidInput(format!(
            "{n} steps exceed the Volterra horizon cap of {MAX_VOLTERRA_STEPS}"
        )));
    }
    Ok(n)
}

/// Shell-binned lattice data: every mode with |n|² = s shares λₛ.
struct Shells {
    lambda: Vec<f64>,
    index: Vec<usize>,
}

impl Shells {
    fn new(field: &SpinorField, m: f64) -> Self {
        let grid = field.grid;
        let mut index = vec![usize::MAX; grid.shell_count()];
        let mut lambda = Vec::new();
        for i in 0..grid.len() {
            let s = grid.shell(i);
            if index[s] == usize::MAX {
                index[s] = lambda.len();
                lambda.push((s as f64 * grid.dk().powi(2) + m * m).sqrt());
            }
        }
        Shells { lambda, index }
    }

    /// Sums f(mode) into the bin of each mode's shell.
    fn bin<F: Fn(usize) -> (Complex64, Complex64)>(&self, field: &SpinorField, f: F) -> Vec<(Complex64, Complex64)> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![(zero, zero); self.lambda.len()];
        for i in 0..field.grid.len() {
            let b = &mut out[self.index[field.grid.shell(i)]];
            let (p, q) = f(i);
            b.0 += p;
            b.1 += q;
        }
        out
    }
}

fn expect_momentum(field: &SpinorField) -> Result<()> {
    if field.space != Space::Momentum {
        return Err(Error::InvalidInput("expected a momentum-space field".into()));
    }
    Ok(())
}

/// Y₀(tⱼ) = ⟨ρ, e^{−i𝒟tⱼ}ψ₀⟩ on the grid.
pub fn free_projection<C: Coupling + ?Sized>(rho: &C, psi0: &SpinorField, times: &[f64]) -> Result<Vec<Complex64>> {
    expect_momentum(psi0)?;
    let grid = psi0.grid;
    let m = rho.mass();
    let rho_hat = rho_hat_field(rho, grid);
    let shells = Shells::new(psi0, m);
    let bins = shells.bin(psi0, |i| {
        let r = &rho_hat.data[i];
        let p = &psi0.data[i];
        (dot(r, p), dot(r, &apply_symbol(grid.momentum(i), m, p)))
    });
    let w = grid.momentum_weight();
    Ok(times
        .iter()
        .map(|&t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&lam, &(a, b)) in shells.lambda.iter().zip(&bins) {
                let (s, c) = (lam * t).sin_cos();
                acc += a * c - Complex64::i() * b * (s / lam);
            }
            acc * w
        })
        .collect())
}

/// Solution of the Volterra equation on tⱼ = j·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub dt: f64,
    pub y: Vec<Complex64>,
    /// Steps that needed the Newton fallback.
    pub newton_steps: usize,
}

const FIXED_POINT_TOL: f64 = 1e-12;

/// Product-trapezoid discretisation
///
/// ```text
/// yₙ = Y₀ₙ − i·dt·[½K₀F(yₙ) + Σ_{j=1}^{n−1} K_{n−j}F(yⱼ) + ½KₙF(y₀)],
/// ```
///
/// solved for yₙ by damped fixed-point iteration with a Newton fallback.
pub fn solve_volterra(kernel: &MemoryKernel, y0: &[Complex64], u: &PolynomialPotential) -> Result<VolterraSolution> {
    let n = y0.len();
    if n == 0 {
        return Ok(VolterraSolution { dt: kernel.dt, y: Vec::new(), newton_steps: 0 });
    }
    if kernel.values.len() < n {
        return Err(Error::InvalidInput(format!(
            "kernel has {} samples, free projection {n}",
            kernel.values.len()
        )));
    }
    if n - 1 > MAX_VOLTERRA_STEPS {
        return Err(Error::InvalidInput(format!("{} steps exceed the Volterra cap", n - 1)));
    }
    let dt = kernel.dt;
    let k = &kernel.values;
    let mi = Complex64::new(0.0, -1.0);
    let mut y = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    y.push(y0[0]);
    f.push(u.force(y0[0]));
    let c = mi * dt * 0.5 * k[0];
    let mut newton_steps = 0;
    for step in 1..n {
        let mut hist = 0.5 * k[step] * f[0];
        for j in 1..step {
            hist += k[step - j] * f[j];
        }
        let b = y0[step] + mi * dt * hist;
        let guess = y[step - 1];
        let (z, used_newton) = solve_implicit(b, c, u, guess).ok_or(Error::VolterraNotConverged { step })?;
        newton_steps += used_newton as usize;
        y.push(z);
        f.push(u.force(z));
    }
    Ok(VolterraSolution { dt, y, newton_steps })
}

/// Solves z = b + c·F(z).
fn solve_implicit(b: Complex64, c: Complex64, u: &PolynomialPotential, guess: Complex64) -> Option<(Complex64, bool)> {
    let scale = b.norm().max(1e-300);
    let mut z = guess;
    for _ in 0..200 {
        let next = b + c * u.force(z);
        let delta = (next - z).norm();
        z = next;
        if delta <= FIXED_POINT_TOL * scale.max(z.norm()) {
            return Some((z, false));
        }
        if !delta.is_finite() {
            break;
        }
    }
    // Newton on Φ(z) = z − b − c·F(z) as a map of ℝ²
    let mut z = guess;
    for _ in 0..100 {
        let s = z.norm_sqr();
        let g = u.g(s);
        let gp = u.g_prime(s);
        let phi = z - b + c * z * g;
        // ∂F/∂x and ∂F/∂y of F = −g(s)z
        let dfx = -(z * (2.0 * z.re * gp) + g);
        let dfy = -(z * (2.0 * z.im * gp) + Complex64::i() * g);
        let jx = 1.0 - c * dfx;
        let jy = Complex64::i() - c * dfy;
        let det = jx.re * jy.im - jy.re * jx.im;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (phi.re * jy.im - jy.re * phi.im) / det;
        let dy = (jx.re * phi.im - phi.re * jx.im) / det;
        z -= Complex64::new(dx, dy);
        if dx.hypot(dy) <= FIXED_POINT_TOL * scale.max(z.norm()) {
            return Some((z, true));
        }
    }
    None
}

/// ψ̂(t) = e^{−i𝒟t}ψ̂₀ − i∫₀ᵗ e^{−i𝒟(t−s)}ρ̂F(y(s)) ds with the trapezoid rule
/// on the y samples; `t` must lie on the dt grid.
pub fn reconstruct_field<C: Coupling + ?Sized>(
    y: &[Complex64],
    dt: f64,
    psi0: &SpinorField,
    t: f64,
    rho: &C,
    u: &PolynomialPotential,
) -> Result<SpinorField> {
    expect_momentum(psi0)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step {dt} must be positive")));
    }
    let n = (t / dt).round();
    if !(t >= 0.0) || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::TimeOffGrid(t));
    }
    let n = n as usize;
    if n >= y.len() {
        return Err(Error::InvalidInput(format!("time {t} lies beyond the {} y samples", y.len())));
    }
    let grid = psi0.grid;
    let m = rho.mass();
    let shells = Shells::new(psi0, m);
    let force: Vec<Complex64> = y[..=n].iter().map(|&z| u.force(z)).collect();
    // per shell: P = Σ wⱼ cos(λ(t−tⱼ))Fⱼ, Q = Σ wⱼ sin(λ(t−tⱼ))/λ·Fⱼ
    let kernels: Vec<(Complex64, Complex64, f64, f64)> = shells
        .lambda
        .iter()
        .map(|&lam| {
            let mut p = Complex64::new(0.0, 0.0);
            let mut q = Complex64::new(0.0, 0.0);
            for (j, &fj) in force.iter().enumerate() {
                let w = if n > 0 && (j == 0 || j == n) { 0.5 * dt } else { dt };
                let w = if n == 0 { 0.0 } else { w };
                let (s, c) = (lam * (n - j) as f64 * dt).sin_cos();
                p += fj * (w * c);
                q += fj * (w * s / lam);
            }
            let (s, c) = (lam * t).sin_cos();
            (p, q, c, s / lam)
        })
        .collect();
    let mi = Complex64::new(0.0, -1.0);
    let data: Vec<Spinor> = (0..grid.len())
        .map(|i| {
            let xi = grid.momentum(i);
            let (p, q, c, s) = kernels[shells.index[grid.shell(i)]];
            let r = rho.rho_hat(xi);
            let v = &psi0.data[i];
            let free = v * Complex64::from(c) + apply_symbol(xi, m, v) * (mi * s);
            // −i·(P·ρ̂ − i·Q·𝒟ρ̂)
            free + (r * p + apply_symbol(xi, m, &r) * (mi * q)) * mi
        })
        .collect();
    Ok(SpinorField { grid, data, space: Space::Momentum })
}
