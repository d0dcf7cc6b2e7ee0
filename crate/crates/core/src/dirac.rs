//! Dirac algebra in the standard representation.
//!
//! β = diag(1, 1, −1, −1) and αⱼ carries the Pauli matrix σⱼ in both
//! off-diagonal 2×2 blocks. The symbol 𝒟(ξ) = α·ξ + βm squares to λ²·I with
//! λ = √(|ξ|² + m²), which gives the projectors and the free propagator in
//! closed form.

use crate::{Complex64, Error, Mat4, Result, Spinor};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Momentum vector ξ ∈ ℝ³ in units of m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum(pub [f64; 3]);

impl Momentum {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite momentum ({x}, {y}, {z})"
            )));
        }
        Ok(Momentum([x, y, z]))
    }

    pub fn zero() -> Self {
        Momentum([0.0; 3])
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// The three α matrices, β, and the mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracAlgebra {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
    pub m: f64,
}

fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

impl DiracAlgebra {
    /// Standard Dirac representation with mass `m`.
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidMass(m));
        }
        let sigma = pauli();
        let alpha = std::array::from_fn(|j| {
            let mut a = Mat4::zeros();
            for r in 0..2 {
                for c in 0..2 {
                    a[(r, c + 2)] = sigma[j][r][c];
                    a[(r + 2, c)] = sigma[j][r][c];
                }
            }
            a
        });
        let beta = Mat4::from_diagonal(&Spinor::new(ONE, ONE, -ONE, -ONE));
        Ok(DiracAlgebra { alpha, beta, m })
    }

    /// 𝒟(ξ) = Σⱼ αⱼξⱼ + βm together with λ = √(|ξ|² + m²).
    pub fn symbol(&self, xi: Momentum) -> SymbolMatrix {
        let mut d = self.beta * Complex64::from(self.m);
        for (a, &x) in self.alpha.iter().zip(xi.0.iter()) {
            d += a * Complex64::from(x);
        }
        SymbolMatrix {
            d,
            lambda: (xi.norm_sqr() + self.m * self.m).sqrt(),
        }
    }

    /// Largest entrywise violation of the defining relations
    /// {αⱼ, αₖ} = 2δⱼₖ, {αⱼ, β} = 0, β² = I and Hermiticity.
    pub fn identity_defect(&self) -> f64 {
        let id = Mat4::identity();
        let mut worst: f64 = 0.0;
        let mut track = |m: Mat4| worst = worst.max(max_abs(&m));
        for j in 0..3 {
            for k in 0..3 {
                let anti = self.alpha[j] * self.alpha[k] + self.alpha[k] * self.alpha[j];
                let target = if j == k { id * Complex64::from(2.0) } else { Mat4::zeros() };
                track(anti - target);
            }
            track(self.alpha[j] * self.beta + self.beta * self.alpha[j]);
            track(self.alpha[j] - self.alpha[j].adjoint());
        }
        track(self.beta * self.beta - id);
        track(self.beta - self.beta.adjoint());
        worst
    }
}

/// Momentum-space symbol 𝒟(ξ) with its eigenvalue magnitude λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix {
    pub d: Mat4,
    pub lambda: f64,
}

impl SymbolMatrix {
    /// Spectral projectors Π± = ½(I ± 𝒟/λ).
    pub fn projectors(&self) -> (Mat4, Mat4) {
        let id = Mat4::identity();
        let scaled = self.d / Complex64::from(self.lambda);
        let half = Complex64::from(0.5);
        ((id + scaled) * half, (id - scaled) * half)
    }

    /// e^{−i𝒟t} = cos(λt)·I − i·(sin(λt)/λ)·𝒟.
    pub fn propagator(&self, t: f64) -> Mat4 {
        let (s, c) = (self.lambda * t).sin_cos();
        Mat4::identity() * Complex64::from(c) - self.d * Complex64::new(0.0, s / self.lambda)
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// 𝒟(ξ)ψ in the standard representation without forming the matrix.
#[inline(always)]
pub fn apply_symbol(xi: [f64; 3], m: f64, psi: &Spinor) -> Spinor {
    // σ·ξ = [[ξ₃, ξ₁ − iξ₂], [ξ₁ + iξ₂, −ξ₃]]
    let p = Complex64::new(xi[0], xi[1]);
    let q = Complex64::new(xi[0], -xi[1]);
    let z = xi[2];
    let (u0, u1, l0, l1) = (psi[0], psi[1], psi[2], psi[3]);
    Spinor::new(
        u0 * m + l0 * z + l1 * q,
        u1 * m + l0 * p - l1 * z,
        u0 * z + u1 * q - l0 * m,
        u0 * p - u1 * z - l1 * m,
    )
}

/// ψ ↦ cos·ψ − i·s·𝒟(ξ)ψ, i.e. the free propagator with precomputed
/// `cos = cos(λt)` and `s = sin(λt)/λ`.
#[inline(always)]
pub fn apply_propagator(xi: [f64; 3], m: f64, cos: f64, s: f64, psi: &Spinor) -> Spinor {
    let d = apply_symbol(xi, m, psi);
    let mis = Complex64::new(0.0, -s);
    Spinor::new(
        psi[0] * cos + d[0] * mis,
        psi[1] * cos + d[1] * mis,
        psi[2] * cos + d[2] * mis,
        psi[3] * cos + d[3] * mis,
    )
}

/// Hermitian inner product a†b.
#[inline(always)]
pub fn dot(a: &Spinor, b: &Spinor) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2] + a[3].conj() * b[3]
}
