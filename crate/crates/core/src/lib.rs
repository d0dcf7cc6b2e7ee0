//! Numerical laboratory for the nonlinear Dirac equation with a rank-one
//! (mean-field) self-interaction
//!
//! ```text
//! i ∂ₜψ = (−i αⱼ∂ⱼ + β m) ψ + ρ(x) F(⟨ρ, ψ⟩),    ψ(x, t) ∈ ℂ⁴, x ∈ ℝ³.
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`dirac`]: the 4×4 Dirac algebra, the momentum-space symbol, spectral
//!   projectors and the closed-form free propagator.
//! * [`model`]: polynomial potential and nonlinearity, Gaussian spinor
//!   couplings, the spectral function σ(ω) and solitary profiles Σ̂(ξ, ω).
//! * [`solitary`]: amplitude roots, solitary waves, residual certification,
//!   the manifold atlas and the coupling assumption checker.
//! * [`grid`]: periodic Fourier grid, spinor fields and 3D FFTs.
//! * [`dynamics`]: split-step spectral engine and the exact scalar Volterra
//!   reduction, with field reconstruction and snapshot I/O.
//! * [`diagnostics`]: charge, energy, the local H^{−ε} metric, distance to
//!   the solitary manifold and windowed time spectra.
//! * [`config`] and [`runner`]: JSON run configuration and the experiments
//!   behind the `mfdirac` command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod dirac;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod model;
pub mod quadrature;
pub mod runner;
pub mod solitary;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// A 4-component Dirac spinor.
pub type Spinor = nalgebra::Vector4<Complex64>;
/// Dense complex 4×4 matrix.
pub type Mat4 = nalgebra::Matrix4<Complex64>;
