//! Periodic position/momentum grid and 4-component spinor fields.
//!
//! Position samples sit at x = j·h (h = L/N) with indices above N/2 wrapped
//! to negative coordinates, so centred profiles need no shift. With this
//! layout the continuum transform pair ψ̂(ξ) = ∫ψ e^{−iξ·x} d³x and
//! ψ(x) = (2π)⁻³∫ψ̂ e^{iξ·x} d³ξ becomes
//!
//! ```text
//! ψ̂ₖ = h³ · DFT(ψ)ₖ,        ψⱼ = L⁻³ · IDFT(ψ̂)ⱼ,
//! ```
//!
//! and ⟨φ, ψ⟩ = h³ Σ φ†ψ = L⁻³ Σ φ̂†ψ̂.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dirac::dot;
use crate::{Complex64, Error, Result, Spinor};

/// Minimum Nyquist momentum πN/L in units of the mass.
pub const NYQUIST_FACTOR: f64 = 6.0;

/// Even with no prime factors beyond 2 and 3.
fn is_smooth(mut n: usize) -> bool {
    if !n.is_multiple_of(2) {
        return false;
    }
    for p in [2, 3] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    pub n: usize,
    pub l: f64,
}

impl FourierGrid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !is_smooth(n) {
            return Err(Error::InvalidGrid(format!(
                "N = {n} must be even, at least 8 and of the form 2^a·3^b"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {l} must be positive")));
        }
        Ok(FourierGrid { n, l })
    }

    /// Enforces πN/L ≥ NYQUIST_FACTOR·m.
    pub fn check_nyquist(&self, m: f64) -> Result<()> {
        let nyq = self.nyquist();
        if nyq < NYQUIST_FACTOR * m {
            return Err(Error::InvalidGrid(format!(
                "Nyquist momentum {nyq:.4} below {NYQUIST_FACTOR}·m = {:.4}",
                NYQUIST_FACTOR * m
            )));
        }
        Ok(())
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.l
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }

    pub fn dual_cell_volume(&self) -> f64 {
        self.dk().powi(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    /// L⁻³, the weight of a momentum-space sum: (2π)⁻³·dual cell volume.
    pub fn momentum_weight(&self) -> f64 {
        self.l.powi(-3)
    }

    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Integer lattice vector of a flat index.
    #[inline]
    pub fn wave_numbers(&self, idx: usize) -> [i64; 3] {
        let [i, j, k] = self.split(idx);
        [self.signed(i), self.signed(j), self.signed(k)]
    }

    #[inline]
    pub fn momentum(&self, idx: usize) -> [f64; 3] {
        let dk = self.dk();
        let w = self.wave_numbers(idx);
        [w[0] as f64 * dk, w[1] as f64 * dk, w[2] as f64 * dk]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.dx();
        let w = self.wave_numbers(idx);
        [w[0] as f64 * h, w[1] as f64 * h, w[2] as f64 * h]
    }

    /// |n|² of the integer lattice vector; |ξ|² = dk²·|n|².
    #[inline]
    pub fn shell(&self, idx: usize) -> usize {
        let w = self.wave_numbers(idx);
        (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as usize
    }

    /// Number of distinct shells |n|² on this lattice.
    pub fn shell_count(&self) -> usize {
        let h = self.n / 2;
        3 * h * h + 1
    }

    pub fn momenta(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.momentum(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Position,
    Momentum,
}

/// Spinor samples on a [`FourierGrid`], tagged with their representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: FourierGrid,
    pub data: Vec<Spinor>,
    pub space: Space,
}

impl SpinorField {
    pub fn zeros(grid: FourierGrid, space: Space) -> Self {
        SpinorField { grid, data: vec![Spinor::zeros(); grid.len()], space }
    }

    pub fn from_fn<F>(grid: FourierGrid, space: Space, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Spinor,
    {
        let data = (0..grid.len())
            .map(|i| match space {
                Space::Position => f(grid.position(i)),
                Space::Momentum => f(grid.momentum(i)),
            })
            .collect();
        SpinorField { grid, data, space }
    }

    fn weight(&self) -> f64 {
        match self.space {
            Space::Position => self.grid.cell_volume(),
            Space::Momentum => self.grid.momentum_weight(),
        }
    }

    /// ∫|ψ|² in whichever representation the field is held.
    pub fn norm_sqr(&self) -> f64 {
        self.weight() * pairwise_sum(&self.data, |s| s.norm_squared())
    }

    /// ⟨self, other⟩; both fields must share grid and representation.
    pub fn inner(&self, other: &SpinorField) -> Complex64 {
        assert_eq!(self.space, other.space, "inner product across representations");
        assert_eq!(self.grid, other.grid, "inner product across grids");
        let mut acc = Complex64::new(0.0, 0.0);
        for chunk in self.data.chunks(4096).zip(other.data.chunks(4096)) {
            let mut part = Complex64::new(0.0, 0.0);
            for (a, b) in chunk.0.iter().zip(chunk.1) {
                part += dot(a, b);
            }
            acc += part;
        }
        acc * self.weight()
    }

    pub fn scale(&mut self, c: Complex64) {
        for s in &mut self.data {
            *s *= c;
        }
    }

    pub fn axpy(&mut self, c: Complex64, other: &SpinorField) {
        assert_eq!(self.space, other.space);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|s| s.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn to_momentum(&self, fft: &Fft3) -> SpinorField {
        match self.space {
            Space::Momentum => self.clone(),
            Space::Position => {
                let mut out = self.clone();
                fft.transform_spinors(&mut out.data, true, self.grid.cell_volume());
                out.space = Space::Momentum;
                out
            }
        }
    }

    pub fn to_position(&self, fft: &Fft3) -> SpinorField {
        match self.space {
            Space::Position => self.clone(),
            Space::Momentum => {
                let mut out = self.clone();
                fft.transform_spinors(&mut out.data, false, self.grid.momentum_weight());
                out.space = Space::Position;
                out
            }
        }
    }
}

/// Fixed-order blocked summation; the result is independent of threading.
pub fn pairwise_sum<T, F>(items: &[T], f: F) -> f64
where
    F: Fn(&T) -> f64,
{
    let mut total = 0.0;
    for chunk in items.chunks(4096) {
        total += chunk.iter().map(&f).sum::<f64>();
    }
    total
}

/// Unnormalised 3D FFT on N³ row-major buffers.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_grid(grid: &FourierGrid) -> Self {
        Self::new(grid.n)
    }

    /// In-place transform of one scalar N³ buffer (e^{∓2πi jk/N}, no scaling).
    pub fn process(&self, buf: &mut [Complex64], forward: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n * n * n);
        let fft = if forward { &self.forward } else { &self.inverse };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // innermost axis: contiguous lines
        fft.process_with_scratch(buf, &mut scratch);
        let mut plane = vec![Complex64::new(0.0, 0.0); n * n];
        // middle axis
        for i in 0..n {
            let base = i * n * n;
            for j in 0..n {
                for k in 0..n {
                    plane[k * n + j] = buf[base + j * n + k];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for j in 0..n {
                for k in 0..n {
                    buf[base + j * n + k] = plane[k * n + j];
                }
            }
        }
        // outer axis
        for j in 0..n {
            for i in 0..n {
                let row = (i * n + j) * n;
                for k in 0..n {
                    plane[k * n + i] = buf[row + k];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for i in 0..n {
                let row = (i * n + j) * n;
                for k in 0..n {
                    buf[row + k] = plane[k * n + i];
                }
            }
        }
    }

    /// Transforms each spinor component and multiplies by `scale`.
    pub fn transform_spinors(&self, data: &mut [Spinor], forward: bool, scale: f64) {
        let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
        for c in 0..4 {
            for (b, s) in buf.iter_mut().zip(data.iter()) {
                *b = s[c];
            }
            self.process(&mut buf, forward);
            for (s, b) in data.iter_mut().zip(buf.iter()) {
                s[c] = b * scale;
            }
        }
    }
}
