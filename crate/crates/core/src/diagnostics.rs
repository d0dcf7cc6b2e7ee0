//! Charge, energy, the local H^{−ε} metric 𝒴, distance to the solitary
//! manifold and windowed time spectra of y(t).

use std::f64::consts::PI;
use std::io::Write;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::dirac::{apply_symbol, dot};
use crate::grid::{Fft3, FourierGrid, Space, SpinorField};
use crate::model::{rho_hat_field, Coupling, PolynomialPotential};
use crate::solitary::{wave_at, ManifoldAtlas, PointStatus};
use crate::{Complex64, Error, Result, Spinor};

/// Q = ∫|ψ|², in whichever representation ψ is held.
pub fn charge(psi: &SpinorField) -> f64 {
    psi.norm_sqr()
}

fn momentum_view(psi: &SpinorField) -> std::borrow::Cow<'_, SpinorField> {
    match psi.space {
        Space::Momentum => std::borrow::Cow::Borrowed(psi),
        Space::Position => std::borrow::Cow::Owned(psi.to_momentum(&Fft3::for_grid(&psi.grid))),
    }
}

/// ½⟨ψ, 𝒟ψ⟩ on the grid.
pub fn kinetic(psi: &SpinorField, m: f64) -> f64 {
    let psi = momentum_view(psi);
    let grid = psi.grid;
    let mut total = 0.0;
    for (c, chunk) in psi.data.chunks(4096).enumerate() {
        let mut part = 0.0;
        for (k, p) in chunk.iter().enumerate() {
            let xi = grid.momentum(c * 4096 + k);
            part += dot(p, &apply_symbol(xi, m, p)).re;
        }
        total += part;
    }
    0.5 * total * grid.momentum_weight()
}

/// E = ½⟨ψ,𝒟ψ⟩ − U(⟨ρ,ψ⟩), the functional conserved by the dynamics.
pub fn energy<C: Coupling + ?Sized>(psi: &SpinorField, rho: &C, u: &PolynomialPotential) -> f64 {
    let psi = momentum_view(psi);
    let y = rho_hat_field(rho, psi.grid).inner(&psi);
    kinetic(&psi, rho.mass()) - u.value(y)
}

/// Parameters of the 𝒴 metric Σ_R 2^{−R}‖χ(·/R)ψ‖_{H^{−ε}}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YMetricSpec {
    pub epsilon: f64,
    pub rmax: usize,
}

impl YMetricSpec {
    /// ε = 1/2 and the largest R with 2R ≤ L/2.
    pub fn for_grid(grid: &FourierGrid) -> Self {
        YMetricSpec { epsilon: 0.5, rmax: ((grid.l / 4.0).floor() as usize).max(1) }
    }
}

/// Cutoff χ: 1 on r ≤ 1, 0 on r ≥ 2, quintic smoothstep between (C²).
pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// A 𝒴 norm value with its truncation bound 2^{−Rmax}·m^{−ε}·‖ψ‖.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YNorm {
    pub value: f64,
    pub truncation_bound: f64,
}

/// The 𝒴 metric on a fixed grid, with cutoffs and multiplier precomputed.
pub struct YMetric {
    pub spec: YMetricSpec,
    grid: FourierGrid,
    m: f64,
    fft: Fft3,
    cutoffs: Vec<Vec<f64>>,
    multiplier: Vec<f64>,
}

impl YMetric {
    pub fn new(spec: YMetricSpec, grid: FourierGrid, m: f64) -> Result<Self> {
        if !(spec.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("ε = {} must be positive", spec.epsilon)));
        }
        if spec.rmax == 0 || 4.0 * spec.rmax as f64 > grid.l {
            return Err(Error::RmaxTooLarge { rmax: spec.rmax, l: grid.l });
        }
        let cutoffs = (1..=spec.rmax)
            .map(|r| {
                (0..grid.len())
                    .map(|i| {
                        let x = grid.position(i);
                        chi((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() / r as f64)
                    })
                    .collect()
            })
            .collect();
        let multiplier = grid
            .momenta()
            .map(|xi| (m * m + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).powf(-spec.epsilon))
            .collect();
        Ok(YMetric { spec, grid, m, fft: Fft3::for_grid(&grid), cutoffs, multiplier })
    }

    fn check(&self, psi: &SpinorField) -> Result<()> {
        if psi.grid != self.grid {
            return Err(Error::InvalidInput("field and metric live on different grids".into()));
        }
        Ok(())
    }

    fn position(&self, psi: &SpinorField) -> SpinorField {
        psi.to_position(&self.fft)
    }

    fn weight(r: usize) -> f64 {
        0.5f64.powi(r as i32)
    }

    /// Momentum samples of χ_R·ψ for every R.
    fn localised(&self, pos: &SpinorField) -> Vec<Vec<Spinor>> {
        let h3 = self.grid.cell_volume();
        self.cutoffs
            .iter()
            .map(|c| {
                let mut d: Vec<Spinor> = pos.data.iter().zip(c).map(|(s, &w)| s * Complex64::from(w)).collect();
                self.fft.transform_spinors(&mut d, true, h3);
                d
            })
            .collect()
    }

    fn h_inner(&self, a: &[Spinor], b: &[Spinor]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((ca, cb), cm) in a.chunks(4096).zip(b.chunks(4096)).zip(self.multiplier.chunks(4096)) {
            let mut part = Complex64::new(0.0, 0.0);
            for ((x, y), &w) in ca.iter().zip(cb).zip(cm) {
                part += dot(x, y) * w;
            }
            acc += part;
        }
        acc * self.grid.momentum_weight()
    }

    /// ‖χ_Rψ‖²_{H^{−ε}} for R = 1..Rmax.
    pub fn local_norms_sqr(&self, psi: &SpinorField) -> Result<Vec<f64>> {
        self.check(psi)?;
        let loc = self.localised(&self.position(psi));
        Ok(loc.iter().map(|d| self.h_inner(d, d).re).collect())
    }

    fn local_norms_sqr_position(&self, pos: &SpinorField) -> Vec<f64> {
        self.localised(pos).iter().map(|d| self.h_inner(d, d).re).collect()
    }

    pub fn ynorm(&self, psi: &SpinorField) -> Result<YNorm> {
        let parts = self.local_norms_sqr(psi)?;
        let value = parts.iter().enumerate().map(|(i, s)| Self::weight(i + 1) * s.sqrt()).sum();
        let truncation_bound =
            Self::weight(self.spec.rmax) * self.m.powf(-self.spec.epsilon) * psi.norm_sqr().sqrt();
        Ok(YNorm { value, truncation_bound })
    }

    /// Position-space fields gᵣ = χ_R·M(χ_Rψ) with M the H^{−ε} multiplier,
    /// so that ⟨χ_Rφ, χ_Rψ⟩_{H^{−ε}} = ∫φ†gᵣ.
    fn dual_fields(&self, pos: &SpinorField) -> Vec<Vec<Spinor>> {
        let w = self.grid.momentum_weight();
        self.localised(pos)
            .into_iter()
            .zip(&self.cutoffs)
            .map(|(mut d, c)| {
                for (s, &k) in d.iter_mut().zip(&self.multiplier) {
                    *s *= Complex64::from(k);
                }
                self.fft.transform_spinors(&mut d, false, w);
                for (s, &x) in d.iter_mut().zip(c) {
                    *s *= Complex64::from(x);
                }
                d
            })
            .collect()
    }
}

/// 𝒴 norm with a freshly built metric.
pub fn ynorm(psi: &SpinorField, spec: YMetricSpec, m: f64) -> Result<YNorm> {
    YMetric::new(spec, psi.grid, m)?.ynorm(psi)
}

/// Result of a distance search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    pub d: f64,
    /// Frequency of the closest nonzero wave (NaN when the zero wave wins).
    pub omega_star: f64,
    pub theta_star: f64,
    pub branch: usize,
    pub zero_wave_wins: bool,
    /// ‖ψ‖_𝒴, the distance to the zero wave.
    pub d_zero: f64,
    /// Best candidate distance among nonzero waves.
    pub d_wave: f64,
}

/// Precomputed ‖χ_Rφ‖² for an atlas wave; its samples are rebuilt on use.
struct Candidate {
    index: usize,
    omega: f64,
    branch: usize,
    norms: Vec<f64>,
}

/// Distance to the solitary manifold: the local norms of the atlas waves are
/// computed once and reused for every field passed to
/// [`ManifoldProbe::distance`].
pub struct ManifoldProbe<'a, C: Coupling + ?Sized> {
    metric: YMetric,
    rho: &'a C,
    u: PolynomialPotential,
    atlas: ManifoldAtlas,
    candidates: Vec<Candidate>,
}

/// Per-R overlaps of ψ with one candidate.
struct Overlap {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<Complex64>,
}

impl Overlap {
    /// Σ_R 2^{−R}‖χ_R(ψ − e^{iθ}φ)‖.
    fn distance(&self, theta: f64) -> f64 {
        let e = Complex64::from_polar(1.0, theta);
        (0..self.a.len())
            .map(|i| {
                let sq = self.a[i] + self.b[i] - 2.0 * (e * self.c[i]).re;
                YMetric::weight(i + 1) * sq.max(0.0).sqrt()
            })
            .sum()
    }

    /// Closed-form phase from the aggregated inner product, then a local
    /// golden-section polish of the exact norm sum.
    fn best_phase(&self) -> (f64, f64) {
        let agg: Complex64 = self.c.iter().enumerate().map(|(i, c)| c * YMetric::weight(i + 1)).sum();
        let theta0 = -agg.arg();
        let f = |t: f64| self.distance(t);
        let (t, v) = golden_min(&f, theta0 - 0.25, theta0 + 0.25, 1e-12);
        let v0 = f(theta0);
        let (t, v) = if v0 <= v { (theta0, v0) } else { (t, v) };
        (t.rem_euclid(2.0 * PI), v)
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

impl<'a, C: Coupling + ?Sized> ManifoldProbe<'a, C> {
    pub fn new(atlas: &ManifoldAtlas, rho: &'a C, u: &PolynomialPotential, metric: YMetric) -> Result<Self> {
        let grid = metric.grid;
        let mut candidates = Vec::new();
        for (i, roots) in atlas.branches.iter().enumerate() {
            if atlas.status[i] != PointStatus::Ok {
                continue;
            }
            for b in 0..roots.len() {
                let wave = atlas.wave(rho, u, i, b, 0.0, grid)?;
                let pos = metric.position(&wave.profile_hat);
                let norms = metric.local_norms_sqr_position(&pos);
                candidates.push(Candidate { index: i, omega: atlas.omega_grid[i], branch: b, norms });
            }
        }
        Ok(ManifoldProbe { metric, rho, u: u.clone(), atlas: atlas.clone(), candidates })
    }

    pub fn metric(&self) -> &YMetric {
        &self.metric
    }

    fn overlap(&self, a: &[f64], duals: &[Vec<Spinor>], pos: &SpinorField, norms: &[f64]) -> Overlap {
        let h3 = self.metric.grid.cell_volume();
        let c = duals
            .iter()
            .map(|g| {
                // ⟨χψ, χφ⟩ = conj(∫φ†g)
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, q) in pos.data.chunks(4096).zip(g.chunks(4096)) {
                    let mut part = Complex64::new(0.0, 0.0);
                    for (x, y) in p.iter().zip(q) {
                        part += dot(x, y);
                    }
                    acc += part;
                }
                (acc * h3).conj()
            })
            .collect();
        Overlap { a: a.to_vec(), b: norms.to_vec(), c }
    }

    /// inf over atlas waves, phases and (refined) frequencies of ‖ψ − s‖_𝒴,
    /// including the zero wave.
    pub fn distance(&self, psi: &SpinorField) -> Result<Distance> {
        self.metric.check(psi)?;
        let pos = self.metric.position(psi);
        let a = self.metric.local_norms_sqr_position(&pos);
        let d_zero: f64 = a.iter().enumerate().map(|(i, s)| YMetric::weight(i + 1) * s.sqrt()).sum();
        let duals = self.metric.dual_fields(&pos);
        let mut best: Option<(f64, f64, f64, usize)> = None;
        let mut best_idx = 0;
        for (k, cand) in self.candidates.iter().enumerate() {
            let wave = self.atlas.wave(self.rho, &self.u, cand.index, cand.branch, 0.0, self.metric.grid)?;
            let wpos = self.metric.position(&wave.profile_hat);
            let (theta, d) = self.overlap(&a, &duals, &wpos, &cand.norms).best_phase();
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, cand.omega, theta, cand.branch));
                best_idx = k;
            }
        }
        if let Some((d0, _, _, branch)) = best {
            // golden-section in ω between the neighbouring atlas points
            let grid_w = &self.atlas.omega_grid;
            let at = self.candidates[best_idx].index;
            let lo = grid_w[at.saturating_sub(1)];
            let hi = grid_w[(at + 1).min(grid_w.len() - 1)];
            if hi > lo {
                let eval = |w: f64| -> Option<(f64, f64)> {
                    let wave = wave_at(self.rho, &self.u, w, branch, 0.0, self.metric.grid).ok()?;
                    let wpos = self.metric.position(&wave.profile_hat);
                    let norms = self.metric.local_norms_sqr_position(&wpos);
                    let (t, d) = self.overlap(&a, &duals, &wpos, &norms).best_phase();
                    Some((d, t))
                };
                let f = |w: f64| eval(w).map_or(f64::INFINITY, |v| v.0);
                let (w, d) = golden_min(&f, lo, hi, 1e-5);
                if d < d0 {
                    if let Some((d, t)) = eval(w) {
                        best = Some((d, w, t, branch));
                    }
                }
            }
        }
        let (d_wave, omega_star, theta_star, branch) = best.unwrap_or((f64::INFINITY, f64::NAN, 0.0, 0));
        let zero_wave_wins = d_zero <= d_wave;
        Ok(Distance {
            d: d_wave.min(d_zero),
            omega_star: if zero_wave_wins { f64::NAN } else { omega_star },
            theta_star: if zero_wave_wins { 0.0 } else { theta_star },
            branch,
            zero_wave_wins,
            d_zero,
            d_wave,
        })
    }
}

/// dist_𝒴(ψ, S) over the atlas, building the probe on the spot.
pub fn dist_to_manifold<C: Coupling + ?Sized>(
    psi: &SpinorField,
    atlas: &ManifoldAtlas,
    rho: &C,
    u: &PolynomialPotential,
    spec: YMetricSpec,
) -> Result<Distance> {
    let metric = YMetric::new(spec, psi.grid, rho.mass())?;
    ManifoldProbe::new(atlas, rho, u, metric)?.distance(psi)
}

/// Minimum number of samples in a spectral window.
pub const MIN_WINDOW_SAMPLES: usize = 256;
/// Zero-padding factor of the windowed transform.
pub const PAD_FACTOR: usize = 8;

/// Hann-windowed spectrum of y on a time window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub window: (f64, f64),
    #[serde(skip)]
    pub omega: Vec<f64>,
    /// Spectral density in ω; Σ density·dω equals dt·Σ|w·y|².
    #[serde(skip)]
    pub density: Vec<f64>,
    pub d_omega: f64,
    /// Frequency resolution 2π/(window length).
    pub bin_width: f64,
    pub mass_inside_gap: f64,
    pub mass_outside_gap: f64,
    pub total: f64,
    pub peak_omega: f64,
    pub peak_width: f64,
    /// Largest local maximum outside the main lobe, relative to the peak.
    pub secondary_ratio: f64,
}

impl SpectrumReport {
    pub fn outside_fraction(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.mass_outside_gap / self.total
        }
    }

    /// A single peak dominates when every other local maximum is at most
    /// `ratio` times the peak.
    pub fn single_dominant_peak(&self, ratio: f64) -> bool {
        self.secondary_ratio <= ratio
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega,density")?;
        for (o, d) in self.omega.iter().zip(&self.density) {
            writeln!(w, "{o:.12e},{d:.12e}")?;
        }
        Ok(())
    }
}

/// Windowed spectrum of samples y(t₀ + j·dt). Frequencies follow the
/// e^{−iωt} convention: a pure tone e^{−iω₀t} peaks at ω₀.
pub fn time_spectrum(
    y: &[Complex64],
    t0: f64,
    dt: f64,
    window: (f64, f64),
    m: f64,
    gap_delta: f64,
) -> Result<SpectrumReport> {
    if !(dt > 0.0) || !(window.1 > window.0) {
        return Err(Error::InvalidInput("spectral window needs dt > 0 and t₀ < t₁".into()));
    }
    let t_end = t0 + dt * (y.len().max(1) - 1) as f64;
    let slack = 1e-9 * dt;
    if window.0 < t0 - slack || window.1 > t_end + slack {
        return Err(Error::InvalidInput(format!(
            "window [{}, {}] outside the recorded horizon [{t0}, {t_end}]",
            window.0, window.1
        )));
    }
    let first = ((window.0 - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let last = (((window.1 - t0) / dt + 1e-9).floor() as usize).min(y.len() - 1);
    let samples = if last >= first { last - first + 1 } else { 0 };
    if samples < MIN_WINDOW_SAMPLES {
        return Err(Error::WindowTooShort { samples, min: MIN_WINDOW_SAMPLES });
    }
    let p = samples * PAD_FACTOR;
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    let denom = (samples - 1) as f64;
    for j in 0..samples {
        let w = 0.5 * (1.0 - (2.0 * PI * j as f64 / denom).cos());
        buf[j] = y[first + j] * w;
    }
    FftPlanner::new().plan_fft_forward(p).process(&mut buf);
    let d_omega = 2.0 * PI / (p as f64 * dt);
    // ascending ω: bin k ↦ ω = −2π·freq(k)/dt
    let mut pairs: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let signed = if k <= p / 2 { k as f64 } else { k as f64 - p as f64 };
            (-signed * d_omega, z.norm_sqr() * dt * dt / (2.0 * PI))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (omega, density): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let edge = m + gap_delta;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (o, d) in omega.iter().zip(&density) {
        if o.abs() <= edge {
            inside += d * d_omega;
        } else {
            outside += d * d_omega;
        }
    }
    let (peak_idx, &peak) = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let (peak_width, lobe) = peak_shape(&density, peak_idx, d_omega);
    let peak_omega = omega[peak_idx];
    let secondary = (1..density.len() - 1)
        .filter(|&k| k < lobe.0 || k > lobe.1)
        .filter(|&k| density[k] >= density[k - 1] && density[k] >= density[k + 1])
        .map(|k| density[k])
        .fold(0.0, f64::max);
    let secondary_ratio = if peak > 0.0 { secondary / peak } else { 0.0 };
    Ok(SpectrumReport {
        window,
        omega,
        density,
        d_omega,
        bin_width: 2.0 * PI / (samples as f64 * dt),
        mass_inside_gap: inside,
        mass_outside_gap: outside,
        total: inside + outside,
        peak_omega,
        peak_width,
        secondary_ratio,
    })
}

/// Full width at half maximum and the main lobe [lo, hi] (descent to the
/// first local minimum on each side).
fn peak_shape(density: &[f64], k: usize, d_omega: f64) -> (f64, (usize, usize)) {
    let half = 0.5 * density[k];
    let cross = |dir: isize| -> f64 {
        let mut i = k as isize;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= density.len() {
                return (i - k as isize).abs() as f64;
            }
            let (a, b) = (density[i as usize], density[next as usize]);
            if b < half {
                let frac = (a - half) / (a - b);
                return (i - k as isize).abs() as f64 + frac;
            }
            i = next;
        }
    };
    let width = (cross(-1) + cross(1)) * d_omega;
    let mut lo = k;
    while lo > 0 && density[lo - 1] <= density[lo] {
        lo -= 1;
    }
    let mut hi = k;
    while hi + 1 < density.len() && density[hi + 1] <= density[hi] {
        hi += 1;
    }
    (width, (lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CouplingProfile;

    #[test]
    fn cutoff_shape() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(2.5), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        // C² joins: first and second differences vanish at both ends
        let h = 1e-4;
        for x in [1.0, 2.0] {
            let d1 = (chi(x + h) - chi(x - h)) / (2.0 * h);
            let d2 = (chi(x + h) - 2.0 * chi(x) + chi(x - h)) / (h * h);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-3, "{x}: {d1} {d2}");
        }
    }

    #[test]
    fn charge_of_coupling_is_one() {
        let grid = FourierGrid::new(32, 16.0).unwrap();
        let rho = CouplingProfile::normalized_gaussian(1.0).unwrap();
        let pos = SpinorField::from_fn(grid, Space::Position, |x| rho.rho(x));
        assert!((charge(&pos) - 1.0).abs() < 1e-10);
        let mom = pos.to_momentum(&Fft3::for_grid(&grid));
        assert!((charge(&mom) - charge(&pos)).abs() < 1e-12);
    }

    #[test]
    fn zero_field_has_zero_diagnostics() {
        let grid = FourierGrid::new(16, 16.0).unwrap();
        let rho = CouplingProfile::normalized_gaussian(1.0).unwrap();
        let u = PolynomialPotential::new(vec![0.0, 1.0]).unwrap();
        let z = SpinorField::zeros(grid, Space::Momentum);
        assert_eq!(charge(&z), 0.0);
        assert_eq!(energy(&z, &rho, &u), 0.0);
        assert_eq!(ynorm(&z, YMetricSpec::for_grid(&grid), 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn rmax_must_fit_the_box() {
        let grid = FourierGrid::new(16, 16.0).unwrap();
        assert!(YMetric::new(YMetricSpec { epsilon: 0.5, rmax: 4 }, grid, 1.0).is_ok());
        assert!(matches!(
            YMetric::new(YMetricSpec { epsilon: 0.5, rmax: 5 }, grid, 1.0),
            Err(Error::RmaxTooLarge { .. })
        ));
    }

    fn tone(omega: f64, dt: f64, n: usize) -> Vec<Complex64> {
        (0..n).map(|j| Complex64::from_polar(1.0, -omega * j as f64 * dt)).collect()
    }

    #[test]
    fn pure_tone_spectrum() {
        let dt = 0.01;
        let y = tone(0.5, dt, 10_001);
        let r = time_spectrum(&y, 0.0, dt, (0.0, 100.0), 1.0, 0.1).unwrap();
        assert!((r.peak_omega - 0.5).abs() <= r.bin_width, "{}", r.peak_omega);
        assert!(r.outside_fraction() <= 1e-3, "{}", r.outside_fraction());
        assert!(r.single_dominant_peak(0.1));
        let energy: f64 = dt * (0..10_001)
            .map(|j| (0.5 * (1.0 - (2.0 * PI * j as f64 / 10_000.0).cos())).powi(2))
            .sum::<f64>();
        assert!((r.total - energy).abs() < 1e-12 * energy);
    }

    #[test]
    fn short_window_is_rejected() {
        let y = tone(0.5, 0.1, 200);
        assert!(matches!(
            time_spectrum(&y, 0.0, 0.1, (0.0, 19.9), 1.0, 0.1),
            Err(Error::WindowTooShort { .. })
        ));
    }

    #[test]
    fn golden_section_finds_minimum() {
        let (x, v) = golden_min(&|x: f64| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && (v - 1.0).abs() < 1e-12);
    }
}
