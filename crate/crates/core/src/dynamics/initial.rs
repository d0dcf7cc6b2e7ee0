//! Initial data on the grid, always returned in momentum space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::grid::{Fft3, FourierGrid, Space, SpinorField};
use crate::model::{Coupling, PolynomialPotential};
use crate::solitary::wave_at;
use crate::{Complex64, Error, Result, Spinor};

fn default_noise_cutoff() -> f64 {
    4.0
}

fn default_noise_width() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum InitialData {
    /// a·e^{−|x−c|²/(2w²)}·e^{ik·x}·d, with `spinor` = a·d.
    #[serde(rename_all = "camelCase")]
    GaussianPacket { spinor: [Complex64; 4], center: [f64; 3], width: f64, momentum: [f64; 3] },
    #[serde(rename_all = "camelCase")]
    SolitaryWave { omega: f64, branch: usize, phase: f64 },
    /// (1+δ)·φ_ω plus smooth noise of L² size δ‖φ_ω‖. The noise is band
    /// limited to |ξ| ≤ cutoff·m and localised by a Gaussian envelope of
    /// width envelope/m around the origin.
    #[serde(rename_all = "camelCase")]
    PerturbedSolitary {
        omega: f64,
        branch: usize,
        phase: f64,
        delta: f64,
        #[serde(default = "default_noise_cutoff")]
        cutoff: f64,
        #[serde(default = "default_noise_width")]
        envelope: f64,
    },
    Superposition { parts: Vec<InitialData> },
}

impl InitialData {
    pub fn perturbed(omega: f64, delta: f64) -> Self {
        InitialData::PerturbedSolitary {
            omega,
            branch: 0,
            phase: 0.0,
            delta,
            cutoff: default_noise_cutoff(),
            envelope: default_noise_width(),
        }
    }
}

/// Builds the field; identical seeds give bit-identical fields.
pub fn initial_data<C: Coupling + ?Sized>(
    kind: &InitialData,
    rho: &C,
    u: &PolynomialPotential,
    grid: FourierGrid,
    seed: u64,
) -> Result<SpinorField> {
    match kind {
        InitialData::GaussianPacket { spinor, center, width, momentum } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidInput(format!("packet width {width} must be positive")));
            }
            let d = Spinor::new(spinor[0], spinor[1], spinor[2], spinor[3]);
            let psi = SpinorField::from_fn(grid, Space::Position, |x| {
                // nearest periodic image of the centre
                let mut r2 = 0.0;
                let mut phase = 0.0;
                for a in 0..3 {
                    let dx = x[a] - center[a];
                    let dx = dx - grid.l * (dx / grid.l).round();
                    r2 += dx * dx;
                    phase += momentum[a] * x[a];
                }
                d * Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
            });
            Ok(psi.to_momentum(&Fft3::for_grid(&grid)))
        }
        InitialData::SolitaryWave { omega, branch, phase } => {
            Ok(wave_at(rho, u, *omega, *branch, *phase, grid)?.profile_hat)
        }
        InitialData::PerturbedSolitary { omega, branch, phase, delta, cutoff, envelope } => {
            if !(*delta >= 0.0 && delta.is_finite()) {
                return Err(Error::InvalidInput(format!("perturbation size {delta} must be nonnegative")));
            }
            let mut psi = wave_at(rho, u, *omega, *branch, *phase, grid)?.profile_hat;
            if *delta == 0.0 {
                return Ok(psi);
            }
            let size = delta * psi.norm_sqr().sqrt();
            psi.scale(Complex64::from(1.0 + delta));
            let noise = smooth_noise(grid, rho.mass(), *cutoff, *envelope, size, seed)?;
            psi.axpy(Complex64::from(1.0), &noise);
            Ok(psi)
        }
        InitialData::Superposition { parts } => {
            let mut total = SpinorField::zeros(grid, Space::Momentum);
            for (i, part) in parts.iter().enumerate() {
                let f = initial_data(part, rho, u, grid, seed.wrapping_add(i as u64))?;
                total.axpy(Complex64::from(1.0), &f);
            }
            Ok(total)
        }
    }
}

/// Seeded random field with momentum support |ξ| ≤ cutoff·m, localised by
/// e^{−|x|²m²/(2·envelope²)}, scaled to L² norm `size`.
pub fn smooth_noise(grid: FourierGrid, m: f64, cutoff: f64, envelope: f64, size: f64, seed: u64) -> Result<SpinorField> {
    if !(cutoff > 0.0 && envelope > 0.0) {
        return Err(Error::InvalidInput("noise cutoff and envelope must be positive".into()));
    }
    let kmax2 = (cutoff * m).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Complex64 {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    };
    let mut noise = SpinorField::zeros(grid, Space::Momentum);
    for (i, s) in noise.data.iter_mut().enumerate() {
        let xi = grid.momentum(i);
        if xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] <= kmax2 {
            *s = Spinor::new(draw(&mut rng), draw(&mut rng), draw(&mut rng), draw(&mut rng));
        }
    }
    let fft = Fft3::for_grid(&grid);
    let mut pos = noise.to_position(&fft);
    let w = envelope / m;
    for (i, s) in pos.data.iter_mut().enumerate() {
        let x = grid.position(i);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        *s *= Complex64::from((-r2 / (2.0 * w * w)).exp());
    }
    let mut noise = pos.to_momentum(&fft);
    for (i, s) in noise.data.iter_mut().enumerate() {
        let xi = grid.momentum(i);
        if xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] > kmax2 {
            *s = Spinor::zeros();
        }
    }
    let norm = noise.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput("noise band contains no lattice modes".into()));
    }
    noise.scale(Complex64::from(size / norm));
    Ok(noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CouplingProfile;

    fn setup() -> (CouplingProfile, PolynomialPotential, FourierGrid) {
        (
            CouplingProfile::normalized_gaussian(1.0).unwrap(),
            PolynomialPotential::new(vec![0.0, 1.0]).unwrap(),
            FourierGrid::new(16, 16.0).unwrap(),
        )
    }

    #[test]
    fn unperturbed_equals_solitary() {
        let (rho, u, grid) = setup();
        let a = initial_data(&InitialData::perturbed(0.5, 0.0), &rho, &u, grid, 7).unwrap();
        let b = initial_data(&InitialData::SolitaryWave { omega: 0.5, branch: 0, phase: 0.0 }, &rho, &u, grid, 7)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_is_seeded_and_sized() {
        let grid = FourierGrid::new(16, 16.0).unwrap();
        let a = smooth_noise(grid, 1.0, 4.0, 2.0, 0.3, 11).unwrap();
        let b = smooth_noise(grid, 1.0, 4.0, 2.0, 0.3, 11).unwrap();
        let c = smooth_noise(grid, 1.0, 4.0, 2.0, 0.3, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.norm_sqr().sqrt() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn zero_packet_is_zero_field() {
        let (rho, u, grid) = setup();
        let z = Complex64::new(0.0, 0.0);
        let kind = InitialData::GaussianPacket { spinor: [z; 4], center: [0.0; 3], width: 1.0, momentum: [0.0; 3] };
        let f = initial_data(&kind, &rho, &u, grid, 0).unwrap();
        assert_eq!(f.norm_sqr(), 0.0);
    }

    #[test]
    fn kind_tags_round_trip() {
        let kind = InitialData::perturbed(0.5, 0.2);
        let text = serde_json::to_string(&kind).unwrap();
        assert!(text.contains("\"kind\":\"perturbedSolitary\""));
        let back: InitialData = serde_json::from_str(&text).unwrap();
        assert_eq!(back, kind);
        assert!(serde_json::from_str::<InitialData>(r#"{"kind":"vortex"}"#).is_err());
    }
}
