//! JSON run configuration. Missing keys take documented defaults, unknown
//! keys are rejected, and every model invariant is checked at load.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::YMetricSpec;
use crate::dynamics::InitialData;
use crate::grid::FourierGrid;
use crate::model::{CouplingProfile, GaussianTerm, PolynomialPotential};
use crate::{Complex64, Error, Result, Spinor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub amplitude: Complex64,
    pub width: f64,
    pub direction: [Complex64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub m: f64,
    /// u₁..uₚ of U(z) = Σ uₖ|z|^{2k}.
    pub potential: Vec<f64>,
    pub coupling: Vec<TermConfig>,
    /// Admits the all-zero potential (F ≡ 0) for linear validation runs.
    pub linear_validation: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        ModelConfig {
            m: 1.0,
            potential: vec![0.0, 1.0],
            coupling: vec![TermConfig {
                amplitude: Complex64::new(PI.powf(-0.75), 0.0),
                width: 1.0,
                direction: [one, zero, zero, zero],
            }],
            linear_validation: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub l: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 64, l: 32.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    /// Horizon T.
    pub t: f64,
    /// Steps between trajectory rows.
    pub record_stride: usize,
    /// Steps between field dumps; 0 disables them.
    pub snapshot_stride: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dt: 0.01, t: 20.0, record_stride: 10, snapshot_stride: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Spectral,
    Volterra,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl OmegaRange {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum Experiment {
    Sigma {
        #[serde(default = "default_sigma_range")]
        omega: OmegaRange,
    },
    Atlas {
        #[serde(default = "default_atlas_range")]
        omega: OmegaRange,
    },
    Evolve {
        #[serde(default = "default_initial")]
        initial: InitialData,
        #[serde(default = "default_engine")]
        engine: Engine,
    },
    Attract {
        #[serde(default = "default_initial")]
        initial: InitialData,
        #[serde(default = "default_atlas_range")]
        atlas: OmegaRange,
        /// Spectral windows [t₀, t₁]; empty means the first and the last
        /// 10/m of the horizon.
        #[serde(default)]
        windows: Vec<(f64, f64)>,
        /// Times at which dist_𝒴 is evaluated; empty means 5/m and T.
        #[serde(default)]
        dist_times: Vec<f64>,
        #[serde(default)]
        metric: Option<YMetricSpec>,
    },
    Selftest,
}

fn default_sigma_range() -> OmegaRange {
    OmegaRange { min: -1.0, max: 1.0, points: 201 }
}

fn default_atlas_range() -> OmegaRange {
    OmegaRange { min: -0.95, max: 0.95, points: 39 }
}

fn default_initial() -> InitialData {
    InitialData::perturbed(0.5, 0.2)
}

fn default_engine() -> Engine {
    Engine::Spectral
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment::Sigma { omega: default_sigma_range() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub sigma: f64,
    pub root: f64,
    pub kernel: f64,
    /// Spectral/Volterra disagreement that is flagged in the report.
    pub engine_gap: f64,
    /// Half-width δ of the frequency margin around [−m, m].
    pub gap_delta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { sigma: 1e-10, root: 1e-12, kernel: 1e-10, engine_gap: 5e-3, gap_delta: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub experiment: Experiment,
    pub seed: u64,
    pub output: PathBuf,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            experiment: Experiment::default(),
            seed: 0,
            output: PathBuf::from("out"),
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Normalised form: every default filled in, pretty-printed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn potential(&self) -> Result<PolynomialPotential> {
        if self.model.linear_validation {
            if self.model.potential.iter().any(|&c| c != 0.0) {
                return Err(Error::Config("linear validation needs an all-zero potential".into()));
            }
            return Ok(PolynomialPotential::unchecked(self.model.potential.clone()));
        }
        PolynomialPotential::new(self.model.potential.clone())
    }

    pub fn coupling(&self) -> Result<CouplingProfile> {
        let terms = self
            .model
            .coupling
            .iter()
            .map(|t| GaussianTerm {
                amplitude: t.amplitude,
                width: t.width,
                direction: Spinor::new(t.direction[0], t.direction[1], t.direction[2], t.direction[3]),
            })
            .collect();
        CouplingProfile::new(terms, self.model.m)
    }

    /// The grid, with the Nyquist rule enforced.
    pub fn grid(&self) -> Result<FourierGrid> {
        let g = FourierGrid::new(self.grid.n, self.grid.l)?;
        g.check_nyquist(self.model.m)?;
        Ok(g)
    }

    pub fn steps(&self) -> Result<usize> {
        let n = (self.time.t / self.time.dt).round();
        if (n * self.time.dt - self.time.t).abs() > 1e-9 * self.time.t.max(1.0) {
            return Err(Error::Config(format!(
                "horizon {} is not a multiple of dt = {}",
                self.time.t, self.time.dt
            )));
        }
        Ok(n as usize)
    }

    /// Spectral windows of an attract run, with the empty default resolved.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        match &self.experiment {
            Experiment::Attract { windows, .. } if !windows.is_empty() => windows.clone(),
            _ => {
                let (t, w) = (self.time.t, 10.0 / self.model.m);
                vec![(0.0, w.min(t)), ((t - w).max(0.0), t)]
            }
        }
    }

    /// Distance sample times of an attract run, with the empty default resolved.
    pub fn dist_times(&self) -> Vec<f64> {
        match &self.experiment {
            Experiment::Attract { dist_times, .. } if !dist_times.is_empty() => dist_times.clone(),
            _ => vec![(5.0 / self.model.m).min(self.time.t), self.time.t],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.potential()?;
        self.coupling()?;
        self.grid()?;
        let t = &self.time;
        if !(t.dt.is_finite() && t.dt > 0.0 && t.t.is_finite() && t.t >= 0.0) {
            return Err(Error::Config(format!("need dt > 0 and T ≥ 0, got dt = {}, T = {}", t.dt, t.t)));
        }
        if t.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        self.steps()?;
        let tol = &self.tolerances;
        for (name, v) in [("sigma", tol.sigma), ("root", tol.root), ("kernel", tol.kernel), ("engine_gap", tol.engine_gap)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} = {v} must be positive")));
            }
        }
        if !(tol.gap_delta.is_finite() && tol.gap_delta >= 0.0) {
            return Err(Error::Config(format!("gap_delta = {} must be nonnegative", tol.gap_delta)));
        }
        match &self.experiment {
            Experiment::Sigma { omega } | Experiment::Atlas { omega } => check_range(omega),
            Experiment::Attract { atlas, windows, dist_times, .. } => {
                check_range(atlas)?;
                for &(a, b) in windows {
                    if !(a < b && a >= 0.0 && b <= self.time.t + 1e-9) {
                        return Err(Error::Config(format!("window [{a}, {b}] outside [0, T]")));
                    }
                }
                for &s in dist_times {
                    if !(s >= 0.0 && s <= self.time.t + 1e-9) {
                        return Err(Error::Config(format!("distance time {s} outside [0, T]")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn check_range(r: &OmegaRange) -> Result<()> {
    if r.points > 1 && !(r.min < r.max) {
        return Err(Error::Config(format!("ω range [{}, {}] is empty", r.min, r.max)));
    }
    if !(r.min.is_finite() && r.max.is_finite()) {
        return Err(Error::Config("ω range must be finite".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"grid":{"n":64,"h":0.5}}"#), Err(Error::Config(_))));
        assert!(RunConfig::from_json(r#"{"colour":"red"}"#).is_err());
    }

    #[test]
    fn invariants_checked_at_load() {
        assert!(RunConfig::from_json(r#"{"model":{"potential":[1.0]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model":{"potential":[1.0,-1.0]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model":{"potential":[0.0,0.0]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model":{"potential":[0.0,0.0],"linear_validation":true}}"#).is_ok());
        assert!(RunConfig::from_json(r#"{"grid":{"n":16,"l":32.0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model":{"m":-1.0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"time":{"dt":0.03,"t":1.0}}"#).is_err());
    }

    #[test]
    fn normalised_form_round_trips() {
        let cfg = RunConfig::from_json(r#"{"experiment":{"name":"attract"},"seed":3}"#).unwrap();
        let text = cfg.to_json();
        let again = RunConfig::from_json(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn omega_range_sampling() {
        assert!(OmegaRange { min: 0.0, max: 1.0, points: 0 }.values().is_empty());
        assert_eq!(OmegaRange { min: 0.3, max: 1.0, points: 1 }.values(), vec![0.3]);
        let v = OmegaRange { min: -1.0, max: 1.0, points: 5 }.values();
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
