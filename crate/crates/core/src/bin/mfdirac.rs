use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mfdirac::config::{Engine, Experiment, RunConfig};
use mfdirac::runner::{self, SelftestHooks};
use mfdirac::Error;

#[derive(Parser)]
#[command(name = "mfdirac", version, about = "Nonlinear Dirac equation with mean-field coupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Engine for `evolve` (overrides the configuration).
    #[arg(long, global = true, value_enum)]
    engine: Option<Engine>,
    /// Random seed (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// σ(ω) curve and assumption report.
    Sigma,
    /// Solitary manifold atlas with residuals.
    Atlas,
    /// Time evolution by one or both engines.
    Evolve,
    /// Distance to the manifold and windowed spectra along a run.
    Attract,
    /// Invariant suite; exits with status 3 on failure.
    Selftest,
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    // an experiment block of another kind is replaced by this command's defaults
    let matches = matches!(
        (&cfg.experiment, cli.command),
        (Experiment::Sigma { .. }, Command::Sigma)
            | (Experiment::Atlas { .. }, Command::Atlas)
            | (Experiment::Evolve { .. }, Command::Evolve)
            | (Experiment::Attract { .. }, Command::Attract)
            | (Experiment::Selftest, Command::Selftest)
    );
    if !matches {
        let name = match cli.command {
            Command::Sigma => "sigma",
            Command::Atlas => "atlas",
            Command::Evolve => "evolve",
            Command::Attract => "attract",
            Command::Selftest => "selftest",
        };
        cfg.experiment = serde_json::from_value(serde_json::json!({ "name": name }))
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = load(cli)?;
    let out = cfg.output.clone();
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match cli.command {
        Command::Sigma => {
            let s = runner::cmd_sigma(&cfg, &out)?;
            say(format!("{} σ samples, zeros at {:?}", s.rows, s.zeros));
        }
        Command::Atlas => {
            let s = runner::cmd_atlas(&cfg, &out)?;
            say(format!("{} waves, max residual {:.3e}", s.rows.len(), s.max_residual));
        }
        Command::Evolve => {
            let o = runner::cmd_evolve(&cfg, &out, cli.engine, cli.quiet)?;
            if let Some(s) = &o.spectral {
                say(format!(
                    "spectral: charge drift {:.3e}, energy drift {:.3e}",
                    s.record.charge_drift(),
                    s.record.energy_drift()
                ));
            }
            if let Some(c) = &o.cross {
                say(format!("engine gap {:.3e}, field gap {:.3e}", c.max_gap, c.field_gap));
            }
        }
        Command::Attract => {
            let s = runner::cmd_attract(&cfg, &out, cli.quiet)?;
            say(format!(
                "dist ratio {:.3}, outside-gap mass ratio {:.3e}, late peak {:.4}",
                s.dist_ratio, s.outside_mass_ratio, s.late_peak
            ));
        }
        Command::Selftest => {
            let r = runner::cmd_selftest(&cfg, &out, SelftestHooks::default())?;
            for c in &r.checks {
                say(format!("{} {:<48} {:.3e} (tol {:.1e})", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value, c.tolerance));
            }
            return Ok(r.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
