//! Command-line front end. Settings come from built-in defaults, then the
//! `--config` file, then `GKDV_*` environment variables, then flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gkdv_core::cli::{cmd_evolve, cmd_run, cmd_series, cmd_spectrum, cmd_verify, load_config};
use gkdv_core::config::Overrides;

#[derive(Parser)]
#[command(name = "gkdv", version, about = "Soliton instability and special solutions of supercritical gKdV")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (sectioned key = value)
    #[arg(long, global = true, env = "GKDV_CONFIG")]
    config: Option<PathBuf>,
    /// Nonlinearity exponent
    #[arg(long, global = true, env = "GKDV_P")]
    p: Option<u32>,
    /// Half-length of the periodic domain [-L, L)
    #[arg(long = "L", global = true, env = "GKDV_L")]
    half_length: Option<f64>,
    /// Number of grid points
    #[arg(long = "N", global = true, env = "GKDV_N")]
    n_points: Option<usize>,
    /// Time step
    #[arg(long, global = true, env = "GKDV_DT")]
    dt: Option<f64>,
    /// Series amplitude A
    #[arg(long = "A", global = true, env = "GKDV_A", allow_hyphen_values = true)]
    amplitude: Option<f64>,
    /// Series order k
    #[arg(long = "k", global = true, env = "GKDV_K")]
    k_max: Option<u32>,
    /// Starting time of the series data
    #[arg(long, global = true, env = "GKDV_T0", allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Evolution horizon
    #[arg(long, global = true, env = "GKDV_HORIZON")]
    horizon: Option<f64>,
    /// Exit radius of the instability tube
    #[arg(long, global = true, env = "GKDV_DELTA")]
    delta: Option<f64>,
    /// Output directory
    #[arg(long, global = true, env = "GKDV_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenpair ±e₀ of the linearized operator, with eigenfunction dumps
    Spectrum,
    /// Checklist of identities, spectrum, rates and scenarios
    Verify {
        /// Skip the evolution-based items
        #[arg(long)]
        quick: bool,
    },
    /// Run one scenario: instability, special, gradient_sign, scaling, shift
    Run { scenario: String },
    /// Build the series 𝒱ₖᴬ and its residual
    Series,
    /// Evolve the soliton, or Q + 𝒱ₖᴬ(t0) when --A is given
    Evolve,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = cli.common;
    let mut cfg = match load_config(c.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("gkdv: {e}");
            return ExitCode::from(2);
        }
    };
    cfg.apply(&Overrides {
        p: c.p,
        half_length: c.half_length,
        n_points: c.n_points,
        dt: c.dt,
        amplitude: c.amplitude,
        k_max: c.k_max,
        t0: c.t0,
        horizon: c.horizon,
        delta: c.delta,
        out: c.out,
    });
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Spectrum => cmd_spectrum(&cfg, &mut stdout),
        Command::Verify { quick } => cmd_verify(&cfg, !quick, &mut stdout),
        Command::Run { scenario } => cmd_run(scenario, &cfg, &mut stdout),
        Command::Series => cmd_series(&cfg, &mut stdout),
        Command::Evolve => cmd_evolve(&cfg, &mut stdout),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gkdv: {e}");
            ExitCode::from(2)
        }
    }
}
