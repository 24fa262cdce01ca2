//! `kpzlab` command-line front end.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "kpzlab", version, about = "Random-matrix / decorated-Airy / excursion sampling and comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each may also be given in the
/// `--config` file as `key=value` (dashes or underscores); flags win.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Matrix size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Matrix size behind the Airy edge sampler.
    #[arg(long = "n-sim")]
    pub n_sim: Option<usize>,
    /// Number of top Airy points (sample-airy).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores. Does not affect output.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Rescaled (1,1) moment functionals of random matrices.
    SampleMatrix {
        #[command(flatten)]
        common: Common,
        /// gaussian, matched or tridiagonal.
        #[arg(long)]
        ensemble: Option<String>,
    },
    /// Decorated-Airy exponential sums, or the top --k Airy points.
    SampleAiry {
        #[command(flatten)]
        common: Common,
    },
    /// Excursion partition functions, one noise realization per replica.
    SampleExcursion {
        #[command(flatten)]
        common: Common,
        #[arg(long = "noise-seed")]
        noise_seed: Option<u64>,
        #[arg(long = "n-excursions")]
        n_excursions: Option<usize>,
        #[arg(long = "n-steps")]
        n_steps: Option<usize>,
    },
    /// Laplace transform E exp(−u·Z) from the Airy side: Fredholm
    /// determinant (β = 2) or Airy₁ Monte Carlo (β = 1).
    EvalLaplace {
        #[command(flatten)]
        common: Common,
        /// Comma-separated u values.
        #[arg(long = "u-grid", allow_hyphen_values = true)]
        u_grid: Option<String>,
        /// Quadrature nodes (β = 2).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Compare sample files; exit 3 when a check fails.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        left: Option<PathBuf>,
        #[arg(long)]
        right: Option<PathBuf>,
        /// ks, moment, laplace-beta2, laplace-beta1 or tw2.
        #[arg(long)]
        test: Option<String>,
        #[arg(long = "p-threshold")]
        p_threshold: Option<f64>,
        #[arg(long = "se-multiplier")]
        se_multiplier: Option<f64>,
        /// Relative allowance added to moment checks.
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long = "u-grid", allow_hyphen_values = true)]
        u_grid: Option<String>,
        #[arg(long = "n-bootstrap")]
        n_bootstrap: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        /// Replicas of the Airy₁ Monte Carlo (laplace-beta1).
        #[arg(long = "mc-reps")]
        mc_reps: Option<usize>,
        /// tw2: compare ln(value)/alpha instead of value.
        #[arg(long = "log-scale")]
        log_scale: bool,
        /// tw2: largest allowed KS distance.
        #[arg(long = "max-distance")]
        max_distance: Option<f64>,
        /// Directory for .dat curves.
        #[arg(long)]
        dat: Option<PathBuf>,
    },
    /// Tracy–Widom F₂ table.
    Tw2 {
        #[command(flatten)]
        common: Common,
        #[arg(long = "s-min", allow_negative_numbers = true)]
        s_min: Option<f64>,
        #[arg(long = "s-max", allow_negative_numbers = true)]
        s_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        /// Also record mean and variance in the header.
        #[arg(long)]
        moments: bool,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<config::UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<kpzlab::Error>() {
        Some(kpzlab::Error::Parameter { .. } | kpzlab::Error::Domain { .. } | kpzlab::Error::SizeCap { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SampleMatrix { common, ensemble } => commands::sample_matrix(&common, ensemble),
        Command::SampleAiry { common } => commands::sample_airy(&common),
        Command::SampleExcursion {
            common,
            noise_seed,
            n_excursions,
            n_steps,
        } => commands::sample_excursion(&common, noise_seed, n_excursions, n_steps),
        Command::EvalLaplace { common, u_grid, order } => commands::eval_laplace(&common, u_grid, order),
        Command::Compare {
            common,
            left,
            right,
            test,
            p_threshold,
            se_multiplier,
            slack,
            u_grid,
            n_bootstrap,
            level,
            mc_reps,
            log_scale,
            max_distance,
            dat,
        } => commands::compare(
            &common,
            commands::CompareArgs {
                left,
                right,
                test,
                p_threshold,
                se_multiplier,
                slack,
                u_grid,
                n_bootstrap,
                level,
                mc_reps,
                log_scale,
                max_distance,
                dat,
            },
        ),
        Command::Tw2 {
            common,
            s_min,
            s_max,
            points,
            order,
            moments,
        } => commands::tw2(&common, s_min, s_max, points, order, moments),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
