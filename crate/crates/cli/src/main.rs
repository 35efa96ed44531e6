use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qvlms::experiment::{Algorithm, ExperimentConfig};
use qvlms_cli::{config, CliError, Outcome, Overrides};

#[derive(Parser)]
#[command(name = "qvlms", version, about = "q-VLMS Monte-Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Flat TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, env = qvlms_cli::OUT_DIR_ENV, default_value = "qvlms-out")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Cmd {
    /// Theory-versus-simulation validation.
    Protocol1(Common),
    /// q-VLMS versus VLMS across SNRs.
    Protocol2 {
        #[command(flatten)]
        common: Common,
        /// Add the S R⁻¹ S matrix-gain variant.
        #[arg(long)]
        whitened: bool,
    },
    /// Ad-hoc Monte-Carlo run.
    Run(Common),
    /// Step-size bound 1/max((q_i+1) λ_i).
    Bound {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
    },
    /// Re-run the experiment recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write here instead of the recorded output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(base: ExperimentConfig, common: &Common) -> Result<ExperimentConfig, CliError> {
    Ok(config::load(
        base,
        common.config.as_deref(),
        &common.overrides,
    )?)
}

fn report(outcome: &Outcome) {
    let m = &outcome.manifest;
    for c in &m.cells {
        println!(
            "{:<9} q={:<5} snr={:>5} dB  mu={:.6e}  diverged {}/{}",
            c.algorithm,
            c.q.map_or("-".to_string(), |q| q.to_string()),
            c.snr_db,
            c.step_size,
            c.divergence_count,
            m.config.trials
        );
    }
    for check in &m.checks {
        let mark = if check.passed { "PASS" } else { "FAIL" };
        println!("{mark} {}: {}", check.name, check.detail);
    }
    println!("manifest: {}", outcome.manifest_path.display());
}

fn dispatch(cmd: Cmd) -> Result<i32, CliError> {
    let outcome = match cmd {
        Cmd::Protocol1(common) => {
            let cfg = load(ExperimentConfig::protocol1_default(), &common)?;
            qvlms_cli::cmd_protocol1(&cfg, &common.out)?
        }
        Cmd::Protocol2 { common, whitened } => {
            let mut cfg = load(ExperimentConfig::protocol2_default(), &common)?;
            if whitened && !cfg.algorithms.contains(&Algorithm::Whitened) {
                cfg.algorithms.push(Algorithm::Whitened);
            }
            qvlms_cli::cmd_protocol2(&cfg, &common.out)?
        }
        Cmd::Run(common) => {
            let cfg = load(config::run_default(), &common)?;
            qvlms_cli::cmd_run(&cfg, &common.out)?
        }
        Cmd::Bound { q, lambda } => {
            println!("{}", qvlms_cli::cmd_bound(&q, &lambda)?);
            return Ok(0);
        }
        Cmd::Replay { manifest, out } => qvlms_cli::cmd_replay(&manifest, out.as_deref())?,
    };
    report(&outcome);
    if outcome.total_divergence() {
        log::error!("every trial of at least one cell diverged");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
