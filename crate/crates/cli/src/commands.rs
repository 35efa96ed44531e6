use std::path::{Path, PathBuf};

use qvlms::adapt::{step_size_bound, QParams};
use qvlms::experiment::{
    cells, protocol1, protocol2, run_experiment, Algorithm, CellResult, ExperimentConfig,
};

use crate::config::{self, ConfigError};
use crate::manifest::{Check, Command, ResolvedCell, RunManifest};
use crate::output::{simulated_rows, tag, theory_rows, write_csv, write_dat, SummaryRow};

/// Minimum theory/simulation correlation for the protocol 1 checks.
pub const CORRELATION_THRESHOLD: f64 = 0.995;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] qvlms::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

impl Outcome {
    /// Some cell lost every trial to divergence.
    pub fn total_divergence(&self) -> bool {
        self.manifest
            .cells
            .iter()
            .any(|c| c.divergence_count == self.manifest.config.trials)
    }

    pub fn exit_code(&self) -> i32 {
        if self.total_divergence() {
            2
        } else {
            0
        }
    }
}

fn prepare_out_dir(dir: &Path) -> std::io::Result<bool> {
    if dir.is_dir() {
        return Ok(false);
    }
    std::fs::create_dir_all(dir)?;
    log::info!("created output directory {}", dir.display());
    Ok(true)
}

/// Validates, resolves every cell and collects step-size warnings, all
/// before any trial runs.
fn start(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest, CliError> {
    config::validate(cfg)?;
    let resolved = cells(cfg)?;
    let created = prepare_out_dir(out)?;
    let mut manifest = RunManifest::new(command, cfg.clone(), out, created);
    for c in &resolved {
        if c.step_size > 2.0 * c.mu_bound {
            let w = format!(
                "{} q={:?} snr={} dB: mu={} exceeds twice the step-size bound {}",
                c.algorithm, c.q, c.snr_db, c.step_size, c.mu_bound
            );
            log::warn!("{w}");
            manifest.warnings.push(w);
        }
    }
    Ok(manifest)
}

fn finish(mut manifest: RunManifest) -> Result<Outcome, CliError> {
    let manifest_path = manifest.finish()?;
    Ok(Outcome {
        manifest,
        manifest_path,
    })
}

fn summary_row(c: &CellResult, correlation: Option<f64>) -> SummaryRow<'static> {
    SummaryRow {
        algorithm: c.algorithm.label(),
        q: c.q,
        snr_db: c.snr_db,
        steady_state_nwd_db: c.steady_state_nwd_db,
        correlation,
        divergence_count: c.divergence_count,
    }
}

fn cell_label(c: &CellResult) -> String {
    match (c.algorithm, c.q) {
        (Algorithm::Qvlms, Some(q)) => format!("qvlms_q{}", tag(q)),
        (alg, _) => alg.label().to_string(),
    }
}

/// Theory-versus-simulation validation: one curve-pair CSV per q plus a
/// correlation summary.
pub fn cmd_protocol1(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut manifest = start(Command::Protocol1, cfg, out)?;
    let report = protocol1(cfg)?;
    let mut summary = Vec::new();
    for cmp in &report.comparisons {
        let cell = &cmp.result;
        manifest.cells.push(cell.into());
        let stem = format!("protocol1_q{}", tag(cmp.q));
        let mut rows = theory_rows(cmp.q, report.snr_db, &cmp.theory_nwd, &cmp.theory_mae);
        if let Some(curves) = &cell.curves {
            rows.extend(simulated_rows(cell, curves));
            write_dat(
                &out.join(format!("{stem}_sim.dat")),
                "iteration simulated_mae",
                &curves.mae,
            )?;
            write_dat(
                &out.join(format!("{stem}_theory.dat")),
                "iteration theory_mae",
                &cmp.theory_mae,
            )?;
            manifest.outputs.push(format!("{stem}_sim.dat"));
            manifest.outputs.push(format!("{stem}_theory.dat"));
        }
        write_csv(&out.join(format!("{stem}.csv")), &rows)?;
        manifest.outputs.push(format!("{stem}.csv"));
        summary.push(summary_row(cell, cmp.correlation));
        manifest.checks.push(Check::new(
            format!("q={} correlation >= {CORRELATION_THRESHOLD}", tag(cmp.q)),
            cmp.correlation.is_some_and(|r| r >= CORRELATION_THRESHOLD),
            format!("{:?}", cmp.correlation),
        ));
        manifest.checks.push(Check::new(
            format!("q={} no diverged trials", tag(cmp.q)),
            cell.divergence_count == 0,
            format!("{} of {} diverged", cell.divergence_count, cell.trials),
        ));
    }
    manifest.checks.push(Check::new(
        format!("average correlation >= {CORRELATION_THRESHOLD}"),
        report
            .average_correlation
            .is_some_and(|r| r >= CORRELATION_THRESHOLD),
        format!("{:?}", report.average_correlation),
    ));
    write_csv(&out.join("protocol1_summary.csv"), &summary)?;
    manifest.outputs.push("protocol1_summary.csv".into());
    finish(manifest)
}

#[derive(serde::Serialize)]
struct GapRow {
    snr_db: f64,
    q: Option<f64>,
    vlms_steady_state_nwd_db: Option<f64>,
    qvlms_steady_state_nwd_db: Option<f64>,
    advantage_db: Option<f64>,
}

#[derive(serde::Serialize)]
struct TargetRow {
    algorithm: &'static str,
    q: Option<f64>,
    snr_db: f64,
    target_db: f64,
    iterations: Option<usize>,
}

/// q-VLMS versus VLMS: per-SNR NWD curves, steady-state dB gaps and
/// iterations to each NWD target.
pub fn cmd_protocol2(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut manifest = start(Command::Protocol2, cfg, out)?;
    let report = protocol2(cfg)?;
    let mut summary = Vec::new();
    let mut gaps = Vec::new();
    let mut targets = Vec::new();
    for snr in &report.snrs {
        let stem = format!("protocol2_snr{}", tag(snr.snr_db));
        let mut rows = Vec::new();
        for cell in &snr.cells {
            manifest.cells.push(cell.into());
            summary.push(summary_row(cell, None));
            for (t, it) in report.targets_db.iter().zip(&cell.iterations_to_target) {
                targets.push(TargetRow {
                    algorithm: cell.algorithm.label(),
                    q: cell.q,
                    snr_db: cell.snr_db,
                    target_db: *t,
                    iterations: *it,
                });
            }
            if let Some(curves) = &cell.curves {
                rows.extend(simulated_rows(cell, curves));
                let name = format!("{stem}_{}.dat", cell_label(cell));
                write_dat(&out.join(&name), "iteration nwd_db", &curves.nwd_db())?;
                manifest.outputs.push(name);
            }
        }
        write_csv(&out.join(format!("{stem}.csv")), &rows)?;
        manifest.outputs.push(format!("{stem}.csv"));

        let base = snr.baseline();
        for (cell, adv) in snr.qvlms().zip(&snr.advantage_db) {
            gaps.push(GapRow {
                snr_db: snr.snr_db,
                q: cell.q,
                vlms_steady_state_nwd_db: base.and_then(|b| b.steady_state_nwd_db),
                qvlms_steady_state_nwd_db: cell.steady_state_nwd_db,
                advantage_db: *adv,
            });
            let faster = base.is_some_and(|b| {
                cell.iterations_to_target
                    .iter()
                    .zip(&b.iterations_to_target)
                    .all(|(q_it, v_it)| match (q_it, v_it) {
                        (Some(a), Some(b)) => a < b,
                        (Some(_), None) => true,
                        (None, _) => false,
                    })
            });
            manifest.checks.push(Check::new(
                format!(
                    "snr={} dB q={}: reaches every NWD target before VLMS",
                    tag(snr.snr_db),
                    cell.q.map_or("-".into(), tag)
                ),
                faster,
                format!(
                    "qvlms {:?} vs vlms {:?}",
                    cell.iterations_to_target,
                    base.map(|b| &b.iterations_to_target)
                ),
            ));
        }
    }
    manifest.checks.push(Check::new(
        "average steady-state advantage is positive",
        report.average_advantage_db.is_some_and(|a| a > 0.0),
        format!("{:?} dB", report.average_advantage_db),
    ));
    write_csv(&out.join("protocol2_summary.csv"), &summary)?;
    write_csv(&out.join("protocol2_gap.csv"), &gaps)?;
    write_csv(&out.join("protocol2_targets.csv"), &targets)?;
    manifest.outputs.extend(
        [
            "protocol2_summary.csv",
            "protocol2_gap.csv",
            "protocol2_targets.csv",
        ]
        .map(String::from),
    );
    finish(manifest)
}

/// Ad-hoc Monte-Carlo run over every configured cell.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut manifest = start(Command::Run, cfg, out)?;
    let results = run_experiment(cfg)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for cell in &results {
        manifest.cells.push(ResolvedCell::from(cell));
        summary.push(summary_row(cell, None));
        if let Some(curves) = &cell.curves {
            rows.extend(simulated_rows(cell, curves));
        }
    }
    write_csv(&out.join("run_curves.csv"), &rows)?;
    write_csv(&out.join("run_summary.csv"), &summary)?;
    manifest
        .outputs
        .extend(["run_curves.csv", "run_summary.csv"].map(String::from));
    finish(manifest)
}

/// Re-runs the command recorded in a manifest, into `out` or the original
/// output directory.
pub fn cmd_replay(manifest_path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let old = RunManifest::read(manifest_path).map_err(|e| {
        CliError::Config(ConfigError::Parse {
            path: manifest_path.to_path_buf(),
            message: e.to_string(),
        })
    })?;
    let out = out.unwrap_or(&old.out_dir);
    match old.command {
        Command::Protocol1 => cmd_protocol1(&old.config, out),
        Command::Protocol2 => cmd_protocol2(&old.config, out),
        Command::Run => cmd_run(&old.config, out),
    }
}

/// `1 / max_i((q_i + 1) λ_i)`; a single q is broadcast over all λ.
pub fn cmd_bound(q: &[f64], lambda: &[f64]) -> Result<f64, CliError> {
    let qs = match q {
        [single] => vec![*single; lambda.len()],
        _ => q.to_vec(),
    };
    let qp = QParams::new(qs).map_err(|e| ConfigError::Key {
        key: "q".into(),
        message: e.to_string(),
    })?;
    step_size_bound(&qp, lambda).map_err(|e| {
        CliError::Config(ConfigError::Key {
            key: "lambda".into(),
            message: e.to_string(),
        })
    })
}
