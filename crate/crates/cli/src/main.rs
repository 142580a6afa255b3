use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use corrsense_cli::config::{parse_config_str, CampaignConfig};
use corrsense_cli::output::{meta_path, write_csv, write_meta};
use corrsense_cli::runner::{self, RunError, RunOutput};

/// Correlation-sensing simulator: analytic statistics and Monte-Carlo
/// campaigns for spin-qubit AC-field measurements.
#[derive(Parser)]
#[command(name = "corrsense", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Campaign configuration file (key = value sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path; a .meta.json sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override run.trials.
    #[arg(long, global = true)]
    trials: Option<u32>,

    /// Override any config key: --set section.key=VALUE (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Suppress progress and default-echo notes.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Analytic correlation traces over a delay sweep.
    VarianceSweep,
    /// Monte-Carlo SNR of correlation and synchronized readouts vs field.
    SnrSweep,
    /// Correlation-peak FWHM vs field with its log-log fit.
    Linewidth,
    /// Frequency resolution vs total measurement time.
    Resolution,
    /// Population harmonic coefficients vs field, with dip predictions.
    Harmonics,
    /// One Monte-Carlo campaign; per-trial estimator values.
    McRun,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VarianceSweep => "variance-sweep",
            Command::SnrSweep => "snr-sweep",
            Command::Linewidth => "linewidth",
            Command::Resolution => "resolution",
            Command::Harmonics => "harmonics",
            Command::McRun => "mc-run",
        }
    }

    fn run(self, cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
        match self {
            Command::VarianceSweep => runner::variance_sweep(cfg),
            Command::SnrSweep => runner::snr_sweep(cfg),
            Command::Linewidth => runner::linewidth(cfg),
            Command::Resolution => runner::resolution(cfg),
            Command::Harmonics => runner::harmonics(cfg),
            Command::McRun => runner::mc_run(cfg),
        }
    }
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();

    let Some(config_path) = cli.config.as_ref() else {
        eprintln!("config error: --config PATH is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let Some(out_path) = cli.out.as_ref() else {
        eprintln!("config error: --out PATH is required");
        return ExitCode::from(EXIT_CONFIG);
    };

    let raw = match std::fs::read_to_string(config_path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let mut overrides: Vec<(String, String)> = Vec::new();
    for s in &cli.set {
        match s.split_once('=') {
            Some((k, v)) => overrides.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                eprintln!("config error: --set {s}: expected KEY=VALUE");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    if let Some(seed) = cli.seed {
        overrides.push(("run.seed".into(), seed.to_string()));
    }
    if let Some(trials) = cli.trials {
        overrides.push(("run.trials".into(), trials.to_string()));
    }

    let (cfg, notes) = match parse_config_str(&raw, &overrides) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if !cli.quiet {
        for n in &notes {
            eprintln!("note: {n}");
        }
    }

    let output = match cli.command.run(&cfg) {
        Ok(o) => o,
        Err(RunError::Config(m)) => {
            eprintln!("config error: {m}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(RunError::Runtime(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    if let Err(e) = write_csv(out_path, &output.table) {
        eprintln!("error: writing {}: {e}", out_path.display());
        return ExitCode::from(EXIT_RUNTIME);
    }
    let meta = json!({
        "artifact": "corrsense",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.command.name(),
        "config": &cfg,
        "config_canonical": corrsense_cli::config::emit_canonical(&cfg),
        "seed": cfg.run.seed,
        "trials": cfg.run.trials,
        "gamma_e_hz_per_t": cfg.constants.gamma_e_hz_per_t,
        "defaults_applied": notes,
        "warnings": output.warnings,
        "rows": output.table.rows.len(),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "details": output.extra,
    });
    if let Err(e) = write_meta(out_path, &meta) {
        eprintln!("error: writing {}: {e}", meta_path(out_path).display());
        return ExitCode::from(EXIT_RUNTIME);
    }

    if output.warnings > 0 {
        eprintln!("warning: {} flagged rows (see the flag column)", output.warnings);
    }
    if !cli.quiet {
        eprintln!(
            "wrote {} ({} rows) and {}",
            out_path.display(),
            output.table.rows.len(),
            meta_path(out_path).display()
        );
    }
    ExitCode::SUCCESS
}
