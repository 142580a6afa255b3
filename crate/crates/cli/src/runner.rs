//! Subcommand implementations: each one resolves the configuration into
//! core types, produces a result table plus metadata extras, and reports
//! a warning count for flagged rows.

use std::f64::consts::TAU;

use serde_json::json;

use corrsense::analysis::{
    correlation_trace, first_harmonic_bin, first_harmonic_dip_fields, harmonic_amplitudes,
    linewidth_vs_field, resolution_vs_time, robustness_curve,
};
use corrsense::mc::{
    run_campaign_multi, Estimator, ProtocolSchedule, RunConfig, ScheduleMode,
};
use corrsense::signal::{
    theta_closed, AcField, DetectionModel, PhysicsConstants, PulseSequence, SequenceKind,
};

use crate::config::CampaignConfig;
use crate::output::{cell, Table};

/// Table, subcommand-specific metadata, warning count.
pub struct RunOutput {
    pub table: Table,
    pub extra: serde_json::Value,
    pub warnings: usize,
}

pub enum RunError {
    /// Configuration-level problem discovered at run time (exit 2).
    Config(String),
    /// Failure while computing (exit 1).
    Runtime(String),
}

impl From<corrsense::Error> for RunError {
    fn from(e: corrsense::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

struct Physics {
    seq: PulseSequence,
    field: AcField,
    det: DetectionModel,
    consts: PhysicsConstants,
}

fn physics(cfg: &CampaignConfig) -> Result<Physics, RunError> {
    let kind = match (cfg.sequence.kind.as_str(), cfg.sequence.pulses) {
        ("spin-echo", _) => SequenceKind::SpinEcho,
        ("pdd", Some(n)) => SequenceKind::Pdd(n),
        ("cp", Some(n)) => SequenceKind::Cp(n),
        _ => return Err(RunError::Config("sequence.pulses missing".into())),
    };
    let seq = PulseSequence::new(kind, cfg.sequence.tau_s).map_err(cfg_err)?;
    let field = AcField::new(
        cfg.field.omega_rad_per_s,
        cfg.field.amplitude_tesla,
        cfg.field.phi0_rad,
    )
    .map_err(cfg_err)?;
    let det = DetectionModel::new(cfg.detection.n_nv, cfg.detection.eta).map_err(cfg_err)?;
    let consts =
        PhysicsConstants::new(TAU * cfg.constants.gamma_e_hz_per_t).map_err(cfg_err)?;
    Ok(Physics {
        seq,
        field,
        det,
        consts,
    })
}

fn cfg_err(e: corrsense::Error) -> RunError {
    RunError::Config(e.to_string())
}

fn schedule(cfg: &CampaignConfig) -> Result<ProtocolSchedule, RunError> {
    let mode = match cfg.schedule.mode.as_str() {
        "delay-major" => ScheduleMode::DelayMajor,
        _ => ScheduleMode::PhaseMajor,
    };
    ProtocolSchedule::new(
        cfg.schedule.n_s,
        cfg.schedule.n_phi,
        cfg.schedule.t_d_s,
        cfg.schedule.t_phi_s,
        cfg.schedule.t_dead_s,
        cfg.schedule.n_r,
        mode,
    )
    .map_err(cfg_err)
}

fn require_sweep<'c>(cfg: &'c CampaignConfig, variable: &str) -> Result<&'c crate::config::SweepCfg, RunError> {
    match &cfg.sweep {
        Some(sw) if sw.variable == variable => Ok(sw),
        Some(sw) => Err(RunError::Config(format!(
            "this subcommand sweeps {variable}, but sweep.variable = \"{}\"",
            sw.variable
        ))),
        None => Err(RunError::Config(format!(
            "this subcommand needs a [sweep] section over {variable}"
        ))),
    }
}

fn run_config(cfg: &CampaignConfig) -> RunConfig {
    RunConfig {
        master_seed: cfg.run.seed,
        trials: cfg.run.trials,
    }
}

/// Analytic correlation traces over a delay sweep, one row per
/// (t_d, n_s) pair.
pub fn variance_sweep(cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
    let sw = require_sweep(cfg, "schedule.t_d")?;
    let p = physics(cfg)?;
    let theta = theta_closed(&p.seq, &p.field, &p.consts);
    let mut table = Table::new(&["t_d_s", "n_s", "variance", "std_dev"]);
    for &n_s in &cfg.analysis.n_s_list {
        let tr = correlation_trace(
            theta,
            n_s,
            p.field.omega(),
            (sw.from, sw.to),
            sw.points,
            false,
        )?;
        for (t, v) in tr.t_d.iter().zip(&tr.values) {
            table.push(vec![
                cell(*t),
                n_s.to_string(),
                cell(*v),
                cell(v.max(0.0).sqrt()),
            ]);
        }
    }
    Ok(RunOutput {
        table,
        extra: json!({ "theta": theta }),
        warnings: 0,
    })
}

/// Monte-Carlo SNR of the three readouts over a field-amplitude sweep.
pub fn snr_sweep(cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
    let sw = require_sweep(cfg, "field.amplitude")?;
    let p = physics(cfg)?;
    let sched = schedule(cfg)?;
    let nu = cfg
        .analysis
        .bin
        .unwrap_or_else(|| first_harmonic_bin(&sched, p.field.omega()));
    let points = robustness_curve(
        &sched,
        &p.seq,
        p.field.omega(),
        p.field.phi0(),
        &p.det,
        &p.consts,
        &sw.values(),
        &run_config(cfg),
        Some(nu),
    )?;
    let mut table = Table::new(&[
        "b_tesla",
        "snr_corr",
        "snr_sync_h1",
        "snr_sync_max",
        "snr_corr_analytic",
        "snr_sync_h1_analytic",
    ]);
    for pt in &points {
        table.push(vec![
            cell(pt.b_field),
            cell(pt.snr_corr),
            cell(pt.snr_sync_first),
            cell(pt.snr_sync_max),
            cell(pt.snr_corr_analytic),
            cell(pt.snr_sync_first_analytic),
        ]);
    }
    Ok(RunOutput {
        table,
        extra: json!({ "first_harmonic_bin": nu }),
        warnings: 0,
    })
}

/// FWHM of the correlation peak versus field amplitude, with the
/// log-log fit; unresolved peaks are flagged rows.
pub fn linewidth(cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
    let sw = require_sweep(cfg, "field.amplitude")?;
    let p = physics(cfg)?;
    let scan = linewidth_vs_field(
        cfg.schedule.n_s,
        p.field.omega(),
        &p.seq,
        &sw.values(),
        &p.consts,
        cfg.analysis.target_delay_s,
    )?;
    let mut table = Table::new(&["b_tesla", "fwhm_s", "resolved"]);
    for pt in &scan.points {
        table.push(vec![
            cell(pt.b_field),
            cell(pt.fwhm_seconds.unwrap_or(f64::NAN)),
            if pt.fwhm_seconds.is_some() { "true" } else { "false" }.to_string(),
        ]);
    }
    Ok(RunOutput {
        table,
        extra: json!({
            "fit": { "slope": scan.fit.slope, "intercept": scan.fit.intercept,
                      "slope_stderr": scan.fit.slope_stderr },
            "unresolved_points": scan.flagged,
        }),
        warnings: scan.flagged,
    })
}

/// Frequency resolution versus total measurement time.
pub fn resolution(cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
    let sw = require_sweep(cfg, "schedule.t_d")?;
    let p = physics(cfg)?;
    let theta = theta_closed(&p.seq, &p.field, &p.consts);
    let scan = resolution_vs_time(
        theta,
        &cfg.analysis.n_s_list,
        &sw.values(),
        p.field.omega(),
    )?;
    let mut table = Table::new(&["n_s", "t_d_s", "total_time_s", "delta_omega_rad_s"]);
    for pt in &scan.points {
        table.push(vec![
            pt.n_s.to_string(),
            cell(pt.t_d),
            cell(pt.total_time),
            cell(pt.delta_omega),
        ]);
    }
    Ok(RunOutput {
        table,
        extra: json!({
            "theta": theta,
            "fit": { "slope": scan.fit.slope, "intercept": scan.fit.intercept,
                      "slope_stderr": scan.fit.slope_stderr },
        }),
        warnings: 0,
    })
}

/// Harmonic coefficients of the population signal versus field
/// amplitude, plus the predicted first-harmonic dip fields.
pub fn harmonics(cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
    let sw = require_sweep(cfg, "field.amplitude")?;
    let p = physics(cfg)?;
    let n_max = cfg.analysis.harmonics_max;
    let mut columns = vec!["b_tesla".to_string(), "theta".to_string()];
    for n in 0..=n_max {
        columns.push(format!("h{n}"));
    }
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for b in sw.values() {
        let field = p.field.with_amplitude(b)?;
        let theta = theta_closed(&p.seq, &field, &p.consts);
        let hs = harmonic_amplitudes(theta.abs(), n_max)?;
        let mut row = vec![cell(b), cell(theta)];
        row.extend(hs.iter().map(|h| cell(*h)));
        table.push(row);
    }
    let dips = first_harmonic_dip_fields(
        cfg.analysis.dip_count,
        p.field.omega(),
        &p.seq,
        &p.consts,
    )?;
    Ok(RunOutput {
        table,
        extra: json!({ "first_harmonic_dip_fields_tesla": dips }),
        warnings: 0,
    })
}

/// One Monte-Carlo campaign at the configured operating point; emits the
/// per-trial estimator values.
pub fn mc_run(cfg: &CampaignConfig) -> Result<RunOutput, RunError> {
    if cfg.sweep.is_some() {
        return Err(RunError::Config(
            "mc-run evaluates a single operating point; remove the [sweep] section".into(),
        ));
    }
    let p = physics(cfg)?;
    let sched = schedule(cfg)?;
    let nu = cfg
        .analysis
        .bin
        .unwrap_or_else(|| first_harmonic_bin(&sched, p.field.omega()));
    let estimators = [
        Estimator::SigmaHat,
        Estimator::SigmaHatSquared,
        Estimator::Periodogram(nu),
        Estimator::PeriodogramMax,
    ];
    let results = run_campaign_multi(
        &sched,
        &p.seq,
        &p.field,
        &p.det,
        &p.consts,
        &run_config(cfg),
        &estimators,
        true,
    )?;
    let mut table = Table::new(&[
        "trial",
        "sigma_hat",
        "sigma_hat_sq",
        "periodogram_h1",
        "periodogram_max",
    ]);
    let trials = cfg.run.trials as usize;
    for t in 0..trials {
        let mut row = vec![t.to_string()];
        for r in &results {
            row.push(cell(r.values.as_ref().expect("requested values")[t]));
        }
        table.push(row);
    }
    let summary: Vec<serde_json::Value> = results
        .iter()
        .zip(["sigma_hat", "sigma_hat_sq", "periodogram_h1", "periodogram_max"])
        .map(|(r, name)| {
            json!({
                "estimator": name,
                "mean": r.mean,
                "std": r.std,
                "baseline": r.baseline,
                "snr": r.snr,
                "snr_raw": r.snr_raw,
            })
        })
        .collect();
    Ok(RunOutput {
        table,
        extra: json!({
            "first_harmonic_bin": nu,
            "schedule_duration_s": sched.total_duration(),
            "summary": summary,
        }),
        warnings: 0,
    })
}
