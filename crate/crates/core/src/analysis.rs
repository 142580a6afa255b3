//! Higher-level studies: correlation traces versus delay, linewidth and
//! resolution scaling, harmonic structure, and the SNR robustness
//! comparison between the correlation and synchronized readouts.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mc::{
    build_lambda_grid, run_campaign, run_campaign_multi, Estimator, ProtocolSchedule, RunConfig,
    ScheduleMode,
};
use crate::numerics::{bessel_jn_zeros, fwhm, j0, jn, loglog_fit, FitResult};
use crate::signal::{theta_closed, AcField, DetectionModel, PhysicsConstants, PulseSequence};
use crate::snr::{
    corr_noise_variance, corr_signal_expectation, sync_noise_variance, sync_signal_expectation,
    LambdaGrid,
};
use crate::stats::{var_ns, CorrelationSettings};

/// A correlation trace over delay time.
#[derive(Debug, Clone)]
pub struct TraceResult {
    /// Delay values (s).
    pub t_d: Vec<f64>,
    /// Analytic variance (or its square root) per delay.
    pub values: Vec<f64>,
    /// Monte-Carlo mean per delay, when simulated.
    pub mc_mean: Option<Vec<f64>>,
    /// Monte-Carlo std per delay, when simulated.
    pub mc_std: Option<Vec<f64>>,
    pub meta: TraceMeta,
}

/// Enough metadata to regenerate a trace.
#[derive(Debug, Clone)]
pub struct TraceMeta {
    pub theta: f64,
    pub n_s: u32,
    pub omega: f64,
    pub use_sqrt: bool,
    pub gamma_e: Option<f64>,
    pub n_phi: Option<u32>,
    pub seed: Option<u64>,
}

/// Analytic correlation trace: the N_s-measurement variance (or its
/// square root) on a uniform delay grid.
pub fn correlation_trace(
    theta: f64,
    n_s: u32,
    omega: f64,
    td_range: (f64, f64),
    resolution: usize,
    use_sqrt: bool,
) -> Result<TraceResult> {
    if resolution < 2 {
        return Err(Error::domain("correlation_trace: need at least 2 points"));
    }
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::domain("correlation_trace: omega must be > 0"));
    }
    if td_range.1 <= td_range.0 {
        return Err(Error::domain("correlation_trace: empty delay range"));
    }
    let step = (td_range.1 - td_range.0) / (resolution - 1) as f64;
    let t_d: Vec<f64> = (0..resolution).map(|i| td_range.0 + i as f64 * step).collect();
    let values: Vec<f64> = t_d
        .par_iter()
        .map(|&t| {
            let s = CorrelationSettings::new(theta.abs(), n_s, omega * t)
                .expect("validated arguments");
            let v = var_ns(&s);
            if use_sqrt {
                v.max(0.0).sqrt()
            } else {
                v
            }
        })
        .collect();
    Ok(TraceResult {
        t_d,
        values,
        mc_mean: None,
        mc_std: None,
        meta: TraceMeta {
            theta,
            n_s,
            omega,
            use_sqrt,
            gamma_e: None,
            n_phi: None,
            seed: None,
        },
    })
}

/// Correlation trace with a Monte-Carlo campaign per delay point, for
/// end-to-end validation of the analytic curve at reduced grids.
#[allow(clippy::too_many_arguments)]
pub fn correlation_trace_mc(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    field: &AcField,
    det: &DetectionModel,
    consts: &PhysicsConstants,
    cfg: &RunConfig,
    td_range: (f64, f64),
    resolution: usize,
) -> Result<TraceResult> {
    let theta = theta_closed(seq, field, consts);
    let mut trace = correlation_trace(
        theta,
        schedule.n_s,
        field.omega(),
        td_range,
        resolution,
        false,
    )?;
    let mut means = Vec::with_capacity(resolution);
    let mut stds = Vec::with_capacity(resolution);
    for &t in &trace.t_d {
        let mut sched = *schedule;
        sched.t_d = t;
        let res = run_campaign(
            &sched,
            seq,
            field,
            det,
            consts,
            cfg,
            Estimator::SigmaHatSquared,
            false,
        )?;
        means.push(res.mean);
        stds.push(res.std);
    }
    trace.mc_mean = Some(means);
    trace.mc_std = Some(stds);
    trace.meta.gamma_e = Some(consts.gamma_e);
    trace.meta.n_phi = Some(schedule.n_phi);
    trace.meta.seed = Some(cfg.master_seed);
    Ok(trace)
}

/// Delay of the correlated peak (omega t_d = m pi) nearest the target.
pub fn correlated_peak_time(omega: f64, target: f64) -> f64 {
    let m = (omega * target / PI).round().max(1.0);
    m * PI / omega
}

/// FWHM in seconds of the correlation peak centred at `t_center`,
/// using an adaptively refined sampling window.
pub fn peak_fwhm_seconds(theta: f64, n_s: u32, omega: f64, t_center: f64) -> Result<f64> {
    const POINTS: usize = 4001;
    let mut half_window = 0.5 * PI / omega; // midway to the neighbouring peaks
    let mut width = f64::NAN;
    for _ in 0..10 {
        let step = 2.0 * half_window / (POINTS - 1) as f64;
        let ts: Vec<f64> = (0..POINTS)
            .map(|i| t_center - half_window + i as f64 * step)
            .collect();
        let ys: Vec<f64> = ts
            .par_iter()
            .map(|&t| {
                var_ns(&CorrelationSettings::new(theta.abs(), n_s, omega * t).expect("valid"))
            })
            .collect();
        width = fwhm(&ts, &ys)?;
        if width >= 40.0 * step {
            return Ok(width);
        }
        half_window = 5.0 * width;
    }
    Ok(width)
}

/// One field amplitude in a linewidth scan; `fwhm_seconds` is `None`
/// when the peak could not be resolved at that field.
#[derive(Debug, Clone, Copy)]
pub struct LinewidthPoint {
    pub b_field: f64,
    pub fwhm_seconds: Option<f64>,
}

/// Linewidth scan result with the log-log fit over resolved points.
#[derive(Debug, Clone)]
pub struct LinewidthScan {
    pub points: Vec<LinewidthPoint>,
    pub fit: FitResult,
    /// Number of fields flagged as unresolved and excluded from the fit.
    pub flagged: usize,
}

/// FWHM of the correlation peak nearest `target_delay`, per field
/// amplitude, with a log-log fit of width versus field.
pub fn linewidth_vs_field(
    n_s: u32,
    omega: f64,
    seq: &PulseSequence,
    b_values: &[f64],
    consts: &PhysicsConstants,
    target_delay: f64,
) -> Result<LinewidthScan> {
    if b_values.is_empty() {
        return Err(Error::domain("linewidth_vs_field: empty field range"));
    }
    if b_values.windows(2).any(|w| w[1] <= w[0]) || b_values[0] <= 0.0 {
        return Err(Error::domain(
            "linewidth_vs_field: fields must be positive and ascending",
        ));
    }
    let t_center = correlated_peak_time(omega, target_delay);
    let mut points = Vec::with_capacity(b_values.len());
    let mut flagged = 0usize;
    for &b in b_values {
        let field = AcField::new(omega, b, 0.0)?;
        let theta = theta_closed(seq, &field, consts);
        match peak_fwhm_seconds(theta, n_s, omega, t_center) {
            Ok(w) => points.push(LinewidthPoint {
                b_field: b,
                fwhm_seconds: Some(w),
            }),
            Err(Error::PeakNotResolved(_)) => {
                flagged += 1;
                points.push(LinewidthPoint {
                    b_field: b,
                    fwhm_seconds: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let xs: Vec<f64> = points
        .iter()
        .filter_map(|p| p.fwhm_seconds.map(|_| p.b_field))
        .collect();
    let ys: Vec<f64> = points.iter().filter_map(|p| p.fwhm_seconds).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(LinewidthScan { points, fit, flagged })
}

/// One (group size, delay) combination in a resolution scan.
#[derive(Debug, Clone, Copy)]
pub struct ResolutionPoint {
    pub n_s: u32,
    /// Correlated-peak delay actually evaluated (s).
    pub t_d: f64,
    /// Total measurement time N_s * t_d (s).
    pub total_time: f64,
    /// Frequency resolution (delta t / t_d) * omega (rad/s).
    pub delta_omega: f64,
}

/// Frequency-resolution scan: delta omega from the trace FWHM, against
/// total measurement time N_s * t_d, with its log-log fit.
#[derive(Debug, Clone)]
pub struct ResolutionScan {
    pub points: Vec<ResolutionPoint>,
    pub fit: FitResult,
}

pub fn resolution_vs_time(
    theta: f64,
    n_s_values: &[u32],
    t_d_values: &[f64],
    omega: f64,
) -> Result<ResolutionScan> {
    if n_s_values.is_empty() || t_d_values.is_empty() {
        return Err(Error::domain("resolution_vs_time: empty sweep"));
    }
    let mut points = Vec::with_capacity(n_s_values.len() * t_d_values.len());
    for &n_s in n_s_values {
        if n_s < 1 {
            return Err(Error::domain("resolution_vs_time: n_s must be >= 1"));
        }
        for &td in t_d_values {
            let t_center = correlated_peak_time(omega, td);
            let dt = peak_fwhm_seconds(theta, n_s, omega, t_center)?;
            points.push(ResolutionPoint {
                n_s,
                t_d: t_center,
                total_time: n_s as f64 * t_center,
                delta_omega: dt / t_center * omega,
            });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.total_time).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.delta_omega).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(ResolutionScan { points, fit })
}

/// Harmonic coefficients of the population signal versus AC phase:
/// index 0 holds the DC level, index n the n-th cosine coefficient.
/// Odd orders vanish identically.
pub fn harmonic_amplitudes(theta: f64, n_max: u32) -> Result<Vec<f64>> {
    if n_max < 2 {
        return Err(Error::domain("harmonic_amplitudes: n_max must be >= 2"));
    }
    let x = 4.0 * theta;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(0.5 * (1.0 + j0(x)));
    for n in 1..=n_max {
        if n % 2 == 1 {
            out.push(0.0);
        } else {
            let coeff = if n % 4 == 0 { 1.0 } else { -1.0 };
            out.push(coeff * jn(n, x));
        }
    }
    Ok(out)
}

/// Field amplitudes at which the first observed harmonic vanishes: the
/// zeros of J2 mapped through the linear theta(B) response of the
/// sequence.
pub fn first_harmonic_dip_fields(
    count: usize,
    omega: f64,
    seq: &PulseSequence,
    consts: &PhysicsConstants,
) -> Result<Vec<f64>> {
    let unit = AcField::new(omega, 1.0, 0.0)?;
    let theta_per_tesla = theta_closed(seq, &unit, consts).abs();
    if theta_per_tesla <= 0.0 {
        return Err(Error::domain(
            "first_harmonic_dip_fields: sequence has no field response at this tau",
        ));
    }
    let zeros = bessel_jn_zeros(2, count)?;
    Ok(zeros
        .into_iter()
        .map(|z| z / (4.0 * theta_per_tesla))
        .collect())
}

/// Schedule whose consecutive measurements advance the AC phase by one
/// comb step (omega t_phi = 2 pi base_periods + 2 pi / n_phi) and whose
/// delay groups stay on the correlated condition (t_d = n_phi t_phi).
pub fn phase_comb_schedule(omega: f64, n_s: u32, n_phi: u32, base_periods: u32) -> Result<ProtocolSchedule> {
    if n_phi < 1 {
        return Err(Error::domain("phase_comb_schedule: n_phi must be >= 1"));
    }
    let period = TAU / omega;
    let t_phi = base_periods as f64 * period + period / n_phi as f64;
    ProtocolSchedule::new(
        n_s,
        n_phi,
        n_phi as f64 * t_phi,
        t_phi,
        0.0,
        1,
        ScheduleMode::PhaseMajor,
    )
}

/// Periodogram bin carrying the first harmonic of a phase-comb stream:
/// the population responds at twice the field frequency, so the ramp of
/// one comb step per sample places it at 2 N / n_phi.
pub fn first_harmonic_bin(schedule: &ProtocolSchedule, omega: f64) -> usize {
    let n_total = (schedule.n_s * schedule.n_phi) as f64;
    let step = (omega * schedule.t_phi).rem_euclid(TAU) / TAU;
    (2.0 * n_total * step).round() as usize
}

/// Per-field SNR of the three readout variants.
#[derive(Debug, Clone, Copy)]
pub struct RobustnessPoint {
    pub b_field: f64,
    /// Monte-Carlo SNR of the variance-of-counts readout.
    pub snr_corr: f64,
    /// Monte-Carlo SNR of the first-harmonic periodogram readout.
    pub snr_sync_first: f64,
    /// Monte-Carlo SNR of the max-bin periodogram readout.
    pub snr_sync_max: f64,
    /// Closed-form counterparts of the first two.
    pub snr_corr_analytic: f64,
    pub snr_sync_first_analytic: f64,
}

/// SNR of the three readouts across a field sweep, all evaluated on the
/// same simulated photon streams.
#[allow(clippy::too_many_arguments)]
pub fn robustness_curve(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    omega: f64,
    phi0: f64,
    det: &DetectionModel,
    consts: &PhysicsConstants,
    b_values: &[f64],
    cfg: &RunConfig,
    first_bin: Option<usize>,
) -> Result<Vec<RobustnessPoint>> {
    let nu = first_bin.unwrap_or_else(|| first_harmonic_bin(schedule, omega));
    let estimators = [
        Estimator::SigmaHatSquared,
        Estimator::Periodogram(nu),
        Estimator::PeriodogramMax,
    ];
    let mut out = Vec::with_capacity(b_values.len());
    for &b in b_values {
        let field = AcField::new(omega, b, phi0)?;
        let results =
            run_campaign_multi(schedule, seq, &field, det, consts, cfg, &estimators, false)?;
        let (corr_a, sync_a) =
            analytic_snrs(schedule, seq, &field, det, consts, nu)?;
        out.push(RobustnessPoint {
            b_field: b,
            snr_corr: results[0].snr,
            snr_sync_first: results[1].snr,
            snr_sync_max: results[2].snr,
            snr_corr_analytic: corr_a,
            snr_sync_first_analytic: sync_a,
        });
    }
    Ok(out)
}

/// Closed-form SNRs for the two principal readouts at one field value:
/// correlated-minus-uncorrelated contrast over the correlated-condition
/// noise, and coherent periodogram power over the bin noise.
pub fn analytic_snrs(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    field: &AcField,
    det: &DetectionModel,
    consts: &PhysicsConstants,
    nu: usize,
) -> Result<(f64, f64)> {
    let grid = build_lambda_grid(schedule, seq, field, det, consts);
    let mut shifted = *schedule;
    shifted.t_d += PI / (schedule.n_s as f64 * field.omega());
    let baseline_grid = build_lambda_grid(&shifted, seq, field, det, consts);

    let corr_signal = corr_signal_expectation(&grid) - corr_signal_expectation(&baseline_grid);
    let corr_noise = corr_noise_variance(&grid)?.sqrt();
    let corr = if corr_noise > 0.0 { corr_signal / corr_noise } else { 0.0 };

    let lambdas = stream_rates(&grid, schedule.mode);
    let pedestal: f64 = lambdas.iter().sum();
    let sync_signal = sync_signal_expectation(&lambdas, nu)? - pedestal;
    let sync_noise = sync_noise_variance(&lambdas, nu)?.sqrt();
    let sync = if sync_noise > 0.0 { sync_signal / sync_noise } else { 0.0 };
    Ok((corr, sync))
}

fn stream_rates(grid: &LambdaGrid, mode: ScheduleMode) -> Vec<f64> {
    grid.flattened(matches!(mode, ScheduleMode::PhaseMajor))
}
