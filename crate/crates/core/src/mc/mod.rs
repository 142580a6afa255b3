//! Seeded Monte-Carlo simulation of measurement campaigns: lambda grids
//! from the physics model, Poisson draws, the variance and periodogram
//! estimators, and campaign aggregation.
//!
//! Trials are independent work units executed on a rayon pool; each
//! trial draws from its own counter-derived ChaCha substream, so results
//! are bit-identical for a given master seed regardless of worker count.

mod poisson;

pub use poisson::sample_poisson;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::periodogram_bin;
use crate::signal::{population, theta_closed, AcField, DetectionModel, PhysicsConstants, PulseSequence};
use crate::snr::{corr_signal_expectation, LambdaGrid};

/// Which of the two nested time delays advances fastest in the
/// acquisition stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Consecutive measurements step the sensing delay (delay index
    /// fastest in the stream).
    DelayMajor,
    /// Consecutive measurements step the AC phase comb (phase index
    /// fastest in the stream).
    PhaseMajor,
}

/// The N_s x N_phi measurement grid and its timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSchedule {
    pub n_s: u32,
    pub n_phi: u32,
    /// Delay between correlation groups (s).
    pub t_d: f64,
    /// Phase-step delay within a group (s).
    pub t_phi: f64,
    /// Dead time per measurement (s); reporting only.
    pub t_dead: f64,
    /// Repetitions of the whole grid.
    pub n_r: u32,
    pub mode: ScheduleMode,
}

impl ProtocolSchedule {
    pub fn new(
        n_s: u32,
        n_phi: u32,
        t_d: f64,
        t_phi: f64,
        t_dead: f64,
        n_r: u32,
        mode: ScheduleMode,
    ) -> Result<Self> {
        if n_s < 1 || n_phi < 1 || n_r < 1 {
            return Err(Error::domain(
                "ProtocolSchedule: n_s, n_phi, n_r must be >= 1",
            ));
        }
        for (name, v) in [("t_d", t_d), ("t_phi", t_phi), ("t_dead", t_dead)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!(
                    "ProtocolSchedule: {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(Self {
            n_s,
            n_phi,
            t_d,
            t_phi,
            t_dead,
            n_r,
            mode,
        })
    }

    /// Nominal campaign length: the last measurement of the grid starts
    /// at (n_s - 1) t_d + (n_phi - 1) t_phi and occupies t_dead, and the
    /// grid is repeated n_r times back to back.
    pub fn total_duration(&self) -> f64 {
        self.n_r as f64
            * ((self.n_s as f64 - 1.0) * self.t_d
                + (self.n_phi as f64 - 1.0) * self.t_phi
                + self.t_dead)
    }

    fn cells(&self) -> usize {
        self.n_s as usize * self.n_phi as usize
    }
}

/// Photon counts for one pass over the grid, counts[i][k] at delay index
/// i and phase index k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsMatrix {
    counts: Vec<u64>,
    n_s: usize,
    n_phi: usize,
}

impl CountsMatrix {
    pub fn new(n_s: usize, n_phi: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n_s * n_phi {
            return Err(Error::domain(format!(
                "CountsMatrix: expected {} cells, got {}",
                n_s * n_phi,
                counts.len()
            )));
        }
        Ok(Self { counts, n_s, n_phi })
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn get(&self, i: usize, k: usize) -> u64 {
        self.counts[i * self.n_phi + k]
    }

    /// Counts in acquisition order for the given schedule mode.
    pub fn flattened(&self, mode: ScheduleMode) -> Vec<f64> {
        match mode {
            // phase index fastest: storage order
            ScheduleMode::PhaseMajor => self.counts.iter().map(|&c| c as f64).collect(),
            // delay index fastest
            ScheduleMode::DelayMajor => {
                let mut out = Vec::with_capacity(self.counts.len());
                for k in 0..self.n_phi {
                    for i in 0..self.n_s {
                        out.push(self.get(i, k) as f64);
                    }
                }
                out
            }
        }
    }
}

/// Seeding and trial count for a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub master_seed: u64,
    pub trials: u32,
}

/// Per-trial statistic extracted from a counts matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// sigma-hat: square root of the variance-of-counts estimator.
    SigmaHat,
    /// The variance-of-counts estimator itself.
    SigmaHatSquared,
    /// One periodogram bin of the acquisition-ordered stream.
    Periodogram(usize),
    /// Square root of one periodogram bin (amplitude readout).
    PeriodogramSqrt(usize),
    /// Maximum periodogram bin over all non-DC bins.
    PeriodogramMax,
}

/// Expected-photon grid for a schedule:
/// lambda_{i,k} = P(theta, omega tau/2 + phi0 + i omega t_d + k omega t_phi) n_nv eta.
pub fn build_lambda_grid(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    field: &AcField,
    det: &DetectionModel,
    consts: &PhysicsConstants,
) -> LambdaGrid {
    let theta = theta_closed(seq, field, consts);
    let psi0 = 0.5 * field.omega() * seq.tau() + field.phi0();
    let step_d = field.omega() * schedule.t_d;
    let step_phi = field.omega() * schedule.t_phi;
    let scale = det.lambda_max();
    LambdaGrid::from_fn(schedule.n_s as usize, schedule.n_phi as usize, |i, k| {
        population(theta, psi0 + i as f64 * step_d + k as f64 * step_phi) * scale
    })
    .expect("schedule dimensions already validated")
}

/// Independent Poisson draws, one per grid cell.
pub fn sample_counts<R: Rng + ?Sized>(grid: &LambdaGrid, rng: &mut R) -> CountsMatrix {
    let counts = grid
        .values()
        .iter()
        .map(|&lam| sample_poisson(rng, lam))
        .collect();
    CountsMatrix {
        counts,
        n_s: grid.n_s(),
        n_phi: grid.n_phi(),
    }
}

/// Variance-of-counts estimator (the square of sigma-hat): the
/// population variance, over phase columns, of the per-column means.
pub fn estimator_sigma_hat_squared(counts: &CountsMatrix) -> Result<f64> {
    if counts.n_phi() < 2 {
        return Err(Error::domain(
            "sigma-hat estimator needs at least two phase columns",
        ));
    }
    let n_s = counts.n_s() as f64;
    let n_phi = counts.n_phi() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for k in 0..counts.n_phi() {
        let mut col = 0.0;
        for i in 0..counts.n_s() {
            col += counts.get(i, k) as f64;
        }
        let m = col / n_s;
        sum += m;
        sum_sq += m * m;
    }
    let mean = sum / n_phi;
    Ok((sum_sq / n_phi - mean * mean).max(0.0))
}

/// sigma-hat: standard deviation of the per-column means.
pub fn estimator_sigma_hat(counts: &CountsMatrix) -> Result<f64> {
    Ok(estimator_sigma_hat_squared(counts)?.sqrt())
}

/// Periodogram bin of the counts flattened in acquisition order.
pub fn estimator_periodogram(counts: &CountsMatrix, mode: ScheduleMode, nu: usize) -> Result<f64> {
    let flat = counts.flattened(mode);
    periodogram_bin(&flat, nu)
}

/// Aggregated campaign output for one estimator.
#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub estimator: Estimator,
    /// Mean of the per-trial estimator values.
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator) of the values.
    pub std: f64,
    /// Analytic no-signal reference subtracted for `snr`.
    pub baseline: f64,
    /// (mean - baseline) / std.
    pub snr: f64,
    /// mean / std, without baseline subtraction.
    pub snr_raw: f64,
    /// Per-trial values, when requested.
    pub values: Option<Vec<f64>>,
}

/// Run a campaign for a single estimator.
#[allow(clippy::too_many_arguments)]
pub fn run_campaign(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    field: &AcField,
    det: &DetectionModel,
    consts: &PhysicsConstants,
    cfg: &RunConfig,
    estimator: Estimator,
    keep_values: bool,
) -> Result<CampaignResult> {
    let mut results = run_campaign_multi(
        schedule,
        seq,
        field,
        det,
        consts,
        cfg,
        &[estimator],
        keep_values,
    )?;
    Ok(results.pop().expect("one estimator in, one result out"))
}

/// Run a campaign evaluating several estimators on the same draws, the
/// way a shared measurement stream is analyzed by competing protocols.
#[allow(clippy::too_many_arguments)]
pub fn run_campaign_multi(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    field: &AcField,
    det: &DetectionModel,
    consts: &PhysicsConstants,
    cfg: &RunConfig,
    estimators: &[Estimator],
    keep_values: bool,
) -> Result<Vec<CampaignResult>> {
    if cfg.trials < 2 {
        return Err(Error::domain("run_campaign: need at least 2 trials"));
    }
    if estimators.is_empty() {
        return Err(Error::domain("run_campaign: no estimators requested"));
    }
    let grid = build_lambda_grid(schedule, seq, field, det, consts);
    let n_total = schedule.cells();
    for est in estimators {
        if let Estimator::Periodogram(nu) | Estimator::PeriodogramSqrt(nu) = est {
            if *nu >= n_total {
                return Err(Error::domain(format!(
                    "run_campaign: periodogram bin {nu} out of range for {n_total} samples"
                )));
            }
        }
        if matches!(est, Estimator::SigmaHat | Estimator::SigmaHatSquared) && schedule.n_phi < 2 {
            return Err(Error::domain(
                "run_campaign: sigma-hat estimators need n_phi >= 2",
            ));
        }
    }

    let needs_fft = estimators.iter().any(|e| matches!(e, Estimator::PeriodogramMax));
    let fft = needs_fft.then(|| FftPlanner::<f64>::new().plan_fft_forward(n_total));

    let trials = cfg.trials as usize;
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.master_seed, trial as u64);
            let counts = sample_counts(&grid, &mut rng);
            evaluate_estimators(&counts, schedule.mode, estimators, fft.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;

    let baselines = estimators
        .iter()
        .map(|est| estimator_baseline(schedule, seq, field, det, consts, est))
        .collect::<Vec<f64>>();

    let mut out = Vec::with_capacity(estimators.len());
    for (j, est) in estimators.iter().enumerate() {
        let values: Vec<f64> = per_trial.iter().map(|row| row[j]).collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        let baseline = baselines[j];
        let (snr, snr_raw) = if std > 0.0 {
            ((mean - baseline) / std, mean / std)
        } else {
            (0.0, 0.0)
        };
        out.push(CampaignResult {
            estimator: *est,
            mean,
            std,
            baseline,
            snr,
            snr_raw,
            values: keep_values.then_some(values),
        });
    }
    Ok(out)
}

fn evaluate_estimators(
    counts: &CountsMatrix,
    mode: ScheduleMode,
    estimators: &[Estimator],
    fft: Option<&Arc<dyn Fft<f64>>>,
) -> Result<Vec<f64>> {
    let mut flat: Option<Vec<f64>> = None;
    let mut spectrum_max: Option<f64> = None;
    let mut out = Vec::with_capacity(estimators.len());
    for est in estimators {
        let v = match est {
            Estimator::SigmaHat => estimator_sigma_hat(counts)?,
            Estimator::SigmaHatSquared => estimator_sigma_hat_squared(counts)?,
            Estimator::Periodogram(nu) | Estimator::PeriodogramSqrt(nu) => {
                let flat = flat.get_or_insert_with(|| counts.flattened(mode));
                let bin = periodogram_bin(flat, *nu)?;
                if matches!(est, Estimator::PeriodogramSqrt(_)) {
                    bin.sqrt()
                } else {
                    bin
                }
            }
            Estimator::PeriodogramMax => {
                if spectrum_max.is_none() {
                    let flat = flat.get_or_insert_with(|| counts.flattened(mode));
                    let fft = fft.expect("planned when a max-bin estimator is present");
                    spectrum_max = Some(max_nonzero_bin(flat, fft));
                }
                spectrum_max.unwrap()
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Largest |FFT bin|^2 over all bins except DC.
fn max_nonzero_bin(flat: &[f64], fft: &Arc<dyn Fft<f64>>) -> f64 {
    let mut buf: Vec<Complex<f64>> = flat.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf.iter()
        .skip(1)
        .map(|c| c.norm_sqr())
        .fold(0.0, f64::max)
}

/// Analytic no-signal reference for an estimator.
///
/// For the variance estimators this is the expectation at the nearest
/// fully uncorrelated delay (t_d shifted by pi / (N_s omega)); for the
/// periodogram estimators it is the incoherent shot-noise pedestal
/// sum_k lambda_k. With a zero-amplitude field every baseline equals the
/// estimator expectation, so the subtracted SNR vanishes.
fn estimator_baseline(
    schedule: &ProtocolSchedule,
    seq: &PulseSequence,
    field: &AcField,
    det: &DetectionModel,
    consts: &PhysicsConstants,
    est: &Estimator,
) -> f64 {
    match est {
        Estimator::SigmaHat | Estimator::SigmaHatSquared => {
            let mut shifted = *schedule;
            shifted.t_d += PI / (schedule.n_s as f64 * field.omega());
            let grid = build_lambda_grid(&shifted, seq, field, det, consts);
            let e = corr_signal_expectation(&grid);
            if matches!(est, Estimator::SigmaHat) {
                e.max(0.0).sqrt()
            } else {
                e
            }
        }
        Estimator::Periodogram(_) | Estimator::PeriodogramMax | Estimator::PeriodogramSqrt(_) => {
            let grid = build_lambda_grid(schedule, seq, field, det, consts);
            let pedestal: f64 = grid.values().iter().sum();
            if matches!(est, Estimator::PeriodogramSqrt(_)) {
                pedestal.sqrt()
            } else {
                pedestal
            }
        }
    }
}

/// Sample standard deviation of per-repetition estimates, with the
/// (N_r - 1) denominator.
pub fn repetition_spread(sigma_hats: &[f64]) -> Result<f64> {
    if sigma_hats.len() < 2 {
        return Err(Error::domain(
            "repetition_spread: need at least 2 repetitions",
        ));
    }
    let n = sigma_hats.len() as f64;
    let mean = sigma_hats.iter().sum::<f64>() / n;
    let ss: f64 = sigma_hats.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

const TRIAL_STREAM_TAG: u64 = u64::from_le_bytes(*b"mctrial\0");

/// Counter-derived ChaCha substream for one trial: the master seed and a
/// module tag fill the key, the trial index selects the stream.
fn trial_rng(master_seed: u64, trial: u64) -> ChaCha12Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&TRIAL_STREAM_TAG.to_le_bytes());
    seed[16..24].copy_from_slice(&splitmix64(master_seed ^ TRIAL_STREAM_TAG).to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SequenceKind;
    use std::f64::consts::TAU;

    fn fig_parts(b: f64) -> (PulseSequence, AcField, DetectionModel, PhysicsConstants) {
        let seq = PulseSequence::new(SequenceKind::SpinEcho, 2e-6).unwrap();
        let field = AcField::new(TAU * 500e3, b, 0.4).unwrap();
        let det = DetectionModel::new(1e6, 1e-4).unwrap();
        (seq, field, det, PhysicsConstants::default())
    }

    #[test]
    fn zero_field_grid_is_flat() {
        let (seq, field, det, consts) = fig_parts(0.0);
        let sched =
            ProtocolSchedule::new(3, 5, 1e-6, 2e-7, 0.0, 1, ScheduleMode::PhaseMajor).unwrap();
        let grid = build_lambda_grid(&sched, &seq, &field, &det, &consts);
        assert!(grid.values().iter().all(|&v| (v - 100.0).abs() < 1e-9));
    }

    #[test]
    fn single_cell_grid() {
        let (seq, field, det, consts) = fig_parts(8e-6);
        let sched =
            ProtocolSchedule::new(1, 1, 0.0, 0.0, 0.0, 1, ScheduleMode::PhaseMajor).unwrap();
        let grid = build_lambda_grid(&sched, &seq, &field, &det, &consts);
        let theta = theta_closed(&seq, &field, &consts);
        let psi0 = 0.5 * field.omega() * seq.tau() + field.phi0();
        let want = population(theta, psi0) * 100.0;
        assert!((grid.get(0, 0) - want).abs() < 1e-12);
    }

    #[test]
    fn reference_grid_has_uniform_phase_comb() {
        // t_phi with omega t_phi = 2 pi (1 + 1/n_phi): successive phase
        // columns advance by 2 pi / n_phi, and t_d = n_phi t_phi keeps
        // the delay groups correlated.
        let (seq, field, det, consts) = fig_parts(8e-6);
        let n_phi = 1000u32;
        let t_phi = 2e-6 + 2e-9;
        let sched = ProtocolSchedule::new(
            10,
            n_phi,
            n_phi as f64 * t_phi,
            t_phi,
            0.0,
            1,
            ScheduleMode::PhaseMajor,
        )
        .unwrap();
        let grid = build_lambda_grid(&sched, &seq, &field, &det, &consts);
        // columns constant across delay index
        for k in (0..n_phi as usize).step_by(97) {
            for i in 1..10 {
                assert!(
                    (grid.get(i, k) - grid.get(0, k)).abs() < 1e-6,
                    "column {k} varies across delays"
                );
            }
        }
        // column phase step = 2 pi / 1000
        let theta = theta_closed(&seq, &field, &consts);
        let psi0 = 0.5 * field.omega() * seq.tau() + field.phi0();
        for k in (0..1000).step_by(127) {
            let want = population(theta, psi0 + k as f64 * TAU * 1e-3) * 100.0;
            assert!((grid.get(0, k) - want).abs() < 1e-6, "column {k}");
        }
    }

    #[test]
    fn sample_counts_zero_and_reproducible() {
        let grid = LambdaGrid::from_fn(2, 3, |_, _| 0.0).unwrap();
        let mut rng = trial_rng(1, 0);
        let c = sample_counts(&grid, &mut rng);
        assert!(c.counts.iter().all(|&v| v == 0));

        let grid = LambdaGrid::from_fn(4, 7, |i, k| 2.0 + (i + k) as f64).unwrap();
        let a = sample_counts(&grid, &mut trial_rng(9, 3));
        let b = sample_counts(&grid, &mut trial_rng(9, 3));
        assert_eq!(a, b);
        let c = sample_counts(&grid, &mut trial_rng(9, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn sample_counts_moments_at_lambda_100() {
        let grid = LambdaGrid::from_fn(100, 1000, |_, _| 100.0).unwrap();
        let counts = sample_counts(&grid, &mut trial_rng(12345, 0));
        let n = counts.counts.len() as f64;
        let mean = counts.counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let var = counts
            .counts
            .iter()
            .map(|&c| (c as f64 - mean) * (c as f64 - mean))
            .sum::<f64>()
            / n;
        assert!((mean - 100.0).abs() <= 0.5, "mean {mean}");
        assert!((var - 100.0).abs() <= 3.0, "var {var}");
    }

    #[test]
    fn sigma_hat_hand_values() {
        let even = CountsMatrix::new(3, 4, vec![5; 12]).unwrap();
        assert_eq!(estimator_sigma_hat(&even).unwrap(), 0.0);

        // N_s = 1 with phase columns {0, 2}: variance 1, sigma-hat 1
        let two = CountsMatrix::new(1, 2, vec![0, 2]).unwrap();
        assert_eq!(estimator_sigma_hat(&two).unwrap(), 1.0);

        let narrow = CountsMatrix::new(2, 1, vec![1, 2]).unwrap();
        assert!(estimator_sigma_hat(&narrow).is_err());
    }

    #[test]
    fn sigma_hat_squared_equals_covariance_sum() {
        // (1/N_s^2) sum_ij Cov(S_i, S_j) with the same 1/N_phi
        // normalization reproduces the estimator exactly.
        let mut rng = trial_rng(55, 7);
        for _ in 0..20 {
            let n_s = rng.random_range(1usize..5);
            let n_phi = rng.random_range(2usize..9);
            let counts: Vec<u64> = (0..n_s * n_phi).map(|_| rng.random_range(0..30)).collect();
            let m = CountsMatrix::new(n_s, n_phi, counts).unwrap();
            let got = estimator_sigma_hat_squared(&m).unwrap();

            let row_mean = |i: usize| -> f64 {
                (0..n_phi).map(|k| m.get(i, k) as f64).sum::<f64>() / n_phi as f64
            };
            let mut cov_sum = 0.0;
            for i in 0..n_s {
                for j in 0..n_s {
                    let (mi, mj) = (row_mean(i), row_mean(j));
                    let c = (0..n_phi)
                        .map(|k| (m.get(i, k) as f64 - mi) * (m.get(j, k) as f64 - mj))
                        .sum::<f64>()
                        / n_phi as f64;
                    cov_sum += c;
                }
            }
            cov_sum /= (n_s * n_s) as f64;
            assert!((got - cov_sum).abs() <= 1e-10 * got.abs().max(1.0));
        }
    }

    #[test]
    fn flattening_order_matches_mode() {
        let m = CountsMatrix::new(2, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        // storage is [i][k]; phase-major streams k fastest
        assert_eq!(m.flattened(ScheduleMode::PhaseMajor), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.flattened(ScheduleMode::DelayMajor), vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn sigma_hat_is_order_free_periodogram_is_not() {
        let mut rng = trial_rng(8, 0);
        let counts: Vec<u64> = (0..5 * 6).map(|_| rng.random_range(0..50)).collect();
        let m = CountsMatrix::new(5, 6, counts).unwrap();
        let s = estimator_sigma_hat(&m).unwrap();
        assert_eq!(s, estimator_sigma_hat(&m).unwrap());
        // sigma-hat never sees the stream order; the periodogram does
        let p1 = estimator_periodogram(&m, ScheduleMode::PhaseMajor, 3).unwrap();
        let p2 = estimator_periodogram(&m, ScheduleMode::DelayMajor, 3).unwrap();
        assert!((p1 - p2).abs() > 1e-9, "permutation left bin 3 unchanged");
        // but the DC bin is permutation invariant
        let d1 = estimator_periodogram(&m, ScheduleMode::PhaseMajor, 0).unwrap();
        let d2 = estimator_periodogram(&m, ScheduleMode::DelayMajor, 0).unwrap();
        assert!((d1 - d2).abs() < 1e-9);
    }

    #[test]
    fn repetition_spread_hand_values() {
        assert_eq!(repetition_spread(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert!((repetition_spread(&[0.0, 2.0]).unwrap() - 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(repetition_spread(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!(repetition_spread(&[1.0]).is_err());
    }

    #[test]
    fn campaign_is_deterministic_across_pool_sizes() {
        let (seq, field, det, consts) = fig_parts(8e-6);
        let sched =
            ProtocolSchedule::new(4, 25, 2.002e-5, 2.002e-6, 0.0, 1, ScheduleMode::PhaseMajor)
                .unwrap();
        let cfg = RunConfig {
            master_seed: 777,
            trials: 40,
        };
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_campaign(
                    &sched,
                    &seq,
                    &field,
                    &det,
                    &consts,
                    &cfg,
                    Estimator::SigmaHatSquared,
                    true,
                )
                .unwrap()
            })
        };
        let a = run_with(1);
        let b = run_with(4);
        assert_eq!(a.values, b.values, "trial values depend on worker count");
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }

    #[test]
    fn campaign_two_trials_reproducible() {
        let (seq, field, det, consts) = fig_parts(8e-6);
        let sched =
            ProtocolSchedule::new(2, 8, 1e-6, 1e-7, 0.0, 1, ScheduleMode::DelayMajor).unwrap();
        let cfg = RunConfig {
            master_seed: 1,
            trials: 2,
        };
        let a = run_campaign(&sched, &seq, &field, &det, &consts, &cfg, Estimator::SigmaHat, true)
            .unwrap();
        let b = run_campaign(&sched, &seq, &field, &det, &consts, &cfg, Estimator::SigmaHat, true)
            .unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn zero_field_campaign_sits_on_shot_noise_pedestal() {
        let (seq, field, det, consts) = fig_parts(0.0);
        let n_phi = 100u32;
        let sched = ProtocolSchedule::new(
            5,
            n_phi,
            1e-5,
            1e-6,
            0.0,
            1,
            ScheduleMode::PhaseMajor,
        )
        .unwrap();
        let cfg = RunConfig {
            master_seed: 99,
            trials: 2000,
        };
        let res = run_campaign(
            &sched,
            &seq,
            &field,
            &det,
            &consts,
            &cfg,
            Estimator::SigmaHat,
            false,
        )
        .unwrap();
        // E[sigma-hat^2] = (N_phi - 1) lambda / (N_phi N_s) at constant rates
        let want = ((n_phi as f64 - 1.0) * 100.0 / (n_phi as f64 * 5.0)).sqrt();
        assert!(
            (res.mean - want).abs() <= 0.02 * want,
            "mean {} vs pedestal {want}",
            res.mean
        );
        // baseline-subtracted SNR sits at zero for a zero-amplitude field
        assert!(res.snr.abs() <= 0.2, "snr {}", res.snr);
        assert!(res.snr_raw > 10.0);
    }

    #[test]
    fn comb_stream_peaks_at_bin_twenty() {
        // 10^4-sample stream stepping the AC phase by 2 pi/1000 per
        // sample: the population responds at twice the ramp frequency,
        // so the spectral peak sits at bin 20 (or its mirror).
        let (seq, field, det, consts) = fig_parts(10e-6);
        let n_phi = 1000u32;
        let t_phi = 2e-6 + 2e-9;
        let sched = ProtocolSchedule::new(
            10,
            n_phi,
            n_phi as f64 * t_phi,
            t_phi,
            0.0,
            1,
            ScheduleMode::PhaseMajor,
        )
        .unwrap();
        let grid = build_lambda_grid(&sched, &seq, &field, &det, &consts);
        let counts = sample_counts(&grid, &mut trial_rng(2718, 0));
        let flat = counts.flattened(ScheduleMode::PhaseMajor);
        let n = flat.len();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut buf: Vec<Complex<f64>> = flat.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft.process(&mut buf);
        let (argmax, _) = buf
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| (i, c.norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let bin = argmax.min(n - argmax);
        assert_eq!(bin, 20, "dominant non-DC bin at {argmax}");
    }

    #[test]
    fn sqrt_readouts_double_the_raw_snr() {
        // Working with sigma-hat (or the periodogram amplitude) instead
        // of its square roughly doubles the raw mean-over-std ratio.
        let (seq, field, det, consts) = fig_parts(10e-6);
        let n_phi = 200u32;
        let t_phi = 2e-6 + 2e-6 / n_phi as f64;
        let sched = ProtocolSchedule::new(
            5,
            n_phi,
            n_phi as f64 * t_phi,
            t_phi,
            0.0,
            1,
            ScheduleMode::PhaseMajor,
        )
        .unwrap();
        let cfg = RunConfig {
            master_seed: 424242,
            trials: 400,
        };
        let res = run_campaign_multi(
            &sched,
            &seq,
            &field,
            &det,
            &consts,
            &cfg,
            &[
                Estimator::SigmaHat,
                Estimator::SigmaHatSquared,
                Estimator::PeriodogramSqrt(10),
                Estimator::Periodogram(10),
            ],
            false,
        )
        .unwrap();
        let corr_ratio = res[0].snr_raw / res[1].snr_raw;
        let sync_ratio = res[2].snr_raw / res[3].snr_raw;
        assert!(
            (1.6..=2.4).contains(&corr_ratio),
            "sigma-hat vs squared raw-SNR ratio {corr_ratio}"
        );
        assert!(
            (1.6..=2.4).contains(&sync_ratio),
            "amplitude vs power raw-SNR ratio {sync_ratio}"
        );
    }

    #[test]
    fn periodogram_max_estimator_runs() {
        let (seq, field, det, consts) = fig_parts(8e-6);
        let sched =
            ProtocolSchedule::new(5, 40, 8.08e-5, 2.02e-6, 0.0, 1, ScheduleMode::PhaseMajor)
                .unwrap();
        let cfg = RunConfig {
            master_seed: 5,
            trials: 8,
        };
        let res = run_campaign_multi(
            &sched,
            &seq,
            &field,
            &det,
            &consts,
            &cfg,
            &[Estimator::PeriodogramMax, Estimator::Periodogram(2)],
            true,
        )
        .unwrap();
        let max_vals = res[0].values.as_ref().unwrap();
        let bin_vals = res[1].values.as_ref().unwrap();
        for (m, b) in max_vals.iter().zip(bin_vals) {
            assert!(m >= b, "max bin {m} below bin 2 value {b}");
        }
    }
}
