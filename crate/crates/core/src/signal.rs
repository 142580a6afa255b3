//! Physics layer: AC field, decoupling sequences, acquired qubit phase,
//! |0> population, and the ensemble photon-rate mapping.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Coherent AC magnetic field `B cos(omega t + phi0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcField {
    omega: f64,
    amplitude: f64,
    phi0: f64,
}

impl AcField {
    /// `omega` in rad/s (> 0), `amplitude` in tesla (>= 0), `phi0` in rad
    /// (stored reduced to [0, 2 pi)).
    pub fn new(omega: f64, amplitude: f64, phi0: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::domain(format!("AcField: omega must be > 0, got {omega}")));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::domain(format!(
                "AcField: amplitude must be >= 0, got {amplitude}"
            )));
        }
        if !phi0.is_finite() {
            return Err(Error::domain("AcField: non-finite phi0"));
        }
        Ok(Self {
            omega,
            amplitude,
            phi0: phi0.rem_euclid(TAU),
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Same field with a different amplitude; used by field sweeps.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.omega, amplitude, self.phi0)
    }

    /// Period of the field, 2 pi / omega.
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }
}

/// Decoupling sequence family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    /// Single refocusing pulse at tau/2.
    SpinEcho,
    /// n equidistant pulses, closed form from the n-pulse phase formula.
    Pdd(u32),
    /// n equidistant pulses, Carr-Purcell closed form.
    Cp(u32),
}

/// Pulse sequence with total free-evolution time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSequence {
    kind: SequenceKind,
    tau: f64,
}

impl PulseSequence {
    pub fn new(kind: SequenceKind, tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::domain(format!(
                "PulseSequence: tau must be > 0, got {tau}"
            )));
        }
        match kind {
            SequenceKind::Pdd(n) | SequenceKind::Cp(n) if n < 1 => {
                return Err(Error::domain("PulseSequence: pulse count must be >= 1"))
            }
            _ => {}
        }
        Ok(Self { kind, tau })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Sign-flip times of the modulation function, ascending, inside (0, tau).
    ///
    /// All families place flips at (2k - 1) tau / (2n); spin echo is the
    /// n = 1 case.
    pub fn flip_times(&self) -> Vec<f64> {
        let n = match self.kind {
            SequenceKind::SpinEcho => 1,
            SequenceKind::Pdd(n) | SequenceKind::Cp(n) => n,
        };
        (1..=n)
            .map(|k| (2.0 * k as f64 - 1.0) * self.tau / (2.0 * n as f64))
            .collect()
    }
}

/// Physical constants entering the phase model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    /// Electron gyromagnetic ratio in rad s^-1 T^-1.
    pub gamma_e: f64,
}

/// Default gamma_e / 2 pi in Hz/T.
pub const GAMMA_E_DEFAULT_HZ_PER_T: f64 = 28.024e9;

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self {
            gamma_e: TAU * GAMMA_E_DEFAULT_HZ_PER_T,
        }
    }
}

impl PhysicsConstants {
    pub fn new(gamma_e: f64) -> Result<Self> {
        if !gamma_e.is_finite() || gamma_e <= 0.0 {
            return Err(Error::domain(format!(
                "PhysicsConstants: gamma_e must be > 0, got {gamma_e}"
            )));
        }
        Ok(Self { gamma_e })
    }
}

/// Ensemble photon model: `lambda = P * n_nv * eta` photons per shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel {
    n_nv: f64,
    eta: f64,
}

impl DetectionModel {
    pub fn new(n_nv: f64, eta: f64) -> Result<Self> {
        if !n_nv.is_finite() || n_nv < 1.0 {
            return Err(Error::domain(format!(
                "DetectionModel: sensor count must be >= 1, got {n_nv}"
            )));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain(format!(
                "DetectionModel: collection efficiency must be in (0, 1], got {eta}"
            )));
        }
        Ok(Self { n_nv, eta })
    }

    pub fn n_nv(&self) -> f64 {
        self.n_nv
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Peak expected photons per shot, n_nv * eta.
    pub fn lambda_max(&self) -> f64 {
        self.n_nv * self.eta
    }
}

/// Sign of the phase-accumulation modulation function at time `t`.
pub fn modulation_sign(seq: &PulseSequence, t: f64) -> Result<f64> {
    if !(0.0..=seq.tau()).contains(&t) {
        return Err(Error::domain(format!(
            "modulation_sign: t = {t} outside [0, {}]",
            seq.tau()
        )));
    }
    let n = match seq.kind() {
        SequenceKind::SpinEcho => 1,
        SequenceKind::Pdd(n) | SequenceKind::Cp(n) => n,
    } as f64;
    // flips at (2k-1) tau / (2n): count how many lie at or below t
    let flips = ((2.0 * n * t / seq.tau() + 1.0) / 2.0).floor().max(0.0) as u64;
    Ok(if flips.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// Acquired phase by direct integration:
/// `gamma_e B integral_0^tau sign(t) sin(omega t + phi_start) dt`.
///
/// Composite Gauss-Legendre over the sign-constant segments, with panel
/// lengths capped at a quarter field period. This is the ground-truth
/// path against which every closed form is checked.
pub fn acquired_phase_numeric(
    seq: &PulseSequence,
    field: &AcField,
    consts: &PhysicsConstants,
    phi_start: f64,
) -> f64 {
    if field.amplitude() == 0.0 {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_16();
    let quarter_period = 0.25 * field.period();
    let mut bounds = vec![0.0];
    bounds.extend(seq.flip_times());
    bounds.push(seq.tau());

    let mut total = 0.0;
    for (seg, w) in bounds.windows(2).enumerate() {
        let sign = if seg % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = (w[0], w[1]);
        let panels = ((b - a) / quarter_period).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            let mut acc = 0.0;
            for (x, wt) in nodes.iter().zip(weights.iter()) {
                let t = mid + 0.5 * h * x;
                acc += wt * (field.omega() * t + phi_start).sin();
            }
            total += sign * 0.5 * h * acc;
        }
    }
    consts.gamma_e * field.amplitude() * total
}

/// Dimensionless phase amplitude: the peak acquired phase is `4 theta`.
///
/// Spin echo uses the convention selected by
/// [`theta_closed_with`]'s default, which matches the direct integral.
pub fn theta_closed(seq: &PulseSequence, field: &AcField, consts: &PhysicsConstants) -> f64 {
    theta_closed_with(seq, field, consts, EchoThetaConvention::SinSqQuarter)
}

/// Spin-echo theta convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EchoThetaConvention {
    /// theta = (gamma B / omega) sin^2(omega tau / 4); agrees with the
    /// direct time-domain integral everywhere and peaks at tau equal to
    /// one full field period.
    #[default]
    SinSqQuarter,
    /// theta = (gamma B / omega) sin^2(omega tau / 2); legacy closed
    /// form retained for comparison runs. Vanishes at tau equal to one
    /// field period, where the integral is maximal.
    SinSqHalf,
}

/// Closed-form theta with an explicit spin-echo convention.
///
/// For the multi-pulse families, the value is the printed closed-form
/// amplitude divided by four, so that the peak phase is always `4 theta`.
/// Only the even-n Carr-Purcell form matches the direct integral under
/// this crate's flip-time placement; see the module tests for the
/// verified agreement and mismatch factors.
pub fn theta_closed_with(
    seq: &PulseSequence,
    field: &AcField,
    consts: &PhysicsConstants,
    convention: EchoThetaConvention,
) -> f64 {
    let scale = consts.gamma_e * field.amplitude() / field.omega();
    let x = field.omega() * seq.tau();
    match seq.kind() {
        SequenceKind::SpinEcho => match convention {
            EchoThetaConvention::SinSqQuarter => scale * (0.25 * x).sin().powi(2),
            EchoThetaConvention::SinSqHalf => scale * (0.5 * x).sin().powi(2),
        },
        SequenceKind::Pdd(n) => {
            0.25 * scale * (0.5 * x).sin() * (0.25 * x / n as f64).tan()
        }
        SequenceKind::Cp(n) => {
            0.5 * scale * (0.5 * x).sin() * (1.0 - 1.0 / (0.5 * x / n as f64).cos())
        }
    }
}

/// |0> population after the sequence: cos^2(2 theta cos psi).
pub fn population(theta: f64, psi: f64) -> f64 {
    let c = (2.0 * theta * psi.cos()).cos();
    c * c
}

/// Expected photons per shot for a given |0> population.
pub fn expected_photons(p: f64, det: &DetectionModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "expected_photons: population {p} outside [0, 1]"
        )));
    }
    Ok(p * det.lambda_max())
}

/// 16-point Gauss-Legendre nodes and weights on [-1, 1], computed once
/// by Newton iteration on the Legendre recurrence.
fn gauss_legendre_16() -> (&'static [f64; 16], &'static [f64; 16]) {
    static TABLE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    let (n, w) = TABLE.get_or_init(|| {
        let n = 16usize;
        let mut nodes = [0.0; 16];
        let mut weights = [0.0; 16];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let wt = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = wt;
            weights[n - 1 - i] = wt;
        }
        (nodes, weights)
    });
    (n, w)
}

/// Legendre polynomial P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
