//! Closed-form statistics of the population signal over the AC field's
//! random initial phase: means, variances, multi-measurement
//! correlation patterns, finite-phase averages, and a readout-fidelity
//! utility.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numerics::{j0, jn};
use crate::signal::population;

/// Parameters of an N_s-measurement correlation pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSettings {
    /// Dimensionless phase amplitude (peak acquired phase is 4 theta).
    pub theta: f64,
    /// Measurements per correlation group.
    pub n_s: u32,
    /// AC phase advance per delay step, omega * t_d, in rad.
    pub omega_td: f64,
}

impl CorrelationSettings {
    pub fn new(theta: f64, n_s: u32, omega_td: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::domain(format!(
                "CorrelationSettings: theta must be >= 0, got {theta}"
            )));
        }
        if n_s < 1 {
            return Err(Error::domain("CorrelationSettings: n_s must be >= 1"));
        }
        if !omega_td.is_finite() {
            return Err(Error::domain("CorrelationSettings: non-finite omega_td"));
        }
        Ok(Self { theta, n_s, omega_td })
    }
}

/// Phase-averaged population: 1/2 + 1/2 J0(4 theta).
pub fn mean_population(theta: f64) -> f64 {
    0.5 + 0.5 * j0(4.0 * theta)
}

/// Phase-averaged population variance:
/// 1/8 + 1/8 J0(8 theta) - 1/4 J0^2(4 theta).
pub fn var_population(theta: f64) -> f64 {
    0.125 + 0.125 * j0(8.0 * theta) - 0.25 * j0(4.0 * theta).powi(2)
}

/// Variance of the mean of two measurements delayed by t_d.
pub fn var_two(theta: f64, omega_td: f64) -> f64 {
    let j4 = j0(4.0 * theta);
    1.0 / 16.0 + j0(8.0 * theta) / 16.0 - 0.25 * j4 * j4
        + (j0(8.0 * theta * (0.5 * omega_td).sin()) + j0(8.0 * theta * (0.5 * omega_td).cos()))
            / 16.0
}

/// Variance of the mean of N_s delayed measurements, evaluated with the
/// (N_s - i)-weighted single sum; O(N_s) Bessel calls.
pub fn var_ns(settings: &CorrelationSettings) -> f64 {
    let th = settings.theta;
    let n = settings.n_s as f64;
    let u = settings.omega_td;
    let j4sq = j0(4.0 * th).powi(2);
    let mut v = (1.0 + j0(8.0 * th) - 2.0 * j4sq) / (8.0 * n) - (n - 1.0) / (4.0 * n) * j4sq;
    let mut tail = 0.0;
    for i in 1..settings.n_s {
        let w = n - i as f64;
        let arg = 0.5 * i as f64 * u;
        tail += w * (j0(8.0 * th * arg.sin()) + j0(8.0 * th * arg.cos()));
    }
    v += 2.0 * tail / (8.0 * n * n);
    v
}

/// Interference (N-slit) approximation of [`var_ns`], valid for
/// theta up to about 1: `max_var * sin^2(N u) / (N^2 sin^2 u)` with the
/// removable singularity at u = m pi evaluated as its limit.
pub fn var_ns_approx(settings: &CorrelationSettings) -> f64 {
    let n = settings.n_s as f64;
    let u = settings.omega_td;
    let peak = max_var(settings.theta);
    let s = u.sin();
    if s.abs() < 1e-12 {
        return peak;
    }
    let ratio = (n * u).sin() / (n * s);
    peak * ratio * ratio
}

/// Peak of the correlation pattern, 1/8 (1 + J0(8 theta) - 2 J0^2(4 theta)).
///
/// Independent of the group size: [`var_ns`] attains this value at every
/// correlated delay omega t_d = m pi, for any N_s.
pub fn max_var(theta: f64) -> f64 {
    (1.0 + j0(8.0 * theta) - 2.0 * j0(4.0 * theta).powi(2)) / 8.0
}

/// Mean population over a finite comb of N_phi equally spaced phases.
///
/// The sequence's own phase offset is absorbed into `phi0`.
pub fn finite_phase_mean(theta: f64, phi0: f64, n_phi: u32) -> Result<f64> {
    if n_phi < 1 {
        return Err(Error::domain("finite_phase_mean: n_phi must be >= 1"));
    }
    let mut sum = 0.0;
    for j in 0..n_phi {
        sum += population(theta, phi0 + TAU * j as f64 / n_phi as f64);
    }
    Ok(sum / n_phi as f64)
}

/// Population as a truncated harmonic series:
/// 1/2 (1 + J0(4 theta)) + sum_n Jn(4 theta) cos(n pi/2) cos(n psi).
///
/// Odd orders carry a vanishing coefficient and are skipped.
pub fn bessel_expansion_population(theta: f64, psi: f64, n_max: u32) -> Result<f64> {
    if n_max < 1 {
        return Err(Error::domain(
            "bessel_expansion_population: n_max must be >= 1",
        ));
    }
    let x = 4.0 * theta;
    let mut sum = 0.5 * (1.0 + j0(x));
    let mut n = 2;
    while n <= n_max {
        // cos(n pi / 2) = +1 for n = 0 mod 4, -1 for n = 2 mod 4
        let coeff = if n % 4 == 0 { 1.0 } else { -1.0 };
        sum += coeff * jn(n, x) * (n as f64 * psi).cos();
        n += 2;
    }
    Ok(sum)
}

/// Generalized readout-fidelity metric
/// sqrt(1 + 2 (sigma0^2 + sigma1^2) / (alpha0 - alpha1)^2).
pub fn readout_fidelity(alpha0: f64, alpha1: f64, sigma0: f64, sigma1: f64) -> Result<f64> {
    if alpha0 == alpha1 {
        return Err(Error::domain(
            "readout_fidelity: alpha0 = alpha1 leaves the states indistinguishable",
        ));
    }
    if sigma0 < 0.0 || sigma1 < 0.0 {
        return Err(Error::domain("readout_fidelity: sigmas must be >= 0"));
    }
    let d = alpha0 - alpha1;
    Ok((1.0 + 2.0 * (sigma0 * sigma0 + sigma1 * sigma1) / (d * d)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use proptest::prelude::*;

    /// Trapezoid quadrature over phi0 of Var[(1/N) sum_i P_i]; the
    /// integrand is smooth and periodic, so this converges spectrally.
    fn var_ns_quadrature(theta: f64, n_s: u32, omega_td: f64, nodes: usize) -> f64 {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for m in 0..nodes {
            let phi = TAU * m as f64 / nodes as f64;
            let mut x = 0.0;
            for i in 0..n_s {
                x += population(theta, phi + i as f64 * omega_td);
            }
            x /= n_s as f64;
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / nodes as f64;
        sum_sq / nodes as f64 - mean * mean
    }

    /// Literal double-sum form of the N_s-measurement variance.
    fn var_ns_double_sum(theta: f64, n_s: u32, u: f64) -> f64 {
        let n = n_s as f64;
        let mut s = 0.0;
        for i in 0..n_s {
            for j in 0..n_s {
                let arg = 0.5 * (i as f64 - j as f64) * u;
                s += j0(8.0 * theta * arg.sin()) + j0(8.0 * theta * arg.cos());
            }
        }
        s / (8.0 * n * n) - 0.25 * j0(4.0 * theta).powi(2)
    }

    #[test]
    fn mean_population_examples() {
        assert_eq!(mean_population(0.0), 1.0);
        // 4 theta at the first root of J0
        let th = 2.404825557695773 / 4.0;
        assert!((mean_population(th) - 0.5).abs() <= 1e-10);
        assert!((mean_population(0.25) - 0.8825988432789833).abs() <= 1e-13);
    }

    #[test]
    fn var_population_examples() {
        assert!(var_population(0.0).abs() < 1e-15);
        // quadrature oracle at theta = 0.5 (N_s = 1 reduces to Var(P))
        let q = var_ns_quadrature(0.5, 1, 0.0, 4096);
        assert!((var_population(0.5) - q).abs() <= 1e-9);
        // large-theta limit 1/8
        assert!((var_population(20.0) - 0.125).abs() <= 0.02);
    }

    #[test]
    fn var_two_reduces_and_matches_quadrature() {
        for th in [0.1, 0.5, 1.3] {
            assert!((var_two(th, PI) - var_population(th)).abs() <= 1e-14);
        }
        assert!(var_two(0.0, 0.7).abs() < 1e-15);
        let settings = CorrelationSettings::new(0.5, 2, PI / 2.0).unwrap();
        let q = var_ns_quadrature(0.5, 2, PI / 2.0, 4096);
        assert!((var_two(0.5, PI / 2.0) - q).abs() <= 1e-9);
        assert!((var_ns(&settings) - var_two(0.5, PI / 2.0)).abs() <= 1e-14);
    }

    #[test]
    fn var_ns_degenerate_cases() {
        let s = CorrelationSettings::new(0.7, 1, 1.234).unwrap();
        assert!((var_ns(&s) - var_population(0.7)).abs() <= 1e-15);
        let s = CorrelationSettings::new(0.7, 9, 0.0).unwrap();
        assert!((var_ns(&s) - var_population(0.7)).abs() <= 1e-14);
    }

    #[test]
    fn var_ns_equals_double_sum() {
        for &(th, n, u) in &[
            (0.3, 3u32, PI / 3.0),
            (1.1, 7, 0.9),
            (2.5, 12, 2.2),
            (0.05, 20, 5.9),
        ] {
            let s = CorrelationSettings::new(th, n, u).unwrap();
            let a = var_ns(&s);
            let b = var_ns_double_sum(th, n, u);
            assert!((a - b).abs() <= 1e-12, "({th},{n},{u}): {a} vs {b}");
        }
    }

    #[test]
    fn var_ns_matches_quadrature_oracle() {
        let s = CorrelationSettings::new(0.3, 3, PI / 3.0).unwrap();
        let q = var_ns_quadrature(0.3, 3, PI / 3.0, 4096);
        assert!((var_ns(&s) - q).abs() <= 1e-9);
    }

    #[test]
    fn approx_limit_zero_and_band() {
        let peak = CorrelationSettings::new(0.4, 6, PI).unwrap();
        assert!((var_ns_approx(&peak) - max_var(0.4)).abs() <= 1e-12);
        let n = 8u32;
        let zero = CorrelationSettings::new(0.4, n, PI * (1.0 + 1.0 / n as f64)).unwrap();
        assert!(var_ns_approx(&zero).abs() <= 1e-12);
        // measured agreement band at a representative small-theta point
        let s = CorrelationSettings::new(0.2, 5, PI + 0.1).unwrap();
        let a = var_ns_approx(&s);
        let e = var_ns(&s);
        assert!((a - e).abs() <= 0.05 * e.abs(), "approx {a} vs exact {e}");
    }

    #[test]
    fn max_var_identities() {
        assert!(max_var(0.0).abs() < 1e-15);
        for n in [1u32, 3, 7, 20] {
            let s = CorrelationSettings::new(0.5, n, PI).unwrap();
            assert!((max_var(0.5) - var_ns(&s)).abs() <= 1e-10, "n = {n}");
        }
        // algebraically the same expression as the single-measurement variance
        for th in [0.0, 0.2, 0.5, 3.3] {
            assert!((max_var(th) - var_population(th)).abs() <= 1e-15);
        }
    }

    #[test]
    fn finite_phase_mean_cases() {
        assert_eq!(finite_phase_mean(0.0, 0.3, 5).unwrap(), 1.0);
        let m = finite_phase_mean(0.4, 0.7, 64).unwrap();
        assert!((m - mean_population(0.4)).abs() <= 1e-6);
        let single = finite_phase_mean(0.4, 0.9, 1).unwrap();
        assert!((single - population(0.4, 0.9)).abs() < 1e-15);
        assert!(finite_phase_mean(0.4, 0.9, 0).is_err());
    }

    #[test]
    fn finite_phase_mean_converges_once_aliases_are_negligible() {
        // The comb average differs from the continuous mean only through
        // harmonics at multiples of n_phi (even multiples when n_phi is
        // odd, since odd harmonics vanish identically). It is accurate
        // to 1e-4 once the first surviving alias order clears the
        // oscillatory region of Jn(4 theta).
        let mut theta: f64 = 0.25;
        while theta <= 5.0 {
            for raw in [0u32, 1, 5] {
                // any-parity bound: n_phi >= 4 theta + 2 (4 theta)^(1/3) + 8
                let x = 4.0 * theta;
                let n_phi = (x + 2.0 * x.cbrt() + 8.0).ceil() as u32 + raw;
                for phi0 in [0.0, 0.31, 2.9] {
                    let err =
                        (finite_phase_mean(theta, phi0, n_phi).unwrap() - mean_population(theta)).abs();
                    assert!(err <= 1e-4, "theta={theta} n_phi={n_phi}: err {err}");
                }
                // odd comb sizes push the first alias to 2 n_phi and
                // already satisfy the small bound ceil(2 theta) + 8
                let mut n_odd = (2.0 * theta).ceil() as u32 + 8 + raw;
                if n_odd.is_multiple_of(2) {
                    n_odd += 1;
                }
                for phi0 in [0.0, 0.31, 2.9] {
                    let err =
                        (finite_phase_mean(theta, phi0, n_odd).unwrap() - mean_population(theta)).abs();
                    assert!(err <= 1e-4, "odd theta={theta} n_phi={n_odd}: err {err}");
                }
            }
            theta += 0.25;
        }
    }

    #[test]
    fn bessel_expansion_matches_population() {
        assert_eq!(bessel_expansion_population(0.0, 0.4, 10).unwrap(), 1.0);
        let got = bessel_expansion_population(0.5, 1.1, 40).unwrap();
        assert!((got - population(0.5, 1.1)).abs() <= 1e-10);
        // convergence bound: n_max >= 4 theta e + 20
        for th in [0.3_f64, 1.0, 2.5, 5.0] {
            let n_max = (4.0 * th * std::f64::consts::E).ceil() as u32 + 20;
            for psi in [0.0, 0.9, 2.2] {
                let got = bessel_expansion_population(th, psi, n_max).unwrap();
                assert!(
                    (got - population(th, psi)).abs() <= 1e-10,
                    "theta={th} psi={psi}"
                );
            }
        }
    }

    #[test]
    fn bessel_expansion_odd_terms_are_absent() {
        // Truncating just below an odd order changes nothing.
        for th in [0.4, 1.7] {
            let a = bessel_expansion_population(th, 0.77, 12).unwrap();
            let b = bessel_expansion_population(th, 0.77, 13).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn readout_fidelity_cases() {
        assert_eq!(readout_fidelity(0.9, 0.1, 0.0, 0.0).unwrap(), 1.0);
        let v = readout_fidelity(1.0, 0.0, 0.5, 0.5).unwrap();
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!(readout_fidelity(0.5, 0.5, 0.1, 0.1).is_err());
        assert!(readout_fidelity(1.0, 0.0, -0.1, 0.1).is_err());
    }

    #[test]
    fn periodicity_and_symmetry_on_grid() {
        let mut th = 0.0;
        while th <= 5.0 {
            for n in [2u32, 5, 10] {
                let mut u = 0.0;
                while u <= TAU {
                    let s = CorrelationSettings::new(th, n, u).unwrap();
                    let v = var_ns(&s);
                    assert!(v >= -1e-12, "negative variance at ({th},{n},{u}): {v}");
                    let sp = CorrelationSettings::new(th, n, u + PI).unwrap();
                    assert!((var_ns(&sp) - v).abs() <= 1e-12);
                    let sm = CorrelationSettings::new(th, n, -u).unwrap();
                    assert!((var_ns(&sm) - v).abs() <= 1e-12);
                    u += 0.37;
                }
            }
            th += 0.61;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn variance_nonnegative(theta in 0.0..5.0f64, n_s in 1u32..24, u in -7.0..7.0f64) {
            let s = CorrelationSettings::new(theta, n_s, u).unwrap();
            prop_assert!(var_ns(&s) >= -1e-12);
            prop_assert!(var_population(theta) >= -1e-12);
            prop_assert!(var_two(theta, u) >= -1e-12);
        }

        #[test]
        fn correlated_condition_hits_peak(theta in 0.0..3.0f64, n_s in 1u32..24, m in 0i32..6) {
            let s = CorrelationSettings::new(theta, n_s, m as f64 * PI).unwrap();
            prop_assert!((var_ns(&s) - max_var(theta)).abs() <= 1e-10);
        }
    }
}
