//! Single-bin periodogram evaluation.

use crate::error::{Error, Result};

/// |sum_k s_k exp(-i 2 pi nu k / N)|^2 for one integer bin `nu`.
///
/// The phase `2 pi nu k / N` is reduced with exact integer arithmetic
/// before the trig call, so accuracy does not degrade with long inputs.
pub fn periodogram_bin(samples: &[f64], nu: usize) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::domain("periodogram_bin: empty sequence"));
    }
    if nu >= n {
        return Err(Error::domain(format!(
            "periodogram_bin: bin {nu} out of range for {n} samples"
        )));
    }
    let mut re = 0.0;
    let mut im = 0.0;
    let scale = 2.0 * std::f64::consts::PI / n as f64;
    for (k, &s) in samples.iter().enumerate() {
        let idx = ((nu as u64) * (k as u64)) % (n as u64);
        let angle = scale * idx as f64;
        re += s * angle.cos();
        im -= s * angle.sin();
    }
    Ok(re * re + im * im)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal double-sum form, kept as the O(N^2) cross-check.
    fn double_sum(samples: &[f64], nu: usize) -> f64 {
        let n = samples.len() as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &sk) in samples.iter().enumerate() {
            for (h, &sh) in samples.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * nu as f64 * (h as f64 - k as f64) / n;
                re += sk * sh * phase.cos();
                im += sk * sh * phase.sin();
            }
        }
        assert!(im.abs() < 1e-9 * re.abs().max(1.0));
        re
    }

    #[test]
    fn dc_bin_of_constant() {
        let s = vec![3.0; 17];
        assert!((periodogram_bin(&s, 0).unwrap() - (17.0_f64 * 3.0).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn nonzero_bin_of_constant_vanishes() {
        let s = vec![2.5; 32];
        let dc = (32.0 * 2.5_f64).powi(2);
        for nu in 1..32 {
            assert!(periodogram_bin(&s, nu).unwrap() <= 1e-9 * dc);
        }
    }

    #[test]
    fn cosine_line() {
        // s_k = cos(2 pi 2k/16): bin 2 carries (N/2)^2.
        let n = 16;
        let s: Vec<f64> = (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * 2.0 * k as f64 / n as f64).cos())
            .collect();
        let got = periodogram_bin(&s, 2).unwrap();
        let want = double_sum(&s, 2);
        assert!((want - 64.0).abs() < 1e-9);
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn matches_double_sum_on_random_data() {
        // fixed linear-congruential data; no RNG dependency needed here
        let mut x = 1u64;
        let s: Vec<f64> = (0..50)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (x >> 11) as f64 / (1u64 << 53) as f64 * 10.0
            })
            .collect();
        for nu in [0usize, 1, 7, 24, 49] {
            let a = periodogram_bin(&s, nu).unwrap();
            let b = double_sum(&s, nu);
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn constant_offset_invariance_for_nonzero_bins() {
        let s: Vec<f64> = (0..40).map(|k| ((k * k) % 13) as f64).collect();
        let shifted: Vec<f64> = s.iter().map(|v| v + 123.456).collect();
        for nu in 1..40 {
            let a = periodogram_bin(&s, nu).unwrap();
            let b = periodogram_bin(&shifted, nu).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn parseval_identity() {
        let s: Vec<f64> = (0..33).map(|k| (k as f64 * 0.7).sin() + 0.2).collect();
        let total: f64 = (0..33).map(|nu| periodogram_bin(&s, nu).unwrap()).sum();
        let energy: f64 = s.iter().map(|v| v * v).sum::<f64>() * 33.0;
        assert!((total - energy).abs() <= 1e-9 * energy);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(periodogram_bin(&[], 0).is_err());
        assert!(periodogram_bin(&[1.0, 2.0], 2).is_err());
    }
}
