//! Peak-width extraction and power-law fitting.

use crate::error::{Error, Result};

/// Result of a least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the OLS residual formula;
    /// zero (to rounding) for exactly linear data.
    pub slope_stderr: f64,
}

/// Full width at half maximum of a sampled peak.
///
/// The half-maximum level is measured from the `min(ys)` baseline up to
/// the peak, and each crossing is located by linear interpolation
/// between the bracketing samples.
pub fn fwhm(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::domain(format!(
            "fwhm: mismatched lengths {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::domain("fwhm: need at least 3 samples"));
    }
    if !xs.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::domain("fwhm: xs must be strictly ascending"));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::domain("fwhm: non-finite sample"));
    }

    let (peak, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let ymin = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if peak == 0 || peak == ys.len() - 1 {
        return Err(Error::PeakNotResolved(
            "maximum sits on the boundary of the sampled range".into(),
        ));
    }
    if ymax <= ymin {
        return Err(Error::PeakNotResolved("trace is flat".into()));
    }
    let half = ymin + 0.5 * (ymax - ymin);

    // walk left from the peak to the first sample at or below half-max
    let mut j = peak;
    while j > 0 && ys[j] > half {
        j -= 1;
    }
    if ys[j] > half {
        return Err(Error::PeakNotResolved(
            "no half-maximum crossing left of the peak".into(),
        ));
    }
    let left = interp_crossing(xs[j], ys[j], xs[j + 1], ys[j + 1], half);

    let mut j = peak;
    while j < ys.len() - 1 && ys[j] > half {
        j += 1;
    }
    if ys[j] > half {
        return Err(Error::PeakNotResolved(
            "no half-maximum crossing right of the peak".into(),
        ));
    }
    let right = interp_crossing(xs[j - 1], ys[j - 1], xs[j], ys[j], half);

    Ok(right - left)
}

fn interp_crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return 0.5 * (x0 + x1);
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Least-squares line through (ln x, ln y).
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::domain(format!(
            "loglog_fit: mismatched lengths {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::domain("loglog_fit: need at least 3 points"));
    }
    if xs.iter().chain(ys.iter()).any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::domain(
            "loglog_fit: all coordinates must be positive and finite",
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("linear fit: degenerate abscissa"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = (xs.len() - 2) as f64;
    let slope_stderr = if dof > 0.0 {
        (sse.max(0.0) / dof / sxx).sqrt()
    } else {
        0.0
    };
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn triangle_peak() {
        let xs: Vec<f64> = (0..=400).map(|i| -2.0 + i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (1.0 - x.abs()).max(0.0)).collect();
        let w = fwhm(&xs, &ys).unwrap();
        assert!((w - 1.0).abs() <= 0.01, "triangle fwhm {w}");
    }

    #[test]
    fn gaussian_peak() {
        let xs: Vec<f64> = (0..=2000).map(|i| -5.0 + i as f64 * 0.005).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x / 2.0).exp()).collect();
        let w = fwhm(&xs, &ys).unwrap();
        // 2 sqrt(2 ln 2), evaluated numerically
        let want = 2.0 * (2.0 * 2.0_f64.ln()).sqrt();
        assert!((want - 2.3548).abs() < 1e-3);
        assert!((w - want).abs() <= 0.01, "gaussian fwhm {w}");
    }

    #[test]
    fn monotone_trace_is_unresolved() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * 0.1).collect();
        match fwhm(&xs, &ys) {
            Err(Error::PeakNotResolved(_)) => {}
            other => panic!("expected peak-not-resolved, got {other:?}"),
        }
    }

    #[test]
    fn affine_rescale_invariance() {
        let xs: Vec<f64> = (0..=1000).map(|i| -3.0 + i as f64 * 0.006).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp() + 0.3).collect();
        let w0 = fwhm(&xs, &ys).unwrap();
        let ys2: Vec<f64> = ys.iter().map(|y| 7.5 * y - 2.0).collect();
        let w1 = fwhm(&xs, &ys2).unwrap();
        assert!((w0 - w1).abs() <= 1e-9);
    }

    #[test]
    fn exact_power_laws() {
        let xs: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let inv: Vec<f64> = xs.iter().map(|x| 7.0 / x).collect();
        let f = loglog_fit(&xs, &inv).unwrap();
        assert!((f.slope + 1.0).abs() <= 1e-12);
        assert!(f.slope_stderr.abs() <= 1e-12);
        assert!(f.slope_stderr >= 0.0);

        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let f = loglog_fit(&xs, &sq).unwrap();
        assert!((f.slope - 2.0).abs() <= 1e-12);
        assert!(f.slope_stderr.abs() <= 1e-12);
    }

    #[test]
    fn noisy_power_law_recovers_slope() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20250810);
        let xs: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| (1.0 / x) * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
            .collect();
        let f = loglog_fit(&xs, &ys).unwrap();
        assert!((f.slope + 1.0).abs() <= 0.05, "slope {}", f.slope);
        assert!(f.slope_stderr > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(loglog_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0, -3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]).is_err());
    }
}
