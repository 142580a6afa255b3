//! Exact moment algebra under Poisson photon statistics: expectation and
//! variance of the correlation (variance-of-counts) estimator and of the
//! synchronized-readout periodogram, plus the SNR helper.
//!
//! Both noise variances are evaluated through per-column photon sums,
//! which reduces the printed multi-index sums to O(grid) work without
//! changing their value.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Matrix of Poisson rates, one per (delay index, phase index) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    /// Row-major storage: `values[i * n_phi + k]`.
    values: Vec<f64>,
    n_s: usize,
    n_phi: usize,
}

impl LambdaGrid {
    pub fn new(n_s: usize, n_phi: usize, values: Vec<f64>) -> Result<Self> {
        if n_s < 1 || n_phi < 1 {
            return Err(Error::domain("LambdaGrid: dimensions must be >= 1"));
        }
        if values.len() != n_s * n_phi {
            return Err(Error::domain(format!(
                "LambdaGrid: expected {} values, got {}",
                n_s * n_phi,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("LambdaGrid: rates must be finite and >= 0"));
        }
        Ok(Self { values, n_s, n_phi })
    }

    pub fn from_fn(n_s: usize, n_phi: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(n_s * n_phi);
        for i in 0..n_s {
            for k in 0..n_phi {
                values.push(f(i, k));
            }
        }
        Self::new(n_s, n_phi, values)
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_phi + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rates in acquisition order for a given flattening: delay-major
    /// keeps the delay index fastest, phase-major the phase index.
    pub fn flattened(&self, phase_fastest: bool) -> Vec<f64> {
        if phase_fastest {
            self.values.clone()
        } else {
            let mut out = Vec::with_capacity(self.values.len());
            for k in 0..self.n_phi {
                for i in 0..self.n_s {
                    out.push(self.get(i, k));
                }
            }
            out
        }
    }

    /// Per-phase-column photon sums a_k = sum_i lambda_{i,k}.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_phi];
        for row in self.values.chunks_exact(self.n_phi) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// Raw Poisson moments E[x^k] for k in 1..=4.
pub fn poisson_raw_moment(lambda: f64, k: u32) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::domain(format!(
            "poisson_raw_moment: rate must be finite and >= 0, got {lambda}"
        )));
    }
    match k {
        1 => Ok(lambda),
        2 => Ok(lambda * (lambda + 1.0)),
        3 => Ok(lambda * (lambda * lambda + 3.0 * lambda + 1.0)),
        4 => Ok(lambda * (lambda * lambda * lambda + 6.0 * lambda * lambda + 7.0 * lambda + 1.0)),
        _ => Err(Error::domain(format!(
            "poisson_raw_moment: order {k} outside 1..=4"
        ))),
    }
}

/// Expected value of the variance-of-counts estimator over the grid.
pub fn corr_signal_expectation(grid: &LambdaGrid) -> f64 {
    let n_phi = grid.n_phi() as f64;
    let n_s = grid.n_s() as f64;
    let a = grid.column_sums();
    let total: f64 = a.iter().sum();
    let sum_sq: f64 = a.iter().map(|v| v * v).sum();
    ((n_phi - 1.0) * total + n_phi * sum_sq - total * total) / (n_phi * n_phi * n_s * n_s)
}

/// Variance of the variance-of-counts estimator over the grid.
///
/// A result more negative than -1e-9 of the term scale signals a
/// transcription bug and is reported as an inconsistency; rounding-level
/// negatives are clamped to zero.
pub fn corr_noise_variance(grid: &LambdaGrid) -> Result<f64> {
    let (value, scale) = corr_noise_terms(grid);
    if value < -1e-9 * scale {
        return Err(Error::Inconsistency(format!(
            "corr_noise_variance: negative variance {value} at term scale {scale}"
        )));
    }
    Ok(value.max(0.0))
}

fn corr_noise_terms(grid: &LambdaGrid) -> (f64, f64) {
    let np = grid.n_phi() as f64;
    let ns = grid.n_s() as f64;
    let a = grid.column_sums();
    let total: f64 = a.iter().sum();
    let s2: f64 = a.iter().map(|v| v * v).sum();
    let s3: f64 = a.iter().map(|v| v * v * v).sum();

    let denom = np.powi(4) * ns.powi(4);
    let terms = [
        (np - 1.0) * (np - 1.0) * total,
        (6.0 * np * np - 8.0 * np) * s2,
        4.0 * np * np * s3,
        (6.0 - 4.0 * np) * total * total,
        -8.0 * np * total * s2,
        4.0 * total * total * total,
    ];
    let value: f64 = terms.iter().sum::<f64>() / denom;
    let scale: f64 = terms.iter().map(|t| t.abs()).sum::<f64>() / denom;
    (value, scale)
}

/// DFT bin sums of a rate sequence: z_m = sum_k lambda_k e^{-i m alpha k}
/// with alpha = 2 pi nu / N, for m = 1, 2. Exact integer phase reduction.
fn rate_bin_sums(lambdas: &[f64], nu: usize) -> ((f64, f64), (f64, f64)) {
    let n = lambdas.len() as u64;
    let scale = TAU / n as f64;
    let (mut re1, mut im1, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
    for (k, &l) in lambdas.iter().enumerate() {
        let idx1 = (nu as u64 * k as u64) % n;
        let a1 = scale * idx1 as f64;
        re1 += l * a1.cos();
        im1 -= l * a1.sin();
        let idx2 = (2 * nu as u64 * k as u64) % n;
        let a2 = scale * idx2 as f64;
        re2 += l * a2.cos();
        im2 -= l * a2.sin();
    }
    ((re1, im1), (re2, im2))
}

fn check_bin(lambdas: &[f64], nu: usize, what: &str) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::domain(format!("{what}: empty rate sequence")));
    }
    if nu >= lambdas.len() {
        return Err(Error::domain(format!(
            "{what}: bin {nu} out of range for {} rates",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::domain(format!("{what}: rates must be finite and >= 0")));
    }
    Ok(())
}

/// Expected periodogram bin: |sum_k lambda_k e^{-i alpha k}|^2 + sum_k lambda_k.
pub fn sync_signal_expectation(lambdas: &[f64], nu: usize) -> Result<f64> {
    check_bin(lambdas, nu, "sync_signal_expectation")?;
    let ((re1, im1), _) = rate_bin_sums(lambdas, nu);
    let total: f64 = lambdas.iter().sum();
    Ok(re1 * re1 + im1 * im1 + total)
}

/// Variance of the periodogram bin under Poisson counts.
///
/// Six-term closed form in the first and second DFT bin sums of the
/// rates; the one cross term enters through its real part, which is the
/// combination the conjugate-paired index sums produce.
pub fn sync_noise_variance(lambdas: &[f64], nu: usize) -> Result<f64> {
    check_bin(lambdas, nu, "sync_noise_variance")?;
    let ((re1, im1), (re2, im2)) = rate_bin_sums(lambdas, nu);
    let total: f64 = lambdas.iter().sum();
    let z1_sq = re1 * re1 + im1 * im1;
    let z2_sq = re2 * re2 + im2 * im2;
    // Re[z1^2 conj(z2)]
    let cross = (re1 * re1 - im1 * im1) * re2 + 2.0 * re1 * im1 * im2;

    let terms = [
        total,
        4.0 * z1_sq,
        total * total,
        z2_sq,
        2.0 * cross,
        2.0 * total * z1_sq,
    ];
    let value: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if value < -1e-9 * scale {
        return Err(Error::Inconsistency(format!(
            "sync_noise_variance: negative variance {value} at term scale {scale}"
        )));
    }
    Ok(value.max(0.0))
}

/// Signal-to-noise ratio mu / sigma.
pub fn snr(signal_mean: f64, noise_std: f64) -> Result<f64> {
    if !noise_std.is_finite() || noise_std <= 0.0 {
        return Err(Error::domain(format!(
            "snr: noise std must be > 0, got {noise_std}"
        )));
    }
    Ok(signal_mean / noise_std)
}
