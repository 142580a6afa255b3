//! Poisson sampling: multiplicative inversion for small rates, the
//! transformed-rejection (PTRS) scheme with squeeze for large rates.

use std::sync::OnceLock;

use rand::Rng;

const INVERSION_CUTOFF: f64 = 10.0;

/// One Poisson draw with rate `lambda` (>= 0, finite).
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    debug_assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda == 0.0 {
        0
    } else if lambda < INVERSION_CUTOFF {
        inversion(rng, lambda)
    } else {
        transformed_rejection(rng, lambda)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let floor = (-lambda).exp();
    let mut prod: f64 = rng.random();
    let mut k = 0u64;
    while prod > floor {
        prod *= rng.random::<f64>();
        k += 1;
    }
    k
}

/// Transformed rejection with squeeze; valid for lambda >= 10.
fn transformed_rejection<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);

    loop {
        let u = rng.random::<f64>() - 0.5;
        let v = rng.random::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= k * loglam - lambda - ln_factorial(k as u64)
        {
            return k as u64;
        }
    }
}

/// ln(k!), table below 128 and a Stirling series above.
fn ln_factorial(k: u64) -> f64 {
    static TABLE: OnceLock<[f64; 128]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0.0; 128];
        let mut acc = 0.0;
        for (i, slot) in t.iter_mut().enumerate().skip(1) {
            acc += (i as f64).ln();
            *slot = acc;
        }
        t
    });
    if (k as usize) < table.len() {
        return table[k as usize];
    }
    let x = k as f64;
    let x2 = x * x;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * x.ln() - x
        + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x2 * x2 * x)
}
