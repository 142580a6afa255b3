//! Bessel functions of the first kind.
//!
//! Self-contained evaluation with no special-function dependency:
//!
//! * power series for small arguments,
//! * normalized downward (Miller) recurrence for the mid range and for
//!   arbitrary integer order,
//! * Hankel asymptotic expansion for very large arguments.
//!
//! The checked public entry points are [`bessel_j0`] and [`bessel_jn`];
//! the crate-internal `j0`/`jn` helpers are total over finite inputs and
//! are used on hot paths after the inputs have been validated once.

use crate::error::{Error, Result};

/// Largest |x| accepted by the checked entry points. Sweeps map field
/// amplitudes up to the mT range into Bessel arguments of a few hundred,
/// so the accepted range is kept well above that.
pub const MAX_ARG: f64 = 1.0e3;

/// Largest order accepted by [`bessel_jn`].
pub const MAX_ORDER: u32 = 100;

const SERIES_CUTOFF: f64 = 7.0;
const ASYMPTOTIC_CUTOFF: f64 = 600.0;

/// J0(x), validated.
///
/// Relative accuracy is at the 1e-13 level away from zeros of J0 for
/// |x| <= `MAX_ARG`; even symmetry J0(-x) = J0(x) holds exactly.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j0: non-finite argument {x}")));
    }
    if x.abs() > MAX_ARG {
        return Err(Error::domain(format!(
            "bessel_j0: |x| = {} exceeds supported range {MAX_ARG}",
            x.abs()
        )));
    }
    Ok(j0(x))
}

/// Jn(x) for integer order `n`, validated.
///
/// Absolute accuracy is at the 1e-12 level on the accepted range; the
/// downward recurrence keeps the evaluation stable for n >> x.
pub fn bessel_jn(n: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_jn: non-finite argument {x}")));
    }
    if n > MAX_ORDER {
        return Err(Error::domain(format!(
            "bessel_jn: order {n} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    if x.abs() > MAX_ARG {
        return Err(Error::domain(format!(
            "bessel_jn: |x| = {} exceeds supported range {MAX_ARG}",
            x.abs()
        )));
    }
    Ok(jn(n, x))
}

/// Unchecked total J0 over finite inputs.
pub(crate) fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_CUTOFF {
        j0_series(ax)
    } else if ax <= ASYMPTOTIC_CUTOFF {
        miller_jn(0, ax)
    } else {
        j0_asymptotic(ax)
    }
}

/// Unchecked total Jn over finite inputs, any order.
pub(crate) fn jn(n: u32, x: f64) -> f64 {
    if n == 0 {
        return j0(x);
    }
    let ax = x.abs();
    // J_n(-x) = (-1)^n J_n(x)
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    if ax == 0.0 {
        return 0.0;
    }
    // For n far above the turning point the value underflows the series
    // leading term; short-circuit to avoid a pointless long recurrence.
    if ax < 1.0 && n > 40 {
        return 0.0; // (x/2)^n / n! < 1e-60 here
    }
    sign * miller_jn(n as usize, ax)
}

/// Ascending power series, used for |x| <= SERIES_CUTOFF.
fn j0_series(ax: f64) -> f64 {
    let z = 0.25 * ax * ax;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0; // Kahan compensation
    let mut m = 1.0;
    loop {
        term *= -z / (m * m);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-3) {
            return sum;
        }
        m += 1.0;
        if m > 60.0 {
            return sum;
        }
    }
}

/// Normalized downward recurrence (Miller's algorithm).
///
/// Returns J_target(x) for x > 0. The start order sits far enough above
/// max(target, x) that the seeded tail is negligible, and the whole
/// column is normalized with J0 + 2*sum_{k>=1} J_{2k} = 1.
fn miller_jn(target: usize, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let above = (14.0 * x.cbrt()).ceil() as usize + 24;
    let mut m = target.max(x.ceil() as usize) + above;
    if m % 2 == 1 {
        m += 1;
    }

    let inv_x = 1.0 / x;
    let mut fp = 0.0_f64; // J_{k+1} (scaled)
    let mut f = 1e-300_f64; // J_k (scaled)
    let mut norm = 0.0_f64; // J0 + 2*sum of even orders (scaled)
    let mut result = 0.0_f64;

    let mut k = m;
    loop {
        let fm = (2.0 * (k as f64 + 1.0)) * inv_x * f - fp;
        fp = f;
        f = fm;
        // f now holds J_k (scaled); fp holds J_{k+1}
        if k.is_multiple_of(2) {
            norm += if k == 0 { f } else { 2.0 * f };
        }
        if k == target {
            result = f;
        }
        if k == 0 {
            break;
        }
        k -= 1;
        if f.abs() > 1e280 {
            fp *= 1e-280;
            f *= 1e-280;
            norm *= 1e-280;
            result *= 1e-280;
        }
    }
    result / norm
}

/// Two-sided Hankel expansion for very large |x|.
fn j0_asymptotic(ax: f64) -> f64 {
    let z2 = 1.0 / (ax * ax);
    // P0 and Q0 coefficients c_m = prod (-(2j-1)^2) / (m! 8^m) for nu = 0
    let p = 1.0 + z2 * (-9.0 / 128.0 + z2 * (3675.0 / 32768.0 + z2 * (-2_401_245.0 / 4_194_304.0)));
    let q = (1.0 / ax)
        * (-0.125 + z2 * (75.0 / 1024.0 + z2 * (-59535.0 / 262_144.0)));
    let chi = ax - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// First `count` positive zeros of J_n, by scan and bisection.
pub fn bessel_jn_zeros(n: u32, count: usize) -> Result<Vec<f64>> {
    if n > MAX_ORDER {
        return Err(Error::domain(format!(
            "bessel_jn_zeros: order {n} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    let mut zeros = Vec::with_capacity(count);
    let mut x = (n as f64).max(1e-3);
    let step = 0.1;
    let mut prev = jn(n, x);
    while zeros.len() < count {
        let x_next = x + step;
        if x_next > MAX_ARG {
            return Err(Error::domain(format!(
                "bessel_jn_zeros: fewer than {count} zeros of J{n} below {MAX_ARG}"
            )));
        }
        let cur = jn(n, x_next);
        if prev == 0.0 {
            zeros.push(x);
        } else if prev.signum() != cur.signum() && cur != 0.0 {
            let (mut lo, mut hi) = (x, x_next);
            let mut flo = prev;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = jn(n, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo.signum() == fm.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 * hi.max(1.0) {
                    break;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        prev = cur;
        x = x_next;
    }
    Ok(zeros)
}
