//! Numerical kernels: Bessel functions, periodogram bins, peak widths,
//! and power-law fits. Everything here is pure and stateless.

mod bessel;
mod fit;
mod periodogram;

pub use bessel::{bessel_j0, bessel_jn, bessel_jn_zeros, MAX_ARG, MAX_ORDER};
pub(crate) use bessel::{j0, jn};
pub use fit::{fwhm, loglog_fit, FitResult};
pub use periodogram::periodogram_bin;
