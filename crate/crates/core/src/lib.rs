//! Simulator and analytics toolkit for spin-qubit correlation sensing of
//! coherent AC magnetic fields.
//!
//! The crate models an ensemble of optically read spin qubits measuring
//! an AC field under dynamical decoupling, provides the closed-form
//! statistics of the correlation readout (variance of grouped
//! measurements over the field's random phase) and of the synchronized
//! periodogram readout under Poisson photon noise, and runs seeded
//! Monte-Carlo campaigns that reproduce the scaling laws the two
//! protocols obey: resolution inversely proportional to total delay
//! time, linewidth inversely proportional to field amplitude, and
//! first-harmonic blind spots that affect only the periodogram readout.
//!
//! Modules, bottom up:
//!
//! * [`numerics`] - Bessel kernels, periodogram bins, FWHM, line fits.
//! * [`signal`] - field, sequences, acquired phase, population, photons.
//! * [`stats`] - closed-form statistics over the random field phase.
//! * [`snr`] - exact Poisson moment algebra for both estimators.
//! * [`mc`] - seeded, reproducible Monte-Carlo campaigns.
//! * [`analysis`] - traces, linewidth/resolution scans, harmonic dips.

pub mod analysis;
mod error;
pub mod mc;
pub mod numerics;
pub mod signal;
pub mod snr;
pub mod stats;

pub use error::{Error, Result};
