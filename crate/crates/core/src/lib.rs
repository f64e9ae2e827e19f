//! Higher-order spectral analysis with surrogate-based significance
//! filtering.
//!
//! The toolkit estimates the bispectrum and bicoherence of a real sampled
//! signal over the frequency-frequency plane,
//!
//! ```text
//! B(f1, f2)   = E[ X(f1) X(f2) X*(f1 + f2) ]
//! b^2(f1, f2) = |B|^2 / ( E[|X(f1) X(f2)|^2] E[|X(f1+f2)|^2] )
//! ```
//!
//! and then decides, cell by cell, whether a high `b^2` actually indicates
//! quadratic phase coupling. Rapidly changing amplitudes with few ensemble
//! averages inflate the estimator, so raw bicoherence maps of nonstationary
//! signals are full of false positives. The [`surrogate`] module draws a
//! Monte Carlo null — the measured amplitudes with fully randomized phases —
//! for every cell, takes the empirical `alpha`-quantile as a critical value
//! `b_c(alpha)`, and keeps only cells with `b >= b_c`.
//!
//! A small simulator ([`oscillator`], [`signal`]) generates the validation
//! inputs: a two-mass spring system with a tunable quadratic nonlinearity,
//! plus additive noise and broadband Gaussian-envelope bursts.
//!
//! ```
//! use bicoh_core::signal::white_noise;
//! use bicoh_core::spectral::{segment_spectra, SegmentationPlan, Window};
//! use bicoh_core::bispectrum::bicoherence;
//! use bicoh_core::surrogate::filter_bicoherence;
//!
//! let fs = 256.0;
//! let sig = white_noise(64 * 40, fs, 1.0, 7).unwrap();
//! let plan = SegmentationPlan::new(64, 0.5, Window::Hann, fs).unwrap();
//! let spectra = segment_spectra(&sig, &plan).unwrap();
//! let result = bicoherence(&spectra).unwrap();
//! let mask = filter_bicoherence(&result, &spectra, 0.997, 200, 1).unwrap();
//! assert!(mask.survivor_count() <= result.defined_cell_count());
//! ```

pub mod bispectrum;
pub mod config;
pub mod error;
pub mod export;
pub mod manifest;
pub mod oscillator;
pub mod region;
pub mod seeds;
pub mod signal;
pub mod spectral;
pub mod surrogate;
pub mod symmetry;

pub use error::{Error, Result};
