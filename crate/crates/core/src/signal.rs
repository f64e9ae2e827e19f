//! Time-series container and synthetic test-signal generators.
//!
//! A [`SignalRecord`] is a finite real-valued series with a fixed sampling
//! rate. The generators here build the standard validation inputs: seeded
//! Gaussian white noise, broadband bursts (white noise under a sum of
//! Gaussian time envelopes) and the additive composition of an oscillator
//! signal with noise and bursts at prescribed RMS ratios.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seeds::stream_rng;

/// Real-valued sampled time series.
///
/// Invariants: `sample_rate > 0`, at least 2 samples, all samples finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    samples: Vec<f64>,
    sample_rate: f64,
    label: String,
}

impl SignalRecord {
    pub fn new(samples: Vec<f64>, sample_rate: f64, label: impl Into<String>) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sample_rate",
                reason: format!("must be a positive finite frequency, got {sample_rate}"),
            });
        }
        if samples.len() < 2 {
            return Err(Error::SignalTooShort {
                needed: 2,
                got: samples.len(),
            });
        }
        if let Some(idx) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("non-finite value at index {idx}"),
            });
        }
        Ok(Self {
            samples,
            sample_rate,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i` in seconds.
    pub fn time_at(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }

    /// Duration covered by the samples, `(len - 1) / sample_rate`.
    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 / self.sample_rate
    }

    /// Root-mean-square amplitude.
    pub fn rms(&self) -> f64 {
        let sum_sq: f64 = self.samples.iter().map(|v| v * v).sum();
        (sum_sq / self.len() as f64).sqrt()
    }
}

/// Additive white-noise component, specified by the ratio
/// `RMS(signal) / RMS(noise)` and its own seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr: f64,
    pub seed: u64,
}

/// Broadband burst train: fresh white noise multiplied by a sum of Gaussian
/// envelopes `exp(-(t - t_i)^2 / (2 sigma^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstSpec {
    /// Number of bursts `K`.
    pub count: usize,
    /// Envelope centers in seconds, one per burst.
    pub centers: Vec<f64>,
    /// Envelope width `sigma` in seconds.
    pub width: f64,
    /// `RMS(burst noise) / RMS(base signal)` before the envelope is applied.
    pub multiplier_snr: f64,
}

impl BurstSpec {
    fn validate(&self, duration: f64) -> Result<()> {
        if self.centers.len() != self.count {
            return Err(Error::InvalidParameter {
                name: "burst_centers",
                reason: format!(
                    "expected {} centers, got {}",
                    self.count,
                    self.centers.len()
                ),
            });
        }
        if !(self.width > 0.0) {
            return Err(Error::InvalidParameter {
                name: "burst_width",
                reason: format!("must be > 0, got {}", self.width),
            });
        }
        if !(self.multiplier_snr >= 0.0) || !self.multiplier_snr.is_finite() {
            return Err(Error::InvalidParameter {
                name: "burst_multiplier_snr",
                reason: format!("must be finite and >= 0, got {}", self.multiplier_snr),
            });
        }
        for &c in &self.centers {
            if !(0.0..=duration).contains(&c) {
                return Err(Error::InvalidParameter {
                    name: "burst_centers",
                    reason: format!("center {c} s outside [0, {duration}] s"),
                });
            }
        }
        Ok(())
    }
}

/// Zero-mean Gaussian white noise with standard deviation `rms`.
/// Deterministic for a fixed seed.
pub fn white_noise(length: usize, sample_rate: f64, rms: f64, seed: u64) -> Result<SignalRecord> {
    if !(rms >= 0.0) || !rms.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rms",
            reason: format!("must be finite and >= 0, got {rms}"),
        });
    }
    let mut rng = stream_rng(seed);
    let samples = (0..length)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            rms * g
        })
        .collect();
    SignalRecord::new(samples, sample_rate, "white_noise")
}

/// Burst train matched to `base`: fresh white noise whose RMS is
/// `multiplier_snr * RMS(base)`, multiplied by the Gaussian envelope sum.
///
/// With `count = 0` the result is identically zero.
pub fn burst_train(spec: &BurstSpec, base: &SignalRecord, seed: u64) -> Result<SignalRecord> {
    spec.validate(base.duration())?;
    let carrier_rms = spec.multiplier_snr * base.rms();
    let carrier = white_noise(base.len(), base.sample_rate(), carrier_rms, seed)?;
    let two_sigma_sq = 2.0 * spec.width * spec.width;
    let samples = carrier
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let t = base.time_at(i);
            let envelope: f64 = spec
                .centers
                .iter()
                .map(|&tc| (-(t - tc) * (t - tc) / two_sigma_sq).exp())
                .sum();
            x * envelope
        })
        .collect();
    SignalRecord::new(samples, base.sample_rate(), "burst_train")
}

/// Element-wise sum of signals sharing length and sample rate.
pub fn sum_signals(parts: &[&SignalRecord], label: impl Into<String>) -> Result<SignalRecord> {
    let first = parts.first().ok_or(Error::InvalidParameter {
        name: "parts",
        reason: "no signals to sum".into(),
    })?;
    for p in parts {
        if p.len() != first.len() || p.sample_rate() != first.sample_rate() {
            return Err(Error::SignalMismatch(format!(
                "{} ({} samples @ {} Hz) vs {} ({} samples @ {} Hz)",
                first.label(),
                first.len(),
                first.sample_rate(),
                p.label(),
                p.len(),
                p.sample_rate()
            )));
        }
    }
    let mut samples = vec![0.0; first.len()];
    for p in parts {
        for (acc, &v) in samples.iter_mut().zip(p.samples()) {
            *acc += v;
        }
    }
    SignalRecord::new(samples, first.sample_rate(), label)
}

/// Compose the full test signal: oscillator + white noise + burst train.
///
/// The noise RMS is set so that `RMS(osc) / RMS(noise) = noise.snr`; the
/// burst carrier RMS follows `bursts.multiplier_snr` relative to `osc`.
/// The noise component uses `noise.seed`, the burst carrier uses `seed`.
pub fn compose_test_signal(
    osc: &SignalRecord,
    noise: &NoiseSpec,
    bursts: &BurstSpec,
    seed: u64,
) -> Result<SignalRecord> {
    if !(noise.snr > 0.0) || !noise.snr.is_finite() {
        return Err(Error::InvalidParameter {
            name: "noise_snr",
            reason: format!("must be finite and > 0, got {}", noise.snr),
        });
    }
    let noise_rms = osc.rms() / noise.snr;
    let noise_sig = white_noise(osc.len(), osc.sample_rate(), noise_rms, noise.seed)?;
    let burst_sig = burst_train(bursts, osc, seed)?;
    sum_signals(&[osc, &noise_sig, &burst_sig], "composed")
}
