//! Windowed segmentation and ensemble DFT estimation.
//!
//! A signal of `M` samples is divided into `N` overlapping blocks of even
//! length `2n`; each block is windowed and Fourier transformed with a forward
//! normalization of `1/(2n)`. Only positive-frequency bins `k = 1..=n` are
//! kept (bin `k` sits at `k * sample_rate / segment_length` Hz); the DC bin
//! carries the mean offset, not oscillation, and is dropped. The resulting
//! `N x n` complex matrix is the raw material for all higher-order spectra.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::SignalRecord;

/// Window applied to each block before the DFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// `sin^2(pi j / L)`: zero at the block edges, peak 1 at the middle.
    Hann,
    /// All ones.
    Boxcar,
}

impl Window {
    pub fn name(&self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Boxcar => "boxcar",
        }
    }
}

impl std::str::FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hann" => Ok(Window::Hann),
            "boxcar" => Ok(Window::Boxcar),
            other => Err(format!("unknown window `{other}` (expected hann or boxcar)")),
        }
    }
}

/// Hann window of the given length: `w[j] = sin^2(pi j / length)`.
pub fn hann_window(length: usize) -> Vec<f64> {
    let l = length as f64;
    (0..length)
        .map(|j| {
            let s = (std::f64::consts::PI * j as f64 / l).sin();
            s * s
        })
        .collect()
}

/// Segmentation recipe: block length, overlap, window and sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationPlan {
    segment_length: usize,
    overlap_fraction: f64,
    window: Window,
    sample_rate: f64,
}

impl SegmentationPlan {
    pub fn new(
        segment_length: usize,
        overlap_fraction: f64,
        window: Window,
        sample_rate: f64,
    ) -> Result<Self> {
        if segment_length < 8 || segment_length % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "segment_length",
                reason: format!("must be even and >= 8, got {segment_length}"),
            });
        }
        if !(0.0..1.0).contains(&overlap_fraction) {
            return Err(Error::InvalidParameter {
                name: "overlap_fraction",
                reason: format!("must lie in [0, 1), got {overlap_fraction}"),
            });
        }
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sample_rate",
                reason: format!("must be a positive finite frequency, got {sample_rate}"),
            });
        }
        Ok(Self {
            segment_length,
            overlap_fraction,
            window,
            sample_rate,
        })
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn overlap_fraction(&self) -> f64 {
        self.overlap_fraction
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Number of retained positive-frequency bins, `segment_length / 2`.
    pub fn half_length(&self) -> usize {
        self.segment_length / 2
    }

    /// Frequency resolution in Hz.
    pub fn delta_f(&self) -> f64 {
        self.sample_rate / self.segment_length as f64
    }

    /// Nyquist frequency in Hz.
    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    /// Frequency of bin `k` (1-based) in Hz.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.delta_f()
    }

    /// Hop between consecutive segment starts, `round(L * (1 - overlap))`,
    /// at least 1.
    pub fn hop(&self) -> usize {
        let hop = (self.segment_length as f64 * (1.0 - self.overlap_fraction)).round() as usize;
        hop.max(1)
    }

    /// Number of full segments in a signal of `signal_len` samples:
    /// `floor((M - L) / hop) + 1`. Trailing samples that do not fill a whole
    /// block are dropped.
    pub fn segment_count(&self, signal_len: usize) -> Result<usize> {
        if signal_len < self.segment_length {
            return Err(Error::SignalTooShort {
                needed: self.segment_length,
                got: signal_len,
            });
        }
        Ok((signal_len - self.segment_length) / self.hop() + 1)
    }

    /// Window sample values for this plan.
    pub fn window_values(&self) -> Vec<f64> {
        match self.window {
            Window::Hann => hann_window(self.segment_length),
            Window::Boxcar => vec![1.0; self.segment_length],
        }
    }
}

/// Ensemble of per-segment one-sided spectra: row `i`, entry `k-1` holds
/// `X^(i)_k` for bins `k = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpectra {
    plan: SegmentationPlan,
    rows: Vec<Vec<Complex64>>,
}

impl SegmentSpectra {
    /// Assemble from raw rows. Every row must hold exactly
    /// `plan.half_length()` bins.
    pub fn from_rows(plan: SegmentationPlan, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = plan.half_length();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidParameter {
                name: "rows",
                reason: format!("row {bad} has {} bins, expected {n}", rows[bad].len()),
            });
        }
        Ok(Self { plan, rows })
    }

    pub fn plan(&self) -> &SegmentationPlan {
        &self.plan
    }

    pub fn segment_count(&self) -> usize {
        self.rows.len()
    }

    pub fn half_length(&self) -> usize {
        self.plan.half_length()
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    /// `X^(i)_k` for segment `i` (0-based) and bin `k` (1-based).
    pub fn value(&self, segment: usize, k: usize) -> Complex64 {
        self.rows[segment][k - 1]
    }
}

fn windowed_segment_ffts(
    signal: &SignalRecord,
    plan: &SegmentationPlan,
) -> Result<Vec<Vec<Complex64>>> {
    let l = plan.segment_length();
    let n_segments = plan.segment_count(signal.len())?;
    let hop = plan.hop();
    let window = plan.window_values();
    let norm = 1.0 / l as f64;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(l);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); l];

    let samples = signal.samples();
    let mut out = Vec::with_capacity(n_segments);
    for i in 0..n_segments {
        let start = i * hop;
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(samples[start + j] * window[j], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        out.push(buf.iter().map(|v| v * norm).collect());
    }
    Ok(out)
}

/// Segment, window and transform a signal into its one-sided spectral
/// ensemble (bins `1..=n`, DC excluded).
pub fn segment_spectra(signal: &SignalRecord, plan: &SegmentationPlan) -> Result<SegmentSpectra> {
    let n = plan.half_length();
    let rows = windowed_segment_ffts(signal, plan)?
        .into_iter()
        .map(|full| full[1..=n].to_vec())
        .collect();
    SegmentSpectra::from_rows(plan.clone(), rows)
}

/// Per-segment two-sided spectra (all `2n` DFT bins), for the full-plane
/// bispectrum validation tools.
#[derive(Debug, Clone)]
pub struct TwoSidedSpectra {
    plan: SegmentationPlan,
    rows: Vec<Vec<Complex64>>,
}

impl TwoSidedSpectra {
    pub fn plan(&self) -> &SegmentationPlan {
        &self.plan
    }

    pub fn segment_count(&self) -> usize {
        self.rows.len()
    }

    pub fn half_length(&self) -> usize {
        self.plan.half_length()
    }

    /// `X^(i)(f)` for signed frequency index `f` in `-n..=n`; negative
    /// indices wrap to the upper DFT bins.
    pub fn value(&self, segment: usize, f: isize) -> Complex64 {
        let l = self.plan.segment_length() as isize;
        let bin = f.rem_euclid(l) as usize;
        self.rows[segment][bin]
    }
}

/// Like [`segment_spectra`] but keeping every DFT bin.
pub fn two_sided_spectra(signal: &SignalRecord, plan: &SegmentationPlan) -> Result<TwoSidedSpectra> {
    let rows = windowed_segment_ffts(signal, plan)?;
    Ok(TwoSidedSpectra {
        plan: plan.clone(),
        rows,
    })
}

/// Time-frequency power matrix `|X^(i)_k|^2`, for reporting.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// Bin frequencies in Hz (bins `1..=n`).
    pub frequencies_hz: Vec<f64>,
    /// Segment-center times in seconds.
    pub times_s: Vec<f64>,
    /// `power[bin][segment]`.
    pub power: Vec<Vec<f64>>,
}

/// Short-time power spectrogram over the same segmentation as
/// [`segment_spectra`]; time axis at segment centers.
pub fn spectrogram(signal: &SignalRecord, plan: &SegmentationPlan) -> Result<Spectrogram> {
    let spectra = segment_spectra(signal, plan)?;
    let n = spectra.half_length();
    let hop = plan.hop();
    let frequencies_hz = (1..=n).map(|k| plan.bin_frequency(k)).collect();
    let times_s = (0..spectra.segment_count())
        .map(|i| (i * hop + plan.segment_length() / 2) as f64 / plan.sample_rate())
        .collect();
    let mut power = vec![vec![0.0; spectra.segment_count()]; n];
    for (i, row) in spectra.rows().iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            power[k][i] = v.norm_sqr();
        }
    }
    Ok(Spectrogram {
        frequencies_hz,
        times_s,
        power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(len: usize, fs: f64, freq: f64, amp: f64, phase: f64) -> SignalRecord {
        let samples = (0..len)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / fs + phase).cos())
            .collect();
        SignalRecord::new(samples, fs, "cosine").unwrap()
    }

    /// Naive DFT oracle with 1/L normalization, all bins.
    fn naive_dft(block: &[f64]) -> Vec<Complex64> {
        let l = block.len();
        (0..l)
            .map(|k| {
                let mut acc = Complex64::default();
                for (t, &x) in block.iter().enumerate() {
                    let ang = -2.0 * PI * (k * t) as f64 / l as f64;
                    acc += Complex64::new(x * ang.cos(), x * ang.sin());
                }
                acc / l as f64
            })
            .collect()
    }

    #[test]
    fn hann_endpoints_and_peak() {
        let w = hann_window(8);
        assert_eq!(w[0], 0.0);
        assert!((w[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hann_mean_square_is_three_eighths() {
        let w = hann_window(512);
        let mean_sq: f64 = w.iter().map(|v| v * v).sum::<f64>() / 512.0;
        assert!((mean_sq - 0.375).abs() < 1e-3);
    }

    #[test]
    fn plan_validation() {
        assert!(SegmentationPlan::new(7, 0.5, Window::Hann, 1.0).is_err());
        assert!(SegmentationPlan::new(6, 0.5, Window::Hann, 1.0).is_err());
        assert!(SegmentationPlan::new(8, 1.0, Window::Hann, 1.0).is_err());
        assert!(SegmentationPlan::new(8, 0.5, Window::Hann, 0.0).is_err());
        assert!(SegmentationPlan::new(8, 0.0, Window::Boxcar, 1.0).is_ok());
    }

    #[test]
    fn reference_scenario_segment_count() {
        // 30000 samples, 512-long blocks, 50% overlap: floor((M-L)/hop) + 1.
        let plan = SegmentationPlan::new(512, 0.5, Window::Hann, 2000.0).unwrap();
        assert_eq!(plan.hop(), 256);
        assert_eq!(plan.segment_count(30_000).unwrap(), 116);
        assert!((plan.delta_f() - 3.90625).abs() < 1e-12);
        assert!((plan.nyquist() - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_length_halves_resolution_and_count() {
        let m = 30_000;
        let a = SegmentationPlan::new(512, 0.5, Window::Hann, 2000.0).unwrap();
        let b = SegmentationPlan::new(1024, 0.5, Window::Hann, 2000.0).unwrap();
        assert!((b.delta_f() - a.delta_f() / 2.0).abs() < 1e-12);
        let na = a.segment_count(m).unwrap() as f64;
        let nb = b.segment_count(m).unwrap() as f64;
        assert!((na / nb - 2.0).abs() < 0.05, "na = {na}, nb = {nb}");
    }

    #[test]
    fn signal_shorter_than_segment_is_rejected() {
        let plan = SegmentationPlan::new(64, 0.0, Window::Boxcar, 100.0).unwrap();
        let sig = cosine(32, 100.0, 5.0, 1.0, 0.0);
        assert!(matches!(
            segment_spectra(&sig, &plan),
            Err(Error::SignalTooShort { .. })
        ));
    }

    #[test]
    fn on_grid_cosine_lands_on_one_bin() {
        let fs = 128.0;
        let plan = SegmentationPlan::new(64, 0.0, Window::Boxcar, fs).unwrap();
        let amp = 3.0;
        // Bin 10 at fs/64*10 = 20 Hz.
        let sig = cosine(256, fs, 20.0, amp, 0.7);
        let spectra = segment_spectra(&sig, &plan).unwrap();
        for i in 0..spectra.segment_count() {
            for k in 1..=spectra.half_length() {
                let mag = spectra.value(i, k).norm();
                if k == 10 {
                    assert!((mag - amp / 2.0).abs() < 1e-10 * amp);
                } else {
                    assert!(mag <= 1e-10 * amp, "bin {k} magnitude {mag}");
                }
            }
        }
    }

    #[test]
    fn matches_naive_dft_and_parseval() {
        let fs = 200.0;
        let plan = SegmentationPlan::new(32, 0.25, Window::Hann, fs).unwrap();
        let sig = {
            // Deterministic multi-tone with off-grid content.
            let samples = (0..200)
                .map(|i| {
                    let t = i as f64 / fs;
                    (2.0 * PI * 13.7 * t).sin() + 0.4 * (2.0 * PI * 41.3 * t + 1.0).cos()
                })
                .collect();
            SignalRecord::new(samples, fs, "multi").unwrap()
        };
        let spectra = segment_spectra(&sig, &plan).unwrap();
        let l = plan.segment_length();
        let n = plan.half_length();
        let hop = plan.hop();
        let w = plan.window_values();
        for (i, row) in spectra.rows().iter().enumerate() {
            let block: Vec<f64> = (0..l)
                .map(|j| sig.samples()[i * hop + j] * w[j])
                .collect();
            let oracle = naive_dft(&block);
            // Retained bins agree with the direct transform.
            for k in 1..=n {
                assert!((row[k - 1] - oracle[k]).norm() < 1e-12);
            }
            // Parseval: sum over all bins equals windowed time-domain energy / L.
            let freq_energy: f64 = oracle.iter().map(|v| v.norm_sqr()).sum();
            let time_energy: f64 = block.iter().map(|v| v * v).sum::<f64>() / l as f64;
            assert!((freq_energy - time_energy).abs() <= 1e-6 * time_energy);
        }
    }

    #[test]
    fn delay_changes_phases_only() {
        let fs = 128.0;
        let plan = SegmentationPlan::new(64, 0.0, Window::Boxcar, fs).unwrap();
        let a = cosine(512, fs, 20.0, 1.0, 0.3);
        // Delay by d samples = extra phase, same magnitudes.
        let d = 5;
        let delayed = {
            let samples = (0..512)
                .map(|i| {
                    let t = (i as f64 - d as f64) / fs;
                    (2.0 * PI * 20.0 * t + 0.3).cos()
                })
                .collect();
            SignalRecord::new(samples, fs, "delayed").unwrap()
        };
        let sa = segment_spectra(&a, &plan).unwrap();
        let sb = segment_spectra(&delayed, &plan).unwrap();
        for i in 0..sa.segment_count() {
            for k in 1..=sa.half_length() {
                let ma = sa.value(i, k).norm();
                let mb = sb.value(i, k).norm();
                assert!((ma - mb).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spectra_are_deterministic() {
        let sig = cosine(400, 100.0, 7.0, 1.0, 0.0);
        let plan = SegmentationPlan::new(64, 0.5, Window::Hann, 100.0).unwrap();
        let a = segment_spectra(&sig, &plan).unwrap();
        let b = segment_spectra(&sig, &plan).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectrogram_of_zero_signal_is_zero() {
        let sig = SignalRecord::new(vec![0.0; 256], 100.0, "zero").unwrap();
        let plan = SegmentationPlan::new(64, 0.5, Window::Hann, 100.0).unwrap();
        let gram = spectrogram(&sig, &plan).unwrap();
        assert!(gram
            .power
            .iter()
            .all(|row| row.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn spectrogram_shows_tones_as_ridges_and_bursts_as_stripes() {
        use crate::signal::{burst_train, BurstSpec};
        let fs = 1000.0;
        let len = 8000;
        let tone = cosine(len, fs, 125.0, 1.0, 0.0);
        let bursts = BurstSpec {
            count: 1,
            centers: vec![4.0],
            width: 0.1,
            multiplier_snr: 3.0,
        };
        let burst = burst_train(&bursts, &tone, 9).unwrap();
        let sig = crate::signal::sum_signals(&[&tone, &burst], "mix").unwrap();
        let plan = SegmentationPlan::new(256, 0.5, Window::Hann, fs).unwrap();
        let gram = spectrogram(&sig, &plan).unwrap();
        // Ridge: the 125 Hz bin dominates away from the burst.
        let ridge_bin = (125.0 / plan.delta_f()).round() as usize - 1;
        assert!(gram.power[ridge_bin][0] > 100.0 * gram.power[ridge_bin + 20][0]);
        // Stripe: broadband power at t = 4 s far exceeds t = 1 s.
        let col_power = |t: f64| -> f64 {
            let i = gram
                .times_s
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
                .unwrap()
                .0;
            // Sum away from the tone's immediate bins.
            gram.power
                .iter()
                .enumerate()
                .filter(|(k, _)| k.abs_diff(ridge_bin) > 5)
                .map(|(_, row)| row[i])
                .sum()
        };
        assert!(col_power(4.0) > 50.0 * col_power(1.0));
    }
}
