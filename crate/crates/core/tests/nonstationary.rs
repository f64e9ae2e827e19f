//! Nonstationarity bias: bursts inflate the raw bicoherence plane relative
//! to a stationary signal of equal total power, which is exactly why the
//! surrogate filter exists.

use bicoh_core::bispectrum::bicoherence;
use bicoh_core::config::{build_scenario, ScenarioConfig};
use bicoh_core::signal::{sum_signals, white_noise};
use bicoh_core::spectral::{segment_spectra, SegmentationPlan, Window};

#[test]
fn burst_scenario_inflates_mean_bicoherence() {
    let config = ScenarioConfig::default();
    let built = build_scenario(&config, None).unwrap();
    let plan = SegmentationPlan::new(512, 0.5, Window::Hann, 2000.0).unwrap();

    // Stationary control: same oscillator + noise, with the burst energy
    // replaced by stationary white noise of the same RMS.
    let no_bursts = ScenarioConfig {
        burst_count: 0,
        burst_centers: vec![],
        ..config.clone()
    };
    let base = build_scenario(&no_bursts, None).unwrap();
    let burst_part: Vec<f64> = built
        .signal
        .samples()
        .iter()
        .zip(base.signal.samples())
        .map(|(a, b)| a - b)
        .collect();
    let burst_rms =
        (burst_part.iter().map(|v| v * v).sum::<f64>() / burst_part.len() as f64).sqrt();
    let filler = white_noise(base.signal.len(), 2000.0, burst_rms, 4242).unwrap();
    let control = sum_signals(&[&base.signal, &filler], "control").unwrap();
    let total = |s: &bicoh_core::signal::SignalRecord| s.rms();
    assert!(
        (total(&control) - total(&built.signal)).abs() / total(&built.signal) < 0.05,
        "control power should match the burst scenario"
    );

    let mean_b2 = |sig| {
        let spectra = segment_spectra(sig, &plan).unwrap();
        bicoherence(&spectra).unwrap().mean_b2().unwrap()
    };
    let bursty = mean_b2(&built.signal);
    let stationary = mean_b2(&control);
    assert!(
        bursty > 1.5 * stationary,
        "mean b2: bursty = {bursty:.5}, stationary = {stationary:.5}"
    );
}
