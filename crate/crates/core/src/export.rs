//! File exports and imports: CSV, raw float64 signals, PNG heatmaps.
//!
//! CSV floats are written with Rust's shortest round-trip formatting, so a
//! given analysis always produces byte-identical files. The `.f64` sidecar
//! is the raw little-endian sample array with no header; pair it with the
//! sample rate from the manifest (or a CLI flag) to reload losslessly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bispectrum::BicoherenceResult;
use crate::error::{Error, Result};
use crate::signal::SignalRecord;
use crate::spectral::Spectrogram;
use crate::surrogate::{FilterMask, SurrogateDistribution};

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Write `time_s,value` rows.
pub fn write_signal_csv(path: &Path, signal: &SignalRecord) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "time_s,value")?;
    for (i, &v) in signal.samples().iter().enumerate() {
        writeln!(w, "{},{}", signal.time_at(i), v)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `time_s,value` CSV. The sample rate is taken from
/// `sample_rate_override` when given, otherwise reconstructed from the time
/// column as `(rows - 1) / (t_last - t_first)`.
pub fn read_signal_csv(
    path: &Path,
    sample_rate_override: Option<f64>,
    label: &str,
) -> Result<SignalRecord> {
    let text = fs::read_to_string(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(t), Some(v)) = (fields.next(), fields.next()) else {
            return Err(format_error(path, format!("line {}: expected 2 columns", idx + 1)));
        };
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| format_error(path, format!("line {}: bad time `{t}`", idx + 1)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| format_error(path, format!("line {}: bad value `{v}`", idx + 1)))?;
        times.push(t);
        values.push(v);
    }
    if values.len() < 2 {
        return Err(format_error(path, "fewer than 2 samples"));
    }
    let sample_rate = match sample_rate_override {
        Some(fs) => fs,
        None => {
            let span = times[times.len() - 1] - times[0];
            if !(span > 0.0) {
                return Err(format_error(path, "time column is not increasing"));
            }
            (times.len() - 1) as f64 / span
        }
    };
    SignalRecord::new(values, sample_rate, label)
}

/// Write the raw little-endian float64 sample array.
pub fn write_signal_f64(path: &Path, signal: &SignalRecord) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for &v in signal.samples() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a raw little-endian float64 sample array; the sample rate must be
/// supplied by the caller.
pub fn read_signal_f64(path: &Path, sample_rate: f64, label: &str) -> Result<SignalRecord> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(format_error(path, "length is not a multiple of 8 bytes"));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SignalRecord::new(samples, sample_rate, label)
}

/// Write `(f1_hz, f2_hz, b2, bispectrum_abs, defined)` rows over the
/// principal region.
pub fn write_bicoherence_csv(path: &Path, result: &BicoherenceResult) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "f1_hz,f2_hz,b2,bispectrum_abs,defined")?;
    let plan = result.plan();
    for (k, l) in result.region().cells() {
        let defined = result.is_defined(k, l);
        let b2 = result.b2(k, l).unwrap_or(f64::NAN);
        let b_abs = result.bispectrum_at(k, l).map(|b| b.norm()).unwrap_or(f64::NAN);
        writeln!(
            w,
            "{},{},{},{},{}",
            plan.bin_frequency(k),
            plan.bin_frequency(l),
            b2,
            b_abs,
            u8::from(defined)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Write the spectrogram: rows are frequency bins (Hz labels), columns are
/// segment-center times in seconds.
pub fn write_spectrogram_csv(path: &Path, gram: &Spectrogram) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "freq_hz")?;
    for t in &gram.times_s {
        write!(w, ",{t}")?;
    }
    writeln!(w)?;
    for (row, freq) in gram.power.iter().zip(&gram.frequencies_hz) {
        write!(w, "{freq}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `(f1_hz, f2_hz, b, b_critical, significant)` rows.
pub fn write_mask_csv(path: &Path, mask: &FilterMask) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "f1_hz,f2_hz,b,b_critical,significant")?;
    let plan = mask.plan();
    for (k, l) in mask.region().cells() {
        writeln!(
            w,
            "{},{},{},{},{}",
            plan.bin_frequency(k),
            plan.bin_frequency(l),
            mask.measured_b(k, l).unwrap_or(f64::NAN),
            mask.critical_b(k, l).unwrap_or(f64::NAN),
            u8::from(mask.is_significant(k, l))
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Write one cell's surrogate histogram as `(bin_left, bin_right, count)`.
pub fn write_histogram_csv(
    path: &Path,
    dist: &SurrogateDistribution,
    bins: usize,
) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "bin_left,bin_right,count")?;
    for bin in dist.histogram(bins) {
        writeln!(w, "{},{},{}", bin.left, bin.right, bin.count)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Heatmap rendering
// ---------------------------------------------------------------------------

/// Map a value in [0, 1] through a dark-blue -> cyan -> yellow gradient.
fn colormap(v: f64) -> [u8; 3] {
    const ANCHORS: [(f64, [f64; 3]); 5] = [
        (0.00, [8.0, 8.0, 40.0]),
        (0.25, [24.0, 60.0, 160.0]),
        (0.50, [20.0, 160.0, 180.0]),
        (0.75, [120.0, 220.0, 100.0]),
        (1.00, [252.0, 240.0, 70.0]),
    ];
    let v = v.clamp(0.0, 1.0);
    let mut rgb = ANCHORS[0].1;
    for pair in ANCHORS.windows(2) {
        let (x0, c0) = pair[0];
        let (x1, c1) = pair[1];
        if v >= x0 && v <= x1 {
            let t = if x1 > x0 { (v - x0) / (x1 - x0) } else { 0.0 };
            rgb = [
                c0[0] + t * (c1[0] - c0[0]),
                c0[1] + t * (c1[1] - c0[1]),
                c0[2] + t * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    [rgb[0] as u8, rgb[1] as u8, rgb[2] as u8]
}

const BACKGROUND: [u8; 3] = [16, 16, 16];
const SURVIVOR: [u8; 3] = [255, 40, 40];
const CELL_PX: u32 = 3;

fn save_cells_png(
    path: &Path,
    width_cells: usize,
    height_cells: usize,
    color_of: impl Fn(usize, usize) -> [u8; 3],
) -> Result<()> {
    let width = width_cells as u32 * CELL_PX;
    let height = height_cells as u32 * CELL_PX;
    let mut img = image::RgbImage::new(width.max(1), height.max(1));
    for (x, y, px) in img.enumerate_pixels_mut() {
        let cx = (x / CELL_PX) as usize;
        // Flip vertically: row 0 of the data is the lowest frequency.
        let cy = height_cells - 1 - (y / CELL_PX) as usize;
        *px = image::Rgb(color_of(cx, cy));
    }
    img.save(path)
        .map_err(|e| format_error(path, e.to_string()))?;
    Ok(())
}

/// Render `b^2` over the plotted subregion (`f1` horizontal, `f2` vertical,
/// cells with `k <= k_max`; pass `None` for the full principal region).
pub fn heatmap_bicoherence(
    path: &Path,
    result: &BicoherenceResult,
    k_max: Option<usize>,
) -> Result<()> {
    let n = result.region().n();
    let k_max = k_max.unwrap_or(n).min(n);
    let l_max = k_max.min(n - 1);
    save_cells_png(path, k_max, l_max, |cx, cy| {
        let (k, l) = (cx + 1, cy + 1);
        match result.b2(k, l) {
            Some(b2) => colormap(b2),
            None => BACKGROUND,
        }
    })
}

/// Render the significance mask over the measured `b^2`: survivors in red,
/// filtered cells dimmed.
pub fn heatmap_mask_overlay(
    path: &Path,
    result: &BicoherenceResult,
    mask: &FilterMask,
    k_max: Option<usize>,
) -> Result<()> {
    let n = result.region().n();
    let k_max = k_max.unwrap_or(n).min(n);
    let l_max = k_max.min(n - 1);
    save_cells_png(path, k_max, l_max, |cx, cy| {
        let (k, l) = (cx + 1, cy + 1);
        if mask.is_significant(k, l) {
            SURVIVOR
        } else {
            match result.b2(k, l) {
                Some(b2) => {
                    let [r, g, b] = colormap(b2);
                    [r / 3, g / 3, b / 3]
                }
                None => BACKGROUND,
            }
        }
    })
}

/// Render the spectrogram (time horizontal, frequency vertical) on a
/// logarithmic brightness scale with 60 dB of dynamic range.
pub fn heatmap_spectrogram(path: &Path, gram: &Spectrogram) -> Result<()> {
    let peak = gram
        .power
        .iter()
        .flat_map(|row| row.iter().copied())
        .fold(0.0f64, f64::max);
    let n_bins = gram.power.len();
    let n_times = gram.times_s.len();
    save_cells_png(path, n_times, n_bins, |cx, cy| {
        let p = gram.power[cy][cx];
        if peak <= 0.0 || p <= 0.0 {
            return colormap(0.0);
        }
        let db = 10.0 * (p / peak).log10();
        colormap((db + 60.0) / 60.0)
    })
}
