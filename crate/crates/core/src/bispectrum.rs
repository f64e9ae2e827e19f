//! Bispectrum and bicoherence over the frequency-frequency plane.
//!
//! For each segment spectrum `X` the estimator forms the cross-frequency
//! matrix `C_kl = X_k X_l` and the shifted conjugate matrix
//! `S_kl = conj(X_{k+l})` (supported on `k <= l`, `k + l <= n`), then
//! ensemble-averages their element-wise product:
//!
//! ```text
//! B    = E[ C o S ]
//! b^2  = |B|^2 / ( E[|C|^2] o E[|S|^2] )
//! ```
//!
//! `b^2(f1, f2)` lies in `[0, 1]` and approaches 1 when the components at
//! `f1`, `f2` and `f1 + f2` are quadratically phase coupled. Results are
//! stored packed on the principal region (`f1 >= f2`, `f1 + f2 <=` Nyquist).
//! [`bicoherence_naive`] computes the same quantity by direct triple-indexed
//! loops and exists as an independent cross-check of the matrix path.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::region::PrincipalRegion;
use crate::spectral::{SegmentSpectra, SegmentationPlan};

/// Dyadic product of a segment spectrum with itself: `C_kl = X_k X_l`.
#[derive(Debug, Clone)]
pub struct CrossFrequencyMatrix {
    n: usize,
    values: Vec<Complex64>,
}

impl CrossFrequencyMatrix {
    pub fn from_spectrum(spectrum: &[Complex64]) -> Self {
        let n = spectrum.len();
        let mut values = Vec::with_capacity(n * n);
        for &xk in spectrum {
            for &xl in spectrum {
                values.push(xk * xl);
            }
        }
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_kl` with 1-based bin indices.
    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        self.values[(k - 1) * self.n + (l - 1)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Shifted conjugate matrix: `S_kl = conj(X_{k+l})` where `k <= l` and
/// `k + l <= n`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct ShiftedConjugateMatrix {
    n: usize,
    values: Vec<Complex64>,
}

impl ShiftedConjugateMatrix {
    pub fn from_spectrum(spectrum: &[Complex64]) -> Self {
        let n = spectrum.len();
        let mut values = vec![Complex64::default(); n * n];
        for k in 1..=n {
            for l in k..=n.saturating_sub(k) {
                values[(k - 1) * n + (l - 1)] = spectrum[k + l - 1].conj();
            }
        }
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `S_kl` with 1-based bin indices.
    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        self.values[(k - 1) * self.n + (l - 1)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Stream the per-segment `(C, S)` matrix pairs. Consumers accumulate; the
/// full stack of `N` matrices is never materialized at once.
pub fn build_matrices(
    spectra: &SegmentSpectra,
) -> impl Iterator<Item = (CrossFrequencyMatrix, ShiftedConjugateMatrix)> + '_ {
    spectra.rows().iter().map(|row| {
        (
            CrossFrequencyMatrix::from_spectrum(row),
            ShiftedConjugateMatrix::from_spectrum(row),
        )
    })
}

/// Bispectrum, bicoherence and normalization terms on the principal region.
///
/// Cells where either normalization term vanishes are flagged undefined;
/// their `b^2` is NaN and excluded from all statistics.
#[derive(Debug, Clone)]
pub struct BicoherenceResult {
    region: PrincipalRegion,
    plan: SegmentationPlan,
    segment_count: usize,
    bispectrum: Vec<Complex64>,
    bicoherence_sq: Vec<f64>,
    denom_cross: Vec<f64>,
    denom_sum: Vec<f64>,
    defined: Vec<bool>,
}

impl BicoherenceResult {
    pub fn region(&self) -> &PrincipalRegion {
        &self.region
    }

    pub fn plan(&self) -> &SegmentationPlan {
        &self.plan
    }

    pub fn segment_count(&self) -> usize {
        self.segment_count
    }

    /// `b^2` at cell `(k, l)`; `None` outside the region or where undefined.
    pub fn b2(&self, k: usize, l: usize) -> Option<f64> {
        let idx = self.region.index(k, l)?;
        self.defined[idx].then(|| self.bicoherence_sq[idx])
    }

    /// Complex bispectrum at cell `(k, l)`.
    pub fn bispectrum_at(&self, k: usize, l: usize) -> Option<Complex64> {
        self.region.index(k, l).map(|i| self.bispectrum[i])
    }

    pub fn is_defined(&self, k: usize, l: usize) -> bool {
        self.region
            .index(k, l)
            .map(|i| self.defined[i])
            .unwrap_or(false)
    }

    /// Normalization terms `(E[|C|^2], E[|S|^2])` at cell `(k, l)`.
    pub fn denominators(&self, k: usize, l: usize) -> Option<(f64, f64)> {
        let idx = self.region.index(k, l)?;
        Some((self.denom_cross[idx], self.denom_sum[idx]))
    }

    pub fn defined_cell_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }

    /// Iterate `(k, l, b^2)` over defined cells.
    pub fn defined_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.region.cells().enumerate().filter_map(move |(i, (k, l))| {
            self.defined[i].then(|| (k, l, self.bicoherence_sq[i]))
        })
    }

    /// Mean of `b^2` over defined cells, if any.
    pub fn mean_b2(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (_, _, b2) in self.defined_cells() {
            sum += b2;
            count += 1;
        }
        (count > 0).then(|| sum / count as f64)
    }

    fn from_accumulators(
        plan: SegmentationPlan,
        segment_count: usize,
        region: PrincipalRegion,
        sum_b: Vec<Complex64>,
        sum_c2: Vec<f64>,
        sum_s2: Vec<f64>,
    ) -> Self {
        let inv_n = 1.0 / segment_count as f64;
        let mut bispectrum = Vec::with_capacity(region.len());
        let mut bicoherence_sq = Vec::with_capacity(region.len());
        let mut denom_cross = Vec::with_capacity(region.len());
        let mut denom_sum = Vec::with_capacity(region.len());
        let mut defined = Vec::with_capacity(region.len());
        for i in 0..region.len() {
            let b = sum_b[i] * inv_n;
            let dc = sum_c2[i] * inv_n;
            let ds = sum_s2[i] * inv_n;
            let ok = dc > 0.0 && ds > 0.0;
            bispectrum.push(b);
            denom_cross.push(dc);
            denom_sum.push(ds);
            defined.push(ok);
            bicoherence_sq.push(if ok { b.norm_sqr() / (dc * ds) } else { f64::NAN });
        }
        Self {
            region,
            plan,
            segment_count,
            bispectrum,
            bicoherence_sq,
            denom_cross,
            denom_sum,
            defined,
        }
    }
}

fn check_segment_count(spectra: &SegmentSpectra) -> Result<()> {
    if spectra.segment_count() < 2 {
        return Err(Error::TooFewSegments(spectra.segment_count()));
    }
    Ok(())
}

/// Ensemble bicoherence via the matrix formulation: per segment, form `C`
/// and `S`, accumulate `C o S`, `|C|^2` and `|S|^2` element-wise, then
/// normalize and fold onto the principal region.
pub fn bicoherence(spectra: &SegmentSpectra) -> Result<BicoherenceResult> {
    check_segment_count(spectra)?;
    let n = spectra.half_length();
    let region = PrincipalRegion::new(n);

    let mut sum_b = vec![Complex64::default(); n * n];
    let mut sum_c2 = vec![0.0f64; n * n];
    let mut sum_s2 = vec![0.0f64; n * n];
    for (c, s) in build_matrices(spectra) {
        for (i, (&cv, &sv)) in c.values().iter().zip(s.values()).enumerate() {
            sum_b[i] += cv * sv;
            sum_c2[i] += cv.norm_sqr();
            sum_s2[i] += sv.norm_sqr();
        }
    }

    // The matrices carry their support on k <= l; the packed result uses the
    // f1 >= f2 convention, so cell (k, l) reads matrix entry (l, k).
    let mut packed_b = Vec::with_capacity(region.len());
    let mut packed_c2 = Vec::with_capacity(region.len());
    let mut packed_s2 = Vec::with_capacity(region.len());
    for (k, l) in region.cells() {
        let flat = (l - 1) * n + (k - 1);
        packed_b.push(sum_b[flat]);
        packed_c2.push(sum_c2[flat]);
        packed_s2.push(sum_s2[flat]);
    }
    Ok(BicoherenceResult::from_accumulators(
        spectra.plan().clone(),
        spectra.segment_count(),
        region,
        packed_b,
        packed_c2,
        packed_s2,
    ))
}

/// Reference implementation with explicit triple-indexed loops over
/// `(k, l, k + l)`; contract identical to [`bicoherence`].
pub fn bicoherence_naive(spectra: &SegmentSpectra) -> Result<BicoherenceResult> {
    check_segment_count(spectra)?;
    let n = spectra.half_length();
    let region = PrincipalRegion::new(n);

    let mut sum_b = vec![Complex64::default(); region.len()];
    let mut sum_c2 = vec![0.0f64; region.len()];
    let mut sum_s2 = vec![0.0f64; region.len()];
    for row in spectra.rows() {
        for (i, (k, l)) in region.cells().enumerate() {
            let xk = row[k - 1];
            let xl = row[l - 1];
            let xs = row[k + l - 1];
            let cross = xk * xl;
            sum_b[i] += cross * xs.conj();
            sum_c2[i] += cross.norm_sqr();
            sum_s2[i] += xs.norm_sqr();
        }
    }
    Ok(BicoherenceResult::from_accumulators(
        spectra.plan().clone(),
        spectra.segment_count(),
        region,
        sum_b,
        sum_c2,
        sum_s2,
    ))
}
