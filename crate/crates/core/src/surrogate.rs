//! Monte Carlo surrogate null distributions and confidence filtering.
//!
//! High bicoherence is not proof of phase coupling: when the per-segment
//! Fourier amplitudes vary strongly (transients, bursts), the ensemble
//! average is dominated by a few segments and produces large values even for
//! random phases. The remedy implemented here builds, for every frequency
//! cell `(k, l)`, the *random bicoherence* distribution: keep the measured
//! per-segment amplitudes at bins `k`, `l` and `k + l`, replace the phases by
//! independent uniform draws, and compute the resulting `b^2` many times.
//! The empirical `alpha`-quantile of that distribution is the critical value
//! `b_c(alpha)`; a measured `b >= b_c` is accepted as significant, anything
//! below is discarded as a likely false positive.
//!
//! Surrogate streams are keyed by `(master seed, k, l)` (see
//! [`crate::seeds::cell_rng`]), so the frequency plane can be processed with
//! any number of workers without changing a single output bit.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::bispectrum::BicoherenceResult;
use crate::error::{Error, Result};
use crate::region::PrincipalRegion;
use crate::seeds::cell_rng;
use crate::spectral::{SegmentSpectra, SegmentationPlan};

/// Minimum number of surrogate realizations.
pub const MIN_REALIZATIONS: usize = 100;

/// Default confidence level.
pub const DEFAULT_ALPHA: f64 = 0.997;

/// Default number of surrogate realizations.
pub const DEFAULT_REALIZATIONS: usize = 2000;

/// Per-cell amplitude data consumed by the surrogate generator. Only
/// magnitudes enter; measured phases never do.
struct CellAmplitudes {
    /// `|X_k| * |X_l| * |X_{k+l}|` per segment.
    weights: Vec<f64>,
    /// `sum((|X_k| |X_l|)^2) * sum(|X_{k+l}|^2)`.
    denom: f64,
}

impl CellAmplitudes {
    fn from_spectra(spectra: &SegmentSpectra, k: usize, l: usize) -> Self {
        let mut weights = Vec::with_capacity(spectra.segment_count());
        let mut sum_cross = 0.0;
        let mut sum_sum = 0.0;
        for row in spectra.rows() {
            let a = row[k - 1].norm();
            let b = row[l - 1].norm();
            let c = row[k + l - 1].norm();
            weights.push(a * b * c);
            sum_cross += (a * b) * (a * b);
            sum_sum += c * c;
        }
        Self {
            weights,
            denom: sum_cross * sum_sum,
        }
    }
}

/// One surrogate `b^2` per realization: three fresh uniform phases per
/// segment (one per involved bin, drawn in the order `k`, `l`, `k + l`),
/// measured amplitudes kept.
fn for_each_surrogate_sample(
    amps: &CellAmplitudes,
    rng: &mut ChaCha12Rng,
    realizations: usize,
    mut sink: impl FnMut(f64),
) {
    for _ in 0..realizations {
        let mut re = 0.0;
        let mut im = 0.0;
        for &w in &amps.weights {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let u3: f64 = rng.random();
            let theta = std::f64::consts::TAU * (u1 + u2 - u3);
            let (s, c) = theta.sin_cos();
            re += w * c;
            im += w * s;
        }
        // Cauchy-Schwarz keeps the exact value in [0, 1]; clamp rounding.
        sink(((re * re + im * im) / amps.denom).min(1.0));
    }
}

/// Histogram bin of a surrogate distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Empirical random-bicoherence samples for one frequency cell.
#[derive(Debug, Clone)]
pub struct SurrogateDistribution {
    cell: (usize, usize),
    samples_b2: Vec<f64>,
}

impl SurrogateDistribution {
    /// Wrap precomputed `b^2` samples (each in `[0, 1]`).
    pub fn from_samples(cell: (usize, usize), samples_b2: Vec<f64>) -> Result<Self> {
        if samples_b2.is_empty() {
            return Err(Error::TooFewRealizations { min: 1, got: 0 });
        }
        if samples_b2.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidParameter {
                name: "samples_b2",
                reason: "every surrogate sample must lie in [0, 1]".into(),
            });
        }
        Ok(Self { cell, samples_b2 })
    }

    pub fn cell(&self) -> (usize, usize) {
        self.cell
    }

    pub fn realizations(&self) -> usize {
        self.samples_b2.len()
    }

    /// Raw `b^2` samples.
    pub fn samples_b2(&self) -> &[f64] {
        &self.samples_b2
    }

    pub fn mean_b2(&self) -> f64 {
        self.samples_b2.iter().sum::<f64>() / self.samples_b2.len() as f64
    }

    /// Mean of `b = sqrt(b^2)`.
    pub fn mean_b(&self) -> f64 {
        self.samples_b2.iter().map(|v| v.sqrt()).sum::<f64>() / self.samples_b2.len() as f64
    }

    /// Histogram of `b` on `[0, 1]` (100 bins by default in the exports).
    pub fn histogram(&self, bins: usize) -> Vec<HistogramBin> {
        let bins = bins.max(1);
        let mut counts = vec![0usize; bins];
        for &v in &self.samples_b2 {
            let b = v.sqrt();
            let idx = ((b * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                left: i as f64 / bins as f64,
                right: (i + 1) as f64 / bins as f64,
                count,
            })
            .collect()
    }
}

/// Sample the random-bicoherence distribution of one cell.
///
/// Deterministic in `(seed, cell)`: the stream is independent of any other
/// cell's stream and of processing order.
pub fn surrogate_distribution(
    spectra: &SegmentSpectra,
    cell: (usize, usize),
    realizations: usize,
    seed: u64,
) -> Result<SurrogateDistribution> {
    let (k, l) = cell;
    let region = PrincipalRegion::new(spectra.half_length());
    if !region.contains(k, l) {
        return Err(Error::CellOutOfRegion(k, l));
    }
    if realizations < MIN_REALIZATIONS {
        return Err(Error::TooFewRealizations {
            min: MIN_REALIZATIONS,
            got: realizations,
        });
    }
    let amps = CellAmplitudes::from_spectra(spectra, k, l);
    if !(amps.denom > 0.0) {
        return Err(Error::UndefinedCell(k, l));
    }
    let mut rng = cell_rng(seed, k, l);
    let mut samples = Vec::with_capacity(realizations);
    for_each_surrogate_sample(&amps, &mut rng, realizations, |v| samples.push(v));
    SurrogateDistribution::from_samples(cell, samples)
}

/// Index of the `ceil(alpha * r)`-th order statistic (1-based), counted from
/// the top of a descending sort.
fn rank_from_top(alpha: f64, r: usize) -> usize {
    let ascending = ((alpha * r as f64).ceil() as usize).clamp(1, r);
    r - ascending + 1
}

/// Critical bicoherence `b_c(alpha)`: the `ceil(alpha * R)`-th order
/// statistic of the surrogate `b` values (reported on the `b` scale).
pub fn critical_value(dist: &SurrogateDistribution, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let r = dist.realizations();
    let mut sorted = dist.samples_b2().to_vec();
    sorted.sort_by(f64::total_cmp);
    let ascending = ((alpha * r as f64).ceil() as usize).clamp(1, r);
    Ok(sorted[ascending - 1].sqrt())
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("confidence level must lie in (0, 1), got {alpha}"),
        });
    }
    Ok(())
}

/// Keeps the `m` largest values seen, in O(log m) per insert.
struct TopValues {
    capacity: usize,
    // Min-heap over the kept values; the root is the current m-th largest.
    heap: std::collections::BinaryHeap<std::cmp::Reverse<OrdF64>>,
}

#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl TopValues {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            heap: std::collections::BinaryHeap::with_capacity(capacity + 1),
        }
    }

    fn push(&mut self, v: f64) {
        if self.heap.len() < self.capacity {
            self.heap.push(std::cmp::Reverse(OrdF64(v)));
        } else if let Some(std::cmp::Reverse(OrdF64(min))) = self.heap.peek() {
            if v > *min {
                self.heap.pop();
                self.heap.push(std::cmp::Reverse(OrdF64(v)));
            }
        }
    }

    /// Kept values, largest first.
    fn into_descending(self) -> Vec<f64> {
        let mut v: Vec<f64> = self.heap.into_iter().map(|r| r.0 .0).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// Significance mask over the principal region at one confidence level.
#[derive(Debug, Clone)]
pub struct FilterMask {
    region: PrincipalRegion,
    plan: SegmentationPlan,
    alpha: f64,
    realizations: usize,
    defined: Vec<bool>,
    significant: Vec<bool>,
    critical_b: Vec<f64>,
    measured_b: Vec<f64>,
    expected_false_positives: f64,
}

/// Contiguous group of surviving cells (8-neighbour connectivity on the
/// bin grid).
#[derive(Debug, Clone)]
pub struct SurvivorCluster {
    /// Member cells as `(k, l)` bin pairs.
    pub cells: Vec<(usize, usize)>,
    /// Unweighted centroid `(f1, f2)` in Hz.
    pub centroid_hz: (f64, f64),
}

impl SurvivorCluster {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

impl FilterMask {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn realizations(&self) -> usize {
        self.realizations
    }

    pub fn region(&self) -> &PrincipalRegion {
        &self.region
    }

    pub fn plan(&self) -> &SegmentationPlan {
        &self.plan
    }

    pub fn is_significant(&self, k: usize, l: usize) -> bool {
        self.region
            .index(k, l)
            .map(|i| self.significant[i])
            .unwrap_or(false)
    }

    /// Critical `b_c(alpha)` at cell `(k, l)`, if defined.
    pub fn critical_b(&self, k: usize, l: usize) -> Option<f64> {
        let i = self.region.index(k, l)?;
        self.defined[i].then(|| self.critical_b[i])
    }

    /// Measured `b` at cell `(k, l)`, if defined.
    pub fn measured_b(&self, k: usize, l: usize) -> Option<f64> {
        let i = self.region.index(k, l)?;
        self.defined[i].then(|| self.measured_b[i])
    }

    pub fn is_defined(&self, k: usize, l: usize) -> bool {
        self.region
            .index(k, l)
            .map(|i| self.defined[i])
            .unwrap_or(false)
    }

    pub fn defined_cell_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }

    /// `(defined cells) * (1 - alpha)`.
    pub fn expected_false_positives(&self) -> f64 {
        self.expected_false_positives
    }

    /// Surviving cells in storage order.
    pub fn survivors(&self) -> Vec<(usize, usize)> {
        self.region
            .cells()
            .enumerate()
            .filter_map(|(i, cell)| self.significant[i].then_some(cell))
            .collect()
    }

    pub fn survivor_count(&self) -> usize {
        self.significant.iter().filter(|&&s| s).count()
    }

    /// Survivors restricted to `k <= k_max` (the plotted subregion).
    pub fn survivors_below(&self, k_max: usize) -> Vec<(usize, usize)> {
        self.survivors()
            .into_iter()
            .filter(|&(k, _)| k <= k_max)
            .collect()
    }

    /// Defined cells with `k <= k_max`.
    pub fn defined_cell_count_below(&self, k_max: usize) -> usize {
        self.region
            .cells()
            .enumerate()
            .filter(|&(i, (k, _))| self.defined[i] && k <= k_max)
            .count()
    }

    /// Connected components of the survivor set, largest first.
    pub fn clusters(&self) -> Vec<SurvivorCluster> {
        let survivors = self.survivors();
        let set: std::collections::HashSet<(usize, usize)> =
            survivors.iter().copied().collect();
        let mut seen: std::collections::HashSet<(usize, usize)> = Default::default();
        let mut clusters = Vec::new();
        for &start in &survivors {
            if seen.contains(&start) {
                continue;
            }
            let mut cells = Vec::new();
            let mut queue = vec![start];
            seen.insert(start);
            while let Some((k, l)) = queue.pop() {
                cells.push((k, l));
                for dk in -1i64..=1 {
                    for dl in -1i64..=1 {
                        if dk == 0 && dl == 0 {
                            continue;
                        }
                        let nk = k as i64 + dk;
                        let nl = l as i64 + dl;
                        if nk < 1 || nl < 1 {
                            continue;
                        }
                        let neighbor = (nk as usize, nl as usize);
                        if set.contains(&neighbor) && seen.insert(neighbor) {
                            queue.push(neighbor);
                        }
                    }
                }
            }
            cells.sort_unstable();
            let df = self.plan.delta_f();
            let mean_k = cells.iter().map(|&(k, _)| k as f64).sum::<f64>() / cells.len() as f64;
            let mean_l = cells.iter().map(|&(_, l)| l as f64).sum::<f64>() / cells.len() as f64;
            clusters.push(SurvivorCluster {
                cells,
                centroid_hz: (mean_k * df, mean_l * df),
            });
        }
        clusters.sort_by(|a, b| {
            b.size()
                .cmp(&a.size())
                .then_with(|| a.cells[0].cmp(&b.cells[0]))
        });
        clusters
    }
}

struct CellOutcome {
    defined: bool,
    measured_b2: f64,
    critical_b2: Vec<f64>,
    significant: Vec<bool>,
}

fn filter_cell(
    result: &BicoherenceResult,
    spectra: &SegmentSpectra,
    k: usize,
    l: usize,
    alphas: &[f64],
    realizations: usize,
    seed: u64,
    keep: usize,
) -> CellOutcome {
    let Some(measured_b2) = result.b2(k, l) else {
        return CellOutcome {
            defined: false,
            measured_b2: f64::NAN,
            critical_b2: vec![f64::NAN; alphas.len()],
            significant: vec![false; alphas.len()],
        };
    };
    let amps = CellAmplitudes::from_spectra(spectra, k, l);
    let mut top = TopValues::new(keep);
    let mut rng = cell_rng(seed, k, l);
    for_each_surrogate_sample(&amps, &mut rng, realizations, |v| top.push(v));
    let descending = top.into_descending();
    let mut critical_b2 = Vec::with_capacity(alphas.len());
    let mut significant = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let q = descending[rank_from_top(alpha, realizations) - 1];
        critical_b2.push(q);
        significant.push(measured_b2 >= q);
    }
    CellOutcome {
        defined: true,
        measured_b2,
        critical_b2,
        significant,
    }
}

/// Run the surrogate filter at several confidence levels over one shared set
/// of surrogate draws (cells are embarrassingly parallel; `jobs` bounds the
/// worker count, `None` uses the global pool).
pub fn filter_bicoherence_multi(
    result: &BicoherenceResult,
    spectra: &SegmentSpectra,
    alphas: &[f64],
    realizations: usize,
    seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<FilterMask>> {
    if result.plan() != spectra.plan() || result.segment_count() != spectra.segment_count() {
        return Err(Error::PlanMismatch);
    }
    if alphas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "alphas",
            reason: "need at least one confidence level".into(),
        });
    }
    for &alpha in alphas {
        validate_alpha(alpha)?;
    }
    if realizations < MIN_REALIZATIONS {
        return Err(Error::TooFewRealizations {
            min: MIN_REALIZATIONS,
            got: realizations,
        });
    }
    let region = result.region().clone();
    let keep = alphas
        .iter()
        .map(|&a| rank_from_top(a, realizations))
        .max()
        .unwrap();
    let cells: Vec<(usize, usize)> = region.cells().collect();
    let run = || -> Vec<CellOutcome> {
        cells
            .par_iter()
            .map(|&(k, l)| filter_cell(result, spectra, k, l, alphas, realizations, seed, keep))
            .collect()
    };
    let outcomes = match jobs {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "jobs",
                reason: e.to_string(),
            })?
            .install(run),
        None => run(),
    };

    let defined: Vec<bool> = outcomes.iter().map(|o| o.defined).collect();
    let defined_count = defined.iter().filter(|&&d| d).count();
    let mut masks = Vec::with_capacity(alphas.len());
    for (j, &alpha) in alphas.iter().enumerate() {
        masks.push(FilterMask {
            region: region.clone(),
            plan: result.plan().clone(),
            alpha,
            realizations,
            defined: defined.clone(),
            significant: outcomes.iter().map(|o| o.significant[j]).collect(),
            critical_b: outcomes.iter().map(|o| o.critical_b2[j].sqrt()).collect(),
            measured_b: outcomes.iter().map(|o| o.measured_b2.sqrt()).collect(),
            expected_false_positives: defined_count as f64 * (1.0 - alpha),
        });
    }
    Ok(masks)
}

/// Surrogate filter at a single confidence level.
pub fn filter_bicoherence(
    result: &BicoherenceResult,
    spectra: &SegmentSpectra,
    alpha: f64,
    realizations: usize,
    seed: u64,
) -> Result<FilterMask> {
    Ok(
        filter_bicoherence_multi(result, spectra, &[alpha], realizations, seed, None)?
            .pop()
            .expect("one mask per alpha"),
    )
}
