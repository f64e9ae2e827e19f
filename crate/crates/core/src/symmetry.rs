//! Full-plane bispectrum and symmetry folding (validation tools).
//!
//! For a real signal the bispectrum on the signed frequency plane obeys
//!
//! ```text
//! B(f1, f2) = B(f2, f1)
//! B(f1, f2) = conj(B(-f1, -f2))
//! B(f1, f2) = B(-f1 - f2, f2)
//! B(f1, f2) = B(f1, -f1 - f2)
//! ```
//!
//! so every point of the Nyquist hexagon `|f1|, |f2|, |f1 + f2| <= n` folds
//! onto the principal triangle `f1 >= f2 >= 0, f1 + f2 <= n`. The production
//! estimator only ever computes that triangle; the full-plane grid here
//! exists to exercise the symmetry relations directly and is capped at small
//! sizes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::TwoSidedSpectra;

/// Largest half-length accepted by [`full_plane_bispectrum`].
pub const MAX_FULL_PLANE_HALF_LENGTH: usize = 64;

/// Bispectrum sampled on the full signed-frequency grid
/// `(f1, f2) in [-n, n]^2`, defined inside the Nyquist hexagon.
#[derive(Debug, Clone)]
pub struct FullPlaneBispectrum {
    n: isize,
    values: Vec<Complex64>,
    defined: Vec<bool>,
}

impl FullPlaneBispectrum {
    pub fn half_length(&self) -> usize {
        self.n as usize
    }

    /// True if `(f1, f2)` lies inside the Nyquist hexagon.
    pub fn in_hexagon(&self, f1: isize, f2: isize) -> bool {
        f1.abs() <= self.n && f2.abs() <= self.n && (f1 + f2).abs() <= self.n
    }

    fn flat(&self, f1: isize, f2: isize) -> usize {
        let side = (2 * self.n + 1) as usize;
        ((f1 + self.n) as usize) * side + (f2 + self.n) as usize
    }

    /// `B(f1, f2)`, if inside the hexagon.
    pub fn at(&self, f1: isize, f2: isize) -> Option<Complex64> {
        if self.in_hexagon(f1, f2) && self.defined[self.flat(f1, f2)] {
            Some(self.values[self.flat(f1, f2)])
        } else {
            None
        }
    }

    /// Largest `|B|` over the hexagon; scale reference for tolerance checks.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.defined)
            .filter(|(_, &d)| d)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Ensemble-averaged bispectrum over the full signed-frequency plane.
///
/// Guarded to `n <= 64`: the grid is quadratic in `n` and exists only for
/// validation-scale inputs.
pub fn full_plane_bispectrum(spectra: &TwoSidedSpectra) -> Result<FullPlaneBispectrum> {
    let n = spectra.half_length();
    if n > MAX_FULL_PLANE_HALF_LENGTH {
        return Err(Error::FullPlaneTooLarge {
            max: MAX_FULL_PLANE_HALF_LENGTH,
            got: n,
        });
    }
    if spectra.segment_count() == 0 {
        return Err(Error::TooFewSegments(0));
    }
    let ni = n as isize;
    let side = 2 * n + 1;
    let mut values = vec![Complex64::default(); side * side];
    let mut defined = vec![false; side * side];
    let inv = 1.0 / spectra.segment_count() as f64;
    for f1 in -ni..=ni {
        for f2 in -ni..=ni {
            if (f1 + f2).abs() > ni {
                continue;
            }
            let mut acc = Complex64::default();
            for seg in 0..spectra.segment_count() {
                let x1 = spectra.value(seg, f1);
                let x2 = spectra.value(seg, f2);
                let xs = spectra.value(seg, f1 + f2);
                acc += x1 * x2 * xs.conj();
            }
            let idx = ((f1 + ni) as usize) * side + (f2 + ni) as usize;
            values[idx] = acc * inv;
            defined[idx] = true;
        }
    }
    Ok(FullPlaneBispectrum {
        n: ni,
        values,
        defined,
    })
}

/// Principal-triangle representative of `(f1, f2)`.
///
/// Returns `(a, b, conjugate)` with `a >= b >= 0` and `a + b <= n` such that
/// `B(f1, f2)` equals `B(a, b)` (or its conjugate when `conjugate` is true).
pub fn principal_image(f1: isize, f2: isize) -> (isize, isize, bool) {
    let triple = [f1, f2, -f1 - f2];
    // The product X(f1) X(f2) X(f3) with f3 = -(f1+f2) is invariant under
    // permutations of the triple; negating all three conjugates it. Pick the
    // unique representative with both kept frequencies non-negative.
    for conj in [false, true] {
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let (a, b) = if conj {
                    (-triple[i], -triple[j])
                } else {
                    (triple[i], triple[j])
                };
                if a >= b && b >= 0 {
                    return (a, b, conj);
                }
            }
        }
    }
    unreachable!("a zero-sum triple always has a non-negative ordered pair");
}

/// Bispectrum folded onto the principal triangle
/// `{(a, b) : a >= b >= 0, a + b <= n}`.
#[derive(Debug, Clone)]
pub struct FoldedPrincipal {
    n: usize,
    values: Vec<Option<Complex64>>,
}

impl FoldedPrincipal {
    pub fn half_length(&self) -> usize {
        self.n
    }

    pub fn at(&self, a: usize, b: usize) -> Option<Complex64> {
        if a <= self.n && b <= self.n {
            self.values[a * (self.n + 1) + b]
        } else {
            None
        }
    }
}

/// Extract the principal-triangle representative values from a full-plane
/// bispectrum.
pub fn fold_to_principal(full: &FullPlaneBispectrum) -> FoldedPrincipal {
    let n = full.half_length();
    let mut values = vec![None; (n + 1) * (n + 1)];
    for a in 0..=n {
        for b in 0..=a.min(n - a) {
            values[a * (n + 1) + b] = full.at(a as isize, b as isize);
        }
    }
    FoldedPrincipal { n, values }
}
