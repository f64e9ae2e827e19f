//! Packed index map for the principal frequency-frequency region.
//!
//! For real signals all independent bispectral information lives in the
//! triangle `P = {(k, l) : 1 <= l <= k, k + l <= n}` of bin pairs, with
//! `f1 = k * delta_f >= f2 = l * delta_f`. Matrices over this region are
//! stored packed row-by-row; the map below converts between `(k, l)` pairs
//! and flat indices.

/// Index map over `{(k, l) : 1 <= l <= k, k + l <= n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipalRegion {
    n: usize,
    /// `row_start[k - 1]` is the flat index of cell `(k, 1)`; the final entry
    /// is the total cell count.
    row_start: Vec<usize>,
}

impl PrincipalRegion {
    /// Build the map for `n` positive-frequency bins.
    pub fn new(n: usize) -> Self {
        let mut row_start = Vec::with_capacity(n.max(1));
        let mut acc = 0usize;
        for k in 1..n {
            row_start.push(acc);
            acc += k.min(n - k);
        }
        row_start.push(acc);
        Self { n, row_start }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        *self.row_start.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of valid `l` values in row `k`, `min(k, n - k)`.
    pub fn row_width(&self, k: usize) -> usize {
        if k == 0 || k >= self.n {
            0
        } else {
            k.min(self.n - k)
        }
    }

    pub fn contains(&self, k: usize, l: usize) -> bool {
        k >= 1 && l >= 1 && l <= k && k + l <= self.n
    }

    /// Flat index of cell `(k, l)`, if inside the region.
    pub fn index(&self, k: usize, l: usize) -> Option<usize> {
        if self.contains(k, l) {
            Some(self.row_start[k - 1] + (l - 1))
        } else {
            None
        }
    }

    /// Iterate all cells in storage order as `(k, l)` bin pairs.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n).flat_map(move |k| (1..=self.row_width(k)).map(move |l| (k, l)))
    }
}
