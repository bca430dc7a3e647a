//! Generalized Hamming distance with asymmetric penalties and the
//! column-vs-column cost matrix consumed by the assignment solver.
//!
//! Disagreements are counted as integers per type (1-in-first/0-in-second and
//! the reverse) and combined with the penalties only at the end, so
//! equal-penalty results are exactly integral.

use crate::matrix::FeatureAllocation;
use crate::{Error, Result};

/// Penalty pair `(a, b)` with `a + b = 2`.
///
/// `a` prices an entry present in the first argument (the estimate) but
/// absent in the second (the sample); `b = 2 - a` prices the reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    a: f64,
    b: f64, // derived as 2 - a at construction
}

impl LossParams {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::Config(format!(
                "penalty a must lie strictly in (0, 2), got {a}"
            )));
        }
        Ok(Self { a, b: 2.0 - a })
    }

    /// Equal penalties `a = b = 1` (plain Hamming distance).
    pub fn equal() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The dual parameters with `a` and `b` exchanged; keeps the swap exact
    /// in floating point.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
        }
    }

    /// Combine typed disagreement counts into a loss value.
    pub fn combine(&self, count_10: u64, count_01: u64) -> f64 {
        self.a * count_10 as f64 + self.b * count_01 as f64
    }
}

/// Count the two disagreement types between equal-shape matrices:
/// `(cells with x=1,y=0, cells with x=0,y=1)`.
pub fn disagreement_counts(
    x: &FeatureAllocation,
    y: &FeatureAllocation,
) -> Result<(u64, u64)> {
    if x.n() != y.n() || x.k() != y.k() {
        return Err(Error::Dimension(format!(
            "generalized Hamming distance needs equal shapes, got {}x{} vs {}x{}",
            x.n(),
            x.k(),
            y.n(),
            y.k()
        )));
    }
    let mut c10 = 0u64;
    let mut c01 = 0u64;
    for j in 0..x.k() {
        let (ones_x, ones_y, overlap) = column_counts(x, j, y, j);
        c10 += (ones_x - overlap) as u64;
        c01 += (ones_y - overlap) as u64;
    }
    Ok((c10, c01))
}

/// Generalized Hamming distance between equal-shape binary matrices:
/// `sum of a*[x=1,y=0] + b*[x=0,y=1]` over all cells.
pub fn gen_hamming(
    x: &FeatureAllocation,
    y: &FeatureAllocation,
    p: LossParams,
) -> Result<f64> {
    let (c10, c01) = disagreement_counts(x, y)?;
    Ok(p.combine(c10, c01))
}

pub(crate) fn column_counts(
    x: &FeatureAllocation,
    i: usize,
    y: &FeatureAllocation,
    j: usize,
) -> (u32, u32, u32) {
    let xi = x.col_words(i);
    let yj = y.col_words(j);
    let mut ones_x = 0u32;
    let mut ones_y = 0u32;
    let mut overlap = 0u32;
    for (&wx, &wy) in xi.iter().zip(yj.iter()) {
        ones_x += wx.count_ones();
        ones_y += wy.count_ones();
        overlap += (wx & wy).count_ones();
    }
    (ones_x, ones_y, overlap)
}

/// `k x k` matrix of column-alignment costs; entry `(i, j)` is the
/// generalized Hamming distance between column `i` of the first matrix and
/// column `j` of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    k: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::Dimension(format!(
                    "cost matrix must be square: row of width {} in a {}-row matrix",
                    row.len(),
                    k
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { k, data })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    pub fn iter_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Build the alignment cost matrix for two matrices already at a common
/// width. Each entry uses only per-column popcounts, giving
/// `O(n k^2 / w + k^2)` with `w`-bit words.
pub fn cost_matrix(
    x: &FeatureAllocation,
    y: &FeatureAllocation,
    p: LossParams,
) -> Result<CostMatrix> {
    if x.n() != y.n() || x.k() != y.k() {
        return Err(Error::Dimension(format!(
            "cost matrix needs equal shapes, got {}x{} vs {}x{}",
            x.n(),
            x.k(),
            y.n(),
            y.k()
        )));
    }
    let k = x.k();
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let (m1, m2, o) = column_counts(x, i, y, j);
            data.push(p.combine((m1 - o) as u64, (m2 - o) as u64));
        }
    }
    Ok(CostMatrix { k, data })
}
