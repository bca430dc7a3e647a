//! Binary feature-allocation matrices and their canonicalization.
//!
//! Storage is column-major and bit-packed: each column is a little vector of
//! `u64` words with row `i` at bit `i % 64` of word `i / 64`. Column-vs-column
//! popcounts are the hot path of the cost matrix, so this layout is load
//! bearing for performance. Unused high bits of the last word are kept zero
//! so columns compare with plain `==`.

use crate::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// An `n x k` binary matrix; rows are items, columns are features.
///
/// `k = 0` (the empty allocation) is legal. Entries are observable only as
/// `0`/`1` regardless of the packed representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureAllocation {
    n: usize,
    cols: Vec<Vec<u64>>,
}

impl FeatureAllocation {
    /// All-zero matrix with `n` rows and `k` columns.
    pub fn zeros(n: usize, k: usize) -> Self {
        assert!(n >= 1, "feature allocation needs at least one item");
        Self {
            n,
            cols: vec![vec![0u64; words_for(n)]; k],
        }
    }

    /// Build from dense rows; every entry must be 0 or 1 and rows must be
    /// rectangular.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let n = rows.len();
        let k = rows[0].len();
        let mut z = Self::zeros(n, k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    k
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => z.set(i, j, true),
                    other => {
                        return Err(Error::Dimension(format!(
                            "entry ({},{}) is {}, expected 0 or 1",
                            i + 1,
                            j + 1,
                            other
                        )))
                    }
                }
            }
        }
        Ok(z)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cols[col][row / WORD_BITS] >> (row % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.n);
        let word = &mut self.cols[col][row / WORD_BITS];
        if value {
            *word |= 1 << (row % WORD_BITS);
        } else {
            *word &= !(1 << (row % WORD_BITS));
        }
    }

    pub fn flip(&mut self, row: usize, col: usize) {
        assert!(row < self.n);
        self.cols[col][row / WORD_BITS] ^= 1 << (row % WORD_BITS);
    }

    /// Dense row-major copy, one `Vec<u8>` per row.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.k()).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    pub(crate) fn col_words(&self, col: usize) -> &[u64] {
        &self.cols[col]
    }

    /// Number of ones in column `col`.
    pub fn col_ones(&self, col: usize) -> u32 {
        self.cols[col].iter().map(|w| w.count_ones()).sum()
    }

    /// Total number of ones in the matrix.
    pub fn total_ones(&self) -> u64 {
        (0..self.k()).map(|j| self.col_ones(j) as u64).sum()
    }

    pub fn is_zero_col(&self, col: usize) -> bool {
        self.cols[col].iter().all(|&w| w == 0)
    }

    /// Reorder columns: output column `j` is input column `perm[j]`.
    /// `perm` must be a bijection on `0..k`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.k());
        Self {
            n: self.n,
            cols: perm.iter().map(|&src| self.cols[src].clone()).collect(),
        }
    }

    /// Append zero columns on the right up to width `k_target`.
    pub fn augment(&self, k_target: usize) -> Result<Self> {
        if k_target < self.k() {
            return Err(Error::Dimension(format!(
                "cannot augment from {} down to {} columns",
                self.k(),
                k_target
            )));
        }
        let mut z = self.clone();
        z.cols.resize(k_target, vec![0u64; words_for(self.n)]);
        Ok(z)
    }

    /// Drop all-zero columns, preserving the order of the rest.
    pub fn strip_zero_cols(&self) -> Self {
        Self {
            n: self.n,
            cols: self
                .cols
                .iter()
                .filter(|c| c.iter().any(|&w| w != 0))
                .cloned()
                .collect(),
        }
    }

    /// Elementwise complement (1 - Z), same shape.
    pub fn complement(&self) -> Self {
        let mut cols: Vec<Vec<u64>> = self
            .cols
            .iter()
            .map(|c| c.iter().map(|w| !w).collect())
            .collect();
        let tail = self.n % WORD_BITS;
        if tail != 0 {
            let mask = (1u64 << tail) - 1;
            for c in &mut cols {
                if let Some(last) = c.last_mut() {
                    *last &= mask;
                }
            }
        }
        Self { n: self.n, cols }
    }

    /// Canonical left-ordered form: columns sorted descending by the binary
    /// number read top-down (row 1 is the most significant bit), duplicate
    /// columns kept in their original relative order, all-zero columns
    /// removed.
    pub fn left_order(&self) -> Self {
        let mut z = self.strip_zero_cols();
        z.cols.sort_by(|a, b| column_binary_cmp(b, a));
        z
    }

    /// `Z Z'`: entry `(i, j)` counts the features shared by items `i` and `j`.
    pub fn adjacency(&self) -> AdjacencyMatrix {
        let n = self.n;
        let mut data = vec![0u32; n * n];
        for i in 0..n {
            for j in i..n {
                let mut shared = 0u32;
                for col in &self.cols {
                    let a = col[i / WORD_BITS] >> (i % WORD_BITS) & 1;
                    let b = col[j / WORD_BITS] >> (j % WORD_BITS) & 1;
                    shared += (a & b) as u32;
                }
                data[i * n + j] = shared;
                data[j * n + i] = shared;
            }
        }
        AdjacencyMatrix { n, data }
    }
}

/// Compare two packed columns as top-down binary numbers (row 1 = MSB).
///
/// The first row where the columns differ decides; within a word the earliest
/// row is the lowest-order differing bit.
fn column_binary_cmp(a: &[u64], b: &[u64]) -> std::cmp::Ordering {
    for (wa, wb) in a.iter().zip(b.iter()) {
        let diff = wa ^ wb;
        if diff != 0 {
            let bit = diff.trailing_zeros();
            return (wa >> bit & 1).cmp(&(wb >> bit & 1));
        }
    }
    std::cmp::Ordering::Equal
}

/// Symmetric `n x n` integer matrix of pairwise shared-feature counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    data: Vec<u32>,
}

impl AdjacencyMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }
}

/// An ordered set of posterior samples sharing a common row count.
#[derive(Debug, Clone)]
pub struct SampleSet {
    samples: Vec<FeatureAllocation>,
    n: usize,
}

impl SampleSet {
    pub fn new(samples: Vec<FeatureAllocation>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::Dimension("sample set must not be empty".into()));
        };
        let n = first.n();
        for (b, z) in samples.iter().enumerate() {
            if z.n() != n {
                return Err(Error::Dimension(format!(
                    "sample {} has {} rows but sample 1 has {}",
                    b + 1,
                    z.n(),
                    n
                )));
            }
        }
        Ok(Self { samples, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of samples `B`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // B >= 1 by construction
    }

    pub fn k_max(&self) -> usize {
        self.samples.iter().map(|z| z.k()).max().unwrap_or(0)
    }

    pub fn samples(&self) -> &[FeatureAllocation] {
        &self.samples
    }

    pub fn get(&self, b: usize) -> &FeatureAllocation {
        &self.samples[b]
    }

    /// Copy of the set with every sample zero-padded to `k_max` columns.
    pub fn augmented_to_k_max(&self) -> Self {
        let k = self.k_max();
        Self {
            samples: self
                .samples
                .iter()
                .map(|z| z.augment(k).expect("k_max >= every k"))
                .collect(),
            n: self.n,
        }
    }
}
