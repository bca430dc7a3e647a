//! Exact solver for the balanced linear assignment problem.
//!
//! `solve_lap` is a from-scratch Jonker-Volgenant implementation (column
//! reduction with reduction transfer, two rounds of augmenting row reduction,
//! then shortest augmenting paths), O(k^3) on dense cost matrices.
//! `brute_force_lap` enumerates all k! permutations and exists as the
//! independent oracle and the slow arm of the alignment benchmark.
//!
//! Reference: R. Jonker and A. Volgenant, "A Shortest Augmenting Path
//! Algorithm for Dense and Sparse Linear Assignment Problems", Computing 38,
//! 325-340 (1987).

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hamming::{cost_matrix, CostMatrix, LossParams};
use crate::test_fixtures::random_allocation;
use crate::{Error, Result};

/// Dual-feasibility slack for real-valued costs. Integral (equal-penalty)
/// instances never need it.
const EPS: f64 = 1e-9;

/// Largest width accepted by the exhaustive-permutation oracle.
pub const BRUTE_FORCE_MAX_K: usize = 12;

const UNASSIGNED: usize = usize::MAX;

/// A column assignment: `perm[i] = j` pairs row/column `i` of the first
/// matrix with column `j` of the second, at total cost `cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub perm: Vec<usize>,
    pub cost: f64,
}

impl Assignment {
    /// Recompute the total cost of `perm` against `c`.
    pub fn cost_under(&self, c: &CostMatrix) -> f64 {
        self.perm.iter().enumerate().map(|(i, &j)| c.get(i, j)).sum()
    }
}

fn validate(c: &CostMatrix) -> Result<()> {
    if !c.iter_finite() {
        return Err(Error::Dimension(
            "cost matrix entries must be finite".into(),
        ));
    }
    Ok(())
}

/// Minimum-cost assignment via Jonker-Volgenant. Deterministic for a fixed
/// input; ties are resolved by the fixed scan order.
pub fn solve_lap(c: &CostMatrix) -> Result<Assignment> {
    validate(c)?;
    let dim = c.k();
    if dim == 0 {
        return Ok(Assignment {
            perm: Vec::new(),
            cost: 0.0,
        });
    }
    let mut solver = JvSolver::new(c);
    solver.column_reduction_with_transfer();
    for _ in 0..2 {
        if solver.free_rows.is_empty() {
            break;
        }
        solver.augmenting_row_reduction();
    }
    solver.augment_free_rows()?;
    let perm = solver.row_to_col;
    let assignment = Assignment { perm, cost: 0.0 };
    let cost = assignment.cost_under(c);
    Ok(Assignment {
        cost,
        ..assignment
    })
}

struct JvSolver<'a> {
    c: &'a CostMatrix,
    dim: usize,
    row_to_col: Vec<usize>,
    col_to_row: Vec<usize>,
    v: Vec<f64>,
    free_rows: Vec<usize>,
}

impl<'a> JvSolver<'a> {
    fn new(c: &'a CostMatrix) -> Self {
        let dim = c.k();
        Self {
            c,
            dim,
            row_to_col: vec![UNASSIGNED; dim],
            col_to_row: vec![UNASSIGNED; dim],
            v: vec![0.0; dim],
            free_rows: Vec::with_capacity(dim),
        }
    }

    #[inline(always)]
    fn reduced_cost(&self, i: usize, j: usize) -> f64 {
        self.c.get(i, j) - self.v[j]
    }

    fn column_reduction_with_transfer(&mut self) {
        let dim = self.dim;
        let mut claimant = vec![UNASSIGNED; dim]; // per column: row of its minimum
        for j in 0..dim {
            let mut min_i = 0;
            let mut min_v = self.c.get(0, j);
            for i in 1..dim {
                let cij = self.c.get(i, j);
                if cij < min_v {
                    min_v = cij;
                    min_i = i;
                }
            }
            self.v[j] = min_v;
            claimant[j] = min_i;
        }

        let mut unique = vec![true; dim];
        let mut row_unset = vec![true; dim];
        for j in (0..dim).rev() {
            let i = claimant[j];
            if row_unset[i] {
                self.row_to_col[i] = j;
                self.col_to_row[j] = i;
                row_unset[i] = false;
            } else {
                unique[i] = false;
            }
        }

        // Reduction transfer on rows assigned to a uniquely-claimed column.
        for i in 0..dim {
            if row_unset[i] {
                self.free_rows.push(i);
            } else if unique[i] {
                let j = self.row_to_col[i];
                let mut min = f64::INFINITY;
                for j2 in 0..dim {
                    if j2 != j {
                        let rc = self.reduced_cost(i, j2);
                        if rc < min {
                            min = rc;
                        }
                    }
                }
                self.v[j] -= min;
            }
        }
    }

    fn augmenting_row_reduction(&mut self) {
        let dim = self.dim;
        let num_free = self.free_rows.len();
        let mut current = 0;
        let mut still_free = 0;
        let mut scans = 0usize;

        while current < num_free {
            scans += 1;
            let free_i = self.free_rows[current];
            current += 1;

            let (min, submin, mut j1, j2) = self.two_smallest_reduced(free_i);
            let mut displaced = self.col_to_row[j1];
            let v1_new = self.v[j1] - (submin - min);
            let lowers = v1_new < self.v[j1];

            if scans < current * dim {
                if lowers {
                    self.v[j1] = v1_new;
                } else if displaced != UNASSIGNED {
                    if let Some(j2) = j2 {
                        j1 = j2;
                        displaced = self.col_to_row[j1];
                    }
                }
                if displaced != UNASSIGNED {
                    if lowers {
                        current -= 1;
                        self.free_rows[current] = displaced;
                    } else {
                        self.free_rows[still_free] = displaced;
                        still_free += 1;
                    }
                }
            } else if displaced != UNASSIGNED {
                self.free_rows[still_free] = displaced;
                still_free += 1;
            }
            self.row_to_col[free_i] = j1;
            self.col_to_row[j1] = free_i;
        }
        self.free_rows.truncate(still_free);
    }

    /// Minimum and subminimum reduced cost in a row with their columns.
    fn two_smallest_reduced(&self, i: usize) -> (f64, f64, usize, Option<usize>) {
        let mut min = self.reduced_cost(i, 0);
        let mut submin = f64::INFINITY;
        let mut j1 = 0;
        let mut j2 = None;
        for j in 1..self.dim {
            let h = self.reduced_cost(i, j);
            if h < submin {
                if h >= min {
                    submin = h;
                    j2 = Some(j);
                } else {
                    submin = min;
                    j2 = Some(j1);
                    min = h;
                    j1 = j;
                }
            }
        }
        (min, submin, j1, j2)
    }

    fn augment_free_rows(&mut self) -> Result<()> {
        let dim = self.dim;
        let mut pred = vec![0usize; dim];
        let free_rows = std::mem::take(&mut self.free_rows);
        for free_row in free_rows {
            let mut j = self.shortest_path_from(free_row, &mut pred);
            let mut i = UNASSIGNED;
            let mut steps = 0;
            while i != free_row {
                i = pred[j];
                self.col_to_row[j] = i;
                std::mem::swap(&mut j, &mut self.row_to_col[i]);
                steps += 1;
                if steps > dim {
                    return Err(Error::Dimension(
                        "assignment augmentation failed to terminate".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// One run of the modified Dijkstra search; returns the free column that
    /// ends the augmenting path.
    fn shortest_path_from(&mut self, start_row: usize, pred: &mut [usize]) -> usize {
        let dim = self.dim;
        let mut columns: Vec<usize> = (0..dim).collect();
        let mut dist: Vec<f64> = (0..dim)
            .map(|j| self.reduced_cost(start_row, j))
            .collect();
        pred.fill(start_row);

        let mut lo = 0;
        let mut hi = 0;
        let mut n_ready = 0;
        let mut final_j = None;

        while final_j.is_none() {
            if lo == hi {
                n_ready = lo;
                hi = partition_minima(lo, &dist, &mut columns);
                for &j in &columns[lo..hi] {
                    if self.col_to_row[j] == UNASSIGNED {
                        final_j = Some(j);
                    }
                }
            }
            if final_j.is_none() {
                final_j = self.scan_assigned(&mut lo, &mut hi, &mut dist, &mut columns, pred);
            }
        }

        let min_dist = dist[columns[lo]];
        for &j in &columns[..n_ready] {
            self.v[j] += dist[j] - min_dist;
        }
        final_j.unwrap()
    }

    fn scan_assigned(
        &self,
        plo: &mut usize,
        phi: &mut usize,
        dist: &mut [f64],
        columns: &mut [usize],
        pred: &mut [usize],
    ) -> Option<usize> {
        let mut lo = *plo;
        let mut hi = *phi;
        while lo != hi {
            let j = columns[lo];
            lo += 1;
            let i = self.col_to_row[j];
            let min_dist = dist[j];
            let h = self.reduced_cost(i, j) - min_dist;
            for k in hi..columns.len() {
                let j2 = columns[k];
                let cred = self.reduced_cost(i, j2) - h;
                if cred < dist[j2] {
                    dist[j2] = cred;
                    pred[j2] = i;
                    if (cred - min_dist).abs() < EPS {
                        if self.col_to_row[j2] == UNASSIGNED {
                            return Some(j2);
                        }
                        columns.swap(k, hi);
                        hi += 1;
                    }
                }
            }
        }
        *plo = lo;
        *phi = hi;
        None
    }
}

/// Move every column whose distance equals the minimum over
/// `columns[lo..]` to the front of that range; returns the new `hi`.
fn partition_minima(lo: usize, dist: &[f64], columns: &mut [usize]) -> usize {
    let mut hi = lo + 1;
    let mut min = dist[columns[lo]];
    for k in hi..columns.len() {
        let j = columns[k];
        let d = dist[j];
        if d <= min {
            if d < min {
                hi = lo;
                min = d;
            }
            columns.swap(k, hi);
            hi += 1;
        }
    }
    hi
}

/// Exhaustive-permutation oracle: enumerates all k! assignments in
/// lexicographic order and keeps the first minimum. Refuses k > 12.
pub fn brute_force_lap(c: &CostMatrix) -> Result<Assignment> {
    validate(c)?;
    let k = c.k();
    if k > BRUTE_FORCE_MAX_K {
        return Err(Error::SizeLimit(format!(
            "exhaustive enumeration is limited to k <= {BRUTE_FORCE_MAX_K}, got {k}"
        )));
    }
    if k == 0 {
        return Ok(Assignment {
            perm: Vec::new(),
            cost: 0.0,
        });
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_cost: f64 = perm.iter().enumerate().map(|(i, &j)| c.get(i, j)).sum();
    while next_permutation(&mut perm) {
        let cost: f64 = perm.iter().enumerate().map(|(i, &j)| c.get(i, j)).sum();
        if cost < best_cost {
            best_cost = cost;
            best.copy_from_slice(&perm);
        }
    }
    Ok(Assignment {
        perm: best,
        cost: best_cost,
    })
}

/// Advance to the next lexicographic permutation; false once exhausted.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// One row of the alignment benchmark table.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub k: usize,
    pub mean_ms_exhaustive: f64,
    pub mean_ms_lap: f64,
}

/// Time the exhaustive-permutation oracle against the assignment solver on
/// random binary-matrix cost instances with `n` rows, averaging over `reps`
/// replications per width.
pub fn bench_alignment(
    k_values: &[usize],
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    for &k in k_values {
        if k > BRUTE_FORCE_MAX_K {
            return Err(Error::SizeLimit(format!(
                "exhaustive arm is limited to k <= {BRUTE_FORCE_MAX_K}, got {k}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = LossParams::equal();
    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut total_exhaustive = 0.0;
        let mut total_lap = 0.0;
        for _ in 0..reps {
            let x = random_allocation(&mut rng, n, k, 0.5);
            let y = random_allocation(&mut rng, n, k, 0.5);
            let c = cost_matrix(&x, &y, p)?;

            let t0 = Instant::now();
            let slow = brute_force_lap(&c)?;
            total_exhaustive += t0.elapsed().as_secs_f64() * 1e3;

            let t1 = Instant::now();
            let fast = solve_lap(&c)?;
            total_lap += t1.elapsed().as_secs_f64() * 1e3;

            debug_assert!((slow.cost - fast.cost).abs() < 1e-9);
        }
        rows.push(BenchRow {
            k,
            mean_ms_exhaustive: total_exhaustive / reps as f64,
            mean_ms_lap: total_lap / reps as f64,
        });
    }
    Ok(rows)
}

/// A 4x4 worked example; optimal cost 11 via (1->2, 2->3, 3->1,
/// 4->4).
#[doc(hidden)]
pub fn worked_example_cost_matrix() -> CostMatrix {
    CostMatrix::from_rows(&[
        vec![14.0, 3.0, 5.0, 8.0],
        vec![5.0, 12.0, 2.0, 6.0],
        vec![4.0, 7.0, 7.0, 10.0],
        vec![9.0, 2.0, 5.0, 2.0],
    ])
    .unwrap()
}
