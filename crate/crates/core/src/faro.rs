//! FARO loss: the minimum generalized Hamming distance over all column
//! alignments of two feature allocation matrices, after zero-column
//! augmentation to a common width, plus the Monte Carlo expected loss over a
//! sample set.

use rayon::prelude::*;

use crate::hamming::{column_counts, CostMatrix, LossParams};
use crate::lap::{solve_lap, Assignment};
use crate::matrix::{FeatureAllocation, SampleSet};
use crate::{Error, Result};

/// The loss together with the witnessing alignment.
#[derive(Debug, Clone)]
pub struct FaroResult {
    pub loss: f64,
    /// `alignment.perm[i] = j` pairs (augmented) column `i` of the first
    /// matrix with (augmented) column `j` of the second.
    pub alignment: Assignment,
    /// Common width after zero-column augmentation.
    pub k_aligned: usize,
}

/// Alignment cost matrix at the augmented width `max(x.k, y.k)`. Zero
/// columns are virtual: a padded column of `x` against column `j` of `y`
/// costs `b * ones(y_j)`, and symmetrically for `y`.
pub fn aligned_cost_matrix(
    x: &FeatureAllocation,
    y: &FeatureAllocation,
    p: LossParams,
) -> Result<CostMatrix> {
    if x.n() != y.n() {
        return Err(Error::Dimension(format!(
            "FARO loss needs a common row count, got {} vs {}",
            x.n(),
            y.n()
        )));
    }
    let k = x.k().max(y.k());
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let cost = match (i < x.k(), j < y.k()) {
                (true, true) => {
                    let (m1, m2, o) = column_counts(x, i, y, j);
                    p.combine((m1 - o) as u64, (m2 - o) as u64)
                }
                (true, false) => p.combine(x.col_ones(i) as u64, 0),
                (false, true) => p.combine(0, y.col_ones(j) as u64),
                (false, false) => 0.0,
            };
            row.push(cost);
        }
        rows.push(row);
    }
    CostMatrix::from_rows(&rows)
}

/// Minimum generalized Hamming distance over all column alignments.
///
/// The first argument is the candidate/estimate and the second the sample;
/// see the crate docs for the direction convention.
pub fn faro_loss(
    x: &FeatureAllocation,
    y: &FeatureAllocation,
    p: LossParams,
) -> Result<FaroResult> {
    let c = aligned_cost_matrix(x, y, p)?;
    let alignment = solve_lap(&c)?;
    Ok(FaroResult {
        loss: alignment.cost,
        k_aligned: c.k(),
        alignment,
    })
}

/// Monte Carlo expected FARO loss of `candidate` against every sample,
/// `(1/B) * sum_b faro_loss(candidate, Z_b)`.
///
/// Per-sample solves fan out across the rayon pool; the reduction runs in
/// ascending sample order so the value is independent of thread count.
pub fn expected_loss(
    candidate: &FeatureAllocation,
    samples: &SampleSet,
    p: LossParams,
) -> Result<f64> {
    if candidate.n() != samples.n() {
        return Err(Error::Dimension(format!(
            "candidate has {} rows but samples have {}",
            candidate.n(),
            samples.n()
        )));
    }
    let losses: Vec<Result<f64>> = samples
        .samples()
        .par_iter()
        .map(|z| faro_loss(candidate, z, p).map(|r| r.loss))
        .collect();
    let mut total = 0.0;
    for loss in losses {
        total += loss?;
    }
    Ok(total / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamming::gen_hamming;
    use crate::test_fixtures::{
        exhaustive_faro, collision_pair_a, collision_pair_b, random_allocation,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_loss_under_column_permutation() {
        let z = collision_pair_a();
        for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1]] {
            let shuffled = z.permute_cols(&perm);
            for a in [0.5, 1.0, 1.5] {
                let p = LossParams::new(a).unwrap();
                let r = faro_loss(&z, &shuffled, p).unwrap();
                assert_eq!(r.loss, 0.0);
            }
        }
    }

    #[test]
    fn forced_alignment_against_empty_allocation() {
        let ones = FeatureAllocation::from_rows(&vec![vec![1]; 6]).unwrap();
        let empty = FeatureAllocation::zeros(6, 0);
        let p = LossParams::new(0.5).unwrap();
        let r = faro_loss(&ones, &empty, p).unwrap();
        assert_eq!(r.loss, 3.0);
        assert_eq!(r.k_aligned, 1);
        // the reverse direction prices the six entries at b = 1.5
        let rev = faro_loss(&empty, &ones, p).unwrap();
        assert_eq!(rev.loss, 9.0);
    }

    #[test]
    fn empty_vs_empty() {
        let a = FeatureAllocation::zeros(4, 0);
        let r = faro_loss(&a, &a, LossParams::equal()).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!(r.k_aligned, 0);
    }

    #[test]
    fn collision_pair_loss_pinned_by_brute_force() {
        let z1 = collision_pair_a();
        let z2 = collision_pair_b();
        let p = LossParams::equal();
        let oracle = exhaustive_faro(&z1, &z2, p);
        let r = faro_loss(&z1, &z2, p).unwrap();
        assert_eq!(r.loss, oracle);
        assert_eq!(r.loss, 4.0); // frozen from the oracle
        assert!(r.loss > 0.0);
    }

    #[test]
    fn loss_matches_alignment_permuted_hamming() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.random_range(2..12usize);
            let kx = rng.random_range(0..5usize);
            let ky = rng.random_range(0..5usize);
            let x = random_allocation(&mut rng, n, kx, 0.5);
            let y = random_allocation(&mut rng, n, ky, 0.5);
            let p = LossParams::new(0.8).unwrap();
            let r = faro_loss(&x, &y, p).unwrap();
            let xa = x.augment(r.k_aligned).unwrap();
            let ya = y.augment(r.k_aligned).unwrap();
            let aligned_y = ya.permute_cols(&r.alignment.perm);
            let direct = gen_hamming(&xa, &aligned_y, p).unwrap();
            assert!((r.loss - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_row_mismatch() {
        let x = FeatureAllocation::zeros(3, 1);
        let y = FeatureAllocation::zeros(4, 1);
        assert!(faro_loss(&x, &y, LossParams::equal()).is_err());
        let s = SampleSet::new(vec![y]).unwrap();
        assert!(expected_loss(&x, &s, LossParams::equal()).is_err());
    }

    #[test]
    fn expected_loss_simple_cases() {
        let z = collision_pair_a();
        let p = LossParams::equal();
        let single = SampleSet::new(vec![z.clone()]).unwrap();
        assert_eq!(expected_loss(&z, &single, p).unwrap(), 0.0);

        // candidate = Z with one extra 1-entry, three identical samples
        let mut candidate = z.clone();
        candidate.set(0, 0, true);
        let three = SampleSet::new(vec![z.clone(), z.clone(), z.clone()]).unwrap();
        assert_eq!(expected_loss(&candidate, &three, p).unwrap(), 1.0);
    }

    #[test]
    fn expected_loss_matches_brute_force_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let samples: Vec<FeatureAllocation> = (0..5)
            .map(|_| random_allocation(&mut rng, 8, 3, 0.45))
            .collect();
        let candidate = random_allocation(&mut rng, 8, 3, 0.45);
        let p = LossParams::new(1.25).unwrap();
        let oracle: f64 = samples
            .iter()
            .map(|z| exhaustive_faro(&candidate, z, p))
            .sum::<f64>()
            / 5.0;
        let set = SampleSet::new(samples).unwrap();
        assert!((expected_loss(&candidate, &set, p).unwrap() - oracle).abs() < 1e-9);
    }

    fn arb_alloc(n: usize, max_k: usize) -> impl Strategy<Value = FeatureAllocation> {
        prop::collection::vec(prop::collection::vec(0u8..=1, 0..=max_k), n..=n).prop_filter_map(
            "rectangular",
            |mut rows| {
                let k = rows[0].len();
                for r in &mut rows {
                    r.resize(k, 0);
                }
                FeatureAllocation::from_rows(&rows).ok()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quasi_metric_triangle(u in arb_alloc(6, 3), v in arb_alloc(6, 3), w in arb_alloc(6, 3), a in 0.05f64..1.95) {
            let p = LossParams::new(a).unwrap();
            let duv = faro_loss(&u, &v, p).unwrap().loss;
            let dvw = faro_loss(&v, &w, p).unwrap().loss;
            let duw = faro_loss(&u, &w, p).unwrap().loss;
            prop_assert!(duv + dvw >= duw - 1e-9);
        }

        #[test]
        fn zero_iff_same_left_ordered_form(u in arb_alloc(5, 3), v in arb_alloc(5, 3), a in 0.05f64..1.95) {
            let p = LossParams::new(a).unwrap();
            let loss = faro_loss(&u, &v, p).unwrap().loss;
            prop_assert_eq!(loss == 0.0, u.left_order() == v.left_order());
        }

        #[test]
        fn symmetric_when_a_is_one(u in arb_alloc(6, 4), v in arb_alloc(6, 4)) {
            let p = LossParams::equal();
            let forward = faro_loss(&u, &v, p).unwrap().loss;
            let backward = faro_loss(&v, &u, p).unwrap().loss;
            prop_assert_eq!(forward, backward);
        }

        #[test]
        fn penalty_swap_duality(u in arb_alloc(6, 4), v in arb_alloc(6, 4), a in 0.05f64..1.95) {
            let p = LossParams::new(a).unwrap();
            let forward = faro_loss(&u, &v, p).unwrap().loss;
            let backward = faro_loss(&v, &u, p.swapped()).unwrap().loss;
            prop_assert!((forward - backward).abs() < 1e-9);
        }

        #[test]
        fn invariant_under_permutation_and_padding(u in arb_alloc(6, 4), v in arb_alloc(6, 4), extra in 0usize..3, a in 0.05f64..1.95) {
            let p = LossParams::new(a).unwrap();
            let base = faro_loss(&u, &v, p).unwrap().loss;
            let k = v.k();
            let perm: Vec<usize> = (0..k).map(|i| (i + 1) % k.max(1)).collect();
            let v2 = v.permute_cols(&perm).augment(k + extra).unwrap();
            let shuffled = faro_loss(&u, &v2, p).unwrap().loss;
            prop_assert!((base - shuffled).abs() < 1e-9);
            let u2 = u.augment(u.k() + extra).unwrap();
            let padded = faro_loss(&u2, &v, p).unwrap().loss;
            prop_assert!((base - padded).abs() < 1e-9);
        }

        #[test]
        fn lap_equals_exhaustive_minimum(u in arb_alloc(7, 4), v in arb_alloc(7, 4), a in 0.05f64..1.95) {
            let p = LossParams::new(a).unwrap();
            let via_lap = faro_loss(&u, &v, p).unwrap().loss;
            let via_enum = exhaustive_faro(&u, &v, p);
            prop_assert!((via_lap - via_enum).abs() < 1e-9);
        }
    }

    #[test]
    fn max_min_correspondence() {
        // the permutation set maximizing H(x, 1 - perm(y)) equals the set
        // minimizing H(x, perm(y)), checked exhaustively at k <= 5
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..40 {
            let n = rng.random_range(2..8usize);
            let k = rng.random_range(1..=5usize);
            let x = random_allocation(&mut rng, n, k, 0.5);
            let y = random_allocation(&mut rng, n, k, 0.5);
            let p = LossParams::new([0.5, 1.0, 1.5][trial % 3]).unwrap();

            let mut perms: Vec<Vec<usize>> = Vec::new();
            let mut perm: Vec<usize> = (0..k).collect();
            loop {
                perms.push(perm.clone());
                if !crate::test_fixtures::next_perm(&mut perm) {
                    break;
                }
            }
            let y_comp = y.complement();
            let mut min_losses = Vec::new();
            let mut max_star = Vec::new();
            for pm in &perms {
                let yp = y.permute_cols(pm);
                min_losses.push(gen_hamming(&x, &yp, p).unwrap());
                let ycp = y_comp.permute_cols(pm);
                max_star.push(gen_hamming(&x, &ycp, p).unwrap());
            }
            let min = min_losses.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = max_star.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let argmin: Vec<usize> = min_losses
                .iter()
                .enumerate()
                .filter(|(_, &l)| (l - min).abs() < 1e-9)
                .map(|(i, _)| i)
                .collect();
            let argmax: Vec<usize> = max_star
                .iter()
                .enumerate()
                .filter(|(_, &l)| (l - max).abs() < 1e-9)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(argmin, argmax);
        }
    }
}
