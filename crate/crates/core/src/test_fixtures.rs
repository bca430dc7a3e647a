//! Shared fixtures for unit and integration tests.

use crate::matrix::FeatureAllocation;

/// 6x3 matrix Z1: three features over six items; items 5 and 6 share
/// features 1 and 2, items 2 and 4 share features 1 and 3.
pub fn collision_pair_a() -> FeatureAllocation {
    FeatureAllocation::from_rows(&[
        vec![0, 0, 0],
        vec![1, 0, 1],
        vec![0, 1, 1],
        vec![1, 0, 1],
        vec![1, 1, 0],
        vec![1, 1, 0],
    ])
    .unwrap()
}

/// 6x4 matrix Z2: distinct from Z1 (even after left-ordering) yet with the
/// same adjacency matrix.
pub fn collision_pair_b() -> FeatureAllocation {
    FeatureAllocation::from_rows(&[
        vec![0, 0, 0, 0],
        vec![0, 0, 1, 1],
        vec![0, 1, 1, 0],
        vec![0, 0, 1, 1],
        vec![1, 0, 1, 0],
        vec![1, 0, 1, 0],
    ])
    .unwrap()
}

/// Next lexicographic permutation in place; false once exhausted.
pub fn next_perm(perm: &mut [usize]) -> bool {
    crate::lap::next_permutation(perm)
}

/// Independent FARO oracle: zero-pad both matrices to a common width and
/// take the minimum generalized Hamming distance over every explicit column
/// permutation of the second. Factorial in the augmented width.
pub fn exhaustive_faro(
    x: &FeatureAllocation,
    y: &FeatureAllocation,
    p: crate::hamming::LossParams,
) -> f64 {
    let k = x.k().max(y.k());
    assert!(k <= 8, "exhaustive oracle is factorial in k");
    let xa = x.augment(k).unwrap();
    let ya = y.augment(k).unwrap();
    if k == 0 {
        return 0.0;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    loop {
        let yp = ya.permute_cols(&perm);
        let loss = crate::hamming::gen_hamming(&xa, &yp, p).unwrap();
        if loss < best {
            best = loss;
        }
        if !next_perm(&mut perm) {
            break;
        }
    }
    best
}

/// Random binary matrix with entry probability `density`, from any rand Rng.
pub fn random_allocation<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    density: f64,
) -> FeatureAllocation {
    let mut z = FeatureAllocation::zeros(n, k);
    for j in 0..k {
        for i in 0..n {
            if rng.random_bool(density) {
                z.set(i, j, true);
            }
        }
    }
    z
}
