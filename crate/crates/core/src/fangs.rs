//! The FANGS search: a two-phase greedy minimizer of the Monte Carlo
//! expected FARO loss, plus the draws-method, SIFA, and pairwise-similarity
//! baselines.
//!
//! Phase one (initialization) draws baselines from the samples, aligns every
//! sample to each baseline, averages the aligned matrices, and thresholds
//! the proportions at `a/2`. Phase two (sweetening) refines the best initial
//! estimates by single-entry flips, keeping a flip only when it strictly
//! lowers the expected loss.

use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::faro::expected_loss;
use crate::hamming::{cost_matrix, LossParams};
use crate::lap::solve_lap;
use crate::matrix::{FeatureAllocation, SampleSet};
use crate::{Error, Result};

/// Tuning parameters for [`fangs`].
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Number of baseline draws in the initialization phase.
    pub n_init: usize,
    /// Number of initial estimates advanced to the sweetening phase.
    pub n_sweet: usize,
    /// Flip proposals per advanced candidate.
    pub n_iter: usize,
    /// Penalty `a` (with `b = 2 - a`).
    pub a: f64,
    /// RNG seed; together with the samples it fully determines the result.
    pub seed: u64,
    /// Worker count for the rayon pool; 0 picks the machine default.
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_init: 16,
            n_sweet: 4,
            n_iter: 1000,
            a: 1.0,
            seed: 0,
            threads: 0,
        }
    }
}

impl SearchConfig {
    pub fn params(&self) -> Result<LossParams> {
        LossParams::new(self.a)
    }

    fn validate(&self, b: usize) -> Result<()> {
        self.params()?;
        if self.n_sweet < 1 || self.n_sweet > self.n_init {
            return Err(Error::Config(format!(
                "need 1 <= n_sweet <= n_init, got n_sweet={} n_init={}",
                self.n_sweet, self.n_init
            )));
        }
        if self.n_init > b {
            return Err(Error::Config(format!(
                "n_init={} exceeds the number of samples B={}",
                self.n_init, b
            )));
        }
        Ok(())
    }
}

/// An accepted flip: the iteration it happened at and the expected loss
/// after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub expected_loss: f64,
}

/// Output of [`fangs`].
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Best estimate found, all-zero columns stripped.
    pub estimate: FeatureAllocation,
    /// Expected FARO loss of the estimate, recomputed post hoc.
    pub expected_loss: f64,
    /// Wall time of the whole search.
    pub seconds: f64,
    /// Accepted-flip trace per advanced candidate, in advancement order.
    pub trace: Vec<Vec<TracePoint>>,
    pub n_accepted_flips: u64,
    /// Expected losses of the `n_init` initial estimates, in draw order.
    pub baseline_losses: Vec<f64>,
}

/// Align `sample` to `target` (equal widths): solve the assignment with the
/// sample in the estimate slot and reorder its columns by the winning
/// permutation.
fn align_one(
    sample: &FeatureAllocation,
    target: &FeatureAllocation,
    p: LossParams,
) -> Result<FeatureAllocation> {
    let c = cost_matrix(sample, target, p)?;
    let assignment = solve_lap(&c)?;
    // perm[i] = j puts sample column i at position j
    let mut sources = vec![0usize; sample.k()];
    for (i, &j) in assignment.perm.iter().enumerate() {
        sources[j] = i;
    }
    Ok(sample.permute_cols(&sources))
}

/// Align every sample's columns to `baseline`. All matrices must already
/// share the baseline's width; the baseline itself passes through unchanged
/// (its self-alignment has cost zero).
pub fn align_to_baseline(
    baseline: &FeatureAllocation,
    samples: &SampleSet,
    p: LossParams,
) -> Result<Vec<FeatureAllocation>> {
    let aligned: Vec<Result<FeatureAllocation>> = samples
        .samples()
        .par_iter()
        .map(|z| align_one(z, baseline, p))
        .collect();
    aligned.into_iter().collect()
}

/// Elementwise mean of the aligned matrices followed by thresholding: a cell
/// becomes 1 only when its proportion of ones strictly exceeds `a/2`.
/// All-zero columns are removed from the result.
pub fn mean_and_threshold(aligned: &[FeatureAllocation], a: f64) -> Result<FeatureAllocation> {
    let Some(first) = aligned.first() else {
        return Err(Error::Dimension(
            "mean_and_threshold needs at least one matrix".into(),
        ));
    };
    let n = first.n();
    let k = first.k();
    for z in aligned {
        if z.n() != n || z.k() != k {
            return Err(Error::Dimension(
                "aligned matrices must share a common shape".into(),
            ));
        }
    }
    let mut counts = vec![0u64; n * k];
    for z in aligned {
        for j in 0..k {
            for i in 0..n {
                counts[j * n + i] += z.get(i, j) as u64;
            }
        }
    }
    let b = aligned.len() as f64;
    let mut out = FeatureAllocation::zeros(n, k);
    for j in 0..k {
        for i in 0..n {
            // strict: proportion must exceed a/2
            if 2.0 * counts[j * n + i] as f64 > a * b {
                out.set(i, j, true);
            }
        }
    }
    Ok(out.strip_zero_cols())
}

/// Greedy refinement: `n_iter` single-entry flip proposals uniform over the
/// candidate's cells, each kept only if it strictly lowers the expected
/// FARO loss. Returns the final matrix and the accepted-flip trace.
pub fn sweeten<R: Rng>(
    candidate: &FeatureAllocation,
    samples: &SampleSet,
    p: LossParams,
    n_iter: usize,
    rng: &mut R,
) -> Result<(FeatureAllocation, Vec<TracePoint>)> {
    let mut current = candidate.clone();
    let mut trace = Vec::new();
    let cells = current.n() * current.k();
    if cells == 0 {
        return Ok((current, trace));
    }
    let mut current_loss = expected_loss(&current, samples, p)?;
    for iteration in 1..=n_iter {
        let cell = rng.random_range(0..cells);
        let (row, col) = (cell % current.n(), cell / current.n());
        current.flip(row, col);
        let proposal_loss = expected_loss(&current, samples, p)?;
        if proposal_loss < current_loss {
            current_loss = proposal_loss;
            trace.push(TracePoint {
                iteration,
                expected_loss: proposal_loss,
            });
        } else {
            current.flip(row, col);
        }
    }
    Ok((current, trace))
}

/// Derive an independent substream seed; splitmix64 over (seed, index).
fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Run the full two-phase search over a sample set.
///
/// Deterministic for fixed `(samples, cfg)` regardless of `cfg.threads`:
/// baseline draws come from one master stream, every sweetening chain gets an
/// index-derived substream, and all reductions run in fixed order.
pub fn fangs(samples: &SampleSet, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate(samples.len())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("failed to build worker pool: {e}")))?;
    pool.install(|| fangs_inner(samples, cfg))
}

fn fangs_inner(samples: &SampleSet, cfg: &SearchConfig) -> Result<SearchResult> {
    let start = Instant::now();
    let p = cfg.params()?;
    let augmented = samples.augmented_to_k_max();

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let baseline_idx: Vec<usize> =
        sample_indices(&mut master, samples.len(), cfg.n_init).into_vec();

    // Initialization phase: one initial estimate per baseline draw.
    let initial: Vec<Result<(FeatureAllocation, f64)>> = baseline_idx
        .par_iter()
        .map(|&idx| {
            let baseline = augmented.get(idx);
            let aligned = align_to_baseline(baseline, &augmented, p)?;
            let estimate = mean_and_threshold(&aligned, cfg.a)?;
            let loss = expected_loss(&estimate, &augmented, p)?;
            Ok((estimate, loss))
        })
        .collect();
    let initial: Vec<(FeatureAllocation, f64)> =
        initial.into_iter().collect::<Result<_>>()?;
    let baseline_losses: Vec<f64> = initial.iter().map(|(_, l)| *l).collect();

    // Advance the n_sweet lowest-loss estimates; ties go to the earlier draw.
    let mut order: Vec<usize> = (0..initial.len()).collect();
    order.sort_by(|&x, &y| {
        baseline_losses[x]
            .partial_cmp(&baseline_losses[y])
            .expect("losses are finite")
            .then(x.cmp(&y))
    });
    let advanced: Vec<usize> = order[..cfg.n_sweet].to_vec();

    // Sweetening phase, one substream per chain.
    let sweetened: Vec<Result<(FeatureAllocation, Vec<TracePoint>, f64)>> = advanced
        .par_iter()
        .enumerate()
        .map(|(rank, &init_idx)| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(cfg.seed, 1 + rank as u64));
            let (matrix, trace) =
                sweeten(&initial[init_idx].0, &augmented, p, cfg.n_iter, &mut rng)?;
            let loss = match trace.last() {
                Some(t) => t.expected_loss,
                None => initial[init_idx].1,
            };
            Ok((matrix, trace, loss))
        })
        .collect();
    let sweetened: Vec<(FeatureAllocation, Vec<TracePoint>, f64)> =
        sweetened.into_iter().collect::<Result<_>>()?;

    let best = sweetened
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.2.partial_cmp(&b.2).expect("losses are finite").then(i.cmp(j))
        })
        .map(|(i, _)| i)
        .expect("n_sweet >= 1");

    let estimate = sweetened[best].0.strip_zero_cols();
    let final_loss = expected_loss(&estimate, samples, p)?;
    let n_accepted_flips = sweetened.iter().map(|(_, t, _)| t.len() as u64).sum();
    Ok(SearchResult {
        estimate,
        expected_loss: final_loss,
        seconds: start.elapsed().as_secs_f64(),
        trace: sweetened.into_iter().map(|(_, t, _)| t).collect(),
        n_accepted_flips,
        baseline_losses,
    })
}

/// The draws method: pick the sample minimizing the Monte Carlo expected
/// loss against all samples; ties go to the lowest sample index.
pub fn draws_method(
    samples: &SampleSet,
    p: LossParams,
) -> Result<(FeatureAllocation, f64)> {
    let losses: Vec<Result<f64>> = samples
        .samples()
        .par_iter()
        .map(|candidate| expected_loss(candidate, samples, p))
        .collect();
    let losses: Vec<f64> = losses.into_iter().collect::<Result<_>>()?;
    let best = losses
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.partial_cmp(b).expect("finite").then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("B >= 1");
    Ok((samples.get(best).clone(), losses[best]))
}

/// SIFA-style estimate: align each sample to its already-aligned
/// predecessor, then take the elementwise mode (ties resolve to 0) and strip
/// zero columns. Alignment uses the assignment solver rather than exhaustive
/// permutation; the optima are identical.
pub fn sifa_estimate(samples: &SampleSet, p: LossParams) -> Result<FeatureAllocation> {
    let augmented = samples.augmented_to_k_max();
    let mut aligned: Vec<FeatureAllocation> = Vec::with_capacity(augmented.len());
    aligned.push(augmented.get(0).clone());
    for b in 1..augmented.len() {
        let prev = &aligned[b - 1];
        aligned.push(align_one(augmented.get(b), prev, p)?);
    }
    let n = samples.n();
    let k = augmented.k_max();
    let b = aligned.len() as u64;
    let mut out = FeatureAllocation::zeros(n, k.max(0));
    for j in 0..k {
        for i in 0..n {
            let ones: u64 = aligned.iter().map(|z| z.get(i, j) as u64).sum();
            if 2 * ones > b {
                out.set(i, j, true);
            }
        }
    }
    Ok(out.strip_zero_cols())
}

/// Pairwise similarity matrix: elementwise mean of the samples' adjacency
/// matrices.
pub fn psm(samples: &SampleSet) -> Vec<Vec<f64>> {
    let n = samples.n();
    let mut acc = vec![vec![0.0f64; n]; n];
    for z in samples.samples() {
        let adj = z.adjacency();
        for (i, row) in acc.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += adj.get(i, j) as f64;
            }
        }
    }
    let b = samples.len() as f64;
    for row in &mut acc {
        for cell in row {
            *cell /= b;
        }
    }
    acc
}

/// Least-squares score of a candidate against the pairwise similarity
/// matrix: the sum of squared deviations of `Z Z'` from `psm`.
pub fn psm_score(candidate: &FeatureAllocation, psm: &[Vec<f64>]) -> f64 {
    let adj = candidate.adjacency();
    let n = candidate.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = adj.get(i, j) as f64 - psm[i][j];
            total += d * d;
        }
    }
    total
}
