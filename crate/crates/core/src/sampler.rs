//! Acceptance/rejection sampler for perfect matchings.
//!
//! A pass walks the columns left to right. At column `j` it draws a row `R`
//! with probability equal to the ratio of the recursive upper bound of the
//! reduced matrix to the bound of the current matrix, leaving the remaining
//! mass as an explicit rejection outcome. The per-column ratios telescope, so
//! every complete pass lands on any particular perfect matching with
//! probability exactly `1 / M-tilde(A)`; conditioned on acceptance the output
//! is exactly uniform over the perfect matchings. A pass costs O(n^2).
//!
//! The per-pass acceptance probability is `per(A) / M-tilde(A)`, which is
//! what the estimator module turns into a permanent estimate.

use crate::bounds::GFactorTable;
use crate::instance::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::num::NonZeroUsize;
use thiserror::Error;

/// Tolerance on the per-column probability sum. The column ratios provably
/// sum to at most 1; anything past 1 + this slack is a logic error, not
/// rounding.
const PROBABILITY_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplerError {
    #[error("entry ({i}, {j}) is 0; reduction requires an edge")]
    NotAnEdge { i: usize, j: usize },
    #[error("instance has a zero row or column; the permanent is zero")]
    ZeroLine,
    #[error("trial budget of {max_trials} exhausted after {trials} passes")]
    BudgetExhausted { max_trials: u64, trials: u64 },
}

/// A perfect matching stored as `assign[j] = row matched to column j`,
/// 0-based. User-facing renderings are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    assign: Vec<usize>,
}

impl Matching {
    pub(crate) fn new(assign: Vec<usize>) -> Self {
        Self { assign }
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    /// 1-based row indices, position j holding the row matched to column j.
    pub fn one_based(&self) -> Vec<usize> {
        self.assign.iter().map(|&i| i + 1).collect()
    }

    /// True if `assign` is a permutation and every matched pair is an edge.
    pub fn is_valid_for(&self, inst: &Instance) -> bool {
        let n = inst.n();
        if self.assign.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for (j, &i) in self.assign.iter().enumerate() {
            if i >= n || seen[i] || !inst.entry(i, j) {
                return false;
            }
            seen[i] = true;
        }
        true
    }
}

impl std::fmt::Display for Matching {
    /// Space-separated 1-based row indices.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (j, &i) in self.assign.iter().enumerate() {
            if j > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

/// Returns the reduction of `inst` that commits row `i` to column `j`: row
/// `i` and column `j` are zeroed except for entry `(i, j)`, which stays 1.
pub fn reduce(inst: &Instance, i: usize, j: usize) -> Result<Instance, SamplerError> {
    if !inst.entry(i, j) {
        return Err(SamplerError::NotAnEdge { i, j });
    }
    let mut out = inst.clone();
    out.reduce_in_place(i, j);
    Ok(out)
}

/// Mutable state of one sampling pass: the working (partially reduced)
/// matrix, the next column to fill, the partial matching, and the running
/// log-probability of the path taken so far.
#[derive(Debug, Clone)]
pub struct SamplerState {
    work: Instance,
    next_column: usize,
    partial: Vec<usize>,
    log_prob_path: f64,
}

impl SamplerState {
    pub fn new(inst: &Instance) -> Self {
        Self {
            work: inst.clone(),
            next_column: 0,
            partial: Vec::with_capacity(inst.n()),
            log_prob_path: 0.0,
        }
    }

    pub fn work(&self) -> &Instance {
        &self.work
    }

    pub fn next_column(&self) -> usize {
        self.next_column
    }

    pub fn partial(&self) -> &[usize] {
        &self.partial
    }

    /// Sum of the logs of the chosen per-column ratios. After a complete
    /// pass this telescopes to minus the recursive upper bound of the
    /// original instance.
    pub fn log_prob_path(&self) -> f64 {
        self.log_prob_path
    }

    fn commit(&mut self, row: usize, log_prob: f64) {
        self.work.reduce_in_place(row, self.next_column);
        self.partial.push(row);
        self.log_prob_path += log_prob;
        self.next_column += 1;
    }
}

/// Row-selection distribution for the current column of a pass.
#[derive(Debug, Clone)]
pub struct ColumnDistribution {
    /// `probs[i]` = probability of choosing row i; 0 off the column support.
    pub probs: Vec<f64>,
    /// ln of `probs[i]`; `-inf` where the probability is 0.
    pub log_probs: Vec<f64>,
    /// Probability of rejecting at this column, clamped at 0.
    pub reject_mass: f64,
    /// `1 - sum(probs)` before clamping; may be a tiny negative from
    /// rounding, but never below -1e-9.
    pub raw_reject_mass: f64,
}

/// Computes the row-selection probabilities for the current column.
///
/// For a supporting row `i` with current row sum `r(i) >= 2`,
///
/// ```text
/// P(R = i) = e * P / g(r(i) - 1),   P = prod_{k in support} g(r(k) - 1) / g(r(k))
/// ```
///
/// evaluated as sums of logs, one shared product for the whole column and
/// one division per row, O(n) total. A supporting row with `r(i) = 1` is a
/// forced move: committing any other row would zero it out, so every other
/// reduction has bound 0, and the forced row's ratio is the product over
/// the other supporting rows only (its own factor is `e/g(1) = 1`).
///
/// # Panics
///
/// Panics if the column support is empty or contains two exhausted rows
/// (the pass must have rejected before drawing), or if the probabilities
/// sum past `1 + 1e-9`, which the bound construction rules out.
pub fn column_distribution(state: &SamplerState, table: &GFactorTable) -> ColumnDistribution {
    let work = &state.work;
    let n = work.n();
    let j = state.next_column;
    assert!(j < n, "pass is already complete");

    let support: Vec<usize> = work.column_support(j).collect();
    assert!(
        !support.is_empty(),
        "column {j} has empty support; the pass must reject before drawing"
    );

    let mut probs = vec![0.0; n];
    let mut log_probs = vec![f64::NEG_INFINITY; n];
    let mut sum = 0.0;

    let forced: Option<usize> = {
        let mut it = support.iter().copied().filter(|&i| work.row_sum(i) == 1);
        let first = it.next();
        assert!(
            it.next().is_none(),
            "two exhausted rows share column {j}; the pass must reject before drawing"
        );
        first
    };

    if let Some(i0) = forced {
        let log_p: f64 = support
            .iter()
            .filter(|&&k| k != i0)
            .map(|&k| {
                let r = work.row_sum(k);
                table.log_g(r - 1) - table.log_g(r)
            })
            .sum();
        log_probs[i0] = log_p;
        probs[i0] = log_p.exp();
        sum = probs[i0];
    } else {
        let log_shared: f64 = support
            .iter()
            .map(|&k| {
                let r = work.row_sum(k);
                table.log_g(r - 1) - table.log_g(r)
            })
            .sum();
        for &i in &support {
            let log_p = 1.0 + log_shared - table.log_g(work.row_sum(i) - 1);
            log_probs[i] = log_p;
            probs[i] = log_p.exp();
            sum += probs[i];
        }
    }

    let raw_reject_mass = 1.0 - sum;
    assert!(
        raw_reject_mass >= -PROBABILITY_SUM_SLACK,
        "column {j} probabilities sum to {sum}, past 1 + 1e-9: internal error"
    );
    ColumnDistribution {
        probs,
        log_probs,
        reject_mass: raw_reject_mass.max(0.0),
        raw_reject_mass,
    }
}

/// Per-pass observability counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassStats {
    /// Columns committed before the pass ended (n on acceptance).
    pub columns_advanced: usize,
    /// Smallest pre-clamp reject mass seen across the pass's column
    /// distributions; `inf` if the pass rejected before any draw.
    pub min_raw_reject_mass: f64,
}

/// Outcome of a single pass. Rejection is a normal outcome, not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum PassResult {
    Accepted {
        matching: Matching,
        /// Telescoped path log-probability; equals minus the recursive
        /// upper bound of the instance up to rounding.
        log_prob_path: f64,
        stats: PassStats,
    },
    Rejected {
        stats: PassStats,
    },
}

impl PassResult {
    pub fn stats(&self) -> &PassStats {
        match self {
            PassResult::Accepted { stats, .. } | PassResult::Rejected { stats } => stats,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, PassResult::Accepted { .. })
    }
}

/// Runs one acceptance/rejection pass over the columns of `inst`.
///
/// Before drawing at a column the pass rejects early if any current row sum
/// is zero, if the column has no support, or if two supporting rows are both
/// down to a single edge (both situations make completion impossible). Early
/// rejection only shortens doomed passes; acceptance requires completing all
/// n columns, so the accepted-path distribution is untouched and each
/// perfect matching is produced with probability exactly `1 / M-tilde(A)`.
///
/// The caller guarantees `inst` has no zero row or column.
pub fn try_sample_once<R: Rng + ?Sized>(
    inst: &Instance,
    table: &GFactorTable,
    rng: &mut R,
) -> PassResult {
    let n = inst.n();
    let mut state = SamplerState::new(inst);
    let mut min_raw_reject_mass = f64::INFINITY;

    for j in 0..n {
        if state.work.row_sums().contains(&0) {
            return PassResult::Rejected {
                stats: PassStats {
                    columns_advanced: j,
                    min_raw_reject_mass,
                },
            };
        }
        let mut support_len = 0usize;
        let mut exhausted = 0usize;
        for i in state.work.column_support(j) {
            support_len += 1;
            if state.work.row_sum(i) == 1 {
                exhausted += 1;
            }
        }
        if support_len == 0 || exhausted >= 2 {
            return PassResult::Rejected {
                stats: PassStats {
                    columns_advanced: j,
                    min_raw_reject_mass,
                },
            };
        }

        let dist = column_distribution(&state, table);
        min_raw_reject_mass = min_raw_reject_mass.min(dist.raw_reject_mass);

        // single uniform draw, linear scan of cumulative sums
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut chosen = None;
        for i in 0..n {
            let p = dist.probs[i];
            if p > 0.0 {
                cumulative += p;
                if u < cumulative {
                    chosen = Some(i);
                    break;
                }
            }
        }
        match chosen {
            Some(i) => state.commit(i, dist.log_probs[i]),
            // u landed in the reject mass
            None => {
                return PassResult::Rejected {
                    stats: PassStats {
                        columns_advanced: j,
                        min_raw_reject_mass,
                    },
                }
            }
        }
    }

    let matching = Matching::new(state.partial);
    debug_assert!(matching.is_valid_for(inst), "accepted a non-matching");
    #[cfg(debug_assertions)]
    {
        let h = crate::bounds::huber_bound(inst, table).expect("table covers instance");
        debug_assert!(
            (state.log_prob_path + h.log_value).abs() <= 1e-9,
            "telescoping violated: path {} vs bound {}",
            state.log_prob_path,
            h.log_value
        );
    }
    PassResult::Accepted {
        matching,
        log_prob_path: state.log_prob_path,
        stats: PassStats {
            columns_advanced: n,
            min_raw_reject_mass,
        },
    }
}

/// One accepted sample plus how much work it took.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub matching: Matching,
    /// Passes spent on this sample, counting the accepting pass.
    pub trials: u64,
    /// Columns committed across all of this sample's passes.
    pub columns_advanced_total: u64,
    /// Base RNG seed of the run that produced this sample.
    pub seed: u64,
}

/// Result of drawing a batch of samples; `exhausted_trials` is set when the
/// per-sample trial budget ran out, in which case `samples` holds the
/// matchings completed before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRun {
    pub samples: Vec<SampleReport>,
    pub exhausted_trials: Option<u64>,
}

/// Draws `count` exactly-uniform perfect matchings.
///
/// Worker `w` of `workers` owns the ChaCha substream `set_stream(w)` of the
/// base seed and contributes one pass per logical round. Pass outcomes are
/// consumed in canonical order (round-major, then worker index), so the
/// output depends only on `(seed, workers)`, never on scheduling. Trial
/// counts are positions in that canonical order.
pub fn sample_many(
    inst: &Instance,
    table: &GFactorTable,
    seed: u64,
    count: usize,
    workers: NonZeroUsize,
    max_trials: Option<u64>,
) -> Result<SampleRun, SamplerError> {
    if inst.has_zero_line() {
        return Err(SamplerError::ZeroLine);
    }
    let w = workers.get();
    let mut rngs: Vec<ChaCha12Rng> = (0..w)
        .map(|k| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            rng
        })
        .collect();

    let mut samples = Vec::with_capacity(count);
    let mut trials_current: u64 = 0;
    let mut columns_current: u64 = 0;
    if count == 0 {
        return Ok(SampleRun {
            samples,
            exhausted_trials: None,
        });
    }

    // Passes are executed in batches of rounds; outcomes past the final
    // acceptance are discarded, so the batch size never affects the output.
    let rounds_per_batch = if w == 1 { 1 } else { 32 };
    loop {
        let batch = run_batch(&mut rngs, inst, table, rounds_per_batch);
        for round in 0..rounds_per_batch {
            for outcomes in &batch {
                let pass = &outcomes[round];
                trials_current += 1;
                columns_current += pass.stats().columns_advanced as u64;
                match pass {
                    PassResult::Accepted { matching, .. } => {
                        samples.push(SampleReport {
                            matching: matching.clone(),
                            trials: trials_current,
                            columns_advanced_total: columns_current,
                            seed,
                        });
                        trials_current = 0;
                        columns_current = 0;
                        if samples.len() == count {
                            return Ok(SampleRun {
                                samples,
                                exhausted_trials: None,
                            });
                        }
                    }
                    PassResult::Rejected { .. } => {
                        if let Some(m) = max_trials {
                            if trials_current >= m {
                                return Ok(SampleRun {
                                    samples,
                                    exhausted_trials: Some(trials_current),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Each worker advances its own stream by `rounds` passes; workers run on
/// their own threads when there is more than one.
fn run_batch(
    rngs: &mut [ChaCha12Rng],
    inst: &Instance,
    table: &GFactorTable,
    rounds: usize,
) -> Vec<Vec<PassResult>> {
    if rngs.len() == 1 {
        return vec![(0..rounds)
            .map(|_| try_sample_once(inst, table, &mut rngs[0]))
            .collect()];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = rngs
            .iter_mut()
            .map(|rng| {
                scope.spawn(move || {
                    (0..rounds)
                        .map(|_| try_sample_once(inst, table, rng))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler worker panicked"))
            .collect()
    })
}

/// Repeats passes until one accepts; the expected number of passes is
/// `M-tilde(A) / per(A)`.
pub fn sample(
    inst: &Instance,
    table: &GFactorTable,
    seed: u64,
    max_trials: Option<u64>,
) -> Result<SampleReport, SamplerError> {
    let run = sample_many(
        inst,
        table,
        seed,
        1,
        NonZeroUsize::new(1).expect("1 is nonzero"),
        max_trials,
    )?;
    match run.exhausted_trials {
        None => Ok(run.samples.into_iter().next().expect("one sample")),
        Some(trials) => Err(SamplerError::BudgetExhausted {
            max_trials: max_trials.expect("budget was set"),
            trials,
        }),
    }
}
