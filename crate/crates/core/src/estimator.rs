//! Permanent estimation from the sampler's acceptance frequency.
//!
//! The per-pass acceptance probability is exactly `per(A) / M-tilde(A)`, so
//! `accepts/trials * M-tilde(A)` estimates the permanent directly; no
//! self-reducibility machinery is involved. The Chernoff bound
//! `P(|sum X_i - tp| > sigma tp) < 2 exp(-sigma^2 tp / 3)` pins down how
//! many expected acceptances make the estimate a `1 + sigma` approximation
//! with probability `1 - delta`.
//!
//! Two stopping rules are provided. `TargetAccepts` (the default) stops once
//! the acceptance count reaches the Chernoff target; it carries a small
//! inverse-binomial bias but needs no a-priori knowledge of the acceptance
//! rate. `FixedTrials` runs a predetermined number of passes and is strictly
//! unbiased.

use crate::bounds::{huber_bound, BoundsError, GFactorTable};
use crate::instance::Instance;
use crate::sampler::{try_sample_once, PassResult};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::num::NonZeroUsize;
use thiserror::Error;

/// Passes each worker runs between merge-and-check points when estimating
/// with more than one worker.
const WORKER_BATCH: u64 = 64;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("sigma must lie strictly inside (0, 1), got {0}")]
    InvalidSigma(f64),
    #[error("delta must lie strictly inside (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("fixed-trials mode needs at least one trial")]
    ZeroTrials,
    #[error("instance has a zero row or column; the permanent is zero")]
    ZeroLine,
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Relative error target `sigma` and failure probability `delta`, both
/// strictly inside (0, 1). The Chernoff bound behind the trial-count target
/// is only stated for sigma < 1, so larger values are refused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyParams {
    sigma: f64,
    delta: f64,
}

impl AccuracyParams {
    pub fn new(sigma: f64, delta: f64) -> Result<Self, EstimatorError> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(EstimatorError::InvalidSigma(sigma));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(EstimatorError::InvalidDelta(delta));
        }
        Ok(Self { sigma, delta })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Stopping rule for [`estimate_permanent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingMode {
    /// Stop once the acceptance count reaches the Chernoff target.
    TargetAccepts,
    /// Stop after exactly this many passes.
    FixedTrials(u64),
}

/// Outcome of an estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialLedger {
    pub trials: u64,
    pub accepts: u64,
    /// ln M-tilde of the instance.
    pub log_m_tilde: f64,
    /// ln(accepts/trials) + ln M-tilde; `-inf` when nothing was accepted.
    pub log_estimate: f64,
    pub sigma: f64,
    pub delta: f64,
    pub seed: u64,
}

impl TrialLedger {
    /// True when a fixed-trials run saw no acceptances; the estimate is then
    /// 0 and should be reported with a warning.
    pub fn zero_accepts(&self) -> bool {
        self.accepts == 0
    }
}

/// Number of acceptances that drives the two-sided Chernoff tail below
/// `delta`: `ceil(3 ln(2/delta) / sigma^2)`.
pub fn chernoff_target_accepts(params: AccuracyParams) -> u64 {
    (3.0 * (2.0 / params.delta).ln() / (params.sigma * params.sigma)).ceil() as u64
}

/// Runs sampler passes and turns the acceptance frequency into a permanent
/// estimate. Single worker: the stopping rule is checked after every pass.
pub fn estimate_permanent(
    inst: &Instance,
    params: AccuracyParams,
    table: &GFactorTable,
    seed: u64,
    mode: StoppingMode,
) -> Result<TrialLedger, EstimatorError> {
    estimate_permanent_with_workers(
        inst,
        params,
        table,
        seed,
        mode,
        NonZeroUsize::new(1).expect("1 is nonzero"),
    )
}

/// Like [`estimate_permanent`], with passes distributed over `workers`
/// independent ChaCha substreams (stream w for worker w).
///
/// Accept/trial counts merge additively. With several workers the stopping
/// decision is evaluated on merged counts at deterministic synchronization
/// points (every 64 passes per worker), so the result depends only on
/// `(seed, workers)`; in fixed-trials mode the remainder that does not fill
/// a whole batch is split across workers by a fixed rule.
pub fn estimate_permanent_with_workers(
    inst: &Instance,
    params: AccuracyParams,
    table: &GFactorTable,
    seed: u64,
    mode: StoppingMode,
    workers: NonZeroUsize,
) -> Result<TrialLedger, EstimatorError> {
    if inst.has_zero_line() {
        return Err(EstimatorError::ZeroLine);
    }
    if let StoppingMode::FixedTrials(0) = mode {
        return Err(EstimatorError::ZeroTrials);
    }
    let log_m_tilde = huber_bound(inst, table)?.log_value;

    let w = workers.get();
    let mut rngs: Vec<ChaCha12Rng> = (0..w)
        .map(|k| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            rng
        })
        .collect();

    let mut trials: u64 = 0;
    let mut accepts: u64 = 0;

    match mode {
        StoppingMode::FixedTrials(t) => {
            if w == 1 {
                for _ in 0..t {
                    trials += 1;
                    accepts += run_pass(inst, table, &mut rngs[0]);
                }
            } else {
                while trials + w as u64 * WORKER_BATCH <= t {
                    let batch = run_round(&mut rngs, inst, table, |_| WORKER_BATCH);
                    trials += w as u64 * WORKER_BATCH;
                    accepts += batch;
                }
                let remainder = t - trials;
                if remainder > 0 {
                    let per_worker = remainder / w as u64;
                    let extra = (remainder % w as u64) as usize;
                    accepts += run_round(&mut rngs, inst, table, |k| {
                        per_worker + u64::from(k < extra)
                    });
                    trials = t;
                }
            }
        }
        StoppingMode::TargetAccepts => {
            let target = chernoff_target_accepts(params);
            if w == 1 {
                while accepts < target {
                    trials += 1;
                    accepts += run_pass(inst, table, &mut rngs[0]);
                }
            } else {
                while accepts < target {
                    accepts += run_round(&mut rngs, inst, table, |_| WORKER_BATCH);
                    trials += w as u64 * WORKER_BATCH;
                }
            }
        }
    }

    let log_estimate = if accepts == 0 {
        f64::NEG_INFINITY
    } else {
        (accepts as f64 / trials as f64).ln() + log_m_tilde
    };
    Ok(TrialLedger {
        trials,
        accepts,
        log_m_tilde,
        log_estimate,
        sigma: params.sigma,
        delta: params.delta,
        seed,
    })
}

fn run_pass(inst: &Instance, table: &GFactorTable, rng: &mut ChaCha12Rng) -> u64 {
    match try_sample_once(inst, table, rng) {
        PassResult::Accepted { .. } => 1,
        PassResult::Rejected { .. } => 0,
    }
}

/// Each worker runs `passes_for(worker_index)` passes on its own thread;
/// returns the total number of acceptances.
fn run_round(
    rngs: &mut [ChaCha12Rng],
    inst: &Instance,
    table: &GFactorTable,
    passes_for: impl Fn(usize) -> u64 + Sync,
) -> u64 {
    std::thread::scope(|scope| {
        let handles: Vec<_> = rngs
            .iter_mut()
            .enumerate()
            .map(|(k, rng)| {
                let passes = passes_for(k);
                scope.spawn(move || {
                    let mut hits = 0u64;
                    for _ in 0..passes {
                        hits += run_pass(inst, table, rng);
                    }
                    hits
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("estimator worker panicked"))
            .sum()
    })
}
