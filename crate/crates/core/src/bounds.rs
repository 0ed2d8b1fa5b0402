//! Permanent bounds in natural-log domain.
//!
//! The centerpiece is the recursively defined factor table `g`, which gives a
//! slightly weaker version of the Bregman upper bound with the property that
//! the bound of a matrix dominates the sum of the bounds of its one-column
//! reductions. That property is what makes acceptance/rejection sampling of
//! perfect matchings possible; the plain Bregman bound does not have it.
//!
//! Everything here is computed and stored as natural logs: the recursive
//! bound of an n-by-n instance overflows 64-bit floats near n = 150 in
//! linear domain.

use crate::instance::Instance;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("g-factor table needs a_max >= 1")]
    EmptyTable,
    #[error("row sum {row_sum} exceeds the g-factor table limit a_max = {a_max}")]
    RowSumExceedsTable { row_sum: usize, a_max: usize },
    #[error("degree {degree} out of range for n = {n}; need 1 <= degree <= n")]
    DegreeOutOfRange { degree: usize, n: usize },
    #[error("instance has a zero row or column; the permanent is zero")]
    ZeroLine,
}

/// Which bound produced a [`LogBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Bregman,
    Huber,
    VdwRegular,
    VdwNearlyRegular,
}

/// A permanent bound carried as a natural log. A zero bound is represented
/// by `log_value = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBound {
    pub log_value: f64,
    pub kind: BoundKind,
}

/// Precomputed table of the recursive factors
///
/// ```text
/// g(1) = e,   g(a + 1) = g(a) + 1 + 1/(2 g(a)) + 0.6/g(a)^2
/// ```
///
/// together with `ln(g(a)) - 1 = ln(g(a)/e)`, the per-row log factor of the
/// recursive upper bound. The recursion is inherently sequential, so the
/// table is built once (to `a_max` at least the largest row sum that will be
/// seen) and shared read-only; it is immutable after construction and safe
/// to share across threads.
#[derive(Debug, Clone)]
pub struct GFactorTable {
    g: Vec<f64>,
    log_g_over_e: Vec<f64>,
}

impl GFactorTable {
    /// Builds the table for `1 <= a <= a_max` in O(a_max).
    pub fn build(a_max: usize) -> Result<Self, BoundsError> {
        if a_max == 0 {
            return Err(BoundsError::EmptyTable);
        }
        let mut g = Vec::with_capacity(a_max);
        g.push(std::f64::consts::E);
        for a in 1..a_max {
            let ga = g[a - 1];
            g.push(ga + 1.0 + 1.0 / (2.0 * ga) + 0.6 / (ga * ga));
        }
        let log_g_over_e = g.iter().map(|x| x.ln() - 1.0).collect();
        Ok(Self { g, log_g_over_e })
    }

    pub fn a_max(&self) -> usize {
        self.g.len()
    }

    /// g(a) for `1 <= a <= a_max`.
    #[inline]
    pub fn g(&self, a: usize) -> f64 {
        self.g[a - 1]
    }

    /// ln g(a).
    #[inline]
    pub fn log_g(&self, a: usize) -> f64 {
        self.log_g_over_e[a - 1] + 1.0
    }

    /// ln(g(a)/e), the log of the per-row factor of the recursive bound.
    #[inline]
    pub fn log_g_over_e(&self, a: usize) -> f64 {
        self.log_g_over_e[a - 1]
    }
}

/// Predicted acceptance behaviour of the rejection sampler on an instance,
/// from the lower/upper bound pair. `expected_trials_upper` may be `inf`
/// when the acceptance lower bound underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimePrediction {
    /// Lower bound on ln(per / M-tilde), clamped to <= 0.
    pub log_acceptance_lower: f64,
    /// exp(-log_acceptance_lower): upper bound on the expected number of
    /// passes per accepted sample.
    pub expected_trials_upper: f64,
    /// Minimum degree over all rows and columns.
    pub delta_min: usize,
    /// delta_min / n.
    pub gamma: f64,
}

/// ln(r!) by direct summation of ln k; exact to a few ulps for r <= 1e4,
/// which keeps tests against printed table values free of Stirling error.
fn ln_factorial(r: usize) -> f64 {
    (2..=r).map(|k| (k as f64).ln()).sum()
}

/// Bregman (Minc) upper bound: per(A) <= prod_i (r(i)!)^(1/r(i)).
///
/// Returns ln of the bound; a zero row or column short-circuits to `-inf`
/// since the permanent is then zero.
pub fn bregman_bound(inst: &Instance) -> LogBound {
    if inst.has_zero_line() {
        return LogBound {
            log_value: f64::NEG_INFINITY,
            kind: BoundKind::Bregman,
        };
    }
    let mut ln_fact = Vec::with_capacity(inst.max_row_sum() + 1);
    ln_fact.push(0.0);
    for k in 1..=inst.max_row_sum() {
        ln_fact.push(ln_fact[k - 1] + (k as f64).ln());
    }
    let mut log_value = 0.0;
    for &r in inst.row_sums() {
        log_value += ln_fact[r] / r as f64;
    }
    LogBound {
        log_value,
        kind: BoundKind::Bregman,
    }
}

/// Recursive upper bound: per(A) <= prod_i g(r(i))/e.
///
/// Slightly weaker than the Bregman bound, but its value on a matrix
/// dominates the sum of its values over all one-column reductions, so the
/// per-column selection ratios of the sampler are genuine probabilities.
pub fn huber_bound(inst: &Instance, table: &GFactorTable) -> Result<LogBound, BoundsError> {
    if inst.has_zero_line() {
        return Ok(LogBound {
            log_value: f64::NEG_INFINITY,
            kind: BoundKind::Huber,
        });
    }
    let mut log_value = 0.0;
    for &r in inst.row_sums() {
        if r > table.a_max() {
            return Err(BoundsError::RowSumExceedsTable {
                row_sum: r,
                a_max: table.a_max(),
            });
        }
        log_value += table.log_g_over_e(r);
    }
    Ok(LogBound {
        log_value,
        kind: BoundKind::Huber,
    })
}

/// Van der Waerden lower bound for a degree-regular instance, with the
/// Stirling refinement: per(A) >= (degree/e)^n sqrt(2 pi n).
pub fn vdw_lower_bound_regular(n: usize, degree: usize) -> Result<LogBound, BoundsError> {
    if degree == 0 || degree > n {
        return Err(BoundsError::DegreeOutOfRange { degree, n });
    }
    let nf = n as f64;
    let log_value =
        nf * ((degree as f64).ln() - 1.0) + 0.5 * (2.0 * std::f64::consts::PI * nf).ln();
    Ok(LogBound {
        log_value,
        kind: BoundKind::VdwRegular,
    })
}

/// Van der Waerden lower bound extended to nearly regular instances.
///
/// Each row is normalized by its row sum; columns whose normalized sum falls
/// below 1 are normalized as well, which makes all line sums at least 1 and
/// keeps the n!/n^n bound applicable. Undoing the normalization gives
///
/// ```text
/// per(A) >= (n!/n^n) * prod_i r(i) * prod_{j : c_j < 1} c_j
/// ```
///
/// where `c_j = sum_i a_ij / r(i)`. A zero row or column yields `-inf`.
pub fn vdw_lower_bound_nearly_regular(inst: &Instance) -> LogBound {
    let n = inst.n();
    if inst.has_zero_line() {
        return LogBound {
            log_value: f64::NEG_INFINITY,
            kind: BoundKind::VdwNearlyRegular,
        };
    }
    let mut col_norm = vec![0.0f64; n];
    for i in 0..n {
        let inv_r = 1.0 / inst.row_sum(i) as f64;
        for (j, c) in col_norm.iter_mut().enumerate() {
            if inst.entry(i, j) {
                *c += inv_r;
            }
        }
    }
    let nf = n as f64;
    let mut log_value = ln_factorial(n) - nf * nf.ln();
    for &r in inst.row_sums() {
        log_value += (r as f64).ln();
    }
    for &c in &col_norm {
        if c < 1.0 {
            log_value += c.ln();
        }
    }
    LogBound {
        log_value,
        kind: BoundKind::VdwNearlyRegular,
    }
}

/// Combines the nearly regular lower bound with the recursive upper bound
/// into an acceptance-rate prediction for the rejection sampler.
pub fn predict_runtime(
    inst: &Instance,
    table: &GFactorTable,
) -> Result<RuntimePrediction, BoundsError> {
    if inst.has_zero_line() {
        return Err(BoundsError::ZeroLine);
    }
    let lower = vdw_lower_bound_nearly_regular(inst).log_value;
    let upper = huber_bound(inst, table)?.log_value;
    let log_acceptance_lower = (lower - upper).min(0.0);
    let delta_min = inst.min_degree();
    Ok(RuntimePrediction {
        log_acceptance_lower,
        expected_trials_upper: (-log_acceptance_lower).exp(),
        delta_min,
        gamma: delta_min as f64 / inst.n() as f64,
    })
}
