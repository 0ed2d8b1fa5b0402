//! Ground-truth engines for small instances: exact permanents, exhaustive
//! matching enumeration, and a chi-square uniformity harness.

use crate::instance::Instance;
use crate::sampler::Matching;
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};
use std::collections::HashMap;
use thiserror::Error;

/// Inclusion-exclusion is O(2^n * n); past this size the cost guard refuses.
pub const EXACT_PERMANENT_MAX_N: usize = 30;
/// Enumeration refuses once this many matchings have been produced.
pub const ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("n = {n} exceeds the exact-permanent limit of {max}; use the estimator instead")]
    TooLarge { n: usize, max: usize },
    #[error("more than {cap} perfect matchings; enumeration refused")]
    EnumerationCapExceeded { cap: usize },
    #[error("sample {index} is not a member of the support")]
    SampleOutsideSupport { index: usize },
    #[error("support must contain at least 2 matchings, got {got}")]
    SupportTooSmall { got: usize },
    #[error("expected count per cell is {expected:.2}, below the chi-square minimum of 5")]
    Undersampled { expected: f64 },
}

/// Exact number of perfect matchings (the 0-1 permanent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCount {
    pub value: BigUint,
}

impl ExactCount {
    /// Lossy conversion for comparisons against floating-point bounds.
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Natural log of the count; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.value.is_zero() {
            f64::NEG_INFINITY
        } else {
            // exact for anything that fits f64; callers stay under n = 30
            self.to_f64().ln()
        }
    }
}

/// Exact permanent by inclusion-exclusion over column subsets:
///
/// ```text
/// per(A) = (-1)^n sum_{S subseteq columns} (-1)^|S| prod_i sum_{j in S} a_ij
/// ```
///
/// Subsets are visited in minimal-change (Gray code) order so each step
/// updates the row-sum vector along one column only. Terms accumulate in
/// arbitrary precision; a count of zero rows is maintained so the O(n)
/// product is only formed for subsets that can contribute.
pub fn exact_permanent(inst: &Instance) -> Result<ExactCount, OracleError> {
    let n = inst.n();
    if n > EXACT_PERMANENT_MAX_N {
        return Err(OracleError::TooLarge {
            n,
            max: EXACT_PERMANENT_MAX_N,
        });
    }

    let col_support: Vec<Vec<usize>> = (0..n).map(|j| inst.column_support(j).collect()).collect();

    let mut sums = vec![0u64; n];
    let mut zero_rows = n;
    let mut in_set = vec![false; n];
    let mut set_size_odd = false;
    let mut acc = BigInt::zero();

    for step in 1u64..(1u64 << n) {
        let j = step.trailing_zeros() as usize;
        if in_set[j] {
            for &i in &col_support[j] {
                sums[i] -= 1;
                if sums[i] == 0 {
                    zero_rows += 1;
                }
            }
        } else {
            for &i in &col_support[j] {
                if sums[i] == 0 {
                    zero_rows -= 1;
                }
                sums[i] += 1;
            }
        }
        in_set[j] = !in_set[j];
        set_size_odd = !set_size_odd;

        if zero_rows == 0 {
            let term = product_of(&sums);
            // sign of (-1)^(n - |S|)
            if (n % 2 == 1) != set_size_odd {
                acc -= term;
            } else {
                acc += term;
            }
        }
    }

    debug_assert!(acc.sign() != Sign::Minus, "permanent came out negative");
    let (_, value) = acc.into_parts();
    Ok(ExactCount { value })
}

/// Product of row sums; u128 covers n <= 26, larger products spill to BigInt.
fn product_of(sums: &[u64]) -> BigInt {
    let mut acc: u128 = 1;
    for (idx, &s) in sums.iter().enumerate() {
        match acc.checked_mul(s as u128) {
            Some(next) => acc = next,
            None => {
                let mut big = BigInt::from(acc);
                for &rest in &sums[idx..] {
                    big *= rest;
                }
                return big;
            }
        }
    }
    BigInt::from(acc)
}

/// All perfect matchings of `inst`, in lexicographic order of their
/// column-to-row assignment vectors.
///
/// Backtracks over columns left to right trying rows in increasing order,
/// which yields lexicographic order directly. Refuses after
/// [`ENUMERATION_CAP`] matchings.
pub fn enumerate_matchings(inst: &Instance) -> Result<Vec<Matching>, OracleError> {
    let n = inst.n();
    if n > EXACT_PERMANENT_MAX_N {
        return Err(OracleError::TooLarge {
            n,
            max: EXACT_PERMANENT_MAX_N,
        });
    }
    let col_support: Vec<Vec<usize>> = (0..n).map(|j| inst.column_support(j).collect()).collect();
    let mut out = Vec::new();
    let mut assign = Vec::with_capacity(n);
    let mut used = vec![false; n];
    backtrack(&col_support, 0, &mut assign, &mut used, &mut out)?;
    Ok(out)
}

fn backtrack(
    col_support: &[Vec<usize>],
    j: usize,
    assign: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Matching>,
) -> Result<(), OracleError> {
    if j == col_support.len() {
        if out.len() == ENUMERATION_CAP {
            return Err(OracleError::EnumerationCapExceeded {
                cap: ENUMERATION_CAP,
            });
        }
        out.push(Matching::new(assign.clone()));
        return Ok(());
    }
    for &i in &col_support[j] {
        if !used[i] {
            used[i] = true;
            assign.push(i);
            backtrack(col_support, j + 1, assign, used, out)?;
            assign.pop();
            used[i] = false;
        }
    }
    Ok(())
}

/// Pearson chi-square goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChisqResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Tests sampled matchings against the uniform distribution on `support`.
///
/// Every sample must be a member of the support (anything else is a sampler
/// bug and fails hard), and the expected count per cell must be at least 5.
/// The p-value is the upper chi-square tail, i.e. the upper regularized
/// incomplete gamma at `dof/2, statistic/2`.
pub fn uniformity_chisq(
    samples: &[Matching],
    support: &[Matching],
) -> Result<ChisqResult, OracleError> {
    let cells = support.len();
    if cells < 2 {
        return Err(OracleError::SupportTooSmall { got: cells });
    }
    let expected = samples.len() as f64 / cells as f64;
    if expected < 5.0 {
        return Err(OracleError::Undersampled { expected });
    }

    let index: HashMap<&[usize], usize> = support
        .iter()
        .enumerate()
        .map(|(k, m)| (m.assign(), k))
        .collect();
    let mut counts = vec![0u64; cells];
    for (idx, s) in samples.iter().enumerate() {
        match index.get(s.assign()) {
            Some(&k) => counts[k] += 1,
            None => return Err(OracleError::SampleOutsideSupport { index: idx }),
        }
    }

    let statistic: f64 = counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = cells - 1;
    let p_value = statrs::function::gamma::gamma_ur(dof as f64 / 2.0, statistic / 2.0);
    Ok(ChisqResult {
        statistic,
        dof,
        p_value,
    })
}
