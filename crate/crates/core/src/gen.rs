//! Reproducible test-instance generators: degree-regular bipartite graphs
//! built as unions of random permutations, and nearly regular perturbations
//! with all degrees inside a jitter band.

use crate::instance::Instance;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// Consecutive whole-permutation redraws tolerated before giving up on the
/// random union and switching to the systematic construction.
const MAX_REDRAWS: u32 = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("degree {degree} out of range for n = {n}; need 1 <= degree <= n")]
    DegreeOutOfRange { degree: usize, n: usize },
    #[error("jitter {jitter} pushes degrees outside [1, n] for degree {degree}, n = {n}")]
    JitterOutOfRange {
        degree: usize,
        jitter: usize,
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenModel {
    /// Union of `degree` edge-disjoint random permutation matrices; every
    /// row and column sum is exactly `degree`.
    RegularUnion,
    /// RegularUnion followed by random single-edge additions and removals
    /// that keep every degree within `degree +- jitter`.
    NearlyRegular,
}

/// Parameters of a generated ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub degree: usize,
    pub jitter: usize,
    pub model: GenModel,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.degree == 0 || self.degree > self.n {
            return Err(GenError::DegreeOutOfRange {
                degree: self.degree,
                n: self.n,
            });
        }
        if self.degree + self.jitter > self.n || self.degree <= self.jitter {
            return Err(GenError::JitterOutOfRange {
                degree: self.degree,
                jitter: self.jitter,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// Generates an instance; bit-identical for identical specs.
///
/// The union-of-permutations construction guarantees the permanent is at
/// least 1, each constituent permutation being a perfect matching. If a
/// fresh edge-disjoint permutation cannot be found in 1000 redraws (tiny n
/// with degree close to n), the whole instance falls back to the cyclic
/// construction, which is regular by inspection.
pub fn generate(spec: &GenSpec) -> Result<Instance, GenError> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let base = regular_union(spec.n, spec.degree, &mut rng);
    match spec.model {
        GenModel::RegularUnion => Ok(base),
        GenModel::NearlyRegular => Ok(perturb(base, spec, &mut rng)),
    }
}

/// Row i connected to columns i, i+1, ..., i+degree-1 (mod n): the
/// deterministic fallback, exactly degree-regular.
pub fn cyclic_shift_instance(n: usize, degree: usize) -> Instance {
    Instance::from_fn(n, |i, j| (j + n - i) % n < degree)
}

fn regular_union(n: usize, degree: usize, rng: &mut ChaCha12Rng) -> Instance {
    let mut taken = vec![false; n * n];
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..degree {
        let mut redraws = 0;
        loop {
            perm.shuffle(rng);
            if perm.iter().enumerate().all(|(i, &j)| !taken[i * n + j]) {
                for (i, &j) in perm.iter().enumerate() {
                    taken[i * n + j] = true;
                }
                break;
            }
            redraws += 1;
            if redraws == MAX_REDRAWS {
                return cyclic_shift_instance(n, degree);
            }
        }
    }
    Instance::from_fn(n, |i, j| taken[i * n + j])
}

fn perturb(base: Instance, spec: &GenSpec, rng: &mut ChaCha12Rng) -> Instance {
    let n = spec.n;
    let lo = spec.degree - spec.jitter;
    let hi = spec.degree + spec.jitter;
    let mut adj: Vec<bool> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| base.entry(i, j))
        .collect();
    let mut row_sums: Vec<usize> = base.row_sums().to_vec();
    let mut col_sums: Vec<usize> = base.col_sums().to_vec();

    for _ in 0..4 * n * spec.jitter {
        let add: bool = rng.random();
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if add {
            if !adj[i * n + j] && row_sums[i] < hi && col_sums[j] < hi {
                adj[i * n + j] = true;
                row_sums[i] += 1;
                col_sums[j] += 1;
            }
        } else if adj[i * n + j] && row_sums[i] > lo && col_sums[j] > lo {
            adj[i * n + j] = false;
            row_sums[i] -= 1;
            col_sums[j] -= 1;
        }
    }

    let out = Instance::from_fn(n, |i, j| adj[i * n + j]);
    debug_assert!(!out.has_zero_line(), "lo >= 1 keeps every line nonzero");
    out
}
