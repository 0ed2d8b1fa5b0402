//! Shared helpers for the statistical test suites.

use permatch::Instance;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Random 0-1 instance with i.i.d. Bernoulli(p) entries.
#[allow(dead_code)]
pub fn random_01(rng: &mut ChaCha12Rng, n: usize, p: f64) -> Instance {
    Instance::from_fn(n, |_, _| rng.random::<f64>() < p)
}

/// Resamples until no row is entirely zero.
#[allow(dead_code)]
pub fn random_no_zero_rows(rng: &mut ChaCha12Rng, n: usize, p: f64) -> Instance {
    loop {
        let inst = random_01(rng, n, p);
        if inst.row_sums().iter().all(|&r| r > 0) {
            return inst;
        }
    }
}

/// Resamples until no row or column is entirely zero.
#[allow(dead_code)]
pub fn random_no_zero_lines(rng: &mut ChaCha12Rng, n: usize, p: f64) -> Instance {
    loop {
        let inst = random_01(rng, n, p);
        if !inst.has_zero_line() {
            return inst;
        }
    }
}
