//! Helpers shared by the acceptance suite.

use permatch::Instance;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Random 0-1 instance with i.i.d. Bernoulli(p) entries.
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

/// The worked 4x4 example instance with exactly two perfect matchings.
#[allow(dead_code)]
pub fn example_4x4() -> Instance {
    Instance::from_rows(&[
        vec![1, 0, 1, 0],
        vec![1, 1, 0, 1],
        vec![1, 1, 1, 1],
        vec![0, 0, 1, 0],
    ])
    .unwrap()
}

/// 5x5 instance with all row sums 4 and an all-ones first column.
#[allow(dead_code)]
pub fn five_by_five_row_sums_four() -> Instance {
    Instance::from_fn(5, |i, j| j != 1 + (i % 4))
}
