//! Small numerical helpers shared by the kernel and the 𝒢 functions.

use std::sync::OnceLock;

/// Largest n for which n! is served from the lookup table.
pub const FACTORIAL_TABLE_MAX: usize = 32;

fn factorial_table() -> &'static [f64; FACTORIAL_TABLE_MAX + 1] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // exact in u128 up to 34!, so each entry is the correctly rounded f64
        let mut table = [1.0; FACTORIAL_TABLE_MAX + 1];
        let mut acc: u128 = 1;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            acc *= n as u128;
            *slot = acc as f64;
        }
        table
    })
}

/// n! as a float.
pub fn factorial(n: usize) -> f64 {
    if n <= FACTORIAL_TABLE_MAX {
        factorial_table()[n]
    } else {
        (FACTORIAL_TABLE_MAX + 1..=n).fold(factorial_table()[FACTORIAL_TABLE_MAX], |acc, j| {
            acc * j as f64
        })
    }
}

/// Binomial coefficient C(n, k) as a float; zero when k > n.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    // exact for every argument we use (n <= 64 keeps the running product in u128)
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Sum a term sequence so that the reversed sequence produces the bit-identical
/// result: terms are combined as (t[0] + t[N]) + (t[1] + t[N-1]) + ...
///
/// The 𝒢 sums are reversed by the 1↔2 mode relabeling, so this keeps the
/// relabeling symmetries exact in floating point.
pub fn palindromic_sum(terms: &[f64]) -> f64 {
    let len = terms.len();
    let mut acc = 0.0;
    for i in 0..len / 2 {
        acc += terms[i] + terms[len - 1 - i];
    }
    if len % 2 == 1 {
        acc += terms[len / 2];
    }
    acc
}

/// Order-independent sum: the result does not depend on the order of `terms`.
pub fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}
