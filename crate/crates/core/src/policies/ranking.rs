//! Index arithmetic shared by the policies.
//!
//! Ties are broken by a priority permutation: `priority[arm]` is the arm's
//! rank, lower wins. The identity permutation gives the "lowest arm index"
//! rule.

use std::cmp::Ordering;

use crate::{Error, Result};

/// Initialization pick `mod(t + k - 2, N) + 1` in 0-based form, for
/// `t` in `1..=N` and 0-based `player`.
pub fn init_select(t: usize, player: usize, num_arms: usize) -> Result<usize> {
    if t == 0 || t > num_arms {
        return Err(Error::InitStepOutOfRange { t, num_arms });
    }
    Ok((t + player - 1) % num_arms)
}

fn by_value_desc(values: &[f64], priority: &[usize], a: usize, b: usize) -> Ordering {
    values[b]
        .total_cmp(&values[a])
        .then(priority[a].cmp(&priority[b]))
}

/// The `m` arms with the largest `values`, returned in ascending arm order.
pub fn top_m(values: &[f64], m: usize, priority: &[usize]) -> Vec<usize> {
    debug_assert!(m <= values.len());
    let mut arms: Vec<usize> = (0..values.len()).collect();
    arms.sort_unstable_by(|&a, &b| by_value_desc(values, priority, a, b));
    arms.truncate(m);
    arms.sort_unstable();
    arms
}

pub fn argmax(values: &[f64], priority: &[usize]) -> usize {
    (0..values.len())
        .min_by(|&a, &b| by_value_desc(values, priority, a, b))
        .expect("at least one arm")
}

/// Member of `candidates` with the smallest value.
pub fn argmin_among(candidates: &[usize], values: &[f64], priority: &[usize]) -> usize {
    *candidates
        .iter()
        .min_by(|&&a, &&b| {
            values[a]
                .total_cmp(&values[b])
                .then(priority[a].cmp(&priority[b]))
        })
        .expect("non-empty candidate set")
}

/// Identity priority: ties go to the lower arm index.
pub fn lowest_index(num_arms: usize) -> Vec<usize> {
    (0..num_arms).collect()
}
