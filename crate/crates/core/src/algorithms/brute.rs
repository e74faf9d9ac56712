//! Exhaustive maximization of the subtensor average.
//!
//! All `k`-subsets of the first `p - 1` coordinates are enumerated in
//! lexicographic order; for each, the best last-coordinate set is the
//! top `k` fiber sums, which is exact.

use crate::error::{Error, Result};
use crate::tensor::{for_each_product, sum_subtensor, Selection, Tensor};

use super::las::top_k;

/// Default cap on `C(n, k)^p`.
pub const DEFAULT_BRUTE_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteOutcome {
    pub selection: Selection,
    pub sum: f64,
    /// `C(n, k)^p`, the size of the search space.
    pub space: u128,
}

/// `C(n, k)` with saturation at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `C(n, k)^p` with saturation.
pub fn search_space(n: usize, k: usize, p: usize) -> u128 {
    let c = binomial(n, k);
    (0..p).try_fold(1u128, |acc, _| acc.checked_mul(c)).unwrap_or(u128::MAX)
}

/// Advances a strictly increasing 1-based combination over `[1, n]`.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    for i in (0..k).rev() {
        if comb[i] < n - (k - 1 - i) {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn brute_force<T: Tensor + ?Sized>(src: &T, k: usize, budget: u128) -> Result<BruteOutcome> {
    let (n, p) = (src.side(), src.order());
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let space = search_space(n, k, p);
    if space > budget {
        return Err(Error::Capacity(format!(
            "exhaustive search over C({n},{k})^{p} = {space} selections exceeds budget {budget}"
        )));
    }
    let mut prefix: Vec<Vec<usize>> = vec![(1..=k).collect(); p - 1];
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut fiber = vec![0.0; n];
    loop {
        for (j, slot) in fiber.iter_mut().enumerate() {
            let last = [j + 1];
            let mut factors: Vec<&[usize]> = prefix.iter().map(Vec::as_slice).collect();
            factors.push(&last);
            let mut acc = 0.0;
            for_each_product(&factors, |idx| acc += src.value(idx));
            *slot = acc;
        }
        let last = top_k(&fiber, k);
        let value: f64 = last.iter().map(|&j| fiber[j - 1]).sum();
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            let mut sets = prefix.clone();
            sets.push(last);
            best = Some((value, sets));
        }
        // Odometer over the prefix coordinates, last one fastest.
        let mut c = p - 1;
        loop {
            if c == 0 {
                let (_, sets) = best.expect("at least one selection visited");
                let selection = Selection::new(sets)?;
                let sum = sum_subtensor(src, &selection)?;
                return Ok(BruteOutcome {
                    selection,
                    sum,
                    space,
                });
            }
            c -= 1;
            if next_combination(&mut prefix[c], n) {
                break;
            }
            prefix[c] = (1..=k).collect();
        }
    }
}
