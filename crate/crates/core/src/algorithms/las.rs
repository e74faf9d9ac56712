//! Large Average Submatrix search: alternating row/column best responses
//! from a random start until a fixed point.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::tensor::{Selection, Tensor};

pub const DEFAULT_LAS_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct LasOutcome {
    /// Rows then columns, each sorted ascending.
    pub selection: Selection,
    /// Full alternations performed (columns then rows counts as one).
    pub iterations: usize,
    /// False when the cap was hit before a fixed point.
    pub converged: bool,
}

/// Indices (1-based, ascending) of the `k` largest values; ties go to the
/// smaller index.
pub(crate) fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| {
        values[*b]
            .partial_cmp(&values[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    if k < order.len() {
        order.select_nth_unstable_by(k, cmp);
        order.truncate(k);
    }
    let mut chosen: Vec<usize> = order.into_iter().map(|i| i + 1).collect();
    chosen.sort_unstable();
    chosen
}

/// Best `k` columns given rows (`transpose == false`) or best `k` rows
/// given columns (`transpose == true`).
fn best_response<T: Tensor + ?Sized>(src: &T, fixed: &[usize], k: usize, transpose: bool) -> Vec<usize> {
    let n = src.side();
    let mut sums = vec![0.0; n];
    for &f in fixed {
        for (j, acc) in sums.iter_mut().enumerate() {
            let idx = if transpose { [j + 1, f] } else { [f, j + 1] };
            *acc += src.value(&idx);
        }
    }
    top_k(&sums, k)
}

pub fn las_run<T: Tensor + ?Sized>(src: &T, k: usize, init_seed: StreamKey) -> Result<LasOutcome> {
    las_run_with_cap(src, k, init_seed, DEFAULT_LAS_CAP)
}

pub fn las_run_with_cap<T: Tensor + ?Sized>(
    src: &T,
    k: usize,
    init_seed: StreamKey,
    cap: usize,
) -> Result<LasOutcome> {
    if src.order() != 2 {
        return Err(Error::InvalidArgument(format!(
            "alternating search needs a matrix, got order {}",
            src.order()
        )));
    }
    let n = src.side();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let mut rng = init_seed.sequence();
    let mut rows = rng.subset(1, n, k);
    let mut cols = rng.subset(1, n, k);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        let new_cols = best_response(src, &rows, k, false);
        let new_rows = best_response(src, &new_cols, k, true);
        iterations += 1;
        if new_cols == cols && new_rows == rows {
            converged = true;
            break;
        }
        cols = new_cols;
        rows = new_rows;
    }
    Ok(LasOutcome {
        selection: Selection::new(vec![rows, cols])?,
        iterations,
        converged,
    })
}

/// Whether one full alternation from `sel` leaves it unchanged.
pub fn is_fixed_point<T: Tensor + ?Sized>(src: &T, sel: &Selection) -> bool {
    let sorted = sel.sorted();
    let k = sel.k();
    let cols = best_response(src, sorted.set(0), k, false);
    let rows = best_response(src, &cols, k, true);
    cols == sorted.set(1) && rows == sorted.set(0)
}
