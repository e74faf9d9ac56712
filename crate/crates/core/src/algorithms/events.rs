//! Event predicates on algorithm outputs.

use crate::error::Result;
use crate::tensor::{sum_subtensor, Selection, Tensor};
use crate::theory::{kappa, scale_dn, AsymptoticParams};

use super::igp::RunTrace;

/// Sum threshold `(κ_p + ε) 𝔇_n` for a successful output.
pub fn success_threshold(params: &AsymptoticParams) -> Result<f64> {
    Ok((kappa(params.p)? + params.epsilon) * scale_dn(params)?)
}

/// Whether the selected subtensor sum reaches `(κ_p + ε) 𝔇_n`.
pub fn success_event<T: Tensor + ?Sized>(
    sel: &Selection,
    src: &T,
    params: &AsymptoticParams,
) -> Result<bool> {
    Ok(sum_subtensor(src, sel)? >= success_threshold(params)?)
}

/// Lower bound `√(r^{s-1}(r-1)^{p-s}) √((2-ε) log n)` on the round-`r`,
/// coordinate-`s` greedy score. `(2 - ε)` is clamped at zero.
pub fn score_floor(r: usize, s: usize, p: usize, n: usize, epsilon: f64) -> f64 {
    let var = (r as f64).powi(s as i32 - 1) * ((r - 1) as f64).powi((p - s) as i32);
    var.sqrt() * ((2.0 - epsilon).max(0.0) * (n as f64).ln()).sqrt()
}

/// Whether every recorded greedy score clears its floor.
pub fn event_g_monitor(trace: &RunTrace, params: &AsymptoticParams) -> bool {
    trace.rows.iter().all(|row| {
        row.score >= score_floor(row.round, row.coordinate, params.p, params.n, params.epsilon)
    })
}
