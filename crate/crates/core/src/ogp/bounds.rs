//! Union bound on the probability that a forbidden structure exists.
//!
//! Level `ℓ` contributes `Enum_ℓ · Prob_ℓ`, where `Enum_ℓ` counts the ways
//! to choose the coordinate sets of all vertices at depth `≤ ℓ` and
//! `Prob_ℓ` is the Gaussian tail of the depth-`ℓ` shell sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::{AsymptoticParams, PartitionScheme};

fn check_level(ell: usize, scheme: &PartitionScheme) -> Result<()> {
    if ell == 0 || ell > scheme.depth {
        return Err(Error::InvalidArgument(format!(
            "level {ell} outside 1..={}",
            scheme.depth
        )));
    }
    if scheme.alphas.len() != scheme.depth + 1 {
        return Err(Error::InvalidArgument(format!(
            "grid has {} points for depth {}",
            scheme.alphas.len(),
            scheme.depth
        )));
    }
    Ok(())
}

fn gap(scheme: &PartitionScheme, i: usize) -> f64 {
    scheme.alphas[i] - scheme.alphas[i - 1]
}

/// `log Enum_ℓ = p k (Σ_{i≤ℓ} D^{i-1} (α_i - α_{i-1})) log n`.
pub fn enum_count_log(ell: usize, scheme: &PartitionScheme, k: usize, p: usize, n: usize) -> Result<f64> {
    check_level(ell, scheme)?;
    let d = scheme.branching as f64;
    let weight: f64 = (1..=ell).map(|i| d.powi(i as i32 - 1) * gap(scheme, i)).sum();
    Ok((p * k) as f64 * weight * (n as f64).ln())
}

/// `log Prob_ℓ = -p k D^{ℓ-1} (1+δ)² (α_ℓ - α_{ℓ-1}) log n`.
pub fn prob_bound_log(ell: usize, scheme: &PartitionScheme, params: &AsymptoticParams) -> Result<f64> {
    check_level(ell, scheme)?;
    let d = scheme.branching as f64;
    let lead = (params.p * params.k) as f64 * (params.n as f64).ln();
    Ok(-lead * d.powi(ell as i32 - 1) * (1.0 + scheme.delta).powi(2) * gap(scheme, ell))
}

/// Per-level exponents divided by `p k log n`, written so that large
/// powers of `D` factor out of the difference.
fn level_rates(scheme: &PartitionScheme) -> Vec<f64> {
    let d = scheme.branching as f64;
    let excess = (1.0 + scheme.delta).powi(2) - 1.0;
    (1..=scheme.depth)
        .map(|ell| {
            let inner: f64 = (1..ell)
                .map(|i| d.powi(i as i32 - ell as i32) * gap(scheme, i))
                .sum::<f64>()
                - excess * gap(scheme, ell);
            d.powi(ell as i32 - 1) * inner
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `log Σ_ℓ Enum_ℓ Prob_ℓ`.
    pub bound_log: f64,
    /// `log(Enum_ℓ Prob_ℓ)`, `ℓ = 1..=N`.
    pub level_logs: Vec<f64>,
    /// `min_ℓ -log(Enum_ℓ Prob_ℓ) / (p k log n)`.
    pub margin: f64,
    /// `-bound_log / (p k log n)`; the bound reads `exp(-c p k log n)` with this `c`.
    pub effective_c: f64,
}

/// Log of the union bound over levels. Fails if any level term or the
/// total is not below one, which happens when `D` is too small.
pub fn forbidden_prob_bound_log(scheme: &PartitionScheme, params: &AsymptoticParams) -> Result<BoundReport> {
    params.validate()?;
    if scheme.p != params.p {
        return Err(Error::InvalidArgument(format!(
            "scheme built for p = {}, params have p = {}",
            scheme.p, params.p
        )));
    }
    if params.n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {}", params.n)));
    }
    check_level(1, scheme)?;
    let lead = (params.p * params.k) as f64 * (params.n as f64).ln();
    let rates = level_rates(scheme);
    if let Some((ell, r)) = rates.iter().enumerate().find(|(_, r)| !(**r < 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "level {} term has non-negative exponent rate {r}; branching factor D = {} is too small",
            ell + 1,
            scheme.branching
        )));
    }
    let level_logs: Vec<f64> = rates.iter().map(|r| r * lead).collect();
    let top = level_logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound_log = top + level_logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    if !(bound_log < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "union bound log {bound_log} is not negative; branching factor D = {} is too small",
            scheme.branching
        )));
    }
    let margin = rates.iter().map(|r| -r).fold(f64::INFINITY, f64::min);
    Ok(BoundReport {
        bound_log,
        level_logs,
        margin,
        effective_c: -bound_log / lead,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::build_partition;

    #[test]
    fn enum_examples() {
        let s = PartitionScheme::uniform(2, 0.5, 2, 3).unwrap();
        let ln = 1000f64.ln();
        assert!((enum_count_log(1, &s, 4, 2, 1000).unwrap() - 8.0 * 0.5 * ln).abs() < 1e-12);
        assert!((enum_count_log(2, &s, 4, 2, 1000).unwrap() - 2.0 * 8.0 * ln).abs() < 1e-9);
        assert!(enum_count_log(0, &s, 4, 2, 1000).is_err());
        assert!(enum_count_log(3, &s, 4, 2, 1000).is_err());
    }

    #[test]
    fn prob_exponent() {
        let mut s = PartitionScheme::uniform(2, 0.5, 2, 3).unwrap();
        let params = AsymptoticParams::new(1000, 4, 2, 0.5).unwrap();
        assert!(prob_bound_log(2, &s, &params).unwrap() < 0.0);
        s.delta = 0.0;
        let want = -8.0 * 3.0 * 0.5 * 1000f64.ln();
        assert!((prob_bound_log(2, &s, &params).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn level_logs_match_definitions() {
        let s = build_partition(2, 0.5).unwrap();
        let params = AsymptoticParams::new(100_000, 10, 2, 0.5).unwrap();
        let rep = forbidden_prob_bound_log(&s, &params).unwrap();
        for ell in 1..=s.depth {
            let direct = enum_count_log(ell, &s, 10, 2, 100_000).unwrap() + prob_bound_log(ell, &s, &params).unwrap();
            let got = rep.level_logs[ell - 1];
            assert!((direct - got).abs() <= 1e-9 * direct.abs().max(1.0), "{direct} vs {got}");
        }
        assert!(rep.bound_log < 0.0);
        assert!(rep.effective_c > 0.0);
        assert!(rep.effective_c <= rep.margin + 1e-12);
    }

    #[test]
    fn undersized_branching_rejected() {
        let mut s = build_partition(2, 0.2).unwrap();
        s.branching = 1;
        let params = AsymptoticParams::new(100_000, 10, 2, 0.2).unwrap();
        assert!(matches!(forbidden_prob_bound_log(&s, &params), Err(Error::InvalidArgument(_))));
    }
}
