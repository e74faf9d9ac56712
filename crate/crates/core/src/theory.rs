//! Closed-form constants and the branching-parameter construction.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem size and slack shared by the asymptotic formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub epsilon: f64,
}

impl AsymptoticParams {
    pub fn new(n: usize, k: usize, p: usize, epsilon: f64) -> Result<Self> {
        let params = AsymptoticParams { n, k, p, epsilon };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidArgument("order p must be at least 1".into()));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn ln_n(&self) -> Result<f64> {
        ln_side(self.n as f64)
    }
}

fn ln_side(n: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "side n = {n} must be at least 2"
        )));
    }
    Ok(n.ln())
}

fn check_order(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("order p must be at least 1".into()));
    }
    Ok(())
}

/// `κ_p = 2p/(p+1)`.
pub fn kappa(p: usize) -> Result<f64> {
    check_order(p)?;
    Ok(2.0 * p as f64 / (p as f64 + 1.0))
}

/// `2√p/(p+1)`, the ratio of the online-achievable value to the optimum.
pub fn approx_factor(p: usize) -> Result<f64> {
    check_order(p)?;
    Ok(2.0 * (p as f64).sqrt() / (p as f64 + 1.0))
}

/// `5/(3√3)`, the pair-overlap threshold known for matrices. Reference only.
pub fn eta_2ogp() -> f64 {
    5.0 / (3.0 * 3f64.sqrt())
}

/// Optimal average `√(2p log n / k^{p-1})` at a real-valued side `n`.
pub fn eta_opt_at(n: f64, k: usize, p: usize) -> Result<f64> {
    check_order(p)?;
    let ln_n = ln_side(n)?;
    Ok((2.0 * p as f64 * ln_n / (k as f64).powi(p as i32 - 1)).sqrt())
}

pub fn eta_opt(params: &AsymptoticParams) -> Result<f64> {
    params.ln_n()?;
    eta_opt_at(params.n as f64, params.k, params.p)
}

/// Online-achievable average `κ_p √(2 log n / k^{p-1})` at real-valued `n`.
pub fn eta_alg_at(n: f64, k: usize, p: usize) -> Result<f64> {
    let ln_n = ln_side(n)?;
    Ok(kappa(p)? * (2.0 * ln_n / (k as f64).powi(p as i32 - 1)).sqrt())
}

pub fn eta_alg(params: &AsymptoticParams) -> Result<f64> {
    eta_alg_at(params.n as f64, params.k, params.p)
}

/// Sum normalization `𝔇_n = √(2 k^{p+1} log n)` at real-valued `n`.
pub fn scale_dn_at(n: f64, k: usize, p: usize) -> Result<f64> {
    check_order(p)?;
    let ln_n = ln_side(n)?;
    Ok((2.0 * (k as f64).powi(p as i32 + 1) * ln_n).sqrt())
}

pub fn scale_dn(params: &AsymptoticParams) -> Result<f64> {
    scale_dn_at(params.n as f64, params.k, params.p)
}

/// Upper bound `exp(-t²/(2σ²))` on the Gaussian tail `P[N(0, σ²) ≥ t]`.
pub fn gaussian_tail_bound(t: f64, sigma2: f64) -> Result<f64> {
    if !(t > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail bound needs t > 0 and sigma^2 > 0, got t = {t}, sigma^2 = {sigma2}"
        )));
    }
    Ok((-t * t / (2.0 * sigma2)).exp())
}

fn check_grid(alphas: &[f64]) -> Result<()> {
    if alphas.len() < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least the endpoints 0 and 1".into(),
        ));
    }
    if alphas[0] != 0.0 || alphas[alphas.len() - 1] != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "grid must run from 0 to 1, got {} .. {}",
            alphas[0],
            alphas[alphas.len() - 1]
        )));
    }
    if let Some(w) = alphas.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(format!(
            "grid not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `Σ_{j=0}^{p-1} a^j b^{p-1-j}`, which equals `(b^p - a^p)/(b - a)` for `a ≠ b`.
pub(crate) fn shell_poly(a: f64, b: f64, p: usize) -> f64 {
    (0..p)
        .map(|j| a.powi(j as i32) * b.powi((p - 1 - j) as i32))
        .sum()
}

/// Riemann-type sum `p Σ_i Δα_i √(Σ_j α_{i-1}^j α_i^{p-1-j} / p)`, which
/// approaches `κ_p` from above as the grid is refined.
pub fn riemann_gap(alphas: &[f64], p: usize) -> Result<f64> {
    check_order(p)?;
    check_grid(alphas)?;
    let pf = p as f64;
    Ok(pf * alphas
        .windows(2)
        .map(|w| (w[1] - w[0]) * (shell_poly(w[0], w[1], p) / pf).sqrt())
        .sum::<f64>())
}

/// Uniform grid `α_i = i/N`.
pub fn uniform_grid(depth: usize) -> Vec<f64> {
    (0..=depth).map(|i| i as f64 / depth as f64).collect()
}

/// Grid, slack and branching factor of the replica tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionScheme {
    pub p: usize,
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub depth: usize,
    pub alphas: Vec<f64>,
    pub delta: f64,
    #[serde(rename = "D")]
    pub branching: usize,
}

/// Largest grid depth tried by [`build_partition`].
pub const DEFAULT_DEPTH_CAP: usize = 1 << 16;

/// `δ` from `1 + δ = (κ_p + ε)/(κ_p + ε/10)`.
pub fn delta_for(p: usize, epsilon: f64) -> Result<f64> {
    let kp = kappa(p)?;
    Ok((kp + epsilon) / (kp + epsilon / 10.0) - 1.0)
}

/// `max_ℓ α_{ℓ-1} / (2δ (α_ℓ - α_{ℓ-1}))`; the branching factor must exceed it.
pub fn branching_lower_bound(alphas: &[f64], delta: f64) -> f64 {
    alphas
        .windows(2)
        .map(|w| w[0] / (2.0 * delta * (w[1] - w[0])))
        .fold(0.0, f64::max)
}

impl PartitionScheme {
    /// Scheme on the uniform grid of the given depth with an explicit
    /// branching factor. The two defining inequalities are not enforced;
    /// call [`PartitionScheme::validate`] to check them.
    pub fn uniform(p: usize, epsilon: f64, depth: usize, branching: usize) -> Result<Self> {
        if depth == 0 || branching == 0 {
            return Err(Error::InvalidArgument(format!(
                "depth and branching must be positive, got N = {depth}, D = {branching}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(PartitionScheme {
            p,
            epsilon,
            depth,
            alphas: uniform_grid(depth),
            delta: delta_for(p, epsilon)?,
            branching,
        })
    }

    /// Whether the grid's Riemann sum is within `ε/10` of `κ_p`.
    pub fn satisfies_riemann_bound(&self) -> Result<bool> {
        Ok(riemann_gap(&self.alphas, self.p)? <= kappa(self.p)? + self.epsilon / 10.0)
    }

    /// Whether the branching factor exceeds the grid-dependent lower bound.
    pub fn satisfies_branching_bound(&self) -> bool {
        self.branching as f64 > branching_lower_bound(&self.alphas, self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.alphas)?;
        if self.alphas.len() != self.depth + 1 {
            return Err(Error::InvalidArgument(format!(
                "grid has {} points, depth N = {} needs {}",
                self.alphas.len(),
                self.depth,
                self.depth + 1
            )));
        }
        let expected = delta_for(self.p, self.epsilon)?;
        if (self.delta - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta {} does not match (kappa+eps)/(kappa+eps/10) - 1 = {expected}",
                self.delta
            )));
        }
        if !self.satisfies_riemann_bound()? {
            return Err(Error::InvalidArgument(format!(
                "Riemann sum {} exceeds kappa_p + eps/10 = {}",
                riemann_gap(&self.alphas, self.p)?,
                kappa(self.p)? + self.epsilon / 10.0
            )));
        }
        if !self.satisfies_branching_bound() {
            return Err(Error::InvalidArgument(format!(
                "branching factor D = {} does not exceed {}",
                self.branching,
                branching_lower_bound(&self.alphas, self.delta)
            )));
        }
        Ok(())
    }

    /// Number of tree leaves `D^{N-1}`, if it fits in `usize`.
    pub fn leaf_count(&self) -> Option<usize> {
        self.branching.checked_pow(self.depth as u32 - 1)
    }
}

/// Smallest power-of-two uniform grid meeting the Riemann bound, with the
/// smallest admissible branching factor.
pub fn build_partition(p: usize, epsilon: f64) -> Result<PartitionScheme> {
    build_partition_with_cap(p, epsilon, DEFAULT_DEPTH_CAP)
}

pub fn build_partition_with_cap(p: usize, epsilon: f64, depth_cap: usize) -> Result<PartitionScheme> {
    let kp = kappa(p)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let target = kp + epsilon / 10.0;
    let mut depth = 1usize;
    let alphas = loop {
        if depth > depth_cap {
            return Err(Error::Capacity(format!(
                "no uniform grid with N <= {depth_cap} reaches kappa_p + eps/10 for p = {p}, eps = {epsilon}"
            )));
        }
        let grid = uniform_grid(depth);
        if riemann_gap(&grid, p)? <= target {
            break grid;
        }
        depth *= 2;
    };
    let delta = delta_for(p, epsilon)?;
    let bound = branching_lower_bound(&alphas, delta);
    let branching = (bound.floor() as usize + 1).max(1);
    let scheme = PartitionScheme {
        p,
        epsilon,
        depth,
        alphas,
        delta,
        branching,
    };
    debug_assert!(scheme.validate().is_ok());
    Ok(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(1).unwrap(), 1.0);
        assert!((kappa(2).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((kappa(3).unwrap() - 1.5).abs() < 1e-15);
        assert!(kappa(0).is_err());
        for p in 2..20 {
            let (a, b) = (kappa(p).unwrap(), kappa(p + 1).unwrap());
            assert!(1.0 < a && a < 2.0 && a < b);
        }
    }

    #[test]
    fn eta_values() {
        assert!((eta_opt_at(E, 1, 1).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let params = AsymptoticParams::new(1000, 7, 2, 0.1).unwrap();
        let matrix_opt = 2.0 * ((1000f64).ln() / 7.0).sqrt();
        assert!((eta_opt(&params).unwrap() - matrix_opt).abs() < 1e-12);
        let alg = 4.0 / 3.0 * (2.0 * (1000f64).ln() / 7.0).sqrt();
        assert!((eta_alg(&params).unwrap() - alg).abs() < 1e-12);
        assert!(eta_opt_at(1.5, 1, 1).is_err());
        assert!(AsymptoticParams::new(1, 1, 1, 0.1).and_then(|p| eta_opt(&p)).is_err());
    }

    #[test]
    fn ratio_identity() {
        for p in 1..12 {
            for &(n, k) in &[(100usize, 3usize), (100_000, 10), (50, 50)] {
                let params = AsymptoticParams::new(n, k, p, 0.2).unwrap();
                let ratio = eta_alg(&params).unwrap() / eta_opt(&params).unwrap();
                assert!((ratio - approx_factor(p).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn approx_factor_values() {
        assert_eq!(approx_factor(1).unwrap(), 1.0);
        let f2 = approx_factor(2).unwrap();
        assert!((f2 - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((f2 - 0.9428).abs() < 1e-4);
        for p in 1..50 {
            assert!(approx_factor(p + 1).unwrap() < approx_factor(p).unwrap());
        }
        assert!(approx_factor(0).is_err());
    }

    #[test]
    fn two_ogp_constant() {
        let v = eta_2ogp();
        assert!((v - 0.9623).abs() < 1e-4);
        assert!((v - 5.0 * 3f64.sqrt() / 9.0).abs() < 1e-12);
        assert!(approx_factor(2).unwrap() < v);
    }

    #[test]
    fn scale_dn_identities() {
        assert!((scale_dn_at(E, 1, 1).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        for p in 1..5 {
            let params = AsymptoticParams::new(5000, 6, p, 0.3).unwrap();
            let kp = kappa(p).unwrap();
            let lhs = (kp + 0.3) * scale_dn(&params).unwrap() / 6f64.powi(p as i32);
            let rhs = (kp + 0.3) * (2.0 * 5000f64.ln() / 6f64.powi(p as i32 - 1)).sqrt();
            assert!((lhs - rhs).abs() < 1e-12);
            let double = AsymptoticParams { k: 12, ..params };
            let growth = scale_dn(&double).unwrap() / scale_dn(&params).unwrap();
            assert!((growth - 2f64.powf((p as f64 + 1.0) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_bound() {
        assert!((gaussian_tail_bound(2.0, 4.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(gaussian_tail_bound(0.0, 1.0).is_err());
        assert!(gaussian_tail_bound(1.0, 0.0).is_err());
        assert!(gaussian_tail_bound(-1.0, 1.0).is_err());
    }

    #[test]
    fn riemann_gap_basics() {
        for n in [1, 3, 17] {
            assert!((riemann_gap(&uniform_grid(n), 1).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(riemann_gap(&[0.0, 0.5, 0.5, 1.0], 2).is_err());
        assert!(riemann_gap(&[0.1, 1.0], 2).is_err());
        assert!(riemann_gap(&[0.0, 0.9], 2).is_err());
        assert!((riemann_gap(&uniform_grid(512), 2).unwrap() - 4.0 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn riemann_gap_dominates_kappa_and_refines() {
        for p in 1..=4 {
            let kp = kappa(p).unwrap();
            for n in 1..=64 {
                let g = riemann_gap(&uniform_grid(n), p).unwrap();
                assert!(g >= kp - 1e-12, "p={p} N={n}: {g} < {kp}");
                let g2 = riemann_gap(&uniform_grid(2 * n), p).unwrap();
                assert!(g2 <= g + 1e-12);
            }
        }
    }

    #[test]
    fn partition_construction() {
        let s = build_partition(1, 0.3).unwrap();
        assert_eq!(s.depth, 1);
        assert_eq!(s.branching, 1);
        for p in 1..=3 {
            for eps in [0.1, 0.2, 0.5] {
                let s = build_partition(p, eps).unwrap();
                s.validate().unwrap();
                assert!(s.depth.is_power_of_two());
                let n = s.depth as f64;
                let uniform_bound = s.alphas[s.depth - 1] * n / (2.0 * s.delta);
                assert!(s.branching as f64 > uniform_bound);
                assert!((s.branching - 1) as f64 <= uniform_bound);
                let lhs = 1.0 + s.delta;
                let kp = kappa(p).unwrap();
                assert!((lhs - (kp + eps) / (kp + eps / 10.0)).abs() < 1e-15);
            }
        }
        assert!(matches!(
            build_partition_with_cap(2, 1e-9, 64),
            Err(Error::Capacity(_))
        ));
        assert!(build_partition(2, 0.0).is_err());
    }

    #[test]
    fn override_scheme_validation() {
        let s = PartitionScheme::uniform(2, 0.25, 2, 2).unwrap();
        assert!(!s.satisfies_branching_bound());
        assert!(s.validate().is_err());
        let json = serde_json::to_value(&s).unwrap();
        for field in ["p", "epsilon", "N", "alphas", "delta", "D"] {
            assert!(json.get(field).is_some(), "{field}");
        }
    }
}
