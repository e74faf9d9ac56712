//! Monte Carlo estimate of joint success of an online algorithm across the
//! leaves of correlated families.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_online, success_event, OnlineAlgorithm};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::stats::{wilson, WilsonInterval, Z95};
use crate::theory::{AsymptoticParams, PartitionScheme};

use super::bounds::forbidden_prob_bound_log;
use super::forbidden::{is_forbidden, outputs_to_candidate, Extraction};
use super::tree::{correlated_instances, ReplicaTree};

/// How internal coins of a randomized algorithm relate across leaves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoinMode {
    /// One coin stream per trial, reused on every leaf.
    #[default]
    Shared,
    /// A separate coin stream per leaf.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTrial {
    pub trial: usize,
    pub leaf_successes: usize,
    pub joint: bool,
    /// Extraction outcome on joint-success trials.
    pub extraction: Option<String>,
    /// Forbidden-structure verdict when a candidate was extracted.
    pub verdict: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointReport {
    pub scheme: PartitionScheme,
    pub params: AsymptoticParams,
    pub trials: usize,
    pub leaf_count: usize,
    pub coins: CoinMode,
    pub p_suc_hat: f64,
    pub p_joint_hat: f64,
    /// 95% Wilson interval for the joint-success frequency.
    pub ci: WilsonInterval,
    pub p_suc_pow_leaves: f64,
    /// `p̂_joint ≥ p̂_suc^{|L|} - 2 · ci.width()`.
    pub consistent: bool,
    pub extraction_tally: BTreeMap<String, usize>,
    pub verdict_tally: BTreeMap<String, usize>,
    /// Union bound on the forbidden-structure probability, when the scheme
    /// satisfies its inequalities.
    pub bound_log: Option<f64>,
    pub rows: Vec<JointTrial>,
}

/// Runs `alg` on every leaf of `trials` independent correlated families.
///
/// Trial `t` uses the tree keyed by `master.derive([t])`; coins come from
/// `master.derive_label("coins")`.
pub fn estimate_joint_success<A>(
    alg: &A,
    scheme: &PartitionScheme,
    params: &AsymptoticParams,
    trials: usize,
    master: StreamKey,
    coins: CoinMode,
) -> Result<JointReport>
where
    A: OnlineAlgorithm + Clone + Send,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    params.validate()?;
    if scheme.p != params.p {
        return Err(Error::InvalidArgument(format!(
            "scheme built for p = {}, params have p = {}",
            scheme.p, params.p
        )));
    }
    // Fail on malformed input before spending any compute.
    let probe = correlated_instances(ReplicaTree::new(scheme.clone(), master)?, params.n, params.p, params.k)?;
    probe.step_boundaries()?;
    let leaf_count = probe.leaf_count();
    let coin_root = master.derive_label("coins");

    let rows = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<JointTrial> {
            let tree = ReplicaTree::new(scheme.clone(), master.derive(&[t as u64]))?;
            let family = correlated_instances(tree, params.n, params.p, params.k)?;
            let mut outputs = Vec::with_capacity(leaf_count);
            let mut successes = 0;
            for leaf in 0..leaf_count {
                let coin = match coins {
                    CoinMode::Shared => coin_root.derive(&[t as u64]),
                    CoinMode::Independent => coin_root.derive(&[t as u64, leaf as u64]),
                };
                let tensor = family.leaf(leaf);
                let (sel, _) = run_online(&alg.with_coin(coin), &tensor, params.k)?;
                if success_event(&sel, &tensor, params)? {
                    successes += 1;
                }
                outputs.push(sel);
            }
            let joint = successes == leaf_count;
            let (mut extraction, mut verdict) = (None, None);
            if joint {
                let ex = outputs_to_candidate(&family, &outputs)?;
                extraction = Some(ex.label().to_string());
                if let Extraction::Candidate(cand) = ex {
                    let v = is_forbidden(&cand, |l| family.leaf(l), params)?;
                    verdict = Some(v.label().to_string());
                }
            }
            Ok(JointTrial {
                trial: t,
                leaf_successes: successes,
                joint,
                extraction,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let total_success: usize = rows.iter().map(|r| r.leaf_successes).sum();
    let joint_count = rows.iter().filter(|r| r.joint).count();
    let p_suc_hat = total_success as f64 / (trials * leaf_count) as f64;
    let p_joint_hat = joint_count as f64 / trials as f64;
    let ci = wilson(joint_count as u64, trials as u64, Z95);
    let p_suc_pow_leaves = p_suc_hat.powi(leaf_count as i32);
    let mut extraction_tally = BTreeMap::new();
    let mut verdict_tally = BTreeMap::new();
    for r in &rows {
        if let Some(e) = &r.extraction {
            *extraction_tally.entry(e.clone()).or_insert(0) += 1;
        }
        if let Some(v) = &r.verdict {
            *verdict_tally.entry(v.clone()).or_insert(0) += 1;
        }
    }
    let bound_log = forbidden_prob_bound_log(scheme, params).ok().map(|b| b.bound_log);
    Ok(JointReport {
        scheme: scheme.clone(),
        params: *params,
        trials,
        leaf_count,
        coins,
        p_suc_hat,
        p_joint_hat,
        ci,
        p_suc_pow_leaves,
        consistent: p_joint_hat >= p_suc_pow_leaves - 2.0 * ci.width(),
        extraction_tally,
        verdict_tally,
        bound_log,
        rows,
    })
}
