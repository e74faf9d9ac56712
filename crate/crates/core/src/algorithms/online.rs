//! Online algorithms: output coordinates are produced one step at a time,
//! and step `s` may depend only on the corner `[⌊sn/k⌋]^p` of the input and
//! on the increments already emitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::tensor::{prefix, prefix_bound, GaussianSource, Selection, Tensor};

/// The `s`-th index appended to each of the `p` output sequences.
///
/// Together with the earlier increments it determines the new output
/// entries `A(G)_{≤s} \ A(G)_{≤s-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Increment {
    pub indices: Vec<usize>,
}

pub trait OnlineAlgorithm: Sync {
    fn name(&self) -> &str;

    /// Produces increment `s` (1-based) of `k`. `view` exposes the tensor
    /// as the algorithm may see it at this step.
    fn step(&self, s: usize, k: usize, view: &dyn Tensor, prior: &[Increment]) -> Result<Increment>;

    /// Copy of the algorithm with its internal coins drawn from `key`.
    /// Deterministic algorithms return themselves unchanged.
    fn with_coin(&self, _key: StreamKey) -> Self
    where
        Self: Sized + Clone,
    {
        self.clone()
    }
}

/// Assembles the output selection from a complete list of increments.
pub fn selection_from_increments(p: usize, increments: &[Increment]) -> Result<Selection> {
    let mut sets = vec![Vec::with_capacity(increments.len()); p];
    for (s, inc) in increments.iter().enumerate() {
        if inc.indices.len() != p {
            return Err(Error::InvalidSelection(format!(
                "increment {} has {} coordinates, expected {p}",
                s + 1,
                inc.indices.len()
            )));
        }
        for (set, &i) in sets.iter_mut().zip(&inc.indices) {
            set.push(i);
        }
    }
    Selection::new(sets)
}

/// Runs an online algorithm, revealing the prefix `[⌊sn/k⌋]^p` at step `s`.
/// Reads outside the revealed corner fail.
pub fn run_online<A: OnlineAlgorithm + ?Sized, T: Tensor>(
    alg: &A,
    src: &T,
    k: usize,
) -> Result<(Selection, Vec<Increment>)> {
    if k == 0 || k > src.side() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {}",
            src.side()
        )));
    }
    let mut incs = Vec::with_capacity(k);
    for s in 1..=k {
        let view = prefix(src, s, k)?;
        let inc = alg.step(s, k, &view, &incs)?;
        incs.push(inc);
    }
    let sel = selection_from_increments(src.order(), &incs)?;
    sel.validate_for(src)?;
    Ok((sel, incs))
}

/// The true tensor inside `[bound]^p` and an independent Gaussian stream
/// everywhere else.
struct ResampledExterior<'a, T: ?Sized> {
    inner: &'a T,
    exterior: GaussianSource,
    bound: usize,
}

impl<T: Tensor + ?Sized> Tensor for ResampledExterior<'_, T> {
    fn side(&self) -> usize {
        self.inner.side()
    }
    fn order(&self) -> usize {
        self.inner.order()
    }
    fn value(&self, idx: &[usize]) -> f64 {
        if idx.iter().all(|&i| i <= self.bound) {
            self.inner.value(idx)
        } else {
            self.exterior.value(idx)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub passed: bool,
    pub first_divergent_step: Option<usize>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineCheckReport {
    pub algorithm: String,
    pub k: usize,
    pub trials: Vec<TrialOutcome>,
}

impl OnlineCheckReport {
    pub fn passed(&self) -> usize {
        self.trials.iter().filter(|t| t.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.trials.iter().all(|t| t.passed)
    }
}

/// Replays the algorithm against resampled exteriors.
///
/// Each trial runs the algorithm twice with unrestricted access: once on
/// `src`, once on a tensor that agrees with `src` inside the step-`s`
/// corner and is an independent Gaussian resample outside it. Any
/// difference in the emitted increments (or an error in either run) fails
/// the trial at that step.
pub fn check_online<A: OnlineAlgorithm + ?Sized, T: Tensor>(
    alg: &A,
    src: &T,
    k: usize,
    trials: usize,
    key: StreamKey,
) -> Result<OnlineCheckReport> {
    let (n, p) = (src.side(), src.order());
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let outcomes = (0..trials)
        .map(|trial| -> Result<TrialOutcome> {
            let mut truth: Vec<Increment> = Vec::with_capacity(k);
            let mut replay: Vec<Increment> = Vec::with_capacity(k);
            for s in 1..=k {
                let exterior = GaussianSource::new(n, p, key.derive(&[trial as u64, s as u64]))?;
                let hybrid = ResampledExterior {
                    inner: src,
                    exterior,
                    bound: prefix_bound(s, n, k),
                };
                let a = alg.step(s, k, src, &truth);
                let b = alg.step(s, k, &hybrid, &replay);
                let failure = match (a, b) {
                    (Ok(a), Ok(b)) if a == b => {
                        truth.push(a);
                        replay.push(b);
                        None
                    }
                    (Ok(a), Ok(b)) => Some(format!(
                        "increments differ: {:?} vs {:?}",
                        a.indices, b.indices
                    )),
                    (Err(e), _) | (_, Err(e)) => Some(format!("step failed: {e}")),
                };
                if let Some(detail) = failure {
                    return Ok(TrialOutcome {
                        trial,
                        passed: false,
                        first_divergent_step: Some(s),
                        detail: Some(detail),
                    });
                }
            }
            Ok(TrialOutcome {
                trial,
                passed: true,
                first_divergent_step: None,
                detail: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OnlineCheckReport {
        algorithm: alg.name().to_string(),
        k,
        trials: outcomes,
    })
}
