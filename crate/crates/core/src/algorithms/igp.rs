//! Incremental Greedy Procedure.
//!
//! Round `r` appends one index to every coordinate set, sweeping the
//! coordinates in order. Coordinate `s` picks, from block `P_{r,n}`, the
//! index maximizing the sum of the fiber through the current partial sets
//! (coordinates before `s` already hold `r` indices, those after hold
//! `r - 1`). Round `r` therefore reads only the corner `[r⌊n/k⌋]^p`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::tensor::{for_each_product, partition_block, prefix, Selection, Tensor};

use super::online::{Increment, OnlineAlgorithm};

/// How the first `p - 1` coordinates are seeded in round one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "key")]
pub enum InitMode {
    /// First index of `P_{1,n}` for every coordinate.
    #[default]
    First,
    /// Uniform index of `P_{1,n}` per coordinate, drawn from the key.
    Seeded(StreamKey),
}

/// Partial coordinate sets while a round is in progress.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IgpState {
    pub sets: Vec<Vec<usize>>,
    /// Round being built (1-based); 0 before the first round starts.
    pub round: usize,
    pub n: usize,
    pub k: usize,
}

impl IgpState {
    pub fn new(n: usize, p: usize, k: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("order p must be positive".into()));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        Ok(IgpState {
            sets: vec![Vec::with_capacity(k); p],
            round: 0,
            n,
            k,
        })
    }

    /// Rebuilds the state at the start of round `prior.len() + 1`.
    fn from_increments(n: usize, p: usize, k: usize, prior: &[Increment]) -> Result<Self> {
        let mut state = IgpState::new(n, p, k)?;
        for inc in prior {
            if inc.indices.len() != p {
                return Err(Error::InvalidArgument(format!(
                    "increment has {} coordinates, expected {p}",
                    inc.indices.len()
                )));
            }
            for (set, &i) in state.sets.iter_mut().zip(&inc.indices) {
                set.push(i);
            }
        }
        state.round = prior.len();
        Ok(state)
    }

    pub fn order(&self) -> usize {
        self.sets.len()
    }
}

/// Sum of the fiber with coordinate `s` fixed at `j` (the score `M_s^{(r)}(j)`).
///
/// `s` is 1-based. The state must be mid-round: coordinates before `s`
/// hold `round` indices and coordinates from `s` on hold `round - 1`.
pub fn score_candidate<T: Tensor + ?Sized>(
    src: &T,
    state: &IgpState,
    s: usize,
    j: usize,
) -> Result<f64> {
    let p = state.order();
    let r = state.round;
    if s == 0 || s > p {
        return Err(Error::InvalidArgument(format!("coordinate {s} outside [1, {p}]")));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("no round in progress".into()));
    }
    let block = partition_block(r, state.n, state.k)?;
    if !block.contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "candidate {j} not in block P_{r} = [{}, {}]",
            block.start(),
            block.end()
        )));
    }
    for (c, set) in state.sets.iter().enumerate() {
        let want = if c + 1 < s { r } else { r - 1 };
        if set.len() != want {
            return Err(Error::InvalidArgument(format!(
                "coordinate {} holds {} indices, round {r} at coordinate {s} expects {want}",
                c + 1,
                set.len()
            )));
        }
    }
    fiber_sum(src, &state.sets, s - 1, j)
}

/// Sum over `sets[0] × … × {j} × … × sets[p-1]` with `{j}` in slot `slot`.
fn fiber_sum<T: Tensor + ?Sized>(src: &T, sets: &[Vec<usize>], slot: usize, j: usize) -> Result<f64> {
    let single = [j];
    let factors: Vec<&[usize]> = sets
        .iter()
        .enumerate()
        .map(|(c, set)| if c == slot { &single[..] } else { set.as_slice() })
        .collect();
    let mut total = 0.0;
    let mut failure = None;
    for_each_product(&factors, |idx| {
        if failure.is_none() {
            match src.entry(idx) {
                Ok(v) => total += v,
                Err(e) => failure = Some(e),
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// One line of a run trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub coordinate: usize,
    pub index: usize,
    pub score: f64,
    pub cumulative_sum: f64,
}

/// Per-round choices and scores of one greedy run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    /// Score `M_s^{(r)}` of the chosen index (1-based `r`, `s`).
    pub fn score(&self, r: usize, s: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|row| row.round == r && row.coordinate == s)
            .map(|row| row.score)
    }

    /// Cumulative sum after the last recorded step.
    pub fn total(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_sum)
    }

    pub fn rounds(&self) -> usize {
        self.rows.last().map_or(0, |r| r.round)
    }

    pub fn order(&self) -> usize {
        self.rows.iter().map(|r| r.coordinate).max().unwrap_or(0)
    }

    /// Writes `round,coordinate,index,score,cumulative_sum` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Executes round `state.round + 1`, reading entries through `view`.
/// Returns the chosen index and score per coordinate.
fn igp_round<T: Tensor + ?Sized>(
    view: &T,
    state: &mut IgpState,
    init: InitMode,
) -> Result<Vec<(usize, f64)>> {
    let p = state.order();
    state.round += 1;
    let r = state.round;
    let block = partition_block(r, state.n, state.k)?;
    let mut picks = Vec::with_capacity(p);
    let mut first_free = 0;
    if r == 1 {
        // Coordinates 1..p-1 are seeded without scoring; their fiber sums
        // run over an empty product and are zero.
        let mut rng = match init {
            InitMode::First => None,
            InitMode::Seeded(key) => Some(key.sequence()),
        };
        for c in 0..p - 1 {
            let i = match rng.as_mut() {
                None => *block.start(),
                Some(g) => block.start() + g.below(block.clone().count() as u64) as usize,
            };
            state.sets[c].push(i);
            picks.push((i, 0.0));
        }
        first_free = p - 1;
    }
    for c in first_free..p {
        let mut best: Option<(usize, f64)> = None;
        for j in block.clone() {
            let score = fiber_sum(view, &state.sets, c, j)?;
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let (j, score) = best.expect("blocks are non-empty");
        state.sets[c].push(j);
        picks.push((j, score));
    }
    Ok(picks)
}

/// Runs the greedy procedure with first-index initialization.
pub fn igp_run<T: Tensor + ?Sized>(src: &T, k: usize) -> Result<(Selection, RunTrace)> {
    igp_run_with(src, k, InitMode::First)
}

/// Runs the greedy procedure; round `r` sees only the prefix view
/// `[⌊rn/k⌋]^p` of `src`.
pub fn igp_run_with<T: Tensor + ?Sized>(
    src: &T,
    k: usize,
    init: InitMode,
) -> Result<(Selection, RunTrace)> {
    let n = src.side();
    let p = src.order();
    let mut state = IgpState::new(n, p, k)?;
    let mut trace = RunTrace::default();
    let mut cumulative = 0.0;
    for r in 1..=k {
        let view = prefix(src, r, k)?;
        let picks = igp_round(&view, &mut state, init)?;
        for (c, (index, score)) in picks.into_iter().enumerate() {
            cumulative += score;
            trace.rows.push(TraceRow {
                round: r,
                coordinate: c + 1,
                index,
                score,
                cumulative_sum: cumulative,
            });
        }
    }
    Ok((Selection::new(state.sets)?, trace))
}

/// The greedy procedure expressed as an online algorithm: step `s`
/// performs round `s`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IgpOnline {
    pub init: InitMode,
}

impl OnlineAlgorithm for IgpOnline {
    fn name(&self) -> &str {
        "igp"
    }

    fn with_coin(&self, key: StreamKey) -> Self {
        match self.init {
            InitMode::First => *self,
            InitMode::Seeded(_) => IgpOnline {
                init: InitMode::Seeded(key),
            },
        }
    }

    fn step(&self, s: usize, k: usize, view: &dyn Tensor, prior: &[Increment]) -> Result<Increment> {
        if prior.len() + 1 != s {
            return Err(Error::InvalidArgument(format!(
                "step {s} called after {} increments",
                prior.len()
            )));
        }
        let mut state = IgpState::from_increments(view.side(), view.order(), k, prior)?;
        let picks = igp_round(view, &mut state, self.init)?;
        Ok(Increment {
            indices: picks.into_iter().map(|(i, _)| i).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{make_source, sum_subtensor, ConstantTensor, DenseTensor};

    fn hand_matrix() -> DenseTensor {
        DenseTensor::from_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 0.0],
            vec![0.0, 0.0, 5.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn hand_trace() {
        let m = hand_matrix();
        let (sel, trace) = igp_run(&m, 2).unwrap();
        assert_eq!(sel.set(0), &[1, 3]);
        assert_eq!(sel.set(1), &[1, 3]);
        assert_eq!(sum_subtensor(&m, &sel).unwrap(), 6.0);
        assert_eq!(trace.total(), 6.0);
        assert_eq!(trace.score(1, 2), Some(1.0));
        assert_eq!(trace.score(2, 1), Some(0.0));
        assert_eq!(trace.score(2, 2), Some(5.0));
    }

    #[test]
    fn all_zero_picks_block_starts() {
        for p in 1..=3 {
            let z = ConstantTensor::new(12, p, 0.0).unwrap();
            let (sel, _) = igp_run(&z, 3).unwrap();
            for s in 0..p {
                assert_eq!(sel.set(s), &[1, 5, 9]);
            }
        }
    }

    #[test]
    fn errors() {
        let z = ConstantTensor::new(5, 2, 0.0).unwrap();
        assert!(igp_run(&z, 0).is_err());
        assert!(igp_run(&z, 6).is_err());
    }

    #[test]
    fn block_discipline_and_trace_identity() {
        for p in 1..=3 {
            let src = make_source(60, p, StreamKey(11 + p as u128)).unwrap();
            let k = 4;
            let (sel, trace) = igp_run(&src, k).unwrap();
            for s in 0..p {
                for (r, &i) in sel.set(s).iter().enumerate() {
                    assert!(partition_block(r + 1, 60, k).unwrap().contains(&i));
                }
            }
            let sum = sum_subtensor(&src, &sel).unwrap();
            assert!((trace.total() - sum).abs() < 1e-9, "{} vs {sum}", trace.total());
            assert_eq!(trace.rows.len(), k * p);
        }
    }

    #[test]
    fn score_candidate_matches_loop() {
        let src = make_source(30, 2, StreamKey(4)).unwrap();
        let mut state = IgpState::new(30, 2, 3).unwrap();
        state.sets = vec![vec![2], vec![7]];
        state.round = 2;
        for j in 11..=20 {
            let direct: f64 = state.sets[1].iter().map(|&jp| src.value(&[j, jp])).sum();
            assert_eq!(score_candidate(&src, &state, 1, j).unwrap(), direct);
        }
        assert!(score_candidate(&src, &state, 1, 3).is_err());
        assert!(score_candidate(&src, &state, 2, 12).is_err());
        state.sets[0].push(15);
        let direct: f64 = state.sets[0].iter().map(|&i| src.value(&[i, 14])).sum();
        assert_eq!(score_candidate(&src, &state, 2, 14).unwrap(), direct);
    }

    #[test]
    fn round_one_score_is_fiber_entry() {
        let src = make_source(30, 3, StreamKey(9)).unwrap();
        let mut state = IgpState::new(30, 3, 3).unwrap();
        state.sets = vec![vec![1], vec![1], vec![]];
        state.round = 1;
        assert_eq!(score_candidate(&src, &state, 3, 6).unwrap(), src.value(&[1, 1, 6]));
    }

    #[test]
    fn seeded_init_stays_in_first_block() {
        let src = make_source(100, 3, StreamKey(1)).unwrap();
        let (a, _) = igp_run_with(&src, 5, InitMode::Seeded(StreamKey(77))).unwrap();
        let (b, _) = igp_run_with(&src, 5, InitMode::Seeded(StreamKey(77))).unwrap();
        assert_eq!(a, b);
        for s in 0..3 {
            assert!((1..=20).contains(&a.set(s)[0]));
        }
    }

    #[test]
    fn trace_csv_header() {
        let (_, trace) = igp_run(&hand_matrix(), 2).unwrap();
        let mut out = Vec::new();
        trace.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("round,coordinate,index,score,cumulative_sum\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
