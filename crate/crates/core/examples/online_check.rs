//! Audit the online discipline: the greedy search passes, a peeking rule fails.

use subtensor_lab::algorithms::{check_online, Increment, IgpOnline, OnlineAlgorithm};
use subtensor_lab::{make_source, StreamKey, Tensor};

#[derive(Clone)]
struct Peek;

impl OnlineAlgorithm for Peek {
    fn name(&self) -> &str {
        "peek"
    }
    fn step(&self, s: usize, _k: usize, view: &dyn Tensor, _prior: &[Increment]) -> subtensor_lab::Result<Increment> {
        // reads the far corner, which is hidden until the last step
        let n = view.side();
        let i = if view.entry(&[n, n])? > 0.0 { 1 } else { 2 };
        Ok(Increment { indices: vec![i, s] })
    }
}

fn main() -> subtensor_lab::Result<()> {
    let src = make_source(2_000, 2, StreamKey::from_seed(5))?;
    for report in [
        check_online(&IgpOnline::default(), &src, 8, 20, StreamKey::from_seed(6))?,
        check_online(&Peek, &src, 8, 20, StreamKey::from_seed(6))?,
    ] {
        println!("{:<6} {}/{} trials consistent", report.algorithm, report.passed(), report.trials.len());
        if let Some(bad) = report.trials.iter().find(|t| !t.passed) {
            println!("       first failure at step {:?}: {}", bad.first_divergent_step, bad.detail.as_deref().unwrap_or(""));
        }
    }
    Ok(())
}
