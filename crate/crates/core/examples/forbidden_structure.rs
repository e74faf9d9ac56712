//! Run the greedy search on every leaf of a correlated family, extract the
//! nested structure and test it against the threshold.

use subtensor_lab::algorithms::{run_online, IgpOnline};
use subtensor_lab::ogp::{correlated_instances, is_forbidden, outputs_to_candidate, Extraction, ReplicaTree};
use subtensor_lab::theory::{AsymptoticParams, PartitionScheme};
use subtensor_lab::StreamKey;

fn main() -> subtensor_lab::Result<()> {
    let params = AsymptoticParams::new(3_000, 6, 2, 0.25)?;
    let scheme = PartitionScheme::uniform(2, params.epsilon, 2, 2)?;
    let tree = ReplicaTree::new(scheme, StreamKey::from_seed(9))?;
    let fam = correlated_instances(tree, params.n, params.p, params.k)?;
    let outputs = (0..fam.leaf_count())
        .map(|l| run_online(&IgpOnline::default(), &fam.leaf(l), params.k).map(|r| r.0))
        .collect::<subtensor_lab::Result<Vec<_>>>()?;
    match outputs_to_candidate(&fam, &outputs)? {
        Extraction::Candidate(cand) => {
            let verdict = is_forbidden(&cand, |l| fam.leaf(l), &params)?;
            println!("extracted a candidate: {}", verdict.label());
            println!("{verdict:?}");
        }
        Extraction::Violation(v) => println!("extraction failed: {v:?}"),
    }
    Ok(())
}
