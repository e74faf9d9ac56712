//! A tree of correlated matrices: siblings share the corner revealed so far.

use subtensor_lab::ogp::{correlated_instances, ReplicaTree};
use subtensor_lab::theory::PartitionScheme;
use subtensor_lab::{StreamKey, Tensor};

fn main() -> subtensor_lab::Result<()> {
    let scheme = PartitionScheme::uniform(2, 0.25, 3, 2)?;
    let tree = ReplicaTree::new(scheme, StreamKey::from_seed(21))?;
    let fam = correlated_instances(tree, 12, 2, 6)?;
    println!("corners {:?}, {} leaves", fam.corners(), fam.leaf_count());
    let leaves: Vec<_> = (0..fam.leaf_count()).map(|l| fam.leaf(l)).collect();
    for (a, b) in [(0, 1), (0, 3)] {
        let meet = fam.tree().meet_depth(fam.tree().leaf(a), fam.tree().leaf(b));
        let shared = (1..=12)
            .flat_map(|i| (1..=12).map(move |j| [i, j]))
            .filter(|idx| leaves[a].value(idx) == leaves[b].value(idx))
            .count();
        println!("leaves {a} and {b}: meet at depth {meet}, {shared}/144 entries shared");
    }
    Ok(())
}
