//! Estimate joint success over the leaves of a replica tree and compare it to
//! the counting bound.

use subtensor_lab::algorithms::IgpOnline;
use subtensor_lab::ogp::{estimate_joint_success, forbidden_prob_bound_log, CoinMode};
use subtensor_lab::theory::{build_partition, AsymptoticParams, PartitionScheme};
use subtensor_lab::StreamKey;

fn main() -> subtensor_lab::Result<()> {
    let params = AsymptoticParams::new(4_000, 6, 2, 0.25)?;
    let scheme = PartitionScheme::uniform(2, params.epsilon, 2, 2)?;
    let rep = estimate_joint_success(&IgpOnline::default(), &scheme, &params, 40, StreamKey::from_seed(1), CoinMode::Shared)?;
    println!("leaves {}  trials {}", rep.leaf_count, rep.trials);
    println!("p_suc {:.4}  p_joint {:.4}  [{:.4}, {:.4}]", rep.p_suc_hat, rep.p_joint_hat, rep.ci.lower, rep.ci.upper);
    println!("p_suc^leaves {:.4}  consistent {}", rep.p_suc_pow_leaves, rep.consistent);
    println!("extractions {:?}", rep.extraction_tally);

    let full = build_partition(2, 0.5)?;
    let bound = forbidden_prob_bound_log(&full, &AsymptoticParams::new(100_000, 20, 2, 0.5)?)?;
    println!("counting bound for N={} D={}: log P <= {:.3}", full.depth, full.branching, bound.bound_log);
    Ok(())
}
