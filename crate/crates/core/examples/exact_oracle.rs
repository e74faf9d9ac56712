//! Exhaustive search on a tiny matrix, checked against both heuristics.

use subtensor_lab::algorithms::{brute_force, igp_run, las_run, DEFAULT_BRUTE_BUDGET};
use subtensor_lab::tensor::ave_subtensor;
use subtensor_lab::{make_source, StreamKey};

fn main() -> subtensor_lab::Result<()> {
    let src = make_source(8, 2, StreamKey::from_seed(7))?;
    let best = brute_force(&src, 2, DEFAULT_BRUTE_BUDGET)?;
    let (g, _) = igp_run(&src, 2)?;
    let l = las_run(&src, 2, StreamKey::from_seed(7).derive_label("init"))?;
    println!("searched {} selections", best.space);
    println!("optimum {:.4} at {:?}", ave_subtensor(&src, &best.selection)?, best.selection.sets());
    println!("greedy  {:.4}", ave_subtensor(&src, &g)?);
    println!("local   {:.4}", ave_subtensor(&src, &l.selection)?);
    Ok(())
}
