//! Run the incremental greedy search on one Gaussian matrix and show its trace.

use subtensor_lab::algorithms::{event_g_monitor, igp_run, success_event};
use subtensor_lab::tensor::ave_subtensor;
use subtensor_lab::theory::{eta_alg, AsymptoticParams};
use subtensor_lab::{make_source, StreamKey};

fn main() -> subtensor_lab::Result<()> {
    let params = AsymptoticParams::new(20_000, 8, 2, 0.2)?;
    let src = make_source(params.n, params.p, StreamKey::from_seed(11))?;
    let (sel, trace) = igp_run(&src, params.k)?;

    trace.write_csv(std::io::stdout())?;
    let ave = ave_subtensor(&src, &sel)?;
    println!();
    println!("rows    {:?}", sel.set(0));
    println!("columns {:?}", sel.set(1));
    println!("ave {ave:.4}  ave/eta_alg {:.4}", ave / eta_alg(&params)?);
    println!("score floors held: {}", event_g_monitor(&trace, &params));
    println!("success at slack {}: {}", params.epsilon, success_event(&sel, &src, &params)?);
    Ok(())
}
