//! Alternating local search against the greedy search on matched instances.

use subtensor_lab::algorithms::{igp_run, las_run};
use subtensor_lab::stats::mean;
use subtensor_lab::tensor::ave_subtensor;
use subtensor_lab::{make_source, StreamKey};

fn main() -> subtensor_lab::Result<()> {
    let (n, k, trials) = (5_000, 6, 20u64);
    let unit = (2.0 * (n as f64).ln() / k as f64).sqrt();
    let (mut greedy, mut local, mut iters) = (Vec::new(), Vec::new(), Vec::new());
    for t in 0..trials {
        let key = StreamKey::from_seed(3).derive(&[t]);
        let src = make_source(n, 2, key)?;
        let (g, _) = igp_run(&src, k)?;
        let l = las_run(&src, k, key.derive_label("init"))?;
        greedy.push(ave_subtensor(&src, &g)? / unit);
        local.push(ave_subtensor(&src, &l.selection)? / unit);
        iters.push(l.iterations as f64);
    }
    let wins = local.iter().zip(&greedy).filter(|(l, g)| l > g).count();
    println!("greedy mean  {:.4}", mean(&greedy));
    println!("local mean   {:.4}  (mean iterations {:.1})", mean(&local), mean(&iters));
    println!("local ahead on {wins}/{trials} instances");
    Ok(())
}
