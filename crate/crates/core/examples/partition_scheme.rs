//! Build grid partitions and report how close they get to the integral.

use subtensor_lab::theory::{build_partition, riemann_gap, uniform_grid};

fn main() -> subtensor_lab::Result<()> {
    for p in 1..=3 {
        for eps in [0.1, 0.2, 0.5] {
            let s = build_partition(p, eps)?;
            println!(
                "p={p} eps={eps:<4} N={:<3} D={:<3} delta={:.4} gap={:.5}",
                s.depth,
                s.branching,
                s.delta,
                riemann_gap(&s.alphas, p)?
            );
        }
    }
    for depth in [4, 64, 1024] {
        println!("uniform grid N={depth:<5} gap={:.6}", riemann_gap(&uniform_grid(depth), 2)?);
    }
    Ok(())
}
