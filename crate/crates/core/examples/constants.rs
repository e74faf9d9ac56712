//! Print the asymptotic constants and scales for a few tensor orders.

use subtensor_lab::harness::{constants_table, render_constants};

fn main() -> subtensor_lab::Result<()> {
    let rows = constants_table(100_000, 10, &[1, 2, 3, 4], 0.1)?;
    print!("{}", render_constants(&rows));
    Ok(())
}
