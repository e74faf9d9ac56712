//! Write a matrix to CSV, read it back and search it.

use subtensor_lab::algorithms::{igp_run, las_run};
use subtensor_lab::io::{export, ingest, Format};
use subtensor_lab::tensor::ave_subtensor;
use subtensor_lab::{make_source, StreamKey};

fn main() -> subtensor_lab::Result<()> {
    let path = std::env::temp_dir().join("subtensor-lab-example.csv");
    export(&make_source(60, 2, StreamKey::from_seed(4))?, &path, Format::Csv)?;
    let m = ingest(&path, Format::Csv)?;
    let (g, _) = igp_run(&m, 5)?;
    let l = las_run(&m, 5, StreamKey::from_seed(4).derive_label("init"))?;
    println!("greedy {:.4} {:?}", ave_subtensor(&m, &g)?, g.sets());
    println!("local  {:.4} {:?}", ave_subtensor(&m, &l.selection)?, l.selection.sets());
    std::fs::remove_file(&path)?;
    Ok(())
}
