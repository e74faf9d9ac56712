//! Drive a reproducible experiment from a JSON config.

use subtensor_lab::harness::{run_config, ExperimentConfig};

fn main() -> subtensor_lab::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{"kind": "mc-igp", "params": {"n": 10000, "k": 8}, "trials": 10, "seed": 42, "threads": 2}"#,
    )?;
    let out = run_config(&cfg)?;
    print!("{}", String::from_utf8_lossy(&out.csv));
    println!("{}", serde_json::to_string_pretty(&out.summary).expect("summary is plain JSON"));
    Ok(())
}
