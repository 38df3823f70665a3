//! Extraction rate per rule category as the observation window grows.
//!
//! Usage: `cargo run --release --example ow_sweep [runs]`

use brm::synth::{ow_sweep, ow_sweep_csv, GeneratorConfig};
use brm::MiningParams;

fn main() -> brm::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let ows: Vec<usize> = (2..=30).collect();
    let rows = ow_sweep(&ows, runs, &GeneratorConfig::default().with_seed(2024), &MiningParams::default())?;
    print!("{}", ow_sweep_csv(&rows));
    print!("{}", brm::io::footer(Some(2024), &format!("runs={runs}")));
    Ok(())
}
