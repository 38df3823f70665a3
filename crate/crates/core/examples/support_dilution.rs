//! Appending unrelated data dilutes the support of a fixed pattern but not
//! its belief.

use brm::frm::{support, Pattern};
use brm::synth::{generate_timeseries, GeneratorConfig};
use brm::{mine_atomic, MiningParams, Rule};

fn main() -> brm::Result<()> {
    let chain = Rule::atomic(10u32, 11u32);
    let params = MiningParams::default().with_ow(10);
    println!("n_random  support   in_set");
    for n_random in [500, 1000, 2000, 4000, 8000] {
        let cfg = GeneratorConfig {
            n_random,
            ..GeneratorConfig::default().with_seed(1)
        };
        let ds = generate_timeseries(&cfg)?;
        let s = support(Pattern::Rule(&chain), &ds, Some(10))?;
        let kept = mine_atomic(&ds, &params)?.contains(&chain);
        println!("{n_random:>8}  {s:.5}  {kept}");
    }
    Ok(())
}
