//! Two-process benchmark: a frequent random process and a rare chain.
//!
//! Belief mining recovers the chain and, after a confidence filter,
//! separates the two processes into two routines. Frequent mining at the
//! usual 0.1 minimum support never sees the chain.

use brm::frm::mine_frm;
use brm::graph::{Miner, Pipeline};
use brm::metrics::Filter;
use brm::synth::{extraction_rate, generate_timeseries, run_once, GeneratorConfig, RuleCategory};
use brm::MiningParams;

fn main() -> brm::Result<()> {
    let cfg = GeneratorConfig::default().with_seed(7);
    let params = MiningParams::default().with_ow(10);

    let (set, counts) = run_once(&cfg, &params)?;
    println!("{} rules extracted", set.len());
    for c in RuleCategory::ALL {
        println!(
            "  {:<5} {:>2}/{:<2} {:>5.1}%",
            c.label(),
            counts.extracted(c),
            counts.denominator(c),
            extraction_rate(&counts, c)
        );
    }

    let ds = generate_timeseries(&cfg)?;
    let pipeline = Pipeline {
        miner: Miner::Brm(params),
        filter: Some(Filter::Confidence(0.5)),
    };
    for (i, routine) in pipeline.routines(&ds)?.iter().enumerate() {
        let names: Vec<&str> = routine.iter().map(|s| s.as_str()).collect();
        println!("routine {i}: {names:?}");
    }

    let frm = mine_frm(&ds, 0.1, Some(10))?;
    let chain_rules = frm
        .rules
        .iter()
        .filter(|r| r.premise.iter().chain(&r.conclusion).any(|s| cfg.chain.contains(s)))
        .count();
    println!("frequent mining: {} rules, {chain_rules} touching the chain", frm.rules.len());
    Ok(())
}
