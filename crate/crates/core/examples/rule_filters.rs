//! The three rule filters applied to one mined set.

use brm::metrics::Filter;
use brm::synth::{generate_timeseries, GeneratorConfig};
use brm::{build_graph, mine_atomic, score_rule_set, MiningParams};

fn main() -> brm::Result<()> {
    let ds = generate_timeseries(&GeneratorConfig::default().with_seed(3))?;
    let rules = score_rule_set(&mine_atomic(&ds, &MiningParams::default().with_ow(10))?);
    println!("{} rules before filtering", rules.len());

    for f in [Filter::Confidence(0.5), Filter::BayesFactor(1.0), Filter::BestConfidence] {
        let kept = f.apply(&rules);
        let g = build_graph(&kept);
        println!("{f:?}: {} rules, {} routines", kept.len(), g.components().len());
    }

    // best confidence per conclusion keeps the transitions
    for r in Filter::BestConfidence.apply(&rules) {
        println!("  {}  confidence {:.3}", r.rule(), r.confidence);
    }
    Ok(())
}
