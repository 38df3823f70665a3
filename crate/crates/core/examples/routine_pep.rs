//! Routine graphs and entity exclusion on a three-entity stream.
//!
//! Only one entity runs the rare process, and only belief mining notices
//! when it is left out. Writes the baseline routine graph as DOT.

use brm::fixtures::{entity_fixture, ENTITY_FIXTURE_OW};
use brm::frm::minsup_for_rule_count;
use brm::graph::{build_graph, pep_sweep, Miner, Pipeline};
use brm::metrics::Filter;
use brm::MiningParams;

fn main() -> brm::Result<()> {
    let ds = entity_fixture(1)?;
    let ow = ENTITY_FIXTURE_OW;
    let brm = Pipeline {
        miner: Miner::Brm(MiningParams::default().with_ow(ow)),
        filter: Some(Filter::Confidence(0.5)),
    };
    let rules = brm.rules(&ds)?;
    print!("{}", build_graph(&rules).to_dot());

    let minsup = minsup_for_rule_count(&ds, rules.len(), Some(ow))?;
    let frm = Pipeline {
        miner: Miner::Frm { minsup, ow: Some(ow) },
        filter: None,
    };
    for (name, p) in [("belief", &brm), ("frequent", &frm)] {
        let report = pep_sweep(&ds, p)?;
        println!("{name} mining: {} routines", report.baseline_components);
        for (entity, o) in &report.per_entity {
            println!("  without {entity}: {} routines, {:?}", o.components, o.class);
        }
    }
    Ok(())
}
