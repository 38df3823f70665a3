//! Selector sweep and odds ratios on a census-like tract database.
//!
//! Prints the rule count at each selector value as CSV, then the odds ratio
//! of the strongest rules with a bootstrap interval.

use brm::fixtures::census_database;
use brm::metrics::{bootstrap_ci, odds_ratio};
use brm::synth::{equidistant, selector_sweep, selector_sweep_csv};
use brm::{mine_atomic, score_rule_set, MiningParams};

fn main() -> brm::Result<()> {
    let ds = census_database(2000, 11)?;
    let params = MiningParams::default();

    let rows = selector_sweep(&equidistant(21), &ds, &params)?;
    print!("{}", selector_sweep_csv(&rows));

    let mut rules = score_rule_set(&mine_atomic(&ds, &params)?);
    rules.sort_by(|a, b| b.support.total_cmp(&a.support));
    println!("\nrule, support, odds ratio, 95% interval");
    for r in rules.iter().take(5) {
        let rule = r.rule();
        let or = odds_ratio(&rule, &ds)?;
        let (lo, hi) = bootstrap_ci(&rule, &ds, 2000, 0.95, 11)?;
        println!("{rule}, {:.3}, {or:.2}, [{lo:.2}, {hi:.2}]", r.support);
    }
    Ok(())
}
