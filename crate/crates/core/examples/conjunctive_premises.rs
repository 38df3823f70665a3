//! Rules with conjunctive premises, grown breadth first from the atomic set.

use brm::metrics::score_conjunctive;
use brm::{mine_atomic, mine_conjunctive, Dataset, MiningParams, Record};

fn main() -> brm::Result<()> {
    let rows: [&[&str]; 8] = [
        &["rain", "cold", "stay_in"],
        &["rain", "cold", "stay_in"],
        &["rain", "cold", "stay_in"],
        &["rain", "warm", "walk"],
        &["sun", "cold", "walk"],
        &["sun", "warm", "walk"],
        &["rain", "stay_in"],
        &["cold"],
    ];
    let records = rows.iter().map(|r| Record::new(r.iter().copied())).collect::<brm::Result<Vec<_>>>()?;
    let ds = Dataset::database(records)?;
    let params = MiningParams::default();

    let atomic = mine_atomic(&ds, &params)?;
    println!("atomic rules:");
    for t in atomic.rules() {
        println!("  {}  ({}/{})", t.rule, t.rule_count, t.conclusion_count);
    }

    let search = mine_conjunctive(&atomic, &ds, &params)?;
    println!("{} premise combinations evaluated", search.evaluated);
    for r in score_conjunctive(&search, &atomic, &ds) {
        println!("  {}  confidence {:.2}", r.rule(), r.confidence);
    }
    Ok(())
}
