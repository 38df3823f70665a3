//! Writing and reading the dataset and rule file formats.

use std::path::Path;

use brm::io::{format_dataset, format_rules, parse_dataset, parse_rules};
use brm::{mine_atomic, score_rule_set, Dataset, Mode, MiningParams};

fn main() -> brm::Result<()> {
    let text = "t,symbol\n0,wake\n5,coffee\n9,work\n60,lunch\n61,coffee\n70,work\n";
    let ds = parse_dataset(text, Mode::Timeseries, Path::new("day.csv"))?;
    assert_eq!(format_dataset(&ds)?, text);

    let db = parse_dataset("home:tea,toast\nwork:coffee,toast\nhome:tea\n", Mode::Database, Path::new("db"))?;
    println!("entities: {:?}", db.entities());

    let rules = score_rule_set(&mine_atomic(&ds, &MiningParams::default().with_ow(3))?);
    let json = format_rules(&rules)?;
    print!("{json}");
    assert_eq!(parse_rules(&json)?.len(), rules.len());

    let empty = Dataset::from_symbols(["x"])?;
    print!("{}", format_rules(&score_rule_set(&mine_atomic(&empty, &MiningParams::default().with_ow(2))?))?);
    Ok(())
}
