//! Small bundled datasets used by the examples and tests.

use rand::Rng;

use crate::error::Result;
use crate::model::{Dataset, Event, Record, Symbol};
use crate::seed;
use crate::synth::{generate_events, GeneratorConfig};

/// Census-like tract database.
///
/// Each record is one tract with a value for five categorical variables:
/// `race` decile, `poverty` level, `age` group, `diesel` and `benzene`
/// exposure quartiles. A hidden deprivation score drives race, poverty and
/// diesel strongly, benzene weakly and age not at all.
pub fn census_database(tracts: usize, seed: u64) -> Result<Dataset> {
    let mut rng = seed::rng(seed, &[]);
    let bucket = |z: f64, noise: f64, levels: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let v = (z + rng.gen_range(-noise..=noise)).clamp(0.0, 0.999_999);
        (v * levels as f64) as usize + 1
    };
    let records = (0..tracts)
        .map(|_| {
            let z: f64 = rng.gen();
            let race = bucket(z, 0.05, 10, &mut rng);
            let poverty = bucket(z, 0.15, 5, &mut rng);
            let age = bucket(rng.gen(), 0.0, 6, &mut rng);
            let diesel = bucket(z, 0.2, 4, &mut rng);
            let benzene = bucket(z, 0.6, 4, &mut rng);
            Record::new([
                format!("race={race}"),
                format!("poverty={poverty}"),
                format!("age={age}"),
                format!("diesel={diesel}"),
                format!("benzene={benzene}"),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::database(records)
}

/// Database in which exactly five rules pass at `s = 1`: `x_i -> y_i`.
///
/// Each `y_i` mostly occurs together with `x_i`, while `x_i` mostly occurs
/// alone, so only one direction of each pair is retained.
pub fn five_rule_database() -> Dataset {
    let mut records = Vec::new();
    for i in 0..5 {
        let (x, y) = (format!("x{i}"), format!("y{i}"));
        for _ in 0..3 {
            records.push(Record::new([x.as_str(), y.as_str()]).expect("distinct"));
        }
        for _ in 0..7 {
            records.push(Record::new([x.as_str()]).expect("single"));
        }
        records.push(Record::new([y.as_str()]).expect("single"));
    }
    Dataset::database(records).expect("non-empty")
}

/// Database realizing the 2x2 table of `a` against `b`; records holding
/// neither carry the filler symbol `o`.
pub fn contingency_database(n11: usize, n10: usize, n01: usize, n00: usize) -> Result<Dataset> {
    let rows: [(&[&str], usize); 4] = [(&["a", "b"], n11), (&["a"], n10), (&["b"], n01), (&["o"], n00)];
    let records = rows
        .iter()
        .flat_map(|&(syms, n)| std::iter::repeat(syms).take(n))
        .map(|syms| Record::new(syms.iter().copied()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::database(records)
}

/// Six records with overlapping symbols, used to check that the final rule
/// set does not depend on record order.
pub fn order_fixture() -> Dataset {
    let rows: [&[&str]; 6] = [
        &["a", "b", "c"],
        &["a", "b"],
        &["b", "c"],
        &["a", "c", "d"],
        &["d"],
        &["a", "b", "d"],
    ];
    let records = rows.iter().map(|r| Record::new(r.iter().copied()).expect("valid")).collect();
    Dataset::database(records).expect("non-empty")
}

/// Entity that carries the rare process in [`entity_fixture`].
pub const RARE_ENTITY: &str = "e3";

/// Observation window the entity fixture is tuned for.
pub const ENTITY_FIXTURE_OW: usize = 3;

/// Generator settings of [`entity_fixture`].
///
/// The common process emits `a` half of the time, `b` a fifth of the time
/// and six rare fillers otherwise. The rare process is the chain
/// `10 -> 11 -> 12` with no gaps. With a three-symbol window:
///
/// - belief mining plus a 0.5 confidence filter keeps `a -> a` and the
///   three chain pairs;
/// - the four most frequent pairs are those over `{a, b}`, far above any
///   pair touching a filler, and the weakest of them (`b -> b`) is not
///   needed to connect `a` and `b`.
pub fn entity_fixture_config(seed: u64) -> GeneratorConfig {
    let mut v_random: Vec<Symbol> = vec!["a".into(), "b".into()];
    v_random.extend((1..=6).map(|i| Symbol::from(format!("r{i}"))));
    GeneratorConfig {
        v_random,
        random_weights: vec![50, 20, 5, 5, 5, 5, 5, 5],
        chain: (10..13u32).map(Symbol::from).collect(),
        n_random: 1000,
        n_chains: 20,
        gap_range: (1, 1),
        seed,
    }
}

/// Three-entity stream for entity exclusion.
///
/// All entities share a skewed common process; only [`RARE_ENTITY`] also
/// runs the chain process. Entity blocks follow each other with
/// a large timestamp gap.
pub fn entity_fixture(seed: u64) -> Result<Dataset> {
    let base = entity_fixture_config(seed);
    let mut events = Vec::new();
    for (k, entity) in ["e1", "e2", "e3"].iter().enumerate() {
        let mut cfg = base.with_seed(seed::derive_seed(seed, &[k as u64]));
        if *entity != RARE_ENTITY {
            cfg.n_chains = 0;
        }
        let offset = k as i64 * 1_000_000;
        events.extend(
            generate_events(&cfg)?
                .into_iter()
                .map(|e| Event::new(e.symbol, e.t + offset).with_entity(entity)),
        );
    }
    Dataset::timeseries(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brm::mine_atomic;
    use crate::model::{MiningParams, Rule};

    #[test]
    fn five_rules() {
        let set = mine_atomic(&five_rule_database(), &MiningParams::default()).unwrap();
        let got: Vec<String> = set.rules().map(|t| t.rule.to_string()).collect();
        let want: Vec<String> = (0..5).map(|i| Rule::atomic(format!("x{i}").as_str(), format!("y{i}").as_str()).to_string()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn contingency_counts() {
        let ds = contingency_database(30, 10, 10, 30).unwrap();
        assert_eq!(ds.len(), 80);
    }

    #[test]
    fn census_shape() {
        let ds = census_database(200, 1).unwrap();
        assert_eq!(ds.len(), 200);
        assert!(ds.records().unwrap().iter().all(|r| r.symbols().len() == 5));
    }

    #[test]
    fn entity_fixture_tags() {
        let ds = entity_fixture(3).unwrap();
        assert_eq!(ds.entities().len(), 3);
        let chain_events = ds
            .events()
            .unwrap()
            .iter()
            .filter(|e| e.symbol == Symbol::from(10u32))
            .map(|e| e.entity.as_deref().unwrap())
            .collect::<Vec<_>>();
        assert_eq!(chain_events.len(), 20);
        assert!(chain_events.iter().all(|&e| e == RARE_ENTITY));
    }
}
