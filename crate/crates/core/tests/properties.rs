//! Randomized and exhaustive invariants checked against independent oracles.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use brm::brm::mine_atomic;
use brm::frm::{frequent_itemsets, mine_frm, support, Pattern};
use brm::graph::{build_graph, pep_sweep, Miner, Pipeline};
use brm::io;
use brm::metrics::{bootstrap_ci, score_rule_set, Filter, ScoredRule};
use brm::model::{
    belief_update, estimate_p_ab, passes_criterion, Dataset, Event, MiningParams, Mode, Record, Rule, Symbol,
};
use brm::synth::{categorize, categorize_rules, generate_timeseries, GeneratorConfig, RuleCategory};
use proptest::prelude::*;

fn database(rows: &[u8]) -> Dataset {
    let records = rows
        .iter()
        .map(|&mask| {
            let syms: Vec<String> = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| format!("s{i}")).collect();
            Record::new(syms).unwrap()
        })
        .collect();
    Dataset::database(records).unwrap()
}

fn stream(symbols: &[u8]) -> Dataset {
    Dataset::from_symbols(symbols.iter().map(|s| format!("s{s}"))).unwrap()
}

fn db_rows() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(1u8..=63, 1..30)
}

fn stream_symbols() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..5, 1..80)
}

/// Rule counts recomputed by brute force: for a database, records holding
/// both symbols; for a stream, the greedy pairing of each window head with
/// the first not-yet-paired later occurrence.
fn oracle_counts(ds: &Dataset, ow: usize) -> (HashMap<Rule, u64>, HashMap<Symbol, u64>) {
    let mut rules: HashMap<Rule, u64> = HashMap::new();
    let mut symbols: HashMap<Symbol, u64> = HashMap::new();
    match ds {
        Dataset::Database(records) => {
            for r in records {
                for a in r.symbols() {
                    *symbols.entry(a.clone()).or_default() += 1;
                    for b in r.symbols() {
                        if a != b {
                            *rules.entry(Rule::atomic(a.clone(), b.clone())).or_default() += 1;
                        }
                    }
                }
            }
        }
        Dataset::Timeseries(events) => {
            let syms: Vec<&Symbol> = events.iter().map(|e| &e.symbol).collect();
            for s in &syms {
                *symbols.entry((*s).clone()).or_default() += 1;
            }
            let mut last: HashMap<(Symbol, Symbol), usize> = HashMap::new();
            for head in 0..syms.len() {
                let mut done = BTreeSet::new();
                for pos in head + 1..(head + ow).min(syms.len()) {
                    let key = (syms[head].clone(), syms[pos].clone());
                    if done.contains(&key) {
                        continue;
                    }
                    if last.get(&key).is_some_and(|&l| l >= pos) {
                        continue;
                    }
                    done.insert(key.clone());
                    last.insert(key.clone(), pos);
                    *rules.entry(Rule::atomic(key.0, key.1)).or_default() += 1;
                }
            }
        }
    }
    (rules, symbols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn belief_stays_in_unit_interval(b in 0.0f64..=1.0, p in 0.0f64..=1.0) {
        let next = belief_update(b, p);
        prop_assert!((0.0..=1.0).contains(&next));
        if b == 0.0 || b == 1.0 {
            prop_assert_eq!(next, b);
        }
    }

    #[test]
    fn estimate_and_counter_test_agree(b in 1u64..500, frac in 0.0f64..=1.0, s in 0.0f64..=1.0) {
        let r = ((b as f64 * frac).round() as u64).clamp(1, b);
        let p = estimate_p_ab(r, b, s).unwrap();
        let pass = passes_criterion(r, b, s).unwrap();
        // away from the boundary the two must agree exactly
        if (p - 0.5).abs() > 1e-9 {
            prop_assert_eq!(pass, p >= 0.5);
        }
    }

    #[test]
    fn database_rules_match_recount(rows in db_rows(), s in 0.0f64..=1.0) {
        let ds = database(&rows);
        let set = mine_atomic(&ds, &MiningParams::default().with_selector(s)).unwrap();
        let (counts, singles) = oracle_counts(&ds, 0);
        let want: BTreeSet<Rule> = counts
            .iter()
            .filter(|(r, &k)| k as f64 >= s * (singles[&r.conclusion[0]] - k) as f64 - 1e-12)
            .map(|(r, _)| r.clone())
            .collect();
        prop_assert_eq!(set.rule_set(), want);
    }

    #[test]
    fn stream_rules_match_recount(syms in stream_symbols(), ow in 2usize..7) {
        let ds = stream(&syms);
        let set = mine_atomic(&ds, &MiningParams::default().with_ow(ow)).unwrap();
        let (counts, singles) = oracle_counts(&ds, ow);
        for t in set.trackers() {
            prop_assert_eq!(t.rule_count, counts.get(&t.rule).copied().unwrap_or(0));
            prop_assert!(t.rule_count <= t.conclusion_count);
        }
        let want: BTreeSet<Rule> = counts
            .iter()
            .filter(|(r, &k)| 2 * k >= singles[&r.conclusion[0]])
            .map(|(r, _)| r.clone())
            .collect();
        prop_assert_eq!(set.rule_set(), want);
    }

    #[test]
    fn prior_does_not_change_the_rule_set(rows in db_rows(), p in 0.01f64..0.99) {
        let ds = database(&rows);
        let base = mine_atomic(&ds, &MiningParams::default()).unwrap().rule_set();
        let other = mine_atomic(&ds, &MiningParams::default().with_prior(p)).unwrap().rule_set();
        prop_assert_eq!(base, other);
    }

    #[test]
    fn larger_selector_keeps_fewer_rules(syms in stream_symbols(), s1 in 0.0f64..=1.0, s2 in 0.0f64..=1.0) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let ds = stream(&syms);
        let p = MiningParams::default().with_ow(4);
        let loose = mine_atomic(&ds, &p.clone().with_selector(lo)).unwrap().rule_set();
        let strict = mine_atomic(&ds, &p.with_selector(hi)).unwrap().rule_set();
        prop_assert!(strict.is_subset(&loose));
    }

    #[test]
    fn reselect_equals_remining(rows in db_rows(), s in 0.0f64..=1.0) {
        let ds = database(&rows);
        let base = mine_atomic(&ds, &MiningParams::default()).unwrap();
        let direct = mine_atomic(&ds, &MiningParams::default().with_selector(s)).unwrap();
        prop_assert_eq!(base.reselect(s).rule_set(), direct.rule_set());
    }

    #[test]
    fn record_order_does_not_matter(rows in db_rows(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let ds = database(&rows);
        let mut shuffled = ds.records().unwrap().to_vec();
        shuffled.shuffle(&mut brm::seed::rng(seed, &[]));
        let a = mine_atomic(&ds, &MiningParams::default()).unwrap().rule_set();
        let b = mine_atomic(&Dataset::database(shuffled).unwrap(), &MiningParams::default()).unwrap().rule_set();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn apriori_matches_brute_force(rows in db_rows(), minsup in 0.05f64..0.8) {
        let ds = database(&rows);
        let records = ds.records().unwrap();
        let n = records.len() as f64;
        let got: BTreeSet<Vec<Symbol>> = frequent_itemsets(&ds, minsup).unwrap().into_iter().map(|f| f.symbols).collect();
        let vocab: Vec<Symbol> = (0..6).map(|i| Symbol::from(format!("s{i}"))).collect();
        let mut want = BTreeSet::new();
        for mask in 1u32..64 {
            let set: Vec<Symbol> = (0..6).filter(|i| mask >> i & 1 == 1).map(|i| vocab[i].clone()).collect();
            let k = records.iter().filter(|r| set.iter().all(|s| r.contains(s))).count();
            if k > 0 && k as f64 / n >= minsup - 1e-12 {
                want.insert(set);
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn stream_support_is_downward_closed(syms in stream_symbols(), ow in 2usize..6) {
        let ds = stream(&syms);
        let res = mine_frm(&ds, 1e-6, Some(ow)).unwrap();
        for r in &res.rules {
            let rule = r.rule();
            let sr = support(Pattern::Rule(&rule), &ds, Some(ow)).unwrap();
            let sa = support(Pattern::Itemset(&rule.premise), &ds, Some(ow)).unwrap();
            let sb = support(Pattern::Itemset(&rule.conclusion), &ds, Some(ow)).unwrap();
            prop_assert!(sr <= sb + 1e-12);
            prop_assert!((sr - r.support).abs() < 1e-12);
            // self-loops pair two occurrences of the same symbol
            if !rule.is_self_loop() {
                prop_assert!(sr <= sa + 1e-12);
            }
        }
    }

    #[test]
    fn filters_are_idempotent(syms in stream_symbols(), t in 0.0f64..1.0) {
        let rules = score_rule_set(&mine_atomic(&stream(&syms), &MiningParams::default().with_ow(3)).unwrap());
        for f in [Filter::Confidence(t), Filter::BayesFactor(t * 3.0), Filter::BestConfidence] {
            let once = f.apply(&rules);
            prop_assert_eq!(f.apply(&once), once.clone());
        }
    }

    #[test]
    fn components_partition_the_nodes(syms in stream_symbols(), ow in 2usize..6) {
        let rules = score_rule_set(&mine_atomic(&stream(&syms), &MiningParams::default().with_ow(ow)).unwrap());
        let g = build_graph(&rules);
        let comps = g.components();
        let mut seen = BTreeSet::new();
        for c in &comps {
            prop_assert!(!c.is_empty());
            for s in c {
                prop_assert!(seen.insert(s.clone()), "node in two components");
            }
        }
        prop_assert_eq!(seen, g.nodes.clone());
        // every edge stays inside one component
        for e in &g.edges {
            prop_assert!(comps.iter().any(|c| c.contains(&e.from) && c.contains(&e.to)));
        }
    }

    #[test]
    fn filtering_commutes_with_graph_building(syms in stream_symbols(), t in 0.0f64..1.0) {
        let rules = score_rule_set(&mine_atomic(&stream(&syms), &MiningParams::default().with_ow(3)).unwrap());
        let kept = Filter::Confidence(t).apply(&rules);
        let direct = build_graph(&kept);
        let mut pruned = build_graph(&rules);
        pruned.edges.retain(|e| e.rule.confidence >= t);
        pruned.nodes = pruned.edges.iter().flat_map(|e| [e.from.clone(), e.to.clone()]).collect();
        prop_assert_eq!(direct, pruned);
    }

    #[test]
    fn datasets_round_trip(syms in stream_symbols(), rows in db_rows()) {
        for ds in [stream(&syms), database(&rows)] {
            let text = io::format_dataset(&ds).unwrap();
            let back = io::parse_dataset(&text, ds.mode(), Path::new("mem")).unwrap();
            prop_assert_eq!(&back, &ds);
            prop_assert_eq!(io::format_dataset(&back).unwrap(), text);
        }
    }

    #[test]
    fn rule_files_round_trip(syms in stream_symbols()) {
        let rules = score_rule_set(&mine_atomic(&stream(&syms), &MiningParams::default().with_ow(3)).unwrap());
        let text = io::format_rules(&rules).unwrap();
        let back: Vec<ScoredRule> = io::parse_rules(&text).unwrap();
        prop_assert_eq!(io::format_rules(&back).unwrap(), text);
        prop_assert_eq!(back.len(), rules.len());
    }

    #[test]
    fn generator_invariants(seed in any::<u64>(), n_random in 200usize..400, n_chains in 0usize..10) {
        let cfg = GeneratorConfig { n_random, n_chains, seed, ..Default::default() };
        let ds = generate_timeseries(&cfg).unwrap();
        let events = ds.events().unwrap();
        prop_assert_eq!(events.len(), n_random + 3 * n_chains);
        let chain_pos: Vec<usize> = events.iter().enumerate().filter(|(_, e)| cfg.chain.contains(&e.symbol)).map(|(i, _)| i).collect();
        prop_assert_eq!(chain_pos.len(), 3 * n_chains);
        for (k, block) in chain_pos.chunks(3).enumerate() {
            for (j, &p) in block.iter().enumerate() {
                prop_assert_eq!(&events[p].symbol, &cfg.chain[j], "chain {} out of order", k);
            }
            prop_assert!(block.windows(2).all(|w| (1..=10).contains(&(w[1] - w[0]))));
        }
    }

    #[test]
    fn categories_match_vocabulary_oracle(a in 0u32..15, b in 0u32..15) {
        let cfg = GeneratorConfig::default();
        let rule = Rule::atomic(a, b);
        let random = |x: u32| x < 4;
        let chain = |x: u32| (10..13).contains(&x);
        let want = if random(a) && random(b) {
            Some(RuleCategory::Random)
        } else if random(a) && chain(b) {
            Some(RuleCategory::RandomToChain)
        } else if chain(a) && random(b) {
            Some(RuleCategory::ChainToRandom)
        } else if chain(a) && chain(b) {
            Some(if b == a + 1 { RuleCategory::Chain } else { RuleCategory::ChainVocabulary })
        } else {
            None
        };
        prop_assert_eq!(categorize(&rule, &cfg), want);
        let counts = categorize_rules([&rule], &cfg);
        prop_assert_eq!(counts.extracted.iter().sum::<u64>() + counts.other, 1);
    }
}

#[test]
fn bootstrap_is_reproducible_across_thread_counts() {
    let ds = brm::fixtures::contingency_database(12, 5, 7, 20).unwrap();
    let rule = Rule::atomic("a", "b");
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| bootstrap_ci(&rule, &ds, 2000, 0.95, 9).unwrap());
    let many = bootstrap_ci(&rule, &ds, 2000, 0.95, 9).unwrap();
    assert_eq!(one.0.to_bits(), many.0.to_bits());
    assert_eq!(one.1.to_bits(), many.1.to_bits());
    assert_ne!(bootstrap_ci(&rule, &ds, 2000, 0.95, 10).unwrap(), many);
}

#[test]
fn pep_is_deterministic() {
    let ds = brm::fixtures::entity_fixture(5).unwrap();
    let p = Pipeline {
        miner: Miner::Brm(MiningParams::default().with_ow(brm::fixtures::ENTITY_FIXTURE_OW)),
        filter: Some(Filter::Confidence(0.5)),
    };
    assert_eq!(pep_sweep(&ds, &p).unwrap(), pep_sweep(&ds, &p).unwrap());
}

#[test]
fn entity_tags_survive_a_round_trip() {
    let events = vec![Event::new("a", 0).with_entity("p1"), Event::new("b", 3).with_entity("p2")];
    let ds = Dataset::timeseries(events).unwrap();
    let text = io::format_dataset(&ds).unwrap();
    assert_eq!(io::parse_dataset(&text, Mode::Timeseries, Path::new("mem")).unwrap(), ds);
}
