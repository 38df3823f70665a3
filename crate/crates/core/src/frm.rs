//! Exhaustive frequent association rule mining (minimum support with
//! downward-closure pruning), used as the baseline for every comparison.
//!
//! On a stream, the miner uses the same sliding windows and conclusion
//! pairing as the belief miner, so the two differ only in how rules are
//! selected. A symbol's support is its occurrence count over the stream
//! length; a rule's support is its paired observation count over the stream
//! length.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{assign_bayes_factors, sort_canonical, ScoredRule};
use crate::model::{Dataset, Rule, Symbol};
use crate::scan::{intern_records, intern_stream, pair_key, scan_windows, Vocabulary, WindowVisitor};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequentItemset {
    pub symbols: Vec<Symbol>,
    pub count: u64,
    pub support: f64,
}

#[derive(Debug, Clone, Default)]
pub struct FrmResult {
    /// Frequent itemsets, level by level, each level in canonical order.
    pub itemsets: Vec<FrequentItemset>,
    /// Atomic rules with support ≥ minsup, in canonical order.
    pub rules: Vec<ScoredRule>,
}

/// What a support value is computed for.
#[derive(Debug, Clone, Copy)]
pub enum Pattern<'a> {
    Itemset(&'a [Symbol]),
    Rule(&'a Rule),
}

/// `Support = #occurrences / |D|`.
///
/// On a stream, only single symbols and atomic rules have a support; `ow`
/// is required for rules.
pub fn support(pattern: Pattern<'_>, dataset: &Dataset, ow: Option<usize>) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = dataset.len() as f64;
    match dataset {
        Dataset::Database(records) => {
            let set: Vec<&Symbol> = match pattern {
                Pattern::Itemset(s) => s.iter().collect(),
                Pattern::Rule(r) => r.premise.iter().chain(&r.conclusion).collect(),
            };
            let hits = records
                .iter()
                .filter(|r| set.iter().all(|s| r.contains(s)))
                .count();
            Ok(hits as f64 / n)
        }
        Dataset::Timeseries(events) => match pattern {
            Pattern::Itemset([s]) => {
                Ok(events.iter().filter(|e| &e.symbol == s).count() as f64 / n)
            }
            Pattern::Itemset(_) => Err(Error::Unsupported(
                "stream support is defined for single symbols and atomic rules",
            )),
            Pattern::Rule(rule) => {
                if !rule.is_atomic() {
                    return Err(Error::Unsupported(
                        "stream support is defined for single symbols and atomic rules",
                    ));
                }
                let ow = ow.ok_or(Error::MissingWindow)?;
                let (vocab, ids) = intern_stream(events);
                let (Some(a), Some(b)) = (vocab.id(&rule.premise[0]), vocab.id(&rule.conclusion[0]))
                else {
                    return Ok(0.0);
                };
                let counts = count_stream_pairs(&ids, ow, vocab.len(), |h, x| h == a && x == b);
                Ok(counts.get(&pair_key(a, b)).copied().unwrap_or(0) as f64 / n)
            }
        },
    }
}

/// `lift = confidence / support(conclusion)`.
pub fn lift(rule: &Rule, dataset: &Dataset, ow: Option<usize>) -> Result<f64> {
    let sup_b = support(Pattern::Itemset(&rule.conclusion), dataset, ow)?;
    if sup_b == 0.0 {
        return Err(Error::ZeroConclusionSupport);
    }
    let sup_rule = support(Pattern::Rule(rule), dataset, ow)?;
    let sup_a = support(Pattern::Itemset(&rule.premise), dataset, ow)?;
    if sup_a == 0.0 {
        return Err(Error::ZeroPremiseCount);
    }
    Ok(sup_rule / sup_a / sup_b)
}

/// Paired observation counts of the atomic rules accepted by `keep`.
pub(crate) fn count_stream_pairs(
    ids: &[u32],
    ow: usize,
    vocab_len: usize,
    keep: impl Fn(u32, u32) -> bool,
) -> HashMap<u64, u64> {
    struct Counter<F> {
        keep: F,
        last: HashMap<u64, usize>,
        counts: HashMap<u64, u64>,
    }
    impl<F: Fn(u32, u32) -> bool> WindowVisitor for Counter<F> {
        fn enter(&mut self, _: u32, _: usize) {}
        fn try_pair(&mut self, head: u32, x: u32, pos: usize) -> bool {
            if !(self.keep)(head, x) {
                return false;
            }
            let key = pair_key(head, x);
            if self.last.get(&key).is_some_and(|&l| pos <= l) {
                return false;
            }
            self.last.insert(key, pos);
            *self.counts.entry(key).or_default() += 1;
            true
        }
        fn candidate(&mut self, _: u32, _: u32, _: bool) {}
    }
    let mut c = Counter {
        keep,
        last: HashMap::new(),
        counts: HashMap::new(),
    };
    scan_windows(ids, ow, vocab_len, &mut c);
    c.counts
}

/// Frequent-rule mining at minimum support `minsup`.
pub fn mine_frm(dataset: &Dataset, minsup: f64, ow: Option<usize>) -> Result<FrmResult> {
    if !(minsup > 0.0 && minsup <= 1.0) {
        return Err(Error::param("minsup", format!("{minsup} is outside (0, 1]")));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match dataset {
        Dataset::Database(_) => mine_database(dataset, minsup),
        Dataset::Timeseries(_) => mine_stream(dataset, minsup, ow.ok_or(Error::MissingWindow)?),
    }
}

fn min_count(minsup: f64, n: usize) -> u64 {
    // smallest count c with c / n >= minsup, tolerant to rounding in minsup * n
    let exact = minsup * n as f64;
    let c = exact.ceil();
    if c - exact > 1.0 - 1e-9 {
        (c - 1.0).max(1.0) as u64
    } else {
        c.max(1.0) as u64
    }
}

/// Breadth-first Apriori over records.
pub fn frequent_itemsets(dataset: &Dataset, minsup: f64) -> Result<Vec<FrequentItemset>> {
    let records = dataset.records().ok_or(Error::WrongMode { expected: "database" })?;
    let n = records.len();
    let (vocab, rows) = intern_records(records);
    let rows: Vec<Vec<u32>> = rows
        .into_iter()
        .map(|mut r| {
            r.sort_unstable();
            r
        })
        .collect();
    let threshold = min_count(minsup, n);
    let mut out = Vec::new();

    let mut single = vec![0u64; vocab.len()];
    for r in &rows {
        for &s in r {
            single[s as usize] += 1;
        }
    }
    let mut level: Vec<(Vec<u32>, u64)> = (0..vocab.len() as u32)
        .filter(|&s| single[s as usize] >= threshold)
        .map(|s| (vec![s], single[s as usize]))
        .collect();
    level.sort();

    while !level.is_empty() {
        push_level(&mut out, &level, &vocab, n);
        let frequent: HashSet<&[u32]> = level.iter().map(|(s, _)| s.as_slice()).collect();
        let candidates = join_candidates(&level, &frequent);
        let counted: Vec<(Vec<u32>, u64)> = candidates
            .into_par_iter()
            .map(|c| {
                let count = rows.iter().filter(|r| is_sorted_subset(&c, r)).count() as u64;
                (c, count)
            })
            .filter(|(_, count)| *count >= threshold)
            .collect();
        level = counted;
        level.sort();
    }
    Ok(out)
}

fn push_level(out: &mut Vec<FrequentItemset>, level: &[(Vec<u32>, u64)], vocab: &Vocabulary, n: usize) {
    let mut sets: Vec<FrequentItemset> = level
        .iter()
        .map(|(ids, count)| {
            let mut symbols: Vec<Symbol> = ids.iter().map(|&i| vocab.symbol(i).clone()).collect();
            symbols.sort();
            FrequentItemset {
                symbols,
                count: *count,
                support: *count as f64 / n as f64,
            }
        })
        .collect();
    sets.sort_by(|a, b| a.symbols.cmp(&b.symbols));
    out.extend(sets);
}

/// Joins itemsets sharing all but their last element, keeping only
/// candidates whose every (k-1)-subset is frequent.
fn join_candidates(level: &[(Vec<u32>, u64)], frequent: &HashSet<&[u32]>) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for (i, (a, _)) in level.iter().enumerate() {
        for (b, _) in &level[i + 1..] {
            let k = a.len();
            if a[..k - 1] != b[..k - 1] {
                break;
            }
            let mut c = a.clone();
            c.push(b[k - 1]);
            let all_frequent = (0..c.len()).all(|skip| {
                let sub: Vec<u32> = c
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &x)| x)
                    .collect();
                frequent.contains(sub.as_slice())
            });
            if all_frequent {
                out.push(c);
            }
        }
    }
    out
}

fn is_sorted_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

fn mine_database(dataset: &Dataset, minsup: f64) -> Result<FrmResult> {
    let n = dataset.len();
    let itemsets = frequent_itemsets(dataset, minsup)?;
    let single: HashMap<&Symbol, u64> = itemsets
        .iter()
        .filter(|s| s.symbols.len() == 1)
        .map(|s| (&s.symbols[0], s.count))
        .collect();
    let mut rules = Vec::new();
    for pair in itemsets.iter().filter(|s| s.symbols.len() == 2) {
        let (x, y) = (&pair.symbols[0], &pair.symbols[1]);
        for (a, b) in [(x, y), (y, x)] {
            let rule = Rule::atomic(a.clone(), b.clone());
            rules.push(ScoredRule::from_counts(&rule, pair.count, single[a], single[b], n));
        }
    }
    assign_bayes_factors(&mut rules);
    sort_canonical(&mut rules);
    Ok(FrmResult { itemsets, rules })
}

fn mine_stream(dataset: &Dataset, minsup: f64, ow: usize) -> Result<FrmResult> {
    let events = dataset.events().expect("stream");
    let n = events.len();
    let (vocab, ids) = intern_stream(events);
    let threshold = min_count(minsup, n);
    let mut single = vec![0u64; vocab.len()];
    for &s in &ids {
        single[s as usize] += 1;
    }
    let frequent: Vec<bool> = single.iter().map(|&c| c >= threshold).collect();
    let mut itemsets: Vec<FrequentItemset> = (0..vocab.len())
        .filter(|&i| frequent[i])
        .map(|i| FrequentItemset {
            symbols: vec![vocab.symbol(i as u32).clone()],
            count: single[i],
            support: single[i] as f64 / n as f64,
        })
        .collect();
    itemsets.sort_by(|a, b| a.symbols.cmp(&b.symbols));

    let counts = count_stream_pairs(&ids, ow, vocab.len(), |h, x| {
        frequent[h as usize] && frequent[x as usize]
    });
    let mut rules: Vec<ScoredRule> = counts
        .into_iter()
        .filter(|&(_, c)| c >= threshold)
        .map(|(key, c)| {
            let (a, b) = ((key >> 32) as u32, key as u32);
            let rule = Rule::atomic(vocab.symbol(a).clone(), vocab.symbol(b).clone());
            ScoredRule::from_counts(&rule, c, single[a as usize], single[b as usize], n)
        })
        .collect();
    assign_bayes_factors(&mut rules);
    sort_canonical(&mut rules);
    Ok(FrmResult { itemsets, rules })
}

/// Minimum support at which the baseline emits (at least) `target` rules:
/// the `target`-th largest atomic rule support. Ties at the cut keep every
/// tied rule, so the emitted count can exceed `target`.
pub fn minsup_for_rule_count(dataset: &Dataset, target: usize, ow: Option<usize>) -> Result<f64> {
    if target == 0 {
        return Err(Error::param("target", "must be at least 1"));
    }
    let n = dataset.len();
    let mut counts: Vec<u64> = match dataset {
        Dataset::Database(records) => {
            let (_, rows) = intern_records(records);
            let mut pairs: HashMap<(u32, u32), u64> = HashMap::new();
            for r in &rows {
                let uniq: BTreeSet<u32> = r.iter().copied().collect();
                for &a in &uniq {
                    for &b in &uniq {
                        if a != b {
                            *pairs.entry((a, b)).or_default() += 1;
                        }
                    }
                }
            }
            pairs.into_values().collect()
        }
        Dataset::Timeseries(events) => {
            let ow = ow.ok_or(Error::MissingWindow)?;
            let (vocab, ids) = intern_stream(events);
            count_stream_pairs(&ids, ow, vocab.len(), |_, _| true)
                .into_values()
                .collect()
        }
    };
    if counts.is_empty() {
        return Err(Error::EmptyDataset);
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let idx = target.min(counts.len()) - 1;
    Ok(counts[idx] as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Record;

    fn db(rows: &[&[&str]]) -> Dataset {
        Dataset::database(rows.iter().map(|r| Record::new(r.iter().copied()).unwrap()).collect())
            .unwrap()
    }

    #[test]
    fn support_examples() {
        let ds = db(&[&["a", "b"], &["a"], &["a", "b", "c"], &["c"]]);
        let ab = Rule::atomic("a", "b");
        assert_eq!(support(Pattern::Rule(&ab), &ds, None).unwrap(), 0.5);
        let all = db(&[&["x", "y"] as &[&str]; 3]);
        let x = [Symbol::from("x")];
        assert_eq!(support(Pattern::Itemset(&x), &all, None).unwrap(), 1.0);
    }

    #[test]
    fn stream_support_uses_pairing() {
        let ds = Dataset::from_symbols(["a", "a", "b", "c"]).unwrap();
        let ab = Rule::atomic("a", "b");
        assert_eq!(support(Pattern::Rule(&ab), &ds, Some(3)).unwrap(), 0.25);
        let a = [Symbol::from("a")];
        assert_eq!(support(Pattern::Itemset(&a), &ds, None).unwrap(), 0.5);
        assert!(support(Pattern::Rule(&ab), &ds, None).is_err());
    }

    #[test]
    fn identical_records() {
        let res = mine_frm(&db(&[&["a", "b"] as &[&str]; 10]), 0.5, None).unwrap();
        let rules: Vec<String> = res.rules.iter().map(|r| r.rule().to_string()).collect();
        assert_eq!(rules, vec!["a -> b", "b -> a"]);
        assert!(res.rules.iter().all(|r| r.support == 1.0));
    }

    #[test]
    fn lift_examples() {
        // a and b independent: P(a)=P(b)=1/2, P(ab)=1/4
        let ds = db(&[&["a", "b"], &["a", "c"], &["b", "c"], &["c"]]);
        assert!((lift(&Rule::atomic("a", "b"), &ds, None).unwrap() - 1.0).abs() < 1e-12);
        // perfectly associated pair
        let ds = db(&[&["a", "b"], &["c"], &["c"], &["c"]]);
        let l = lift(&Rule::atomic("a", "b"), &ds, None).unwrap();
        assert!((l - 1.0 / 0.25).abs() < 1e-12);
        assert!(matches!(lift(&Rule::atomic("a", "z"), &ds, None), Err(Error::ZeroConclusionSupport)));
    }

    #[test]
    fn min_count_rounding() {
        assert_eq!(min_count(0.1, 1000), 100);
        assert_eq!(min_count(0.5, 10), 5);
        assert_eq!(min_count(0.3, 10), 3);
        assert_eq!(min_count(0.001, 10), 1);
    }

    #[test]
    fn rule_count_target() {
        let ds = db(&[&["a", "b"], &["a", "b"], &["a", "c"]]);
        // pair counts: a<->b 2, a<->c 1
        assert_eq!(minsup_for_rule_count(&ds, 2, None).unwrap(), 2.0 / 3.0);
        assert_eq!(mine_frm(&ds, 2.0 / 3.0, None).unwrap().rules.len(), 2);
    }
}
