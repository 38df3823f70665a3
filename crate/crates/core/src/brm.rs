//! Bayesian rule mining: atomic rules in one pass over the data, then a
//! breadth-first search for conjunctive premises.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{
    belief_update, estimate_p_ab, passes_unchecked, replay_belief, Dataset, Event, MiningParams,
    Mode, Record, Rule, RuleTracker, Symbol,
};
use crate::scan::{intern_records, intern_stream, pair_key, scan_windows, Vocabulary, WindowVisitor};

/// `ow` consecutive events starting at `start_index` (shorter at the tail).
#[derive(Debug, Clone, Copy)]
pub struct ObservationWindow<'a> {
    pub start_index: usize,
    pub events: &'a [Event],
}

/// All windows of a stream, advancing one symbol at a time.
pub fn observation_windows(events: &[Event], ow: usize) -> impl Iterator<Item = ObservationWindow<'_>> {
    (0..events.len()).map(move |i| ObservationWindow {
        start_index: i,
        events: &events[i..(i + ow).min(events.len())],
    })
}

#[derive(Debug, Clone, Copy)]
pub enum Transaction<'a> {
    Window(ObservationWindow<'a>),
    Record(&'a Record),
}

/// Candidate atomic rules of one window or record.
///
/// A window pairs its first symbol with every distinct later symbol,
/// including a later occurrence of the head itself. A record yields every
/// ordered pair of distinct symbols.
pub fn select_candidate_rules(t: Transaction<'_>) -> BTreeSet<Rule> {
    match t {
        Transaction::Window(w) => match w.events.split_first() {
            Some((head, rest)) => rest
                .iter()
                .map(|e| Rule::atomic(head.symbol.clone(), e.symbol.clone()))
                .collect(),
            None => BTreeSet::new(),
        },
        Transaction::Record(r) => r
            .symbols()
            .iter()
            .cartesian_product(r.symbols())
            .filter(|(a, b)| a != b)
            .map(|(a, b)| Rule::atomic(a.clone(), b.clone()))
            .collect(),
    }
}

/// The evolving rule set `A` with its counters.
#[derive(Debug, Clone)]
pub struct RuleSet {
    trackers: BTreeMap<Rule, RuleTracker>,
    symbol_counts: BTreeMap<Symbol, u64>,
    dataset_size: usize,
    mode: Mode,
    selector: f64,
    prior: f64,
    visits: usize,
}

impl RuleSet {
    /// Every rule that was ever a candidate, in or out of the set.
    pub fn trackers(&self) -> impl Iterator<Item = &RuleTracker> {
        self.trackers.values()
    }

    /// Rules currently in `A`, in canonical order.
    pub fn rules(&self) -> impl Iterator<Item = &RuleTracker> {
        self.trackers.values().filter(|t| t.in_set)
    }

    pub fn rule_set(&self) -> BTreeSet<Rule> {
        self.rules().map(|t| t.rule.clone()).collect()
    }

    pub fn get(&self, rule: &Rule) -> Option<&RuleTracker> {
        self.trackers.get(rule)
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.get(rule).is_some_and(|t| t.in_set)
    }

    pub fn len(&self) -> usize {
        self.rules().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global occurrence count of a symbol (records containing it, or
    /// stream occurrences).
    pub fn symbol_count(&self, s: &Symbol) -> u64 {
        self.symbol_counts.get(s).copied().unwrap_or(0)
    }

    pub fn symbol_counts(&self) -> &BTreeMap<Symbol, u64> {
        &self.symbol_counts
    }

    pub fn dataset_size(&self) -> usize {
        self.dataset_size
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn selector(&self) -> f64 {
        self.selector
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    /// Number of dataset elements the mining pass read.
    pub fn pass_visits(&self) -> usize {
        self.visits
    }

    /// Rule set with the same counters evaluated at another selector.
    ///
    /// Counters do not depend on the selector, and after the cross-check
    /// membership is exactly the counter test on final counts, so this
    /// equals re-mining with `selector`.
    pub fn reselect(&self, selector: f64) -> RuleSet {
        let mut out = self.clone();
        out.selector = selector;
        for t in out.trackers.values_mut() {
            t.in_set = t.rule_count > 0;
        }
        cross_check_rules(&mut out);
        quick_update_belief(&mut out, self.prior);
        out
    }

    fn conclusion_total(&self, rule: &Rule) -> u64 {
        self.symbol_count(&rule.conclusion[0])
    }
}

#[derive(Debug, Clone, Copy)]
struct Tracker {
    rule_count: u64,
    conclusion_count: u64,
    belief: f64,
    in_set: bool,
    last_paired: Option<usize>,
}

struct AtomicMiner {
    trackers: HashMap<u64, Tracker>,
    counts: Vec<u64>,
    selector: f64,
    prior: f64,
    visits: usize,
}

impl AtomicMiner {
    fn new(vocab_len: usize, params: &MiningParams) -> Self {
        AtomicMiner {
            trackers: HashMap::new(),
            counts: vec![0; vocab_len],
            selector: params.selector,
            prior: params.prior,
            visits: 0,
        }
    }

    fn tracker(&mut self, head: u32, x: u32) -> &mut Tracker {
        let prior = self.prior;
        self.trackers.entry(pair_key(head, x)).or_insert(Tracker {
            rule_count: 0,
            conclusion_count: 0,
            belief: prior,
            in_set: false,
            last_paired: None,
        })
    }

    fn observe(&mut self, head: u32, x: u32, occurrence: usize) -> bool {
        let t = self.tracker(head, x);
        if t.last_paired.is_some_and(|last| occurrence <= last) {
            return false;
        }
        t.last_paired = Some(occurrence);
        t.rule_count += 1;
        true
    }

    /// Criterion evaluation for a candidate: add to `A` on pass, remove on fail.
    fn evaluate(&mut self, head: u32, x: u32, observed: bool) {
        let b = self.counts[x as usize];
        let s = self.selector;
        let t = self.tracker(head, x);
        t.conclusion_count = b;
        if t.rule_count == 0 {
            return;
        }
        if observed {
            let p = estimate_p_ab(t.rule_count, b, s).unwrap_or(1.0);
            t.belief = belief_update(t.belief, p);
        }
        t.in_set = passes_unchecked(t.rule_count, b, s);
    }

    fn into_rule_set(self, vocab: &Vocabulary, dataset_size: usize, mode: Mode) -> RuleSet {
        let trackers = self
            .trackers
            .into_iter()
            .map(|(key, t)| {
                let rule = Rule::atomic(
                    vocab.symbol((key >> 32) as u32).clone(),
                    vocab.symbol(key as u32).clone(),
                );
                let tracker = RuleTracker {
                    rule: rule.clone(),
                    rule_count: t.rule_count,
                    conclusion_count: t.conclusion_count,
                    belief: t.belief,
                    in_set: t.in_set,
                    last_paired: t.last_paired,
                };
                (rule, tracker)
            })
            .collect();
        let symbol_counts = self
            .counts
            .iter()
            .enumerate()
            .map(|(id, &c)| (vocab.symbol(id as u32).clone(), c))
            .collect();
        RuleSet {
            trackers,
            symbol_counts,
            dataset_size,
            mode,
            selector: self.selector,
            prior: self.prior,
            visits: self.visits,
        }
    }
}

impl WindowVisitor for AtomicMiner {
    fn enter(&mut self, symbol: u32, _pos: usize) {
        self.counts[symbol as usize] += 1;
        self.visits += 1;
    }

    fn try_pair(&mut self, head: u32, x: u32, pos: usize) -> bool {
        self.observe(head, x, pos)
    }

    fn candidate(&mut self, head: u32, x: u32, observed: bool) {
        self.evaluate(head, x, observed);
    }
}

/// Atomic rule mining in a single pass, followed by the cross-check and
/// belief replay.
pub fn mine_atomic(dataset: &Dataset, params: &MiningParams) -> Result<RuleSet> {
    params.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut set = match dataset {
        Dataset::Timeseries(events) => {
            let ow = params.ow.ok_or(Error::MissingWindow)?;
            let (vocab, ids) = intern_stream(events);
            let mut miner = AtomicMiner::new(vocab.len(), params);
            scan_windows(&ids, ow, vocab.len(), &mut miner);
            miner.into_rule_set(&vocab, events.len(), Mode::Timeseries)
        }
        Dataset::Database(records) => {
            let (vocab, rows) = intern_records(records);
            let mut miner = AtomicMiner::new(vocab.len(), params);
            for (idx, row) in rows.iter().enumerate() {
                for &s in row {
                    miner.counts[s as usize] += 1;
                }
                miner.visits += 1;
                for (&a, &b) in row.iter().cartesian_product(row).filter(|(a, b)| a != b) {
                    let observed = miner.observe(a, b, idx);
                    miner.evaluate(a, b, observed);
                }
            }
            miner.into_rule_set(&vocab, records.len(), Mode::Database)
        }
    };
    cross_check_rules(&mut set);
    quick_update_belief(&mut set, params.prior);
    Ok(set)
}

/// Re-evaluates every in-set rule against the final conclusion counts and
/// drops rules that lost belief after their last observation.
pub fn cross_check_rules(set: &mut RuleSet) {
    let s = set.selector;
    let totals: Vec<u64> = set.trackers.keys().map(|r| set.conclusion_total(r)).collect();
    for (t, b) in set.trackers.values_mut().zip(totals) {
        t.conclusion_count = b;
        if t.in_set {
            t.in_set = t.rule_count > 0 && passes_unchecked(t.rule_count, b, s);
        }
    }
}

/// Recomputes the belief of every retained rule from its counters, as if
/// all unassociated conclusions preceded the rule observations.
pub fn quick_update_belief(set: &mut RuleSet, prior: f64) {
    let s = set.selector;
    set.prior = prior;
    for t in set.trackers.values_mut().filter(|t| t.in_set) {
        let unassociated = t.conclusion_count.saturating_sub(t.rule_count);
        t.belief = replay_belief(t.rule_count, unassociated, s, prior);
    }
}

/// Result of the conjunctive-premise search.
#[derive(Debug, Clone, Default)]
pub struct ConjunctiveSearch {
    pub rules: Vec<RuleTracker>,
    /// Number of premise combinations whose criterion was evaluated.
    pub evaluated: usize,
}

/// Breadth-first search for conjunctive premises over the atomic set `A`.
///
/// Premises are grouped by conclusion. For each conclusion, combinations of
/// size 2, 3, ... are tried; a combination that fails the criterion blocks
/// every superset for that conclusion. The search for a conclusion stops
/// when no unblocked combination is left.
///
/// Occurrences are counted in one extra pass: in a database a record
/// supports `(a, b) -> d` when it contains all three; in a stream an
/// occurrence of `d` supports it when it is paired with every premise
/// symbol by the atomic window pairing.
pub fn mine_conjunctive(
    atomic: &RuleSet,
    dataset: &Dataset,
    params: &MiningParams,
) -> Result<ConjunctiveSearch> {
    params.validate()?;
    let selector = params.selector;
    let mut groups: BTreeMap<Symbol, Vec<Symbol>> = BTreeMap::new();
    for t in atomic.rules().filter(|t| t.rule.is_atomic() && !t.rule.is_self_loop()) {
        groups
            .entry(t.rule.conclusion[0].clone())
            .or_default()
            .push(t.rule.premise[0].clone());
    }
    groups.retain(|_, premises| premises.len() >= 2);
    if groups.is_empty() {
        return Ok(ConjunctiveSearch::default());
    }

    let occurrences = premise_occurrences(&groups, dataset, params)?;
    let mut out = ConjunctiveSearch::default();
    for (conclusion, premises) in &groups {
        let b = atomic.symbol_count(conclusion);
        let lists: Vec<&[usize]> = premises
            .iter()
            .map(|a| {
                occurrences
                    .get(&(a.clone(), conclusion.clone()))
                    .map_or(&[][..], Vec::as_slice)
            })
            .collect();
        let mut blocked: Vec<Vec<usize>> = Vec::new();
        for size in 2..=premises.len() {
            let unblocked: Vec<Vec<usize>> = (0..premises.len())
                .combinations(size)
                .filter(|combo| !blocked.iter().any(|blk| is_subset(blk, combo)))
                .collect();
            if unblocked.is_empty() {
                break;
            }
            for combo in unblocked {
                out.evaluated += 1;
                let count = intersection_len(combo.iter().map(|&i| lists[i]));
                if count > 0 && count <= b && passes_unchecked(count, b, selector) {
                    let rule = Rule {
                        premise: combo.iter().map(|&i| premises[i].clone()).collect(),
                        conclusion: vec![conclusion.clone()],
                    };
                    let mut tracker = RuleTracker::new(rule, params.prior);
                    tracker.rule_count = count;
                    tracker.conclusion_count = b;
                    tracker.in_set = true;
                    tracker.belief = replay_belief(count, b - count, selector, params.prior);
                    out.rules.push(tracker);
                } else {
                    blocked.push(combo);
                }
            }
        }
    }
    out.rules.sort_by(|a, b| a.rule.cmp(&b.rule));
    Ok(out)
}

/// Conjunctive conclusions have no atomic pruning property; the search
/// strategy is application specific and not provided.
pub fn mine_conjunctive_conclusions(_atomic: &RuleSet, _dataset: &Dataset) -> Result<ConjunctiveSearch> {
    Err(Error::Unsupported("conjunctive-conclusion search is not implemented"))
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn intersection_len<'a>(mut lists: impl Iterator<Item = &'a [usize]>) -> u64 {
    let Some(first) = lists.next() else { return 0 };
    let mut acc: Vec<usize> = first.to_vec();
    for l in lists {
        acc.retain(|x| l.binary_search(x).is_ok());
        if acc.is_empty() {
            break;
        }
    }
    acc.len() as u64
}

/// Sorted occurrence identifiers supporting each grouped atomic rule `a -> b`.
fn premise_occurrences(
    groups: &BTreeMap<Symbol, Vec<Symbol>>,
    dataset: &Dataset,
    params: &MiningParams,
) -> Result<HashMap<(Symbol, Symbol), Vec<usize>>> {
    let wanted: BTreeSet<(Symbol, Symbol)> = groups
        .iter()
        .flat_map(|(b, premises)| premises.iter().map(move |a| (a.clone(), b.clone())))
        .collect();
    let mut out: HashMap<(Symbol, Symbol), Vec<usize>> = HashMap::new();
    match dataset {
        Dataset::Database(records) => {
            for (idx, r) in records.iter().enumerate() {
                for (a, b) in &wanted {
                    if r.contains(b) && r.contains(a) {
                        out.entry((a.clone(), b.clone())).or_default().push(idx);
                    }
                }
            }
        }
        Dataset::Timeseries(events) => {
            let ow = params.ow.ok_or(Error::MissingWindow)?;
            let (vocab, ids) = intern_stream(events);
            let keys: HashMap<u64, (Symbol, Symbol)> = wanted
                .iter()
                .filter_map(|(a, b)| {
                    Some((pair_key(vocab.id(a)?, vocab.id(b)?), (a.clone(), b.clone())))
                })
                .collect();
            let mut rec = PairingRecorder {
                keys,
                last: HashMap::new(),
                paired: HashMap::new(),
            };
            scan_windows(&ids, ow, vocab.len(), &mut rec);
            for (key, positions) in rec.paired {
                out.insert(rec.keys[&key].clone(), positions);
            }
        }
    }
    Ok(out)
}

struct PairingRecorder {
    keys: HashMap<u64, (Symbol, Symbol)>,
    last: HashMap<u64, usize>,
    paired: HashMap<u64, Vec<usize>>,
}

impl WindowVisitor for PairingRecorder {
    fn enter(&mut self, _symbol: u32, _pos: usize) {}

    fn try_pair(&mut self, head: u32, x: u32, pos: usize) -> bool {
        let key = pair_key(head, x);
        if let Some(&last) = self.last.get(&key) {
            if pos <= last {
                return false;
            }
        }
        self.last.insert(key, pos);
        if self.keys.contains_key(&key) {
            self.paired.entry(key).or_default().push(pos);
        }
        true
    }

    fn candidate(&mut self, _: u32, _: u32, _: bool) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(symbols: &[&str]) -> Dataset {
        Dataset::from_symbols(symbols.iter().copied()).unwrap()
    }

    fn db(rows: &[&[&str]]) -> Dataset {
        Dataset::database(rows.iter().map(|r| Record::new(r.iter().copied()).unwrap()).collect())
            .unwrap()
    }

    fn params(ow: usize) -> MiningParams {
        MiningParams::default().with_ow(ow)
    }

    #[test]
    fn window_candidates_dedup() {
        let ds = stream(&["10", "2", "0", "0", "11"]);
        let events = ds.events().unwrap();
        let w = observation_windows(events, 5).next().unwrap();
        let got = select_candidate_rules(Transaction::Window(w));
        let want: BTreeSet<Rule> = [("10", "2"), ("10", "0"), ("10", "11")]
            .into_iter()
            .map(|(a, b)| Rule::atomic(a, b))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn record_candidates() {
        let single = Record::new(["a"]).unwrap();
        assert!(select_candidate_rules(Transaction::Record(&single)).is_empty());
        let r = Record::new(["a", "b", "c"]).unwrap();
        assert_eq!(select_candidate_rules(Transaction::Record(&r)).len(), 6);
    }

    #[test]
    fn windows_shrink_at_the_tail() {
        let ds = stream(&["a", "b", "c"]);
        let lens: Vec<usize> = observation_windows(ds.events().unwrap(), 2)
            .map(|w| w.events.len())
            .collect();
        assert_eq!(lens, vec![2, 2, 1]);
    }

    #[test]
    fn late_conclusions_remove_rule() {
        let set = mine_atomic(&stream(&["a", "b", "b", "b", "b"]), &params(5)).unwrap();
        let t = set.get(&Rule::atomic("a", "b")).unwrap();
        assert_eq!((t.rule_count, t.conclusion_count), (1, 4));
        assert!(!t.in_set);
        assert!(set.contains(&Rule::atomic("b", "b")));
    }

    #[test]
    fn identical_records_saturate() {
        let set = mine_atomic(&db(&[&["a", "b"] as &[&str]; 5]), &MiningParams::default()).unwrap();
        let rules = set.rule_set();
        assert_eq!(rules, [Rule::atomic("a", "b"), Rule::atomic("b", "a")].into());
        assert!(set.rules().all(|t| t.belief == 1.0));
    }

    #[test]
    fn missing_window_is_an_error() {
        let err = mine_atomic(&stream(&["a", "b"]), &MiningParams::default()).unwrap_err();
        assert!(matches!(err, Error::MissingWindow));
    }

    #[test]
    fn cross_check_examples() {
        let mut set = mine_atomic(&db(&[&["a", "b"]]), &MiningParams::default()).unwrap();
        // fabricate final counters (#r=1, #b=4) and (#r=3, #b=3)
        set.symbol_counts.insert("b".into(), 4);
        set.symbol_counts.insert("a".into(), 3);
        set.trackers.get_mut(&Rule::atomic("b", "a")).unwrap().rule_count = 3;
        cross_check_rules(&mut set);
        assert!(!set.contains(&Rule::atomic("a", "b")));
        assert!(set.contains(&Rule::atomic("b", "a")));
    }

    #[test]
    fn rule_count_never_exceeds_conclusion_count() {
        let set = mine_atomic(&stream(&["a", "a", "b", "a", "a", "a", "b"]), &params(4)).unwrap();
        for t in set.trackers() {
            assert!(t.rule_count <= t.conclusion_count, "{:?}", t);
        }
    }

    #[test]
    fn one_pass_over_the_stream() {
        let ds = stream(&["a", "b", "c", "a", "b", "c", "d"]);
        let set = mine_atomic(&ds, &params(3)).unwrap();
        assert_eq!(set.pass_visits(), ds.len());
    }

    #[test]
    fn blocked_pairs_stop_the_search() {
        // d follows each of a, b, c alone, never two of them together
        let ds = db(&[&["a", "d"], &["b", "d"], &["c", "d"], &["a"], &["b"], &["c"]]);
        let p = MiningParams::default();
        let set = mine_atomic(&ds, &p).unwrap();
        for a in ["a", "b", "c"] {
            assert!(!set.contains(&Rule::atomic(a, "d")));
        }
        // force a group {d: [a, b, c]} through a permissive selector
        let loose = set.reselect(0.0);
        let p0 = p.clone().with_selector(0.0);
        let search = mine_conjunctive(&loose, &ds, &p0).unwrap();
        assert!(search.rules.is_empty());
        // three pairs evaluated at size 2; the triple is never evaluated
        assert_eq!(search.evaluated, 3);
    }

    #[test]
    fn co_occurring_premises_form_conjunction() {
        let mut rows: Vec<&[&str]> = vec![&["a", "b", "d"]; 4];
        rows.extend([&["a"][..], &["b"], &["a", "b"]]);
        let ds = db(&rows);
        let p = MiningParams::default();
        let set = mine_atomic(&ds, &p).unwrap();
        let search = mine_conjunctive(&set, &ds, &p).unwrap();
        let rules: Vec<String> = search.rules.iter().map(|t| t.rule.to_string()).collect();
        // a, b and d co-occur in 4 records, enough for every pairing
        assert_eq!(rules, vec!["(a,b) -> d", "(a,d) -> b", "(b,d) -> a"]);
        assert!(search.rules.iter().all(|t| t.rule_count == 4));
    }

    #[test]
    fn no_groups_yield_nothing() {
        let ds = db(&[&["a", "b"] as &[&str]; 3]);
        let p = MiningParams::default();
        let set = mine_atomic(&ds, &p).unwrap();
        let search = mine_conjunctive(&set, &ds, &p).unwrap();
        assert!(search.rules.is_empty());
        assert_eq!(search.evaluated, 0);
    }

    #[test]
    fn stream_conjunctions_use_window_pairing() {
        // b and c both precede d within the window every time
        let ds = stream(&["b", "c", "d", "x", "x", "x", "b", "c", "d", "x", "x", "x"]);
        let p = params(3);
        let set = mine_atomic(&ds, &p).unwrap();
        assert!(set.contains(&Rule::atomic("b", "d")));
        assert!(set.contains(&Rule::atomic("c", "d")));
        let search = mine_conjunctive(&set, &ds, &p).unwrap();
        let rules: Vec<String> = search.rules.iter().map(|t| t.rule.to_string()).collect();
        assert!(rules.contains(&"(b,c) -> d".to_string()), "{rules:?}");
    }

    #[test]
    fn conjunctive_conclusions_unsupported() {
        let ds = db(&[&["a", "b"]]);
        let set = mine_atomic(&ds, &MiningParams::default()).unwrap();
        assert!(matches!(
            mine_conjunctive_conclusions(&set, &ds),
            Err(Error::Unsupported(_))
        ));
    }
}
