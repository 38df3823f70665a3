//! Domain types and the closed-form belief math shared by the miners.
//!
//! Rule selection never depends on floating-point belief values: the
//! increasing-belief test reduces to an integer comparison on the rule and
//! conclusion counters (see [`passes_criterion`]). Beliefs are still carried
//! along for reporting.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Slack applied to the `s * (#b - #r)` product when deciding the criterion.
pub const CRITERION_EPSILON: f64 = 1e-12;

/// An opaque vocabulary token.
///
/// Symbols order "naturally": integer labels compare numerically and sort
/// before non-numeric labels, which compare as strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(token: impl AsRef<str>) -> Result<Self> {
        let token = token.as_ref();
        if token.is_empty() {
            return Err(Error::InvalidRecord("symbol must be non-empty".into()));
        }
        Ok(Symbol(Arc::from(token)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<i64> {
        self.0.parse().ok()
    }
}

impl From<u32> for Symbol {
    fn from(v: u32) -> Self {
        Symbol(Arc::from(v.to_string()))
    }
}

impl From<&str> for Symbol {
    /// Panics on an empty token; use [`Symbol::new`] for untrusted input.
    fn from(s: &str) -> Self {
        Symbol::new(s).expect("empty symbol")
    }
}

impl From<String> for Symbol {
    /// Panics on an empty token; use [`Symbol::new`] for untrusted input.
    fn from(s: String) -> Self {
        Symbol::new(s).expect("empty symbol")
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Symbol::new(s).map_err(serde::de::Error::custom)
    }
}

/// Identifier of the entity (patient, user, device) that produced data.
pub type Entity = Arc<str>;

/// One element of a timestamped symbol stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub symbol: Symbol,
    pub t: i64,
    pub entity: Option<Entity>,
}

impl Event {
    pub fn new(symbol: impl Into<Symbol>, t: i64) -> Self {
        Event {
            symbol: symbol.into(),
            t,
            entity: None,
        }
    }

    pub fn with_entity(mut self, entity: &str) -> Self {
        self.entity = Some(Arc::from(entity));
        self
    }
}

/// One database row: a non-empty set of distinct symbols, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    symbols: Vec<Symbol>,
    pub entity: Option<Entity>,
}

impl Record {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Symbol>,
    {
        let mut symbols: Vec<Symbol> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidRecord("record must be non-empty".into()));
        }
        symbols.sort();
        if let Some(w) = symbols.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidRecord(format!("duplicate symbol {}", w[0])));
        }
        Ok(Record {
            symbols,
            entity: None,
        })
    }

    pub fn with_entity(mut self, entity: &str) -> Self {
        self.entity = Some(Arc::from(entity));
        self
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.symbols.binary_search(symbol).is_ok()
    }
}

/// Mining input: a timestamped stream or a list of records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dataset {
    Timeseries(Vec<Event>),
    Database(Vec<Record>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Timeseries,
    Database,
}

impl Dataset {
    /// Builds a stream, checking that timestamps are non-decreasing.
    pub fn timeseries(events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if events.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(Error::InvalidRecord("timestamps must be non-decreasing".into()));
        }
        Ok(Dataset::Timeseries(events))
    }

    pub fn database(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset::Database(records))
    }

    /// Convenience for a stream sampled at consecutive integer timestamps.
    pub fn from_symbols<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Symbol>,
    {
        let events = symbols
            .into_iter()
            .enumerate()
            .map(|(i, s)| Event::new(s, i as i64))
            .collect();
        Dataset::timeseries(events)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Dataset::Timeseries(_) => Mode::Timeseries,
            Dataset::Database(_) => Mode::Database,
        }
    }

    /// `|D|`: number of events or records.
    pub fn len(&self) -> usize {
        match self {
            Dataset::Timeseries(e) => e.len(),
            Dataset::Database(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn events(&self) -> Option<&[Event]> {
        match self {
            Dataset::Timeseries(e) => Some(e),
            Dataset::Database(_) => None,
        }
    }

    pub fn records(&self) -> Option<&[Record]> {
        match self {
            Dataset::Database(r) => Some(r),
            Dataset::Timeseries(_) => None,
        }
    }

    /// Distinct entity tags in first-appearance order.
    pub fn entities(&self) -> Vec<Entity> {
        let tags: Box<dyn Iterator<Item = Option<&Entity>>> = match self {
            Dataset::Timeseries(e) => Box::new(e.iter().map(|e| e.entity.as_ref())),
            Dataset::Database(r) => Box::new(r.iter().map(|r| r.entity.as_ref())),
        };
        let mut seen = Vec::new();
        for tag in tags.flatten() {
            if !seen.contains(tag) {
                seen.push(tag.clone());
            }
        }
        seen
    }

    /// Copy of the dataset with every element tagged `entity` removed.
    /// Returns `None` when nothing would remain.
    pub fn without_entity(&self, entity: &str) -> Option<Dataset> {
        let keep = |tag: &Option<Entity>| tag.as_deref() != Some(entity);
        let out = match self {
            Dataset::Timeseries(e) => {
                Dataset::Timeseries(e.iter().filter(|e| keep(&e.entity)).cloned().collect())
            }
            Dataset::Database(r) => {
                Dataset::Database(r.iter().filter(|r| keep(&r.entity)).cloned().collect())
            }
        };
        (!out.is_empty()).then_some(out)
    }
}

/// A directed association `premise -> conclusion`.
///
/// Both sides are non-empty, sorted and disjoint. Atomic rules have one
/// symbol on each side. Self-loops `x -> x` are allowed for atomic rules
/// mined from a stream, where premise and conclusion are distinct
/// occurrences of the same symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rule {
    pub premise: Vec<Symbol>,
    pub conclusion: Vec<Symbol>,
}

impl Rule {
    pub fn atomic(premise: impl Into<Symbol>, conclusion: impl Into<Symbol>) -> Self {
        Rule {
            premise: vec![premise.into()],
            conclusion: vec![conclusion.into()],
        }
    }

    pub fn new(premise: Vec<Symbol>, conclusion: Vec<Symbol>) -> Result<Self> {
        let canon = |mut v: Vec<Symbol>| {
            v.sort();
            v.dedup();
            v
        };
        let (premise, conclusion) = (canon(premise), canon(conclusion));
        if premise.is_empty() || conclusion.is_empty() {
            return Err(Error::InvalidRule("premise and conclusion must be non-empty".into()));
        }
        let atomic = premise.len() == 1 && conclusion.len() == 1;
        if !atomic && premise.iter().any(|s| conclusion.contains(s)) {
            return Err(Error::InvalidRule("premise and conclusion must be disjoint".into()));
        }
        Ok(Rule {
            premise,
            conclusion,
        })
    }

    pub fn is_atomic(&self) -> bool {
        self.premise.len() == 1 && self.conclusion.len() == 1
    }

    pub fn is_self_loop(&self) -> bool {
        self.is_atomic() && self.premise[0] == self.conclusion[0]
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Symbol]| v.iter().map(Symbol::as_str).collect::<Vec<_>>().join(",");
        if self.premise.len() == 1 {
            write!(f, "{}", self.premise[0])?;
        } else {
            write!(f, "({})", join(&self.premise))?;
        }
        write!(f, " -> ")?;
        if self.conclusion.len() == 1 {
            write!(f, "{}", self.conclusion[0])
        } else {
            write!(f, "({})", join(&self.conclusion))
        }
    }
}

/// Per-rule counters and belief state.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTracker {
    pub rule: Rule,
    /// `#r`: number of rule observations.
    pub rule_count: u64,
    /// `#b` at the most recent evaluation.
    pub conclusion_count: u64,
    pub belief: f64,
    pub in_set: bool,
    /// Highest stream position of a conclusion occurrence already paired
    /// with this rule. Occurrences are paired in increasing order, so this
    /// high-water mark identifies the paired set exactly.
    pub last_paired: Option<usize>,
}

impl RuleTracker {
    pub fn new(rule: Rule, prior: f64) -> Self {
        RuleTracker {
            rule,
            rule_count: 0,
            conclusion_count: 0,
            belief: prior,
            in_set: false,
            last_paired: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    /// Prior `p`, in the open interval (0, 1).
    pub prior: f64,
    /// Selector `s` in [0, 1]; 1 is the plain criterion, 0 accepts all.
    pub selector: f64,
    /// Observation window length in symbols (timeseries mode only).
    pub ow: Option<usize>,
    pub confidence_threshold: f64,
    pub bayes_factor_threshold: f64,
    /// Minimum support for the frequent-rule baseline.
    pub minsup: f64,
    pub seed: u64,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            prior: 0.5,
            selector: 1.0,
            ow: None,
            confidence_threshold: 0.5,
            bayes_factor_threshold: 1.0,
            minsup: 0.1,
            seed: 0,
        }
    }
}

impl MiningParams {
    pub fn with_ow(mut self, ow: usize) -> Self {
        self.ow = Some(ow);
        self
    }

    pub fn with_selector(mut self, s: f64) -> Self {
        self.selector = s;
        self
    }

    pub fn with_prior(mut self, p: f64) -> Self {
        self.prior = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::param(
                "prior",
                format!("{} is outside (0, 1); 0 and 1 saturate every belief", self.prior),
            ));
        }
        if !(0.0..=1.0).contains(&self.selector) {
            return Err(Error::param("selector", format!("{} is outside [0, 1]", self.selector)));
        }
        if let Some(ow) = self.ow {
            if ow < 2 {
                return Err(Error::param("ow", format!("{ow} is smaller than 2")));
            }
        }
        if !(self.minsup > 0.0 && self.minsup <= 1.0) {
            return Err(Error::param("minsup", format!("{} is outside (0, 1]", self.minsup)));
        }
        Ok(())
    }
}

/// One recursive Bayes step: `P·B / (P·B + (1-P)(1-B))`.
///
/// A saturated belief (0 or 1) is absorbing. `P = 0.5` leaves the belief
/// unchanged exactly.
pub fn belief_update(prev: f64, p_ab: f64) -> f64 {
    if prev == 0.0 || prev == 1.0 || p_ab == 0.5 {
        return prev;
    }
    let num = p_ab * prev;
    let den = num + (1.0 - p_ab) * (1.0 - prev);
    if den == 0.0 {
        return prev;
    }
    (num / den).clamp(0.0, 1.0)
}

fn check_counts(rule_count: u64, conclusion_count: u64) -> Result<()> {
    if rule_count == 0 {
        return Err(Error::NeverObserved);
    }
    if rule_count > conclusion_count {
        return Err(Error::InvalidRule(format!(
            "rule count {rule_count} exceeds conclusion count {conclusion_count}"
        )));
    }
    Ok(())
}

/// `P(a|b) = #r / (s·(#b − #r) + #r)`.
pub fn estimate_p_ab(rule_count: u64, conclusion_count: u64, selector: f64) -> Result<f64> {
    check_counts(rule_count, conclusion_count)?;
    let r = rule_count as f64;
    let unassociated = (conclusion_count - rule_count) as f64;
    Ok(r / (selector * unassociated + r))
}

/// Increasing-belief test in its counter form, `#r ≥ s·(#b − #r)`.
///
/// Equivalent to `estimate_p_ab(..) ≥ 0.5` and independent of the prior.
pub fn passes_criterion(rule_count: u64, conclusion_count: u64, selector: f64) -> Result<bool> {
    check_counts(rule_count, conclusion_count)?;
    Ok(passes_unchecked(rule_count, conclusion_count, selector))
}

pub(crate) fn passes_unchecked(rule_count: u64, conclusion_count: u64, selector: f64) -> bool {
    let unassociated = conclusion_count.saturating_sub(rule_count) as f64;
    rule_count as f64 >= selector * unassociated - CRITERION_EPSILON
}

/// Largest selector at which the rule still passes, capped at 1.
pub fn min_selector(rule_count: u64, conclusion_count: u64) -> Result<f64> {
    check_counts(rule_count, conclusion_count)?;
    if rule_count == conclusion_count {
        return Ok(1.0);
    }
    let ratio = rule_count as f64 / (conclusion_count - rule_count) as f64;
    Ok(ratio.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    /// The rule was observed (its conclusion occurred, paired with the premise).
    RuleSeen,
    /// The conclusion occurred without the premise.
    ConclusionOnlySeen,
}

/// Literal evaluation of the recursive belief over an observation sequence.
///
/// Returns the belief after every `RuleSeen`, using `P(a|b)_k = k / #b_k`.
pub fn belief_trace(observations: &[Observation], prior: f64) -> Vec<f64> {
    let mut k = 0u64;
    let mut b = 0u64;
    let mut belief = prior;
    let mut trace = Vec::new();
    for obs in observations {
        b += 1;
        if *obs == Observation::RuleSeen {
            k += 1;
            belief = belief_update(belief, k as f64 / b as f64);
            trace.push(belief);
        }
    }
    trace
}

/// Belief after `k` rule observations, assuming all `u` unassociated
/// conclusions came first. `P_i = i / (s·u + i)`.
pub fn replay_belief(rule_count: u64, unassociated: u64, selector: f64, prior: f64) -> f64 {
    let u = selector * unassociated as f64;
    (1..=rule_count).fold(prior, |b, i| {
        let i = i as f64;
        belief_update(b, i / (u + i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Observation::*;

    #[test]
    fn belief_update_examples() {
        assert_eq!(belief_update(0.5, 0.5), 0.5);
        assert_eq!(belief_update(0.3, 1.0), 1.0);
        assert!((belief_update(0.3, 0.6) - 0.18 / 0.46).abs() < 1e-15);
        assert!((belief_update(0.3, 0.6) - 0.391_304_347_8).abs() < 1e-9);
    }

    #[test]
    fn belief_update_saturates() {
        for p in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert_eq!(belief_update(1.0, p), 1.0);
            assert_eq!(belief_update(0.0, p), 0.0);
        }
    }

    #[test]
    fn p_ab_examples() {
        assert_eq!(estimate_p_ab(5, 10, 1.0).unwrap(), 0.5);
        assert_eq!(estimate_p_ab(1, 1, 1.0).unwrap(), 1.0);
        assert_eq!(estimate_p_ab(3, 10, 0.0).unwrap(), 1.0);
        // 436 / (0.769 * 564 + 436) and 436 / (0.78 * 564 + 436)
        let lo = estimate_p_ab(436, 1000, 0.769).unwrap();
        let hi = estimate_p_ab(436, 1000, 0.78).unwrap();
        assert!((lo - 0.501_313).abs() < 1e-5, "{lo}");
        assert!((hi - 0.497_762).abs() < 1e-5, "{hi}");
        assert!(passes_criterion(436, 1000, 0.769).unwrap());
        assert!(!passes_criterion(436, 1000, 0.78).unwrap());
    }

    #[test]
    fn never_observed_is_an_error() {
        assert!(matches!(estimate_p_ab(0, 4, 1.0), Err(Error::NeverObserved)));
        assert!(matches!(passes_criterion(0, 4, 1.0), Err(Error::NeverObserved)));
        assert!(matches!(min_selector(0, 4), Err(Error::NeverObserved)));
        assert!(estimate_p_ab(5, 4, 1.0).is_err());
    }

    #[test]
    fn criterion_examples() {
        assert!(passes_criterion(578, 1000, 1.0).unwrap());
        assert!(!passes_criterion(4, 10, 1.0).unwrap());
        assert!(passes_criterion(4, 10, 0.6).unwrap());
        assert!(passes_criterion(5, 10, 1.0).unwrap());
    }

    #[test]
    fn min_selector_examples() {
        assert_eq!(min_selector(5, 10).unwrap(), 1.0);
        assert!((min_selector(436, 1000).unwrap() - 436.0 / 564.0).abs() < 1e-12);
        assert!((min_selector(436, 1000).unwrap() - 0.773).abs() < 1e-3);
        assert_eq!(min_selector(10, 10).unwrap(), 1.0);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(belief_trace(&[RuleSeen], 0.5), vec![1.0]);
        assert_eq!(belief_trace(&[ConclusionOnlySeen, RuleSeen], 0.5), vec![0.5]);
        let obs = [RuleSeen, ConclusionOnlySeen, ConclusionOnlySeen, ConclusionOnlySeen];
        assert_eq!(belief_trace(&obs, 0.5), vec![1.0]);
        // the counters at the end of the sequence fail the criterion
        assert!(!passes_criterion(1, 4, 1.0).unwrap());
    }

    #[test]
    fn replay_examples() {
        assert_eq!(replay_belief(1, 0, 1.0, 0.5), 1.0);
        assert_eq!(replay_belief(1, 1, 1.0, 0.5), 0.5);
        // P_1 = 1/2 keeps 0.5, P_2 = 2/3 gives (2/3 * 0.5) / (2/3 * 0.5 + 1/3 * 0.5)
        assert!((replay_belief(2, 1, 1.0, 0.5) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(MiningParams::default().validate().is_ok());
        for p in [0.0, 1.0, -0.1] {
            assert!(MiningParams::default().with_prior(p).validate().is_err());
        }
        assert!(MiningParams::default().with_selector(1.1).validate().is_err());
        assert!(MiningParams::default().with_ow(1).validate().is_err());
    }

    #[test]
    fn records_reject_duplicates_and_empties() {
        assert!(Record::new(["a", "b", "a"]).is_err());
        assert!(Record::new(Vec::<Symbol>::new()).is_err());
        let r = Record::new(["b", "a"]).unwrap();
        assert_eq!(r.symbols(), &[Symbol::from("a"), Symbol::from("b")]);
    }

    #[test]
    fn symbols_sort_naturally() {
        let mut v: Vec<Symbol> = ["10", "b", "2", "a", "0"].into_iter().map(Symbol::from).collect();
        v.sort();
        let s: Vec<&str> = v.iter().map(Symbol::as_str).collect();
        assert_eq!(s, ["0", "2", "10", "a", "b"]);
    }

    #[test]
    fn rules_validate() {
        assert!(Rule::new(vec!["a".into(), "b".into()], vec!["b".into()]).is_err());
        assert!(Rule::new(vec![], vec!["b".into()]).is_err());
        let r = Rule::new(vec!["b".into(), "a".into()], vec!["c".into()]).unwrap();
        assert_eq!(r.to_string(), "(a,b) -> c");
        assert!(Rule::atomic("x", "x").is_self_loop());
    }

    #[test]
    fn unsorted_stream_rejected() {
        let ev = vec![Event::new("a", 2), Event::new("b", 1)];
        assert!(Dataset::timeseries(ev).is_err());
        assert!(matches!(Dataset::timeseries(vec![]), Err(Error::EmptyDataset)));
    }
}
