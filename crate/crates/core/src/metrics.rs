//! Rule interest metrics, rule filters and odds-ratio evaluation.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::brm::{ConjunctiveSearch, RuleSet};
use crate::error::{Error, Result};
use crate::model::{min_selector, Dataset, Record, Rule, Symbol};
use crate::seed;

/// A rule with its counters and interest metrics.
///
/// Fields are declared in alphabetical order so serialized objects have
/// sorted keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRule {
    /// `#r / #(a -> b')`; infinite when no competing rule shares the premise.
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub bayes_factor: f64,
    /// Absent for rules that did not come from the belief miner.
    pub belief: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci95: Option<(f64, f64)>,
    pub conclusion: Vec<Symbol>,
    pub conclusion_count: u64,
    pub confidence: f64,
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub lift: f64,
    pub min_selector: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odds_ratio: Option<f64>,
    pub premise: Vec<Symbol>,
    pub premise_count: u64,
    pub rule_count: u64,
    pub support: f64,
}

fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }
    match Num::deserialize(d)? {
        Num::F(v) => Ok(v),
        Num::S(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
        },
    }
}

impl ScoredRule {
    pub fn rule(&self) -> Rule {
        Rule {
            premise: self.premise.clone(),
            conclusion: self.conclusion.clone(),
        }
    }

    /// Builds the counter-derived metrics; the Bayesian factor is filled in
    /// later against the whole set (see [`assign_bayes_factors`]).
    pub fn from_counts(
        rule: &Rule,
        rule_count: u64,
        premise_count: u64,
        conclusion_count: u64,
        dataset_size: usize,
    ) -> Self {
        let n = dataset_size.max(1) as f64;
        let confidence = if premise_count > 0 {
            rule_count as f64 / premise_count as f64
        } else {
            0.0
        };
        let conclusion_support = conclusion_count as f64 / n;
        ScoredRule {
            bayes_factor: f64::INFINITY,
            belief: None,
            ci95: None,
            conclusion: rule.conclusion.clone(),
            conclusion_count,
            confidence,
            lift: if conclusion_count > 0 {
                confidence / conclusion_support
            } else {
                f64::NAN
            },
            min_selector: min_selector(rule_count, conclusion_count).unwrap_or(f64::NAN),
            odds_ratio: None,
            premise: rule.premise.clone(),
            premise_count,
            rule_count,
            support: rule_count as f64 / n,
        }
    }
}

/// Sorts rules canonically by premise then conclusion.
pub fn sort_canonical(rules: &mut [ScoredRule]) {
    rules.sort_by(|a, b| (&a.premise, &a.conclusion).cmp(&(&b.premise, &b.conclusion)));
}

/// `Confidence = #r / #a`.
pub fn confidence(rule_count: u64, premise_count: u64) -> Result<f64> {
    if premise_count == 0 {
        return Err(Error::ZeroPremiseCount);
    }
    Ok(rule_count as f64 / premise_count as f64)
}

/// `#r` over the summed counts of competing rules with the same premise.
pub fn bayes_factor(rule_count: u64, competing_count: u64) -> f64 {
    if competing_count == 0 {
        f64::INFINITY
    } else {
        rule_count as f64 / competing_count as f64
    }
}

/// Fills `bayes_factor` of every rule relative to the rules in `rules`.
pub fn assign_bayes_factors(rules: &mut [ScoredRule]) {
    let mut totals: HashMap<Vec<Symbol>, u64> = HashMap::new();
    for r in rules.iter() {
        *totals.entry(r.premise.clone()).or_default() += r.rule_count;
    }
    for r in rules.iter_mut() {
        let competing = totals[&r.premise] - r.rule_count;
        r.bayes_factor = bayes_factor(r.rule_count, competing);
    }
}

/// Bayesian factor of `rule` against the in-set rules of `set`.
pub fn bayes_factor_in(set: &RuleSet, rule: &Rule) -> Option<f64> {
    let own = set.get(rule).filter(|t| t.in_set)?.rule_count;
    let competing: u64 = set
        .rules()
        .filter(|t| t.rule.premise == rule.premise && t.rule.conclusion != rule.conclusion)
        .map(|t| t.rule_count)
        .sum();
    Some(bayes_factor(own, competing))
}

/// Scores every in-set rule of a mined atomic rule set.
pub fn score_rule_set(set: &RuleSet) -> Vec<ScoredRule> {
    let mut out: Vec<ScoredRule> = set
        .rules()
        .map(|t| {
            let premise_count = set.symbol_count(&t.rule.premise[0]);
            let mut sr = ScoredRule::from_counts(
                &t.rule,
                t.rule_count,
                premise_count,
                t.conclusion_count,
                set.dataset_size(),
            );
            sr.belief = Some(t.belief);
            sr
        })
        .collect();
    assign_bayes_factors(&mut out);
    sort_canonical(&mut out);
    out
}

/// Scores conjunctive-premise rules.
///
/// In a database the premise count is the number of records holding every
/// premise symbol. A stream has no joint premise occurrence, so the
/// smallest premise symbol count is used; confidence is then a lower bound.
pub fn score_conjunctive(search: &ConjunctiveSearch, atomic: &RuleSet, dataset: &Dataset) -> Vec<ScoredRule> {
    let mut out: Vec<ScoredRule> = search
        .rules
        .iter()
        .map(|t| {
            let premise_count = match dataset.records() {
                Some(records) => records
                    .iter()
                    .filter(|r| t.rule.premise.iter().all(|s| r.contains(s)))
                    .count() as u64,
                None => t.rule.premise.iter().map(|s| atomic.symbol_count(s)).min().unwrap_or(0),
            };
            let mut sr = ScoredRule::from_counts(
                &t.rule,
                t.rule_count,
                premise_count,
                t.conclusion_count,
                dataset.len(),
            );
            sr.belief = Some(t.belief);
            sr
        })
        .collect();
    assign_bayes_factors(&mut out);
    sort_canonical(&mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "kebab-case")]
pub enum Filter {
    Confidence(f64),
    BayesFactor(f64),
    BestConfidence,
}

impl Filter {
    pub fn apply(&self, rules: &[ScoredRule]) -> Vec<ScoredRule> {
        match *self {
            Filter::Confidence(t) => filter_confidence(rules, t),
            Filter::BayesFactor(t) => filter_bayes_factor(rules, t),
            Filter::BestConfidence => filter_best_confidence_per_conclusion(rules),
        }
    }
}

pub fn filter_confidence(rules: &[ScoredRule], threshold: f64) -> Vec<ScoredRule> {
    rules.iter().filter(|r| r.confidence >= threshold).cloned().collect()
}

/// Infinite factors pass any finite threshold.
pub fn filter_bayes_factor(rules: &[ScoredRule], threshold: f64) -> Vec<ScoredRule> {
    rules.iter().filter(|r| r.bayes_factor >= threshold).cloned().collect()
}

/// Keeps, per conclusion, the rule(s) of highest confidence. Ties are all kept.
pub fn filter_best_confidence_per_conclusion(rules: &[ScoredRule]) -> Vec<ScoredRule> {
    let mut best: BTreeMap<&[Symbol], f64> = BTreeMap::new();
    for r in rules {
        let e = best.entry(&r.conclusion).or_insert(f64::NEG_INFINITY);
        if r.confidence > *e {
            *e = r.confidence;
        }
    }
    rules
        .iter()
        .filter(|r| r.confidence == best[r.conclusion.as_slice()])
        .cloned()
        .collect()
}

/// 2×2 table of premise/conclusion presence over records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Contingency {
    /// premise and conclusion
    pub n11: u64,
    /// premise without conclusion
    pub n10: u64,
    /// conclusion without premise
    pub n01: u64,
    pub n00: u64,
}

impl Contingency {
    pub fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Self {
        Contingency { n11, n10, n01, n00 }
    }

    fn cell(rule: &Rule, record: &Record) -> usize {
        let a = rule.premise.iter().all(|s| record.contains(s));
        let b = rule.conclusion.iter().all(|s| record.contains(s));
        match (a, b) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    }

    pub fn of(rule: &Rule, records: &[Record]) -> Self {
        let mut c = [0u64; 4];
        for r in records {
            c[Self::cell(rule, r)] += 1;
        }
        Contingency::new(c[0], c[1], c[2], c[3])
    }

    /// `(n11·n00) / (n10·n01)`, with 0.5 added to every cell when any cell is zero.
    pub fn odds_ratio(&self) -> f64 {
        let cells = [self.n11, self.n10, self.n01, self.n00].map(|c| c as f64);
        let [a, b, c, d] = if cells.contains(&0.0) {
            cells.map(|x| x + 0.5)
        } else {
            cells
        };
        (a * d) / (b * c)
    }
}

fn records_of(dataset: &Dataset) -> Result<&[Record]> {
    dataset.records().ok_or(Error::WrongMode { expected: "database" })
}

pub fn odds_ratio(rule: &Rule, dataset: &Dataset) -> Result<f64> {
    Ok(Contingency::of(rule, records_of(dataset)?).odds_ratio())
}

/// Percentile bootstrap interval of the odds ratio, resampling records with
/// replacement.
///
/// Iteration `i` draws from its own generator seeded by `(seed, i)`, so the
/// result is bit-exact for a given seed regardless of thread count. The
/// interval is widened if needed to contain the point estimate.
pub fn bootstrap_ci(
    rule: &Rule,
    dataset: &Dataset,
    iterations: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if iterations == 0 {
        return Err(Error::param("iterations", "must be at least 1"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("{level} is outside (0, 1)")));
    }
    let records = records_of(dataset)?;
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cells: Vec<usize> = records.iter().map(|r| Contingency::cell(rule, r)).collect();
    let point = {
        let mut c = [0u64; 4];
        cells.iter().for_each(|&i| c[i] += 1);
        Contingency::new(c[0], c[1], c[2], c[3]).odds_ratio()
    };
    let mut samples: Vec<f64> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed, &[i as u64]);
            let mut c = [0u64; 4];
            for _ in 0..cells.len() {
                c[cells[rng.gen_range(0..cells.len())]] += 1;
            }
            Contingency::new(c[0], c[1], c[2], c[3]).odds_ratio()
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let lo = percentile(&samples, tail).min(point);
    let hi = percentile(&samples, 1.0 - tail).max(point);
    Ok((lo, hi))
}

/// Linear-interpolated quantile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}
