//! Two-process stream generator, rule categories and parameter sweeps.
//!
//! The generator mixes a common process emitting uniformly random symbols
//! with a rare process that emits a fixed chain of symbols separated by
//! random gaps. Chains never overlap and are spread uniformly over the
//! stream; every position not taken by a chain symbol carries a random
//! symbol.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brm::{mine_atomic, RuleSet};
use crate::error::{Error, Result};
use crate::model::{Dataset, Event, MiningParams, Rule, Symbol};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub v_random: Vec<Symbol>,
    /// Relative frequencies of `v_random`; empty means uniform.
    #[serde(default)]
    pub random_weights: Vec<u32>,
    pub chain: Vec<Symbol>,
    pub n_random: usize,
    pub n_chains: usize,
    /// Inclusive range of position offsets between consecutive chain symbols.
    pub gap_range: (usize, usize),
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            v_random: (0..4u32).map(Symbol::from).collect(),
            random_weights: Vec::new(),
            chain: (10..13u32).map(Symbol::from).collect(),
            n_random: 1000,
            n_chains: 20,
            gap_range: (1, 10),
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorConfig { seed, ..self.clone() }
    }

    /// Chain vocabulary, deduplicated, in chain order.
    pub fn v_chain(&self) -> Vec<Symbol> {
        let mut seen = HashSet::new();
        self.chain.iter().filter(|s| seen.insert(*s)).cloned().collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain.is_empty() {
            return Err(Error::param("chain", "must be non-empty"));
        }
        if self.n_random > 0 && self.v_random.is_empty() {
            return Err(Error::param("v_random", "must be non-empty when n_random > 0"));
        }
        if !self.random_weights.is_empty()
            && (self.random_weights.len() != self.v_random.len() || self.random_weights.iter().all(|&w| w == 0))
        {
            return Err(Error::param("random_weights", "need one weight per random symbol, not all zero"));
        }
        let (lo, hi) = self.gap_range;
        if lo == 0 || lo > hi {
            return Err(Error::param("gap_range", format!("[{lo}, {hi}] is not a range of positive offsets")));
        }
        let random: HashSet<&Symbol> = self.v_random.iter().collect();
        if self.chain.iter().any(|s| random.contains(s)) {
            return Err(Error::param("chain", "random and chain vocabularies must be disjoint"));
        }
        Ok(())
    }
}

/// Generates one stream; timestamps are sample indices.
pub fn generate_timeseries(cfg: &GeneratorConfig) -> Result<Dataset> {
    Dataset::timeseries(generate_events(cfg)?)
}

pub(crate) fn generate_events(cfg: &GeneratorConfig) -> Result<Vec<Event>> {
    cfg.validate()?;
    let mut rng = seed::rng(cfg.seed, &[]);
    let (lo, hi) = cfg.gap_range;
    let gaps: Vec<Vec<usize>> = (0..cfg.n_chains)
        .map(|_| (1..cfg.chain.len()).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    let inner: usize = gaps.iter().flatten().map(|g| g - 1).sum();
    if inner > cfg.n_random {
        return Err(Error::InfeasiblePacking(format!(
            "{} chains need {inner} random symbols between chain symbols, only {} available",
            cfg.n_chains, cfg.n_random
        )));
    }
    if cfg.n_random + cfg.n_chains == 0 {
        return Err(Error::EmptyDataset);
    }
    // place chain blocks among the free random symbols, uniformly over all
    // non-overlapping arrangements
    let free = cfg.n_random - inner;
    let slots = free + cfg.n_chains;
    let mut starts = index::sample(&mut rng, slots, cfg.n_chains).into_vec();
    starts.sort_unstable();

    let mut symbols: Vec<Symbol> = Vec::with_capacity(cfg.n_random + cfg.n_chains * cfg.chain.len());
    let weighted = (!cfg.random_weights.is_empty())
        .then(|| WeightedIndex::new(&cfg.random_weights).expect("validated weights"));
    let random = |rng: &mut rand_chacha::ChaCha8Rng| match &weighted {
        Some(w) => cfg.v_random[w.sample(rng)].clone(),
        None => cfg.v_random.choose(rng).expect("vocab").clone(),
    };
    let mut next_chain = 0;
    for slot in 0..slots {
        if next_chain < starts.len() && starts[next_chain] == slot {
            symbols.push(cfg.chain[0].clone());
            for (k, &g) in gaps[next_chain].iter().enumerate() {
                for _ in 1..g {
                    symbols.push(random(&mut rng));
                }
                symbols.push(cfg.chain[k + 1].clone());
            }
            next_chain += 1;
        } else {
            symbols.push(random(&mut rng));
        }
    }
    Ok(symbols
        .into_iter()
        .enumerate()
        .map(|(i, s)| Event::new(s, i as i64))
        .collect())
}

/// The five rule categories of the two-process benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleCategory {
    /// Both symbols from the random vocabulary.
    Random,
    /// Consecutive chain symbols, in chain order.
    Chain,
    /// Random premise, chain conclusion.
    RandomToChain,
    /// Chain premise, random conclusion.
    ChainToRandom,
    /// Chain-vocabulary pairs that are not consecutive chain steps.
    ChainVocabulary,
}

impl RuleCategory {
    pub const ALL: [RuleCategory; 5] = [
        RuleCategory::Random,
        RuleCategory::Chain,
        RuleCategory::RandomToChain,
        RuleCategory::ChainToRandom,
        RuleCategory::ChainVocabulary,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RuleCategory::Random => "r_r",
            RuleCategory::Chain => "r_c",
            RuleCategory::RandomToChain => "r_rc",
            RuleCategory::ChainToRandom => "r_cr",
            RuleCategory::ChainVocabulary => "r_cv",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Category of an atomic rule; `None` for rules outside the benchmark
/// vocabularies and for non-atomic rules.
pub fn categorize(rule: &Rule, cfg: &GeneratorConfig) -> Option<RuleCategory> {
    if !rule.is_atomic() {
        return None;
    }
    let (a, b) = (&rule.premise[0], &rule.conclusion[0]);
    let in_r = |s: &Symbol| cfg.v_random.contains(s);
    let in_c = |s: &Symbol| cfg.chain.contains(s);
    match (in_r(a), in_c(a), in_r(b), in_c(b)) {
        (true, _, true, _) => Some(RuleCategory::Random),
        (true, _, _, true) => Some(RuleCategory::RandomToChain),
        (_, true, true, _) => Some(RuleCategory::ChainToRandom),
        (_, true, _, true) => {
            let step = cfg.chain.windows(2).any(|w| &w[0] == a && &w[1] == b);
            Some(if step {
                RuleCategory::Chain
            } else {
                RuleCategory::ChainVocabulary
            })
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CategoryCounts {
    pub extracted: [u64; 5],
    pub denominators: [u64; 5],
    pub other: u64,
}

impl CategoryCounts {
    pub fn extracted(&self, c: RuleCategory) -> u64 {
        self.extracted[c.index()]
    }

    pub fn denominator(&self, c: RuleCategory) -> u64 {
        self.denominators[c.index()]
    }
}

/// Category sizes implied by the vocabularies.
pub fn category_denominators(cfg: &GeneratorConfig) -> [u64; 5] {
    let r = cfg.v_random.len() as u64;
    let c = cfg.v_chain().len() as u64;
    let steps: HashSet<(&Symbol, &Symbol)> = cfg.chain.windows(2).map(|w| (&w[0], &w[1])).collect();
    let steps = steps.len() as u64;
    [r * r, steps, r * c, r * c, c * c - steps]
}

pub fn categorize_rules<'a>(rules: impl IntoIterator<Item = &'a Rule>, cfg: &GeneratorConfig) -> CategoryCounts {
    let mut counts = CategoryCounts {
        denominators: category_denominators(cfg),
        ..Default::default()
    };
    for r in rules {
        match categorize(r, cfg) {
            Some(c) => counts.extracted[c.index()] += 1,
            None => counts.other += 1,
        }
    }
    counts
}

/// `100 · |A ∩ R| / |R|`; NaN for an empty category.
pub fn extraction_rate(counts: &CategoryCounts, category: RuleCategory) -> f64 {
    let d = counts.denominator(category);
    if d == 0 {
        return f64::NAN;
    }
    100.0 * counts.extracted(category) as f64 / d as f64
}

pub fn extraction_rates(counts: &CategoryCounts) -> [f64; 5] {
    RuleCategory::ALL.map(|c| extraction_rate(counts, c))
}

/// Mines one generated stream and returns its category counts.
pub fn run_once(cfg: &GeneratorConfig, params: &MiningParams) -> Result<(RuleSet, CategoryCounts)> {
    let ds = generate_timeseries(cfg)?;
    let set = mine_atomic(&ds, params)?;
    let counts = categorize_rules(set.rules().map(|t| &t.rule), cfg);
    Ok((set, counts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OwSweepRow {
    pub ow: usize,
    pub runs: usize,
    /// Mean extraction rate per category, in [`RuleCategory::ALL`] order.
    pub mean: [f64; 5],
    /// Smallest extraction rate over the runs.
    pub min: [f64; 5],
}

/// Extraction rates as a function of the observation window.
///
/// Run `i` at window `ow` mines a fresh stream seeded by
/// `(cfg.seed, ow, i)`; cells run in parallel and the result depends only
/// on the inputs.
pub fn ow_sweep(ows: &[usize], runs: usize, cfg: &GeneratorConfig, params: &MiningParams) -> Result<Vec<OwSweepRow>> {
    if runs == 0 {
        return Err(Error::param("runs", "must be at least 1"));
    }
    let cells: Vec<(usize, usize)> = ows.iter().flat_map(|&ow| (0..runs).map(move |i| (ow, i))).collect();
    let rates: Vec<[f64; 5]> = cells
        .par_iter()
        .map(|&(ow, i)| {
            let cell_cfg = cfg.with_seed(seed::derive_seed(cfg.seed, &[ow as u64, i as u64]));
            let (_, counts) = run_once(&cell_cfg, &params.clone().with_ow(ow))?;
            Ok(extraction_rates(&counts))
        })
        .collect::<Result<_>>()?;
    Ok(ows
        .iter()
        .zip(rates.chunks(runs))
        .map(|(&ow, chunk)| {
            let mut mean = [0.0; 5];
            let mut min = [f64::INFINITY; 5];
            for r in chunk {
                for k in 0..5 {
                    mean[k] += r[k] / runs as f64;
                    min[k] = min[k].min(r[k]);
                }
            }
            OwSweepRow { ow, runs, mean, min }
        })
        .collect())
}

pub fn ow_sweep_csv(rows: &[OwSweepRow]) -> String {
    let mut out = String::from("ow,runs");
    for prefix in ["mean", "min"] {
        for c in RuleCategory::ALL {
            let _ = write!(out, ",{prefix}_{}", c.label());
        }
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.ow, r.runs);
        for v in r.mean.iter().chain(&r.min) {
            let _ = write!(out, ",{v:.4}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectorRow {
    pub s: f64,
    pub rules: usize,
}

/// `n` equidistant samples of [0, 1], both ends included.
pub fn equidistant(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Number of extracted rules at each selector sample.
///
/// Mining counters do not depend on the selector, so the data is mined
/// once and the final rule set is re-evaluated per sample.
pub fn selector_sweep(samples: &[f64], dataset: &Dataset, params: &MiningParams) -> Result<Vec<SelectorRow>> {
    if let Some(s) = samples.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::param("selector", format!("{s} is outside [0, 1]")));
    }
    let base = mine_atomic(dataset, params)?;
    Ok(samples
        .par_iter()
        .map(|&s| SelectorRow {
            s,
            rules: base.reselect(s).len(),
        })
        .collect())
}

pub fn selector_sweep_csv(rows: &[SelectorRow]) -> String {
    let mut out = String::from("s,rules\n");
    for r in rows {
        let _ = writeln!(out, "{:.6},{}", r.s, r.rules);
    }
    out
}
