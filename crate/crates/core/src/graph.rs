//! Rule graphs, routines (weakly connected components), DOT export and the
//! entity-exclusion analysis.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::brm::mine_atomic;
use crate::error::{Error, Result};
use crate::frm::mine_frm;
use crate::metrics::{score_rule_set, Filter, ScoredRule};
use crate::model::{Dataset, MiningParams, Symbol};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: Symbol,
    pub to: Symbol,
    pub rule: ScoredRule,
}

/// Directed multigraph over the symbols of a rule set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoutineGraph {
    pub nodes: BTreeSet<Symbol>,
    pub edges: Vec<Edge>,
}

/// One edge per rule; a conjunctive rule contributes one edge per
/// premise/conclusion symbol pair.
pub fn build_graph(rules: &[ScoredRule]) -> RoutineGraph {
    let mut g = RoutineGraph::default();
    for r in rules {
        for from in &r.premise {
            for to in &r.conclusion {
                g.nodes.insert(from.clone());
                g.nodes.insert(to.clone());
                g.edges.push(Edge {
                    from: from.clone(),
                    to: to.clone(),
                    rule: r.clone(),
                });
            }
        }
    }
    g.edges.sort_by(|a, b| {
        (&a.from, &a.to, &a.rule.premise, &a.rule.conclusion)
            .cmp(&(&b.from, &b.to, &b.rule.premise, &b.rule.conclusion))
    });
    g
}

impl RoutineGraph {
    /// Weakly connected components, largest first, ties broken by smallest node.
    pub fn components(&self) -> Vec<BTreeSet<Symbol>> {
        let index: HashMap<&Symbol, usize> = self.nodes.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, index[&e.from]), find(&mut parent, index[&e.to]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<Symbol>> = BTreeMap::new();
        for (i, s) in self.nodes.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().insert(s.clone());
        }
        let mut comps: Vec<BTreeSet<Symbol>> = groups.into_values().collect();
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.first().cmp(&b.first())));
        comps
    }

    /// Graphviz rendering with stable node and edge order. Edge labels carry
    /// the rule confidence to three decimals.
    pub fn to_dot(&self) -> String {
        let quote = |s: &Symbol| format!("\"{}\"", s.as_str().replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph routines {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  {};", quote(n));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{:.3}\"];",
                quote(&e.from),
                quote(&e.to),
                e.rule.confidence
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Convenience: components of the graph built from `rules`.
pub fn components(rules: &[ScoredRule]) -> Vec<BTreeSet<Symbol>> {
    build_graph(rules).components()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "miner", rename_all = "lowercase")]
pub enum Miner {
    Brm(MiningParams),
    Frm { minsup: f64, ow: Option<usize> },
}

/// Mining followed by an optional filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pipeline {
    pub miner: Miner,
    pub filter: Option<Filter>,
}

impl Pipeline {
    pub fn rules(&self, dataset: &Dataset) -> Result<Vec<ScoredRule>> {
        let mined = match &self.miner {
            Miner::Brm(p) => score_rule_set(&mine_atomic(dataset, p)?),
            Miner::Frm { minsup, ow } => mine_frm(dataset, *minsup, *ow)?.rules,
        };
        Ok(match &self.filter {
            Some(f) => f.apply(&mined),
            None => mined,
        })
    }

    pub fn routines(&self, dataset: &Dataset) -> Result<Vec<BTreeSet<Symbol>>> {
        Ok(components(&self.rules(dataset)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityClass {
    /// Removing the entity changes the routines.
    ActiveLike,
    SedentaryLike,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityOutcome {
    pub components: usize,
    /// Baseline routines whose exact symbol set no longer appears.
    pub missing_components: Vec<BTreeSet<Symbol>>,
    pub changed: bool,
    pub class: EntityClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PepReport {
    pub baseline_components: usize,
    pub baseline: Vec<BTreeSet<Symbol>>,
    pub per_entity: BTreeMap<String, EntityOutcome>,
}

impl PepReport {
    pub fn changed_entities(&self) -> Vec<&str> {
        self.per_entity
            .iter()
            .filter(|(_, o)| o.changed)
            .map(|(e, _)| e.as_str())
            .collect()
    }
}

/// Entity exclusion: runs the pipeline on all data, then once per entity
/// with that entity's data removed, and flags entities whose removal
/// changes the routine structure (component count, or a baseline routine
/// disappearing).
pub fn pep_sweep(dataset: &Dataset, pipeline: &Pipeline) -> Result<PepReport> {
    check_tagged(dataset)?;
    let entities = dataset.entities();
    if entities.len() < 2 {
        return Err(Error::SingleEntity(entities.len()));
    }
    let baseline = pipeline.routines(dataset)?;
    let outcomes: Vec<(String, EntityOutcome)> = entities
        .par_iter()
        .map(|e| {
            let rest = dataset.without_entity(e).ok_or(Error::EmptyDataset)?;
            let comps = pipeline.routines(&rest)?;
            let missing: Vec<BTreeSet<Symbol>> =
                baseline.iter().filter(|b| !comps.contains(b)).cloned().collect();
            let changed = comps.len() != baseline.len() || !missing.is_empty();
            Ok((
                e.to_string(),
                EntityOutcome {
                    components: comps.len(),
                    missing_components: missing,
                    changed,
                    class: if changed {
                        EntityClass::ActiveLike
                    } else {
                        EntityClass::SedentaryLike
                    },
                },
            ))
        })
        .collect::<Result<_>>()?;
    Ok(PepReport {
        baseline_components: baseline.len(),
        baseline,
        per_entity: outcomes.into_iter().collect(),
    })
}

fn check_tagged(dataset: &Dataset) -> Result<()> {
    let missing = match dataset {
        Dataset::Timeseries(e) => e.iter().position(|e| e.entity.is_none()).map(|i| ("event", i)),
        Dataset::Database(r) => r.iter().position(|r| r.entity.is_none()).map(|i| ("record", i)),
    };
    match missing {
        Some((what, i)) => Err(Error::MissingEntity { what, line: i + 1 }),
        None => Ok(()),
    }
}
