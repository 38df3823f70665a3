//! Bayesian rule mining.
//!
//! Rules `a -> b` are mined from a symbol stream (pairs inside a sliding
//! observation window) or from a transaction database (pairs inside a
//! record). A rule is kept while its belief, updated by Bayes' theorem at
//! every observation, does not decrease. That happens exactly when
//! `P(a|b) >= 0.5`, so rare but consistent associations survive where a
//! minimum-support threshold would drop them.
//!
//! ```
//! use brm::{mine_atomic, Dataset, MiningParams, Rule};
//!
//! let ds = Dataset::from_symbols(["a", "b", "x", "a", "b", "y"]).unwrap();
//! let set = mine_atomic(&ds, &MiningParams::default().with_ow(2)).unwrap();
//! assert!(set.contains(&Rule::atomic("a", "b")));
//! ```
//!
//! Modules:
//! - [`model`]: symbols, datasets, rules, belief arithmetic
//! - [`brm`]: atomic and conjunctive-premise mining
//! - [`frm`]: exhaustive frequent-rule baseline
//! - [`metrics`]: confidence, lift, Bayesian factor, filters, odds ratio
//! - [`graph`]: rule graphs, routines and entity exclusion
//! - [`synth`]: two-process benchmark generator and sweeps
//! - [`io`], [`cli`]: file formats and the `brm` command

pub mod brm;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod frm;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod model;
mod scan;
pub mod seed;
pub mod synth;

pub use brm::{mine_atomic, mine_conjunctive, RuleSet};
pub use error::{Error, Result};
pub use frm::mine_frm;
pub use graph::{build_graph, pep_sweep, Miner, Pipeline};
pub use metrics::{score_rule_set, Filter, ScoredRule};
pub use model::{Dataset, Event, MiningParams, Mode, Record, Rule, Symbol};
