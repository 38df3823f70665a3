//! Command-line front end: one binary, one subcommand per operation.
//!
//! Shared options can also come from a flat TOML file given with
//! `--config`; flags on the command line win.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::brm::{mine_atomic, mine_conjunctive};
use crate::error::{Error, Result};
use crate::frm::{mine_frm, minsup_for_rule_count};
use crate::graph::{build_graph, pep_sweep, Miner, Pipeline};
use crate::io;
use crate::metrics::{bootstrap_ci, score_conjunctive, score_rule_set, Contingency, Filter, ScoredRule};
use crate::model::{MiningParams, Mode, Rule, Symbol};
use crate::synth::{equidistant, generate_timeseries, ow_sweep, ow_sweep_csv, selector_sweep, selector_sweep_csv, GeneratorConfig};

#[derive(Debug, Parser)]
#[command(name = "brm", version, about = "Bayesian rule mining for streams and transaction databases")]
pub struct Cli {
    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Report errors as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    /// Flat TOML file with defaults for the shared options.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by several subcommands.
#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Opts {
    /// Input layout [default: timeseries].
    #[arg(long, global = true, value_parser = ["timeseries", "database"])]
    pub mode: Option<String>,
    /// Prior belief in every candidate rule, in (0, 1) [default: 0.5].
    #[arg(long, global = true)]
    pub prior: Option<f64>,
    /// Weight of unassociated conclusions, in [0, 1] [default: 1].
    #[arg(long, global = true)]
    pub selector: Option<f64>,
    /// Observation window in events; required for streams.
    #[arg(long, global = true)]
    pub ow: Option<usize>,
    /// Minimum support for frequent mining [default: 0.1].
    #[arg(long, global = true)]
    pub minsup: Option<f64>,
    /// Rule filter applied after mining.
    #[arg(long, global = true, value_parser = ["confidence", "bayes-factor", "best-confidence"])]
    pub filter: Option<String>,
    /// Filter threshold [default: 0.5 for confidence, 1 for bayes-factor].
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Random seed [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Generator runs per sweep cell [default: 10].
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Output file; stdout when absent or `-`.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine atomic rules with the increasing-belief criterion.
    MineBrm(Input),
    /// Mine frequent rules above `--minsup`.
    MineFrm(Input),
    /// Mine atomic rules, then rules with conjunctive premises.
    MineConjunctive(Input),
    /// Filter a rule file by `--filter` and `--threshold`.
    Filter(Input),
    /// Render a rule file as a Graphviz digraph.
    Graph {
        #[command(flatten)]
        input: Input,
        /// Print routines (weakly connected components) as JSON instead.
        #[arg(long)]
        components: bool,
    },
    /// Flag entities whose removal changes the routines.
    Pep {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "brm", value_parser = ["brm", "frm"])]
        miner: String,
        /// With `--miner frm`, pick minsup so the baseline rule count matches
        /// the belief-mining pipeline.
        #[arg(long)]
        match_count: bool,
    },
    /// Generate a two-process stream.
    Synth {
        #[arg(long, default_value_t = 1000)]
        n_random: usize,
        #[arg(long, default_value_t = 20)]
        n_chains: usize,
        #[arg(long, default_value_t = 1)]
        gap_min: usize,
        #[arg(long, default_value_t = 10)]
        gap_max: usize,
    },
    /// Extraction rates per rule category across window sizes.
    SweepOw {
        /// Window sizes as `lo..hi` (inclusive) or a comma list.
        #[arg(long, default_value = "2..50")]
        ows: String,
    },
    /// Rule count across equidistant selector values.
    SweepSelector {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Counts, support, confidence, lift and odds ratio of one rule.
    Metrics {
        #[command(flatten)]
        input: Input,
        /// Rule as `a->b` or `a,b->c`.
        #[arg(long)]
        rule: String,
        /// Bootstrap iterations for the odds-ratio interval (database mode).
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Input {
    /// Input file; stdin when absent or `-`.
    pub input: Option<PathBuf>,
}

impl Opts {
    fn merged_with(self, base: Opts) -> Opts {
        Opts {
            mode: self.mode.or(base.mode),
            prior: self.prior.or(base.prior),
            selector: self.selector.or(base.selector),
            ow: self.ow.or(base.ow),
            minsup: self.minsup.or(base.minsup),
            filter: self.filter.or(base.filter),
            threshold: self.threshold.or(base.threshold),
            seed: self.seed.or(base.seed),
            runs: self.runs.or(base.runs),
            out: self.out.or(base.out),
        }
    }

    fn mode(&self) -> Result<Mode> {
        match self.mode.as_deref() {
            None | Some("timeseries") => Ok(Mode::Timeseries),
            Some("database") => Ok(Mode::Database),
            Some(other) => Err(Error::param("mode", format!("unknown mode `{other}`"))),
        }
    }

    fn params(&self) -> Result<MiningParams> {
        let d = MiningParams::default();
        let p = MiningParams {
            prior: self.prior.unwrap_or(d.prior),
            selector: self.selector.unwrap_or(d.selector),
            ow: self.ow,
            minsup: self.minsup.unwrap_or(d.minsup),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        };
        p.validate()?;
        Ok(p)
    }

    fn filter(&self) -> Result<Option<Filter>> {
        let threshold = |default: f64| self.threshold.unwrap_or(default);
        Ok(match self.filter.as_deref() {
            None => None,
            Some("confidence") => Some(Filter::Confidence(threshold(0.5))),
            Some("bayes-factor") => Some(Filter::BayesFactor(threshold(1.0))),
            Some("best-confidence") => Some(Filter::BestConfidence),
            Some(other) => return Err(Error::param("filter", format!("unknown filter `{other}`"))),
        })
    }

    /// Applies `--filter` when one was given.
    fn filtered(&self, rules: Vec<ScoredRule>) -> Result<Vec<ScoredRule>> {
        Ok(match self.filter()? {
            Some(f) => f.apply(&rules),
            None => rules,
        })
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        macro_rules! field {
            ($($name:ident),*) => {$(
                if let Some(v) = &self.$name {
                    parts.push(format!("{}={}", stringify!($name), v));
                }
            )*};
        }
        field!(mode, prior, selector, ow, minsup, filter, threshold, runs);
        parts.join(" ")
    }
}

fn load_config(path: &Path) -> Result<Opts> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::param("config", format!("{}: {}", path.display(), e.message())))
}

fn parse_rule(text: &str) -> Result<Rule> {
    let (lhs, rhs) = text
        .split_once("->")
        .ok_or_else(|| Error::InvalidRule(format!("`{text}` has no `->`")))?;
    let side = |s: &str| -> Result<Vec<Symbol>> {
        s.trim_matches(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .split(',')
            .map(|x| Symbol::new(x.trim()))
            .collect()
    };
    Rule::new(side(lhs)?, side(rhs)?)
}

fn parse_ows(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::param("ows", format!("`{text}` is not `lo..hi` or a comma list"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn info(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("{}", msg.as_ref());
    }
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let opts = match &cli.config {
        Some(path) => cli.opts.clone().merged_with(load_config(path)?),
        None => cli.opts.clone(),
    };
    let quiet = cli.quiet;
    let out = opts.out();
    let footer = |seed: Option<u64>| io::footer(seed, &opts.describe());

    match &cli.command {
        Command::MineBrm(input) => {
            let ds = io::ingest(input.input.as_deref(), opts.mode()?)?;
            let set = mine_atomic(&ds, &opts.params()?)?;
            info(quiet, format!("{} rules from {} elements", set.len(), ds.len()));
            io::write_output(out, &io::format_rules(&opts.filtered(score_rule_set(&set))?)?)
        }
        Command::MineFrm(input) => {
            let ds = io::ingest(input.input.as_deref(), opts.mode()?)?;
            let p = opts.params()?;
            let res = mine_frm(&ds, p.minsup, p.ow)?;
            info(quiet, format!("{} itemsets, {} rules", res.itemsets.len(), res.rules.len()));
            io::write_output(out, &io::format_rules(&opts.filtered(res.rules)?)?)
        }
        Command::MineConjunctive(input) => {
            let ds = io::ingest(input.input.as_deref(), opts.mode()?)?;
            let p = opts.params()?;
            let atomic = mine_atomic(&ds, &p)?;
            let search = mine_conjunctive(&atomic, &ds, &p)?;
            info(
                quiet,
                format!("{} conjunctive rules, {} combinations evaluated", search.rules.len(), search.evaluated),
            );
            io::write_output(out, &io::format_rules(&opts.filtered(score_conjunctive(&search, &atomic, &ds))?)?)
        }
        Command::Filter(input) => {
            let filter = opts
                .filter()?
                .ok_or_else(|| Error::param("filter", "required for the filter command"))?;
            let rules = io::read_rules(input.input.as_deref())?;
            io::write_output(out, &io::format_rules(&filter.apply(&rules))?)
        }
        Command::Graph { input, components } => {
            let rules = io::read_rules(input.input.as_deref())?;
            let g = build_graph(&rules);
            if *components {
                let mut s = serde_json::to_string_pretty(&g.components())?;
                s.push('\n');
                io::write_output(out, &s)
            } else {
                io::write_output(out, &(g.to_dot() + &footer(None)))
            }
        }
        Command::Pep {
            input,
            miner,
            match_count,
        } => {
            let ds = io::ingest(input.input.as_deref(), opts.mode()?)?;
            let p = opts.params()?;
            let filter = opts.filter()?;
            let brm = Pipeline {
                miner: Miner::Brm(p.clone()),
                filter,
            };
            let pipeline = match miner.as_str() {
                "frm" => {
                    let minsup = if *match_count {
                        let target = brm.rules(&ds)?.len();
                        let m = minsup_for_rule_count(&ds, target, p.ow)?;
                        info(quiet, format!("minsup {m} matches {target} rules"));
                        m
                    } else {
                        p.minsup
                    };
                    Pipeline {
                        miner: Miner::Frm { minsup, ow: p.ow },
                        filter: None,
                    }
                }
                _ => brm,
            };
            let report = pep_sweep(&ds, &pipeline)?;
            info(quiet, format!("changed: {:?}", report.changed_entities()));
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            io::write_output(out, &s)
        }
        Command::Synth {
            n_random,
            n_chains,
            gap_min,
            gap_max,
        } => {
            let seed = opts.seed.unwrap_or(0);
            let cfg = GeneratorConfig {
                n_random: *n_random,
                n_chains: *n_chains,
                gap_range: (*gap_min, *gap_max),
                seed,
                ..Default::default()
            };
            let ds = generate_timeseries(&cfg)?;
            let params = format!("n_random={n_random} n_chains={n_chains} gaps={gap_min}..{gap_max}");
            io::write_output(out, &(io::format_dataset(&ds)? + &io::footer(Some(seed), &params)))
        }
        Command::SweepOw { ows } => {
            let ows = parse_ows(ows)?;
            let seed = opts.seed.unwrap_or(0);
            let runs = opts.runs.unwrap_or(10);
            let cfg = GeneratorConfig::default().with_seed(seed);
            let rows = ow_sweep(&ows, runs, &cfg, &opts.params()?)?;
            io::write_output(out, &(ow_sweep_csv(&rows) + &footer(Some(seed))))
        }
        Command::SweepSelector { input, samples } => {
            let ds = io::ingest(input.input.as_deref(), opts.mode()?)?;
            let rows = selector_sweep(&equidistant(*samples), &ds, &opts.params()?)?;
            io::write_output(out, &(selector_sweep_csv(&rows) + &footer(None)))
        }
        Command::Metrics {
            input,
            rule,
            bootstrap,
        } => {
            let ds = io::ingest(input.input.as_deref(), opts.mode()?)?;
            let rule = parse_rule(rule)?;
            let scored = rule_metrics(&rule, &ds, &opts, *bootstrap)?;
            let mut s = serde_json::to_string_pretty(&scored)?;
            s.push('\n');
            io::write_output(out, &s)
        }
    }
}

fn rule_metrics(rule: &Rule, ds: &crate::model::Dataset, opts: &Opts, bootstrap: usize) -> Result<ScoredRule> {
    match ds.records() {
        Some(records) => {
            let c = Contingency::of(rule, records);
            let mut sr = ScoredRule::from_counts(rule, c.n11, c.n11 + c.n10, c.n11 + c.n01, ds.len());
            sr.odds_ratio = Some(c.odds_ratio());
            if bootstrap > 0 {
                sr.ci95 = Some(bootstrap_ci(rule, ds, bootstrap, 0.95, opts.seed.unwrap_or(0))?);
            }
            Ok(sr)
        }
        None => {
            if !rule.is_atomic() {
                return Err(Error::Unsupported("stream metrics are defined for atomic rules only"));
            }
            let set = mine_atomic(ds, &opts.params()?)?;
            let t = set.get(rule).ok_or(Error::NeverObserved)?;
            let mut sr = ScoredRule::from_counts(
                rule,
                t.rule_count,
                set.symbol_count(&rule.premise[0]),
                t.conclusion_count,
                ds.len(),
            );
            sr.belief = Some(t.belief);
            Ok(sr)
        }
    }
}

/// Parses `std::env::args`, runs, and maps errors to an exit status.
///
/// Errors print as `error[CATEGORY]: message`, or as a JSON object with
/// `--json`. Usage errors are reported by the argument parser (status 2).
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                eprintln!("{}", serde_json::json!({"error": e.category(), "message": e.to_string()}));
            } else {
                eprintln!("error[{}]: {e}", e.category());
            }
            ExitCode::FAILURE
        }
    }
}
