//! Dataset and rule-file formats.
//!
//! Streams are CSV with a `t,symbol` header and an optional `entity`
//! column. Databases hold one record per line as comma-separated symbols,
//! optionally prefixed by an `entity:` tag. Blank lines and lines starting
//! with `#` are ignored by both readers, so output footers survive a round
//! trip. Rules are a JSON array of [`ScoredRule`] objects.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, ParseErrorKind, Result};
use crate::metrics::{sort_canonical, ScoredRule};
use crate::model::{Dataset, Event, Mode, Record, Symbol};

/// Reads a dataset from `path`, or from stdin when `path` is `None` or `-`.
pub fn ingest(path: Option<&Path>, mode: Mode) -> Result<Dataset> {
    let (text, name) = read_input(path)?;
    parse_dataset(&text, mode, &name)
}

pub fn read_input(path: Option<&Path>) -> Result<(String, PathBuf)> {
    match path {
        Some(p) if p != Path::new("-") => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            Ok((text, p.to_path_buf()))
        }
        _ => {
            let mut text = String::new();
            let name = PathBuf::from("<stdin>");
            std::io::stdin().read_to_string(&mut text).map_err(|source| Error::Io {
                path: name.clone(),
                source,
            })?;
            Ok((text, name))
        }
    }
}

pub fn parse_dataset(text: &str, mode: Mode, path: &Path) -> Result<Dataset> {
    match mode {
        Mode::Timeseries => parse_timeseries(text, path),
        Mode::Database => parse_database(text, path),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(path: &Path, line: usize, kind: ParseErrorKind, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        kind,
        message: message.into(),
    }
}

fn symbol(field: &str, path: &Path, line: usize) -> Result<Symbol> {
    Symbol::new(field.trim()).map_err(|_| parse_err(path, line, ParseErrorKind::Field, "empty symbol"))
}

pub fn parse_timeseries(text: &str, path: &Path) -> Result<Dataset> {
    let mut lines = content_lines(text);
    let Some((hline, header)) = lines.next() else {
        return Err(parse_err(path, 0, ParseErrorKind::Empty, "no header or events"));
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let with_entity = match columns.as_slice() {
        ["t", "symbol"] => false,
        ["t", "symbol", "entity"] => true,
        _ => {
            return Err(parse_err(
                path,
                hline,
                ParseErrorKind::Header,
                format!("expected `t,symbol` or `t,symbol,entity`, found `{header}`"),
            ))
        }
    };
    let mut events = Vec::new();
    let mut last_t = i64::MIN;
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != columns.len() {
            return Err(parse_err(
                path,
                line,
                ParseErrorKind::Field,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let t: i64 = fields[0].trim().parse().map_err(|_| {
            parse_err(path, line, ParseErrorKind::Field, format!("bad timestamp `{}`", fields[0].trim()))
        })?;
        if t < last_t {
            return Err(parse_err(
                path,
                line,
                ParseErrorKind::Unsorted,
                format!("timestamp {t} follows {last_t}"),
            ));
        }
        last_t = t;
        let mut e = Event::new(symbol(fields[1], path, line)?, t);
        if with_entity {
            let tag = fields[2].trim();
            if !tag.is_empty() {
                e = e.with_entity(tag);
            }
        }
        events.push(e);
    }
    if events.is_empty() {
        return Err(parse_err(path, hline, ParseErrorKind::Empty, "no events after header"));
    }
    Dataset::timeseries(events)
}

pub fn parse_database(text: &str, path: &Path) -> Result<Dataset> {
    let mut records = Vec::new();
    for (line, l) in content_lines(text) {
        let (entity, body) = match l.split_once(':') {
            Some((tag, rest)) if !tag.contains(',') => (Some(tag.trim()), rest),
            _ => (None, l),
        };
        let symbols: Vec<Symbol> = body
            .split(',')
            .map(|f| symbol(f, path, line))
            .collect::<Result<_>>()?;
        let mut seen = HashSet::new();
        if let Some(d) = symbols.iter().find(|s| !seen.insert(*s)) {
            return Err(parse_err(
                path,
                line,
                ParseErrorKind::DuplicateSymbol,
                format!("symbol `{d}` repeated"),
            ));
        }
        let mut r = Record::new(symbols)?;
        if let Some(tag) = entity.filter(|t| !t.is_empty()) {
            r = r.with_entity(tag);
        }
        records.push(r);
    }
    if records.is_empty() {
        return Err(parse_err(path, 0, ParseErrorKind::Empty, "no records"));
    }
    Dataset::database(records)
}

fn check_field(s: &str, forbidden: &[char]) -> Result<()> {
    if s.starts_with('#') || s.trim() != s || s.contains(|c| forbidden.contains(&c) || c == '\n' || c == '\r') {
        return Err(Error::InvalidRecord(format!("`{s}` cannot be written in this format")));
    }
    Ok(())
}

/// Serializes a dataset in the format [`parse_dataset`] reads.
pub fn format_dataset(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    match dataset {
        Dataset::Timeseries(events) => {
            let tagged = events.iter().any(|e| e.entity.is_some());
            out.push_str(if tagged { "t,symbol,entity\n" } else { "t,symbol\n" });
            for e in events {
                check_field(e.symbol.as_str(), &[','])?;
                let _ = write!(out, "{},{}", e.t, e.symbol);
                if tagged {
                    let tag = e.entity.as_deref().unwrap_or("");
                    check_field(tag, &[','])?;
                    let _ = write!(out, ",{tag}");
                }
                out.push('\n');
            }
        }
        Dataset::Database(records) => {
            for r in records {
                if let Some(tag) = &r.entity {
                    check_field(tag, &[',', ':'])?;
                    let _ = write!(out, "{tag}:");
                }
                for (i, s) in r.symbols().iter().enumerate() {
                    check_field(s.as_str(), &[',', ':'])?;
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(s.as_str());
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Rule list as pretty JSON, sorted canonically; an empty list is `[]`.
pub fn format_rules(rules: &[ScoredRule]) -> Result<String> {
    let mut sorted = rules.to_vec();
    sort_canonical(&mut sorted);
    let mut s = serde_json::to_string_pretty(&sorted)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_rules(text: &str) -> Result<Vec<ScoredRule>> {
    Ok(serde_json::from_str(text)?)
}

pub fn emit_rules(rules: &[ScoredRule], path: &Path) -> Result<()> {
    write_output(Some(path), &format_rules(rules)?)
}

pub fn read_rules(path: Option<&Path>) -> Result<Vec<ScoredRule>> {
    parse_rules(&read_input(path)?.0)
}

/// Writes to `path`, or stdout when `path` is `None` or `-`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, contents).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        _ => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Comment line recording the tool version, seed and parameters.
pub fn footer(seed: Option<u64>, params: &str) -> String {
    let mut s = format!("# brm {}", env!("CARGO_PKG_VERSION"));
    if let Some(seed) = seed {
        let _ = write!(s, " seed={seed}");
    }
    if !params.is_empty() {
        let _ = write!(s, " {params}");
    }
    s.push('\n');
    s
}
