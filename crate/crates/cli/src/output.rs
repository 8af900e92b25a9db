//! Text, JSON and CSV emitters. Floats are printed in shortest round-trip form.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qct_core::report::{Model, ReportRow};
use qct_core::verify::CheckResult;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::{CliError, Format};

#[derive(Debug, Clone)]
pub(crate) enum Field {
    Null,
    Bool(bool),
    Int(u64),
    Num(f64),
    Str(String),
    List(Vec<String>),
    IntList(Vec<u64>),
}

impl Field {
    fn text(&self) -> String {
        match self {
            Field::Null => String::new(),
            Field::Bool(b) => b.to_string(),
            Field::Int(i) => i.to_string(),
            Field::Num(x) => x.to_string(),
            Field::Str(s) => s.clone(),
            Field::List(v) => v.join(" "),
            Field::IntList(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
        }
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Null => s.serialize_none(),
            Field::Bool(b) => s.serialize_bool(*b),
            Field::Int(i) => s.serialize_u64(*i),
            Field::Num(x) => s.serialize_f64(*x),
            Field::Str(v) => s.serialize_str(v),
            Field::List(v) => v.serialize(s),
            Field::IntList(v) => v.serialize(s),
        }
    }
}

/// Ordered key/value pairs.
pub(crate) type Record = Vec<(&'static str, Field)>;

struct Ordered<'a>(&'a Record);

impl Serialize for Ordered<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

pub(crate) enum Table {
    Single(Record),
    Rows(Vec<ReportRow>),
    Checks(Vec<CheckResult>),
}

pub(crate) fn emit(table: &Table, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = render(table, format)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render(table: &Table, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Text => render_text(table),
        Format::Json => {
            let mut s = match table {
                Table::Single(r) => serde_json::to_string_pretty(&Ordered(r)),
                Table::Rows(rows) => serde_json::to_string_pretty(rows),
                Table::Checks(checks) => serde_json::to_string_pretty(checks),
            }
            .map_err(|e| CliError::Io(e.into()))?;
            s.push('\n');
            s
        }
        Format::Csv => render_csv(table).map_err(|e| CliError::Io(e.into()))?,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn render_csv(table: &Table) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match table {
        Table::Single(r) => {
            w.write_record(r.iter().map(|(k, _)| *k))?;
            w.write_record(r.iter().map(|(_, v)| v.text()))?;
        }
        Table::Rows(rows) => {
            w.write_record(["n_pairs", "model", "value", "ci_low", "ci_high", "trials", "seed", "threshold"])?;
            for r in rows {
                w.write_record([
                    r.n_pairs.to_string(),
                    r.model.to_string(),
                    r.value.to_string(),
                    opt(r.ci_low),
                    opt(r.ci_high),
                    opt(r.trials),
                    opt(r.seed),
                    opt(r.threshold),
                ])?;
            }
        }
        Table::Checks(checks) => {
            w.write_record(["check", "passed", "cases", "failures", "detail"])?;
            for c in checks {
                w.write_record([
                    c.name.to_string(),
                    c.passed().to_string(),
                    c.cases.to_string(),
                    c.failures.to_string(),
                    c.detail.clone(),
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_text(table: &Table) -> String {
    let mut s = String::new();
    match table {
        Table::Single(r) => {
            let width = r.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in r {
                let v = match v {
                    Field::Null => "-".to_owned(),
                    other => other.text(),
                };
                writeln!(s, "{k:<width$}  {v}").unwrap();
            }
        }
        Table::Rows(rows) => render_rows_text(rows, &mut s),
        Table::Checks(checks) => {
            for c in checks {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                writeln!(s, "{tag}  {:<22} {:>6} cases  {}", c.name, c.cases, c.detail).unwrap();
            }
        }
    }
    s
}

/// One line per `N`, one column per model.
fn render_rows_text(rows: &[ReportRow], s: &mut String) {
    let mut models: Vec<Model> = rows.iter().map(|r| r.model).collect();
    models.sort();
    models.dedup();
    write!(s, "{:>4}", "N").unwrap();
    for m in &models {
        let head = match (m, rows.iter().find(|r| r.model == *m).and_then(|r| r.threshold)) {
            (Model::MinGamma, Some(t)) => format!("min-gamma@{t}"),
            _ => m.to_string(),
        };
        write!(s, "  {head:>24}").unwrap();
    }
    s.push('\n');
    let mut ns: Vec<u32> = rows.iter().map(|r| r.n_pairs).collect();
    ns.dedup();
    for n in ns {
        write!(s, "{n:>4}").unwrap();
        for m in &models {
            let cell = rows
                .iter()
                .find(|r| r.n_pairs == n && r.model == *m)
                .map(|r| match (r.ci_low, r.ci_high) {
                    (Some(lo), Some(hi)) => format!("{:.6} [{lo:.4},{hi:.4}]", r.value),
                    _ => format!("{:.12}", r.value),
                })
                .unwrap_or_default();
            write!(s, "  {cell:>24}").unwrap();
        }
        s.push('\n');
    }
}
