//! DIMACS CNF, edge lists and tabular CSV/JSON output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::sim::{CnfFormula, GraphInstance};

pub const SIG_DIGITS: usize = 12;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `p cnf n m` followed by zero-terminated clauses. Clauses may span
/// lines; `c` lines are comments and a `%` line ends the body.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(u32, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut cur: Vec<i32> = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(perr(line_no, "duplicate problem line"));
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "p" || f[1] != "cnf" {
                return Err(perr(line_no, format!("expected `p cnf <n> <m>`, got `{line}`")));
            }
            let n = f[2].parse().map_err(|_| perr(line_no, format!("bad variable count `{}`", f[2])))?;
            let m = f[3].parse().map_err(|_| perr(line_no, format!("bad clause count `{}`", f[3])))?;
            header = Some((n, m, line_no));
            continue;
        }
        let Some((n, _, _)) = header else {
            return Err(perr(line_no, "clause before problem line"));
        };
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| perr(line_no, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else if lit.unsigned_abs() > n {
                return Err(perr(line_no, format!("literal {lit} exceeds n = {n}")));
            } else {
                cur.push(lit);
            }
        }
        last = line_no;
    }
    let Some((n, m, hline)) = header else {
        return Err(perr(0, "missing problem line"));
    };
    if !cur.is_empty() {
        return Err(perr(last, "last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(perr(hline, format!("header declares {m} clauses, body has {}", clauses.len())));
    }
    CnfFormula::new(n, clauses)
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut s = format!("p cnf {} {}\n", f.n, f.m());
    for c in &f.clauses {
        for l in c {
            let _ = write!(s, "{l} ");
        }
        s.push_str("0\n");
    }
    s
}

/// Two whitespace-separated columns: a `n m` line, then `m` edge lines.
/// `#` starts a comment line.
pub fn parse_edge_list(text: &str) -> Result<GraphInstance> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let pair = |line_no: usize, l: &str| -> Result<(u64, u64)> {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            return Err(perr(line_no, format!("expected two columns, got `{l}`")));
        }
        let p = |t: &str| t.parse::<u64>().map_err(|_| perr(line_no, format!("bad integer `{t}`")));
        Ok((p(f[0])?, p(f[1])?))
    };
    let (hline, h) = rows.next().ok_or_else(|| perr(0, "missing `n m` line"))?;
    let (n, m) = pair(hline, h)?;
    let n = u32::try_from(n).map_err(|_| perr(hline, "vertex count too large"))?;
    let mut edges = Vec::new();
    for (line_no, l) in rows {
        let (a, b) = pair(line_no, l)?;
        if a == 0 || b == 0 || a > n as u64 || b > n as u64 || a == b {
            return Err(perr(line_no, format!("edge ({a}, {b}) invalid for n = {n}")));
        }
        edges.push((a as u32, b as u32));
    }
    if edges.len() as u64 != m {
        return Err(perr(hline, format!("header declares {m} edges, body has {}", edges.len())));
    }
    GraphInstance::new(n, edges)
}

pub fn write_edge_list(g: &GraphInstance) -> String {
    let mut s = format!("{} {}\n", g.n, g.edges.len());
    for (a, b) in &g.edges {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Invalid(format!("unknown format `{s}`"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `v` rounded to [`SIG_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIG_DIGITS - 1, v).parse().unwrap_or(v)
}

/// A JSON number cell, or null for non-finite values.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(round_sig(v)).map_or(Value::Null, Value::Number)
}

/// Named columns, rows in fixed order, and the echoed run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            config: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_config(mut self, config: Vec<(String, String)>) -> Self {
        self.config = config;
        self
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => fmt_float(round_sig(f)),
            _ => n.to_string(),
        },
        Value::String(s) => csv_text(s),
        other => csv_text(&other.to_string()),
    }
}

fn fmt_float(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn round_value(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        other => other.clone(),
    }
}

/// Renders a table. CSV gets `# key: value` config lines, a header row and
/// one line per row; JSON is `{"config": {...}, "records": [...]}`.
pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = String::new();
            for (k, v) in &table.config {
                let _ = writeln!(s, "# {k}: {v}");
            }
            s.push_str(&table.columns.iter().map(|c| csv_text(c)).collect::<Vec<_>>().join(","));
            s.push('\n');
            for row in &table.rows {
                s.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let config: Map<String, Value> =
                table.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            let records: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        table.columns.iter().cloned().zip(row.iter().map(round_value)).collect(),
                    )
                })
                .collect();
            let mut root = Map::new();
            root.insert("config".into(), Value::Object(config));
            root.insert("columns".into(), Value::Array(table.columns.iter().cloned().map(Value::String).collect()));
            root.insert("records".into(), Value::Array(records));
            let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("json values serialize");
            s.push('\n');
            s
        }
    }
}

/// Inverse of [`render`] for JSON output.
pub fn parse_json_table(text: &str) -> Result<Table> {
    let root: Value = serde_json::from_str(text).map_err(|e| perr(e.line(), e.to_string()))?;
    let bad = || perr(0, "expected an object with config, columns and records");
    let config = root
        .get("config")
        .and_then(Value::as_object)
        .ok_or_else(bad)?
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string()))
        .collect();
    let columns: Vec<String> = root
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(bad)?
        .iter()
        .map(|c| c.as_str().map(str::to_string).ok_or_else(bad))
        .collect::<Result<_>>()?;
    let rows = root
        .get("records")
        .and_then(Value::as_array)
        .ok_or_else(bad)?
        .iter()
        .map(|r| {
            let obj = r.as_object().ok_or_else(bad)?;
            Ok(columns.iter().map(|c| obj.get(c).cloned().unwrap_or(Value::Null)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(Table { config, columns, rows })
}

/// Writes the rendered table, creating parent directories.
pub fn emit(table: &Table, format: Format, path: &Path) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, render(table, format)).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_basic() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0").unwrap();
        assert_eq!(f.n, 2);
        assert_eq!(f.clauses, vec![vec![1, -2]]);
    }

    #[test]
    fn dimacs_errors_carry_lines() {
        let e = parse_dimacs("c hi\np cnf 2 2\n1 -2 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_dimacs("p cnf 2 1\n1 x 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_dimacs("p cnf 2 1\n1 3 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(parse_dimacs("p cnf 2 1\n1 2\n").is_err());
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p sat 2 1\n1 2 0\n").is_err());
    }

    #[test]
    fn dimacs_multiline_and_percent() {
        let f = parse_dimacs("p cnf 3 2\n1\n 2 0 -3\n0\n%\n0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![1, 2], vec![-3]]);
    }

    #[test]
    fn edge_list() {
        let g = parse_edge_list("# g\n3 2\n1 2\n2 3\n").unwrap();
        assert_eq!(g.edges, vec![(1, 2), (2, 3)]);
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
        assert!(parse_edge_list("3 1\n1 1\n").is_err());
        assert!(parse_edge_list("3 2\n1 2\n").is_err());
    }

    #[test]
    fn sig_digits() {
        assert_eq!(round_sig(4.396224999999999), 4.396225);
        assert_eq!(round_sig(1.0 / 3.0).to_string(), "0.333333333333");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["x", "z"]).with_config(vec![("k".into(), "3".into())]);
        assert_eq!(render(&t, Format::Csv), "# k: 3\nx,z\n");
    }

    #[test]
    fn json_round_trip() {
        let mut t = Table::new(["a", "b", "c"]).with_config(vec![("seed".into(), "7".into())]);
        t.push(vec![num(0.1), Value::from(3), Value::from("x,y")]).unwrap();
        t.push(vec![Value::Null, Value::from(-1), Value::from(true)]).unwrap();
        assert!(t.push(vec![num(1.0)]).is_err());
        let back = parse_json_table(&render(&t, Format::Json)).unwrap();
        assert_eq!(back, t);
        assert_eq!(render(&t, Format::Csv).lines().nth(2).unwrap(), "0.1,3,\"x,y\"");
    }
}
