//! One report type, three renderings. Text is for people and always echoes
//! the run parameters; JSON is one self-contained document per run with
//! shortest-round-trip numerics; CSV carries the tabular section when the
//! command has one (lattice residuals, suite outcomes) and the scalar row
//! otherwise.

use serde_json::{Map, Number, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    /// A value a sub-computation failed to produce.
    Missing,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            // Shortest round-trip digits either way; scientific notation
            // only where plain decimal would drown the reader in zeros.
            Cell::Float(x) if *x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e16) => {
                format!("{x:e}")
            }
            Cell::Float(x) => format!("{x}"),
            Cell::Int(n) => format!("{n}"),
            Cell::Bool(b) => format!("{b}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "-".into(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Missing => String::new(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            other => other.text(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::Number((*n).into()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug)]
pub struct Table {
    /// JSON key holding the row array.
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    /// Ordered key/value pairs; starts with the run parameter echo.
    pub scalars: Vec<(&'static str, Cell)>,
    pub table: Option<Table>,
}

impl Report {
    pub fn render_text(&self, color: bool) -> String {
        let mut out = String::new();
        let title = format!("hahn {}", self.command);
        if color {
            out.push_str(&format!("\x1b[1m{title}\x1b[0m\n"));
        } else {
            out.push_str(&title);
            out.push('\n');
        }

        let key_width = self.scalars.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (key, cell) in &self.scalars {
            out.push_str(&format!("  {key:<key_width$}  {}\n", cell.text()));
        }

        if let Some(table) = &self.table {
            out.push('\n');
            let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
            let rendered: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|row| row.iter().map(Cell::text).collect())
                .collect();
            for row in &rendered {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            out.push_str("  ");
            for (i, col) in table.columns.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{col:<width$}", width = widths[i]));
            }
            out.push('\n');
            for row in &rendered {
                out.push_str("  ");
                for (i, cell) in row.iter().enumerate() {
                    if i > 0 {
                        out.push_str("  ");
                    }
                    out.push_str(&format!("{cell:<width$}", width = widths[i]));
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("command".into(), Value::String(self.command.into()));
        for (key, cell) in &self.scalars {
            doc.insert((*key).into(), cell.json());
        }
        if let Some(table) = &self.table {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (col, cell) in table.columns.iter().zip(row) {
                        obj.insert((*col).into(), cell.json());
                    }
                    Value::Object(obj)
                })
                .collect();
            doc.insert(table.name.into(), Value::Array(rows));
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc))
            .expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some(table) => {
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            None => {
                let keys: Vec<&str> = self.scalars.iter().map(|(k, _)| *k).collect();
                out.push_str(&keys.join(","));
                out.push('\n');
                let cells: Vec<String> = self.scalars.iter().map(|(_, c)| c.csv()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }
}
