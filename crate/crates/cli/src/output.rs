//! Report rendering as aligned text, CSV or JSON.

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v) => format!("{v:.5e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A titled table plus free-text notes.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self { title: title.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    /// Name/value/unit layout. Sizes and counts get an empty unit.
    pub fn quantities(title: impl Into<String>) -> Self {
        Self::new(title, &["quantity", "value", "unit"])
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    pub fn quantity(&mut self, name: &str, value: impl Into<Cell>, unit: &str) -> &mut Self {
        self.row(vec![name.into(), value.into(), unit.into()])
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn notes(&mut self, notes: impl IntoIterator<Item = String>) -> &mut Self {
        self.notes.extend(notes);
        self
    }

    /// Looks up the value cell of a name/value/unit row.
    #[cfg(test)]
    pub fn value_of(&self, name: &str) -> Option<&Cell> {
        self.rows.iter().find(|r| matches!(&r[0], Cell::Text(n) if n == name)).map(|r| &r[1])
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn table(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| cells.iter().map(|r| r[c].len()).chain([self.columns[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |row: &[String]| {
            let padded: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = format!("# {}\n{}\n", self.title, line(&self.columns));
        for r in &cells {
            out.push_str(&line(r));
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(&format!("# note: {n}\n"));
        }
        out
    }

    /// Plain CSV; notes are left to the caller (they go to stderr).
    fn csv(&self) -> String {
        let quote = |s: String| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s
            }
        };
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|c| quote(c.text())).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "title": self.title, "rows": rows, "notes": self.notes });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::quantities("demo");
        r.quantity("mass", 1.5e-14, "kg").quantity("n_ent", 5.0, "").quantity("label", "a,b", "");
        r.note("frequency converted");
        r
    }

    #[test]
    fn csv_quotes_commas_and_keeps_notes_out() {
        let csv = sample().render(Format::Csv);
        assert_eq!(csv, "quantity,value,unit\nmass,1.50000e-14,kg\nn_ent,5.00000e0,\nlabel,\"a,b\",\n");
    }

    #[test]
    fn table_aligns_and_lists_notes() {
        let t = sample().render(Format::Table);
        assert!(t.starts_with("# demo\nquantity  value        unit\n"));
        assert!(t.ends_with("# note: frequency converted\n"));
    }

    #[test]
    fn json_round_trips_numbers() {
        let v: Value = serde_json::from_str(&sample().render(Format::Json)).unwrap();
        assert_eq!(v["rows"][1]["value"], json!(5.0));
        assert_eq!(v["notes"][0], json!("frequency converted"));
    }
}
