//! Plain-text report files: a TOML summary and comma-separated tables.
//!
//! Floats carry 17 significant digits so reports are diffable and reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// `{:.16e}`, with `nan` and `inf` spelled the TOML way.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

/// Builds a TOML document key by key, in insertion order.
#[derive(Debug, Default)]
pub struct Summary {
    out: String,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        if !self.out.is_empty() {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "[{name}]");
        self
    }

    fn raw(&mut self, key: &str, value: &str) -> &mut Self {
        let _ = writeln!(self.out, "{key} = {value}");
        self
    }

    pub fn float(&mut self, key: &str, v: f64) -> &mut Self {
        self.raw(key, &fmt_f64(v))
    }

    /// Skips the key when the value is absent.
    pub fn opt_float(&mut self, key: &str, v: Option<f64>) -> &mut Self {
        match v {
            Some(v) => self.float(key, v),
            None => self,
        }
    }

    pub fn int(&mut self, key: &str, v: impl Into<i128>) -> &mut Self {
        self.raw(key, &v.into().to_string())
    }

    pub fn boolean(&mut self, key: &str, v: bool) -> &mut Self {
        self.raw(key, if v { "true" } else { "false" })
    }

    pub fn string(&mut self, key: &str, v: &str) -> &mut Self {
        self.raw(key, &quote(v))
    }

    pub fn floats(&mut self, key: &str, v: &[f64]) -> &mut Self {
        let items: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
        self.raw(key, &format!("[{}]", items.join(", ")))
    }

    pub fn strings(&mut self, key: &str, v: &[String]) -> &mut Self {
        let items: Vec<String> = v.iter().map(|s| quote(s)).collect();
        self.raw(key, &format!("[{}]", items.join(", ")))
    }

    pub fn finish(&self) -> &str {
        &self.out
    }
}

/// A table with a fixed header; every row must match its width.
#[derive(Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}
