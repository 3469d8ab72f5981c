//! CSV datasets and the JSON manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(&'static str),
}

impl Cell {
    fn render(&self, out: &mut String) {
        // Both f64 formats print the shortest digits that round-trip.
        let _ = match self {
            Cell::F(x) if *x != 0.0 && !(1e-5..1e16).contains(&x.abs()) => write!(out, "{x:e}"),
            Cell::F(x) => write!(out, "{x}"),
            Cell::I(x) => write!(out, "{x}"),
            Cell::S(s) => write!(out, "{s}"),
        };
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub file: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Parameters shared by every row.
    pub method_parameters: Map<String, Value>,
    /// Per-row parameters, aligned with `rows`, when they vary.
    pub row_parameters: Option<Vec<Value>>,
}

impl Dataset {
    pub fn new(file: &str, columns: &[&'static str]) -> Self {
        Dataset {
            file: file.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            method_parameters: Map::new(),
            row_parameters: None,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.method_parameters.insert(key.to_string(), v.into());
    }

    pub fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                c.render(&mut s);
            }
            s.push('\n');
        }
        s
    }

    fn manifest_entry(&self) -> Value {
        let mut e = json!({
            "file": self.file,
            "columns": self.columns,
            "rows": self.rows.len(),
            "method_parameters": self.method_parameters,
        });
        if let Some(rp) = &self.row_parameters {
            e["row_parameters"] = Value::Array(rp.clone());
        }
        e
    }
}

pub struct Manifest<'a> {
    pub experiment: &'a str,
    pub config_echo: Value,
    pub outputs: &'a [Dataset],
    pub warnings: &'a [String],
    pub error: Option<&'a qnm_core::Error>,
}

impl Manifest<'_> {
    pub fn to_json(&self) -> String {
        let mut m = json!({
            "experiment": self.experiment,
            "config_echo": self.config_echo,
            "versions": {
                "qnm-lab": env!("CARGO_PKG_VERSION"),
                "qnm-core": qnm_core::VERSION,
            },
            "outputs": self.outputs.iter().map(Dataset::manifest_entry).collect::<Vec<_>>(),
            "warnings": self.warnings,
        });
        if let Some(e) = self.error {
            m["error"] = json!({ "name": e.name(), "message": e.to_string() });
        }
        let mut s = serde_json::to_string_pretty(&m).expect("manifest is plain JSON");
        s.push('\n');
        s
    }
}

pub fn write_all(dir: &Path, datasets: &[Dataset], manifest: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for d in datasets {
        fs::write(dir.join(&d.file), d.csv())?;
    }
    fs::write(dir.join("manifest.json"), manifest)
}
