//! Tabular artifacts with a provenance header, written as CSV or JSON.

use crate::config::Format;
use anyhow::{Context, Result};
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const TOOL: &str = concat!("kgfield ", env!("CARGO_PKG_VERSION"));

/// Header lines shared by every artifact of a run.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub config_hash: Option<String>,
    pub seed: u64,
    pub params: Vec<(String, String)>,
}

impl Provenance {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("# tool = {TOOL}")];
        if let Some(h) = &self.config_hash {
            out.push(format!("# config_sha256 = {h}"));
        }
        out.push(format!("# seed = {}", self.seed));
        out.extend(self.params.iter().map(|(k, v)| format!("# {k} = {v}")));
        out
    }

    pub fn to_json(&self) -> Value {
        let params: serde_json::Map<String, Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({ "tool": TOOL, "config_sha256": self.config_hash, "seed": self.seed, "params": params })
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub footer: Vec<(String, Value)>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(num).collect());
    }

    pub fn footer(&mut self, key: &str, value: Value) {
        self.footer.push((key.into(), value));
    }

    fn write_csv(&self, w: &mut impl Write, prov: &Provenance) -> Result<()> {
        for line in prov.lines() {
            writeln!(w, "{line}")?;
        }
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        {
            let mut csv = csv::Writer::from_writer(&mut *w);
            csv.write_record(&self.columns)?;
            for row in &self.rows {
                csv.write_record(row.iter().map(cell))?;
            }
            csv.flush()?;
        }
        for (k, v) in &self.footer {
            writeln!(w, "# {k} = {}", cell(v))?;
        }
        Ok(())
    }

    fn to_json(&self, prov: &Provenance) -> Value {
        let meta: serde_json::Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let footer: serde_json::Map<String, Value> = self.footer.iter().cloned().collect();
        json!({ "provenance": prov.to_json(), "meta": meta, "columns": self.columns, "rows": self.rows, "footer": footer })
    }

    /// Writes `<stem>.csv` and/or `<stem>.json` under `dir`, returning the file names.
    pub fn write(
        &self,
        dir: &Path,
        stem: &str,
        formats: &[Format],
        prov: &Provenance,
    ) -> Result<Vec<String>> {
        let mut names = Vec::new();
        for f in formats {
            let name = match f {
                Format::Csv => format!("{stem}.csv"),
                Format::Json => format!("{stem}.json"),
            };
            let path = dir.join(&name);
            let mut w = create(&path)?;
            match f {
                Format::Csv => self.write_csv(&mut w, prov)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &self.to_json(prov))?;
                    writeln!(w)?;
                }
            }
            w.flush()
                .with_context(|| format!("writing {}", path.display()))?;
            names.push(name);
        }
        Ok(names)
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

/// Output directory: `KGFIELD_OUT`, then `--out`, then the config's directory, then `kgfield-out`.
pub fn output_dir(flag: Option<&Path>, configured: Option<&Path>) -> Result<PathBuf> {
    let env = std::env::var_os("KGFIELD_OUT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let dir = env
        .or_else(|| flag.map(Path::to_path_buf))
        .or_else(|| configured.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("kgfield-out"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_body_and_footer() {
        let prov = Provenance {
            config_hash: Some("ab".into()),
            seed: 7,
            params: vec![("model.M".into(), "1.0".into())],
        };
        let mut t = Table::new(&["x", "y"]).meta("kind", "probability");
        t.push_nums([1.0, 0.1]);
        t.push_nums([2.0, f64::NAN]);
        t.footer("slope", num(-2.0));
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &prov).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let want = format!("# tool = {TOOL}\n# config_sha256 = ab\n# seed = 7\n# model.M = 1.0\n# kind = probability\nx,y\n1.0,0.1\n2.0,nan\n# slope = -2.0\n");
        assert_eq!(text, want);
    }
}
