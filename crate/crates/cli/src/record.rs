//! Result records and their on-disk form.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Bumped whenever a payload layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Eig,
    Lsbound,
    Epinf,
    Decay,
    Perturb,
    Gap,
    Check,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Eig => "eig",
            Experiment::Lsbound => "lsbound",
            Experiment::Epinf => "epinf",
            Experiment::Decay => "decay",
            Experiment::Perturb => "perturb",
            Experiment::Gap => "gap",
            Experiment::Check => "check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Finished, but some solve missed its tolerances or a check failed.
    Incomplete,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub experiment: Experiment,
    pub config_digest: Option<String>,
    pub config: Option<serde_json::Value>,
    pub status: Status,
    pub error: Option<String>,
    pub payload: serde_json::Value,
    pub started_at: String,
    pub finished_at: String,
}

impl ResultRecord {
    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("record serialises");
        serde_json::to_string_pretty(&value).expect("json value serialises") + "\n"
    }

    /// The JSON of the payload alone, which is reproducible across runs.
    pub fn payload_json(&self) -> String {
        serde_json::to_string(&self.payload).expect("json value serialises")
    }
}

/// A named CSV table produced alongside a record.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_number(*v))).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

fn format_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:e}")
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the record as `<experiment>.json` and each table as `<name>.csv`.
pub fn write_outputs(dir: &Path, record: &ResultRecord, tables: &[Table]) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let json = dir.join(format!("{}.json", record.experiment.name()));
    write_atomic(&json, &record.to_json())?;
    written.push(json);
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_atomic(&path, &t.to_csv())?;
        written.push(path);
    }
    Ok(written)
}
