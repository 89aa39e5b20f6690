use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Rows for the CSV form of a report.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub struct Outcome {
    pub result: Value,
    pub table: Table,
    pub exit: i32,
}

pub struct Emitter {
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Emitter {
    pub fn render(&self, outcome: &Outcome, wall_time: f64) -> String {
        match self.format {
            Format::Json => {
                let mut report = json!({
                    "tool": "gz",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": self.command,
                    "config": self.config,
                    "seed": self.seed,
                });
                if self.timing {
                    report["wall_time_s"] = json!(wall_time);
                }
                report["exit_code"] = json!(outcome.exit);
                report["result"] = outcome.result.clone();
                let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = format!(
                    "# gz {} {} seed={}",
                    env!("CARGO_PKG_VERSION"),
                    self.command,
                    self.seed
                );
                if self.timing {
                    s.push_str(&format!(" wall_time_s={wall_time:.3}"));
                }
                s.push('\n');
                s.push_str(&format!("# config {}\n", self.config));
                s.push_str(&outcome.table.header.join(","));
                s.push('\n');
                for row in &outcome.table.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }

    pub fn write(&self, text: &str) -> std::io::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()
            }
        }
    }
}
