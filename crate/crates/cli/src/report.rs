use std::io::Write;

use holonomic_optics::ledger::ConventionLedger;
use holonomic_optics::verify::Check;
use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Fixed-width scientific notation for deviations.
pub fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

/// Percent values, four decimals.
pub fn pct(v: f64) -> String {
    format!("{v:.4}")
}

pub fn real(v: f64) -> String {
    format!("{v:.12}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub table: Table,
    pub diagnostics: serde_json::Value,
    pub config: ExperimentConfig,
    pub conventions: Option<ConventionLedger>,
}

impl Report {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        let enc = |e: csv::Error| CliError::Encode(e.to_string());
        out.write_record(&self.table.header).map_err(enc)?;
        for row in &self.table.rows {
            out.write_record(row).map_err(enc)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| CliError::Encode(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write(&self, format: Format, w: impl Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} {}: {:.4e} (limit {:.1e})\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            ));
        }
        s
    }
}
