//! JSON and CSV writers.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::commands::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A result as a JSON document and as a CSV table.
pub struct Artifact {
    pub json: serde_json::Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    pub fn new<S: Serialize>(json: &S, header: &[&str]) -> Result<Self, CliError> {
        let json = serde_json::to_value(json).map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(Artifact { json, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() })
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        self.rows.push(cells.into_iter().collect());
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let sink: Box<dyn Write> = match out {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout().lock()),
        };
        match format {
            Format::Json => {
                let mut sink = sink;
                serde_json::to_writer_pretty(&mut sink, &self.json).map_err(io::Error::from)?;
                writeln!(sink)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(sink);
                w.write_record(&self.header).map_err(io::Error::from)?;
                for r in &self.rows {
                    w.write_record(r).map_err(io::Error::from)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}
