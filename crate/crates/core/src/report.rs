//! Report envelopes and plain-text tables.

use std::fmt::{self, Write as _};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "frob";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A report together with the configuration that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<C, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: C,
    pub report: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(config: C, report: R) -> Self {
        Envelope { tool: TOOL, version: VERSION, config_hash: config_hash(&config), config, report }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Hex SHA-256 of the canonical JSON encoding of `config`.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Column-aligned text table. All-numeric columns are right-aligned.
#[derive(Clone, Debug, Default)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row<S: ToString>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        self.rows.push(cells.into_iter().map(|c| c.to_string()).collect());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn numeric(s: &str) -> bool {
    !s.is_empty() && s.trim_start_matches(['-', '+']).chars().all(|c| c.is_ascii_digit() || c == '.')
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.rows.iter().map(Vec::len).chain([self.headers.len()]).max().unwrap_or(0);
        let mut widths = vec![0; cols];
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let right: Vec<bool> = (0..cols)
            .map(|i| {
                let mut cells = self.rows.iter().filter_map(|r| r.get(i)).filter(|c| !c.is_empty()).peekable();
                cells.peek().is_some() && cells.all(|c| numeric(c))
            })
            .collect();
        let line = |f: &mut fmt::Formatter<'_>, row: &[String], header: bool| -> fmt::Result {
            let cells: Vec<String> = widths
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let cell = row.get(i).map(String::as_str).unwrap_or("");
                    if !header && right[i] {
                        format!("{cell:>w$}")
                    } else {
                        format!("{cell:<w$}")
                    }
                })
                .collect();
            writeln!(f, "{}", cells.join("  ").trim_end())
        };
        line(f, &self.headers, true)?;
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        writeln!(f, "{}", rule.join("  "))?;
        for row in &self.rows {
            line(f, row, false)?;
        }
        Ok(())
    }
}
