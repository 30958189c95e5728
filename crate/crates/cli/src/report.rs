//! CSV reports. Each file opens with `# key: value` metadata lines, then a
//! header row; floats carry 17 significant digits so they round-trip.

use std::io::{BufRead, Write};

use eigenlimit_core::construction::{median_successive_ratio, ROUNDING_FLOOR};
use eigenlimit_core::{ConvergenceRow, PlanckSchedule, C64};

use crate::config::Config;
use crate::error::{CliError, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered `key: value` pairs written above the CSV body.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    /// Config hash, crate versions, seed, dimension, and the measure.
    pub fn for_config(config: &Config, command: &str) -> Self {
        let mut m = Metadata::default();
        m.push("command", command);
        m.push("config_sha256", config.hash());
        m.push("eigenlimit-core", eigenlimit_core::VERSION);
        m.push("eigenlimit-cli", env!("CARGO_PKG_VERSION"));
        m.push("seed", config.seed);
        m.push("dim", config.dim);
        if config.components.is_empty() {
            m.push("measure", "seeded random mix 0.3/0.7");
        } else {
            let desc: Vec<String> = config
                .components
                .iter()
                .map(|c| {
                    let g: Vec<String> = c.generator.iter().map(|x| x.to_string()).collect();
                    format!("{}@[{}]", c.weight, g.join(" "))
                })
                .collect();
            m.push("measure", desc.join(" + "));
        }
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        for (k, v) in &self.0 {
            writeln!(out, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// Writes metadata followed by a CSV table.
pub fn write_table<W: Write>(out: &mut W, meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    meta.write(out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Verdict on one symbol's error column.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnVerdict {
    pub symbol: String,
    pub final_error: f64,
    pub median_ratio: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub metadata: Metadata,
    pub dim: usize,
    pub hbar_slack: f64,
    pub rows: Vec<ConvergenceRow>,
}

const CONVERGENCE_HEADER: [&str; 8] = ["n", "hbar", "symbol", "value_re", "value_im", "target_re", "target_im", "abs_error"];

impl ConvergenceReport {
    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.hbar),
                    r.symbol.clone(),
                    fmt_f64(r.value.re),
                    fmt_f64(r.value.im),
                    fmt_f64(r.target.re),
                    fmt_f64(r.target.im),
                    fmt_f64(r.error),
                ]
            })
            .collect();
        write_table(out, &self.metadata, &CONVERGENCE_HEADER, &rows)
    }

    /// Reads a report back, checking the `hbar` column against the schedule
    /// and recomputing the error column.
    pub fn read<R: BufRead>(input: R, path: &str) -> Result<Self> {
        let fail = |message: String| CliError::Report { path: path.to_string(), message };
        let mut metadata = Metadata::default();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            match line.strip_prefix("# ") {
                Some(meta) => {
                    let (k, v) = meta.split_once(": ").ok_or_else(|| fail(format!("bad metadata line `{line}`")))?;
                    metadata.push(k, v);
                }
                None => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let dim: usize = metadata
            .get("dim")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fail("missing dim metadata".into()))?;
        let hbar_slack: f64 = metadata.get("hbar_slack").map_or(Ok(0.0), |v| v.parse()).map_err(|_| fail("bad hbar_slack".into()))?;
        let schedule = PlanckSchedule::with_slack(dim, hbar_slack);
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        if reader.headers()?.iter().ne(CONVERGENCE_HEADER) {
            return Err(fail("unexpected header".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let num = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| fail(format!("row {line}: column {} is not a number", CONVERGENCE_HEADER[k])))
            };
            let n: u32 = rec[0].parse().map_err(|_| fail(format!("row {line}: bad n")))?;
            let hbar = num(1)?;
            if hbar != schedule.hbar(n) {
                return Err(fail(format!("row {line}: hbar {hbar} is not the schedule value {}", schedule.hbar(n))));
            }
            let value = C64::new(num(3)?, num(4)?);
            let target = C64::new(num(5)?, num(6)?);
            let error = (value - target).norm();
            if error != num(7)? {
                return Err(fail(format!("row {line}: stored error differs from |value - target| = {error}")));
            }
            rows.push(ConvergenceRow { n, hbar, symbol: rec[2].to_string(), value, target, error });
        }
        Ok(ConvergenceReport { metadata, dim, hbar_slack, rows })
    }

    /// Error column per symbol, in order of first appearance, sorted by n.
    pub fn columns(&self) -> Vec<(String, Vec<(u32, f64)>)> {
        let mut cols: Vec<(String, Vec<(u32, f64)>)> = Vec::new();
        for r in &self.rows {
            match cols.iter_mut().find(|(s, _)| *s == r.symbol) {
                Some((_, c)) => c.push((r.n, r.error)),
                None => cols.push((r.symbol.clone(), vec![(r.n, r.error)])),
            }
        }
        for (_, c) in &mut cols {
            c.sort_by_key(|(n, _)| *n);
        }
        cols
    }

    /// Final error at most `final_tol` and median successive ratio below 1
    /// (columns pinned at the rounding floor pass the trend test).
    pub fn assess(&self, final_tol: f64) -> Vec<ColumnVerdict> {
        self.columns()
            .into_iter()
            .map(|(symbol, col)| {
                let errors: Vec<f64> = col.iter().map(|(_, e)| *e).collect();
                let final_error = *errors.last().unwrap_or(&0.0);
                let median_ratio = median_successive_ratio(&errors);
                let at_floor = errors.iter().all(|e| *e <= ROUNDING_FLOOR);
                let passed = final_error <= final_tol && (median_ratio < 1.0 || at_floor);
                ColumnVerdict { symbol, final_error, median_ratio, passed }
            })
            .collect()
    }
}
