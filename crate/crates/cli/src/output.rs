//! Serialization of run records: the fixed-schema records.csv, the summary
//! JSON, and the reader used to verify round trips.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use randms_core::harness::{Method, RunRecord};
use randms_core::metrics::{summarize, MetricSummary};

pub const RECORDS_HEADER: [&str; 12] = [
    "scenario_id",
    "method",
    "rep",
    "seed",
    "fdp",
    "tpr",
    "n_selected",
    "sigma2_used",
    "tau",
    "wall_time_s",
    "peak_mem_bytes",
    "status",
];

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records.csv with the documented header. Floats use the shortest
/// exact decimal representation, so a re-read reproduces them bit for bit.
pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.scenario_id.as_str(),
            r.method.label(),
            &r.rep.to_string(),
            &r.seed.to_string(),
            &opt_f64(r.fdp),
            &opt_f64(r.tpr),
            &opt_usize(r.n_selected),
            &opt_f64(r.sigma2_used),
            &opt_f64(r.tau),
            &r.wall_time_s.to_string(),
            &opt_u64(r.peak_mem_bytes),
            &r.status,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
fn parse_opt<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    match field.parse() {
        Ok(v) => Ok(Some(v)),
        Err(_) => bail!("records.csv line {line}: cannot parse column '{name}' value '{field}'"),
    }
}

#[cfg(test)]
fn parse_req<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    match field.parse() {
        Ok(v) => Ok(v),
        Err(_) => bail!("records.csv line {line}: cannot parse column '{name}' value '{field}'"),
    }
}

/// Exact-round-trip reader for records.csv, used to verify serialization.
#[cfg(test)]
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    {
        let headers = rdr.headers()?;
        let expected: Vec<&str> = RECORDS_HEADER.to_vec();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            bail!("records.csv header mismatch: got {got:?}");
        }
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row?;
        if row.len() != RECORDS_HEADER.len() {
            bail!("records.csv line {line}: expected {} fields, got {}", RECORDS_HEADER.len(), row.len());
        }
        let method = match &row[1] {
            "RandMS" => Method::RandMs,
            "DS" => Method::Ds,
            "MDS" => Method::Mds,
            other => bail!("records.csv line {line}: unknown method '{other}'"),
        };
        out.push(RunRecord {
            scenario_id: row[0].to_string(),
            method,
            rep: parse_req(&row[2], "rep", line)?,
            seed: parse_req(&row[3], "seed", line)?,
            fdp: parse_opt(&row[4], "fdp", line)?,
            tpr: parse_opt(&row[5], "tpr", line)?,
            n_selected: parse_opt(&row[6], "n_selected", line)?,
            sigma2_used: parse_opt(&row[7], "sigma2_used", line)?,
            tau: parse_opt(&row[8], "tau", line)?,
            wall_time_s: parse_req(&row[9], "wall_time_s", line)?,
            peak_mem_bytes: parse_opt(&row[10], "peak_mem_bytes", line)?,
            status: row[11].to_string(),
            lasso_tpr: None,
            nulls_above_tau: None,
            nulls_below_tau: None,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub scenario_id: String,
    pub method: String,
    pub repetitions: usize,
    pub failures: usize,
    pub fdr: MetricSummary,
    pub tpr: MetricSummary,
    pub n_selected: MetricSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_sigma2_used: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub cells: Vec<CellSummary>,
}

/// Aggregates records per (scenario, method) in first-seen order. Failed
/// repetitions count toward totals and are excluded from the statistics.
pub fn summarize_records(records: &[RunRecord]) -> Result<Summary> {
    let mut order: Vec<(String, Method)> = Vec::new();
    for r in records {
        let key = (r.scenario_id.clone(), r.method);
        if !order.contains(&key) {
            order.push(key);
        }
    }
    let mut cells = Vec::new();
    for (id, method) in order {
        let cell: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.scenario_id == id && r.method == method)
            .collect();
        let ok: Vec<&&RunRecord> = cell.iter().filter(|r| r.is_ok()).collect();
        if ok.is_empty() {
            bail!("scenario '{id}' method {} has no successful repetitions", method.label());
        }
        let collect = |f: &dyn Fn(&RunRecord) -> f64| -> Vec<f64> { ok.iter().map(|r| f(r)).collect() };
        let sigma: Vec<f64> = ok.iter().filter_map(|r| r.sigma2_used).collect();
        cells.push(CellSummary {
            scenario_id: id,
            method: method.label().to_string(),
            repetitions: cell.len(),
            failures: cell.len() - ok.len(),
            fdr: summarize(&collect(&|r| r.fdp.unwrap_or(0.0)))?,
            tpr: summarize(&collect(&|r| r.tpr.unwrap_or(0.0)))?,
            n_selected: summarize(&collect(&|r| r.n_selected.unwrap_or(0) as f64))?,
            mean_sigma2_used: if sigma.is_empty() {
                None
            } else {
                Some(sigma.iter().sum::<f64>() / sigma.len() as f64)
            },
        });
    }
    Ok(Summary {
        schema_version: crate::config::SCHEMA_VERSION,
        cells,
    })
}
