//! Real-data analysis: CSV ingestion with cell-level diagnostics, one
//! randomised mirror-statistic run, and a report of the selected features
//! with stage-two confidence intervals.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ndarray::{Array1, Array2};
use serde::Serialize;

use randms_core::datagen::Dataset;
use randms_core::fdrctl::randms_select;

#[derive(Debug, Clone)]
pub struct AnalysisRequest {
    pub input: std::path::PathBuf,
    pub outcome_col: String,
    /// Explicit feature columns; empty means every non-outcome column.
    pub features: Vec<String>,
    pub q: f64,
    pub gamma: f64,
    pub sigma2: Option<f64>,
    pub seed: u64,
    pub log_transform_outcome: bool,
    pub report_multiplicative: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedFeature {
    pub name: String,
    pub coefficient: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicative: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub p: usize,
    pub q: f64,
    pub gamma: f64,
    pub sigma2_used: Option<f64>,
    pub tau: Option<f64>,
    pub n_screened: usize,
    pub n_selected: usize,
    pub selected: Vec<SelectedFeature>,
    pub warnings: Vec<String>,
}

struct Table {
    feature_names: Vec<String>,
    x: Array2<f64>,
    y: Array1<f64>,
}

fn load_table(request: &AnalysisRequest) -> Result<Table> {
    let mut rdr = csv::Reader::from_path(&request.input)
        .with_context(|| format!("cannot read {}", request.input.display()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let outcome_idx = headers
        .iter()
        .position(|h| *h == request.outcome_col)
        .with_context(|| format!("outcome column '{}' not found", request.outcome_col))?;
    let feature_idx: Vec<usize> = if request.features.is_empty() {
        (0..headers.len()).filter(|&i| i != outcome_idx).collect()
    } else {
        request
            .features
            .iter()
            .map(|f| {
                if *f == request.outcome_col {
                    bail!("'{f}' is the outcome column, not a feature");
                }
                headers
                    .iter()
                    .position(|h| h == f)
                    .with_context(|| format!("feature column '{f}' not found"))
            })
            .collect::<Result<_>>()?
    };
    if feature_idx.is_empty() {
        bail!("no feature columns left after removing the outcome");
    }

    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut bad_cells: Vec<String> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row?;
        let mut parse = |col: usize| -> f64 {
            let cell = row.get(col).unwrap_or("");
            match cell.trim() {
                "" => {
                    bad_cells.push(format!("line {line}, column '{}': missing value", headers[col]));
                    f64::NAN
                }
                s => s.parse().unwrap_or_else(|_| {
                    bad_cells.push(format!(
                        "line {line}, column '{}': non-numeric value '{s}'",
                        headers[col]
                    ));
                    f64::NAN
                }),
            }
        };
        y.push(parse(outcome_idx));
        rows.push(feature_idx.iter().map(|&c| parse(c)).collect());
    }
    if !bad_cells.is_empty() {
        let shown = bad_cells.iter().take(20).cloned().collect::<Vec<_>>().join("\n  ");
        let extra = bad_cells.len().saturating_sub(20);
        let suffix = if extra > 0 { format!("\n  ... and {extra} more") } else { String::new() };
        bail!("{} unusable cells:\n  {shown}{suffix}", bad_cells.len());
    }
    let n = rows.len();
    if n < 10 {
        bail!("analysis needs at least 10 rows, got {n}");
    }
    let p = feature_idx.len();
    let mut x = Array2::<f64>::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    Ok(Table {
        feature_names: feature_idx.iter().map(|&c| headers[c].clone()).collect(),
        x,
        y: Array1::from_vec(y),
    })
}

pub fn run(request: &AnalysisRequest) -> Result<AnalysisReport> {
    if !(0.0..1.0).contains(&request.q) || request.q == 0.0 {
        bail!("q must be in (0,1), got {}", request.q);
    }
    let mut table = load_table(request)?;
    if request.log_transform_outcome {
        if let Some(bad) = table.y.iter().find(|v| **v <= 0.0) {
            bail!("--log-outcome requires a strictly positive outcome, found {bad}");
        }
        table.y.mapv_inplace(f64::ln);
    }
    {
        let first = table.y[0];
        if table.y.iter().all(|v| *v == first) {
            bail!("outcome column '{}' is constant", request.outcome_col);
        }
    }
    let dataset = Dataset::new(table.x, table.y)?;
    let result = randms_select(&dataset, request.q, request.gamma, request.sigma2, request.seed)?;

    let stage2 = result.stage2.as_ref();
    let selected = result
        .selected
        .iter()
        .map(|&j| {
            let r = result
                .screened
                .binary_search(&j)
                .expect("selected features are screened");
            let fit = stage2.expect("nonempty selection implies a stage-two fit");
            let (c, lo, hi) = (fit.coefficients[r], fit.ci_lower[r], fit.ci_upper[r]);
            SelectedFeature {
                name: table.feature_names[j].clone(),
                coefficient: c,
                ci_lower: lo,
                ci_upper: hi,
                multiplicative: request
                    .report_multiplicative
                    .then(|| (c.exp(), lo.exp(), hi.exp())),
            }
        })
        .collect();
    Ok(AnalysisReport {
        n: dataset.n(),
        p: dataset.p(),
        q: request.q,
        gamma: request.gamma,
        sigma2_used: result.sigma2_used,
        tau: result.tau,
        n_screened: result.screened.len(),
        n_selected: result.selected.len(),
        selected,
        warnings: result.warnings.clone(),
    })
}

pub fn render(report: &AnalysisReport) -> String {
    let mut out = String::new();
    use std::fmt::Write;
    writeln!(out, "n = {}, p = {}, q = {}, gamma = {}", report.n, report.p, report.q, report.gamma)
        .unwrap();
    if let Some(s) = report.sigma2_used {
        writeln!(out, "sigma2 used for randomisation: {s:.6}").unwrap();
    }
    match report.tau {
        Some(t) => writeln!(out, "selection threshold tau: {t:.6}").unwrap(),
        None => writeln!(out, "selection threshold tau: none (empty selection)").unwrap(),
    }
    writeln!(out, "screened: {} features", report.n_screened).unwrap();
    writeln!(out, "selected: {} features", report.n_selected).unwrap();
    for f in &report.selected {
        match f.multiplicative {
            Some((e, lo, hi)) => {
                writeln!(out, "  {}  {:.2} [{:.2}, {:.2}]", f.name, e, lo, hi).unwrap()
            }
            None => writeln!(
                out,
                "  {}  {:.4} [{:.4}, {:.4}]",
                f.name, f.coefficient, f.ci_lower, f.ci_upper
            )
            .unwrap(),
        }
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    out
}

pub fn write_report(dir: &Path, report: &AnalysisReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("analysis.json");
    std::fs::write(&path, serde_json::to_string_pretty(report)?)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
