//! `randms`: simulation studies, real-data analyses and benchmarks for
//! FDR-controlled variable selection with the randomised mirror statistic.

mod analyze;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use randms_core::harness::{self, Method, RunRecord};
use randms_core::memtrack::CountingAllocator;

#[global_allocator]
static ALLOCATOR: CountingAllocator = CountingAllocator;

const THREADS_ENV: &str = "RANDMS_THREADS";

#[derive(Parser)]
#[command(name = "randms", version, about = "FDR-controlled variable selection via outcome randomisation and the mirror statistic")]
struct Cli {
    /// Worker threads (default: all cores; RANDMS_THREADS overrides the
    /// default when the flag is absent)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation study from a JSON config or bundled preset
    Simulate {
        /// Config file path, or a preset name: paper_replication, appendix_sigma
        #[arg(long)]
        config: String,
        /// Output directory for records.csv and summary.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Select features from a CSV of covariates and a continuous outcome
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Name of the outcome column
        #[arg(long)]
        outcome_col: String,
        /// Comma-separated feature columns (default: all other columns)
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        /// FDR target level
        #[arg(long, default_value_t = 0.1)]
        q: f64,
        /// Randomisation parameter
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Fixed residual variance (default: estimated from the data)
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Apply a natural-log transform to the outcome before analysis
        #[arg(long)]
        log_outcome: bool,
        /// Report exponentiated coefficients and intervals
        #[arg(long)]
        multiplicative: bool,
        /// Optional directory for analysis.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time and memory ladder comparing one RandMS run against MDS
    Benchmark {
        /// Comma-separated problem sizes
        #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 2000, 5000, 10000])]
        p_values: Vec<usize>,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        p1: usize,
        /// Data splits per MDS run
        #[arg(long, default_value_t = 50)]
        splits: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 20240604)]
        seed: u64,
        /// Output directory for records.csv and benchmark_table.csv
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.parse()
                    .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            bail!("thread count must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("cannot configure thread pool")?;
    }
    Ok(())
}

fn cmd_simulate(config_arg: &str, out: &PathBuf) -> Result<()> {
    let config = config::load_config(config_arg)?;
    let scenarios = config.expand()?;
    if scenarios.is_empty() {
        bail!("no scenarios in config '{config_arg}'");
    }
    std::fs::create_dir_all(out)?;
    let records_path = out.join("records.csv");

    // records.csv grows scenario by scenario so an interrupted run keeps
    // everything finished so far
    let mut all_records: Vec<RunRecord> = Vec::new();
    for scenario in &scenarios {
        let records = harness::run_scenario(scenario)?;
        all_records.extend(records);
        output::write_records(&records_path, &all_records)?;
        for method in &scenario.methods {
            let cell: Vec<&RunRecord> = all_records
                .iter()
                .filter(|r| r.scenario_id == scenario.id && r.method == *method)
                .collect();
            let ok: Vec<&&RunRecord> = cell.iter().filter(|r| r.is_ok()).collect();
            if ok.is_empty() {
                println!(
                    "{} {}: all {} repetitions failed",
                    scenario.id,
                    method.label(),
                    cell.len()
                );
                continue;
            }
            let mean = |f: &dyn Fn(&RunRecord) -> f64| {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            };
            println!(
                "{} {}: FDR {:.3}, TPR {:.3}, mean selected {:.1}, {}/{} ok",
                scenario.id,
                method.label(),
                mean(&|r| r.fdp.unwrap_or(0.0)),
                mean(&|r| r.tpr.unwrap_or(0.0)),
                mean(&|r| r.n_selected.unwrap_or(0) as f64),
                ok.len(),
                cell.len()
            );
        }
    }
    let summary = output::summarize_records(&all_records)?;
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

fn cmd_benchmark(
    p_values: &[usize],
    n: usize,
    p1: usize,
    splits: usize,
    repetitions: usize,
    seed: u64,
    out: &PathBuf,
) -> Result<()> {
    if p_values.is_empty() {
        bail!("benchmark needs at least one p value");
    }
    std::fs::create_dir_all(out)?;
    let bench = harness::benchmark(p_values, n, p1, splits, repetitions, seed)?;

    // records.csv in the documented schema, with timing and memory filled in
    let records: Vec<RunRecord> = bench
        .iter()
        .map(|b| RunRecord {
            scenario_id: format!("benchmark[p={}]", b.p),
            method: b.method,
            rep: b.rep,
            seed,
            fdp: None,
            tpr: None,
            n_selected: None,
            sigma2_used: None,
            tau: None,
            wall_time_s: b.wall_time_s,
            peak_mem_bytes: Some(b.alloc_peak_bytes),
            status: "ok".to_string(),
            lasso_tpr: None,
            nulls_above_tau: None,
            nulls_below_tau: None,
        })
        .collect();
    output::write_records(&out.join("records.csv"), &records)?;

    // plot-ready table: one row per (p, method) with both memory readings
    let table_path = out.join("benchmark_table.csv");
    let mut w = csv::Writer::from_path(&table_path)?;
    w.write_record([
        "p",
        "method",
        "mean_wall_time_s",
        "mean_peak_mem_bytes",
        "mean_alloc_total_bytes",
        "mem_method",
    ])?;
    for &p in p_values {
        for method in [Method::RandMs, Method::Mds] {
            let rows: Vec<_> = bench.iter().filter(|b| b.p == p && b.method == method).collect();
            let k = rows.len() as f64;
            let mean_time = rows.iter().map(|b| b.wall_time_s).sum::<f64>() / k;
            let mean_peak = rows.iter().map(|b| b.alloc_peak_bytes as f64).sum::<f64>() / k;
            let mean_total = rows.iter().map(|b| b.alloc_total_bytes as f64).sum::<f64>() / k;
            w.write_record([
                p.to_string(),
                method.label().to_string(),
                mean_time.to_string(),
                mean_peak.to_string(),
                mean_total.to_string(),
                rows[0].mem_method.clone(),
            ])?;
            println!(
                "p={p} {}: {:.2}s, peak {:.1} MB, allocated {:.1} MB",
                method.label(),
                mean_time,
                mean_peak / 1048576.0,
                mean_total / 1048576.0
            );
        }
    }
    w.flush()?;
    Ok(())
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
    let result = match &cli.command {
        Command::Simulate { config, out } => cmd_simulate(config, out),
        Command::Analyze {
            input,
            outcome_col,
            features,
            q,
            gamma,
            sigma2,
            seed,
            log_outcome,
            multiplicative,
            out,
        } => {
            let request = analyze::AnalysisRequest {
                input: input.clone(),
                outcome_col: outcome_col.clone(),
                features: features.clone(),
                q: *q,
                gamma: *gamma,
                sigma2: *sigma2,
                seed: *seed,
                log_transform_outcome: *log_outcome,
                report_multiplicative: *multiplicative,
            };
            analyze::run(&request).and_then(|report| {
                print!("{}", analyze::render(&report));
                if let Some(dir) = out {
                    analyze::write_report(dir, &report)?;
                }
                Ok(())
            })
        }
        Command::Benchmark {
            p_values,
            n,
            p1,
            splits,
            repetitions,
            seed,
            out,
        } => cmd_benchmark(p_values, *n, *p1, *splits, *repetitions, *seed, out),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
