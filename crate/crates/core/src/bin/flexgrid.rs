use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flexgrid::bench::{self, BenchConfig, RunReport};
use flexgrid::workload::{self, write_trace, WorkloadSpec};
use flexgrid::{Error, Result};

#[derive(Parser)]
#[command(name = "flexgrid", version, about = "Grid index benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON benchmark config; all fields optional
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the trace against every variant and write curves and report.json
    Run(Common),
    /// Time the self-repairing grid over an alpha x beta threshold grid
    Sweep(Common),
    /// Compare repartition event counts with their bound
    Audit {
        #[command(flatten)]
        common: Common,
        /// Audit an existing report instead of running the config
        #[arg(long, conflicts_with = "config")]
        report: Option<PathBuf>,
        /// Net insert fraction in [0, 1]; estimated from the run when omitted
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Time a search-only trace
    Readonly(Common),
    /// Write a generated trace, and optionally the initial points as CSV
    Gen {
        /// JSON workload spec; all fields optional
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Trace output file
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the initial points to this CSV file
        #[arg(long)]
        initial: Option<PathBuf>,
    },
}

fn load(path: &Option<PathBuf>) -> Result<BenchConfig> {
    match path {
        Some(p) => BenchConfig::load(p),
        None => Ok(BenchConfig::default()),
    }
}

fn load_workload(path: &Path) -> Result<WorkloadSpec> {
    let config_err = |message: String, at: String| Error::Config {
        path: if at.is_empty() || at == "." {
            path.display().to_string()
        } else {
            at
        },
        message,
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| config_err(e.to_string(), String::new()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: WorkloadSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| config_err(e.inner().to_string(), e.path().to_string()))?;
    spec.validate()?;
    Ok(spec)
}

fn print_run(report: &RunReport) {
    println!(
        "{} queries, {} initial points, layout {:?} sorted on axis {}",
        report.queries, report.initial_points, report.partition.counts, report.partition.sort_dim
    );
    for v in &report.variants {
        println!(
            "{:<20} search {:>9.3}s  update {:>9.3}s  events {:>6}  slabs {:?}",
            v.name,
            v.search_seconds,
            v.update_seconds,
            v.events.total(),
            v.final_stats.slab_counts
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let report = bench::run_to_dir(&load(&c.config)?, &c.out)?;
            print_run(&report);
        }
        Command::Sweep(c) => {
            let report = bench::sweep(&load(&c.config)?)?;
            bench::write_sweep(&report, &c.out)?;
            for cell in &report.cells {
                match (cell.search_pct, cell.update_pct) {
                    (Some(s), Some(u)) => {
                        println!(
                            "alpha {:<6} beta {:<8.4} search {:+7.2}%  update {:+7.2}%",
                            cell.alpha, cell.beta, s, u
                        )
                    }
                    _ => println!("alpha {:<6} beta {:<8.4} invalid", cell.alpha, cell.beta),
                }
            }
        }
        Command::Audit {
            common,
            report,
            delta,
        } => {
            let run = match report {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    serde_json::from_str(&text).map_err(|e| Error::Config {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?
                }
                None => bench::run_to_dir(&load(&common.config)?, &common.out)?,
            };
            let audit = bench::audit(&run, delta)?;
            std::fs::create_dir_all(&common.out)?;
            std::fs::write(
                common.out.join("audit.json"),
                serde_json::to_string_pretty(&audit).map_err(|e| Error::Io(e.into()))?,
            )?;
            for v in &audit.variants {
                for a in &v.axes {
                    println!(
                        "{:<20} axis {} events {:>6} bound {:>10.1} {}",
                        v.name,
                        a.axis,
                        a.events,
                        a.bound,
                        if a.within { "ok" } else { "EXCEEDED" }
                    );
                }
                println!(
                    "{:<20} ops/update/(D log2 N) {:.4} (halves {:.4}, {:.4})",
                    v.name, v.amortized_constant, v.half_constants[0], v.half_constants[1]
                );
            }
            println!("{}", if audit.pass { "PASS" } else { "FAIL" });
        }
        Command::Readonly(c) => {
            let report = bench::readonly(&load(&c.config)?)?;
            for v in &report.variants {
                println!(
                    "{:<20} mean {:>10.3}us over {} searches",
                    v.name,
                    v.mean_seconds * 1e6,
                    v.searches
                );
            }
            bench::write_readonly(&report, &c.out)?;
        }
        Command::Gen { spec, out, initial } => {
            let spec = match spec {
                Some(path) => load_workload(&path)?,
                None => WorkloadSpec::default(),
            };
            let config = BenchConfig {
                workload: spec,
                ..BenchConfig::default()
            };
            let prepared = bench::prepare(&config)?;
            write_trace(&out, &prepared.trace)?;
            if let Some(path) = initial {
                workload::write_csv(&path, &prepared.initial)?;
            }
            println!(
                "wrote {} queries to {}",
                prepared.trace.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
