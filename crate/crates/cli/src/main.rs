use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use evirank_core::io::write_records;
use evirank_core::report::{main_table, Row};
use evirank_core::{read_benchmark, write_benchmark, Source};
use evirank_ingest::{benchmark_stats, ingest, sample_benchmark, SampleError, SamplingConstraints};
use evirank_study::{analyze_dir, StudyMaterials, StudyService, SystemClock};
use evirank_cli::{render_run, run_eval, score_rankings, RunConfig};
use serde::Serialize;

/// Evidence ranking evaluation.
#[derive(Parser)]
#[command(name = "evirank", version)]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank a benchmark with every configured strategy and render the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Reuse rankings already present in the output directory.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-render the report of an existing run directory.
    Report { dir: PathBuf },
    /// Score a rankings file against a benchmark.
    Score {
        #[arg(long)]
        rankings: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        /// Write per-instance scores here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a source dataset dump to benchmark records.
    Ingest {
        #[arg(long, value_parser = parse_source)]
        source: Source,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a stratified benchmark sample.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Print per-source benchmark statistics.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Verification study service.
    Study {
        #[command(subcommand)]
        command: StudyCommand,
    },
}

#[derive(Subcommand)]
enum StudyCommand {
    Serve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        rankings: PathBuf,
        #[arg(long)]
        selections: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Directory with the browser UI, served under /ui.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Print the per-condition report of a study directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn parse_source(s: &str) -> Result<Source, String> {
    s.parse::<Source>().map_err(|e| e.to_string())
}

/// Finished with everything done, or with some work left undone.
enum Status {
    Complete,
    Partial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    match dispatch(cli.command) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn dispatch(command: Command) -> Result<Status> {
    match command {
        Command::Run { config, resume, parallelism, output } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.resume |= resume;
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            if let Some(o) = output {
                cfg.output = o;
            }
            let outcome = run_eval(&cfg)?;
            print!("{}", outcome.report.main);
            for (s, o) in &outcome.strategies {
                if o.failed > 0 {
                    eprintln!("{}: {} of {} instances failed", s.as_str(), o.failed, outcome.instances);
                }
            }
            Ok(if outcome.is_complete() { Status::Complete } else { Status::Partial })
        }
        Command::Report { dir } => {
            let r = render_run(&dir)?;
            print!("{}", r.main);
            Ok(Status::Complete)
        }
        Command::Score { rankings, benchmark, out } => {
            let scored = score_rankings(&rankings, &benchmark)?;
            let rows: Vec<Row<'_>> = scored.iter().map(|s| Row { label: &s.strategy, report: &s.report }).collect();
            print!("{}", main_table(&rows));
            if let Some(out) = out {
                #[derive(Serialize)]
                struct Line<'a> {
                    strategy: &'a str,
                    #[serde(flatten)]
                    score: &'a evirank_core::InstanceScore,
                }
                let lines: Vec<Line<'_>> = scored
                    .iter()
                    .flat_map(|s| s.scores.iter().map(|score| Line { strategy: &s.strategy, score }))
                    .collect();
                write_records(&out, &lines)?;
            }
            Ok(Status::Complete)
        }
        Command::Ingest { source, input, out } => {
            let (instances, report) = ingest(source, &input)?;
            report.log();
            write_benchmark(&instances, &out)?;
            eprintln!("{}: kept {} of {} records", source.as_str(), report.kept, report.read);
            Ok(Status::Complete)
        }
        Command::Sample { config, out, manifest } => {
            let constraints = SamplingConstraints::load(&config)?;
            let mut pool = Vec::new();
            for (name, target) in &constraints.sources {
                let path = target
                    .pool
                    .as_ref()
                    .with_context(|| format!("source {name} has no pool file"))?;
                pool.extend(read_benchmark(path).with_context(|| format!("reading {}", path.display()))?);
            }
            match sample_benchmark(&pool, &constraints) {
                Ok(sample) => {
                    write_benchmark(&sample.instances, &out)?;
                    if let Some(m) = &manifest {
                        write_json(m, &sample.manifest)?;
                    }
                    Ok(if sample.manifest.feasible { Status::Complete } else { Status::Partial })
                }
                Err(SampleError::Infeasible(m)) => {
                    if let Some(path) = &manifest {
                        write_json(path, &m)?;
                    }
                    for s in &m.shortfalls {
                        eprintln!("{} needs {} but {} available", s.stratum, s.target, s.available);
                    }
                    anyhow::bail!("sampling constraints cannot be met")
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Stats { input } => {
            let instances = read_benchmark(&input)?;
            print!("{}", benchmark_stats(&instances).render());
            Ok(Status::Complete)
        }
        Command::Study { command } => match command {
            StudyCommand::Serve { data, benchmark, rankings, selections, bind, static_dir } => {
                let materials = StudyMaterials::load(&benchmark, &rankings, &selections)?;
                let svc = StudyService::open(&data, materials, Arc::new(SystemClock))?;
                let app = evirank_study::http::router(Arc::new(svc), static_dir);
                let rt = tokio::runtime::Runtime::new()?;
                rt.block_on(async {
                    let listener = tokio::net::TcpListener::bind(&bind).await?;
                    evirank_study::http::serve(listener, app).await
                })?;
                Ok(Status::Complete)
            }
            StudyCommand::Report { dir } => {
                print!("{}", analyze_dir(&dir)?.table);
                Ok(Status::Complete)
            }
        },
    }
}
