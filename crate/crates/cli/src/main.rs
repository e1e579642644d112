use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use billboard_core::domain::TimeInterval;
use billboard_core::error::Error;
use billboard_core::experiment::{
    read_records, run_sweep, solve, summarize, verify_record, write_records_jsonl, write_sweep_csv, Algorithm,
    ExperimentConfig, RunParams, RunRecord,
};
use billboard_core::ingest::{
    assemble_instance, generate_synthetic, instance_digest, load_billboards, load_instance, load_probabilities,
    load_tags, load_trajectories, save_instance, IngestConfig, ProbMode, RawDataset, SyntheticSpec,
};
use billboard_core::solvers::DEFAULT_EXHAUSTIVE_CAP;
use billboard_core::validate_instance;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "billboard", version, about = "Select billboard slots and ad tags that maximize expected influence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic instance as JSON.
    Generate {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        users: u64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        billboards: u64,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        tags: u64,
        #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
        tuples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tag weight skew; larger values concentrate weight on a few tags.
        #[arg(long, default_value_t = 2.0)]
        skew: f64,
        #[arg(long, default_value_t = 0)]
        t1: u64,
        #[arg(long, default_value_t = 99)]
        t2: u64,
        /// Slot duration in time units.
        #[arg(long, default_value_t = 25)]
        delta: u64,
        /// Visibility radius in metres.
        #[arg(long, default_value_t = 100.0)]
        lambda: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build an instance JSON from trajectory, billboard and tag CSV files.
    Build {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        billboards: PathBuf,
        #[arg(long)]
        tags: PathBuf,
        /// Explicit probabilities; without it, panel sizes set the base probabilities.
        #[arg(long)]
        probs: Option<PathBuf>,
        #[arg(long)]
        t1: u64,
        #[arg(long)]
        t2: u64,
        #[arg(long)]
        delta: u64,
        #[arg(long, default_value_t = 100.0)]
        lambda: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run one algorithm and print a JSON run record.
    Solve {
        instance: PathBuf,
        /// exhaustive, greedy-incremental, greedy-lazy, greedy-stochastic or baseline:<kind>
        #[arg(long, default_value = "greedy-lazy")]
        algo: String,
        #[arg(short)]
        k: usize,
        #[arg(short)]
        l: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of candidate pairs exhaustive search may visit.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: u128,
    },
    /// Run a parameter sweep described by a key-value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Results CSV.
        #[arg(long)]
        out: PathBuf,
        /// Per-cell means as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Full run records, one JSON object per line.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Recompute the influence of stored run records.
    Verify { instance: PathBuf, records: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate {
            users,
            billboards,
            tags,
            tuples,
            seed,
            skew,
            t1,
            t2,
            delta,
            lambda,
            out,
        } => {
            let spec = SyntheticSpec {
                n_users: users as usize,
                n_billboards: billboards as usize,
                n_tags: tags as usize,
                n_tuples: tuples as usize,
                seed,
                tag_skew: skew,
                horizon: TimeInterval::new(t1, t2)?,
                slot_duration: delta,
                lambda_m: lambda,
                ..SyntheticSpec::default()
            };
            let instance = generate_synthetic(&spec)?;
            save_instance(&instance, &out)?;
            println!("{}", instance_digest(&instance)?);
        }
        Command::Build {
            trajectories,
            billboards,
            tags,
            probs,
            t1,
            t2,
            delta,
            lambda,
            out,
        } => {
            let raw = RawDataset::from_parts(
                load_trajectories(&trajectories)?,
                load_billboards(&billboards)?,
                load_tags(&tags)?,
            );
            let explicit = probs.as_ref().map(load_probabilities).transpose()?;
            let config = IngestConfig {
                horizon: TimeInterval::new(t1, t2)?,
                slot_duration: delta,
                lambda_m: lambda,
                prob_mode: if explicit.is_some() {
                    ProbMode::ExplicitFile
                } else {
                    ProbMode::PanelSizeBase
                },
            };
            let instance = assemble_instance(&raw, &config, explicit.as_deref())?;
            save_instance(&instance, &out)?;
            println!("{}", instance_digest(&instance)?);
        }
        Command::Solve {
            instance,
            algo,
            k,
            l,
            epsilon,
            seed,
            cap,
        } => {
            let algorithm: Algorithm = algo.parse()?;
            let instance = load_instance(&instance)?;
            let problems = validate_instance(&instance);
            if let Some(p) = problems.first() {
                return Err(Error::InvalidInstance(p.to_string()));
            }
            let params = RunParams {
                k,
                l,
                epsilon,
                seed,
                cap,
            };
            let result = solve(&instance, algorithm, &params)?;
            let run_id = format!("{algorithm}/k{k}/l{l}/e{epsilon}/s{seed}");
            let record = RunRecord::new(run_id, algorithm, &params, &instance, &result, instance_digest(&instance)?);
            println!("{}", serde_json::to_string(&record)?);
        }
        Command::Sweep {
            config,
            out,
            summary,
            records,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let output = run_sweep(&config)?;
            let mut csv = BufWriter::new(File::create(&out)?);
            write_sweep_csv(&mut csv, &output)?;
            csv.flush()?;
            if let Some(path) = summary {
                let mut w = BufWriter::new(File::create(path)?);
                serde_json::to_writer_pretty(&mut w, &summarize(&output))?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
            if let Some(path) = records {
                let mut w = BufWriter::new(File::create(path)?);
                write_records_jsonl(&mut w, output.records())?;
                w.flush()?;
            }
            let failures: Vec<_> = output.failures().collect();
            for (id, e) in &failures {
                eprintln!("failed: {id}: {e}");
            }
            if !failures.is_empty() {
                eprintln!("{} of {} runs failed", failures.len(), output.rows.len());
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { instance, records } => {
            let instance = load_instance(&instance)?;
            let digest = instance_digest(&instance)?;
            let records = read_records(&std::fs::read_to_string(&records)?)?;
            let mut failed = 0;
            for record in &records {
                let outcome = verify_record(&instance, &digest, record);
                if outcome.passed() {
                    println!("PASS {} delta={:e}", outcome.run_id, outcome.delta.unwrap_or(0.0));
                } else {
                    failed += 1;
                    println!("FAIL {}: {}", outcome.run_id, outcome.problems.join("; "));
                }
            }
            println!("{} of {} records passed", records.len() - failed, records.len());
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
