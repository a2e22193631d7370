use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qlogad::harness::{
    self, emit_reports, execute, preset, run_sweep, ExperimentConfig, TrainedModel,
};
use qlogad::logpipe::{
    load_dataset, parse_lines, read_raw_log, write_parsed, DrainConfig, LogFormat,
};
use qlogad::Result;

/// Hybrid quantum-classical log anomaly detection.
#[derive(Parser)]
#[command(name = "qlogad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine templates from a raw log and write the parsed CSV plus a templates sidecar.
    Parse {
        raw: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// bgl, thunderbird, spirit or fields:N
        #[arg(long, default_value = "bgl")]
        format: LogFormat,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 0.4)]
        similarity: f64,
    },
    /// Train one experiment config; writes a checkpoint and reports.
    Train {
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Score a raw log or parsed CSV with a saved checkpoint.
    Eval {
        checkpoint: PathBuf,
        data: PathBuf,
        #[arg(long, default_value = "bgl")]
        format: LogFormat,
    },
    /// Run a preset grid (rq1 ... rq6) or a single config file.
    Experiment {
        target: String,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Print the parameter accounting of a checkpoint.
    ReportParams { checkpoint: PathBuf },
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_config_str(&fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse {
            raw,
            output,
            format,
            depth,
            similarity,
        } => {
            let drain = DrainConfig {
                depth,
                sim_threshold: similarity,
                ..DrainConfig::default()
            };
            let parsed = parse_lines(&read_raw_log(&raw, format)?, drain)?;
            write_parsed(&output, &parsed)?;
            println!(
                "{} lines, {} templates -> {}",
                parsed.records.len(),
                parsed.templates.len(),
                output.display()
            );
        }
        Command::Train { config, output } => {
            let cfg = read_config(&config)?;
            println!(
                "training {} on {}",
                cfg.name,
                harness::describe_dataset(&cfg.dataset)
            );
            let run = execute(&cfg)?;
            fs::create_dir_all(&output)?;
            let ckpt = output.join(format!("{}.ckpt", harness::file_stem(&cfg.name)));
            run.trained.save(&ckpt)?;
            emit_reports(std::slice::from_ref(&run.result), &output)?;
            println!("{}", run.result.metrics());
            println!("checkpoint: {}", ckpt.display());
        }
        Command::Eval {
            checkpoint,
            data,
            format,
        } => {
            let trained = TrainedModel::load(&checkpoint)?;
            let parsed = load_dataset(&data, format, DrainConfig::default())?;
            let e = trained.evaluate_log(&parsed)?;
            let c = e.counts;
            println!(
                "tp={} fp={} tn={} fn={} skipped={}",
                c.tp, c.fp, c.tn, c.fn_, e.skipped
            );
            println!("{}", e.metrics);
        }
        Command::Experiment { target, output } => {
            let cfgs = if harness::PRESETS.contains(&target.as_str()) {
                preset(&target)?
            } else {
                vec![read_config(Path::new(&target))?]
            };
            let results = run_sweep(&cfgs)?;
            emit_reports(&results, &output)?;
            print!("{}", harness::results_table(&results));
            println!("reports written to {}", output.display());
        }
        Command::ReportParams { checkpoint } => {
            let trained = TrainedModel::load(&checkpoint)?;
            println!("{}: {}", trained.spec.display_name(), trained.params());
            for (part, rep) in trained.model.component_reports() {
                println!("  {part:<14} {rep}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
