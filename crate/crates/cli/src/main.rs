use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use holonomic_optics_cli::{run, CliError, ExperimentConfig, Format, Suite};

/// Runs one verification suite or experiment.
#[derive(Debug, Parser)]
#[command(name = "holoptics", version)]
struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cutoff: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn load(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if args.suite.is_some() {
        cfg.suite = args.suite;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.cutoff.is_some() {
        cfg.cutoff = args.cutoff;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let cfg = load(args)?;
    let report = run(&cfg)?;
    match &cfg.out {
        Some(path) => {
            report.write(cfg.format, BufWriter::new(File::create(path)?))?;
            print!("{}", report.summary());
        }
        None => {
            report.write(cfg.format, io::stdout().lock())?;
            eprint!("{}", report.summary());
        }
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
