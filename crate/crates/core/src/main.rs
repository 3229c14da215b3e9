use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mbsc::cache;
use mbsc::config::{load_config, ExperimentConfig};
use mbsc::experiment;
use mbsc::ldpc::save_alist;
use mbsc::par;

/// Multi-BSC Slepian-Wolf simulator.
#[derive(Parser)]
#[command(name = "mbsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate per-bit-plane crossover probabilities over the profile grid.
    Profile(Common),
    /// Run decoding schemes over the sweep grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Keep completed grid points from an existing output file.
        #[arg(long)]
        resume: bool,
    },
    /// Build or load the configured code and report its statistics.
    Code(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides `run.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted. For `code`, the alist is copied here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frames per grid point (overrides `run.frames`; unused by `profile` and `code`).
    #[arg(long)]
    frames: Option<u64>,
    /// Worker threads, 0 = all cores (overrides `run.workers`).
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> mbsc::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(frames) = self.frames {
            cfg.frames = frames;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        cfg.revalidate()?;
        Ok(cfg)
    }
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    })
}

fn run(cli: Cli) -> mbsc::Result<()> {
    match cli.command {
        Command::Profile(common) => {
            let cfg = common.config()?;
            experiment::write_profile(&cfg, open_out(common.out.as_deref())?)
        }
        Command::Sweep { common, resume } => {
            let cfg = common.config()?;
            let existing = match (&common.out, resume) {
                (Some(p), true) if p.exists() => Some(std::fs::read_to_string(p)?),
                _ => None,
            };
            let cached = experiment::configured_code(&cfg, &cache::cache_dir())?;
            experiment::write_sweep(&cfg, &cached.code, open_out(common.out.as_deref())?, existing.as_deref())
        }
        Command::Code(common) => {
            let cfg = common.config()?;
            let cached = experiment::configured_code(&cfg, &cache::cache_dir())?;
            if let Some(path) = &common.out {
                std::fs::write(path, save_alist(&cached.code))?;
            }
            let report = par::with_workers(cfg.workers, || experiment::code_report(&cfg, &cached));
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
