mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{EnvSpec, Mode, RunConfig};

/// Drum-Buffer-Rope flow shop simulator with simulation budget management.
#[derive(Parser, Debug)]
#[command(name = "dbr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one replication and print its cost breakdown.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// CCR-Buffer.
        #[arg(long = "c")]
        c: u32,
        /// Shipping-Buffer.
        #[arg(long = "s")]
        s: u32,
        /// Write the event and schedule traces to the output directory.
        #[arg(long)]
        trace: bool,
    },
    /// Sweep the buffer grid for every environment and method.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

/// Flags that override the config file.
#[derive(Args, Debug)]
struct Common {
    /// TOML config; every field defaults to the base model.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment as shop_load:cv, repeatable or comma separated.
    #[arg(long = "env", value_delimiter = ',')]
    envs: Vec<EnvSpec>,
    /// Methods, e.g. FF,S1,S4.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Master seed (sweep) or replication seed (simulate).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    warmup: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "parallel")]
    reproducible: bool,
    #[arg(long)]
    parallel: bool,
}

impl Common {
    fn apply(self) -> Result<RunConfig, config::ConfigError> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        let x = &mut cfg.experiment;
        if !self.envs.is_empty() {
            x.environments = self.envs;
        }
        if !self.methods.is_empty() {
            x.methods = self.methods;
        }
        if let Some(v) = self.seed {
            x.master_seed = v;
        }
        if let Some(v) = self.replications {
            x.replications = v;
        }
        if let Some(v) = self.horizon {
            x.horizon = v;
        }
        if let Some(v) = self.warmup {
            x.warmup = v;
        }
        if self.reproducible {
            x.mode = Mode::Reproducible;
        }
        if self.parallel {
            x.mode = Mode::Parallel;
        }
        if let Some(v) = self.out {
            cfg.output_dir = v;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Simulate { common, c, s, trace } => common
            .apply()
            .map_err(commands::Failure::Config)
            .and_then(|cfg| commands::simulate(&cfg, c, s, trace)),
        Command::Sweep { common } => common
            .apply()
            .map_err(commands::Failure::Config)
            .and_then(|cfg| commands::sweep(&cfg)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(commands::Failure::Runtime(e)) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(2)
        }
    }
}
