use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linkpred::embed::EmbedMethod;
use linkpred::experiment::{
    cmd_embed, cmd_fixtures, cmd_gain, cmd_run, cmd_stats, cmd_sweep_walklength, DatasetSource,
    ExperimentConfig,
};
use linkpred::Error;

/// Query-centric link prediction with GNN and transductive node features.
#[derive(Parser, Debug)]
#[command(name = "linkpred", version)]
struct Cli {
    /// key = value configuration file; unset keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; replaces the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print |V|, |E|, diameter and query count per dataset.
    Stats {
        /// Edge-list paths or `fixture:NAME`; defaults to the config's datasets.
        datasets: Vec<String>,
    },
    /// Train transductive embeddings on each full dataset graph.
    Embed {
        #[arg(long, default_value = "node2vec")]
        method: String,
    },
    /// Run the architecture × mode × loss × seed grid.
    Run,
    /// Rerun node2vec-augmented training for each walk-length fraction.
    SweepWalklength,
    /// Per-query AP gain of one report over another.
    Gain { ours: PathBuf, baseline: PathBuf },
    /// Write the bundled fixture graphs as edge lists.
    Fixtures,
    /// Print the effective configuration.
    Config,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::Numeric(_) | Error::Shape { .. } => 3,
        _ => 2,
    }
}

fn config(cli: &Cli) -> linkpred::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> linkpred::Result<()> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Stats { datasets } => {
            let sources = if datasets.is_empty() {
                cfg.datasets.clone()
            } else {
                datasets
                    .iter()
                    .map(|d| d.parse())
                    .collect::<linkpred::Result<Vec<DatasetSource>>>()?
            };
            print!("{}", cmd_stats(&sources)?);
        }
        Command::Embed { method } => {
            let method: EmbedMethod = method.parse()?;
            for p in cmd_embed(&cfg, method)? {
                println!("{}", p.display());
            }
        }
        Command::Run => {
            let out = cmd_run(&cfg)?;
            print!("{}", out.summary_map);
        }
        Command::SweepWalklength => {
            cmd_sweep_walklength(&cfg)?;
            print!(
                "{}",
                std::fs::read_to_string(cfg.out.join("sweep_walklength.csv")).unwrap_or_default()
            );
        }
        Command::Gain { ours, baseline } => {
            let g = cmd_gain(ours, baseline, &cfg.out)?;
            println!("positive_fraction={}", g.positive_fraction);
        }
        Command::Fixtures => {
            for p in cmd_fixtures(&cfg.out)? {
                println!("{}", p.display());
            }
        }
        Command::Config => print!("{}", cfg.serialize()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
