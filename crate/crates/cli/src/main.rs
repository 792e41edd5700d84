use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use momentgap_core::experiment::{self, list_registry};
use momentgap_core::Error;

#[derive(Parser)]
#[command(
    name = "momentgap",
    version,
    about = "Moment-gap experiments for surrogate models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config against the schema without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an experiment and write its outputs.
    Run(RunArgs),
    /// Print the catalog of functionals, distributions, nets and true functions.
    Registry {
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`, then `./out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_plots: bool,
}

fn report(e: &Error) {
    match e {
        Error::Invalid(violations) => {
            eprintln!("error: {e}");
            for v in violations {
                eprintln!("  {v}");
            }
        }
        _ => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
        }
    }
}

fn run(args: RunArgs) -> momentgap_core::Result<()> {
    let mut cfg = experiment::load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        cfg.set_workers(w);
    }
    if args.no_plots {
        cfg.plots = false;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    log::info!(
        "running {} with seed {}",
        cfg.experiment.kind(),
        cfg.master_seed
    );
    let manifest = experiment::run(&cfg, &out)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, out.join(&f.name).display());
    }
    println!("wrote {}", out.join(experiment::MANIFEST_NAME).display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => match experiment::validate_config(&config) {
            Ok(v) if v.is_empty() => {
                println!("ok");
                return ExitCode::SUCCESS;
            }
            Ok(v) => {
                for violation in &v {
                    println!("{violation}");
                }
                return ExitCode::from(1);
            }
            Err(e) => Err(e),
        },
        Command::Run(args) => run(args),
        Command::Registry { json } => {
            let reg = list_registry();
            if json {
                match serde_json::to_string_pretty(&reg) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                for e in &reg {
                    println!("{:<16} {:<24} {}", e.category, e.name, e.description);
                }
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}
