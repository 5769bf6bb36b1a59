use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plap_cli::{run_check, run_experiment, write_run, ConfigError, Experiment, RunConfig, EXIT_CONFIG};
use plap_core::DomainSpec;

#[derive(Parser)]
#[command(name = "plap", version, about = "Dirichlet p-Laplacian eigenvalue experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state of the configured domain.
    Eig(Common),
    /// Upper bound for the k-th minmax level from disjoint pieces.
    Lsbound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Table of exterior ground states estimating the threshold at infinity.
    Epinf(Common),
    /// Decay fit, theoretical rate and cut-off energy checks.
    Decay(Common),
    /// Sweep of the confining-potential perturbation.
    Perturb(Common),
    /// Gap certificate for the k-th level.
    Gap(Common),
    /// Invariant self-check.
    Check {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// TOML file holding only the domain table, overriding the config's.
    #[arg(long)]
    domain_file: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
            text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?
        }
        None => toml::Table::new(),
    };
    if let Some(path) = &common.domain_file {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let domain: DomainSpec = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        table.insert("domain".into(), toml::Value::try_from(domain).expect("domain serialises"));
    }
    if let Some(p) = common.p {
        table.insert("p".into(), toml::Value::Float(p));
    }
    if let Some(h) = common.h {
        table.insert("h".into(), toml::Value::Float(h));
    }
    let mut cfg = RunConfig::from_toml(&toml::to_string(&table).expect("table serialises"))?;
    if let Some(seed) = common.seed {
        cfg.solver.seed = seed;
    }
    Ok(cfg)
}

fn configure_threads() {
    if let Some(n) = std::env::var("PLAP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a second initialisation attempt is harmless, so the error is ignored
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let (experiment, common, k) = match cli.command {
        Command::Check { out, seed } => {
            let run = run_check(seed);
            return report(&out, run);
        }
        Command::Eig(c) => (Experiment::Eig, c, None),
        Command::Lsbound { common, k } => (Experiment::Lsbound, common, k),
        Command::Epinf(c) => (Experiment::Epinf, c, None),
        Command::Decay(c) => (Experiment::Decay, c, None),
        Command::Perturb(c) => (Experiment::Perturb, c, None),
        Command::Gap(c) => (Experiment::Gap, c, None),
    };
    let mut cfg = match load(&common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(k) = k {
        cfg.lsbound = Some(plap_cli::config::LsBlock { k });
        if let Err(e) = cfg.validate() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    report(&common.out, run_experiment(experiment, &cfg))
}

fn report(out: &std::path::Path, run: plap_cli::RunOutput) -> ExitCode {
    if let Some(err) = &run.record.error {
        eprintln!("error: {err}");
    }
    match write_run(out, &run) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: cannot write results: {e}");
            return ExitCode::from(plap_cli::EXIT_SOLVER as u8);
        }
    }
    ExitCode::from(run.exit_code as u8)
}
