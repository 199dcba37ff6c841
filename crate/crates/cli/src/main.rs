use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmshare::Protocol;
use mmshare_cli::{load_config, run_experiment, write_outputs, CliError, Mode};

#[derive(Parser)]
#[command(name = "mmshare", version, about = "Coverage of shared mmWave networks with carrier sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis and/or simulation sweep described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Protocols to run, replacing the config list (repeat or comma-separate).
        #[arg(long, value_delimiter = ',')]
        protocol: Vec<Protocol>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn run(cmd: Command) -> Result<bool, CliError> {
    let Command::Run { config, mode, protocol, out, seed, threads } = cmd;
    let mut cfg = load_config(&config)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if !protocol.is_empty() {
        cfg.protocols = protocol;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    if let Some(s) = seed {
        cfg.sim.master_seed = s;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let (table, traces) = pool.install(|| run_experiment(&cfg));
    for path in write_outputs(&cfg, &table, &traces)? {
        eprintln!("wrote {}", path.display());
    }
    for f in &table.failures {
        eprintln!("failed: {} {} rho={} p_th_offset_db={} p_th_a_offset_db={}: {}", f.protocol, f.mode.name(), f.rho, f.p_th_offset_db, f.p_th_a_offset_db, f.error);
    }
    Ok(table.failures.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
