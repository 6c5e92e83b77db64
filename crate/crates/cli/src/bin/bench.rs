//! Gas and authentication-latency benchmarks with CSV output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sfwt_core::bench::report::{auth_summary, emit_to_path, gas_summary, write_auth_csv, write_gas_csv};
use sfwt_core::bench::{run_auth_benchmark, run_gas_benchmark, BenchError, Execution, LatencyModel, SchemeKind};

#[derive(Debug, Parser)]
#[command(name = "bench", about = "Token-standard gas and authentication latency benchmarks", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// CSV destination.
    #[arg(long)]
    out: PathBuf,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Mint and transfer gas of ERC1155 vs ERC721 per quantity.
    Gas {
        #[arg(long, value_delimiter = ',', default_values_t = [1u128, 10, 100, 1000])]
        quantities: Vec<u128>,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Simulated authentication latency per scheme.
    Auth {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        block_interval: u64,
        /// Overrides the model's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// `all`, or a comma-separated subset of wpa2, block-broadcast,
        /// n-wpa2, sfwt-query.
        #[arg(long, alias = "schemes", value_delimiter = ',', default_value = "all")]
        scheme: Vec<String>,
        /// JSON latency model; defaults apply to omitted fields.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Cmd::Gas {
            quantities,
            repetitions,
            common,
        } => {
            let rows = run_gas_benchmark(&quantities, repetitions, exec(common.sequential))?;
            emit_to_path(&common.out, |w| write_gas_csv(&rows, w))?;
            print!("{}", gas_summary(&rows));
        }
        Cmd::Auth {
            trials,
            block_interval,
            seed,
            scheme,
            model,
            common,
        } => {
            let mut m = match model {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
                    .map_err(|e| BenchError::Invalid(format!("latency model: {e}")))?,
                None => LatencyModel::default(),
            };
            if let Some(s) = seed {
                m.rng_seed = s;
            }
            let schemes = if scheme.iter().any(|s| s == "all") {
                SchemeKind::ALL.to_vec()
            } else {
                scheme.iter().map(|s| s.parse()).collect::<Result<Vec<SchemeKind>, _>>()?
            };
            let mut rows = Vec::new();
            let mut stats = Vec::new();
            for s in schemes {
                let run = run_auth_benchmark(s, trials, block_interval, &m, exec(common.sequential))?;
                rows.extend(run.trials);
                stats.push(run.stats);
            }
            emit_to_path(&common.out, |w| write_auth_csv(&rows, w))?;
            print!("{}", auth_summary(&stats));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
