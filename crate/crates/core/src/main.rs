use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use adrlite::phy::{AirtimeMode, PhyConstants};
use adrlite::scenario::{load_scenario, run_scenario, write_outputs, RunOptions};
use adrlite::sim::MissPolicy;
use adrlite::space::{ConfigDimensions, ConfigSpace};

#[derive(Parser)]
#[command(name = "adrlite", version, about = "LoRa ADR simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset (scenario1..scenario4).
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// One simulated day, 5 replicates, 100 and 300 devices.
        #[arg(long)]
        desk_scale: bool,
        #[arg(long)]
        airtime_mode: Option<AirtimeMode>,
        #[arg(long)]
        ideal_downlink: bool,
        #[arg(long)]
        ed_miss_policy: Option<MissPolicy>,
        /// Write per-replicate transmission and decision traces.
        #[arg(long)]
        trace: bool,
    },
    /// Print the sorted configuration space as CSV.
    DumpSpace {
        /// `config-1`..`config-4` or a `+`-joined list such as `sf+tp+cf`.
        #[arg(long, default_value = "config-1")]
        dims: String,
        #[arg(long, default_value_t = AirtimeMode::Paper)]
        airtime_mode: AirtimeMode,
        /// Radio constants file overriding the built-in defaults.
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Check a scenario and print its resolved form.
    Validate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        desk_scale: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> adrlite::Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            jobs,
            seed,
            desk_scale,
            airtime_mode,
            ideal_downlink,
            ed_miss_policy,
            trace,
        } => {
            let mut spec = load_scenario(&scenario)?;
            if desk_scale {
                spec = spec.desk_scale();
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(m) = airtime_mode {
                spec.airtime_mode = m;
            }
            if let Some(p) = ed_miss_policy {
                spec.ed_miss_policy = p;
            }
            spec.ideal_downlink |= ideal_downlink;
            spec.validate()?;
            let result = run_scenario(
                &spec,
                &RunOptions {
                    jobs,
                    record_trace: trace,
                },
            )?;
            for path in write_outputs(&result, &out)? {
                println!("{}", path.display());
            }
            let failed = result.table.failures().count();
            if failed > 0 {
                eprintln!(
                    "{failed} of {} runs failed, see failures.txt",
                    result.table.replicates.len()
                );
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpSpace {
            dims,
            airtime_mode,
            constants,
        } => {
            let radio = match constants {
                Some(path) => PhyConstants::load(&path)?.radio,
                None => Default::default(),
            };
            let space = ConfigSpace::build(&ConfigDimensions::parse(&dims)?, &radio, airtime_mode)?;
            let stdout = std::io::stdout();
            space.write_csv(stdout.lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            scenario,
            desk_scale,
        } => {
            let mut spec = load_scenario(&scenario)?;
            if desk_scale {
                spec = spec.desk_scale();
            }
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(spec.to_toml().as_bytes());
            Ok(ExitCode::SUCCESS)
        }
    }
}
