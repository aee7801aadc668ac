use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coarse_grain::solvers::Method;
use coarse_grain_cli::{figures, run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "coarse-grain", version, about = "Open-system dynamics of small spin systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the propagation method of the config.
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,

    /// Stop with an error once a state leaves the physical set.
    #[arg(long, global = true)]
    abort_on_unphysical: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Expm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Expm => Method::Expm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write its CSV.
    Run {
        config: PathBuf,
        /// CSV path; defaults to the config path with a .csv extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full-state JSON path; defaults to <out>.json when output.state_dump is set.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Regenerate the data of a figure preset.
    Figures {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(figures::NAMES))]
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Print the energies and degeneracy classes of H_S as JSON.
    Spectrum { config: PathBuf },
    /// Print the coarse-grained generator tables at one tau as JSON.
    Liouvillian {
        config: PathBuf,
        #[arg(long)]
        tau: f64,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    RunConfig::parse(&text)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Config(e.to_string()))
}

/// A closed pipe (e.g. `| head`) is not an error worth reporting.
fn stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let method = cli.method.map(Method::from);
    let abort = cli.abort_on_unphysical.then_some(true);
    match cli.command {
        Command::Run { config, out, json: json_path } => {
            let cfg = load(&config)?;
            let traj = run::run(&cfg, method, abort)?;
            let out = out.unwrap_or_else(|| config.with_extension("csv"));
            write(&out, &run::run_csv(&cfg, &traj)?)?;
            let dump = json_path.or_else(|| cfg.output.state_dump.then(|| out.with_extension("json")));
            if let Some(p) = dump {
                write(&p, &run::states_json(&cfg, &traj)?)?;
            }
            eprintln!(
                "{} points, max trace error {:e}, min eigenvalue {:e}",
                traj.len(),
                traj.max_trace_error(),
                traj.min_eigenvalue()
            );
        }
        Command::Figures { name, out_dir } => {
            let fig = figures::figure(&name, method)?;
            for p in fig.write(&out_dir)? {
                eprintln!("wrote {}", p.display());
            }
            stdout(&json(&fig.summary)?);
        }
        Command::Spectrum { config } => stdout(&json(&run::spectrum(&load(&config)?)?)?),
        Command::Liouvillian { config, tau } => stdout(&json(&run::liouvillian_tables(&load(&config)?, tau)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
