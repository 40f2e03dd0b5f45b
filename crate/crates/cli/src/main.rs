mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hellinger_discord::app::{
    render_csv, run_discord, run_scan, run_verify, DiscordRequest, Method, Model, ScanSpec, Suite,
};
use hellinger_discord::io::read_state;
use hellinger_discord::{DiscordError, Result};

use config::Config;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hdiscord", version, about = "Hellinger geometric discord of multipartite states")]
struct Cli {
    /// TOML config file; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads [default: logical cores].
    #[arg(long, global = true, value_name = "N", env = "DISCORD_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,

    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(flatten)]
    optimizer: OptimizerFlags,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct OptimizerFlags {
    /// Coarse grid points per angle axis.
    #[arg(long, global = true, value_name = "N")]
    grid_points: Option<usize>,
    /// Best grid cells refined by the simplex search.
    #[arg(long, global = true, value_name = "N")]
    restarts: Option<usize>,
    /// Affinity convergence tolerance.
    #[arg(long, global = true, value_name = "TOL")]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate D^H for a state file or a parameterized family.
    Discord(DiscordArgs),
    /// Sweep a model parameter and write `param,dh,theta,phi` rows as CSV.
    Scan(ScanArgs),
    /// Run randomized cross-checks between evaluators.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct DiscordArgs {
    /// JSON state file with `dims` and `amplitudes` or `matrix`.
    state_file: Option<PathBuf>,
    /// Evaluator to use.
    #[arg(long, default_value = "auto", value_parser = method_names())]
    method: String,
    /// Werner mixing weight.
    #[arg(long)]
    r: Option<f64>,
    /// Bell-diagonal weights over Ψ⁺, Ψ⁻, Φ⁺, Φ⁻.
    #[arg(long, value_delimiter = ',', value_name = "L1,L2,L3,L4")]
    lambdas: Option<Vec<f64>>,
    /// Level count for werner-mlevel and isotropic.
    #[arg(long)]
    levels: Option<usize>,
    /// Family parameter for werner-mlevel (swap expectation) and isotropic (fidelity).
    #[arg(long)]
    x: Option<f64>,
    /// Points per angle axis for the bruteforce method.
    #[arg(long, value_name = "N")]
    bruteforce_grid: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Model to scan.
    #[arg(long, value_parser = model_names())]
    model: String,
    /// Parameter to sweep [default depends on the model].
    #[arg(long)]
    param: Option<String>,
    /// First grid value.
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    /// Last grid value (inclusive).
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Number of spins or atoms.
    #[arg(long)]
    n: Option<usize>,
    /// Coupling strength.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Anisotropy of the lmg-aniso model, in [0, 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Longitudinal field.
    #[arg(long, allow_negative_numbers = true)]
    h_z: Option<f64>,
    /// Transverse field of the uniaxial model.
    #[arg(long, allow_negative_numbers = true)]
    h_x: Option<f64>,
    /// Field-mode frequency of the dicke model.
    #[arg(long)]
    omega: Option<f64>,
    /// Atomic transition frequency of the dicke model.
    #[arg(long)]
    omega0: Option<f64>,
    /// Starting Fock cutoff for the dicke model.
    #[arg(long)]
    fock_cutoff: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite to run; all suites when omitted.
    #[arg(long, value_parser = suite_names())]
    suite: Option<String>,
    /// Seed for the random cases.
    #[arg(long)]
    seed: Option<u64>,
    /// Random cases per suite (the multilevel suite uses a fixed grid).
    #[arg(long)]
    trials: Option<usize>,
}

fn method_names() -> clap::builder::PossibleValuesParser {
    Method::ALL.map(Method::name).into()
}

fn model_names() -> clap::builder::PossibleValuesParser {
    Model::ALL.map(Model::name).into()
}

fn suite_names() -> clap::builder::PossibleValuesParser {
    Suite::ALL.map(Suite::name).into()
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Defaults, then the config file, then flags (`DISCORD_WORKERS` stands in
/// for `--workers`).
fn resolve(cli: &Cli) -> Result<Config> {
    let mut c = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(n) = cli.workers {
        c.optimizer.workers = Some(n as usize);
    }
    set(&mut c.optimizer.grid_points, cli.optimizer.grid_points);
    set(&mut c.optimizer.restarts, cli.optimizer.restarts);
    set(&mut c.optimizer.tolerance, cli.optimizer.tolerance);
    match &cli.command {
        Some(Command::Discord(a)) => set(&mut c.bruteforce_grid, a.bruteforce_grid),
        Some(Command::Scan(a)) => {
            set(&mut c.model.n, a.n);
            set(&mut c.model.lambda, a.lambda);
            set(&mut c.model.gamma, a.gamma);
            set(&mut c.model.h_z, a.h_z);
            set(&mut c.model.h_x, a.h_x);
            set(&mut c.model.omega, a.omega);
            set(&mut c.model.omega0, a.omega0);
            if let Some(f) = a.fock_cutoff {
                c.dicke.fock_cutoff = f;
                c.dicke.max_fock_cutoff = c.dicke.max_fock_cutoff.max(8 * f);
            }
        }
        Some(Command::Verify(a)) => {
            set(&mut c.verify.seed, a.seed);
            set(&mut c.verify.trials, a.trials);
        }
        None => {}
    }
    c.settings().validate()?;
    Ok(c)
}

fn scan_spec(a: &ScanArgs, c: &Config) -> Result<ScanSpec> {
    let model: Model = a.model.parse()?;
    let mut spec = ScanSpec::for_model(model);
    spec.fixed = c.model;
    set(&mut spec.param, a.param.clone());
    set(&mut spec.start, a.start);
    set(&mut spec.stop, a.stop);
    set(&mut spec.points, a.points);
    spec.validate()?;
    Ok(spec)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_discord(a: &DiscordArgs, c: &Config) -> Result<ExitCode> {
    let state = a.state_file.as_deref().map(read_state).transpose()?;
    let lambdas = a
        .lambdas
        .as_ref()
        .map(|v| {
            <[f64; 4]>::try_from(v.as_slice()).map_err(|_| {
                DiscordError::Usage(format!("--lambdas needs four weights, got {}", v.len()))
            })
        })
        .transpose()?;
    let req = DiscordRequest {
        state,
        r: a.r,
        lambdas,
        levels: a.levels,
        x: a.x,
    };
    let method: Method = a.method.parse()?;
    let report = run_discord(&req, method, &c.settings())?;
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    emit(&format!("{}\n", report.to_json()), a.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(a: &ScanArgs, c: &Config) -> Result<ExitCode> {
    let spec = scan_spec(a, c)?;
    let rows = run_scan(&spec, &c.settings())?;
    emit(&render_csv(&rows), a.output.as_deref())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
    }
    Ok(if failed == rows.len() {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_verify(a: &VerifyArgs, c: &Config) -> Result<ExitCode> {
    let suites: Vec<Suite> = match &a.suite {
        Some(s) => vec![s.parse()?],
        None => Suite::ALL.to_vec(),
    };
    let mut all_passed = true;
    for suite in suites {
        let rep = run_verify(suite, c.verify.seed, c.verify.trials, &c.settings())?;
        println!("{rep}");
        all_passed &= rep.passed;
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    })
}

fn dump(cli: &Cli, c: &Config) -> Result<()> {
    let mut text = c.to_toml();
    if let Some(Command::Scan(a)) = &cli.command {
        let spec = scan_spec(a, c)?;
        text.push_str(&format!(
            "\n[scan]\nmodel = \"{}\"\nparam = \"{}\"\nstart = {:?}\nstop = {:?}\npoints = {}\n",
            spec.model, spec.param, spec.start, spec.stop, spec.points
        ));
    }
    print!("{text}");
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let c = resolve(cli)?;
    if cli.dump_config {
        dump(cli, &c)?;
        return Ok(ExitCode::SUCCESS);
    }
    match &cli.command {
        Some(Command::Discord(a)) => cmd_discord(a, &c),
        Some(Command::Scan(a)) => cmd_scan(a, &c),
        Some(Command::Verify(a)) => cmd_verify(a, &c),
        None => Err(DiscordError::Usage(
            "a subcommand is required (discord, scan or verify); see --help".into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                DiscordError::Usage(_) => ExitCode::from(EXIT_USAGE),
                DiscordError::Parse(_) | DiscordError::Io(_) => ExitCode::from(EXIT_INPUT),
                _ => ExitCode::from(EXIT_FAILURE),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
