//! `sgsp`: runs scenario files or single probes and writes CSV artifacts
//! plus a summary report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgsp_core::scenario::{run_scenario, run_scenario_file, RunOptions, Scenario};
use sgsp_core::Error;

#[derive(Parser, Debug)]
#[command(name = "sgsp", version, about = "Specification property laboratory for C0-semigroups")]
struct Cli {
    /// Output root; each run writes into a subdirectory named after the scenario.
    #[arg(long, global = true, env = "SGSP_OUTPUT_ROOT", default_value = "sgsp-out")]
    out_dir: PathBuf,

    /// Replaces the seed of every probe.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance override `key=value`; may be repeated.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tolerances: Vec<(String, f64)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct WeightArgs {
    /// exp_decay, constant or rational_decay.
    #[arg(long, default_value = "exp_decay")]
    weight: String,
    /// Rate, level or exponent of the weight, depending on its family.
    #[arg(long)]
    weight_param: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Seeded suite of periodic shadowing certificates (translation).
    Shadow {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
    /// Return-set scan around a tent and the origin (translation).
    Mixing {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 0.5)]
        radius_u: f64,
        #[arg(long, default_value_t = 0.5)]
        radius_w: f64,
        #[arg(long, default_value_t = 50.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Density oracle on the dyadic union and a distributionally irregular vector.
    Densities {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e4)]
        horizon: f64,
    },
    /// Characterization of chaos for the translation semigroup.
    Equivalences {
        #[command(flatten)]
        weight: WeightArgs,
    },
    /// Eigenvector field, parameter gate and periodic point of the hyperbolic heat equation.
    Eigenfield {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 3.0)]
        rho: f64,
        #[arg(long, default_value_t = 60)]
        n_trunc: usize,
    },
    /// Semigroup laws on seeded states for any engine.
    Laws {
        /// translation, second_order, hhte, wave or black_scholes.
        #[arg(long, default_value = "translation")]
        engine: String,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
    /// Runs a scenario file.
    Run { config: PathBuf },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn engine_block(name: &str, w: Option<&WeightArgs>) -> String {
    let mut s = format!("[engine]\nname = \"{name}\"\n");
    if let Some(w) = w {
        s += &format!("weight = \"{}\"\np = {:?}\n", w.weight, w.p);
        if let Some(x) = w.weight_param {
            let key = match w.weight.as_str() {
                "constant" => "level",
                "rational_decay" => "exponent",
                _ => "rate",
            };
            s += &format!("{key} = {x:?}\n");
        }
    }
    s
}

/// Scenario text for a single-probe subcommand.
fn scenario_text(cmd: &Command) -> Option<String> {
    let text = match cmd {
        Command::Shadow { weight, cases } => format!(
            "name = \"shadow\"\n{}[[probe]]\nkind = \"shadowing\"\nseed = 1\ncases = {cases}\n",
            engine_block("translation", Some(weight))
        ),
        Command::Mixing {
            weight,
            radius_u,
            radius_w,
            horizon,
            step,
        } => format!(
            "name = \"mixing\"\n{}[[probe]]\nkind = \"mixing\"\nradius_u = {radius_u:?}\nradius_w = {radius_w:?}\nhorizon = {horizon:?}\nstep = {step:?}\n",
            engine_block("translation", Some(weight))
        ),
        Command::Densities { weight, epsilon, horizon } => format!(
            "name = \"densities\"\n{}[[probe]]\nkind = \"density\"\nset = \"dyadic\"\n[[probe]]\nkind = \"irregular\"\nepsilon = {epsilon:?}\nhorizon = {horizon:?}\n",
            engine_block("translation", Some(weight))
        ),
        Command::Equivalences { weight } => format!(
            "name = \"equivalences\"\n{}[[probe]]\nkind = \"equivalences\"\nseed = 1\n",
            engine_block("translation", Some(weight))
        ),
        Command::Eigenfield { alpha, tau, rho, n_trunc } => format!(
            "name = \"eigenfield\"\n{}alpha = {alpha:?}\ntau = {tau:?}\nrho = {rho:?}\nn_trunc = {n_trunc}\n\
             [[probe]]\nkind = \"gate\"\n[[probe]]\nkind = \"hhte_eigenfield\"\n[[probe]]\nkind = \"periodic\"\ncount = 1\n",
            engine_block("second_order", None)
        ),
        Command::Laws { engine, cases } => format!(
            "name = \"laws\"\n{}[[probe]]\nkind = \"laws\"\nseed = 1\ncases = {cases}\n",
            engine_block(engine, None)
        ),
        Command::Run { .. } => return None,
    };
    Some(text)
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("sgsp: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = RunOptions {
        output_root: cli.out_dir.clone(),
        seed: cli.seed,
        tolerances: cli.tolerances.clone(),
    };
    let (code, dir) = match &cli.command {
        Command::Run { config } => {
            let outcome = run_scenario_file(config, &options);
            if let Some(e) = &outcome.error {
                return report_error(e);
            }
            (outcome.exit_code, outcome.output_dir)
        }
        cmd => {
            let text = scenario_text(cmd).expect("single-probe subcommand");
            let scenario = match Scenario::parse(&text, None) {
                Ok(s) => s,
                Err(e) => return report_error(&e),
            };
            match run_scenario(&scenario, &options) {
                Ok(r) => (r.exit_code, Some(options.output_root.join(&scenario.name))),
                Err(e) => return report_error(&e),
            }
        }
    };
    if let Some(dir) = dir {
        match std::fs::read_to_string(dir.join("summary.txt")) {
            Ok(s) => print!("{s}"),
            Err(e) => eprintln!("sgsp: cannot read summary: {e}"),
        }
        println!("artifacts in {}", dir.display());
    }
    ExitCode::from(code as u8)
}
