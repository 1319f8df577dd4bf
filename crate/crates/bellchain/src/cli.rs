//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad usage / parse / schema / precondition,
//! 3 solver failure, 4 model predicate failure. Verdicts are printed as data
//! so parameter sweeps never abort on a negative result. All numeric output
//! uses 17 significant digits with '.' as the decimal separator.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use crate::chained::{
    chained_value_closed_form, chained_value_trace, equally_spaced_settings, settings_for_epsilon,
};
use crate::decomposition::{
    advantage, averages_to_quantum, bkp_bound_check, check_no_conspiracy, check_no_signalling,
    io as model_io, lp_max_advantage_with, LpOptions, DEFAULT_PREDICATE_TOL,
};
use crate::error::{Error, Result};
use crate::experiment::{
    estimate_chained, sample_rounds, write_trials, Schedule, RNG_ALGORITHM,
};
use crate::quantum::EntangledPairState;

#[derive(Parser)]
#[command(
    name = "bellchain",
    version,
    about = "Chained Bell measures and feasibility of prediction-box decompositions"
)]
struct Cli {
    /// Output format for tabular commands (certify and checkmodel use fixed
    /// line formats).
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Tolerance override: model predicates in checkmodel (default 1e-9) and
    /// LP feasibility in feasibility (default 1e-7).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Trace,
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    ChainOnly,
    Uniform,
}

impl From<ScheduleArg> for Schedule {
    fn from(s: ScheduleArg) -> Schedule {
        match s {
            ScheduleArg::ChainOnly => Schedule::ChainOnly,
            ScheduleArg::Uniform => Schedule::Uniform,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the chained measure I_N for a state and scenario.
    Chained(ChainedArgs),
    /// Decide, by LP, the largest per-z advantage a decomposition can carry.
    Feasibility(FeasibilityArgs),
    /// Sample rounds and certify an empirical upper bound on I_N.
    Certify(CertifyArgs),
    /// Run all decomposition predicates on a model file.
    Checkmodel(CheckmodelArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("size").required(true).args(["n", "epsilon"])))]
struct ChainedArgs {
    /// Schmidt coefficient α in [0, 1].
    #[arg(long)]
    alpha: f64,
    /// Chain size (settings per side, ≥ 2).
    #[arg(long)]
    n: Option<usize>,
    /// Advantage threshold ε > 0; uses the smallest equally spaced chain whose
    /// quantum value is at most ε/2.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Which evaluation path fills the value column.
    #[arg(long, value_enum, default_value_t = Method::Trace)]
    method: Method,
}

#[derive(Args)]
struct FeasibilityArgs {
    /// Schmidt coefficient α in [0, 1].
    #[arg(long)]
    alpha: f64,
    /// Advantage threshold ε > 0 (fixes the scenario size).
    #[arg(long)]
    epsilon: f64,
    /// Size of the prediction alphabet.
    #[arg(long = "z", visible_alias = "z-count")]
    z_count: usize,
    /// Write the extracted decomposition to this model file.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Schmidt coefficient α in [0, 1].
    #[arg(long)]
    alpha: f64,
    /// Chain size (settings per side, ≥ 2).
    #[arg(long)]
    n: usize,
    /// Number of sampled rounds.
    #[arg(long)]
    rounds: u64,
    /// RNG seed; identical seeds give byte-identical output.
    #[arg(long)]
    seed: u64,
    /// Certificate confidence in (0, 1).
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Which setting pairs to sample.
    #[arg(long, value_enum, default_value_t = ScheduleArg::ChainOnly)]
    schedule: ScheduleArg,
    /// Also write the per-round trial log to this file.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckmodelArgs {
    /// Model file to check.
    path: PathBuf,
}

/// Parses arguments from the process environment and runs the selected
/// command.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Solver(_) => 3u8,
                _ => 2u8,
            })
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout()),
    };
    let code = match &cli.command {
        Command::Chained(args) => cmd_chained(cli, args, &mut out)?,
        Command::Feasibility(args) => cmd_feasibility(cli, args, &mut out)?,
        Command::Certify(args) => cmd_certify(args, &mut out)?,
        Command::Checkmodel(args) => cmd_checkmodel(cli, args, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

/// 17 significant digits, locale-independent.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_chained(cli: &Cli, args: &ChainedArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let state = EntangledPairState::new(args.alpha)?;
    let (n, settings) = match (args.n, args.epsilon) {
        (Some(n), None) => (n, equally_spaced_settings(n)?),
        (None, Some(eps)) => settings_for_epsilon(eps)?,
        _ => unreachable!("clap enforces exactly one of --n/--epsilon"),
    };
    let report = chained_value_trace(&state, &settings);
    let closed = chained_value_closed_form(&state, &settings);
    let (method, value) = match args.method {
        Method::Trace => ("trace", report.value),
        Method::ClosedForm => ("closed-form", closed),
    };
    match cli.format {
        Format::Csv => {
            let mut header = vec![
                "n".to_owned(),
                "alpha".to_owned(),
                "method".to_owned(),
                "value".to_owned(),
                "value_trace".to_owned(),
                "value_closed_form".to_owned(),
                "quantum_upper_bound".to_owned(),
                "local_lower_bound".to_owned(),
            ];
            header.extend((0..report.terms.len()).map(|i| format!("term_{i}")));
            let mut row = vec![
                n.to_string(),
                sci(args.alpha),
                method.to_owned(),
                sci(value),
                sci(report.value),
                sci(closed),
                sci(report.quantum_upper_bound),
                sci(report.local_lower_bound),
            ];
            row.extend(report.terms.iter().map(|&t| sci(t)));
            writeln!(out, "{}", header.join(","))?;
            writeln!(out, "{}", row.join(","))?;
        }
        Format::JsonLines => {
            let line = json!({
                "n": n,
                "alpha": args.alpha,
                "method": method,
                "value": value,
                "value_trace": report.value,
                "value_closed_form": closed,
                "quantum_upper_bound": report.quantum_upper_bound,
                "local_lower_bound": report.local_lower_bound,
                "terms": report.terms,
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_feasibility(cli: &Cli, args: &FeasibilityArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let state = EntangledPairState::new(args.alpha)?;
    let (n, settings) = settings_for_epsilon(args.epsilon)?;
    let mut opts = LpOptions::default();
    if let Some(tol) = cli.tolerance {
        opts.feasibility_tol = tol;
    }
    let result = lp_max_advantage_with(&state, &settings, args.z_count, &opts)?;
    let quantum = chained_value_trace(&state, &settings).value;
    let verdict = if result.t_star < args.epsilon {
        "ADVANTAGE-EXCLUDED"
    } else {
        "ADVANTAGE-FEASIBLE"
    };
    if let Some(path) = &args.model_out {
        model_io::write_model(path, &result.model)?;
    }
    match cli.format {
        Format::Csv => {
            writeln!(
                out,
                "alpha,epsilon,n,z_count,t_star,chained_quantum,verdict,a_star,sign,zero_certificate,lp_solves"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                sci(args.alpha),
                sci(args.epsilon),
                n,
                args.z_count,
                sci(result.t_star),
                sci(quantum),
                verdict,
                result.a_star,
                result.sign,
                result.zero_certificate,
                result.solve_count,
            )?;
        }
        Format::JsonLines => {
            let line = json!({
                "alpha": args.alpha,
                "epsilon": args.epsilon,
                "n": n,
                "z_count": args.z_count,
                "t_star": result.t_star,
                "chained_quantum": quantum,
                "verdict": verdict,
                "a_star": result.a_star,
                "sign": result.sign,
                "zero_certificate": result.zero_certificate,
                "lp_solves": result.solve_count,
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let state = EntangledPairState::new(args.alpha)?;
    let settings = equally_spaced_settings(args.n)?;
    let schedule: Schedule = args.schedule.into();
    let records = sample_rounds(&state, &settings, args.rounds, args.seed, schedule)?;
    let cert = estimate_chained(&records, &settings, args.confidence)?;
    let reference = chained_value_trace(&state, &settings).value;
    if let Some(path) = &args.trials_out {
        let metadata = vec![
            ("format".to_owned(), "bellchain-trials".to_owned()),
            ("version".to_owned(), "1".to_owned()),
            ("rng".to_owned(), RNG_ALGORITHM.to_owned()),
            ("seed".to_owned(), args.seed.to_string()),
            ("alpha".to_owned(), sci(args.alpha)),
            ("n".to_owned(), args.n.to_string()),
            ("schedule".to_owned(), schedule.name().to_owned()),
            ("rounds".to_owned(), args.rounds.to_string()),
        ];
        write_trials(BufWriter::new(File::create(path)?), &metadata, &records)?;
    }
    writeln!(out, "format=bellchain-certificate")?;
    writeln!(out, "version=1")?;
    writeln!(out, "rng={RNG_ALGORITHM}")?;
    writeln!(out, "alpha={}", sci(args.alpha))?;
    writeln!(out, "n={}", cert.n)?;
    writeln!(out, "schedule={}", schedule.name())?;
    writeln!(out, "seed={}", args.seed)?;
    writeln!(out, "n_rounds={}", cert.n_rounds)?;
    writeln!(out, "i_n_hat={}", sci(cert.i_n_hat))?;
    writeln!(out, "confidence={}", sci(cert.confidence))?;
    writeln!(out, "half_width={}", sci(cert.half_width))?;
    writeln!(out, "certified_epsilon={}", sci(cert.certified_epsilon))?;
    writeln!(out, "chained_value={}", sci(reference))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_checkmodel(cli: &Cli, args: &CheckmodelArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let model = model_io::read_model(&args.path)?;
    let tol = cli.tolerance.unwrap_or(DEFAULT_PREDICATE_TOL);

    let mut norm_dev: f64 = 0.0;
    for bx in model.boxes() {
        for a in 0..bx.alice_settings() {
            for b in 0..bx.bob_settings() {
                let sum: f64 = (0..4)
                    .map(|k| bx.joint(a, b, (k / 2) as u8, (k % 2) as u8))
                    .sum();
                norm_dev = norm_dev.max((sum - 1.0).abs());
            }
        }
        for &v in bx.entries() {
            norm_dev = norm_dev.max((-v).max(v - 1.0).max(0.0));
        }
    }
    let norm_pass = norm_dev <= tol;

    let mut ns_dev: f64 = 0.0;
    for bx in model.boxes() {
        ns_dev = ns_dev.max(check_no_signalling(bx, tol).max_deviation);
    }
    let ns_pass = ns_dev <= tol;

    let conspiracy = check_no_conspiracy(&model);
    let avg = averages_to_quantum(&model, tol);
    let adv = advantage(&model);

    writeln!(out, "normalization={} max_deviation={}", pass_str(norm_pass), sci(norm_dev))?;
    writeln!(out, "no_signalling={} max_violation={}", pass_str(ns_pass), sci(ns_dev))?;
    writeln!(out, "no_conspiracy={}", pass_str(conspiracy.passes))?;
    writeln!(out, "averaging={} max_deviation={}", pass_str(avg.passes), sci(avg.max_deviation))?;
    writeln!(
        out,
        "advantage={} witness_z={} witness_a={} witness_x={}",
        sci(adv.epsilon_achieved),
        adv.witness.0,
        adv.witness.1,
        adv.witness.2
    )?;

    let bkp_pass = match bkp_bound_check(&model, tol) {
        Ok(check) => {
            let min_slack = check
                .entries
                .iter()
                .map(|e| e.chained_value - e.max_asymmetry)
                .fold(f64::INFINITY, f64::min);
            writeln!(out, "bkp={} min_slack={}", pass_str(check.passes), sci(min_slack))?;
            check.passes
        }
        Err(Error::SignallingBox { z, violation }) => {
            writeln!(out, "bkp=skipped reason=signalling-box z={z} violation={}", sci(violation))?;
            false
        }
        Err(e) => return Err(e),
    };

    let all = norm_pass && ns_pass && conspiracy.passes && avg.passes && bkp_pass;
    writeln!(out, "result={}", pass_str(all))?;
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(4) })
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}
