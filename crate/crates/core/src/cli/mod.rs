//! Command-line front end: `check`, `simulate`, `algorithm` and `scenarios`.
//!
//! Exit status 0 on success, 1 on numerical failure (or, for `check`, when
//! some sampled state is not uniquely solvable) and 2 on usage errors.

mod csv;
mod problem_file;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::NonholonomicProblem;
use crate::error::Error;
use crate::mechanics::State;
use crate::scenarios::{build_scenario, scenario_names, ScenarioSpec};
use crate::simulate::{project_to_constraints, simulate, SimulateOptions};
use crate::solver::{
    check_theorem2, compatibility_matrix, integrability_algorithm, solve_sode, Classification,
    DEFAULT_DEPTH,
};

pub use csv::{csv_header, format_trajectory_csv, write_trajectory_csv};
pub use problem_file::{load_problem_file, parse_problem, Line, ProblemFile};

#[derive(Debug, Parser)]
#[command(name = "nonholonomic", version, about = "Nonholonomic constraint solver and integrator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample states on the constraint set and test solvability at each.
    Check(CheckArgs),
    /// Integrate a trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Run the constraint algorithm at one state.
    Algorithm(AlgorithmArgs),
    /// List the built-in scenarios with their defaults.
    Scenarios,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Problem description file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Scenario parameter override `name=value`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Check these states (q then v, comma separated) instead of random samples.
    #[arg(long = "state", value_name = "CSV", allow_hyphen_values = true)]
    states: Vec<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Project velocities onto the constraint set after every step.
    #[arg(long)]
    project: bool,
    /// Integrate through underdetermined states with minimum-norm multipliers.
    #[arg(long)]
    allow_underdetermined: bool,
    /// Initial state, q then v, comma separated. Defaults to the scenario's.
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    state: Option<String>,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlgorithmArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    state: String,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownScenario(_)
            | Error::InvalidParam(_)
            | Error::InvalidArgument(_)
            | Error::Arity { .. }
            | Error::Section { .. }
            | Error::File { .. }
            | Error::Expr(_)
            | Error::DimensionMismatch { .. }
            | Error::NonHorizontalForce(_) => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the command line `args` (including the program name) and returns the
/// process exit status.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(a, out),
        Command::Simulate(a) => run_simulate(a, out),
        Command::Algorithm(a) => algorithm(a, out),
        Command::Scenarios => scenarios(out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Numerical(format!("write failed: {e}"))
}

fn parse_params(items: &[String]) -> Result<Vec<(&str, f64)>, Failure> {
    items
        .iter()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("expected NAME=VALUE, got `{item}`")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("`{v}` is not a number")))?;
            Ok((k.trim(), v))
        })
        .collect()
}

fn parse_state(text: &str, n: usize) -> Result<State, Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("`{}` is not a number", x.trim())))
        })
        .collect::<Result<_, _>>()?;
    if values.len() != 2 * n {
        return Err(Failure::Usage(format!(
            "state needs {} values (q then v), got {}",
            2 * n,
            values.len()
        )));
    }
    Ok(State::from_slice(&values))
}

fn load(source: &Source, params: &[String]) -> Result<(NonholonomicProblem, Option<ScenarioSpec>), Failure> {
    let params = parse_params(params)?;
    match (&source.scenario, &source.file) {
        (Some(name), _) => {
            let spec = build_scenario(name, &params)?;
            Ok((spec.problem.clone(), Some(spec)))
        }
        (None, Some(path)) => {
            if !params.is_empty() {
                return Err(Failure::Usage("--param applies to built-in scenarios only".into()));
            }
            Ok((load_problem_file(path)?, None))
        }
        (None, None) => Err(Failure::Usage("one of --scenario or --file is required".into())),
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Default)]
struct Tally {
    unique: usize,
    underdetermined: usize,
    infeasible: usize,
    failed: usize,
    theorem_agrees: usize,
    rank_agrees: usize,
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Outcome {
    let (p, _) = load(&a.source, &a.params)?;
    let n = p.dim();
    let states: Vec<Result<State, Error>> = if a.states.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        (0..a.samples)
            .map(|_| {
                let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                project_to_constraints(&p, &State::new(q, v))
            })
            .collect()
    } else {
        a.states
            .iter()
            .map(|s| parse_state(s, n).map(Ok))
            .collect::<Result<_, _>>()?
    };

    writeln!(
        out,
        "{:>4}  {:>10}  {:>7}  {:>7}  {:>10}  {:>4}  {:>5}  {:>7}  {:>8}  {}",
        "#", "admissible", "rank(D)", "rank(M)", "rcond(M)", "rank", "inter", "regular", "definite", "class"
    )
    .map_err(io)?;
    let mut tally = Tally::default();
    let nominal = p.annihilator_count();
    for (i, s) in states.iter().enumerate() {
        let row = s.as_ref().map_err(Error::to_string).and_then(|s| {
            let eval = || -> Result<_, Error> {
                Ok((
                    p.admissibility(s)?,
                    compatibility_matrix(&p, s)?,
                    check_theorem2(&p, s)?,
                    solve_sode(&p, s)?,
                ))
            };
            eval().map_err(|e| e.to_string())
        });
        match row {
            Ok((adm, cm, th, sol)) => {
                match sol.classification {
                    Classification::Unique => tally.unique += 1,
                    Classification::Underdetermined(_) => tally.underdetermined += 1,
                    Classification::Infeasible => tally.infeasible += 1,
                }
                tally.theorem_agrees +=
                    usize::from(th.compatible() == (sol.classification == Classification::Unique));
                tally.rank_agrees += usize::from((cm.rank == nominal) == th.intersection_condition);
                writeln!(
                    out,
                    "{:>4}  {:>10}  {:>7}  {:>7}  {:>10.3e}  {:>4}  {:>5}  {:>7}  {:>8}  {}",
                    i + 1,
                    flag(adm.admissible),
                    adm.rank,
                    cm.rank,
                    cm.rcond,
                    flag(th.rank_condition),
                    flag(th.intersection_condition),
                    flag(th.regularity),
                    flag(th.definite_hessian),
                    sol.classification
                )
                .map_err(io)?;
            }
            Err(msg) => {
                tally.failed += 1;
                writeln!(out, "{:>4}  failed: {msg}", i + 1).map_err(io)?;
            }
        }
    }
    let total = states.len();
    let evaluated = total - tally.failed;
    writeln!(out).map_err(io)?;
    writeln!(out, "states:          {total}").map_err(io)?;
    writeln!(out, "unique:          {}", tally.unique).map_err(io)?;
    writeln!(out, "underdetermined: {}", tally.underdetermined).map_err(io)?;
    writeln!(out, "infeasible:      {}", tally.infeasible).map_err(io)?;
    writeln!(out, "failed:          {}", tally.failed).map_err(io)?;
    writeln!(out, "compatibility conditions agree with classification: {}/{evaluated}", tally.theorem_agrees)
        .map_err(io)?;
    writeln!(out, "rank(M) = {nominal} agrees with intersection condition: {}/{evaluated}", tally.rank_agrees)
        .map_err(io)?;
    Ok(if tally.unique == total { 0 } else { 1 })
}

fn run_simulate(a: SimulateArgs, out: &mut dyn Write) -> Outcome {
    let (p, spec) = load(&a.source, &a.params)?;
    let s0 = match (&a.state, &spec) {
        (Some(text), _) => parse_state(text, p.dim())?,
        (None, Some(spec)) => spec.default_state.clone(),
        (None, None) => return Err(Failure::Usage("--state is required with --file".into())),
    };
    let opts = SimulateOptions {
        project: a.project,
        allow_underdetermined: a.allow_underdetermined,
        allow_off_constraint: false,
    };
    let tr = simulate(&p, &s0, a.h, a.t_end, opts)?;
    match &a.out {
        Some(path) => {
            write_trajectory_csv(&tr, path)?;
            writeln!(
                out,
                "wrote {} rows to {}; max |psi| = {:.3e}, max |E - E0| = {:.3e}{}",
                tr.len(),
                path.display(),
                tr.max_constraint_drift(),
                tr.max_energy_drift(),
                if tr.non_unique { " (non-unique: minimum-norm multipliers)" } else { "" }
            )
            .map_err(io)?;
        }
        None => out.write_all(format_trajectory_csv(&tr).as_bytes()).map_err(io)?,
    }
    Ok(0)
}

fn algorithm(a: AlgorithmArgs, out: &mut dyn Write) -> Outcome {
    let (p, _) = load(&a.source, &a.params)?;
    let s = parse_state(&a.state, p.dim())?;
    let trace = integrability_algorithm(&p, &s, a.depth)?;
    writeln!(out, "{:>4}  {:>6}  {:>8}  {:>12}  {}", "step", "member", "feasible", "residual", "appended")
        .map_err(io)?;
    for st in &trace.steps {
        writeln!(
            out,
            "{:>4}  {:>6}  {:>8}  {:>12.5e}  {}",
            st.k,
            flag(st.member),
            flag(st.feasible),
            st.appended_residual,
            st.appended_rows
        )
        .map_err(io)?;
    }
    writeln!(out, "verdict: {}", trace.verdict).map_err(io)?;
    Ok(0)
}

fn scenarios(out: &mut dyn Write) -> Outcome {
    for name in scenario_names() {
        let spec = build_scenario(name, &[])?;
        writeln!(out, "{name}: {}", spec.description).map_err(io)?;
        writeln!(out, "  coords: {}", spec.problem.model().coords().join(" ")).map_err(io)?;
        let params: Vec<String> = spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if !params.is_empty() {
            writeln!(out, "  params: {}", params.join(" ")).map_err(io)?;
        }
        let state: Vec<String> = spec.default_state.to_vector().iter().map(|x| format!("{x}")).collect();
        writeln!(out, "  state:  {}", state.join(",")).map_err(io)?;
    }
    Ok(0)
}
