//! `inputsel`: structural controllability checks and minimum-cost input
//! selection from the command line.
//!
//! Every command prints one report. JSON is the default; `--pretty` gives
//! an indented text rendering of the same content. Exit codes: 0 success,
//! 2 infeasible, 3 refused (constraint matrix not certified), 4 input error.

mod dot;
mod labels;
mod pretty;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use inputsel_core::controllability::{
    is_structurally_controllable, is_switched_structurally_controllable,
};
use inputsel_core::ilp::{
    build_p1, build_p2, build_p3, build_p4, build_p4fix, build_p5, build_p5fix, BuildError,
    IlpModel, Problem,
};
use inputsel_core::model::{StrippedColumn, StructuredSystem, SwitchedStructuredSystem};
use inputsel_core::selection::{
    bounds, brute_force, brute_force_switched, lp_round, solve_exact, solve_exact_switched,
    SelectionError, SelectionResult,
};
use inputsel_core::tu::{
    build_switched_incidence, classify_with, incidence_of, is_sssi, ClassifyOptions,
    ConstraintClass, IncidenceMatrix,
};
use inputsel_core::{parse_switched_system, parse_system};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use labels::{rat, Labels};

#[derive(Parser)]
#[command(
    name = "inputsel",
    version,
    about = "Minimum-cost input selection for structural controllability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Indented text instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Progress and timings on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Structural controllability of a selection (all inputs by default).
    Check {
        path: PathBuf,
        /// Read a switched document.
        #[arg(long)]
        switched: bool,
        /// Comma-separated inputs: `2`, `u2`, `1:2` (mode 1, input 2) or
        /// `u2_m1`. An empty list selects nothing.
        #[arg(long)]
        inputs: Option<String>,
        /// Write the digraph in Graphviz DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Source-SCC incidence matrix and its constraint classes.
    Classify {
        path: PathBuf,
        #[arg(long)]
        switched: bool,
        /// Monotone rows (columns) must all run the same direction.
        #[arg(long)]
        uniform_monotone: bool,
    },
    /// Optimal input selection.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum)]
        problem: ProblemArg,
        /// Cardinality bound for p2, p5 and p5fix.
        #[arg(long)]
        k: Option<usize>,
        /// Fall back to LP rounding (p1) when exactness is not certified.
        #[arg(long)]
        allow_heuristic: bool,
        /// Exhaustive enumeration instead of the LP.
        #[arg(long)]
        oracle: bool,
        /// Write the integer program in CPLEX LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
    },
    /// Matching and LP lower bounds plus the rounded selection.
    Bound {
        path: PathBuf,
        #[arg(long)]
        export_lp: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    P1,
    P2,
    P3,
    P4,
    P5,
    P4fix,
    P5fix,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::P1 => Problem::P1,
            ProblemArg::P2 => Problem::P2,
            ProblemArg::P3 => Problem::P3,
            ProblemArg::P4 => Problem::P4,
            ProblemArg::P5 => Problem::P5,
            ProblemArg::P4fix => Problem::P4fix,
            ProblemArg::P5fix => Problem::P5fix,
        }
    }
}

enum Failure {
    Input(String),
    Infeasible(String),
    Uncertified { message: String, classes: Value },
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Uncertified { .. } => 3,
            Failure::Input(_) => 4,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            Failure::Internal(_) => "internal_error",
            Failure::Infeasible(_) => "infeasible",
            Failure::Uncertified { .. } => "uncertified",
            Failure::Input(_) => "input_error",
        }
    }

    fn body(&self) -> Value {
        match self {
            Failure::Uncertified { message, classes } => {
                json!({ "message": message, "classes": classes })
            }
            Failure::Input(m) | Failure::Infeasible(m) | Failure::Internal(m) => {
                json!({ "message": m })
            }
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::NotControllable => Failure::Infeasible(e.to_string()),
            BuildError::InvalidK | BuildError::InputMatrixNotShared => {
                Failure::Input(e.to_string())
            }
        }
    }
}

fn selection_failure(e: SelectionError) -> Failure {
    match e {
        SelectionError::Infeasible(_) => Failure::Infeasible(e.to_string()),
        SelectionError::Build(b) => b.into(),
        SelectionError::Uncertified(_, ref class) => Failure::Uncertified {
            classes: classes_json(class, None),
            message: e.to_string(),
        },
        SelectionError::TooLarge { .. }
        | SelectionError::MissingK(_)
        | SelectionError::WrongProblem(_) => Failure::Input(e.to_string()),
        SelectionError::Solver(_) | SelectionError::Fractional(_) | SelectionError::Duality(_) => {
            Failure::Internal(e.to_string())
        }
    }
}

struct Ctx {
    verbose: bool,
    start: Instant,
    warnings: Vec<String>,
}

impl Ctx {
    fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!(
                "[inputsel {:>8.2} ms] {msg}",
                self.start.elapsed().as_secs_f64() * 1e3
            );
        }
    }

    fn stripped(&mut self, cols: &[StrippedColumn]) {
        self.warnings.extend(cols.iter().map(|c| format!("{c}")));
    }
}

fn load_fixed(text: &str, ctx: &Ctx) -> Result<StructuredSystem, Failure> {
    let sys = parse_system(text).map_err(|e| Failure::Input(e.to_string()))?;
    ctx.log(&format!(
        "parsed fixed system: n = {}, m = {}",
        sys.n(),
        sys.m()
    ));
    Ok(sys)
}

fn load_switched(text: &str, ctx: &mut Ctx) -> Result<SwitchedStructuredSystem, Failure> {
    let (sw, stripped) = parse_switched_system(text).map_err(|e| Failure::Input(e.to_string()))?;
    ctx.stripped(&stripped);
    ctx.log(&format!(
        "parsed switched system: n = {}, p = {}, inputs = {}",
        sw.n(),
        sw.p(),
        sw.total_inputs()
    ));
    Ok(sw)
}

/// Resolves an `--inputs` list to a flat mask.
fn parse_inputs(
    list: Option<&str>,
    labels: &Labels,
    switched: bool,
    p: usize,
) -> Result<Vec<bool>, Failure> {
    let Some(list) = list else {
        return Ok(vec![true; labels.inputs.len()]);
    };
    let mut mask = vec![false; labels.inputs.len()];
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let name = if labels.inputs.iter().any(|l| l == token) {
            token.to_string()
        } else if let Some((mode, input)) = token.split_once(':').filter(|_| switched) {
            if p > 1 {
                format!("u{}_m{}", input.trim(), mode.trim())
            } else {
                format!("u{}", input.trim())
            }
        } else if token.chars().all(|c| c.is_ascii_digit()) && (!switched || p == 1) {
            format!("u{token}")
        } else {
            token.to_string()
        };
        let idx = labels
            .inputs
            .iter()
            .position(|l| *l == name)
            .ok_or_else(|| {
                Failure::Input(format!(
                    "unknown input {token:?}; known inputs: {}",
                    labels.inputs.join(", ")
                ))
            })?;
        mask[idx] = true;
    }
    Ok(mask)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_check(
    text: &str,
    switched: bool,
    inputs: Option<&str>,
    dot_path: Option<&Path>,
    ctx: &mut Ctx,
) -> Result<Value, Failure> {
    if switched {
        let sw = load_switched(text, ctx)?;
        let labels = Labels::switched(&sw);
        let mask = parse_inputs(inputs, &labels, true, sw.p())?;
        let cert = is_switched_structurally_controllable(&sw, &mask);
        ctx.log("switched controllability checked");
        if let Some(path) = dot_path {
            write_file(
                path,
                &dot::render(
                    &dot::switched_parts(&sw),
                    &labels,
                    &mask,
                    &cert.unreachable_states,
                ),
            )?;
        }
        Ok(labels.certificate(&cert, &mask))
    } else {
        let sys = load_fixed(text, ctx)?;
        let labels = Labels::fixed(&sys);
        let mask = parse_inputs(inputs, &labels, false, 1)?;
        let cert = is_structurally_controllable(&sys, &mask);
        ctx.log("controllability checked");
        if let Some(path) = dot_path {
            write_file(
                path,
                &dot::render(
                    &[(sys.a(), sys.b())],
                    &labels,
                    &mask,
                    &cert.unreachable_states,
                ),
            )?;
        }
        Ok(labels.certificate(&cert, &mask))
    }
}

/// Flags with the TU witness rewritten in 1-based labels.
fn classes_json(class: &ConstraintClass, labels: Option<(&Labels, &IncidenceMatrix)>) -> Value {
    let mut v = serde_json::to_value(class).expect("classes serialize");
    let obj = v.as_object_mut().expect("object");
    let witness = obj.remove("tu_witness");
    if let (Some((labels, w)), Some(Value::Object(wit))) = (labels, witness) {
        let sub = wit.get("submatrix").and_then(Value::as_object);
        let rows = w.rows();
        let row_name = |i: usize| {
            if i == rows {
                "ones".to_string()
            } else {
                format!("s{}", i + 1)
            }
        };
        let entry = sub.map(|s| {
            let idx = |key: &str| -> Vec<usize> {
                s[key].as_array().map(|a| a.iter().filter_map(Value::as_u64).map(|x| x as usize).collect()).unwrap_or_default()
            };
            json!({
                "rows": idx("rows").into_iter().map(row_name).collect::<Vec<_>>(),
                "columns": idx("cols").into_iter().map(|j| labels.inputs[j].clone()).collect::<Vec<_>>(),
                "determinant": s["determinant"],
            })
        });
        obj.insert("tu_witness".into(), entry.unwrap_or(Value::Null));
    }
    v
}

fn incidence_json(
    w: &IncidenceMatrix,
    labels: &Labels,
    sources: Vec<Vec<String>>,
    opts: ClassifyOptions,
) -> Value {
    let class = classify_with(w, opts);
    json!({
        "sources": sources,
        "inputs": labels.inputs,
        "w": w.entries,
        "max_row_sum": w.max_row_sum(),
        "classes": classes_json(&class, Some((labels, w))),
    })
}

fn source_states(a: &inputsel_core::model::SparsityPattern, labels: &Labels) -> Vec<Vec<String>> {
    use inputsel_core::graph::{strongly_connected_components, StateDigraph};
    let scc = strongly_connected_components(&StateDigraph::from_pattern(a));
    scc.source_components()
        .into_iter()
        .map(|c| labels.states(&scc.components[c]))
        .collect()
}

fn cmd_classify(
    text: &str,
    switched: bool,
    uniform: bool,
    ctx: &mut Ctx,
) -> Result<Value, Failure> {
    let opts = ClassifyOptions {
        uniform_monotone: uniform,
        ..ClassifyOptions::default()
    };
    if switched {
        let sw = load_switched(text, ctx)?;
        let labels = Labels::switched(&sw);
        let w = build_switched_incidence(&sw);
        let union = inputsel_core::model::union_system(&sw);
        let mut out = incidence_json(&w, &labels, source_states(&union.a_union, &labels), opts);
        let per_mode: Vec<bool> = sw
            .modes()
            .iter()
            .map(|md| {
                let own = StructuredSystem::new(md.a.clone(), md.b.clone(), md.costs.clone())
                    .expect("valid mode");
                is_sssi(&incidence_of(&own))
            })
            .collect();
        out["per_mode_sssi"] = json!(per_mode);
        out["joint_sssi"] = json!(is_sssi(&w));
        ctx.log("classified joint incidence matrix");
        Ok(out)
    } else {
        let sys = load_fixed(text, ctx)?;
        let labels = Labels::fixed(&sys);
        let out = incidence_json(
            &incidence_of(&sys),
            &labels,
            source_states(sys.a(), &labels),
            opts,
        );
        ctx.log("classified incidence matrix");
        Ok(out)
    }
}

fn selection_json(res: &SelectionResult, labels: &Labels, offsets: &[usize]) -> Value {
    let pairs: Vec<[String; 2]> = res
        .matching
        .iter()
        .map(|p| [labels.state(p.state), labels.right(p.partner)])
        .collect();
    let rounding = res.rounding.as_ref().map(|r| {
        json!({
            "f": r.f,
            "lp_bound": rat(&r.lp_bound),
            "perfect_matching_in_a": r.perfect_matching_in_a,
            "bound": r.bound.as_ref().map(rat),
            "within_bound": r.within_bound,
        })
    });
    json!({
        "problem": res.problem.name(),
        "k": res.k,
        "provenance": res.provenance,
        "cost": rat(&res.cost),
        "selected": labels.of_selection(&res.selected, offsets),
        "matching": pairs,
        "stats": res.stats,
        "rounding": rounding,
    })
}

fn fixed_model(
    sys: &StructuredSystem,
    problem: Problem,
    k: Option<usize>,
) -> Result<IlpModel, BuildError> {
    match problem {
        Problem::P1 => build_p1(sys),
        Problem::P2 => build_p2(sys, k.unwrap_or(0)),
        _ => build_p3(sys),
    }
}

fn switched_model(
    sw: &SwitchedStructuredSystem,
    problem: Problem,
    k: Option<usize>,
) -> Result<IlpModel, BuildError> {
    let k = k.unwrap_or(0);
    match problem {
        Problem::P4 => build_p4(sw),
        Problem::P5 => build_p5(sw, k),
        Problem::P4fix => build_p4fix(sw),
        _ => build_p5fix(sw, k),
    }
}

struct SolveArgs<'a> {
    problem: Problem,
    k: Option<usize>,
    allow_heuristic: bool,
    oracle: bool,
    export_lp: Option<&'a Path>,
}

fn cmd_solve(text: &str, args: SolveArgs<'_>, ctx: &mut Ctx) -> Result<Value, Failure> {
    let SolveArgs {
        problem,
        k,
        allow_heuristic,
        oracle,
        export_lp,
    } = args;
    match (problem.needs_k(), k) {
        (true, None) => {
            return Err(Failure::Input(format!(
                "--k is required for {}",
                problem.name()
            )))
        }
        (false, Some(_)) => {
            return Err(Failure::Input(format!(
                "--k does not apply to {}",
                problem.name()
            )))
        }
        _ => {}
    }
    if problem.is_switched() {
        let sw = load_switched(text, ctx)?;
        let shared = matches!(problem, Problem::P4fix | Problem::P5fix);
        let (labels, offsets) = if shared {
            (Labels::shared(&sw), vec![0])
        } else {
            (Labels::switched(&sw), sw.mode_offsets())
        };
        if let Some(path) = export_lp {
            write_file(path, &switched_model(&sw, problem, k)?.to_lp_format())?;
            ctx.log("model exported");
        }
        let res = if oracle {
            brute_force_switched(&sw, k, shared)
        } else {
            solve_exact_switched(&sw, problem, k).map_err(|e| match e {
                SelectionError::Uncertified(..) if allow_heuristic => SelectionError::Uncertified(
                    inputsel_core::tu::Flag::No,
                    Box::new(inputsel_core::tu::classify(&build_switched_incidence(&sw))),
                ),
                other => other,
            })
        }
        .map_err(|e| with_hint(selection_failure(e), allow_heuristic, true))?;
        ctx.log(&format!("solved {} ({:?})", problem.name(), res.provenance));
        return Ok(selection_json(&res, &labels, &offsets));
    }

    let sys = load_fixed(text, ctx)?;
    let labels = Labels::fixed(&sys);
    if let Some(path) = export_lp {
        write_file(path, &fixed_model(&sys, problem, k)?.to_lp_format())?;
        ctx.log("model exported");
    }
    let res = if oracle {
        fixed_oracle(&sys, problem, k)
    } else {
        match solve_exact(&sys, problem, k) {
            Err(SelectionError::Uncertified(..)) if allow_heuristic && problem == Problem::P1 => {
                ctx.log("not certified; rounding the LP relaxation");
                lp_round(&sys)
            }
            other => other,
        }
    }
    .map_err(|e| with_hint(selection_failure(e), allow_heuristic, false))?;
    ctx.log(&format!("solved {} ({:?})", problem.name(), res.provenance));
    Ok(selection_json(&res, &labels, &[0]))
}

fn with_hint(f: Failure, allow_heuristic: bool, switched: bool) -> Failure {
    match f {
        Failure::Uncertified { message, classes } => {
            let hint = if allow_heuristic && switched {
                "no rounding heuristic exists for switched problems; use --oracle"
            } else if allow_heuristic {
                "rounding covers p1 only; use --oracle"
            } else {
                "rerun with --allow-heuristic (p1) or --oracle"
            };
            Failure::Uncertified {
                message: format!("{message} ({hint})"),
                classes,
            }
        }
        other => other,
    }
}

/// Exhaustive search; the penalised problem first finds the smallest
/// feasible count with unit costs, then the cheapest set of that size.
fn fixed_oracle(
    sys: &StructuredSystem,
    problem: Problem,
    k: Option<usize>,
) -> Result<SelectionResult, SelectionError> {
    if problem != Problem::P3 {
        return brute_force(sys, k);
    }
    let unit = sys
        .with_costs(vec![inputsel_core::rational::int(1); sys.m()])
        .expect("unit costs are valid");
    let fewest = brute_force(&unit, None)?.cost.to_integer();
    let fewest: usize = fewest.try_into().expect("small count");
    let mut res = brute_force(sys, Some(fewest))?;
    res.problem = Problem::P3;
    res.k = None;
    Ok(res)
}

fn cmd_bound(text: &str, export_lp: Option<&Path>, ctx: &mut Ctx) -> Result<Value, Failure> {
    let sys = load_fixed(text, ctx)?;
    let labels = Labels::fixed(&sys);
    if let Some(path) = export_lp {
        write_file(path, &build_p1(&sys)?.to_lp_format())?;
    }
    let b = bounds(&sys).map_err(selection_failure)?;
    ctx.log("bounds computed");
    let rounded = lp_round(&sys).map_err(selection_failure)?;
    ctx.log("rounded selection computed");
    let mask: Vec<bool> = (0..sys.m())
        .map(|j| rounded.selected.iter().any(|mi| mi.input == j))
        .collect();
    let feasible = is_structurally_controllable(&sys, &mask).controllable;
    let cert = rounded.rounding.as_ref().expect("rounding certificate");
    let t_lp: serde_json::Map<String, Value> = labels
        .inputs
        .iter()
        .zip(&b.t_lp)
        .map(|(l, v)| (l.clone(), rat(v)))
        .collect();
    Ok(json!({
        "c_mat": rat(&b.c_mat),
        "c_lp": rat(&b.c_lp),
        "ordered": b.ordered,
        "f": b.f,
        "t_lp": t_lp,
        "rounded": {
            "selected": labels.selected(&mask),
            "cost": rat(&rounded.cost),
            "controllable": feasible,
        },
        "guarantee": {
            "perfect_matching_in_a": cert.perfect_matching_in_a,
            "bound": cert.bound.as_ref().map(rat),
            "within_bound": cert.within_bound,
        },
    }))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Classify { .. } => "classify",
        Command::Solve { .. } => "solve",
        Command::Bound { .. } => "bound",
    }
}

fn command_path(c: &Command) -> &Path {
    match c {
        Command::Check { path, .. }
        | Command::Classify { path, .. }
        | Command::Solve { path, .. }
        | Command::Bound { path, .. } => path,
    }
}

fn run(cli: &Cli, text: &str, ctx: &mut Ctx) -> Result<Value, Failure> {
    match &cli.command {
        Command::Check {
            switched,
            inputs,
            dot,
            ..
        } => cmd_check(text, *switched, inputs.as_deref(), dot.as_deref(), ctx),
        Command::Classify {
            switched,
            uniform_monotone,
            ..
        } => cmd_classify(text, *switched, *uniform_monotone, ctx),
        Command::Solve {
            problem,
            k,
            allow_heuristic,
            oracle,
            export_lp,
            ..
        } => cmd_solve(
            text,
            SolveArgs {
                problem: (*problem).into(),
                k: *k,
                allow_heuristic: *allow_heuristic,
                oracle: *oracle,
                export_lp: export_lp.as_deref(),
            },
            ctx,
        ),
        Command::Bound { export_lp, .. } => cmd_bound(text, export_lp.as_deref(), ctx),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut ctx = Ctx {
        verbose: cli.verbose,
        start,
        warnings: Vec::new(),
    };
    let path = command_path(&cli.command);
    let bytes = std::fs::read(path);
    let fingerprint = bytes
        .as_ref()
        .ok()
        .map(|b| format!("{:x}", Sha256::digest(b)));
    let outcome = match &bytes {
        Ok(b) => match std::str::from_utf8(b) {
            Ok(text) => run(&cli, text, &mut ctx),
            Err(e) => Err(Failure::Input(format!(
                "{} is not UTF-8: {e}",
                path.display()
            ))),
        },
        Err(e) => Err(Failure::Input(format!(
            "cannot read {}: {e}",
            path.display()
        ))),
    };
    for w in &ctx.warnings {
        eprintln!("warning: {w}");
    }
    let (status, code, key, body) = match outcome {
        Ok(v) => ("ok", 0, "result", v),
        Err(f) => (f.status(), f.code(), "error", f.body()),
    };
    let report = json!({
        "command": {
            "name": command_name(&cli.command),
            "argv": std::env::args().skip(1).collect::<Vec<_>>(),
        },
        "input": { "path": path.display().to_string(), "sha256": fingerprint },
        "status": status,
        key: body,
        "warnings": ctx.warnings,
        "elapsed_ms": (start.elapsed().as_secs_f64() * 1e6).round() / 1e3,
    });
    if cli.pretty {
        print!("{}", pretty::render(&report));
    } else {
        println!("{report}");
    }
    if code != 0 {
        if let Some(msg) = report["error"]["message"].as_str() {
            eprintln!("error: {msg}");
        }
    }
    ExitCode::from(code)
}
