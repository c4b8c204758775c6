//! The commands behind the `ltlearn` binary: learning, enumeration,
//! verification, WCNF export/import, the exhaustive reference oracle, and
//! the benchmark suite runner.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ltlearn_core::brute::brute_force_min_consistent;
use ltlearn_core::constraint::{
    check_program, compile, eval_formula, ConcreteCtx, ConstraintError, Env, Program,
};
use ltlearn_core::dag::{dag_to_formula, formula_to_dag, SyntaxDag};
use ltlearn_core::encode::{
    assignment_for_dag, decode, encode, extend_assignment, first_violated, EncodeOptions,
    VarMap,
};
use ltlearn_core::equiv::equivalent;
use ltlearn_core::eval::{evaluate, evaluate_fixpoint};
use ltlearn_core::formula::{parse_formula, Formula, OpKind, Prop};
use ltlearn_core::learn::{
    enumerate, learn, EnumerateStatus, LearnError, LearnOptions, LearnOutcome,
};
use ltlearn_core::maxsat::{parse_external_model, to_wcnf, LayerCost};
use ltlearn_core::trace::Sample;
use thiserror::Error;

use crate::formats::{parse_expected_file, parse_suite_config, parse_trace_file, SuiteMode};
use crate::report::{OutputFormat, RunReport, Verdict};

/// Random-lasso budget of the equivalence tolerance: formulas count as
/// matching when they agree syntactically up to commutative operand order or
/// semantically on this many random traces.
pub const EQUIV_SAMPLES: usize = 10_000;
pub const EQUIV_SEED: u64 = 2025;

/// Errors that abort a command before it can produce a report. Everything
/// else (unsat, failed checks, timeouts) is an outcome with its own exit
/// code, not an error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for input errors, 4 for internal verification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 4,
        }
    }
}

/// Rendered command output plus the process exit code: 0 success, 1 no
/// solution or failed check, 3 timeout.
#[derive(Debug)]
pub struct CmdOutput {
    pub text: String,
    pub code: i32,
}

/// Flags shared by every solving command.
#[derive(Clone, Debug)]
pub struct InstanceOptions {
    pub max_nodes: usize,
    pub presets: Vec<String>,
    pub default_size_objective: bool,
    pub iterative: bool,
    pub timeout: Option<Duration>,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        InstanceOptions {
            max_nodes: 6,
            presets: Vec::new(),
            default_size_objective: true,
            iterative: false,
            timeout: None,
        }
    }
}

fn learn_options(o: &InstanceOptions) -> LearnOptions {
    LearnOptions {
        max_nodes: o.max_nodes,
        iterative: o.iterative,
        default_size_objective: o.default_size_objective,
        timeout: o.timeout,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_sample(path: &Path) -> Result<Sample, CliError> {
    parse_trace_file(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Concatenates the constraint files in order and compiles them together
/// with the named presets.
pub fn load_program(paths: &[PathBuf], presets: &[String]) -> Result<Program, CliError> {
    let mut src = String::new();
    for p in paths {
        src.push_str(&read(p)?);
        src.push('\n');
    }
    let names: Vec<&str> = presets.iter().map(String::as_str).collect();
    compile(&src, &names).map_err(|e| CliError::Input(e.to_string()))
}

fn from_learn_err(e: LearnError) -> CliError {
    match e {
        LearnError::Encode(enc) => CliError::Input(enc.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

fn constraint_input(e: ConstraintError) -> CliError {
    CliError::Input(e.to_string())
}

fn lit_is_true(lit: i32, assign: &[bool]) -> bool {
    let value = assign[lit.unsigned_abs() as usize];
    (lit > 0) == value
}

fn layer_costs(
    layers: &[ltlearn_core::encode::SoftLayer],
    assign: &[bool],
) -> Vec<LayerCost> {
    layers
        .iter()
        .map(|layer| LayerCost {
            priority: layer.priority,
            cost: layer.lits.iter().filter(|&&l| lit_is_true(l, assign)).count(),
        })
        .collect()
}

/// Checks `dag` against the sample (both evaluators must agree — a split is
/// an internal error) and against every constraint. With `bindings` the
/// declared nodes are taken as given; otherwise a placement is searched.
/// Returns the verdicts plus the binding used for constraint evaluation.
#[allow(clippy::type_complexity)]
fn verdicts(
    sample: &Sample,
    program: &Program,
    dag: &SyntaxDag,
    bindings: Option<&BTreeMap<String, usize>>,
) -> Result<
    (Vec<(String, Verdict)>, Vec<(String, Verdict)>, Option<BTreeMap<String, usize>>),
    CliError,
> {
    let mut trace_verdicts = Vec::new();
    for (idx, (trace, positive)) in sample.traces().enumerate() {
        let direct = evaluate(dag, trace);
        let fixpoint = evaluate_fixpoint(dag, trace);
        if direct != fixpoint {
            return Err(CliError::Internal(format!(
                "evaluators disagree on trace {idx}: direct {direct}, fixpoint {fixpoint}"
            )));
        }
        let kind = if positive { "positive" } else { "negative" };
        let verdict = if direct == positive { Verdict::Pass } else { Verdict::Fail };
        trace_verdicts.push((format!("trace {idx} ({kind})"), verdict));
    }

    let ctx = ConcreteCtx::new(dag, &sample.ap);
    let mut constraint_verdicts = Vec::new();
    let witness = if program.decls.is_empty() {
        Some(BTreeMap::new())
    } else {
        match bindings {
            Some(b) => Some(b.clone()),
            None => check_program(program, dag, &sample.ap).map_err(constraint_input)?,
        }
    };
    match &witness {
        Some(bound) => {
            let mut env = Env::new();
            for (name, node) in bound {
                env.insert(name.clone(), *node);
            }
            if !program.decls.is_empty() {
                constraint_verdicts.push(("node placement".to_string(), Verdict::Pass));
            }
            for (i, c) in program.constraints.iter().enumerate() {
                let ok = eval_formula(c, &ctx, &env).map_err(constraint_input)?;
                let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
                constraint_verdicts.push((format!("constraint {i}"), verdict));
            }
        }
        None => {
            constraint_verdicts.push(("node placement".to_string(), Verdict::Fail));
            for i in 0..program.constraints.len() {
                constraint_verdicts.push((format!("constraint {i}"), Verdict::Unresolved));
            }
        }
    }
    Ok((trace_verdicts, constraint_verdicts, witness))
}

/// Report for a solution the pipeline produced. Any failing verdict here is
/// a bug, not a user error.
fn solution_report(
    sample: &Sample,
    program: &Program,
    formula: &Formula,
    dag: &SyntaxDag,
    bindings: &BTreeMap<String, usize>,
    costs: &[LayerCost],
) -> Result<RunReport, CliError> {
    let (trace_verdicts, constraint_verdicts, _) =
        verdicts(sample, program, dag, Some(bindings))?;
    let report = RunReport {
        status: "ok".to_string(),
        formula: Some(formula.to_string()),
        tree_size: Some(formula.tree_size()),
        dag_size: Some(dag.dag_size()),
        dag: Some(dag.clone()),
        bindings: bindings.clone(),
        costs: costs.to_vec(),
        trace_verdicts,
        constraint_verdicts,
        ..RunReport::default()
    };
    if !report.all_pass() {
        return Err(CliError::Internal(format!(
            "emitted solution `{formula}` fails its own verification"
        )));
    }
    Ok(report)
}

fn instance_stats(
    sample: &Sample,
    program: &Program,
    n: usize,
    default_size: bool,
) -> Option<(usize, usize)> {
    encode(
        EncodeOptions { max_nodes: n, default_size_objective: default_size },
        sample,
        program,
    )
    .ok()
    .map(|enc| (enc.num_vars as usize, enc.clauses.len()))
}

pub fn cmd_learn(
    traces: &Path,
    constraints: &[PathBuf],
    opts: &InstanceOptions,
    format: OutputFormat,
) -> Result<CmdOutput, CliError> {
    let sample = load_sample(traces)?;
    let program = load_program(constraints, &opts.presets)?;
    let started = Instant::now();
    let outcome = learn(&sample, &program, &learn_options(opts)).map_err(from_learn_err)?;
    let elapsed = started.elapsed();
    match outcome {
        LearnOutcome::Found(l) => {
            let mut report =
                solution_report(&sample, &program, &l.formula, &l.dag, &l.bindings, &l.costs)?;
            let solved_bound = if opts.iterative { l.dag.len() } else { opts.max_nodes };
            if let Some((v, c)) =
                instance_stats(&sample, &program, solved_bound, opts.default_size_objective)
            {
                report.solver_vars = Some(v);
                report.solver_clauses = Some(c);
            }
            report.elapsed = Some(elapsed);
            Ok(CmdOutput { text: report.render(format), code: 0 })
        }
        LearnOutcome::Unsat => {
            let report = RunReport {
                status: "unsat".to_string(),
                elapsed: Some(elapsed),
                notes: vec![format!(
                    "no formula within {} nodes satisfies the sample and constraints",
                    opts.max_nodes
                )],
                ..RunReport::default()
            };
            Ok(CmdOutput { text: report.render(format), code: 1 })
        }
        LearnOutcome::TimedOut => {
            let report = RunReport {
                status: "timeout".to_string(),
                elapsed: Some(elapsed),
                ..RunReport::default()
            };
            Ok(CmdOutput { text: report.render(format), code: 3 })
        }
    }
}

pub fn cmd_enumerate(
    traces: &Path,
    constraints: &[PathBuf],
    opts: &InstanceOptions,
    limit: usize,
    co_optimal: bool,
    format: OutputFormat,
) -> Result<CmdOutput, CliError> {
    let sample = load_sample(traces)?;
    let program = load_program(constraints, &opts.presets)?;
    let started = Instant::now();
    let (results, status) =
        enumerate(&sample, &program, &learn_options(opts), limit, co_optimal)
            .map_err(from_learn_err)?;
    let elapsed = started.elapsed();

    let mut text = String::new();
    for (i, l) in results.iter().enumerate() {
        let mut report =
            solution_report(&sample, &program, &l.formula, &l.dag, &l.bindings, &l.costs)?;
        report.index = Some(i);
        text.push_str(&report.render(format));
        text.push('\n');
    }
    let status_word = match status {
        EnumerateStatus::Exhausted => "exhausted",
        EnumerateStatus::LimitReached => "limit",
        EnumerateStatus::TimedOut => "timeout",
    };
    match format {
        OutputFormat::Machine => {
            text.push_str(&format!(
                "count: {}\nstatus: {}\ntime.ms: {}\n",
                results.len(),
                status_word,
                elapsed.as_millis()
            ));
        }
        OutputFormat::Human => {
            text.push_str(&format!(
                "{} solution(s), {} after {:.1} ms\n",
                results.len(),
                status_word,
                elapsed.as_secs_f64() * 1000.0
            ));
        }
    }
    let code = match status {
        EnumerateStatus::TimedOut => 3,
        _ if limit > 0 && results.is_empty() => 1,
        _ => 0,
    };
    Ok(CmdOutput { text, code })
}

pub fn cmd_verify(
    traces: &Path,
    constraints: &[PathBuf],
    presets: &[String],
    formula_text: &str,
    tree: bool,
    format: OutputFormat,
) -> Result<CmdOutput, CliError> {
    let sample = load_sample(traces)?;
    let program = load_program(constraints, presets)?;
    let formula =
        parse_formula(formula_text, &sample.ap).map_err(|e| CliError::Input(e.to_string()))?;
    let dag = formula_to_dag(&formula, !tree);
    let started = Instant::now();
    let (trace_verdicts, constraint_verdicts, witness) =
        verdicts(&sample, &program, &dag, None)?;

    let mut report = RunReport {
        formula: Some(formula.to_string()),
        tree_size: Some(formula.tree_size()),
        dag_size: Some(dag.dag_size()),
        bindings: witness.clone().unwrap_or_default(),
        trace_verdicts,
        constraint_verdicts,
        ..RunReport::default()
    };
    // objective costs, accounted exactly as the learner would over a
    // universe the size of this DAG
    if let Some(bound) = &witness {
        if let Ok(enc) = encode(
            EncodeOptions { max_nodes: dag.len(), default_size_objective: true },
            &sample,
            &program,
        ) {
            let base = assignment_for_dag(&enc.varmap, &dag, bound, Some(&sample));
            let assign = extend_assignment(base, &enc.arena, &enc.defs, enc.num_vars);
            report.costs = layer_costs(&enc.layers, &assign);
        }
    }
    report.elapsed = Some(started.elapsed());
    let ok = report.all_pass();
    report.status = if ok { "ok" } else { "fail" }.to_string();
    Ok(CmdOutput { text: report.render(format), code: if ok { 0 } else { 1 } })
}

/// One `var <id> <meaning>` line per variable of the encoding.
fn varmap_sidecar(u: &VarMap, num_vars: i32) -> String {
    let mut out = String::from("var 1 true\n");
    let mut line = |v: i32, meaning: String| {
        out.push_str(&format!("var {v} {meaning}\n"));
    };
    for i in 0..u.n {
        line(u.used(i), format!("used({i})"));
    }
    for i in 0..u.n {
        for op in OpKind::ALL {
            line(u.label_op(i, op), format!("label({i},{})", op.symbol()));
        }
        for (p, prop) in u.ap.iter().enumerate() {
            line(u.label_prop(i, p), format!("label({i},{})", prop.name));
        }
    }
    for i in 0..u.n {
        for j in 0..i {
            line(u.child_l(i, j).unwrap(), format!("childL({i},{j})"));
            line(u.child_r(i, j).unwrap(), format!("childR({i},{j})"));
        }
    }
    for (c, name) in u.consts.iter().enumerate() {
        for i in 0..u.n {
            line(u.const_var(c, i), format!("node({name},{i})"));
        }
    }
    for (t, &len) in u.trace_lens.iter().enumerate() {
        for i in 0..u.n {
            for k in 0..len {
                line(u.sem(t, i, k), format!("sem(t{t},n{i},k{k})"));
                line(u.left_val(t, i, k), format!("lval(t{t},n{i},k{k})"));
                line(u.right_val(t, i, k), format!("rval(t{t},n{i},k{k})"));
            }
        }
    }
    for v in u.first_free_var()..=num_vars {
        line(v, "aux".to_string());
    }
    out
}

pub fn cmd_export(
    traces: &Path,
    constraints: &[PathBuf],
    opts: &InstanceOptions,
    wcnf_path: &Path,
    format: OutputFormat,
) -> Result<CmdOutput, CliError> {
    let sample = load_sample(traces)?;
    let program = load_program(constraints, &opts.presets)?;
    let enc = encode(
        EncodeOptions {
            max_nodes: opts.max_nodes,
            default_size_objective: opts.default_size_objective,
        },
        &sample,
        &program,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    let wcnf = to_wcnf(&enc.clauses, enc.num_vars, &enc.layers);
    fs::write(wcnf_path, wcnf)
        .map_err(|e| CliError::Input(format!("{}: {e}", wcnf_path.display())))?;
    let map_path = wcnf_path.with_extension("map");
    fs::write(&map_path, varmap_sidecar(&enc.varmap, enc.num_vars))
        .map_err(|e| CliError::Input(format!("{}: {e}", map_path.display())))?;
    let report = RunReport {
        status: "ok".to_string(),
        solver_vars: Some(enc.num_vars as usize),
        solver_clauses: Some(enc.clauses.len()),
        notes: vec![
            format!("wcnf: {}", wcnf_path.display()),
            format!("varmap: {}", map_path.display()),
            format!("soft layers: {}", enc.layers.len()),
        ],
        ..RunReport::default()
    };
    Ok(CmdOutput { text: report.render(format), code: 0 })
}

pub fn cmd_import(
    traces: &Path,
    constraints: &[PathBuf],
    opts: &InstanceOptions,
    model_path: &Path,
    format: OutputFormat,
) -> Result<CmdOutput, CliError> {
    let sample = load_sample(traces)?;
    let program = load_program(constraints, &opts.presets)?;
    let enc = encode(
        EncodeOptions {
            max_nodes: opts.max_nodes,
            default_size_objective: opts.default_size_objective,
        },
        &sample,
        &program,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    let started = Instant::now();
    let model = parse_external_model(&read(model_path)?, enc.num_vars)
        .map_err(|e| CliError::Input(format!("{}: {e}", model_path.display())))?;
    if let Some(i) = first_violated(&enc.clauses, &model) {
        return Err(CliError::Input(format!(
            "{}: model falsifies hard clause {i}",
            model_path.display()
        )));
    }
    let (dag, bindings) = decode(&model, &enc.varmap).map_err(|e| {
        CliError::Input(format!("{}: model does not describe a well-formed DAG: {e}", model_path.display()))
    })?;
    let formula = dag_to_formula(&dag);
    let costs = layer_costs(&enc.layers, &model);
    let mut report = solution_report(&sample, &program, &formula, &dag, &bindings, &costs)?;
    report.solver_vars = Some(enc.num_vars as usize);
    report.solver_clauses = Some(enc.clauses.len());
    report.elapsed = Some(started.elapsed());
    Ok(CmdOutput { text: report.render(format), code: 0 })
}

pub fn cmd_oracle(
    traces: &Path,
    constraints: &[PathBuf],
    presets: &[String],
    max_size: usize,
    force: bool,
    format: OutputFormat,
) -> Result<CmdOutput, CliError> {
    if max_size > 8 && !force {
        return Err(CliError::Input(format!(
            "refusing exhaustive search up to tree size {max_size} (limit 8); pass --force to override"
        )));
    }
    let sample = load_sample(traces)?;
    let program = load_program(constraints, presets)?;
    let filtered = !program.constraints.is_empty() || !program.decls.is_empty();
    let started = Instant::now();
    let result = if filtered {
        if let Some(p) = sample.ap.first() {
            // surface bad constraint references (e.g. unknown propositions)
            // before the search instead of silently filtering everything out
            let probe = formula_to_dag(&Formula::Atom(p.clone()), false);
            check_program(&program, &probe, &sample.ap).map_err(constraint_input)?;
        }
        let ap = sample.ap.clone();
        let filter = |f: &Formula| {
            let dag = formula_to_dag(f, false);
            matches!(check_program(&program, &dag, &ap), Ok(Some(_)))
        };
        brute_force_min_consistent(&sample, max_size, Some(&filter))
    } else {
        brute_force_min_consistent(&sample, max_size, None)
    };
    let elapsed = started.elapsed();
    match result {
        Some(f) => {
            let dag = formula_to_dag(&f, false);
            let (trace_verdicts, constraint_verdicts, _) =
                verdicts(&sample, &program, &dag, None)?;
            let report = RunReport {
                status: "ok".to_string(),
                formula: Some(f.to_string()),
                tree_size: Some(f.tree_size()),
                dag_size: Some(dag.dag_size()),
                trace_verdicts,
                constraint_verdicts,
                elapsed: Some(elapsed),
                ..RunReport::default()
            };
            Ok(CmdOutput { text: report.render(format), code: 0 })
        }
        None => {
            let report = RunReport {
                status: "none".to_string(),
                elapsed: Some(elapsed),
                notes: vec![format!("no consistent formula up to tree size {max_size}")],
                ..RunReport::default()
            };
            Ok(CmdOutput { text: report.render(format), code: 1 })
        }
    }
}

/// Whether `found` matches `target` under the suite equivalence tolerance.
pub fn matches_target(found: &Formula, target: &Formula, ap: &[Prop]) -> bool {
    equivalent(found, target, ap, EQUIV_SAMPLES, EQUIV_SEED).is_ok()
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub ok: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Runs one suite directory: `traces.txt` + optional `constraints.lc` +
/// `expected.txt` + optional `suite.cfg`. In learn mode the result must
/// match one expected formula; in enumerate mode every expected formula
/// must show up among the solutions.
pub fn run_suite(dir: &Path) -> Result<SuiteOutcome, CliError> {
    let cfg_path = dir.join("suite.cfg");
    let cfg_text = fs::read_to_string(&cfg_path).unwrap_or_default();
    let cfg = parse_suite_config(&cfg_text)
        .map_err(|e| CliError::Input(format!("{}: {e}", cfg_path.display())))?;
    let sample = load_sample(&dir.join("traces.txt"))?;
    let constraint_path = dir.join("constraints.lc");
    let constraint_files =
        if constraint_path.exists() { vec![constraint_path] } else { Vec::new() };
    let program = load_program(&constraint_files, &cfg.presets)?;
    let expected_path = dir.join("expected.txt");
    let expected: Vec<Formula> = parse_expected_file(&read(&expected_path)?)
        .iter()
        .map(|s| parse_formula(s, &sample.ap))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("{}: {e}", expected_path.display())))?;
    if expected.is_empty() {
        return Err(CliError::Input(format!("{}: no expected formulas", expected_path.display())));
    }
    let opts = LearnOptions {
        max_nodes: cfg.max_nodes,
        iterative: cfg.iterative,
        default_size_objective: cfg.default_size_objective,
        timeout: cfg.timeout,
    };
    let started = Instant::now();
    match cfg.mode {
        SuiteMode::Learn => {
            match learn(&sample, &program, &opts).map_err(from_learn_err)? {
                LearnOutcome::Found(l) => {
                    let hit =
                        expected.iter().any(|e| matches_target(&l.formula, e, &sample.ap));
                    let detail = if hit {
                        format!("learned {}", l.formula)
                    } else {
                        format!("learned {}, which matches no expected formula", l.formula)
                    };
                    Ok(SuiteOutcome { ok: hit, detail, elapsed: started.elapsed() })
                }
                LearnOutcome::Unsat => Ok(SuiteOutcome {
                    ok: false,
                    detail: "unsat within the node budget".to_string(),
                    elapsed: started.elapsed(),
                }),
                LearnOutcome::TimedOut => Ok(SuiteOutcome {
                    ok: false,
                    detail: "timed out".to_string(),
                    elapsed: started.elapsed(),
                }),
            }
        }
        SuiteMode::Enumerate => {
            let (results, status) =
                enumerate(&sample, &program, &opts, cfg.limit, cfg.co_optimal)
                    .map_err(from_learn_err)?;
            let missing: Vec<String> = expected
                .iter()
                .filter(|e| !results.iter().any(|r| matches_target(&r.formula, e, &sample.ap)))
                .map(|e| e.to_string())
                .collect();
            let status_word = match status {
                EnumerateStatus::Exhausted => "exhausted",
                EnumerateStatus::LimitReached => "limit",
                EnumerateStatus::TimedOut => "timeout",
            };
            let detail = if missing.is_empty() {
                format!("{} solutions ({status_word}), all expected found", results.len())
            } else {
                format!(
                    "{} solutions ({status_word}), missing: {}",
                    results.len(),
                    missing.join("; ")
                )
            };
            Ok(SuiteOutcome { ok: missing.is_empty(), detail, elapsed: started.elapsed() })
        }
    }
}

pub fn cmd_bench(dirs: &[PathBuf], format: OutputFormat) -> Result<CmdOutput, CliError> {
    if dirs.is_empty() {
        return Err(CliError::Input("no suite directories given".to_string()));
    }
    let mut text = String::new();
    let mut failed = 0usize;
    for dir in dirs {
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        let (ok, detail, secs) = match run_suite(dir) {
            Ok(o) => (o.ok, o.detail, o.elapsed.as_secs_f64()),
            Err(e) => (false, e.to_string(), 0.0),
        };
        if !ok {
            failed += 1;
        }
        match format {
            OutputFormat::Human => {
                text.push_str(&format!(
                    "{name}: {} ({secs:.2} s) — {detail}\n",
                    if ok { "ok" } else { "fail" }
                ));
            }
            OutputFormat::Machine => {
                text.push_str(&format!("suite.{name}: {}\n", if ok { "ok" } else { "fail" }));
                text.push_str(&format!("suite.{name}.ms: {}\n", (secs * 1000.0) as u64));
                text.push_str(&format!("suite.{name}.detail: {detail}\n"));
            }
        }
    }
    match format {
        OutputFormat::Human => {
            text.push_str(&format!("{} suite(s), {failed} failed\n", dirs.len()));
        }
        OutputFormat::Machine => {
            text.push_str(&format!("suites.total: {}\nsuites.failed: {failed}\n", dirs.len()));
        }
    }
    Ok(CmdOutput { text, code: if failed == 0 { 0 } else { 1 } })
}
