//! End-to-end acceptance checks. Each test pins one observable guarantee of
//! the shipped pipeline — suite learning, enumeration, evaluator agreement,
//! encoder faithfulness, learned minimality, constraint-route agreement,
//! optimizer optimality, and solver-file round-trips — and prints exactly one
//! `acceptance <name>: pass|fail` line with its elapsed time.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ltlearn_cli::commands::{
    cmd_export, cmd_import, cmd_learn, cmd_oracle, load_sample, run_suite, InstanceOptions,
};
use ltlearn_cli::report::OutputFormat;
use ltlearn_core::constraint::{check_program, compile, CFormula, Expr, Program};
use ltlearn_core::dag::formula_to_dag;
use ltlearn_core::encode::{
    assignment_for_dag, encode, extend_assignment, first_violated, EncodeOptions, SoftLayer,
    VarMap,
};
use ltlearn_core::eval::{evaluate, evaluate_fixpoint, evaluate_table, holds};
use ltlearn_core::formula::parse_formula;
use ltlearn_core::gen::{random_formula, random_lasso, rng};
use ltlearn_core::ground::{ground_formula, ExprArena};
use ltlearn_core::maxsat::{parse_wcnf, LexSession, SolveStatus};
use ltlearn_core::{
    learn, LassoTrace, LearnOptions, LearnOutcome, NodeLabel, OpKind, Prop, Sample, SyntaxDag,
};
use ltlearn_core::formula::props;

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn suite_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../suites")
        .join(name)
}

/// Prints the single verdict line for a criterion and asserts it.
fn conclude(name: &str, started: Instant, budget: Option<Duration>, failures: &[String], detail: &str) {
    let elapsed = started.elapsed();
    let on_time = match budget {
        Some(b) => elapsed <= b,
        None => true,
    };
    let verdict = if failures.is_empty() && on_time { "pass" } else { "fail" };
    println!(
        "acceptance {name}: {verdict} ({:.2}s) — {detail}",
        elapsed.as_secs_f64()
    );
    assert!(
        on_time,
        "{name} exceeded its {:?} budget (took {elapsed:?})",
        budget.expect("budget was set")
    );
    assert!(failures.is_empty(), "{name}:\n{}", failures.join("\n"));
}

fn machine_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix(": ")))
        .map(str::trim)
}

/// Deterministic auxiliary mixer for sizes/labels, independent of the
/// library's own generator (xorshift64*).
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0 = self.0.wrapping_mul(0x2545_f491_4f6c_dd1d);
        self.0
    }

    fn below(&mut self, n: u64) -> usize {
        (self.next() % n) as usize
    }
}

fn lasso(ap: &[Prop], states: &[&[u8]], loop_start: usize) -> LassoTrace {
    let states = states
        .iter()
        .map(|row| row.iter().map(|&b| b != 0).collect())
        .collect();
    LassoTrace::new(ap.to_vec(), states, loop_start).expect("valid lasso literal")
}

fn render_lasso(t: &LassoTrace) -> String {
    let states: Vec<String> = t
        .states
        .iter()
        .map(|s| {
            s.iter()
                .map(|&b| if b { "1" } else { "0" })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    format!("{}::{}", states.join(";"), t.loop_start)
}

fn render_sample(sample: &Sample) -> String {
    let mut out = String::new();
    for t in &sample.positives {
        out.push_str(&render_lasso(t));
        out.push('\n');
    }
    out.push_str("---\n");
    for t in &sample.negatives {
        out.push_str(&render_lasso(t));
        out.push('\n');
    }
    out.push_str("---\n");
    let names: Vec<&str> = sample.ap.iter().map(|p| p.name.as_str()).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    out
}

/// Every syntax DAG over `ap` with at most `max_nodes` slots, children
/// strictly below their parent and every slot reachable from the root.
fn all_dags(ap: &[Prop], max_nodes: usize) -> Vec<SyntaxDag> {
    fn extend(
        ap: &[Prop],
        labels: &mut Vec<NodeLabel>,
        left: &mut Vec<Option<usize>>,
        right: &mut Vec<Option<usize>>,
        max_nodes: usize,
        out: &mut Vec<SyntaxDag>,
    ) {
        let n = labels.len();
        if n > 0 {
            let dag = SyntaxDag::new(labels.clone(), left.clone(), right.clone(), n - 1)
                .expect("children precede parents by construction");
            if dag.dag_size() == n {
                out.push(dag);
            }
        }
        if n == max_nodes {
            return;
        }
        for p in ap {
            labels.push(NodeLabel::Atom(p.clone()));
            left.push(None);
            right.push(None);
            extend(ap, labels, left, right, max_nodes, out);
            labels.pop();
            left.pop();
            right.pop();
        }
        if n == 0 {
            return;
        }
        for op in OpKind::ALL {
            if op.arity() == 1 {
                for c in 0..n {
                    labels.push(NodeLabel::Op(op));
                    left.push(Some(c));
                    right.push(None);
                    extend(ap, labels, left, right, max_nodes, out);
                    labels.pop();
                    left.pop();
                    right.pop();
                }
            } else {
                for cl in 0..n {
                    for cr in 0..n {
                        labels.push(NodeLabel::Op(op));
                        left.push(Some(cl));
                        right.push(Some(cr));
                        extend(ap, labels, left, right, max_nodes, out);
                        labels.pop();
                        left.pop();
                        right.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    extend(
        ap,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut Vec::new(),
        max_nodes,
        &mut out,
    );
    out
}

/// A `G (trigger -> effect)` weakening template: the left side may only
/// strengthen the trigger conjunctively, the right side may only weaken the
/// effect disjunctively, so every admissible formula is implied by
/// `G (trigger -> effect)` itself.
fn weakening_program(trigger: &str, effect: &str) -> String {
    format!(
        "node ng in N[G];\n\
         node nimp in N[->];\n\
         constraint root = ng;\n\
         constraint l(root) = nimp;\n\
         constraint desc(nimp) in (N[&] + N[|] + N[!] + AP);\n\
         constraint all n in (desc(nimp) & N[!]) : l(n) in AP;\n\
         constraint all n in (subNodes(l(nimp)) & N[|]) : no (desc(n) & N[&]);\n\
         constraint all n in (subNodes(r(nimp)) & N[&]) : no (desc(n) & N[|]);\n\
         constraint (l(nimp) in N[{trigger}]) or ((l(nimp) in N[&]) and (l(l(nimp)) in N[{trigger}]));\n\
         constraint (r(nimp) in N[{effect}]) or ((r(nimp) in N[|]) and (l(r(nimp)) in N[{effect}]));\n"
    )
}

// ---------------------------------------------------------------------------
// Symbolic admissibility route (ground once, evaluate per candidate)
// ---------------------------------------------------------------------------

const UNIVERSE: usize = 4;

struct GroundedProgram {
    varmap: VarMap,
    arena: ExprArena,
    domain_checks: Vec<u32>,
    constraint_checks: Vec<u32>,
    decl_names: Vec<String>,
}

fn ground_once(program: &Program, ap: &[Prop]) -> GroundedProgram {
    let decl_names: Vec<String> = program.decls.iter().map(|d| d.name.clone()).collect();
    let varmap = VarMap::new(UNIVERSE, ap.to_vec(), decl_names.clone(), vec![]);
    let mut arena = ExprArena::new();
    let env = HashMap::new();
    let domain_checks = program
        .decls
        .iter()
        .map(|d| {
            let membership = CFormula::Subset(Expr::Const(d.name.clone()), d.domain.clone());
            ground_formula(&membership, &varmap, &mut arena, &env).expect("grounds")
        })
        .collect();
    let constraint_checks = program
        .constraints
        .iter()
        .map(|c| ground_formula(c, &varmap, &mut arena, &env).expect("grounds"))
        .collect();
    GroundedProgram { varmap, arena, domain_checks, constraint_checks, decl_names }
}

fn distinct_tuples(pool: &[usize], arity: usize) -> Vec<Vec<usize>> {
    if arity == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for &node in pool {
        for mut rest in distinct_tuples(pool, arity - 1) {
            if !rest.contains(&node) {
                rest.insert(0, node);
                out.push(rest);
            }
        }
    }
    out
}

fn symbolic_admissible(g: &GroundedProgram, dag: &SyntaxDag) -> bool {
    let nodes = dag.topo_order();
    for combo in distinct_tuples(&nodes, g.decl_names.len()) {
        let bindings: BTreeMap<String, usize> =
            g.decl_names.iter().cloned().zip(combo).collect();
        let assign = assignment_for_dag(&g.varmap, dag, &bindings, None);
        let eval = |id: u32| g.arena.eval(id, &|v| assign[v as usize]);
        if g.domain_checks.iter().all(|&id| eval(id))
            && g.constraint_checks.iter().all(|&id| eval(id))
        {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// 1–4: shipped suites
// ---------------------------------------------------------------------------

#[test]
fn mutual_exclusion_suite_learns_the_invariant() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let dir = suite_dir("peterson-mutex");
    let sample = load_sample(&dir.join("traces.txt")).expect("suite traces parse");
    if sample.ap.len() != 15 {
        failures.push(format!("expected 15 propositions, found {}", sample.ap.len()));
    }
    let traces: Vec<&LassoTrace> = sample.positives.iter().chain(&sample.negatives).collect();
    if traces.len() < 2 {
        failures.push(format!("expected at least two traces, found {}", traces.len()));
    }
    for t in &traces {
        if t.len() > 32 {
            failures.push(format!("trace of length {} exceeds the 32-state cap", t.len()));
        }
    }
    let outcome = run_suite(&dir).expect("suite runs");
    if !outcome.ok {
        failures.push(outcome.detail.clone());
    }
    conclude(
        "mutual-exclusion-suite",
        started,
        Some(Duration::from_secs(60)),
        &failures,
        &outcome.detail,
    );
}

#[test]
fn trigger_response_suite_learns_the_liveness_property() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let outcome = run_suite(&suite_dir("peterson-deadlockfree")).expect("suite runs");
    if !outcome.ok {
        failures.push(outcome.detail.clone());
    }
    conclude(
        "trigger-response-suite",
        started,
        Some(Duration::from_secs(60)),
        &failures,
        &outcome.detail,
    );
}

#[test]
fn voting_suite_enumeration_surfaces_both_invariants() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let outcome = run_suite(&suite_dir("voting")).expect("suite runs");
    if !outcome.ok {
        failures.push(outcome.detail.clone());
    }
    conclude(
        "voting-enumeration-suite",
        started,
        Some(Duration::from_secs(60)),
        &failures,
        &outcome.detail,
    );
}

#[test]
fn repair_suite_retains_the_old_specification_core() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let outcome = run_suite(&suite_dir("robot-repair")).expect("suite runs");
    if !outcome.ok {
        failures.push(outcome.detail.clone());
    }
    conclude(
        "specification-repair-suite",
        started,
        Some(Duration::from_secs(60)),
        &failures,
        &outcome.detail,
    );
}

// ---------------------------------------------------------------------------
// 5: weakening stays implied by the original formula
// ---------------------------------------------------------------------------

#[test]
fn weakening_always_returns_a_formula_implied_by_the_original() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let outcome = run_suite(&suite_dir("therac-weakening")).expect("suite runs");
    if !outcome.ok {
        failures.push(outcome.detail.clone());
    }
    if outcome.elapsed > Duration::from_secs(120) {
        failures.push(format!("suite took {:?}, budget 120s", outcome.elapsed));
    }

    // Synthetic family: the original invariant is G (a -> b); samples are
    // labeled by the strengthened-trigger variant G (a & c -> b), so the
    // learner must weaken. Whatever it returns has to stay implied by the
    // original on a large random trace set.
    let ap = props(&["a", "b", "c"]);
    let original = parse_formula("G (a -> b)", &ap).expect("parses");
    let target = parse_formula("G (a & c -> b)", &ap).expect("parses");
    let program = compile(&weakening_program("a", "b"), &[]).expect("compiles");
    let mut r = rng(0xc5);
    let mut mix = Mix(0xa5a5_5a5a_1234_5678);
    for instance in 0..20 {
        let instance_started = Instant::now();
        let mut positives = vec![lasso(&ap, &[&[0, 1, 0]], 0)];
        let mut negatives = vec![lasso(&ap, &[&[1, 0, 1]], 0)];
        let extra = 2 + mix.below(17);
        for _ in 0..extra {
            let t = random_lasso(&mut r, &ap, 1 + mix.below(10));
            let (mut p, mut n) = (positives.clone(), negatives.clone());
            if holds(&target, &t) {
                p.push(t);
            } else {
                n.push(t);
            }
            if Sample::new(ap.clone(), p.clone(), n.clone()).is_ok() {
                positives = p;
                negatives = n;
            }
        }
        let sample = Sample::new(ap.clone(), positives, negatives).expect("kept consistent");
        let options = LearnOptions { max_nodes: 6, ..LearnOptions::default() };
        match learn(&sample, &program, &options) {
            Ok(LearnOutcome::Found(got)) => {
                let mut broken = 0usize;
                for _ in 0..10_000 {
                    let t = random_lasso(&mut r, &ap, 1 + mix.below(10));
                    if holds(&original, &t) && !holds(&got.formula, &t) {
                        broken += 1;
                    }
                }
                if broken > 0 {
                    failures.push(format!(
                        "instance {instance}: {} is not implied by the original on {broken}/10000 traces",
                        got.formula
                    ));
                }
            }
            Ok(other) => failures.push(format!("instance {instance}: learner returned {other:?}")),
            Err(e) => failures.push(format!("instance {instance}: learner failed: {e}")),
        }
        if instance_started.elapsed() > Duration::from_secs(120) {
            failures.push(format!(
                "instance {instance} took {:?}, budget 120s",
                instance_started.elapsed()
            ));
        }
    }
    conclude(
        "implication-weakening",
        started,
        None,
        &failures,
        "shipped suite plus 20 synthetic instances, 10000 implication probes each",
    );
}

// ---------------------------------------------------------------------------
// 6: the two evaluators never disagree
// ---------------------------------------------------------------------------

#[test]
fn both_evaluators_agree_on_random_formulas_and_traces() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let all = props(&["p", "q", "r"]);
    let mut r = rng(0x06);
    let mut mix = Mix(0x0606_0606_0606_0607);
    let mut checked = 0usize;
    for _ in 0..10_000 {
        let k = 1 + mix.below(3);
        let ap = &all[..k];
        let f = random_formula(&mut r, ap, 1 + mix.below(7));
        let t = random_lasso(&mut r, ap, 1 + mix.below(8));
        for shared in [false, true] {
            let dag = formula_to_dag(&f, shared);
            let direct = evaluate(&dag, &t);
            let fixpoint = evaluate_fixpoint(&dag, &t);
            if direct != fixpoint {
                failures.push(format!(
                    "{f} on {}: unrolling says {direct}, fixpoint says {fixpoint}",
                    render_lasso(&t)
                ));
            }
            checked += 1;
        }
        if failures.len() > 5 {
            break;
        }
    }
    conclude(
        "evaluator-agreement",
        started,
        Some(Duration::from_secs(60)),
        &failures,
        &format!("{checked} formula/trace evaluations"),
    );
}

// ---------------------------------------------------------------------------
// 7: semantic clauses force exactly the evaluator's truth table
// ---------------------------------------------------------------------------

#[test]
fn pinned_structures_force_exactly_the_evaluation_table() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let all = props(&["p", "q", "r"]);
    let empty = compile("", &[]).expect("compiles");
    let mut r = rng(0x07);
    let mut mix = Mix(0x7777_0123_4567_89ab);
    let mut cells = 0usize;
    for case in 0..200 {
        let k = 1 + mix.below(3);
        let ap = all[..k].to_vec();
        let f = random_formula(&mut r, &ap, 1 + mix.below(6));
        let dag = formula_to_dag(&f, mix.below(2) == 0);
        let trace = random_lasso(&mut r, &ap, 1 + mix.below(8));
        let positive = evaluate(&dag, &trace);
        let sample = Sample::new(
            ap.clone(),
            if positive { vec![trace.clone()] } else { Vec::new() },
            if positive { Vec::new() } else { vec![trace.clone()] },
        )
        .expect("single-trace sample");
        let enc = encode(
            EncodeOptions { max_nodes: dag.len(), default_size_objective: false },
            &sample,
            &empty,
        )
        .expect("encodes");
        let pin = assignment_for_dag(&enc.varmap, &dag, &BTreeMap::new(), None);
        let mut clauses = enc.clauses.clone();
        for v in enc.varmap.structural_vars() {
            clauses.push(vec![if pin[v as usize] { v } else { -v }]);
        }
        let mut session = LexSession::with_varisat(&clauses, enc.num_vars, &enc.layers);
        match session.solve().expect("solver runs") {
            SolveStatus::Optimal { model, .. } => {
                let table = evaluate_table(&dag, &trace);
                let order = dag.topo_order();
                for (slot, &node) in order.iter().enumerate() {
                    for step in 0..trace.len() {
                        let forced = model[enc.varmap.sem(0, slot, step) as usize];
                        if forced != table[node][step] {
                            failures.push(format!(
                                "case {case} ({f}): slot {slot} step {step}: clauses force {forced}, evaluator says {}",
                                table[node][step]
                            ));
                        }
                        cells += 1;
                    }
                }
            }
            SolveStatus::Unsat => {
                failures.push(format!("case {case} ({f}): pinned structure became unsatisfiable"))
            }
            SolveStatus::TimedOut => failures.push(format!("case {case}: solver timed out")),
        }
        if failures.len() > 5 {
            break;
        }
    }
    conclude(
        "semantic-encoding",
        started,
        Some(Duration::from_secs(120)),
        &failures,
        &format!("{cells} table cells across 200 pinned structures"),
    );
}

// ---------------------------------------------------------------------------
// 8: learned tree size equals the exhaustive minimum
// ---------------------------------------------------------------------------

#[test]
fn learned_tree_size_matches_the_exhaustive_minimum() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let ap = props(&["p", "q"]);
    let dir = tempfile::tempdir().expect("tempdir");
    let mut r = rng(0x08);
    let mut mix = Mix(0x8bad_f00d_dead_beef);
    let mut compared = 0usize;
    let mut attempts = 0usize;
    while compared < 100 && attempts < 160 {
        attempts += 1;
        let total = 2 + mix.below(3);
        let mut traces = Vec::new();
        for _ in 0..total {
            traces.push(random_lasso(&mut r, &ap, 1 + mix.below(6)));
        }
        let mut positives = vec![traces[0].clone()];
        let mut negatives = vec![traces[1].clone()];
        for t in traces.into_iter().skip(2) {
            if mix.below(2) == 0 {
                positives.push(t);
            } else {
                negatives.push(t);
            }
        }
        let Ok(sample) = Sample::new(ap.clone(), positives, negatives) else {
            continue;
        };
        let path = dir.path().join(format!("sample-{attempts}.txt"));
        fs::write(&path, render_sample(&sample)).expect("write sample");
        let oracle =
            cmd_oracle(&path, &[], &[], 6, false, OutputFormat::Machine).expect("oracle runs");
        let options = InstanceOptions {
            presets: vec!["no-dag-reuse".into()],
            ..InstanceOptions::default()
        };
        let learned = cmd_learn(&path, &[], &options, OutputFormat::Machine).expect("learn runs");
        let oracle_min =
            machine_value(&oracle.text, "size.tree").and_then(|v| v.parse::<usize>().ok());
        let learned_size =
            machine_value(&learned.text, "size.tree").and_then(|v| v.parse::<usize>().ok());
        match (oracle_min, learned_size) {
            (Some(minimum), Some(size)) => {
                if size != minimum && failures.len() < 8 {
                    failures.push(format!(
                        "attempt {attempts}: learned tree size {size}, exhaustive minimum {minimum}"
                    ));
                }
                compared += 1;
            }
            (Some(minimum), None) => failures.push(format!(
                "attempt {attempts}: a size-{minimum} separator exists but the learner reported none"
            )),
            (None, Some(size)) => failures.push(format!(
                "attempt {attempts}: learner found a size-{size} tree the exhaustive search missed"
            )),
            (None, None) => {}
        }
    }
    if compared < 100 {
        failures.push(format!(
            "only {compared} solvable samples out of {attempts} attempts"
        ));
    }
    conclude(
        "size-minimality",
        started,
        Some(Duration::from_secs(600)),
        &failures,
        &format!("{compared} random samples compared against exhaustive search"),
    );
}

// ---------------------------------------------------------------------------
// 9: symbolic grounding agrees with direct constraint checks
// ---------------------------------------------------------------------------

fn constraint_battery() -> Vec<(String, Program)> {
    let mut out = Vec::new();
    for preset in ["no-dag-reuse", "no-tautology", "nnf", "liveness-pattern"] {
        out.push((format!("preset {preset}"), compile("", &[preset]).expect("compiles")));
    }
    let weakening = weakening_program("p", "q");
    let user: &[(&str, &str)] = &[
        (
            "guarded invariant",
            "constraint root in N[G] and no (subNodes(l(root)) & Temporal);",
        ),
        (
            "ordered pair",
            "node nimp in N[->];\nnode nf in N[F];\nconstraint {(l(nimp), l(nf))} in {(N[p], N[q])};",
        ),
        ("implication weakening", weakening.as_str()),
        ("distinct temporal declarations", "node ng in N[G];\nnode nf in N[F];"),
        ("temporal atom guard", "constraint some x in Temporal : desc(x) in AP;"),
    ];
    for (label, src) in user {
        out.push((label.to_string(), compile(src, &[]).expect("compiles")));
    }
    out.push((
        "liveness pattern with atomic trigger".to_string(),
        compile("constraint l(nimp) in AP;", &["liveness-pattern"]).expect("compiles"),
    ));
    out
}

#[test]
fn symbolic_grounding_matches_direct_constraint_checks() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let ap = props(&["p", "q"]);
    let dags = all_dags(&ap, UNIVERSE);
    let programs = constraint_battery();
    let mut admissible = 0usize;
    for (label, program) in &programs {
        let grounded = ground_once(program, &ap);
        let mut per_program = 0usize;
        for dag in &dags {
            let direct = check_program(program, dag, &ap)
                .expect("direct check succeeds")
                .is_some();
            let symbolic = symbolic_admissible(&grounded, dag);
            if direct != symbolic && failures.len() < 8 {
                failures.push(format!(
                    "{label}: direct says {direct}, symbolic says {symbolic} for labels {:?} left {:?} right {:?}",
                    dag.labels, dag.left, dag.right
                ));
            }
            per_program += usize::from(direct);
        }
        admissible += per_program;
    }
    if admissible == 0 {
        failures.push("no admissible structure in the whole battery".to_string());
    }
    conclude(
        "constraint-route-agreement",
        started,
        None,
        &failures,
        &format!(
            "{} structures x {} programs, {admissible} admissible",
            dags.len(),
            programs.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 10: lexicographic optima and solver-file round-trips
// ---------------------------------------------------------------------------

fn exhaustive_optimum(
    clauses: &[Vec<i32>],
    num_vars: i32,
    layers: &[SoftLayer],
) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    'assignments: for bits in 0u32..(1u32 << num_vars as u32) {
        let val = |l: i32| -> bool {
            let b = (bits >> (l.unsigned_abs() - 1)) & 1 == 1;
            if l > 0 {
                b
            } else {
                !b
            }
        };
        for c in clauses {
            if !c.iter().any(|&l| val(l)) {
                continue 'assignments;
            }
        }
        let costs: Vec<usize> = layers
            .iter()
            .map(|layer| layer.lits.iter().filter(|&&l| val(l)).count())
            .collect();
        best = match best {
            Some(b) if b <= costs => Some(b),
            _ => Some(costs),
        };
    }
    best
}

/// Exports an instance to a weighted CNF file, reconstructs the ladder from
/// the parsed file alone, solves it, feeds the model back through the
/// importer, and checks the decoded DAG matches a direct `learn` run.
fn wcnf_round_trip(
    label: &str,
    traces: &Path,
    constraints: &[PathBuf],
    options: &InstanceOptions,
    failures: &mut Vec<String>,
) {
    let dir = tempfile::tempdir().expect("tempdir");
    let wcnf_path = dir.path().join("instance.wcnf");
    cmd_export(traces, constraints, options, &wcnf_path, OutputFormat::Machine).expect("export");
    let text = fs::read_to_string(&wcnf_path).expect("exported file readable");
    let parsed = parse_wcnf(&text).expect("exported file parses");

    let sample = load_sample(traces).expect("traces load");
    let merged: String = constraints
        .iter()
        .map(|p| fs::read_to_string(p).expect("constraint file readable"))
        .collect::<Vec<_>>()
        .join("\n");
    let preset_refs: Vec<&str> = options.presets.iter().map(String::as_str).collect();
    let program = compile(&merged, &preset_refs).expect("compiles");
    let enc = encode(
        EncodeOptions {
            max_nodes: options.max_nodes,
            default_size_objective: options.default_size_objective,
        },
        &sample,
        &program,
    )
    .expect("encodes");

    if parsed.num_vars != enc.num_vars {
        failures.push(format!(
            "{label}: exported {} variables, encoder allocated {}",
            parsed.num_vars, enc.num_vars
        ));
    }
    let hard: Vec<Vec<i32>> = parsed
        .clauses
        .iter()
        .filter(|c| c.weight.is_none())
        .map(|c| c.lits.clone())
        .collect();
    if hard != enc.clauses {
        failures.push(format!("{label}: hard clauses changed across export/parse"));
        return;
    }

    // Soft unit clauses carry cascade weights: descending weight runs are
    // the layers, and each unit clause penalizes the negated cost literal.
    let mut groups: Vec<(u64, Vec<i32>)> = Vec::new();
    for c in parsed.clauses.iter().filter(|c| c.weight.is_some()) {
        let w = c.weight.expect("soft clause");
        if c.lits.len() != 1 {
            failures.push(format!("{label}: soft clause with {} literals", c.lits.len()));
            return;
        }
        let lit = -c.lits[0];
        match groups.last_mut() {
            Some((gw, lits)) if *gw == w => lits.push(lit),
            _ => groups.push((w, vec![lit])),
        }
    }
    for pair in groups.windows(2) {
        if pair[0].0 <= pair[1].0 {
            failures.push(format!("{label}: soft weights are not strictly layered"));
            return;
        }
    }
    let rebuilt: Vec<SoftLayer> = groups
        .iter()
        .enumerate()
        .map(|(i, (_, lits))| SoftLayer {
            priority: (groups.len() - i) as u32,
            lits: lits.clone(),
        })
        .collect();
    let rebuilt_lits: Vec<&Vec<i32>> = rebuilt.iter().map(|l| &l.lits).collect();
    let encoded_lits: Vec<&Vec<i32>> = enc.layers.iter().map(|l| &l.lits).collect();
    if rebuilt_lits != encoded_lits {
        failures.push(format!("{label}: soft layers changed across export/parse"));
        return;
    }

    let mut session = LexSession::with_varisat(&hard, parsed.num_vars, &rebuilt);
    match session.solve().expect("round-trip instance solves") {
        SolveStatus::Optimal { model, costs } => {
            let body: String = (1..=parsed.num_vars)
                .map(|v| {
                    let lit = if model[v as usize] { v } else { -v };
                    format!(" {lit}")
                })
                .collect();
            let model_path = dir.path().join("model.txt");
            fs::write(&model_path, format!("v{body} 0\n")).expect("write model");
            let imported = cmd_import(traces, constraints, options, &model_path, OutputFormat::Machine)
                .expect("import runs");
            let direct = cmd_learn(traces, constraints, options, OutputFormat::Machine)
                .expect("learn runs");
            for key in ["formula: ", "node.", "root: "] {
                let a: Vec<&str> = imported.text.lines().filter(|l| l.starts_with(key)).collect();
                let b: Vec<&str> = direct.text.lines().filter(|l| l.starts_with(key)).collect();
                if a != b {
                    failures.push(format!(
                        "{label}: imported model decodes to {a:?} but direct learning gives {b:?}"
                    ));
                }
            }
            for c in &costs {
                let line = format!("cost.{}: {}", c.priority, c.cost);
                if !direct.text.lines().any(|l| l == line) {
                    failures.push(format!(
                        "{label}: round-trip cost `{line}` missing from direct learning output"
                    ));
                }
            }
        }
        SolveStatus::Unsat => failures.push(format!("{label}: round-trip instance unsatisfiable")),
        SolveStatus::TimedOut => failures.push(format!("{label}: round-trip solve timed out")),
    }
}

#[test]
fn lexicographic_costs_match_exhaustive_optima_and_wcnf_round_trips() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let mut instances: Vec<(Vec<Vec<i32>>, i32, Vec<SoftLayer>)> = vec![
        (
            vec![vec![1], vec![-1]],
            1,
            vec![SoftLayer { priority: 1, lits: vec![1] }],
        ),
        (
            vec![vec![1, 2]],
            2,
            vec![
                SoftLayer { priority: 2, lits: vec![1, 2] },
                SoftLayer { priority: 1, lits: vec![-1] },
            ],
        ),
        (
            Vec::new(),
            3,
            vec![SoftLayer { priority: 1, lits: vec![1, 1, 2, 3] }],
        ),
        (
            vec![vec![1, 2, 3], vec![-1, -2], vec![-2, -3], vec![-1, -3]],
            3,
            vec![
                SoftLayer { priority: 2, lits: vec![1, 2] },
                SoftLayer { priority: 1, lits: vec![3] },
            ],
        ),
    ];
    let mut mix = Mix(0xfeed_cafe_0a0a_0a0b);
    for _ in 0..30 {
        let num_vars = (3 + mix.below(10)) as i32;
        let mut clauses = Vec::new();
        for _ in 0..(1 + mix.below(12)) {
            let mut clause = Vec::new();
            for _ in 0..(1 + mix.below(3)) {
                let var = (1 + mix.below(num_vars as u64)) as i32;
                clause.push(if mix.below(2) == 0 { var } else { -var });
            }
            clauses.push(clause);
        }
        let layer_count = 1 + mix.below(3);
        let mut layers = Vec::new();
        for li in 0..layer_count {
            let mut lits = Vec::new();
            for _ in 0..(1 + mix.below(num_vars as u64)) {
                let var = (1 + mix.below(num_vars as u64)) as i32;
                lits.push(if mix.below(2) == 0 { var } else { -var });
            }
            layers.push(SoftLayer { priority: (layer_count - li) as u32, lits });
        }
        instances.push((clauses, num_vars, layers));
    }

    for (idx, (clauses, num_vars, layers)) in instances.iter().enumerate() {
        let expected = exhaustive_optimum(clauses, *num_vars, layers);
        let mut session = LexSession::with_varisat(clauses, *num_vars, layers);
        match (session.solve().expect("micro instance solves"), expected) {
            (SolveStatus::Optimal { model, costs }, Some(best)) => {
                let got: Vec<usize> = costs.iter().map(|c| c.cost).collect();
                if got != best {
                    failures.push(format!(
                        "instance {idx}: solver costs {got:?}, exhaustive optimum {best:?}"
                    ));
                }
                if let Some(ci) = first_violated(clauses, &model) {
                    failures.push(format!("instance {idx}: optimal model violates clause {ci}"));
                }
            }
            (SolveStatus::Unsat, None) => {}
            (SolveStatus::Unsat, Some(best)) => failures.push(format!(
                "instance {idx}: solver says unsat, exhaustive optimum is {best:?}"
            )),
            (SolveStatus::Optimal { costs, .. }, None) => failures.push(format!(
                "instance {idx}: solver found costs {:?} on an unsatisfiable instance",
                costs
            )),
            (SolveStatus::TimedOut, _) => {
                failures.push(format!("instance {idx}: solver timed out"))
            }
        }
    }

    let therac = suite_dir("therac-weakening");
    wcnf_round_trip(
        "therac-weakening",
        &therac.join("traces.txt"),
        &[therac.join("constraints.lc")],
        &InstanceOptions { max_nodes: 6, ..InstanceOptions::default() },
        &mut failures,
    );
    let mutex = suite_dir("peterson-mutex");
    wcnf_round_trip(
        "peterson-mutex",
        &mutex.join("traces.txt"),
        &[mutex.join("constraints.lc")],
        &InstanceOptions { max_nodes: 6, ..InstanceOptions::default() },
        &mut failures,
    );

    conclude(
        "lexicographic-optima",
        started,
        None,
        &failures,
        &format!("{} micro instances + 2 solver-file round-trips", instances.len()),
    );
}

// ---------------------------------------------------------------------------
// 11: every consistent admissible structure satisfies the hard clauses
// ---------------------------------------------------------------------------

#[test]
fn every_consistent_admissible_structure_satisfies_the_hard_clauses() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let ap = props(&["p", "q"]);
    let sample = Sample::new(
        ap.clone(),
        vec![
            lasso(&ap, &[&[1, 0], &[0, 1]], 1),
            lasso(&ap, &[&[0, 1]], 0),
        ],
        vec![
            lasso(&ap, &[&[1, 0]], 0),
            lasso(&ap, &[&[0, 0], &[1, 0]], 1),
        ],
    )
    .expect("sample builds");
    let dags = all_dags(&ap, UNIVERSE);
    let programs: Vec<(String, Program)> = vec![
        ("unconstrained".to_string(), compile("", &[]).expect("compiles")),
        ("no-dag-reuse".to_string(), compile("", &["no-dag-reuse"]).expect("compiles")),
        ("nnf".to_string(), compile("", &["nnf"]).expect("compiles")),
        ("no-tautology".to_string(), compile("", &["no-tautology"]).expect("compiles")),
        (
            "declared temporal node".to_string(),
            compile("node a in Temporal;", &[]).expect("compiles"),
        ),
    ];
    let mut checked = 0usize;
    for (label, program) in &programs {
        let enc = encode(
            EncodeOptions { max_nodes: UNIVERSE, default_size_objective: true },
            &sample,
            program,
        )
        .expect("encodes");
        for dag in &dags {
            let consistent = sample
                .traces()
                .all(|(t, positive)| evaluate(dag, t) == positive);
            if !consistent {
                continue;
            }
            let Some(bindings) = check_program(program, dag, &ap).expect("constraint check")
            else {
                continue;
            };
            let assign = assignment_for_dag(&enc.varmap, dag, &bindings, Some(&sample));
            let full = extend_assignment(assign, &enc.arena, &enc.defs, enc.num_vars);
            if let Some(idx) = first_violated(&enc.clauses, &full) {
                if failures.len() < 8 {
                    failures.push(format!(
                        "{label}: clause {idx} violated for labels {:?} left {:?} right {:?}",
                        dag.labels, dag.left, dag.right
                    ));
                }
            }
            checked += 1;
        }
    }
    if checked < 100 {
        failures.push(format!(
            "only {checked} consistent admissible structures were exercised"
        ));
    }
    conclude(
        "hard-clause-completeness",
        started,
        None,
        &failures,
        &format!("{checked} consistent admissible structures across {} programs", programs.len()),
    );
}
