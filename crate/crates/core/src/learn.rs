//! End-to-end learning pipeline: encode the bounded search, run the
//! lexicographic optimizer, decode the model, and verify the result against
//! the sample with the direct evaluator before reporting it.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::constraint::{check_program, Program};
use crate::dag::{dag_to_formula, SyntaxDag};
use crate::encode::{
    assignment_for_dag, decode, encode, extend_assignment, DecodeError, EncodeError,
    EncodeOptions, Encoded,
};
use crate::eval::{evaluate, evaluate_fixpoint};
use crate::formula::Formula;
use crate::maxsat::{LayerCost, LexSession, SolveError, SolveStatus};
use crate::trace::Sample;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("model decoding failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("verification failed: learned formula `{formula}` {reason}")]
    Verification { formula: String, reason: String },
}

#[derive(Clone, Copy, Debug)]
pub struct LearnOptions {
    /// Slot budget for the syntax DAG.
    pub max_nodes: usize,
    /// Try budgets `1..=max_nodes` in order and stop at the first success
    /// instead of handing the full budget to the optimizer at once.
    pub iterative: bool,
    /// Add the built-in lowest-priority objective minimizing edge count.
    pub default_size_objective: bool,
    pub timeout: Option<Duration>,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            max_nodes: 6,
            iterative: false,
            default_size_objective: true,
            timeout: None,
        }
    }
}

/// A verified solution.
#[derive(Clone, Debug)]
pub struct Learned {
    pub formula: Formula,
    pub dag: SyntaxDag,
    /// Declared-node placements (name to node index in `dag`).
    pub bindings: BTreeMap<String, usize>,
    /// Per-layer costs, highest priority first.
    pub costs: Vec<LayerCost>,
}

#[derive(Clone, Debug)]
pub enum LearnOutcome {
    Found(Learned),
    /// No formula within the budget satisfies the sample and constraints.
    Unsat,
    TimedOut,
}

fn deadline(options: &LearnOptions) -> Option<Instant> {
    options.timeout.map(|t| Instant::now() + t)
}

fn verify(
    enc: &Encoded,
    sample: &Sample,
    program: &Program,
    learned: &Learned,
) -> Result<(), LearnError> {
    let fail = |reason: String| LearnError::Verification {
        formula: learned.formula.to_string(),
        reason,
    };
    for (idx, (trace, positive)) in sample.traces().enumerate() {
        let direct = evaluate(&learned.dag, trace);
        let fixpoint = evaluate_fixpoint(&learned.dag, trace);
        if direct != fixpoint {
            return Err(fail(format!(
                "splits the evaluators on trace {idx}: direct {direct}, fixpoint {fixpoint}"
            )));
        }
        if direct != positive {
            return Err(fail(format!(
                "evaluates to {direct} on trace {idx}, expected {positive}"
            )));
        }
    }
    match check_program(program, &learned.dag, &sample.ap) {
        Ok(Some(_)) => {}
        Ok(None) => {
            return Err(fail("violates the constraint program on direct evaluation".into()))
        }
        Err(e) => return Err(fail(format!("constraint evaluation failed: {e}"))),
    }
    // the decoded structural assignment must also satisfy the CNF it came from
    let base = assignment_for_dag(&enc.varmap, &learned.dag, &learned.bindings, Some(sample));
    let full = extend_assignment(base, &enc.arena, &enc.defs, enc.num_vars);
    if let Some(i) = crate::encode::first_violated(&enc.clauses, &full) {
        return Err(fail(format!("re-encoded assignment violates clause {i}")));
    }
    Ok(())
}

fn solve_once(
    sample: &Sample,
    program: &Program,
    max_nodes: usize,
    default_size_objective: bool,
    until: Option<Instant>,
) -> Result<LearnOutcome, LearnError> {
    let enc = encode(
        EncodeOptions { max_nodes, default_size_objective },
        sample,
        program,
    )?;
    let mut session = LexSession::with_varisat(&enc.clauses, enc.num_vars, &enc.layers);
    session.set_deadline(until);
    match session.solve()? {
        SolveStatus::Optimal { model, costs } => {
            let (dag, bindings) = decode(&model, &enc.varmap)?;
            let learned =
                Learned { formula: dag_to_formula(&dag), dag, bindings, costs };
            verify(&enc, sample, program, &learned)?;
            Ok(LearnOutcome::Found(learned))
        }
        SolveStatus::Unsat => Ok(LearnOutcome::Unsat),
        SolveStatus::TimedOut => Ok(LearnOutcome::TimedOut),
    }
}

/// Learns one lexicographically optimal formula within the node budget.
pub fn learn(
    sample: &Sample,
    program: &Program,
    options: &LearnOptions,
) -> Result<LearnOutcome, LearnError> {
    let until = deadline(options);
    if options.iterative {
        let needed = program.decls.len().max(1);
        for n in needed..=options.max_nodes.max(needed) {
            match solve_once(sample, program, n, options.default_size_objective, until)? {
                LearnOutcome::Unsat => continue,
                other => return Ok(other),
            }
        }
        Ok(LearnOutcome::Unsat)
    } else {
        solve_once(sample, program, options.max_nodes, options.default_size_objective, until)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumerateStatus {
    /// Every admissible solution (under the mode's cost policy) was listed.
    Exhausted,
    LimitReached,
    TimedOut,
}

/// Enumerates solutions by repeatedly blocking the previous model. With
/// `co_optimal_only`, cost bounds stay fixed and only solutions matching the
/// optimal cost vector are produced; otherwise bounds are relaxed after
/// each solution and costs grow monotonically. Formulas that print the same
/// after commutative normalization count once toward `limit`.
pub fn enumerate(
    sample: &Sample,
    program: &Program,
    options: &LearnOptions,
    limit: usize,
    co_optimal_only: bool,
) -> Result<(Vec<Learned>, EnumerateStatus), LearnError> {
    let until = deadline(options);
    let enc = encode(
        EncodeOptions {
            max_nodes: options.max_nodes,
            default_size_objective: options.default_size_objective,
        },
        sample,
        program,
    )?;
    let mut session = LexSession::with_varisat(&enc.clauses, enc.num_vars, &enc.layers);
    session.set_deadline(until);
    let structural = enc.varmap.structural_vars();
    let mut results: Vec<Learned> = Vec::new();
    let mut seen: Vec<Formula> = Vec::new();
    loop {
        if results.len() >= limit {
            return Ok((results, EnumerateStatus::LimitReached));
        }
        match session.solve()? {
            SolveStatus::Optimal { model, costs } => {
                let (dag, bindings) = decode(&model, &enc.varmap)?;
                let learned =
                    Learned { formula: dag_to_formula(&dag), dag, bindings, costs };
                verify(&enc, sample, program, &learned)?;
                session.block_model(&structural, &model, co_optimal_only);
                let normal = learned.formula.commutative_normal();
                if !seen.contains(&normal) {
                    seen.push(normal);
                    results.push(learned);
                }
            }
            SolveStatus::Unsat => return Ok((results, EnumerateStatus::Exhausted)),
            SolveStatus::TimedOut => return Ok((results, EnumerateStatus::TimedOut)),
        }
    }
}
