//! Deterministic fixture builders shared by the benchmarks: a batch of random
//! formulas and traces for the evaluators, and a small trigger/response
//! learning instance for the encoder and the end-to-end pipeline.

use ltlearn_core::constraint::{compile, Program};
use ltlearn_core::dag::{formula_to_dag, SyntaxDag};
use ltlearn_core::formula::{props, Prop};
use ltlearn_core::gen::{random_formula, random_lasso, rng};
use ltlearn_core::trace::{LassoTrace, Sample};

/// A batch of syntax DAGs and lasso traces to evaluate, all derived from one
/// fixed seed so every run measures the same work.
pub fn evaluation_batch(count: usize, size: usize, len: usize) -> (Vec<SyntaxDag>, Vec<LassoTrace>) {
    let ap = props(&["p", "q", "r"]);
    let mut r = rng(42);
    let dags = (0..count)
        .map(|_| formula_to_dag(&random_formula(&mut r, &ap, size), false))
        .collect();
    let traces = (0..count).map(|_| random_lasso(&mut r, &ap, len)).collect();
    (dags, traces)
}

fn bits(ap: &[Prop], rows: &[&[u8]], loop_start: usize) -> LassoTrace {
    let states = rows
        .iter()
        .map(|row| row.iter().map(|&b| b != 0).collect())
        .collect();
    LassoTrace::new(ap.to_vec(), states, loop_start).expect("valid fixture trace")
}

/// A trigger/response instance whose unique small solution is
/// `G (p -> F q)`: the positives answer every `p` with a later `q`, the
/// negative never does.
pub fn response_instance() -> (Sample, Program) {
    let ap = props(&["p", "q"]);
    let sample = Sample::new(
        ap.clone(),
        vec![
            bits(&ap, &[&[1, 0], &[0, 1]], 1),
            bits(&ap, &[&[0, 0]], 0),
            bits(&ap, &[&[1, 0], &[0, 0], &[0, 1], &[0, 0]], 3),
        ],
        vec![bits(&ap, &[&[1, 0], &[0, 0]], 1)],
    )
    .expect("fixture sample is consistent");
    let program = compile("", &["liveness-pattern"]).expect("preset compiles");
    (sample, program)
}
