//! Formula evaluation over lasso traces.
//!
//! Two independent routes are kept side by side on purpose: [`evaluate`]
//! computes truth tables bottom-up with explicit future-position scans, while
//! [`evaluate_fixpoint`] iterates the one-step expansion laws of the temporal
//! operators to a fixed point. They must always agree; tests cross-check them
//! against each other and the SAT encoding is validated against both.

use crate::dag::{NodeLabel, SyntaxDag};
use crate::formula::{Formula, OpKind};
use crate::trace::LassoTrace;

/// Truth table of every reachable node at every position; `rows[node][pos]`.
/// Unreachable nodes get all-false rows.
pub fn evaluate_table(dag: &SyntaxDag, trace: &LassoTrace) -> Vec<Vec<bool>> {
    let len = trace.len();
    let mut rows = vec![vec![false; len]; dag.labels.len()];
    for i in dag.topo_order() {
        let row: Vec<bool> = match &dag.labels[i] {
            NodeLabel::Atom(p) => (0..len).map(|k| trace.value(k, p.index)).collect(),
            NodeLabel::Op(op) => {
                let l = dag.left[i].map(|c| rows[c].clone());
                let r = dag.right[i].map(|c| rows[c].clone());
                op_row(*op, l.as_deref(), r.as_deref(), trace)
            }
        };
        rows[i] = row;
    }
    rows
}

fn op_row(op: OpKind, l: Option<&[bool]>, r: Option<&[bool]>, trace: &LassoTrace) -> Vec<bool> {
    let len = trace.len();
    let l = l.expect("operator node missing left child");
    match op {
        OpKind::Not => l.iter().map(|&b| !b).collect(),
        OpKind::Next => (0..len).map(|k| l[trace.succ(k)]).collect(),
        OpKind::Finally => (0..len)
            .map(|k| trace.future_indices(k).into_iter().any(|w| l[w]))
            .collect(),
        OpKind::Globally => (0..len)
            .map(|k| trace.future_indices(k).into_iter().all(|w| l[w]))
            .collect(),
        OpKind::And | OpKind::Or | OpKind::Imply | OpKind::Until => {
            let r = r.expect("binary node missing right child");
            match op {
                OpKind::And => (0..len).map(|k| l[k] && r[k]).collect(),
                OpKind::Or => (0..len).map(|k| l[k] || r[k]).collect(),
                OpKind::Imply => (0..len).map(|k| !l[k] || r[k]).collect(),
                OpKind::Until => (0..len)
                    .map(|k| {
                        let mut out = false;
                        for w in trace.future_indices(k) {
                            if r[w] {
                                out = true;
                                break;
                            }
                            if !l[w] {
                                break;
                            }
                        }
                        out
                    })
                    .collect(),
                _ => unreachable!(),
            }
        }
    }
}

/// Whether `trace` (from position 0) satisfies the formula rooted in `dag`.
pub fn evaluate(dag: &SyntaxDag, trace: &LassoTrace) -> bool {
    evaluate_table(dag, trace)[dag.root][0]
}

/// Fixed-point evaluator. Nodes are converged children-first; a temporal
/// row starts from its extremal value (`F`/`U` all-false, `G` all-true) and
/// iterates its one-step expansion
///
/// ```text
/// F φ   = φ ∨ X F φ        G φ   = φ ∧ X G φ
/// φ U ψ = ψ ∨ (φ ∧ X (φ U ψ))
/// ```
///
/// over already-final child rows until it stops changing. Each iteration is
/// monotone from the extremal start, so a row stabilizes within
/// `trace.len() + 1` sweeps at the least (`F`, `U`) or greatest (`G`)
/// solution of its expansion.
pub fn evaluate_fixpoint(dag: &SyntaxDag, trace: &LassoTrace) -> bool {
    let len = trace.len();
    let order = dag.topo_order();
    let mut rows = vec![vec![false; len]; dag.labels.len()];

    for &i in &order {
        let op = match &dag.labels[i] {
            NodeLabel::Atom(p) => {
                rows[i] = (0..len).map(|k| trace.value(k, p.index)).collect();
                continue;
            }
            NodeLabel::Op(op) => *op,
        };
        let lc = dag.left[i].expect("operator node missing left child");
        let row = match op {
            OpKind::Not => (0..len).map(|k| !rows[lc][k]).collect(),
            OpKind::Next => (0..len).map(|k| rows[lc][trace.succ(k)]).collect(),
            OpKind::And | OpKind::Or | OpKind::Imply => {
                let rc = dag.right[i].expect("binary node missing right child");
                (0..len)
                    .map(|k| match op {
                        OpKind::And => rows[lc][k] && rows[rc][k],
                        OpKind::Or => rows[lc][k] || rows[rc][k],
                        _ => !rows[lc][k] || rows[rc][k],
                    })
                    .collect()
            }
            OpKind::Finally | OpKind::Globally | OpKind::Until => {
                let mut row = vec![op == OpKind::Globally; len];
                loop {
                    let mut changed = false;
                    for k in 0..len {
                        let next = trace.succ(k);
                        let new = match op {
                            OpKind::Finally => rows[lc][k] || row[next],
                            OpKind::Globally => rows[lc][k] && row[next],
                            _ => {
                                let rc =
                                    dag.right[i].expect("binary node missing right child");
                                rows[rc][k] || (rows[lc][k] && row[next])
                            }
                        };
                        if new != row[k] {
                            row[k] = new;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                row
            }
        };
        rows[i] = row;
    }
    rows[dag.root][0]
}

/// Convenience: evaluate a tree-form formula directly.
pub fn holds(f: &Formula, trace: &LassoTrace) -> bool {
    evaluate(&crate::dag::formula_to_dag(f, true), trace)
}
