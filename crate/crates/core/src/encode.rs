//! CNF encoding of the bounded synthesis problem: find a syntax DAG with at
//! most `max_nodes` nodes that satisfies every positive trace, falsifies
//! every negative trace, and meets all hard constraints.
//!
//! Slots `0..n` hold DAG nodes with children at strictly smaller slots; a
//! prefix of slots is in use and the highest used slot is the root. Trace
//! semantics are encoded per slot and position, with child-value variables
//! shared between the operator cases of one slot.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::constraint::{ConstraintError, Program};
use crate::dag::{DagError, NodeLabel, SyntaxDag};
use crate::eval::evaluate_table;
use crate::formula::{OpKind, Prop};
use crate::ground::{
    ground_objectives, ground_program, CnfSink, ExprArena, Id, TRUE_VAR,
};
use crate::trace::{LassoTrace, Sample};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("node bound {got} is too small; need at least {needed}")]
    BoundTooSmall { needed: usize, got: usize },
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("model marks no slot as used")]
    NoUsedSlots,
    #[error("used slots are not a prefix: slot {slot} is used after a gap")]
    UsedGap { slot: usize },
    #[error("slot {slot} carries {count} labels")]
    LabelCount { slot: usize, count: usize },
    #[error("slot {slot} has more than one child on the same side")]
    ChildCount { slot: usize },
    #[error("slot {slot} label and child slots disagree on arity")]
    ArityMismatch { slot: usize },
    #[error("declared node `{name}` is not placed on exactly one used slot")]
    ConstPlacement { name: String },
    #[error(transparent)]
    Dag(#[from] DagError),
}

fn op_index(op: OpKind) -> usize {
    OpKind::ALL.iter().position(|&k| k == op).expect("op is in ALL")
}

fn tri(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

/// Fixed layout of the base (non-definitional) variables.
///
/// Variable 1 is the constant-true variable; the structural block (used
/// flags, labels, child edges, declared-node placements) follows, then the
/// per-trace semantic blocks, then Tseitin definitions.
#[derive(Clone, Debug)]
pub struct VarMap {
    pub n: usize,
    pub ap: Vec<Prop>,
    pub consts: Vec<String>,
    pub trace_lens: Vec<usize>,
    label_base: i32,
    childl_base: i32,
    childr_base: i32,
    const_base: i32,
    sem_bases: Vec<(i32, i32, i32)>,
    first_free: i32,
}

impl VarMap {
    pub fn new(n: usize, ap: Vec<Prop>, consts: Vec<String>, trace_lens: Vec<usize>) -> VarMap {
        assert!(n >= 1);
        let kinds = OpKind::ALL.len() + ap.len();
        let pairs = n * (n - 1) / 2;
        let label_base = 2 + n as i32;
        let childl_base = label_base + (n * kinds) as i32;
        let childr_base = childl_base + pairs as i32;
        let const_base = childr_base + pairs as i32;
        let mut next = const_base + (consts.len() * n) as i32;
        let mut sem_bases = Vec::with_capacity(trace_lens.len());
        for &m in &trace_lens {
            let block = (n * m) as i32;
            sem_bases.push((next, next + block, next + 2 * block));
            next += 3 * block;
        }
        VarMap {
            n,
            ap,
            consts,
            trace_lens,
            label_base,
            childl_base,
            childr_base,
            const_base,
            sem_bases,
            first_free: next,
        }
    }

    pub fn num_label_kinds(&self) -> usize {
        OpKind::ALL.len() + self.ap.len()
    }

    pub fn used(&self, i: usize) -> i32 {
        debug_assert!(i < self.n);
        2 + i as i32
    }

    pub fn label_var(&self, i: usize, kind: usize) -> i32 {
        debug_assert!(i < self.n && kind < self.num_label_kinds());
        self.label_base + (i * self.num_label_kinds() + kind) as i32
    }

    pub fn label_op(&self, i: usize, op: OpKind) -> i32 {
        self.label_var(i, op_index(op))
    }

    pub fn label_prop(&self, i: usize, p: usize) -> i32 {
        self.label_var(i, OpKind::ALL.len() + p)
    }

    /// Left-child edge from slot `i` down to slot `j`; `None` when `j >= i`.
    pub fn child_l(&self, i: usize, j: usize) -> Option<i32> {
        (j < i).then(|| self.childl_base + tri(i, j) as i32)
    }

    pub fn child_r(&self, i: usize, j: usize) -> Option<i32> {
        (j < i).then(|| self.childr_base + tri(i, j) as i32)
    }

    /// Placement variable: declared node `c` lives on slot `i`.
    pub fn const_var(&self, c: usize, i: usize) -> i32 {
        debug_assert!(c < self.consts.len() && i < self.n);
        self.const_base + (c * self.n + i) as i32
    }

    pub fn sem(&self, t: usize, i: usize, k: usize) -> i32 {
        self.sem_bases[t].0 + (i * self.trace_lens[t] + k) as i32
    }

    /// Value of slot `i`'s left child at position `k` of trace `t`.
    pub fn left_val(&self, t: usize, i: usize, k: usize) -> i32 {
        self.sem_bases[t].1 + (i * self.trace_lens[t] + k) as i32
    }

    pub fn right_val(&self, t: usize, i: usize, k: usize) -> i32 {
        self.sem_bases[t].2 + (i * self.trace_lens[t] + k) as i32
    }

    /// First variable after the base layout; Tseitin definitions start here.
    pub fn first_free_var(&self) -> i32 {
        self.first_free
    }

    /// All variables describing the DAG itself (no trace semantics, no
    /// definitions); two models agreeing on these denote the same DAG.
    pub fn structural_vars(&self) -> Vec<i32> {
        (2..self.const_base + (self.consts.len() * self.n) as i32).collect()
    }
}

/// Emits the DAG-shape axioms.
pub fn encode_structure(u: &VarMap, sink: &mut CnfSink) {
    let n = u.n;
    let kinds = u.num_label_kinds();
    sink.add_clause(vec![u.used(0)]);
    for i in 0..n {
        if i + 1 < n {
            sink.add_clause(vec![u.used(i), -u.used(i + 1)]);
        }
        // exactly one label on used slots, none on unused ones
        let mut at_least = vec![-u.used(i)];
        for k in 0..kinds {
            at_least.push(u.label_var(i, k));
            sink.add_clause(vec![u.used(i), -u.label_var(i, k)]);
            for k2 in k + 1..kinds {
                sink.add_clause(vec![-u.label_var(i, k), -u.label_var(i, k2)]);
            }
        }
        sink.add_clause(at_least);
        // at most one child per side, and children only on used slots
        for j in 0..i {
            sink.add_clause(vec![u.used(i), -u.child_l(i, j).unwrap()]);
            sink.add_clause(vec![u.used(i), -u.child_r(i, j).unwrap()]);
            for j2 in j + 1..i {
                sink.add_clause(vec![-u.child_l(i, j).unwrap(), -u.child_l(i, j2).unwrap()]);
                sink.add_clause(vec![-u.child_r(i, j).unwrap(), -u.child_r(i, j2).unwrap()]);
            }
        }
        // arity of the label dictates which children exist
        for op in OpKind::ALL {
            let lab = u.label_op(i, op);
            let left_any: Vec<i32> = (0..i).map(|j| u.child_l(i, j).unwrap()).collect();
            let right_any: Vec<i32> = (0..i).map(|j| u.child_r(i, j).unwrap()).collect();
            match op.arity() {
                2 => {
                    let mut c = vec![-lab];
                    c.extend(&left_any);
                    sink.add_clause(c);
                    let mut c = vec![-lab];
                    c.extend(&right_any);
                    sink.add_clause(c);
                }
                _ => {
                    let mut c = vec![-lab];
                    c.extend(&left_any);
                    sink.add_clause(c);
                    for r in right_any {
                        sink.add_clause(vec![-lab, -r]);
                    }
                }
            }
        }
        for p in 0..u.ap.len() {
            let lab = u.label_prop(i, p);
            for j in 0..i {
                sink.add_clause(vec![-lab, -u.child_l(i, j).unwrap()]);
                sink.add_clause(vec![-lab, -u.child_r(i, j).unwrap()]);
            }
        }
        // every used slot below the top has a parent, so used slots are
        // exactly the nodes reachable from the root
        if i + 1 < n {
            let mut c = vec![-u.used(i), -u.used(i + 1)];
            for j in i + 1..n {
                c.push(u.child_l(j, i).unwrap());
                c.push(u.child_r(j, i).unwrap());
            }
            sink.add_clause(c);
        }
    }
    // declared nodes sit on exactly one used slot each, pairwise distinct
    for c in 0..u.consts.len() {
        let mut at_least = Vec::with_capacity(n);
        for i in 0..n {
            at_least.push(u.const_var(c, i));
            sink.add_clause(vec![-u.const_var(c, i), u.used(i)]);
            for i2 in i + 1..n {
                sink.add_clause(vec![-u.const_var(c, i), -u.const_var(c, i2)]);
            }
            for c2 in c + 1..u.consts.len() {
                sink.add_clause(vec![-u.const_var(c, i), -u.const_var(c2, i)]);
            }
        }
        sink.add_clause(at_least);
    }
}

/// Emits the semantic table for one trace: variable `sem(t,i,k)` is the
/// value of slot `i`'s subformula at position `k`.
pub fn encode_semantics(u: &VarMap, t: usize, trace: &LassoTrace, sink: &mut CnfSink) {
    let n = u.n;
    let m = trace.len();
    debug_assert_eq!(m, u.trace_lens[t]);
    for i in 0..n {
        for k in 0..m {
            // unused slots have an all-false row
            sink.add_clause(vec![u.used(i), -u.sem(t, i, k)]);
            // child-value variables mirror the chosen child's row
            for j in 0..i {
                let cl = u.child_l(i, j).unwrap();
                let cr = u.child_r(i, j).unwrap();
                sink.add_clause(vec![-cl, -u.left_val(t, i, k), u.sem(t, j, k)]);
                sink.add_clause(vec![-cl, u.left_val(t, i, k), -u.sem(t, j, k)]);
                sink.add_clause(vec![-cr, -u.right_val(t, i, k), u.sem(t, j, k)]);
                sink.add_clause(vec![-cr, u.right_val(t, i, k), -u.sem(t, j, k)]);
            }
        }
        for k in 0..m {
            let sem = u.sem(t, i, k);
            let lv = u.left_val(t, i, k);
            let rv = u.right_val(t, i, k);
            let fut = trace.future_indices(k);
            let next = trace.succ(k);
            for (p, _) in u.ap.iter().enumerate() {
                let lab = u.label_prop(i, p);
                if trace.value(k, p) {
                    sink.add_clause(vec![-lab, sem]);
                } else {
                    sink.add_clause(vec![-lab, -sem]);
                }
            }
            for op in OpKind::ALL {
                let lab = u.label_op(i, op);
                match op {
                    OpKind::Not => {
                        sink.add_clause(vec![-lab, -sem, -lv]);
                        sink.add_clause(vec![-lab, sem, lv]);
                    }
                    OpKind::And => {
                        sink.add_clause(vec![-lab, -sem, lv]);
                        sink.add_clause(vec![-lab, -sem, rv]);
                        sink.add_clause(vec![-lab, sem, -lv, -rv]);
                    }
                    OpKind::Or => {
                        sink.add_clause(vec![-lab, sem, -lv]);
                        sink.add_clause(vec![-lab, sem, -rv]);
                        sink.add_clause(vec![-lab, -sem, lv, rv]);
                    }
                    OpKind::Imply => {
                        sink.add_clause(vec![-lab, -sem, -lv, rv]);
                        sink.add_clause(vec![-lab, sem, lv]);
                        sink.add_clause(vec![-lab, sem, -rv]);
                    }
                    OpKind::Next => {
                        let lv_next = u.left_val(t, i, next);
                        sink.add_clause(vec![-lab, -sem, lv_next]);
                        sink.add_clause(vec![-lab, sem, -lv_next]);
                    }
                    OpKind::Finally => {
                        let mut c = vec![-lab, -sem];
                        for &k2 in &fut {
                            c.push(u.left_val(t, i, k2));
                            sink.add_clause(vec![-lab, sem, -u.left_val(t, i, k2)]);
                        }
                        sink.add_clause(c);
                    }
                    OpKind::Globally => {
                        let mut c = vec![-lab, sem];
                        for &k2 in &fut {
                            c.push(-u.left_val(t, i, k2));
                            sink.add_clause(vec![-lab, -sem, u.left_val(t, i, k2)]);
                        }
                        sink.add_clause(c);
                    }
                    OpKind::Until => {
                        let sem_next = u.sem(t, i, next);
                        let mut c = vec![-lab, -sem];
                        for &k2 in &fut {
                            c.push(u.right_val(t, i, k2));
                        }
                        sink.add_clause(c);
                        sink.add_clause(vec![-lab, -sem, rv, lv]);
                        sink.add_clause(vec![-lab, -sem, rv, sem_next]);
                        sink.add_clause(vec![-lab, sem, -rv]);
                        for &k2 in &fut {
                            sink.add_clause(vec![
                                -lab,
                                sem,
                                -u.right_val(t, i, k2),
                                -lv,
                                -sem_next,
                            ]);
                        }
                    }
                }
            }
        }
    }
}

/// Requires the root slot's value at position 0 to match the trace's sign.
pub fn encode_sample_constraint(u: &VarMap, t: usize, positive: bool, sink: &mut CnfSink) {
    for m in 1..=u.n {
        let root_sem = u.sem(t, m - 1, 0);
        let mut c = vec![-u.used(m - 1)];
        if m < u.n {
            c.push(u.used(m));
        }
        c.push(if positive { root_sem } else { -root_sem });
        sink.add_clause(c);
    }
}

/// One group of unit-weight soft costs; layers are ordered from highest
/// priority to lowest and each true literal costs 1.
#[derive(Clone, Debug)]
pub struct SoftLayer {
    pub priority: u32,
    pub lits: Vec<i32>,
}

/// A fully encoded problem instance.
#[derive(Debug)]
pub struct Encoded {
    pub varmap: VarMap,
    pub arena: ExprArena,
    pub clauses: Vec<Vec<i32>>,
    pub num_vars: i32,
    /// Tseitin definition variables with their defining expressions, in
    /// allocation order.
    pub defs: Vec<(i32, Id)>,
    pub layers: Vec<SoftLayer>,
}

#[derive(Clone, Copy, Debug)]
pub struct EncodeOptions {
    pub max_nodes: usize,
    /// Append a lowest-priority objective minimizing the number of edges
    /// (which, for connected DAGs, orders solutions by node count too).
    pub default_size_objective: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { max_nodes: 4, default_size_objective: true }
    }
}

pub fn encode(
    options: EncodeOptions,
    sample: &Sample,
    program: &Program,
) -> Result<Encoded, EncodeError> {
    let n = options.max_nodes;
    let consts: Vec<String> = program.decls.iter().map(|d| d.name.clone()).collect();
    let needed = consts.len().max(1);
    if n < needed {
        return Err(EncodeError::BoundTooSmall { needed, got: n });
    }
    let trace_lens: Vec<usize> = sample.traces().map(|(tr, _)| tr.len()).collect();
    let u = VarMap::new(n, sample.ap.clone(), consts, trace_lens);
    let mut arena = ExprArena::new();
    let mut sink = CnfSink::new(u.first_free_var());
    encode_structure(&u, &mut sink);
    for (t, (trace, positive)) in sample.traces().enumerate() {
        encode_semantics(&u, t, trace, &mut sink);
        encode_sample_constraint(&u, t, positive, &mut sink);
    }
    ground_program(program, &u, &mut arena, &mut sink)?;
    let cost_layers = ground_objectives(program, &u, &mut arena, options.default_size_objective)?;
    let layers = cost_layers
        .into_iter()
        .map(|layer| SoftLayer {
            priority: layer.priority,
            lits: layer.cells.iter().map(|&c| sink.lit(&arena, c)).collect(),
        })
        .collect();
    let num_vars = sink.num_vars();
    Ok(Encoded { varmap: u, arena, clauses: sink.clauses, num_vars, defs: sink.defs, layers })
}

/// Reads the DAG and declared-node placements out of a model. `model` is
/// indexed by variable number (index 0 is unused padding).
pub fn decode(model: &[bool], u: &VarMap) -> Result<(SyntaxDag, BTreeMap<String, usize>), DecodeError> {
    let val = |v: i32| -> bool { model.get(v as usize).copied().unwrap_or(false) };
    let mut size = 0;
    while size < u.n && val(u.used(size)) {
        size += 1;
    }
    if size == 0 {
        return Err(DecodeError::NoUsedSlots);
    }
    for i in size..u.n {
        if val(u.used(i)) {
            return Err(DecodeError::UsedGap { slot: i });
        }
    }
    let mut labels = Vec::with_capacity(size);
    let mut left = Vec::with_capacity(size);
    let mut right = Vec::with_capacity(size);
    for i in 0..size {
        let mut found: Vec<usize> = (0..u.num_label_kinds()).filter(|&k| val(u.label_var(i, k))).collect();
        if found.len() != 1 {
            return Err(DecodeError::LabelCount { slot: i, count: found.len() });
        }
        let kind = found.pop().unwrap();
        let label = if kind < OpKind::ALL.len() {
            NodeLabel::Op(OpKind::ALL[kind])
        } else {
            NodeLabel::Atom(u.ap[kind - OpKind::ALL.len()].clone())
        };
        let ls: Vec<usize> = (0..i).filter(|&j| val(u.child_l(i, j).unwrap())).collect();
        let rs: Vec<usize> = (0..i).filter(|&j| val(u.child_r(i, j).unwrap())).collect();
        if ls.len() > 1 || rs.len() > 1 {
            return Err(DecodeError::ChildCount { slot: i });
        }
        let want = label.arity();
        let ok = match want {
            0 => ls.is_empty() && rs.is_empty(),
            1 => ls.len() == 1 && rs.is_empty(),
            _ => ls.len() == 1 && rs.len() == 1,
        };
        if !ok {
            return Err(DecodeError::ArityMismatch { slot: i });
        }
        labels.push(label);
        left.push(ls.first().copied());
        right.push(rs.first().copied());
    }
    let dag = SyntaxDag::new(labels, left, right, size - 1)?;
    let mut bindings = BTreeMap::new();
    for (c, name) in u.consts.iter().enumerate() {
        let spots: Vec<usize> = (0..size).filter(|&i| val(u.const_var(c, i))).collect();
        if spots.len() != 1 {
            return Err(DecodeError::ConstPlacement { name: name.clone() });
        }
        bindings.insert(name.clone(), spots[0]);
    }
    Ok((dag, bindings))
}

/// Builds the base-variable assignment describing a concrete DAG: nodes are
/// laid out children-first onto slots, and when a sample is given the
/// semantic rows are filled by direct evaluation. `bindings` maps declared
/// node names to DAG node indices. Returns the assignment indexed by
/// variable number, sized to the base layout.
pub fn assignment_for_dag(
    u: &VarMap,
    dag: &SyntaxDag,
    bindings: &BTreeMap<String, usize>,
    sample: Option<&Sample>,
) -> Vec<bool> {
    let order = dag.topo_order();
    assert!(order.len() <= u.n, "DAG has more nodes than slots");
    let mut slot_of = vec![usize::MAX; dag.len()];
    for (slot, &node) in order.iter().enumerate() {
        slot_of[node] = slot;
    }
    let mut assign = vec![false; u.first_free_var() as usize];
    assign[TRUE_VAR as usize] = true;
    for (slot, &node) in order.iter().enumerate() {
        assign[u.used(slot) as usize] = true;
        match &dag.labels[node] {
            NodeLabel::Op(op) => assign[u.label_op(slot, *op) as usize] = true,
            NodeLabel::Atom(p) => {
                let pi = u
                    .ap
                    .iter()
                    .position(|q| q == p)
                    .expect("DAG proposition is in the encoding alphabet");
                assign[u.label_prop(slot, pi) as usize] = true;
            }
        }
        if let Some(c) = dag.left[node] {
            assign[u.child_l(slot, slot_of[c]).expect("children precede parents") as usize] = true;
        }
        if let Some(c) = dag.right[node] {
            assign[u.child_r(slot, slot_of[c]).expect("children precede parents") as usize] = true;
        }
    }
    for (c, name) in u.consts.iter().enumerate() {
        let node = *bindings.get(name).expect("every declared node is bound");
        assign[u.const_var(c, slot_of[node]) as usize] = true;
    }
    if let Some(sample) = sample {
        for (t, (trace, _)) in sample.traces().enumerate() {
            let table = evaluate_table(dag, trace);
            for (slot, &node) in order.iter().enumerate() {
                for k in 0..trace.len() {
                    assign[u.sem(t, slot, k) as usize] = table[node][k];
                    if let Some(c) = dag.left[node] {
                        assign[u.left_val(t, slot, k) as usize] = table[c][k];
                    }
                    if let Some(c) = dag.right[node] {
                        assign[u.right_val(t, slot, k) as usize] = table[c][k];
                    }
                }
            }
        }
    }
    assign
}

/// Extends a base assignment over the Tseitin definition variables and pads
/// it to `num_vars`, so every recorded definition is respected.
pub fn extend_assignment(
    mut assign: Vec<bool>,
    arena: &ExprArena,
    defs: &[(i32, Id)],
    num_vars: i32,
) -> Vec<bool> {
    assign.resize(num_vars as usize + 1, false);
    for &(g, id) in defs {
        let value = {
            let a = &assign;
            arena.eval(id, &move |v| a[v as usize])
        };
        assign[g as usize] = value;
    }
    assign
}

/// Index of the first clause the assignment falsifies, if any.
pub fn first_violated(clauses: &[Vec<i32>], assign: &[bool]) -> Option<usize> {
    clauses.iter().position(|c| {
        !c.iter().any(|&l| {
            let v = assign.get(l.unsigned_abs() as usize).copied().unwrap_or(false);
            (l > 0) == v
        })
    })
}
