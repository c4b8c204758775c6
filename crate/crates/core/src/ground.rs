//! Propositional grounding: turns constraint programs into boolean
//! expressions over the encoder's variables, and boolean expressions into
//! CNF.
//!
//! Expressions are hash-consed in an [`ExprArena`], so repeated subterms
//! (closure rounds, counter columns) share structure and each distinct term
//! is converted to CNF at most once.

// node-pair matrices read most clearly with explicit indices
#![allow(clippy::needless_range_loop)]

use std::collections::HashMap;

use crate::constraint::{
    arity_of, Arity, Binder, Builtin, CFormula, CmpOp, CompVars, ConstraintError, Expr, LabelRef,
    ObjectiveKind, Program,
};
use crate::encode::VarMap;

pub type Id = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum BNode {
    True,
    False,
    /// A positive DIMACS variable.
    Var(i32),
    Not(Id),
    And(Box<[Id]>),
    Or(Box<[Id]>),
}

/// Hash-consing arena for boolean expressions. Ids are assigned in insertion
/// order, so identical construction sequences yield identical ids.
#[derive(Debug)]
pub struct ExprArena {
    nodes: Vec<BNode>,
    memo: HashMap<BNode, Id>,
}

impl Default for ExprArena {
    fn default() -> Self {
        Self::new()
    }
}

impl ExprArena {
    pub fn new() -> Self {
        let mut ar = ExprArena { nodes: Vec::new(), memo: HashMap::new() };
        ar.intern(BNode::True);
        ar.intern(BNode::False);
        ar
    }

    fn intern(&mut self, node: BNode) -> Id {
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(node.clone());
        self.memo.insert(node, id);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tt(&self) -> Id {
        0
    }

    pub fn ff(&self) -> Id {
        1
    }

    pub fn var(&mut self, v: i32) -> Id {
        assert!(v > 0, "arena variables are positive DIMACS vars");
        self.intern(BNode::Var(v))
    }

    pub fn not(&mut self, x: Id) -> Id {
        match self.nodes[x as usize] {
            BNode::True => self.ff(),
            BNode::False => self.tt(),
            BNode::Not(y) => y,
            _ => self.intern(BNode::Not(x)),
        }
    }

    pub fn and(&mut self, ids: impl IntoIterator<Item = Id>) -> Id {
        let mut xs: Vec<Id> = Vec::new();
        for id in ids {
            match self.nodes[id as usize] {
                BNode::True => {}
                BNode::False => return self.ff(),
                _ => xs.push(id),
            }
        }
        xs.sort_unstable();
        xs.dedup();
        // x ∧ ¬x simplifies to false
        for &x in &xs {
            if let BNode::Not(y) = self.nodes[x as usize] {
                if xs.binary_search(&y).is_ok() {
                    return self.ff();
                }
            }
        }
        match xs.len() {
            0 => self.tt(),
            1 => xs[0],
            _ => self.intern(BNode::And(xs.into_boxed_slice())),
        }
    }

    pub fn or(&mut self, ids: impl IntoIterator<Item = Id>) -> Id {
        let mut xs: Vec<Id> = Vec::new();
        for id in ids {
            match self.nodes[id as usize] {
                BNode::False => {}
                BNode::True => return self.tt(),
                _ => xs.push(id),
            }
        }
        xs.sort_unstable();
        xs.dedup();
        for &x in &xs {
            if let BNode::Not(y) = self.nodes[x as usize] {
                if xs.binary_search(&y).is_ok() {
                    return self.tt();
                }
            }
        }
        match xs.len() {
            0 => self.ff(),
            1 => xs[0],
            _ => self.intern(BNode::Or(xs.into_boxed_slice())),
        }
    }

    pub fn implies(&mut self, a: Id, b: Id) -> Id {
        let na = self.not(a);
        self.or([na, b])
    }

    pub fn iff(&mut self, a: Id, b: Id) -> Id {
        let both = self.and([a, b]);
        let (na, nb) = (self.not(a), self.not(b));
        let neither = self.and([na, nb]);
        self.or([both, neither])
    }

    /// Evaluates an expression under an assignment of the base variables.
    pub fn eval(&self, id: Id, assign: &dyn Fn(i32) -> bool) -> bool {
        let mut memo: HashMap<Id, bool> = HashMap::new();
        self.eval_memo(id, assign, &mut memo)
    }

    fn eval_memo(&self, id: Id, assign: &dyn Fn(i32) -> bool, memo: &mut HashMap<Id, bool>) -> bool {
        if let Some(&v) = memo.get(&id) {
            return v;
        }
        let v = match &self.nodes[id as usize] {
            BNode::True => true,
            BNode::False => false,
            BNode::Var(x) => assign(*x),
            BNode::Not(x) => !self.eval_memo(*x, assign, memo),
            BNode::And(xs) => xs.iter().all(|&x| self.eval_memo(x, assign, memo)),
            BNode::Or(xs) => xs.iter().any(|&x| self.eval_memo(x, assign, memo)),
        };
        memo.insert(id, v);
        v
    }
}

/// Collects CNF clauses, converting arena expressions with fresh definition
/// variables (Tseitin). Variable 1 is reserved as the constant-true variable
/// and asserted by a unit clause on construction.
pub struct CnfSink {
    pub clauses: Vec<Vec<i32>>,
    next_var: i32,
    memo: HashMap<Id, i32>,
    /// Fresh variables with their defining expressions, in allocation order;
    /// used to extend structural assignments over definition variables.
    pub defs: Vec<(i32, Id)>,
}

pub const TRUE_VAR: i32 = 1;

impl CnfSink {
    pub fn new(first_free_var: i32) -> Self {
        assert!(first_free_var > TRUE_VAR);
        CnfSink {
            clauses: vec![vec![TRUE_VAR]],
            next_var: first_free_var,
            memo: HashMap::new(),
            defs: Vec::new(),
        }
    }

    pub fn fresh_var(&mut self) -> i32 {
        let v = self.next_var;
        self.next_var += 1;
        v
    }

    pub fn num_vars(&self) -> i32 {
        self.next_var - 1
    }

    pub fn add_clause(&mut self, clause: Vec<i32>) {
        self.clauses.push(clause);
    }

    /// Literal equisatisfiably representing the expression.
    pub fn lit(&mut self, ar: &ExprArena, id: Id) -> i32 {
        if let Some(&l) = self.memo.get(&id) {
            return l;
        }
        let l = match &ar.nodes[id as usize] {
            BNode::True => TRUE_VAR,
            BNode::False => -TRUE_VAR,
            BNode::Var(v) => *v,
            BNode::Not(x) => -self.lit(ar, *x),
            BNode::And(xs) => {
                let lits: Vec<i32> = xs.clone().iter().map(|&x| self.lit(ar, x)).collect();
                let g = self.fresh_var();
                self.defs.push((g, id));
                let mut long = Vec::with_capacity(lits.len() + 1);
                long.push(g);
                for &x in &lits {
                    self.add_clause(vec![-g, x]);
                    long.push(-x);
                }
                self.add_clause(long);
                g
            }
            BNode::Or(xs) => {
                let lits: Vec<i32> = xs.clone().iter().map(|&x| self.lit(ar, x)).collect();
                let g = self.fresh_var();
                self.defs.push((g, id));
                let mut long = Vec::with_capacity(lits.len() + 1);
                long.push(-g);
                for &x in &lits {
                    self.add_clause(vec![g, -x]);
                    long.push(x);
                }
                self.add_clause(long);
                g
            }
        };
        self.memo.insert(id, l);
        l
    }

    /// Asserts that the expression holds, splitting top-level conjunctions
    /// into separate assertions and top-level disjunctions into one clause.
    pub fn assert_true(&mut self, ar: &ExprArena, id: Id) {
        match &ar.nodes[id as usize] {
            BNode::True => {}
            BNode::And(xs) => {
                for x in xs.clone().iter() {
                    self.assert_true(ar, *x);
                }
            }
            BNode::Or(xs) => {
                let clause = xs.clone().iter().map(|&x| self.lit(ar, x)).collect();
                self.add_clause(clause);
            }
            _ => {
                let l = self.lit(ar, id);
                self.add_clause(vec![l]);
            }
        }
    }
}

/// A grounded set or relation: one guard expression per slot or slot pair.
/// Every entry implies that the slot(s) it mentions are in use.
#[derive(Clone, Debug)]
pub enum SymValue {
    Set(Vec<Id>),
    Rel(Vec<Vec<Id>>),
}

impl SymValue {
    pub fn cells(&self) -> Vec<Id> {
        match self {
            SymValue::Set(v) => v.clone(),
            SymValue::Rel(m) => m.iter().flatten().copied().collect(),
        }
    }
}

type Env = HashMap<String, usize>;

fn all_false(ar: &ExprArena, v: &SymValue) -> bool {
    v.cells().iter().all(|&c| c == ar.ff())
}

/// Aligns representations where lowering unified `{}` with a relation.
fn coerce(ar: &ExprArena, n: usize, a: SymValue, b: SymValue) -> (SymValue, SymValue) {
    match (&a, &b) {
        (SymValue::Set(_), SymValue::Rel(_)) if all_false(ar, &a) => {
            (SymValue::Rel(vec![vec![ar.ff(); n]; n]), b)
        }
        (SymValue::Rel(_), SymValue::Set(_)) if all_false(ar, &b) => {
            let empty = SymValue::Rel(vec![vec![ar.ff(); n]; n]);
            (a, empty)
        }
        _ => (a, b),
    }
}

pub fn ground_expr(
    e: &Expr,
    u: &VarMap,
    ar: &mut ExprArena,
    env: &Env,
) -> Result<SymValue, ConstraintError> {
    let n = u.n;
    Ok(match e {
        Expr::Builtin(Builtin::Root) => {
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let used = ar.var(u.used(i));
                let id = if i + 1 < n {
                    let next = ar.var(u.used(i + 1));
                    let not_next = ar.not(next);
                    ar.and([used, not_next])
                } else {
                    used
                };
                out.push(id);
            }
            SymValue::Set(out)
        }
        Expr::Builtin(Builtin::Nodes) => {
            SymValue::Set((0..n).map(|i| ar.var(u.used(i))).collect())
        }
        Expr::Builtin(Builtin::Ap) => {
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let props: Vec<Id> =
                    (0..u.ap.len()).map(|p| ar.var(u.label_prop(i, p))).collect();
                let any = ar.or(props);
                let used = ar.var(u.used(i));
                out.push(ar.and([used, any]));
            }
            SymValue::Set(out)
        }
        Expr::Builtin(Builtin::Temporal) => {
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let ops: Vec<Id> = crate::formula::OpKind::ALL
                    .iter()
                    .filter(|op| op.is_temporal())
                    .map(|&op| ar.var(u.label_op(i, op)))
                    .collect();
                let any = ar.or(ops);
                let used = ar.var(u.used(i));
                out.push(ar.and([used, any]));
            }
            SymValue::Set(out)
        }
        Expr::Builtin(Builtin::L) => SymValue::Rel(child_matrix(u, ar, false)),
        Expr::Builtin(Builtin::R) => SymValue::Rel(child_matrix(u, ar, true)),
        Expr::Label(LabelRef::Op(op)) => {
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let label = ar.var(u.label_op(i, *op));
                let used = ar.var(u.used(i));
                out.push(ar.and([used, label]));
            }
            SymValue::Set(out)
        }
        Expr::Label(LabelRef::Prop(name)) => {
            let p = u
                .ap
                .iter()
                .position(|q| q.name == *name)
                .ok_or_else(|| ConstraintError::UnknownProp { name: name.clone() })?;
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let label = ar.var(u.label_prop(i, p));
                let used = ar.var(u.used(i));
                out.push(ar.and([used, label]));
            }
            SymValue::Set(out)
        }
        Expr::Const(name) => {
            let c = u
                .consts
                .iter()
                .position(|d| d == name)
                .unwrap_or_else(|| panic!("undeclared constant `{name}` survived lowering"));
            SymValue::Set((0..n).map(|i| ar.var(u.const_var(c, i))).collect())
        }
        Expr::Var(name) => {
            let slot = *env
                .get(name)
                .unwrap_or_else(|| panic!("unbound variable `{name}` survived lowering"));
            SymValue::Set((0..n).map(|i| if i == slot { ar.tt() } else { ar.ff() }).collect())
        }
        Expr::Empty => SymValue::Set(vec![ar.ff(); n]),
        Expr::Union(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            match coerce(ar, n, a, b) {
                (SymValue::Set(x), SymValue::Set(y)) => SymValue::Set(
                    x.into_iter().zip(y).map(|(p, q)| ar.or([p, q])).collect(),
                ),
                (SymValue::Rel(x), SymValue::Rel(y)) => SymValue::Rel(zip_rel(ar, x, y, true)),
                _ => unreachable!("arity checked during lowering"),
            }
        }
        Expr::Inter(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            match coerce(ar, n, a, b) {
                (SymValue::Set(x), SymValue::Set(y)) => SymValue::Set(
                    x.into_iter().zip(y).map(|(p, q)| ar.and([p, q])).collect(),
                ),
                (SymValue::Rel(x), SymValue::Rel(y)) => SymValue::Rel(zip_rel(ar, x, y, false)),
                _ => unreachable!("arity checked during lowering"),
            }
        }
        Expr::Diff(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            match coerce(ar, n, a, b) {
                (SymValue::Set(x), SymValue::Set(y)) => SymValue::Set(
                    x.into_iter()
                        .zip(y)
                        .map(|(p, q)| {
                            let nq = ar.not(q);
                            ar.and([p, nq])
                        })
                        .collect(),
                ),
                (SymValue::Rel(x), SymValue::Rel(y)) => {
                    let mut out = vec![vec![ar.ff(); n]; n];
                    for i in 0..n {
                        for j in 0..n {
                            let nq = ar.not(y[i][j]);
                            out[i][j] = ar.and([x[i][j], nq]);
                        }
                    }
                    SymValue::Rel(out)
                }
                _ => unreachable!("arity checked during lowering"),
            }
        }
        Expr::Product(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            let (x, y) = (as_set(ar, n, a), as_set(ar, n, b));
            let mut out = vec![vec![ar.ff(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    out[i][j] = ar.and([x[i], y[j]]);
                }
            }
            SymValue::Rel(out)
        }
        Expr::Join(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            match (a, b) {
                (SymValue::Set(s), SymValue::Rel(r)) => {
                    let mut out = Vec::with_capacity(n);
                    for j in 0..n {
                        let terms: Vec<Id> =
                            (0..n).map(|i| ar.and([s[i], r[i][j]])).collect();
                        out.push(ar.or(terms));
                    }
                    SymValue::Set(out)
                }
                (SymValue::Rel(r), SymValue::Set(s)) => {
                    let mut out = Vec::with_capacity(n);
                    for i in 0..n {
                        let terms: Vec<Id> =
                            (0..n).map(|j| ar.and([r[i][j], s[j]])).collect();
                        out.push(ar.or(terms));
                    }
                    SymValue::Set(out)
                }
                (SymValue::Rel(r), SymValue::Rel(q)) => SymValue::Rel(compose(ar, &r, &q)),
                (SymValue::Set(_), SymValue::Set(_)) => SymValue::Set(vec![ar.ff(); n]),
            }
        }
        Expr::Closure(x) => {
            let v = ground_expr(x, u, ar, env)?;
            let r = as_rel(ar, n, v);
            SymValue::Rel(transitive_closure(ar, r))
        }
        Expr::ReflClosure(x) => {
            let v = ground_expr(x, u, ar, env)?;
            let r = as_rel(ar, n, v);
            let mut closed = transitive_closure(ar, r);
            for (i, row) in closed.iter_mut().enumerate() {
                let used = ar.var(u.used(i));
                row[i] = ar.or([row[i], used]);
            }
            SymValue::Rel(closed)
        }
        Expr::Converse(x) => {
            let v = ground_expr(x, u, ar, env)?;
            let r = as_rel(ar, n, v);
            let mut out = vec![vec![ar.ff(); n]; n];
            for (i, row) in r.iter().enumerate() {
                for (j, &cell) in row.iter().enumerate() {
                    out[j][i] = cell;
                }
            }
            SymValue::Rel(out)
        }
        Expr::Comprehension(CompVars::One(x), body) => {
            let mut out = Vec::with_capacity(n);
            let mut env = env.clone();
            for i in 0..n {
                env.insert(x.clone(), i);
                let b = ground_formula(body, u, ar, &env)?;
                let used = ar.var(u.used(i));
                out.push(ar.and([used, b]));
            }
            SymValue::Set(out)
        }
        Expr::Comprehension(CompVars::Two(x, y), body) => {
            let mut out = vec![vec![ar.ff(); n]; n];
            let mut env = env.clone();
            for i in 0..n {
                for j in 0..n {
                    env.insert(x.clone(), i);
                    env.insert(y.clone(), j);
                    let b = ground_formula(body, u, ar, &env)?;
                    let ui = ar.var(u.used(i));
                    let uj = ar.var(u.used(j));
                    out[i][j] = ar.and([ui, uj, b]);
                }
            }
            SymValue::Rel(out)
        }
        Expr::Name(_) | Expr::FuncApp(..) | Expr::SetDisplay(_) => {
            unreachable!("expression was not lowered")
        }
    })
}

fn eval_pair(
    a: &Expr,
    b: &Expr,
    u: &VarMap,
    ar: &mut ExprArena,
    env: &Env,
) -> Result<(SymValue, SymValue), ConstraintError> {
    Ok((ground_expr(a, u, ar, env)?, ground_expr(b, u, ar, env)?))
}

fn zip_rel(ar: &mut ExprArena, x: Vec<Vec<Id>>, y: Vec<Vec<Id>>, union: bool) -> Vec<Vec<Id>> {
    x.into_iter()
        .zip(y)
        .map(|(rx, ry)| {
            rx.into_iter()
                .zip(ry)
                .map(|(p, q)| if union { ar.or([p, q]) } else { ar.and([p, q]) })
                .collect()
        })
        .collect()
}

fn as_set(ar: &ExprArena, n: usize, v: SymValue) -> Vec<Id> {
    match v {
        SymValue::Set(s) => s,
        SymValue::Rel(_) if all_false(ar, &v) => vec![ar.ff(); n],
        SymValue::Rel(_) => unreachable!("arity checked during lowering"),
    }
}

fn as_rel(ar: &ExprArena, n: usize, v: SymValue) -> Vec<Vec<Id>> {
    match v {
        SymValue::Rel(r) => r,
        SymValue::Set(_) if all_false(ar, &v) => vec![vec![ar.ff(); n]; n],
        SymValue::Set(_) => unreachable!("arity checked during lowering"),
    }
}

fn child_matrix(u: &VarMap, ar: &mut ExprArena, right: bool) -> Vec<Vec<Id>> {
    let n = u.n;
    let mut out = vec![vec![ar.ff(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = if right { u.child_r(i, j) } else { u.child_l(i, j) };
            out[i][j] = ar.var(v.expect("j < i is in child range"));
        }
    }
    out
}

fn compose(ar: &mut ExprArena, r: &[Vec<Id>], q: &[Vec<Id>]) -> Vec<Vec<Id>> {
    let n = r.len();
    let mut out = vec![vec![ar.ff(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let terms: Vec<Id> = (0..n).map(|k| ar.and([r[i][k], q[k][j]])).collect();
            out[i][j] = ar.or(terms);
        }
    }
    out
}

/// Transitive closure by iterated squaring: after `k` rounds the relation
/// covers all paths of length up to `2^k`.
fn transitive_closure(ar: &mut ExprArena, r: Vec<Vec<Id>>) -> Vec<Vec<Id>> {
    let n = r.len();
    let rounds = (usize::BITS - n.leading_zeros()) as usize + 1;
    let mut t = r;
    for _ in 0..rounds {
        let squared = compose(ar, &t, &t);
        t = zip_rel(ar, t, squared, true);
    }
    t
}

/// `s[j]` holds when at least `j` of the first processed cells are true;
/// columns are built only up to the queried threshold.
fn count_at_least(ar: &mut ExprArena, cells: &[Id], threshold: u64) -> Id {
    if threshold == 0 {
        return ar.tt();
    }
    if threshold > cells.len() as u64 {
        return ar.ff();
    }
    let k = threshold as usize;
    // s[j] = at least j true so far; s[0] = true
    let mut s = vec![ar.ff(); k + 1];
    s[0] = ar.tt();
    for &cell in cells {
        for j in (1..=k).rev() {
            let carry = ar.and([s[j - 1], cell]);
            s[j] = ar.or([s[j], carry]);
        }
    }
    s[k]
}

pub fn ground_card(ar: &mut ExprArena, cells: &[Id], op: CmpOp, k: u64) -> Id {
    match op {
        CmpOp::Ge => count_at_least(ar, cells, k),
        CmpOp::Gt => count_at_least(ar, cells, k.saturating_add(1)),
        CmpOp::Le => {
            let above = count_at_least(ar, cells, k.saturating_add(1));
            ar.not(above)
        }
        CmpOp::Lt => {
            if k == 0 {
                ar.ff()
            } else {
                let above = count_at_least(ar, cells, k);
                ar.not(above)
            }
        }
        CmpOp::Eq => {
            let ge = count_at_least(ar, cells, k);
            let above = count_at_least(ar, cells, k.saturating_add(1));
            let not_above = ar.not(above);
            ar.and([ge, not_above])
        }
        CmpOp::Ne => {
            let eq = ground_card(ar, cells, CmpOp::Eq, k);
            ar.not(eq)
        }
    }
}

pub fn ground_formula(
    f: &CFormula,
    u: &VarMap,
    ar: &mut ExprArena,
    env: &Env,
) -> Result<Id, ConstraintError> {
    let n = u.n;
    Ok(match f {
        CFormula::Not(x) => {
            let g = ground_formula(x, u, ar, env)?;
            ar.not(g)
        }
        CFormula::And(a, b) => {
            let (ga, gb) = (ground_formula(a, u, ar, env)?, ground_formula(b, u, ar, env)?);
            ar.and([ga, gb])
        }
        CFormula::Or(a, b) => {
            let (ga, gb) = (ground_formula(a, u, ar, env)?, ground_formula(b, u, ar, env)?);
            ar.or([ga, gb])
        }
        CFormula::Implies(a, b) => {
            let (ga, gb) = (ground_formula(a, u, ar, env)?, ground_formula(b, u, ar, env)?);
            ar.implies(ga, gb)
        }
        CFormula::Iff(a, b) => {
            let (ga, gb) = (ground_formula(a, u, ar, env)?, ground_formula(b, u, ar, env)?);
            ar.iff(ga, gb)
        }
        CFormula::Subset(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            let (a, b) = coerce(ar, n, a, b);
            let (ca, cb) = (a.cells(), b.cells());
            let impls: Vec<Id> =
                ca.into_iter().zip(cb).map(|(p, q)| ar.implies(p, q)).collect();
            ar.and(impls)
        }
        CFormula::Eq(a, b) => {
            let (a, b) = eval_pair(a, b, u, ar, env)?;
            let (a, b) = coerce(ar, n, a, b);
            let (ca, cb) = (a.cells(), b.cells());
            let iffs: Vec<Id> = ca.into_iter().zip(cb).map(|(p, q)| ar.iff(p, q)).collect();
            ar.and(iffs)
        }
        CFormula::Ne(a, b) => {
            let eq = ground_formula(&CFormula::Eq(a.clone(), b.clone()), u, ar, env)?;
            ar.not(eq)
        }
        CFormula::Card(e, op, k) => {
            let v = ground_expr(e, u, ar, env)?;
            ground_card(ar, &v.cells(), *op, *k)
        }
        CFormula::NoneOf(e) => {
            let v = ground_expr(e, u, ar, env)?;
            let any = ar.or(v.cells());
            ar.not(any)
        }
        CFormula::SomeOf(e) => {
            let v = ground_expr(e, u, ar, env)?;
            ar.or(v.cells())
        }
        CFormula::OneOf(e) => {
            let v = ground_expr(e, u, ar, env)?;
            ground_card(ar, &v.cells(), CmpOp::Eq, 1)
        }
        CFormula::All(binder, body) => {
            let conjuncts = quantifier_parts(binder, body, u, ar, env, true)?;
            ar.and(conjuncts)
        }
        CFormula::Some(binder, body) => {
            let disjuncts = quantifier_parts(binder, body, u, ar, env, false)?;
            ar.or(disjuncts)
        }
    })
}

fn quantifier_parts(
    binder: &Binder,
    body: &CFormula,
    u: &VarMap,
    ar: &mut ExprArena,
    env: &Env,
    universal: bool,
) -> Result<Vec<Id>, ConstraintError> {
    let n = u.n;
    let domain = ground_expr(&binder.domain, u, ar, env)?;
    let mut parts = Vec::new();
    let mut env = env.clone();
    match (&binder.vars, domain) {
        (CompVars::One(x), dom) => {
            let dom = as_set(ar, n, dom);
            for (i, &guard) in dom.iter().enumerate() {
                env.insert(x.clone(), i);
                let b = ground_formula(body, u, ar, &env)?;
                parts.push(if universal {
                    ar.implies(guard, b)
                } else {
                    ar.and([guard, b])
                });
            }
        }
        (CompVars::Two(x, y), dom) => {
            let dom = as_rel(ar, n, dom);
            for i in 0..n {
                for j in 0..n {
                    let guard = dom[i][j];
                    env.insert(x.clone(), i);
                    env.insert(y.clone(), j);
                    let b = ground_formula(body, u, ar, &env)?;
                    parts.push(if universal {
                        ar.implies(guard, b)
                    } else {
                        ar.and([guard, b])
                    });
                }
            }
        }
    }
    Ok(parts)
}

/// A group of cost cells at one priority; the solver minimizes the number of
/// true cells, higher priorities first.
#[derive(Clone, Debug)]
pub struct CostLayer {
    pub priority: u32,
    pub cells: Vec<Id>,
}

/// Grounds the objectives into cost layers, merging equal priorities and
/// sorting from highest priority to lowest. Constant-false cells are
/// dropped; a `maximize` contributes one cost cell per *missable* element.
pub fn ground_objectives(
    program: &Program,
    u: &VarMap,
    ar: &mut ExprArena,
    default_size_objective: bool,
) -> Result<Vec<CostLayer>, ConstraintError> {
    let env = Env::new();
    let ff = ar.ff();
    let mut layers: Vec<CostLayer> = Vec::new();
    let add = |priority: u32, cells: Vec<Id>, layers: &mut Vec<CostLayer>| {
        if let Some(layer) = layers.iter_mut().find(|l| l.priority == priority) {
            layer.cells.extend(cells);
        } else {
            layers.push(CostLayer { priority, cells });
        }
    };
    for obj in &program.objectives {
        let cells = match &obj.kind {
            ObjectiveKind::Minimize(e) | ObjectiveKind::SoftEmpty(e) => {
                let v = ground_expr(e, u, ar, &env)?;
                v.cells().into_iter().filter(|&c| c != ff).collect()
            }
            ObjectiveKind::Maximize(e) => {
                let v = ground_expr(e, u, ar, &env)?;
                let mut cells = Vec::new();
                for c in v.cells() {
                    if c != ff {
                        cells.push(ar.not(c));
                    }
                }
                cells
            }
            ObjectiveKind::SoftFact(f) => {
                let g = ground_formula(f, u, ar, &env)?;
                vec![ar.not(g)]
            }
        };
        add(obj.priority, cells, &mut layers);
    }
    if default_size_objective {
        let edges = Expr::Union(
            Box::new(Expr::Builtin(Builtin::L)),
            Box::new(Expr::Builtin(Builtin::R)),
        );
        let v = ground_expr(&edges, u, ar, &env)?;
        let cells: Vec<Id> = v.cells().into_iter().filter(|&c| c != ff).collect();
        add(1, cells, &mut layers);
    }
    layers.sort_by_key(|l| std::cmp::Reverse(l.priority));
    Ok(layers)
}

/// Grounds the hard part of a program: declared-node domain membership and
/// every `constraint` item.
pub fn ground_program(
    program: &Program,
    u: &VarMap,
    ar: &mut ExprArena,
    sink: &mut CnfSink,
) -> Result<(), ConstraintError> {
    let env = Env::new();
    for (c, decl) in program.decls.iter().enumerate() {
        debug_assert_eq!(u.consts[c], decl.name);
        let domain = ground_expr(&decl.domain, u, ar, &env)?;
        let domain = as_set(ar, u.n, domain);
        for (i, &guard) in domain.iter().enumerate() {
            let cv = ar.var(u.const_var(c, i));
            let imp = ar.implies(cv, guard);
            sink.assert_true(ar, imp);
        }
    }
    for constraint in &program.constraints {
        let g = ground_formula(constraint, u, ar, &env)?;
        sink.assert_true(ar, g);
    }
    Ok(())
}

/// Structural arity of an expression as the grounder sees it (delegates to
/// the lowering rules; present so callers need not import both modules).
pub fn expr_arity(e: &Expr) -> Arity {
    arity_of(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arena_simplifies_and_hash_conses() {
        let mut ar = ExprArena::new();
        let v1 = ar.var(2);
        let v2 = ar.var(3);
        assert_eq!(ar.and([v1, ar.tt()]), v1);
        assert_eq!(ar.or([v1, ar.ff()]), v1);
        let ff = ar.ff();
        assert_eq!(ar.and([v1, ff]), ar.ff());
        let n1 = ar.not(v1);
        assert_eq!(ar.and([v1, n1]), ar.ff());
        assert_eq!(ar.or([v1, n1]), ar.tt());
        assert_eq!(ar.not(n1), v1);
        let a = ar.and([v1, v2]);
        let b = ar.and([v2, v1]);
        assert_eq!(a, b, "commuted conjunctions share a node");
        let len = ar.len();
        let _ = ar.and([v1, v2]);
        assert_eq!(ar.len(), len, "re-building an existing node allocates nothing");
    }

    #[test]
    fn arena_eval_matches_structure() {
        let mut ar = ExprArena::new();
        let v1 = ar.var(2);
        let v2 = ar.var(3);
        let nv2 = ar.not(v2);
        let e = ar.or([ar.tt(), v1]);
        assert_eq!(e, ar.tt());
        let f = ar.and([v1, nv2]);
        assert!(ar.eval(f, &|v| v == 2));
        assert!(!ar.eval(f, &|_| true));
        assert!(!ar.eval(f, &|_| false));
    }

    #[test]
    fn counting_thresholds() {
        let mut ar = ExprArena::new();
        let cells: Vec<Id> = (2..7).map(|v| ar.var(v)).collect();
        // assignment with vars 2, 4, 6 true => 3 of 5 cells
        let assign = |v: i32| v % 2 == 0;
        for (op, k, expect) in [
            (CmpOp::Ge, 3, true),
            (CmpOp::Ge, 4, false),
            (CmpOp::Le, 3, true),
            (CmpOp::Le, 2, false),
            (CmpOp::Eq, 3, true),
            (CmpOp::Eq, 2, false),
            (CmpOp::Ne, 3, false),
            (CmpOp::Gt, 2, true),
            (CmpOp::Gt, 3, false),
            (CmpOp::Lt, 4, true),
            (CmpOp::Lt, 3, false),
            (CmpOp::Lt, 0, false),
            (CmpOp::Ge, 0, true),
            (CmpOp::Le, 999999999999, true),
        ] {
            let g = ground_card(&mut ar, &cells, op, k);
            assert_eq!(ar.eval(g, &assign), expect, "{op:?} {k}");
        }
    }

    #[test]
    fn tseitin_definitions_extend_assignments() {
        let mut ar = ExprArena::new();
        let v1 = ar.var(2);
        let v2 = ar.var(3);
        let nv1 = ar.not(v1);
        let conj = ar.and([v1, v2]);
        let e = ar.or([conj, nv1]);
        let mut sink = CnfSink::new(4);
        let lit = sink.lit(&ar, e);
        sink.add_clause(vec![lit]);
        // under v1=true, v2=false the expression is false, so some clause
        // must break when we extend that assignment
        let base = |v: i32| v == 1 || v == 2;
        let mut assign: HashMap<i32, bool> = HashMap::new();
        assign.insert(1, true);
        assign.insert(2, true);
        assign.insert(3, false);
        for &(g, id) in &sink.defs {
            let ar_ref = &ar;
            let a2 = assign.clone();
            assign.insert(g, ar_ref.eval(id, &move |v| *a2.get(&v).unwrap_or(&base(v))));
        }
        let violated = sink.clauses.iter().any(|c| {
            !c.iter().any(|&l| {
                let val = *assign.get(&l.abs()).unwrap_or(&false);
                (l > 0) == val
            })
        });
        assert!(violated);
        // under v1=false the expression is true and every clause satisfiable
        let mut assign: HashMap<i32, bool> = HashMap::new();
        assign.insert(1, true);
        assign.insert(2, false);
        assign.insert(3, false);
        for &(g, id) in &sink.defs {
            let a2 = assign.clone();
            assign.insert(g, ar.eval(id, &move |v| *a2.get(&v).unwrap_or(&false)));
        }
        let all_sat = sink.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let val = *assign.get(&l.abs()).unwrap_or(&false);
                (l > 0) == val
            })
        });
        assert!(all_sat);
    }
}
