//! Concrete evaluation of lowered constraint programs against a syntax DAG.
//!
//! This is the reference semantics: the CNF grounding must agree with it on
//! every DAG, which the test suite checks exhaustively for small sizes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::ConstraintError;
use crate::dag::{NodeLabel, SyntaxDag};
use crate::formula::Prop;

/// Node sets and relations are over node ids of the underlying DAG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CValue {
    Set(BTreeSet<usize>),
    Rel(BTreeSet<(usize, usize)>),
}

impl CValue {
    pub fn len(&self) -> usize {
        match self {
            CValue::Set(s) => s.len(),
            CValue::Rel(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Evaluation context: a DAG restricted to the nodes reachable from its
/// root, plus the proposition alphabet.
pub struct ConcreteCtx<'a> {
    pub dag: &'a SyntaxDag,
    pub ap: &'a [Prop],
    nodes: Vec<usize>,
}

/// Values for free names: declared nodes and quantifier-bound variables.
pub type Env = HashMap<String, usize>;

impl<'a> ConcreteCtx<'a> {
    pub fn new(dag: &'a SyntaxDag, ap: &'a [Prop]) -> Self {
        let reachable = dag.reachable();
        let nodes = (0..dag.labels.len()).filter(|&i| reachable[i]).collect();
        ConcreteCtx { dag, ap, nodes }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn label_set(&self, wanted: &LabelRef) -> Result<BTreeSet<usize>, ConstraintError> {
        if let LabelRef::Prop(name) = wanted {
            if !self.ap.iter().any(|p| p.name == *name) {
                return Err(ConstraintError::UnknownProp { name: name.clone() });
            }
        }
        Ok(self
            .nodes
            .iter()
            .copied()
            .filter(|&i| match (&self.dag.labels[i], wanted) {
                (NodeLabel::Op(op), LabelRef::Op(want)) => op == want,
                (NodeLabel::Atom(p), LabelRef::Prop(name)) => p.name == *name,
                _ => false,
            })
            .collect())
    }

    fn child_rel(&self, right: bool) -> BTreeSet<(usize, usize)> {
        let children = if right { &self.dag.right } else { &self.dag.left };
        self.nodes
            .iter()
            .copied()
            .filter_map(|i| children[i].map(|j| (i, j)))
            .collect()
    }
}

/// Aligns the representations of two values whose arities were unified
/// during lowering; only the empty set is genuinely polymorphic.
fn coerce_pair(a: CValue, b: CValue) -> (CValue, CValue) {
    match (&a, &b) {
        (CValue::Set(s), CValue::Rel(_)) if s.is_empty() => (CValue::Rel(BTreeSet::new()), b),
        (CValue::Rel(_), CValue::Set(s)) if s.is_empty() => (a, CValue::Rel(BTreeSet::new())),
        _ => (a, b),
    }
}

pub fn eval_expr(e: &Expr, ctx: &ConcreteCtx, env: &Env) -> Result<CValue, ConstraintError> {
    Ok(match e {
        Expr::Builtin(Builtin::Root) => CValue::Set([ctx.dag.root].into()),
        Expr::Builtin(Builtin::Nodes) => CValue::Set(ctx.nodes.iter().copied().collect()),
        Expr::Builtin(Builtin::Ap) => CValue::Set(
            ctx.nodes
                .iter()
                .copied()
                .filter(|&i| matches!(ctx.dag.labels[i], NodeLabel::Atom(_)))
                .collect(),
        ),
        Expr::Builtin(Builtin::Temporal) => CValue::Set(
            ctx.nodes
                .iter()
                .copied()
                .filter(|&i| ctx.dag.labels[i].is_temporal())
                .collect(),
        ),
        Expr::Builtin(Builtin::L) => CValue::Rel(ctx.child_rel(false)),
        Expr::Builtin(Builtin::R) => CValue::Rel(ctx.child_rel(true)),
        Expr::Label(l) => CValue::Set(ctx.label_set(l)?),
        Expr::Const(name) | Expr::Var(name) => {
            let i = env
                .get(name)
                .copied()
                .ok_or_else(|| ConstraintError::UnknownName { name: name.clone() })?;
            CValue::Set([i].into())
        }
        Expr::Empty => CValue::Set(BTreeSet::new()),
        Expr::Union(a, b) => {
            match coerce_pair(eval_expr(a, ctx, env)?, eval_expr(b, ctx, env)?) {
                (CValue::Set(x), CValue::Set(y)) => CValue::Set(&x | &y),
                (CValue::Rel(x), CValue::Rel(y)) => CValue::Rel(&x | &y),
                _ => unreachable!("arity checked during lowering"),
            }
        }
        Expr::Diff(a, b) => match coerce_pair(eval_expr(a, ctx, env)?, eval_expr(b, ctx, env)?) {
            (CValue::Set(x), CValue::Set(y)) => CValue::Set(&x - &y),
            (CValue::Rel(x), CValue::Rel(y)) => CValue::Rel(&x - &y),
            _ => unreachable!("arity checked during lowering"),
        },
        Expr::Inter(a, b) => match coerce_pair(eval_expr(a, ctx, env)?, eval_expr(b, ctx, env)?) {
            (CValue::Set(x), CValue::Set(y)) => CValue::Set(&x & &y),
            (CValue::Rel(x), CValue::Rel(y)) => CValue::Rel(&x & &y),
            _ => unreachable!("arity checked during lowering"),
        },
        Expr::Product(a, b) => {
            let (x, y) = (set_of(eval_expr(a, ctx, env)?), set_of(eval_expr(b, ctx, env)?));
            CValue::Rel(
                x.iter().flat_map(|&i| y.iter().map(move |&j| (i, j))).collect(),
            )
        }
        Expr::Join(a, b) => {
            let a = eval_expr(a, ctx, env)?;
            let b = eval_expr(b, ctx, env)?;
            match (a, b) {
                (CValue::Set(s), CValue::Rel(r)) => {
                    CValue::Set(r.iter().filter(|(i, _)| s.contains(i)).map(|&(_, j)| j).collect())
                }
                (CValue::Rel(r), CValue::Set(s)) => {
                    CValue::Set(r.iter().filter(|(_, j)| s.contains(j)).map(|&(i, _)| i).collect())
                }
                (CValue::Rel(r), CValue::Rel(q)) => {
                    let mut out = BTreeSet::new();
                    for &(i, j) in &r {
                        for &(j2, k) in &q {
                            if j == j2 {
                                out.insert((i, k));
                            }
                        }
                    }
                    CValue::Rel(out)
                }
                // one side is the polymorphic empty set
                (CValue::Set(_), CValue::Set(_)) => CValue::Set(BTreeSet::new()),
            }
        }
        Expr::Closure(x) => CValue::Rel(transitive_closure(rel_of(eval_expr(x, ctx, env)?))),
        Expr::ReflClosure(x) => {
            let mut rel = transitive_closure(rel_of(eval_expr(x, ctx, env)?));
            rel.extend(ctx.nodes.iter().map(|&i| (i, i)));
            CValue::Rel(rel)
        }
        Expr::Converse(x) => {
            CValue::Rel(rel_of(eval_expr(x, ctx, env)?).iter().map(|&(i, j)| (j, i)).collect())
        }
        Expr::Comprehension(CompVars::One(x), body) => {
            let mut out = BTreeSet::new();
            let mut env = env.clone();
            for &i in &ctx.nodes {
                env.insert(x.clone(), i);
                if eval_formula(body, ctx, &env)? {
                    out.insert(i);
                }
            }
            CValue::Set(out)
        }
        Expr::Comprehension(CompVars::Two(x, y), body) => {
            let mut out = BTreeSet::new();
            let mut env = env.clone();
            for &i in &ctx.nodes {
                for &j in &ctx.nodes {
                    env.insert(x.clone(), i);
                    env.insert(y.clone(), j);
                    if eval_formula(body, ctx, &env)? {
                        out.insert((i, j));
                    }
                }
            }
            CValue::Rel(out)
        }
        Expr::Name(_) | Expr::FuncApp(..) | Expr::SetDisplay(_) => {
            unreachable!("expression was not lowered")
        }
    })
}

fn set_of(v: CValue) -> BTreeSet<usize> {
    match v {
        CValue::Set(s) => s,
        CValue::Rel(r) if r.is_empty() => BTreeSet::new(),
        CValue::Rel(_) => unreachable!("arity checked during lowering"),
    }
}

fn rel_of(v: CValue) -> BTreeSet<(usize, usize)> {
    match v {
        CValue::Rel(r) => r,
        CValue::Set(s) if s.is_empty() => BTreeSet::new(),
        CValue::Set(_) => unreachable!("arity checked during lowering"),
    }
}

fn transitive_closure(rel: BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut closure = rel;
    loop {
        let mut grew = false;
        let snapshot: Vec<_> = closure.iter().copied().collect();
        for &(i, j) in &snapshot {
            for &(j2, k) in &snapshot {
                if j == j2 && closure.insert((i, k)) {
                    grew = true;
                }
            }
        }
        if !grew {
            return closure;
        }
    }
}

pub fn eval_formula(f: &CFormula, ctx: &ConcreteCtx, env: &Env) -> Result<bool, ConstraintError> {
    Ok(match f {
        CFormula::Not(x) => !eval_formula(x, ctx, env)?,
        CFormula::And(a, b) => eval_formula(a, ctx, env)? && eval_formula(b, ctx, env)?,
        CFormula::Or(a, b) => eval_formula(a, ctx, env)? || eval_formula(b, ctx, env)?,
        CFormula::Implies(a, b) => !eval_formula(a, ctx, env)? || eval_formula(b, ctx, env)?,
        CFormula::Iff(a, b) => eval_formula(a, ctx, env)? == eval_formula(b, ctx, env)?,
        CFormula::Subset(a, b) => {
            match coerce_pair(eval_expr(a, ctx, env)?, eval_expr(b, ctx, env)?) {
                (CValue::Set(x), CValue::Set(y)) => x.is_subset(&y),
                (CValue::Rel(x), CValue::Rel(y)) => x.is_subset(&y),
                _ => unreachable!("arity checked during lowering"),
            }
        }
        CFormula::Eq(a, b) => {
            let (a, b) = coerce_pair(eval_expr(a, ctx, env)?, eval_expr(b, ctx, env)?);
            a == b
        }
        CFormula::Ne(a, b) => {
            let (a, b) = coerce_pair(eval_expr(a, ctx, env)?, eval_expr(b, ctx, env)?);
            a != b
        }
        CFormula::Card(e, op, k) => op.apply(eval_expr(e, ctx, env)?.len() as u64, *k),
        CFormula::NoneOf(e) => eval_expr(e, ctx, env)?.is_empty(),
        CFormula::SomeOf(e) => !eval_expr(e, ctx, env)?.is_empty(),
        CFormula::OneOf(e) => eval_expr(e, ctx, env)?.len() == 1,
        CFormula::All(binder, body) => {
            let mut env = env.clone();
            for binding in binder_bindings(binder, ctx, &env)? {
                apply_binding(&mut env, &binder.vars, binding);
                if !eval_formula(body, ctx, &env)? {
                    return Ok(false);
                }
            }
            true
        }
        CFormula::Some(binder, body) => {
            let mut env = env.clone();
            for binding in binder_bindings(binder, ctx, &env)? {
                apply_binding(&mut env, &binder.vars, binding);
                if eval_formula(body, ctx, &env)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

fn binder_bindings(
    binder: &Binder,
    ctx: &ConcreteCtx,
    env: &Env,
) -> Result<Vec<(usize, usize)>, ConstraintError> {
    Ok(match (&binder.vars, eval_expr(&binder.domain, ctx, env)?) {
        (CompVars::One(_), CValue::Set(s)) => s.into_iter().map(|i| (i, usize::MAX)).collect(),
        (CompVars::Two(..), CValue::Rel(r)) => r.into_iter().collect(),
        (CompVars::Two(..), CValue::Set(s)) if s.is_empty() => Vec::new(),
        _ => unreachable!("arity checked during lowering"),
    })
}

fn apply_binding(env: &mut Env, vars: &CompVars, binding: (usize, usize)) {
    match vars {
        CompVars::One(x) => {
            env.insert(x.clone(), binding.0);
        }
        CompVars::Two(x, y) => {
            env.insert(x.clone(), binding.0);
            env.insert(y.clone(), binding.1);
        }
    }
}

/// Searches for an assignment of the declared nodes (pairwise distinct, each
/// within its domain) under which every hard constraint holds. Returns the
/// first witness in node order, or `None` if the DAG violates the program.
pub fn check_program(
    program: &Program,
    dag: &SyntaxDag,
    ap: &[Prop],
) -> Result<Option<BTreeMap<String, usize>>, ConstraintError> {
    let ctx = ConcreteCtx::new(dag, ap);
    let mut env = Env::new();
    search_decls(program, &ctx, &mut env, 0)
}

fn search_decls(
    program: &Program,
    ctx: &ConcreteCtx,
    env: &mut Env,
    depth: usize,
) -> Result<Option<BTreeMap<String, usize>>, ConstraintError> {
    if depth == program.decls.len() {
        for c in &program.constraints {
            if !eval_formula(c, ctx, env)? {
                return Ok(None);
            }
        }
        return Ok(Some(
            program.decls.iter().map(|d| (d.name.clone(), env[&d.name])).collect(),
        ));
    }
    let decl = &program.decls[depth];
    let domain = set_of(eval_expr(&decl.domain, ctx, env)?);
    for i in domain {
        if program.decls[..depth].iter().any(|d| env[&d.name] == i) {
            continue;
        }
        env.insert(decl.name.clone(), i);
        if let Some(witness) = search_decls(program, ctx, env, depth + 1)? {
            return Ok(Some(witness));
        }
    }
    env.remove(&decl.name);
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::compile;
    use super::*;
    use crate::dag::formula_to_dag;
    use crate::formula::{parse_formula, props};

    fn dag_for(text: &str, ap: &[Prop], share: bool) -> SyntaxDag {
        formula_to_dag(&parse_formula(text, ap).unwrap(), share)
    }

    fn eval_on(expr_src: &str, dag: &SyntaxDag, ap: &[Prop]) -> CValue {
        // lower the expression by routing it through a cardinality constraint
        let program = compile(&format!("constraint #({expr_src}) >= 0;"), &[]).unwrap();
        let ctx = ConcreteCtx::new(dag, ap);
        match &program.constraints[0] {
            CFormula::Card(e, _, _) => eval_expr(e, &ctx, &Env::new()).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn builtin_sets_on_a_small_dag() {
        let ap = props(&["a", "b"]);
        let dag = dag_for("G(a -> F b)", &ap, true);
        assert_eq!(eval_on("Nodes", &dag, &ap).len(), 5);
        assert_eq!(eval_on("AP", &dag, &ap).len(), 2);
        assert_eq!(eval_on("Temporal", &dag, &ap).len(), 2);
        assert_eq!(eval_on("N[G]", &dag, &ap).len(), 1);
        assert_eq!(eval_on("N[->]", &dag, &ap).len(), 1);
        assert_eq!(eval_on("N[a]", &dag, &ap).len(), 1);
        assert_eq!(eval_on("root", &dag, &ap), CValue::Set([dag.root].into()));
        assert_eq!(eval_on("L + R", &dag, &ap).len(), 4);
    }

    #[test]
    fn descendants_and_subnodes() {
        let ap = props(&["a", "b"]);
        let dag = dag_for("G(a -> F b)", &ap, true);
        // desc(root) = everything below the root; subNodes adds the root
        assert_eq!(eval_on("desc(root)", &dag, &ap).len(), 4);
        assert_eq!(eval_on("subNodes(root)", &dag, &ap).len(), 5);
        assert_eq!(eval_on("root . ^(L + R)", &dag, &ap).len(), 4);
        // converse walks upward
        assert_eq!(eval_on("N[a] . ~(L + R)", &dag, &ap).len(), 1);
    }

    #[test]
    fn unknown_propositions_are_rejected() {
        let ap = props(&["a", "b"]);
        let dag = dag_for("G a", &ap, true);
        let program = compile("constraint no N[zz];", &[]).unwrap();
        assert_eq!(
            check_program(&program, &dag, &ap).unwrap_err(),
            ConstraintError::UnknownProp { name: "zz".into() }
        );
    }

    #[test]
    fn no_dag_reuse_accepts_trees_and_rejects_sharing() {
        let ap = props(&["p", "q"]);
        let program = compile("", &["no-dag-reuse"]).unwrap();
        let shared = dag_for("F G p | F G p", &ap, true);
        let tree = dag_for("F G p | F G p", &ap, false);
        assert_eq!(check_program(&program, &shared, &ap).unwrap(), None);
        assert!(check_program(&program, &tree, &ap).unwrap().is_some());
        // sharing an atom between two parents also counts as reuse only for
        // non-leaf nodes; `p & q` in tree form is fine
        let small = dag_for("p & q", &ap, true);
        assert!(check_program(&program, &small, &ap).unwrap().is_some());
    }

    #[test]
    fn no_dag_reuse_rejects_twin_edges() {
        let ap = props(&["p"]);
        // `p & p` with maximal sharing makes the atom both children
        let twin = dag_for("p & p", &ap, true);
        let program = compile("", &["no-dag-reuse"]).unwrap();
        assert_eq!(check_program(&program, &twin, &ap).unwrap(), None);
        let tree = dag_for("p & p", &ap, false);
        assert!(check_program(&program, &tree, &ap).unwrap().is_some());
    }

    #[test]
    fn no_tautology_rejects_shared_implication_sides() {
        let ap = props(&["p", "q"]);
        let program = compile("", &["no-tautology"]).unwrap();
        let taut = dag_for("p -> p", &ap, true);
        let fine = dag_for("p -> q", &ap, true);
        assert_eq!(check_program(&program, &taut, &ap).unwrap(), None);
        assert!(check_program(&program, &fine, &ap).unwrap().is_some());
    }

    #[test]
    fn nnf_requires_negations_on_atoms() {
        let ap = props(&["p", "q"]);
        let program = compile("", &["nnf"]).unwrap();
        let deep = dag_for("!(p & q)", &ap, true);
        let flat = dag_for("!p | !q", &ap, true);
        assert_eq!(check_program(&program, &deep, &ap).unwrap(), None);
        assert!(check_program(&program, &flat, &ap).unwrap().is_some());
    }

    #[test]
    fn liveness_pattern_pins_the_response_shape() {
        let ap = props(&["req", "ack"]);
        let program = compile("", &["liveness-pattern"]).unwrap();
        let good = dag_for("G(req -> F ack)", &ap, true);
        let witness = check_program(&program, &good, &ap).unwrap().unwrap();
        assert_eq!(witness.len(), 3);
        assert_eq!(witness["ng"], good.root);
        for bad in ["G(req -> ack)", "G(F req -> F ack)", "F(req -> F ack)"] {
            let dag = dag_for(bad, &ap, true);
            assert_eq!(check_program(&program, &dag, &ap).unwrap(), None, "{bad}");
        }
    }

    #[test]
    fn comprehensions_and_pair_quantifiers() {
        let ap = props(&["a", "b"]);
        let dag = dag_for("G(a -> F b)", &ap, true);
        let atoms = eval_on("{x | x in AP}", &dag, &ap);
        assert_eq!(atoms, eval_on("AP", &dag, &ap));
        let program = compile(
            "constraint all (x, y) in L + R : some (x . (L + R)) or x in Nodes;",
            &[],
        )
        .unwrap();
        assert!(check_program(&program, &dag, &ap).unwrap().is_some());
    }

    #[test]
    fn distinctness_of_declared_nodes() {
        let ap = props(&["p"]);
        // two declared G nodes cannot share the single G in `G p`
        let program = compile("node g1 in N[G];\nnode g2 in N[G];\n", &[]).unwrap();
        let dag = dag_for("G p", &ap, true);
        assert_eq!(check_program(&program, &dag, &ap).unwrap(), None);
        let dag2 = dag_for("G G p", &ap, true);
        assert!(check_program(&program, &dag2, &ap).unwrap().is_some());
    }

    #[test]
    fn cardinality_comparisons() {
        let ap = props(&["a", "b"]);
        let dag = dag_for("G(a -> F b)", &ap, true);
        for (src, expect) in [
            ("constraint #Nodes = 5;", true),
            ("constraint #Nodes < 5;", false),
            ("constraint #(L + R) >= 4;", true),
            ("constraint #AP != 2;", false),
            ("constraint #{} = 0;", true),
            ("constraint #Temporal > 999999999999;", false),
        ] {
            let program = compile(src, &[]).unwrap();
            assert_eq!(
                check_program(&program, &dag, &ap).unwrap().is_some(),
                expect,
                "{src}"
            );
        }
    }
}
