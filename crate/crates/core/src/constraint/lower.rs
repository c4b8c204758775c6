//! Lowering: resolves names, inlines `func` applications and `rel` aliases,
//! rewrites set displays into unions of products, and checks arities.
//!
//! Definitions scope downward only, so a function can never apply itself —
//! a self-reference inside a body is reported as recursion rather than as an
//! unknown name.

use std::collections::HashMap;

use super::ast::*;
use super::parser::is_keyword;
use super::ConstraintError;

/// Lowers concatenated item groups (prelude, presets, then user program)
/// into a validated [`Program`].
pub fn lower_items(groups: &[Vec<Item>]) -> Result<Program, ConstraintError> {
    let mut lw = Lowerer::default();
    for group in groups {
        for item in group {
            lw.item(item)?;
        }
    }
    Ok(Program {
        decls: lw.decls,
        constraints: lw.constraints,
        objectives: lw.objectives,
    })
}

/// Structural arity of a lowered expression. Bound variables and declared
/// nodes always denote singleton node sets.
pub fn arity_of(e: &Expr) -> Arity {
    match e {
        Expr::Builtin(b) => b.arity(),
        Expr::Const(_) | Expr::Var(_) | Expr::Label(_) => Arity::One,
        Expr::Empty => Arity::Any,
        Expr::Union(a, b) | Expr::Diff(a, b) | Expr::Inter(a, b) => arity_of(a)
            .unify(arity_of(b))
            .expect("lowered expression has consistent arity"),
        Expr::Product(..) => Arity::Two,
        Expr::Join(a, b) => {
            let (aa, ab) = (defaulted(arity_of(a)), defaulted(arity_of(b)));
            match (aa, ab) {
                (Arity::One, Arity::Two) | (Arity::Two, Arity::One) => Arity::One,
                (Arity::Two, Arity::Two) => Arity::Two,
                _ => panic!("lowered join has valid operand arities"),
            }
        }
        Expr::Closure(_) | Expr::ReflClosure(_) | Expr::Converse(_) => Arity::Two,
        Expr::Comprehension(CompVars::One(_), _) => Arity::One,
        Expr::Comprehension(CompVars::Two(..), _) => Arity::Two,
        Expr::Name(_) | Expr::FuncApp(..) | Expr::SetDisplay(_) => {
            panic!("expression was not lowered")
        }
    }
}

/// In a join, an operand of unknown arity (the empty set) is read as a node
/// set rather than a relation.
fn defaulted(a: Arity) -> Arity {
    match a {
        Arity::Any => Arity::One,
        other => other,
    }
}

#[derive(Default)]
struct Lowerer {
    funcs: HashMap<String, (Vec<String>, Expr)>,
    rels: HashMap<String, Expr>,
    decls: Vec<NodeDecl>,
    constraints: Vec<CFormula>,
    objectives: Vec<Objective>,
}

impl Lowerer {
    fn item(&mut self, item: &Item) -> Result<(), ConstraintError> {
        match item {
            Item::Func(def) => {
                self.check_fresh(&def.name)?;
                let mut scope: Vec<String> = def.params.clone();
                for (i, p) in def.params.iter().enumerate() {
                    if def.params[..i].contains(p) {
                        return Err(ConstraintError::DuplicateName { name: p.clone() });
                    }
                }
                let (body, _) = self.expr(&def.body, &mut scope, Some(&def.name))?;
                self.funcs.insert(def.name.clone(), (def.params.clone(), body));
            }
            Item::Rel { name, body } => {
                self.check_fresh(name)?;
                let (body, _) = self.expr(body, &mut Vec::new(), None)?;
                self.rels.insert(name.clone(), body);
            }
            Item::Node(decl) => {
                self.check_fresh(&decl.name)?;
                let (domain, arity) = self.expr(&decl.domain, &mut Vec::new(), None)?;
                self.require_one(arity, "node declaration domain")?;
                self.decls.push(NodeDecl { name: decl.name.clone(), domain });
            }
            Item::Constraint(f) => {
                let f = self.formula(f, &mut Vec::new(), None)?;
                self.constraints.push(f);
            }
            Item::Objective(o) => {
                let kind = match &o.kind {
                    ObjectiveKind::Minimize(e) => {
                        ObjectiveKind::Minimize(self.expr(e, &mut Vec::new(), None)?.0)
                    }
                    ObjectiveKind::Maximize(e) => {
                        ObjectiveKind::Maximize(self.expr(e, &mut Vec::new(), None)?.0)
                    }
                    ObjectiveKind::SoftEmpty(e) => {
                        ObjectiveKind::SoftEmpty(self.expr(e, &mut Vec::new(), None)?.0)
                    }
                    ObjectiveKind::SoftFact(f) => {
                        ObjectiveKind::SoftFact(self.formula(f, &mut Vec::new(), None)?)
                    }
                };
                self.objectives.push(Objective { kind, priority: o.priority });
            }
        }
        Ok(())
    }

    fn check_fresh(&self, name: &str) -> Result<(), ConstraintError> {
        if is_keyword(name) || name == "N" || Builtin::from_name(name).is_some() {
            return Err(ConstraintError::ReservedName { name: name.to_string() });
        }
        if self.funcs.contains_key(name)
            || self.rels.contains_key(name)
            || self.decls.iter().any(|d| d.name == name)
        {
            return Err(ConstraintError::DuplicateName { name: name.to_string() });
        }
        Ok(())
    }

    fn require_one(&self, arity: Arity, context: &str) -> Result<(), ConstraintError> {
        if arity.unify(Arity::One).is_none() {
            return Err(ConstraintError::ArityMismatch { context: context.to_string() });
        }
        Ok(())
    }

    fn require_two(&self, arity: Arity, context: &str) -> Result<(), ConstraintError> {
        if arity.unify(Arity::Two).is_none() {
            return Err(ConstraintError::ArityMismatch { context: context.to_string() });
        }
        Ok(())
    }

    fn formula(
        &self,
        f: &CFormula,
        scope: &mut Vec<String>,
        in_func: Option<&str>,
    ) -> Result<CFormula, ConstraintError> {
        Ok(match f {
            CFormula::Not(x) => CFormula::Not(Box::new(self.formula(x, scope, in_func)?)),
            CFormula::And(a, b) => CFormula::And(
                Box::new(self.formula(a, scope, in_func)?),
                Box::new(self.formula(b, scope, in_func)?),
            ),
            CFormula::Or(a, b) => CFormula::Or(
                Box::new(self.formula(a, scope, in_func)?),
                Box::new(self.formula(b, scope, in_func)?),
            ),
            CFormula::Implies(a, b) => CFormula::Implies(
                Box::new(self.formula(a, scope, in_func)?),
                Box::new(self.formula(b, scope, in_func)?),
            ),
            CFormula::Iff(a, b) => CFormula::Iff(
                Box::new(self.formula(a, scope, in_func)?),
                Box::new(self.formula(b, scope, in_func)?),
            ),
            CFormula::Subset(a, b) => {
                let (a, aa) = self.expr(a, scope, in_func)?;
                let (b, ab) = self.expr(b, scope, in_func)?;
                if aa.unify(ab).is_none() {
                    return Err(ConstraintError::ArityMismatch {
                        context: format!("`{a} in {b}`"),
                    });
                }
                CFormula::Subset(a, b)
            }
            CFormula::Eq(a, b) => {
                let (a, aa) = self.expr(a, scope, in_func)?;
                let (b, ab) = self.expr(b, scope, in_func)?;
                if aa.unify(ab).is_none() {
                    return Err(ConstraintError::ArityMismatch {
                        context: format!("`{a} = {b}`"),
                    });
                }
                CFormula::Eq(a, b)
            }
            CFormula::Ne(a, b) => {
                let (a, aa) = self.expr(a, scope, in_func)?;
                let (b, ab) = self.expr(b, scope, in_func)?;
                if aa.unify(ab).is_none() {
                    return Err(ConstraintError::ArityMismatch {
                        context: format!("`{a} != {b}`"),
                    });
                }
                CFormula::Ne(a, b)
            }
            CFormula::Card(e, op, k) => {
                let (e, _) = self.expr(e, scope, in_func)?;
                CFormula::Card(e, *op, *k)
            }
            CFormula::NoneOf(e) => CFormula::NoneOf(self.expr(e, scope, in_func)?.0),
            CFormula::SomeOf(e) => CFormula::SomeOf(self.expr(e, scope, in_func)?.0),
            CFormula::OneOf(e) => CFormula::OneOf(self.expr(e, scope, in_func)?.0),
            CFormula::All(binder, body) => {
                let (binder, body) = self.binder(binder, body, scope, in_func)?;
                CFormula::All(binder, Box::new(body))
            }
            CFormula::Some(binder, body) => {
                let (binder, body) = self.binder(binder, body, scope, in_func)?;
                CFormula::Some(binder, Box::new(body))
            }
        })
    }

    fn binder(
        &self,
        binder: &Binder,
        body: &CFormula,
        scope: &mut Vec<String>,
        in_func: Option<&str>,
    ) -> Result<(Binder, CFormula), ConstraintError> {
        let (domain, arity) = self.expr(&binder.domain, scope, in_func)?;
        let pushed = match &binder.vars {
            CompVars::One(x) => {
                self.require_one(arity, "quantifier domain")?;
                scope.push(x.clone());
                1
            }
            CompVars::Two(x, y) => {
                self.require_two(arity, "pair-quantifier domain")?;
                if x == y {
                    return Err(ConstraintError::DuplicateName { name: x.clone() });
                }
                scope.push(x.clone());
                scope.push(y.clone());
                2
            }
        };
        let body = self.formula(body, scope, in_func);
        scope.truncate(scope.len() - pushed);
        Ok((Binder { vars: binder.vars.clone(), domain }, body?))
    }

    fn expr(
        &self,
        e: &Expr,
        scope: &mut Vec<String>,
        in_func: Option<&str>,
    ) -> Result<(Expr, Arity), ConstraintError> {
        Ok(match e {
            Expr::Name(name) => {
                if scope.iter().rev().any(|s| s == name) {
                    (Expr::Var(name.clone()), Arity::One)
                } else if self.decls.iter().any(|d| d.name == *name) {
                    (Expr::Const(name.clone()), Arity::One)
                } else if let Some(body) = self.rels.get(name) {
                    let arity = arity_of(body);
                    (body.clone(), arity)
                } else if let Some(b) = Builtin::from_name(name) {
                    (Expr::Builtin(b), b.arity())
                } else {
                    return Err(ConstraintError::UnknownName { name: name.clone() });
                }
            }
            Expr::Builtin(b) => (Expr::Builtin(*b), b.arity()),
            Expr::Const(name) => (Expr::Const(name.clone()), Arity::One),
            Expr::Var(name) => (Expr::Var(name.clone()), Arity::One),
            Expr::Label(l) => (Expr::Label(l.clone()), Arity::One),
            Expr::Empty => (Expr::Empty, Arity::Any),
            Expr::Union(a, b) => self.binop(a, b, scope, in_func, "union", Expr::Union)?,
            Expr::Diff(a, b) => self.binop(a, b, scope, in_func, "difference", Expr::Diff)?,
            Expr::Inter(a, b) => self.binop(a, b, scope, in_func, "intersection", Expr::Inter)?,
            Expr::Product(a, b) => {
                let (a, aa) = self.expr(a, scope, in_func)?;
                let (b, ab) = self.expr(b, scope, in_func)?;
                self.require_one(aa, "product operand")?;
                self.require_one(ab, "product operand")?;
                (Expr::Product(Box::new(a), Box::new(b)), Arity::Two)
            }
            Expr::Join(a, b) => {
                let (a, aa) = self.expr(a, scope, in_func)?;
                let (b, ab) = self.expr(b, scope, in_func)?;
                let arity = match (defaulted(aa), defaulted(ab)) {
                    (Arity::One, Arity::Two) | (Arity::Two, Arity::One) => Arity::One,
                    (Arity::Two, Arity::Two) => Arity::Two,
                    _ => {
                        return Err(ConstraintError::ArityMismatch {
                            context: format!("`{a} . {b}` joins two node sets"),
                        })
                    }
                };
                (Expr::Join(Box::new(a), Box::new(b)), arity)
            }
            Expr::Closure(x) => {
                let (x, a) = self.expr(x, scope, in_func)?;
                self.require_two(a, "transitive closure operand")?;
                (Expr::Closure(Box::new(x)), Arity::Two)
            }
            Expr::ReflClosure(x) => {
                let (x, a) = self.expr(x, scope, in_func)?;
                self.require_two(a, "reflexive closure operand")?;
                (Expr::ReflClosure(Box::new(x)), Arity::Two)
            }
            Expr::Converse(x) => {
                let (x, a) = self.expr(x, scope, in_func)?;
                self.require_two(a, "converse operand")?;
                (Expr::Converse(Box::new(x)), Arity::Two)
            }
            Expr::FuncApp(name, args) => {
                let (params, body) = match self.funcs.get(name) {
                    Some(d) => d,
                    None if in_func == Some(name.as_str()) => {
                        return Err(ConstraintError::RecursiveFunc { name: name.clone() })
                    }
                    None => return Err(ConstraintError::UnknownName { name: name.clone() }),
                };
                if params.len() != args.len() {
                    return Err(ConstraintError::WrongArgCount {
                        name: name.clone(),
                        expected: params.len(),
                        got: args.len(),
                    });
                }
                let mut map = HashMap::new();
                for (p, a) in params.iter().zip(args) {
                    let (a, arity) = self.expr(a, scope, in_func)?;
                    self.require_one(arity, "function argument")?;
                    map.insert(p.clone(), a);
                }
                let expanded = subst_expr(body, &map);
                let arity = arity_of(&expanded);
                (expanded, arity)
            }
            Expr::SetDisplay(elems) => {
                let mut acc: Option<(Expr, Arity)> = None;
                for elem in elems {
                    let (piece, arity) = match elem {
                        SetElem::Single(x) => {
                            let (x, a) = self.expr(x, scope, in_func)?;
                            self.require_one(a, "set element")?;
                            (x, Arity::One)
                        }
                        SetElem::Pair(x, y) => {
                            let (x, ax) = self.expr(x, scope, in_func)?;
                            let (y, ay) = self.expr(y, scope, in_func)?;
                            self.require_one(ax, "pair element")?;
                            self.require_one(ay, "pair element")?;
                            (Expr::Product(Box::new(x), Box::new(y)), Arity::Two)
                        }
                    };
                    acc = Some(match acc {
                        None => (piece, arity),
                        Some((prev, pa)) => {
                            if pa.unify(arity).is_none() {
                                return Err(ConstraintError::ArityMismatch {
                                    context: "set display mixes elements and pairs".to_string(),
                                });
                            }
                            (Expr::Union(Box::new(prev), Box::new(piece)), arity)
                        }
                    });
                }
                acc.expect("parser never produces an empty set display")
            }
            Expr::Comprehension(vars, body) => {
                let pushed = match vars {
                    CompVars::One(x) => {
                        scope.push(x.clone());
                        1
                    }
                    CompVars::Two(x, y) => {
                        if x == y {
                            return Err(ConstraintError::DuplicateName { name: x.clone() });
                        }
                        scope.push(x.clone());
                        scope.push(y.clone());
                        2
                    }
                };
                let body = self.formula(body, scope, in_func);
                scope.truncate(scope.len() - pushed);
                let arity = match vars {
                    CompVars::One(_) => Arity::One,
                    CompVars::Two(..) => Arity::Two,
                };
                (Expr::Comprehension(vars.clone(), Box::new(body?)), arity)
            }
        })
    }

    #[allow(clippy::type_complexity)]
    fn binop(
        &self,
        a: &Expr,
        b: &Expr,
        scope: &mut Vec<String>,
        in_func: Option<&str>,
        what: &str,
        make: fn(Box<Expr>, Box<Expr>) -> Expr,
    ) -> Result<(Expr, Arity), ConstraintError> {
        let (a, aa) = self.expr(a, scope, in_func)?;
        let (b, ab) = self.expr(b, scope, in_func)?;
        let arity = aa.unify(ab).ok_or_else(|| ConstraintError::ArityMismatch {
            context: format!("{what} of `{a}` and `{b}`"),
        })?;
        Ok((make(Box::new(a), Box::new(b)), arity))
    }
}

/// Substitutes lowered argument expressions for `Var(param)` occurrences,
/// respecting shadowing by inner binders.
fn subst_expr(e: &Expr, map: &HashMap<String, Expr>) -> Expr {
    match e {
        Expr::Var(x) => map.get(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Builtin(_) | Expr::Const(_) | Expr::Label(_) | Expr::Empty => e.clone(),
        Expr::Union(a, b) => {
            Expr::Union(Box::new(subst_expr(a, map)), Box::new(subst_expr(b, map)))
        }
        Expr::Diff(a, b) => Expr::Diff(Box::new(subst_expr(a, map)), Box::new(subst_expr(b, map))),
        Expr::Inter(a, b) => {
            Expr::Inter(Box::new(subst_expr(a, map)), Box::new(subst_expr(b, map)))
        }
        Expr::Product(a, b) => {
            Expr::Product(Box::new(subst_expr(a, map)), Box::new(subst_expr(b, map)))
        }
        Expr::Join(a, b) => Expr::Join(Box::new(subst_expr(a, map)), Box::new(subst_expr(b, map))),
        Expr::Closure(x) => Expr::Closure(Box::new(subst_expr(x, map))),
        Expr::ReflClosure(x) => Expr::ReflClosure(Box::new(subst_expr(x, map))),
        Expr::Converse(x) => Expr::Converse(Box::new(subst_expr(x, map))),
        Expr::Comprehension(vars, body) => {
            let mut inner = map.clone();
            match vars {
                CompVars::One(x) => {
                    inner.remove(x);
                }
                CompVars::Two(x, y) => {
                    inner.remove(x);
                    inner.remove(y);
                }
            }
            Expr::Comprehension(vars.clone(), Box::new(subst_formula(body, &inner)))
        }
        Expr::Name(_) | Expr::FuncApp(..) | Expr::SetDisplay(_) => {
            panic!("substitution target was not lowered")
        }
    }
}

fn subst_formula(f: &CFormula, map: &HashMap<String, Expr>) -> CFormula {
    match f {
        CFormula::Not(x) => CFormula::Not(Box::new(subst_formula(x, map))),
        CFormula::And(a, b) => {
            CFormula::And(Box::new(subst_formula(a, map)), Box::new(subst_formula(b, map)))
        }
        CFormula::Or(a, b) => {
            CFormula::Or(Box::new(subst_formula(a, map)), Box::new(subst_formula(b, map)))
        }
        CFormula::Implies(a, b) => {
            CFormula::Implies(Box::new(subst_formula(a, map)), Box::new(subst_formula(b, map)))
        }
        CFormula::Iff(a, b) => {
            CFormula::Iff(Box::new(subst_formula(a, map)), Box::new(subst_formula(b, map)))
        }
        CFormula::Subset(a, b) => CFormula::Subset(subst_expr(a, map), subst_expr(b, map)),
        CFormula::Eq(a, b) => CFormula::Eq(subst_expr(a, map), subst_expr(b, map)),
        CFormula::Ne(a, b) => CFormula::Ne(subst_expr(a, map), subst_expr(b, map)),
        CFormula::Card(e, op, k) => CFormula::Card(subst_expr(e, map), *op, *k),
        CFormula::NoneOf(e) => CFormula::NoneOf(subst_expr(e, map)),
        CFormula::SomeOf(e) => CFormula::SomeOf(subst_expr(e, map)),
        CFormula::OneOf(e) => CFormula::OneOf(subst_expr(e, map)),
        CFormula::All(binder, body) | CFormula::Some(binder, body) => {
            let domain = subst_expr(&binder.domain, map);
            let mut inner = map.clone();
            match &binder.vars {
                CompVars::One(x) => {
                    inner.remove(x);
                }
                CompVars::Two(x, y) => {
                    inner.remove(x);
                    inner.remove(y);
                }
            }
            let new_binder = Binder { vars: binder.vars.clone(), domain };
            let new_body = Box::new(subst_formula(body, &inner));
            match f {
                CFormula::All(..) => CFormula::All(new_binder, new_body),
                _ => CFormula::Some(new_binder, new_body),
            }
        }
    }
}
