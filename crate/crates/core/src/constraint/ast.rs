//! Syntax trees for the constraint language.
//!
//! Programs talk about the syntax DAG of the formula being searched for:
//! expressions denote sets of DAG nodes or binary relations over them, and
//! constraint formulas are first-order sentences over those values. Parsing
//! produces `Item`s; lowering resolves names, expands function applications,
//! and checks arities, leaving a [`Program`] whose expressions use only the
//! core forms (no `FuncApp`, `Name`, or `SetDisplay` variants).

use std::fmt;

use crate::formula::OpKind;

/// What a node-label set `N[...]` selects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelRef {
    Op(OpKind),
    /// A proposition name, resolved against the sample's alphabet later.
    Prop(String),
}

/// Fixed vocabulary available in every program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// Singleton set holding the root node.
    Root,
    /// All nodes of the DAG.
    Nodes,
    /// Nodes labeled with an atomic proposition.
    Ap,
    /// Nodes labeled `G`, `F`, `X`, or `U`.
    Temporal,
    /// Left-child relation.
    L,
    /// Right-child relation.
    R,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Root => "root",
            Builtin::Nodes => "Nodes",
            Builtin::Ap => "AP",
            Builtin::Temporal => "Temporal",
            Builtin::L => "L",
            Builtin::R => "R",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "root" => Builtin::Root,
            "Nodes" => Builtin::Nodes,
            "AP" => Builtin::Ap,
            "Temporal" => Builtin::Temporal,
            "L" => Builtin::L,
            "R" => Builtin::R,
            _ => return None,
        })
    }

    pub fn arity(self) -> Arity {
        match self {
            Builtin::L | Builtin::R => Arity::Two,
            _ => Arity::One,
        }
    }
}

/// Number of columns of a set-valued expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    One,
    Two,
    /// The empty set `{}` fits either arity.
    Any,
}

impl Arity {
    pub fn unify(self, other: Arity) -> Option<Arity> {
        match (self, other) {
            (Arity::Any, a) | (a, Arity::Any) => Some(a),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetElem {
    Single(Expr),
    Pair(Expr, Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompVars {
    One(String),
    Two(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Unresolved identifier: a declared node, a `rel` alias, a bound
    /// variable, or a builtin. Eliminated by lowering.
    Name(String),
    /// Builtin vocabulary (after lowering).
    Builtin(Builtin),
    /// Declared node constant (after lowering).
    Const(String),
    /// Quantified or comprehension-bound variable (after lowering).
    Var(String),
    Label(LabelRef),
    Empty,
    Union(Box<Expr>, Box<Expr>),
    Diff(Box<Expr>, Box<Expr>),
    Inter(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Join(Box<Expr>, Box<Expr>),
    /// `^e`: transitive closure.
    Closure(Box<Expr>),
    /// `*e`: reflexive-transitive closure.
    ReflClosure(Box<Expr>),
    /// `~e`: converse.
    Converse(Box<Expr>),
    /// Eliminated by lowering (inlined).
    FuncApp(String, Vec<Expr>),
    /// `{a, (b,c), ...}`; eliminated by lowering into unions/products.
    SetDisplay(Vec<SetElem>),
    Comprehension(CompVars, Box<CFormula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn apply(self, lhs: u64, rhs: u64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub vars: CompVars,
    pub domain: Expr,
}

/// First-order constraint formulas over node-set expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CFormula {
    Not(Box<CFormula>),
    And(Box<CFormula>, Box<CFormula>),
    Or(Box<CFormula>, Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
    Iff(Box<CFormula>, Box<CFormula>),
    /// `e1 in e2`: subset.
    Subset(Expr, Expr),
    Eq(Expr, Expr),
    Ne(Expr, Expr),
    /// `#e op k`.
    Card(Expr, CmpOp, u64),
    /// `no e`: emptiness.
    NoneOf(Expr),
    /// `some e`: nonemptiness.
    SomeOf(Expr),
    /// `one e`: exactly one element.
    OneOf(Expr),
    All(Binder, Box<CFormula>),
    Some(Binder, Box<CFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Prefer few elements in the set.
    Minimize(Expr),
    /// Prefer many elements in the set.
    Maximize(Expr),
    /// Per-element soft emptiness; equivalent cost model to `Minimize`.
    SoftEmpty(Expr),
    /// Single soft fact: one unit of cost when the formula is false.
    SoftFact(CFormula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    /// Lexicographic priority; higher priorities are optimized first.
    pub priority: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeDecl {
    pub name: String,
    pub domain: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Func(FuncDef),
    Node(NodeDecl),
    Rel { name: String, body: Expr },
    Constraint(CFormula),
    Objective(Objective),
}

/// A lowered program: functions and aliases inlined, names resolved,
/// arities checked.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<NodeDecl>,
    pub constraints: Vec<CFormula>,
    pub objectives: Vec<Objective>,
}

// ---------------------------------------------------------------------------
// Pretty-printing. Expression precedence, tightest first: prefix closures,
// join, product, intersection, then union/difference.

const EPREC_UNION: u8 = 1;
const EPREC_INTER: u8 = 2;
const EPREC_PRODUCT: u8 = 3;
const EPREC_JOIN: u8 = 4;
const EPREC_PREFIX: u8 = 5;
const EPREC_ATOM: u8 = 6;

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Union(..) | Expr::Diff(..) => EPREC_UNION,
            Expr::Inter(..) => EPREC_INTER,
            Expr::Product(..) => EPREC_PRODUCT,
            Expr::Join(..) => EPREC_JOIN,
            Expr::Closure(..) | Expr::ReflClosure(..) | Expr::Converse(..) => EPREC_PREFIX,
            _ => EPREC_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.prec();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Name(n) | Expr::Const(n) | Expr::Var(n) => write!(f, "{n}")?,
            Expr::Builtin(b) => write!(f, "{}", b.name())?,
            Expr::Label(LabelRef::Op(op)) => write!(f, "N[{}]", op.symbol())?,
            Expr::Label(LabelRef::Prop(p)) => write!(f, "N[{p}]")?,
            Expr::Empty => write!(f, "{{}}")?,
            Expr::Union(a, b) => {
                a.fmt_prec(f, EPREC_UNION)?;
                write!(f, " + ")?;
                b.fmt_prec(f, EPREC_UNION + 1)?;
            }
            Expr::Diff(a, b) => {
                a.fmt_prec(f, EPREC_UNION)?;
                write!(f, " \\ ")?;
                b.fmt_prec(f, EPREC_UNION + 1)?;
            }
            Expr::Inter(a, b) => {
                a.fmt_prec(f, EPREC_INTER)?;
                write!(f, " & ")?;
                b.fmt_prec(f, EPREC_INTER + 1)?;
            }
            Expr::Product(a, b) => {
                a.fmt_prec(f, EPREC_PRODUCT)?;
                write!(f, " >< ")?;
                b.fmt_prec(f, EPREC_PRODUCT + 1)?;
            }
            Expr::Join(a, b) => {
                a.fmt_prec(f, EPREC_JOIN)?;
                write!(f, " . ")?;
                b.fmt_prec(f, EPREC_JOIN + 1)?;
            }
            Expr::Closure(e) => {
                write!(f, "^")?;
                e.fmt_prec(f, EPREC_PREFIX)?;
            }
            Expr::ReflClosure(e) => {
                write!(f, "*")?;
                e.fmt_prec(f, EPREC_PREFIX)?;
            }
            Expr::Converse(e) => {
                write!(f, "~")?;
                e.fmt_prec(f, EPREC_PREFIX)?;
            }
            Expr::FuncApp(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                write!(f, ")")?;
            }
            Expr::SetDisplay(elems) => {
                write!(f, "{{")?;
                for (i, e) in elems.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    match e {
                        SetElem::Single(x) => x.fmt_prec(f, 0)?,
                        SetElem::Pair(x, y) => {
                            write!(f, "(")?;
                            x.fmt_prec(f, 0)?;
                            write!(f, ", ")?;
                            y.fmt_prec(f, 0)?;
                            write!(f, ")")?;
                        }
                    }
                }
                write!(f, "}}")?;
            }
            Expr::Comprehension(vars, body) => {
                match vars {
                    CompVars::One(x) => write!(f, "{{{x} | ")?,
                    CompVars::Two(x, y) => write!(f, "{{({x}, {y}) | ")?,
                }
                write!(f, "{body}}}")?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// Formula precedence, tightest first: not, and, or, =>, <=>. Quantifiers and
// the unary set predicates extend greedily to the right, so they are
// parenthesized whenever they appear under a connective.

const FPREC_IFF: u8 = 1;
const FPREC_IMPLIES: u8 = 2;
const FPREC_OR: u8 = 3;
const FPREC_AND: u8 = 4;
const FPREC_NOT: u8 = 5;
const FPREC_ATOM: u8 = 6;

impl CFormula {
    fn prec(&self) -> u8 {
        match self {
            CFormula::Iff(..) => FPREC_IFF,
            CFormula::Implies(..) => FPREC_IMPLIES,
            CFormula::Or(..) => FPREC_OR,
            CFormula::And(..) => FPREC_AND,
            CFormula::Not(..) => FPREC_NOT,
            // greedy right-extent forms parenthesize under any connective
            CFormula::All(..) | CFormula::Some(..) => 0,
            _ => FPREC_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.prec();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            CFormula::Not(x) => {
                write!(f, "not ")?;
                x.fmt_prec(f, FPREC_NOT)?;
            }
            CFormula::And(a, b) => {
                a.fmt_prec(f, FPREC_AND)?;
                write!(f, " and ")?;
                b.fmt_prec(f, FPREC_AND + 1)?;
            }
            CFormula::Or(a, b) => {
                a.fmt_prec(f, FPREC_OR)?;
                write!(f, " or ")?;
                b.fmt_prec(f, FPREC_OR + 1)?;
            }
            CFormula::Implies(a, b) => {
                a.fmt_prec(f, FPREC_IMPLIES + 1)?;
                write!(f, " => ")?;
                b.fmt_prec(f, FPREC_IMPLIES)?;
            }
            CFormula::Iff(a, b) => {
                a.fmt_prec(f, FPREC_IFF + 1)?;
                write!(f, " <=> ")?;
                b.fmt_prec(f, FPREC_IFF)?;
            }
            CFormula::Subset(a, b) => write!(f, "{a} in {b}")?,
            CFormula::Eq(a, b) => write!(f, "{a} = {b}")?,
            CFormula::Ne(a, b) => write!(f, "{a} != {b}")?,
            CFormula::Card(e, op, k) => {
                write!(f, "#")?;
                e.fmt_prec(f, EPREC_ATOM)?;
                write!(f, " {} {k}", op.symbol())?;
            }
            CFormula::NoneOf(e) => {
                write!(f, "no ")?;
                e.fmt_prec(f, EPREC_ATOM)?;
            }
            CFormula::SomeOf(e) => {
                write!(f, "some ")?;
                e.fmt_prec(f, EPREC_ATOM)?;
            }
            CFormula::OneOf(e) => {
                write!(f, "one ")?;
                e.fmt_prec(f, EPREC_ATOM)?;
            }
            CFormula::All(b, body) => {
                write!(f, "all {} : ", BinderDisplay(b))?;
                body.fmt_prec(f, 0)?;
            }
            CFormula::Some(b, body) => {
                write!(f, "some {} : ", BinderDisplay(b))?;
                body.fmt_prec(f, 0)?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

struct BinderDisplay<'a>(&'a Binder);

impl fmt::Display for BinderDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.vars {
            CompVars::One(x) => write!(f, "{x} in {}", self.0.domain),
            CompVars::Two(x, y) => write!(f, "({x}, {y}) in {}", self.0.domain),
        }
    }
}

impl fmt::Display for CFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Func(d) => {
                write!(f, "func {}(", d.name)?;
                for (i, p) in d.params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ") = {};", d.body)
            }
            Item::Node(d) => write!(f, "node {} in {};", d.name, d.domain),
            Item::Rel { name, body } => write!(f, "rel {name} = {body};"),
            Item::Constraint(c) => write!(f, "constraint {c};"),
            Item::Objective(o) => {
                let (kw, rest) = match &o.kind {
                    ObjectiveKind::Minimize(e) => ("minimize", e.to_string()),
                    ObjectiveKind::Maximize(e) => ("maximize", e.to_string()),
                    ObjectiveKind::SoftEmpty(e) => ("softempty", e.to_string()),
                    ObjectiveKind::SoftFact(c) => ("soft", c.to_string()),
                };
                write!(f, "{kw}[{}] {rest};", o.priority)
            }
        }
    }
}
