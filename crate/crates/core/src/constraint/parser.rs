//! Recursive-descent parser for the constraint language.
//!
//! Two places need backtracking: a `(` at the start of an atomic formula may
//! open either a parenthesized formula or a parenthesized expression followed
//! by a comparison, and `some` is either a quantifier (when followed by
//! binder variables and `in`) or the nonemptiness predicate.

use super::ast::*;
use super::lexer::{lex, Tok, TokKind};
use super::ConstraintError;
use crate::formula::OpKind;

pub const KEYWORDS: &[&str] = &[
    "func",
    "constraint",
    "minimize",
    "maximize",
    "softempty",
    "soft",
    "node",
    "rel",
    "all",
    "some",
    "in",
    "no",
    "one",
    "not",
    "and",
    "or",
];

pub fn is_keyword(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

pub fn parse_program(src: &str) -> Result<Vec<Item>, ConstraintError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut items = Vec::new();
    while p.peek().is_some() {
        items.push(p.item()?);
    }
    Ok(items)
}

/// Parses a single expression, requiring all input to be consumed.
pub fn parse_expr(src: &str) -> Result<Expr, ConstraintError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses a single constraint formula, requiring all input to be consumed.
pub fn parse_formula(src: &str) -> Result<CFormula, ConstraintError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    p.expect_end()?;
    Ok(f)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn kind_at(&self, offset: usize) -> Option<&TokKind> {
        self.toks.get(self.pos + offset).map(|t| &t.kind)
    }

    fn err_here(&self, expected: &str) -> ConstraintError {
        match self.peek() {
            Some(t) => ConstraintError::Parse {
                expected: expected.to_string(),
                found: t.kind.describe(),
                line: t.line,
                col: t.col,
            },
            None => ConstraintError::ParseEof { expected: expected.to_string() },
        }
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind) -> Result<(), ConstraintError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.err_here(&kind.describe()))
        }
    }

    fn expect_end(&self) -> Result<(), ConstraintError> {
        if self.peek().is_none() {
            Ok(())
        } else {
            Err(self.err_here("end of input"))
        }
    }

    /// Identifier that is not a keyword.
    fn name(&mut self) -> Result<String, ConstraintError> {
        match self.peek_kind() {
            Some(TokKind::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err_here("identifier")),
        }
    }

    /// Is the identifier at `offset` a non-keyword name?
    fn name_at(&self, offset: usize) -> bool {
        matches!(self.kind_at(offset), Some(TokKind::Ident(s)) if !is_keyword(s))
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek_kind(), Some(TokKind::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<u64, ConstraintError> {
        match self.peek_kind() {
            Some(&TokKind::Int(n)) => {
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err_here("integer")),
        }
    }

    // -- items --------------------------------------------------------------

    fn item(&mut self) -> Result<Item, ConstraintError> {
        if self.keyword("func") {
            let name = self.name()?;
            self.expect(TokKind::LParen)?;
            let mut params = Vec::new();
            if !self.eat(&TokKind::RParen) {
                loop {
                    params.push(self.name()?);
                    if !self.eat(&TokKind::Comma) {
                        break;
                    }
                }
                self.expect(TokKind::RParen)?;
            }
            self.expect(TokKind::Eq)?;
            let body = self.expr()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Func(FuncDef { name, params, body }))
        } else if self.keyword("node") {
            let name = self.name()?;
            if !self.keyword("in") {
                return Err(self.err_here("`in`"));
            }
            let domain = self.expr()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Node(NodeDecl { name, domain }))
        } else if self.keyword("rel") {
            let name = self.name()?;
            self.expect(TokKind::Eq)?;
            let body = self.expr()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Rel { name, body })
        } else if self.keyword("constraint") {
            let f = self.formula()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Constraint(f))
        } else if self.keyword("minimize") {
            let priority = self.priority()?;
            let e = self.expr()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Objective(Objective { kind: ObjectiveKind::Minimize(e), priority }))
        } else if self.keyword("maximize") {
            let priority = self.priority()?;
            let e = self.expr()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Objective(Objective { kind: ObjectiveKind::Maximize(e), priority }))
        } else if self.keyword("softempty") {
            let priority = self.priority()?;
            let e = self.expr()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Objective(Objective { kind: ObjectiveKind::SoftEmpty(e), priority }))
        } else if self.keyword("soft") {
            let priority = self.priority()?;
            let f = self.formula()?;
            self.expect(TokKind::Semi)?;
            Ok(Item::Objective(Objective { kind: ObjectiveKind::SoftFact(f), priority }))
        } else {
            Err(self.err_here(
                "`func`, `node`, `rel`, `constraint`, `minimize`, `maximize`, `softempty`, or `soft`",
            ))
        }
    }

    fn priority(&mut self) -> Result<u32, ConstraintError> {
        if self.eat(&TokKind::LBrack) {
            let n = self.int()?;
            self.expect(TokKind::RBrack)?;
            u32::try_from(n).map_err(|_| ConstraintError::PriorityRange { got: n })
        } else {
            Ok(1)
        }
    }

    // -- formulas -----------------------------------------------------------

    fn formula(&mut self) -> Result<CFormula, ConstraintError> {
        self.iff_formula()
    }

    fn iff_formula(&mut self) -> Result<CFormula, ConstraintError> {
        let lhs = self.implies_formula()?;
        if self.eat(&TokKind::Iff) {
            let rhs = self.iff_formula()?;
            Ok(CFormula::Iff(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn implies_formula(&mut self) -> Result<CFormula, ConstraintError> {
        let lhs = self.or_formula()?;
        if self.eat(&TokKind::Implies) {
            let rhs = self.implies_formula()?;
            Ok(CFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or_formula(&mut self) -> Result<CFormula, ConstraintError> {
        let mut lhs = self.and_formula()?;
        while self.keyword("or") {
            let rhs = self.and_formula()?;
            lhs = CFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_formula(&mut self) -> Result<CFormula, ConstraintError> {
        let mut lhs = self.not_formula()?;
        while self.keyword("and") {
            let rhs = self.not_formula()?;
            lhs = CFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_formula(&mut self) -> Result<CFormula, ConstraintError> {
        if self.keyword("not") {
            let inner = self.not_formula()?;
            Ok(CFormula::Not(Box::new(inner)))
        } else {
            self.atom_formula()
        }
    }

    fn atom_formula(&mut self) -> Result<CFormula, ConstraintError> {
        if self.keyword("all") {
            let binder = self.binder()?;
            self.expect(TokKind::Colon)?;
            let body = self.formula()?;
            return Ok(CFormula::All(binder, Box::new(body)));
        }
        if matches!(self.peek_kind(), Some(TokKind::Ident(s)) if s == "some") {
            if self.binder_follows(1) {
                self.pos += 1; // `some`
                let binder = self.binder()?;
                self.expect(TokKind::Colon)?;
                let body = self.formula()?;
                return Ok(CFormula::Some(binder, Box::new(body)));
            }
            self.pos += 1;
            let e = self.expr()?;
            return Ok(CFormula::SomeOf(e));
        }
        if self.keyword("no") {
            let e = self.expr()?;
            return Ok(CFormula::NoneOf(e));
        }
        if self.keyword("one") {
            let e = self.expr()?;
            return Ok(CFormula::OneOf(e));
        }
        if self.eat(&TokKind::Hash) {
            let e = self.prefix_expr_then_ops()?;
            let op = self.cmp_op()?;
            let k = self.int()?;
            return Ok(CFormula::Card(e, op, k));
        }
        if self.peek_kind() == Some(&TokKind::LParen) {
            // could be a parenthesized formula or a comparison whose left
            // side starts with a parenthesized expression; try the
            // comparison first, since the expression grammar consumes
            // nested parentheses without further backtracking
            let save = self.pos;
            if let Ok(f) = self.comparison() {
                return Ok(f);
            }
            self.pos = save + 1;
            let f = self.formula()?;
            self.expect(TokKind::RParen)?;
            return Ok(f);
        }
        self.comparison()
    }

    /// Cardinality operand: a full expression, so `#L + R <= 1` counts the
    /// union (use parentheses when in doubt; the examples always do).
    fn prefix_expr_then_ops(&mut self) -> Result<Expr, ConstraintError> {
        self.expr()
    }

    fn comparison(&mut self) -> Result<CFormula, ConstraintError> {
        let lhs = self.expr()?;
        if self.eat(&TokKind::Eq) {
            let rhs = self.expr()?;
            Ok(CFormula::Eq(lhs, rhs))
        } else if self.eat(&TokKind::Ne) {
            let rhs = self.expr()?;
            Ok(CFormula::Ne(lhs, rhs))
        } else if self.keyword("in") {
            let rhs = self.expr()?;
            Ok(CFormula::Subset(lhs, rhs))
        } else {
            Err(self.err_here("`=`, `!=`, or `in`"))
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp, ConstraintError> {
        let op = match self.peek_kind() {
            Some(TokKind::Eq) => CmpOp::Eq,
            Some(TokKind::Ne) => CmpOp::Ne,
            Some(TokKind::Lt) => CmpOp::Lt,
            Some(TokKind::Le) => CmpOp::Le,
            Some(TokKind::Gt) => CmpOp::Gt,
            Some(TokKind::Ge) => CmpOp::Ge,
            _ => return Err(self.err_here("comparison operator")),
        };
        self.pos += 1;
        Ok(op)
    }

    /// Does a quantifier binder (`x in` or `(x, y) in`) start at `offset`?
    fn binder_follows(&self, offset: usize) -> bool {
        if self.name_at(offset) {
            return matches!(self.kind_at(offset + 1), Some(TokKind::Ident(s)) if s == "in");
        }
        if self.kind_at(offset) == Some(&TokKind::LParen)
            && self.name_at(offset + 1)
            && self.kind_at(offset + 2) == Some(&TokKind::Comma)
            && self.name_at(offset + 3)
            && self.kind_at(offset + 4) == Some(&TokKind::RParen)
        {
            return matches!(self.kind_at(offset + 5), Some(TokKind::Ident(s)) if s == "in");
        }
        false
    }

    fn binder(&mut self) -> Result<Binder, ConstraintError> {
        let vars = if self.eat(&TokKind::LParen) {
            let x = self.name()?;
            self.expect(TokKind::Comma)?;
            let y = self.name()?;
            self.expect(TokKind::RParen)?;
            CompVars::Two(x, y)
        } else {
            CompVars::One(self.name()?)
        };
        if !self.keyword("in") {
            return Err(self.err_here("`in`"));
        }
        let domain = self.expr()?;
        Ok(Binder { vars, domain })
    }

    // -- expressions ----------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ConstraintError> {
        let mut lhs = self.inter_expr()?;
        loop {
            if self.eat(&TokKind::Plus) {
                let rhs = self.inter_expr()?;
                lhs = Expr::Union(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&TokKind::Backslash) {
                let rhs = self.inter_expr()?;
                lhs = Expr::Diff(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn inter_expr(&mut self) -> Result<Expr, ConstraintError> {
        let mut lhs = self.product_expr()?;
        while self.eat(&TokKind::Amp) {
            let rhs = self.product_expr()?;
            lhs = Expr::Inter(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product_expr(&mut self) -> Result<Expr, ConstraintError> {
        let mut lhs = self.join_expr()?;
        while self.eat(&TokKind::Product) {
            let rhs = self.join_expr()?;
            lhs = Expr::Product(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn join_expr(&mut self) -> Result<Expr, ConstraintError> {
        let mut lhs = self.prefix_expr()?;
        while self.eat(&TokKind::Dot) {
            let rhs = self.prefix_expr()?;
            lhs = Expr::Join(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix_expr(&mut self) -> Result<Expr, ConstraintError> {
        if self.eat(&TokKind::Caret) {
            Ok(Expr::Closure(Box::new(self.prefix_expr()?)))
        } else if self.eat(&TokKind::Star) {
            Ok(Expr::ReflClosure(Box::new(self.prefix_expr()?)))
        } else if self.eat(&TokKind::Tilde) {
            Ok(Expr::Converse(Box::new(self.prefix_expr()?)))
        } else {
            self.primary_expr()
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, ConstraintError> {
        match self.peek_kind().cloned() {
            Some(TokKind::Ident(name)) if !is_keyword(&name) => {
                if name == "N" && self.kind_at(1) == Some(&TokKind::LBrack) {
                    self.pos += 2;
                    let label = self.label_ref()?;
                    self.expect(TokKind::RBrack)?;
                    return Ok(Expr::Label(label));
                }
                self.pos += 1;
                if self.peek_kind() == Some(&TokKind::LParen) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.eat(&TokKind::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&TokKind::Comma) {
                                break;
                            }
                        }
                        self.expect(TokKind::RParen)?;
                    }
                    Ok(Expr::FuncApp(name, args))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Some(TokKind::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(TokKind::RParen)?;
                Ok(e)
            }
            Some(TokKind::LBrace) => {
                self.pos += 1;
                self.brace_expr()
            }
            _ => Err(self.err_here("expression")),
        }
    }

    /// After consuming `{`: empty set, comprehension, or set display.
    fn brace_expr(&mut self) -> Result<Expr, ConstraintError> {
        if self.eat(&TokKind::RBrace) {
            return Ok(Expr::Empty);
        }
        // `{x | f}`
        if self.name_at(0) && self.kind_at(1) == Some(&TokKind::Pipe) {
            let x = self.name()?;
            self.pos += 1; // `|`
            let body = self.formula()?;
            self.expect(TokKind::RBrace)?;
            return Ok(Expr::Comprehension(CompVars::One(x), Box::new(body)));
        }
        // `{(x, y) | f}`
        if self.kind_at(0) == Some(&TokKind::LParen)
            && self.name_at(1)
            && self.kind_at(2) == Some(&TokKind::Comma)
            && self.name_at(3)
            && self.kind_at(4) == Some(&TokKind::RParen)
            && self.kind_at(5) == Some(&TokKind::Pipe)
        {
            self.pos += 1;
            let x = self.name()?;
            self.pos += 1;
            let y = self.name()?;
            self.pos += 2; // `)` `|`
            let body = self.formula()?;
            self.expect(TokKind::RBrace)?;
            return Ok(Expr::Comprehension(CompVars::Two(x, y), Box::new(body)));
        }
        // set display
        let mut elems = Vec::new();
        loop {
            elems.push(self.set_elem()?);
            if !self.eat(&TokKind::Comma) {
                break;
            }
        }
        self.expect(TokKind::RBrace)?;
        Ok(Expr::SetDisplay(elems))
    }

    fn set_elem(&mut self) -> Result<SetElem, ConstraintError> {
        // `(a, b)` is a pair; any other parenthesized form is an expression
        if self.peek_kind() == Some(&TokKind::LParen) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(a) = self.expr() {
                if self.eat(&TokKind::Comma) {
                    let b = self.expr()?;
                    self.expect(TokKind::RParen)?;
                    return Ok(SetElem::Pair(a, b));
                }
            }
            self.pos = save;
        }
        Ok(SetElem::Single(self.expr()?))
    }

    fn label_ref(&mut self) -> Result<LabelRef, ConstraintError> {
        let label = match self.peek_kind() {
            Some(TokKind::Bang) => LabelRef::Op(OpKind::Not),
            Some(TokKind::Amp) => LabelRef::Op(OpKind::And),
            Some(TokKind::Pipe) => LabelRef::Op(OpKind::Or),
            Some(TokKind::Arrow) => LabelRef::Op(OpKind::Imply),
            Some(TokKind::Ident(s)) => match OpKind::from_symbol(s) {
                Some(op) => LabelRef::Op(op),
                None => LabelRef::Prop(s.clone()),
            },
            _ => return Err(self.err_here("node label")),
        };
        self.pos += 1;
        Ok(label)
    }
}
