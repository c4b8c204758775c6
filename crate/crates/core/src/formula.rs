//! LTL formula trees over named atomic propositions, with a parser and printer.

use std::fmt;
use thiserror::Error;

/// Atomic proposition: a display name plus its column index in trace states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prop {
    pub name: String,
    pub index: usize,
}

impl Prop {
    pub fn new(name: impl Into<String>, index: usize) -> Self {
        Prop { name: name.into(), index }
    }
}

/// Builds a proposition list `p0..p{n-1}` or from explicit names.
pub fn props(names: &[&str]) -> Vec<Prop> {
    names.iter().enumerate().map(|(i, n)| Prop::new(*n, i)).collect()
}

/// Operator kinds. Atoms are not an `OpKind`; DAG nodes label them separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Not,
    Next,
    Finally,
    Globally,
    And,
    Or,
    Imply,
    Until,
}

impl OpKind {
    pub const ALL: [OpKind; 8] = [
        OpKind::Not,
        OpKind::Next,
        OpKind::Finally,
        OpKind::Globally,
        OpKind::And,
        OpKind::Or,
        OpKind::Imply,
        OpKind::Until,
    ];

    pub fn arity(self) -> usize {
        match self {
            OpKind::Not | OpKind::Next | OpKind::Finally | OpKind::Globally => 1,
            OpKind::And | OpKind::Or | OpKind::Imply | OpKind::Until => 2,
        }
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, OpKind::Next | OpKind::Finally | OpKind::Globally | OpKind::Until)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Not => "!",
            OpKind::Next => "X",
            OpKind::Finally => "F",
            OpKind::Globally => "G",
            OpKind::And => "&",
            OpKind::Or => "|",
            OpKind::Imply => "->",
            OpKind::Until => "U",
        }
    }

    pub fn from_symbol(s: &str) -> Option<OpKind> {
        OpKind::ALL.iter().copied().find(|k| k.symbol() == s)
    }
}

/// An LTL formula as an owned syntax tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Prop),
    Not(Box<Formula>),
    Next(Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn unary(op: OpKind, child: Formula) -> Formula {
        match op {
            OpKind::Not => Formula::Not(Box::new(child)),
            OpKind::Next => Formula::Next(Box::new(child)),
            OpKind::Finally => Formula::Finally(Box::new(child)),
            OpKind::Globally => Formula::Globally(Box::new(child)),
            _ => panic!("unary() called with binary op {op:?}"),
        }
    }

    pub fn binary(op: OpKind, left: Formula, right: Formula) -> Formula {
        match op {
            OpKind::And => Formula::And(Box::new(left), Box::new(right)),
            OpKind::Or => Formula::Or(Box::new(left), Box::new(right)),
            OpKind::Imply => Formula::Imply(Box::new(left), Box::new(right)),
            OpKind::Until => Formula::Until(Box::new(left), Box::new(right)),
            _ => panic!("binary() called with unary op {op:?}"),
        }
    }

    /// The operator at the root, or `None` for atoms.
    pub fn op(&self) -> Option<OpKind> {
        match self {
            Formula::Atom(_) => None,
            Formula::Not(_) => Some(OpKind::Not),
            Formula::Next(_) => Some(OpKind::Next),
            Formula::Finally(_) => Some(OpKind::Finally),
            Formula::Globally(_) => Some(OpKind::Globally),
            Formula::And(..) => Some(OpKind::And),
            Formula::Or(..) => Some(OpKind::Or),
            Formula::Imply(..) => Some(OpKind::Imply),
            Formula::Until(..) => Some(OpKind::Until),
        }
    }

    pub fn children(&self) -> (Option<&Formula>, Option<&Formula>) {
        match self {
            Formula::Atom(_) => (None, None),
            Formula::Not(c) | Formula::Next(c) | Formula::Finally(c) | Formula::Globally(c) => {
                (Some(c), None)
            }
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Imply(l, r)
            | Formula::Until(l, r) => (Some(l), Some(r)),
        }
    }

    /// Number of nodes counting repeated subformulas once per occurrence.
    pub fn tree_size(&self) -> usize {
        let (l, r) = self.children();
        1 + l.map_or(0, |c| c.tree_size()) + r.map_or(0, |c| c.tree_size())
    }

    /// Canonical form with operands of `&` and `|` in sorted order; used for
    /// the literal half of the equivalence check and for enumeration dedup.
    pub fn commutative_normal(&self) -> Formula {
        match self {
            Formula::Atom(p) => Formula::Atom(p.clone()),
            Formula::Not(c) => Formula::Not(Box::new(c.commutative_normal())),
            Formula::Next(c) => Formula::Next(Box::new(c.commutative_normal())),
            Formula::Finally(c) => Formula::Finally(Box::new(c.commutative_normal())),
            Formula::Globally(c) => Formula::Globally(Box::new(c.commutative_normal())),
            Formula::And(l, r) | Formula::Or(l, r) => {
                let mut a = l.commutative_normal();
                let mut b = r.commutative_normal();
                if b < a {
                    std::mem::swap(&mut a, &mut b);
                }
                if matches!(self, Formula::And(..)) {
                    Formula::And(Box::new(a), Box::new(b))
                } else {
                    Formula::Or(Box::new(a), Box::new(b))
                }
            }
            Formula::Imply(l, r) => Formula::Imply(
                Box::new(l.commutative_normal()),
                Box::new(r.commutative_normal()),
            ),
            Formula::Until(l, r) => Formula::Until(
                Box::new(l.commutative_normal()),
                Box::new(r.commutative_normal()),
            ),
        }
    }
}

// Binding strengths for printing and parsing. Tighter binds higher.
const PREC_IMPLY: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNTIL: u8 = 4;
const PREC_UNARY: u8 = 5;

fn fmt_prec(f: &Formula, min: u8, out: &mut String) {
    let prec = match f.op() {
        None => 6,
        Some(OpKind::Imply) => PREC_IMPLY,
        Some(OpKind::Or) => PREC_OR,
        Some(OpKind::And) => PREC_AND,
        Some(OpKind::Until) => PREC_UNTIL,
        Some(_) => PREC_UNARY,
    };
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Atom(p) => out.push_str(&p.name),
        Formula::Not(c) => {
            out.push('!');
            fmt_prec(c, PREC_UNARY, out);
        }
        Formula::Next(c) | Formula::Finally(c) | Formula::Globally(c) => {
            out.push_str(f.op().unwrap().symbol());
            out.push(' ');
            fmt_prec(c, PREC_UNARY, out);
        }
        Formula::And(l, r) => {
            fmt_prec(l, PREC_AND, out);
            out.push_str(" & ");
            fmt_prec(r, PREC_AND + 1, out);
        }
        Formula::Or(l, r) => {
            fmt_prec(l, PREC_OR, out);
            out.push_str(" | ");
            fmt_prec(r, PREC_OR + 1, out);
        }
        Formula::Imply(l, r) => {
            fmt_prec(l, PREC_IMPLY + 1, out);
            out.push_str(" -> ");
            fmt_prec(r, PREC_IMPLY, out);
        }
        Formula::Until(l, r) => {
            fmt_prec(l, PREC_UNARY, out);
            out.push_str(" U ");
            fmt_prec(r, PREC_UNTIL, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        fmt_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown proposition `{name}` at byte {pos}")]
    UnknownProp { name: String, pos: usize },
    #[error("unexpected `{found}` at byte {pos}, expected {expected}")]
    Unexpected { found: String, pos: usize, expected: &'static str },
    #[error("unexpected end of input, expected {expected}")]
    Eof { expected: &'static str },
    #[error("invalid character `{ch}` at byte {pos}")]
    BadChar { ch: char, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Amp,
    Pipe,
    Arrow,
    Bang,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Bang, i));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(ParseError::BadChar { ch: '-', pos: i });
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => return Err(ParseError::BadChar { ch: c, pos: i }),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ap: &'a [Prop],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.bump() {
            Some((Tok::RParen, _)) => Ok(()),
            Some((t, p)) => {
                Err(ParseError::Unexpected { found: format!("{t:?}"), pos: p, expected: "`)`" })
            }
            None => Err(ParseError::Eof { expected: "`)`" }),
        }
    }

    // imply := or ("->" imply)?      right-associative
    fn imply(&mut self) -> Result<Formula, ParseError> {
        let l = self.or()?;
        if matches!(self.peek(), Some(Tok::Arrow)) {
            self.bump();
            let r = self.imply()?;
            return Ok(Formula::Imply(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.and()?;
        while matches!(self.peek(), Some(Tok::Pipe)) {
            self.bump();
            let r = self.and()?;
            l = Formula::Or(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut l = self.until()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.bump();
            let r = self.until()?;
            l = Formula::And(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    // until := unary ("U" until)?    right-associative
    fn until(&mut self) -> Result<Formula, ParseError> {
        let l = self.unary()?;
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "U") {
            self.bump();
            let r = self.until()?;
            return Ok(Formula::Until(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some((Tok::Bang, _)) => Ok(Formula::Not(Box::new(self.unary()?))),
            Some((Tok::Ident(s), pos)) => match s.as_str() {
                "G" => Ok(Formula::Globally(Box::new(self.unary()?))),
                "F" => Ok(Formula::Finally(Box::new(self.unary()?))),
                "X" => Ok(Formula::Next(Box::new(self.unary()?))),
                "U" => Err(ParseError::Unexpected {
                    found: "U".into(),
                    pos,
                    expected: "a formula",
                }),
                _ => match self.ap.iter().find(|p| p.name == s) {
                    Some(p) => Ok(Formula::Atom(p.clone())),
                    None => Err(ParseError::UnknownProp { name: s, pos }),
                },
            },
            Some((Tok::LParen, _)) => {
                let f = self.imply()?;
                self.expect_rparen()?;
                Ok(f)
            }
            Some((t, p)) => {
                Err(ParseError::Unexpected { found: format!("{t:?}"), pos: p, expected: "a formula" })
            }
            None => Err(ParseError::Eof { expected: "a formula" }),
        }
    }
}

/// Parses the ASCII formula grammar. `G F X U` are reserved operator names;
/// every other identifier must name a proposition in `ap`.
///
/// Precedence, tightest first: unary (`G F X !`), `U` (right-assoc),
/// `&` (left), `|` (left), `->` (right-assoc).
pub fn parse_formula(text: &str, ap: &[Prop]) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, ap };
    let f = p.imply()?;
    if let Some((t, pos)) = p.toks.get(p.pos) {
        return Err(ParseError::Unexpected {
            found: format!("{t:?}"),
            pos: *pos,
            expected: "end of input",
        });
    }
    Ok(f)
}
