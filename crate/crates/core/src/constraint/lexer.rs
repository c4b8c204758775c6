//! Tokenizer for the constraint language.
//!
//! One lexical quirk worth knowing: `#` immediately followed by whitespace or
//! end of line starts a comment, while `#` glued to an expression is the
//! cardinality operator (`#(n . ~L) <= 1`).

use super::ConstraintError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Semi,
    Dot,
    Plus,
    Amp,
    Pipe,
    Backslash,
    Caret,
    Star,
    Tilde,
    Hash,
    Bang,
    Arrow,   // ->
    Eq,      // =
    Ne,      // !=
    Lt,      // <
    Le,      // <=
    Gt,      // >
    Ge,      // >=
    Product, // ><
    Implies, // =>
    Iff,     // <=>
}

impl TokKind {
    pub fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("`{s}`"),
            TokKind::Int(n) => format!("`{n}`"),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::LBrace => "`{`".into(),
            TokKind::RBrace => "`}`".into(),
            TokKind::LBrack => "`[`".into(),
            TokKind::RBrack => "`]`".into(),
            TokKind::Comma => "`,`".into(),
            TokKind::Colon => "`:`".into(),
            TokKind::Semi => "`;`".into(),
            TokKind::Dot => "`.`".into(),
            TokKind::Plus => "`+`".into(),
            TokKind::Amp => "`&`".into(),
            TokKind::Pipe => "`|`".into(),
            TokKind::Backslash => "`\\`".into(),
            TokKind::Caret => "`^`".into(),
            TokKind::Star => "`*`".into(),
            TokKind::Tilde => "`~`".into(),
            TokKind::Hash => "`#`".into(),
            TokKind::Bang => "`!`".into(),
            TokKind::Arrow => "`->`".into(),
            TokKind::Eq => "`=`".into(),
            TokKind::Ne => "`!=`".into(),
            TokKind::Lt => "`<`".into(),
            TokKind::Le => "`<=`".into(),
            TokKind::Gt => "`>`".into(),
            TokKind::Ge => "`>=`".into(),
            TokKind::Product => "`><`".into(),
            TokKind::Implies => "`=>`".into(),
            TokKind::Iff => "`<=>`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Tok {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
}

pub fn lex(src: &str) -> Result<Vec<Tok>, ConstraintError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($kind:expr, $len:expr, $line:expr, $col:expr) => {{
            toks.push(Tok { kind: $kind, line: $line, col: $col });
            i += $len;
            col += $len as u32;
        }};
    }

    while i < bytes.len() {
        let c = bytes[i] as char;
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '#' => {
                let next = bytes.get(i + 1).map(|&b| b as char);
                match next {
                    None | Some(' ') | Some('\t') | Some('\r') | Some('\n') | Some('#') => {
                        while i < bytes.len() && bytes[i] != b'\n' {
                            i += 1;
                        }
                    }
                    _ => push!(TokKind::Hash, 1, tl, tc),
                }
            }
            '(' => push!(TokKind::LParen, 1, tl, tc),
            ')' => push!(TokKind::RParen, 1, tl, tc),
            '{' => push!(TokKind::LBrace, 1, tl, tc),
            '}' => push!(TokKind::RBrace, 1, tl, tc),
            '[' => push!(TokKind::LBrack, 1, tl, tc),
            ']' => push!(TokKind::RBrack, 1, tl, tc),
            ',' => push!(TokKind::Comma, 1, tl, tc),
            ':' => push!(TokKind::Colon, 1, tl, tc),
            ';' => push!(TokKind::Semi, 1, tl, tc),
            '.' => push!(TokKind::Dot, 1, tl, tc),
            '+' => push!(TokKind::Plus, 1, tl, tc),
            '&' => push!(TokKind::Amp, 1, tl, tc),
            '|' => push!(TokKind::Pipe, 1, tl, tc),
            '\\' => push!(TokKind::Backslash, 1, tl, tc),
            '^' => push!(TokKind::Caret, 1, tl, tc),
            '*' => push!(TokKind::Star, 1, tl, tc),
            '~' => push!(TokKind::Tilde, 1, tl, tc),
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    push!(TokKind::Arrow, 2, tl, tc);
                } else {
                    return Err(ConstraintError::BadChar { ch: '-', line: tl, col: tc });
                }
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    push!(TokKind::Implies, 2, tl, tc);
                } else {
                    push!(TokKind::Eq, 1, tl, tc);
                }
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(TokKind::Ne, 2, tl, tc);
                } else {
                    push!(TokKind::Bang, 1, tl, tc);
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    if bytes.get(i + 2) == Some(&b'>') {
                        push!(TokKind::Iff, 3, tl, tc);
                    } else {
                        push!(TokKind::Le, 2, tl, tc);
                    }
                } else {
                    push!(TokKind::Lt, 1, tl, tc);
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(TokKind::Ge, 2, tl, tc);
                } else if bytes.get(i + 1) == Some(&b'<') {
                    push!(TokKind::Product, 2, tl, tc);
                } else {
                    push!(TokKind::Gt, 1, tl, tc);
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = src[start..i].to_string();
                col += (i - start) as u32;
                toks.push(Tok { kind: TokKind::Ident(name), line: tl, col: tc });
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let n: u64 = text
                    .parse()
                    .map_err(|_| ConstraintError::IntOverflow { line: tl, col: tc })?;
                col += (i - start) as u32;
                toks.push(Tok { kind: TokKind::Int(n), line: tl, col: tc });
            }
            _ => return Err(ConstraintError::BadChar { ch: c, line: tl, col: tc }),
        }
    }
    Ok(toks)
}
