//! A small first-order language for constraining the syntax DAG of the
//! formula being learned.
//!
//! Expressions denote node sets or binary relations over DAG nodes (child
//! relations `L`/`R`, label sets `N[...]`, relational algebra with joins,
//! closures, products, and comprehensions). Constraint formulas quantify
//! over those values; objectives attach lexicographic preferences. Programs
//! are parsed, then lowered (names resolved, functions inlined, arities
//! checked); the result can be evaluated concretely against a given DAG or
//! compiled into CNF by the grounder.

pub mod ast;
pub mod eval;
mod lexer;
mod lower;
mod parser;
mod presets;

use thiserror::Error;

pub use ast::{
    Arity, Binder, Builtin, CFormula, CmpOp, CompVars, Expr, FuncDef, Item, LabelRef, NodeDecl,
    Objective, ObjectiveKind, Program, SetElem,
};
pub use eval::{check_program, eval_expr, eval_formula, CValue, ConcreteCtx, Env};
pub use lower::{arity_of, lower_items};
pub use parser::{parse_expr, parse_formula as parse_cformula, parse_program};
pub use presets::{preset_source, PRELUDE, PRESET_NAMES};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("unexpected character `{ch}` at {line}:{col}")]
    BadChar { ch: char, line: u32, col: u32 },
    #[error("integer literal out of range at {line}:{col}")]
    IntOverflow { line: u32, col: u32 },
    #[error("expected {expected}, found {found} at {line}:{col}")]
    Parse { expected: String, found: String, line: u32, col: u32 },
    #[error("expected {expected}, found end of input")]
    ParseEof { expected: String },
    #[error("unknown name `{name}`")]
    UnknownName { name: String },
    #[error("`{name}` is reserved and cannot be defined")]
    ReservedName { name: String },
    #[error("`{name}` is already defined")]
    DuplicateName { name: String },
    #[error("arity mismatch in {context}")]
    ArityMismatch { context: String },
    #[error("`{name}` takes {expected} arguments, got {got}")]
    WrongArgCount { name: String, expected: usize, got: usize },
    #[error("function `{name}` cannot apply itself")]
    RecursiveFunc { name: String },
    #[error("unknown preset `{name}`")]
    UnknownPreset { name: String },
    #[error("priority {got} is out of range")]
    PriorityRange { got: u64 },
    #[error("proposition `{name}` is not in the sample alphabet")]
    UnknownProp { name: String },
}

/// Parses and lowers a program: the helper-function prelude, then each named
/// preset, then the user source.
pub fn compile(user: &str, preset_names: &[&str]) -> Result<Program, ConstraintError> {
    let mut groups = vec![parse_program(PRELUDE)?];
    for name in preset_names {
        let src = preset_source(name)
            .ok_or_else(|| ConstraintError::UnknownPreset { name: name.to_string() })?;
        groups.push(parse_program(src)?);
    }
    groups.push(parse_program(user)?);
    lower_items(&groups)
}
