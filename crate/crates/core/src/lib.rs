//! Learn linear temporal logic formulas from labeled lasso traces.
//!
//! The pipeline: a [`trace::Sample`] (positive/negative lasso traces) plus a
//! [`constraint::Program`] (first-order syntactic constraints and
//! prioritized objectives) are grounded over a bounded syntax-DAG universe,
//! compiled to CNF with soft clauses, solved by lexicographic MaxSAT, and
//! decoded back into a [`dag::SyntaxDag`] / [`formula::Formula`].

pub mod brute;
pub mod dag;
pub mod equiv;
pub mod eval;
pub mod formula;
pub mod gen;
pub mod trace;

pub mod constraint;
pub mod encode;
pub mod ground;
pub mod learn;
pub mod maxsat;

pub use dag::{NodeLabel, SyntaxDag};
pub use formula::{Formula, OpKind, Prop};
pub use learn::{enumerate, learn, EnumerateStatus, LearnOptions, LearnOutcome, Learned};
pub use trace::{LassoTrace, Sample};
