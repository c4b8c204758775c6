//! Run reports: what a command learned or checked, rendered either as
//! human-readable text or as line-oriented `key: value` machine output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use ltlearn_core::dag::{NodeLabel, SyntaxDag};
use ltlearn_core::maxsat::LayerCost;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Machine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not individually attributable (e.g. constraints over declared nodes
    /// when no admissible placement exists).
    Unresolved,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unresolved => "unresolved",
        }
    }
}

/// One command's outcome. Optional fields render only when set.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    /// `ok`, `unsat`, `timeout`, or `none`.
    pub status: String,
    pub index: Option<usize>,
    pub formula: Option<String>,
    pub tree_size: Option<usize>,
    pub dag_size: Option<usize>,
    pub dag: Option<SyntaxDag>,
    /// Declared-node placements, name to node index.
    pub bindings: BTreeMap<String, usize>,
    /// Objective costs, highest priority first.
    pub costs: Vec<LayerCost>,
    pub trace_verdicts: Vec<(String, Verdict)>,
    pub constraint_verdicts: Vec<(String, Verdict)>,
    pub solver_vars: Option<usize>,
    pub solver_clauses: Option<usize>,
    pub elapsed: Option<Duration>,
    pub notes: Vec<String>,
}

fn node_line(dag: &SyntaxDag, i: usize) -> String {
    let label = match &dag.labels[i] {
        NodeLabel::Atom(p) => p.name.clone(),
        NodeLabel::Op(k) => k.symbol().to_string(),
    };
    let mut line = format!("{i}: {label}");
    if let Some(l) = dag.left[i] {
        write!(line, " {l}").unwrap();
    }
    if let Some(r) = dag.right[i] {
        write!(line, " {r}").unwrap();
    }
    line
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.trace_verdicts
            .iter()
            .chain(&self.constraint_verdicts)
            .all(|(_, v)| *v == Verdict::Pass)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Human => self.render_human(),
            OutputFormat::Machine => self.render_machine(),
        }
    }

    fn render_human(&self) -> String {
        let mut out = String::new();
        match self.index {
            Some(i) => writeln!(out, "[{i}] status: {}", self.status).unwrap(),
            None => writeln!(out, "status: {}", self.status).unwrap(),
        }
        if let Some(f) = &self.formula {
            write!(out, "formula: {f}").unwrap();
            if let (Some(t), Some(d)) = (self.tree_size, self.dag_size) {
                write!(out, "   (tree {t}, dag {d})").unwrap();
            }
            out.push('\n');
        }
        if let Some(dag) = &self.dag {
            writeln!(out, "dag (root {}):", dag.root).unwrap();
            for i in 0..dag.labels.len() {
                writeln!(out, "  {}", node_line(dag, i)).unwrap();
            }
        }
        if !self.bindings.is_empty() {
            let parts: Vec<String> =
                self.bindings.iter().map(|(n, i)| format!("{n}={i}")).collect();
            writeln!(out, "bindings: {}", parts.join(", ")).unwrap();
        }
        if !self.costs.is_empty() {
            let parts: Vec<String> = self
                .costs
                .iter()
                .map(|c| format!("priority {} -> {}", c.priority, c.cost))
                .collect();
            writeln!(out, "costs: {}", parts.join(", ")).unwrap();
        }
        if !self.trace_verdicts.is_empty() || !self.constraint_verdicts.is_empty() {
            writeln!(out, "verdicts:").unwrap();
            for (label, v) in self.trace_verdicts.iter().chain(&self.constraint_verdicts) {
                writeln!(out, "  {label}: {}", v.as_str()).unwrap();
            }
        }
        if let (Some(v), Some(c)) = (self.solver_vars, self.solver_clauses) {
            writeln!(out, "solver: {v} vars, {c} clauses").unwrap();
        }
        if let Some(e) = self.elapsed {
            writeln!(out, "time: {:.1} ms", e.as_secs_f64() * 1000.0).unwrap();
        }
        for note in &self.notes {
            writeln!(out, "note: {note}").unwrap();
        }
        out
    }

    fn render_machine(&self) -> String {
        let mut out = String::new();
        writeln!(out, "status: {}", self.status).unwrap();
        if let Some(i) = self.index {
            writeln!(out, "index: {i}").unwrap();
        }
        if let Some(f) = &self.formula {
            writeln!(out, "formula: {f}").unwrap();
        }
        if let Some(t) = self.tree_size {
            writeln!(out, "size.tree: {t}").unwrap();
        }
        if let Some(d) = self.dag_size {
            writeln!(out, "size.dag: {d}").unwrap();
        }
        if let Some(dag) = &self.dag {
            for i in 0..dag.labels.len() {
                writeln!(out, "node.{}", node_line(dag, i)).unwrap();
            }
            writeln!(out, "root: {}", dag.root).unwrap();
        }
        for (name, i) in &self.bindings {
            writeln!(out, "bind.{name}: {i}").unwrap();
        }
        for c in &self.costs {
            writeln!(out, "cost.{}: {}", c.priority, c.cost).unwrap();
        }
        for (idx, (_, v)) in self.trace_verdicts.iter().enumerate() {
            writeln!(out, "verdict.trace.{idx}: {}", v.as_str()).unwrap();
        }
        for (idx, (_, v)) in self.constraint_verdicts.iter().enumerate() {
            writeln!(out, "verdict.constraint.{idx}: {}", v.as_str()).unwrap();
        }
        if let Some(v) = self.solver_vars {
            writeln!(out, "solver.vars: {v}").unwrap();
        }
        if let Some(c) = self.solver_clauses {
            writeln!(out, "solver.clauses: {c}").unwrap();
        }
        if let Some(e) = self.elapsed {
            writeln!(out, "time.ms: {}", e.as_millis()).unwrap();
        }
        for (idx, note) in self.notes.iter().enumerate() {
            writeln!(out, "note.{idx}: {note}").unwrap();
        }
        out
    }
}
