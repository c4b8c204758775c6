//! Lexicographic MaxSAT on top of an incremental SAT backend.
//!
//! Each soft layer is a bag of unit-cost literals. Layers are optimized from
//! highest priority to lowest: a sequential counter over the layer's
//! literals is added once as hard clauses, upper bounds are expressed as
//! assumptions over counter outputs, and the bound is tightened one
//! satisfiable step at a time until the solver reports unsatisfiable. Fixed
//! optima stay enforced (as assumptions) while later layers are optimized.
//!
//! The module also converts problems to and from the weighted DIMACS
//! exchange format so external MaxSAT solvers can be used.

use std::time::Instant;

use thiserror::Error;
use varisat::{ExtendFormula, Lit, Solver};

use crate::encode::SoftLayer;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("SAT backend failed: {0}")]
    Backend(String),
}

/// Minimal incremental SAT interface: clauses persist, assumptions apply to
/// a single `solve` call, and the last model can be queried per variable.
pub trait SatBackend {
    fn add_clause(&mut self, lits: &[i32]);
    fn solve(&mut self, assumptions: &[i32]) -> Result<bool, SolveError>;
    /// Truth value of a variable in the most recent satisfying model.
    fn value(&self, var: i32) -> bool;
}

pub struct VarisatBackend {
    solver: Solver<'static>,
    model: Vec<bool>,
    max_var: i32,
}

impl VarisatBackend {
    pub fn new() -> Self {
        VarisatBackend { solver: Solver::new(), model: Vec::new(), max_var: 0 }
    }
}

impl Default for VarisatBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl SatBackend for VarisatBackend {
    fn add_clause(&mut self, lits: &[i32]) {
        for &l in lits {
            self.max_var = self.max_var.max(l.abs());
        }
        let clause: Vec<Lit> = lits.iter().map(|&l| Lit::from_dimacs(l as isize)).collect();
        self.solver.add_clause(&clause);
    }

    fn solve(&mut self, assumptions: &[i32]) -> Result<bool, SolveError> {
        for &l in assumptions {
            self.max_var = self.max_var.max(l.abs());
        }
        let assumed: Vec<Lit> =
            assumptions.iter().map(|&l| Lit::from_dimacs(l as isize)).collect();
        self.solver.assume(&assumed);
        match self.solver.solve() {
            Ok(true) => {
                self.model = vec![false; self.max_var as usize + 1];
                if let Some(lits) = self.solver.model() {
                    for lit in lits {
                        let d = lit.to_dimacs();
                        if d > 0 {
                            let v = d as usize;
                            if v < self.model.len() {
                                self.model[v] = true;
                            }
                        }
                    }
                }
                Ok(true)
            }
            Ok(false) => Ok(false),
            Err(e) => Err(SolveError::Backend(e.to_string())),
        }
    }

    fn value(&self, var: i32) -> bool {
        self.model.get(var as usize).copied().unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerCost {
    pub priority: u32,
    pub cost: usize,
}

#[derive(Clone, Debug)]
pub enum SolveStatus {
    /// A lexicographically optimal model, indexed by variable number.
    Optimal { model: Vec<bool>, costs: Vec<LayerCost> },
    Unsat,
    /// The deadline passed between solver calls.
    TimedOut,
}

struct Ladder {
    priority: u32,
    lits: Vec<i32>,
    /// `outputs[j-1]` is true in any model where at least `j` cost literals
    /// are true (one-directional sequential counter).
    outputs: Vec<i32>,
    optimum: Option<usize>,
}

/// Lexicographic optimization session. Hard clauses and counter ladders are
/// added once; bounds live in assumptions, so blocking clauses can be added
/// and bounds relaxed between solves.
pub struct LexSession<B: SatBackend> {
    backend: B,
    ladders: Vec<Ladder>,
    total_vars: i32,
    deadline: Option<Instant>,
}

impl LexSession<VarisatBackend> {
    pub fn with_varisat(clauses: &[Vec<i32>], num_vars: i32, layers: &[SoftLayer]) -> Self {
        LexSession::new(VarisatBackend::new(), clauses, num_vars, layers)
    }
}

impl<B: SatBackend> LexSession<B> {
    pub fn new(mut backend: B, clauses: &[Vec<i32>], num_vars: i32, layers: &[SoftLayer]) -> Self {
        for c in clauses {
            backend.add_clause(c);
        }
        let mut next_var = num_vars + 1;
        let mut ladders = Vec::with_capacity(layers.len());
        for layer in layers {
            let outputs = build_counter(&mut backend, &layer.lits, &mut next_var);
            ladders.push(Ladder {
                priority: layer.priority,
                lits: layer.lits.clone(),
                outputs,
                optimum: None,
            });
        }
        LexSession { backend, ladders, total_vars: next_var - 1, deadline: None }
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Assumptions enforcing every fixed optimum.
    fn bound_assumptions(&self) -> Vec<i32> {
        let mut a = Vec::new();
        for ladder in &self.ladders {
            if let Some(opt) = ladder.optimum {
                if opt < ladder.lits.len() {
                    a.push(-ladder.outputs[opt]);
                }
            }
        }
        a
    }

    fn layer_cost(&self, ladder: &Ladder) -> usize {
        ladder.lits.iter().filter(|&&l| {
            let v = self.backend.value(l.abs());
            (l > 0) == v
        }).count()
    }

    /// Optimizes all layers whose optimum is not yet fixed, then returns a
    /// model attaining every fixed optimum.
    pub fn solve(&mut self) -> Result<SolveStatus, SolveError> {
        for idx in 0..self.ladders.len() {
            if self.ladders[idx].optimum.is_some() {
                continue;
            }
            if self.out_of_time() {
                return Ok(SolveStatus::TimedOut);
            }
            let assumptions = self.bound_assumptions();
            if !self.backend.solve(&assumptions)? {
                return Ok(SolveStatus::Unsat);
            }
            let mut cost = self.layer_cost(&self.ladders[idx]);
            while cost > 0 {
                if self.out_of_time() {
                    return Ok(SolveStatus::TimedOut);
                }
                let mut assumptions = self.bound_assumptions();
                // forbid "at least `cost`", i.e. require at most `cost - 1`
                assumptions.push(-self.ladders[idx].outputs[cost - 1]);
                if self.backend.solve(&assumptions)? {
                    cost = self.layer_cost(&self.ladders[idx]);
                } else {
                    break;
                }
            }
            self.ladders[idx].optimum = Some(cost);
        }
        if self.out_of_time() {
            return Ok(SolveStatus::TimedOut);
        }
        let assumptions = self.bound_assumptions();
        if !self.backend.solve(&assumptions)? {
            return Ok(SolveStatus::Unsat);
        }
        let model: Vec<bool> =
            (0..=self.total_vars).map(|v| v > 0 && self.backend.value(v)).collect();
        let costs = self
            .ladders
            .iter()
            .map(|l| LayerCost { priority: l.priority, cost: self.layer_cost(l) })
            .collect();
        Ok(SolveStatus::Optimal { model, costs })
    }

    /// Excludes the model's valuation of `vars` from future solutions. With
    /// `keep_bounds` the fixed optima stay enforced, so the next solve only
    /// yields solutions with the same cost vector; without it, optimization
    /// restarts and later solutions may cost more.
    pub fn block_model(&mut self, vars: &[i32], model: &[bool], keep_bounds: bool) {
        let clause: Vec<i32> = vars
            .iter()
            .map(|&v| if model.get(v as usize).copied().unwrap_or(false) { -v } else { v })
            .collect();
        self.backend.add_clause(&clause);
        if !keep_bounds {
            for ladder in &mut self.ladders {
                ladder.optimum = None;
            }
        }
    }

    /// Fixed per-layer optima, in layer order.
    pub fn optima(&self) -> Vec<Option<usize>> {
        self.ladders.iter().map(|l| l.optimum).collect()
    }
}

/// Adds a one-directional sequential counter over `lits` and returns the
/// final-stage outputs: `outputs[j-1]` is implied by "at least `j` of the
/// literals are true", so assuming its negation caps the count at `j - 1`.
fn build_counter<B: SatBackend>(backend: &mut B, lits: &[i32], next_var: &mut i32) -> Vec<i32> {
    let m = lits.len();
    if m == 0 {
        return Vec::new();
    }
    let mut fresh = || {
        let v = *next_var;
        *next_var += 1;
        v
    };
    // stage[j-1] after processing i literals: at least j of them are true
    let mut stage: Vec<i32> = Vec::new();
    for (i, &e) in lits.iter().enumerate() {
        let rows = i + 1;
        let mut new_stage = Vec::with_capacity(rows);
        for j in 1..=rows {
            let s = fresh();
            if j == 1 {
                backend.add_clause(&[-e, s]);
                if !stage.is_empty() {
                    backend.add_clause(&[-stage[0], s]);
                }
            } else {
                if j - 1 <= stage.len() {
                    backend.add_clause(&[-stage[j - 2], -e, s]);
                }
                if j <= stage.len() {
                    backend.add_clause(&[-stage[j - 1], s]);
                }
            }
            new_stage.push(s);
        }
        stage = new_stage;
    }
    stage
}

// ---------------------------------------------------------------------------
// Weighted DIMACS exchange
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum WcnfError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("the external solver reported unsatisfiable")]
    Unsatisfiable,
    #[error("no model found in solver output")]
    NoModel,
}

/// Renders the problem in weighted DIMACS. Soft layers become unit soft
/// clauses: each cost literal `l` yields the clause `¬l`, so paying its
/// weight corresponds to one unit of layer cost. Weights make any violation
/// in a higher-priority layer outweigh all lower layers combined.
pub fn to_wcnf(clauses: &[Vec<i32>], num_vars: i32, layers: &[SoftLayer]) -> String {
    let mut weights = vec![0u64; layers.len()];
    let mut w = 1u64;
    for (idx, layer) in layers.iter().enumerate().rev() {
        weights[idx] = w;
        w = w.saturating_mul(layer.lits.len() as u64 + 1);
    }
    let top: u64 = layers
        .iter()
        .zip(&weights)
        .map(|(l, &w)| w.saturating_mul(l.lits.len() as u64))
        .sum::<u64>()
        .saturating_add(1);
    let num_soft: usize = layers.iter().map(|l| l.lits.len()).sum();
    let mut out = String::new();
    out.push_str(&format!("p wcnf {} {} {}\n", num_vars, clauses.len() + num_soft, top));
    for c in clauses {
        out.push_str(&top.to_string());
        for &l in c {
            out.push(' ');
            out.push_str(&l.to_string());
        }
        out.push_str(" 0\n");
    }
    for (layer, &w) in layers.iter().zip(&weights) {
        for &l in &layer.lits {
            out.push_str(&format!("{} {} 0\n", w, -l));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WcnfClause {
    /// `None` marks a hard clause.
    pub weight: Option<u64>,
    pub lits: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wcnf {
    pub num_vars: i32,
    pub clauses: Vec<WcnfClause>,
}

/// Parses weighted DIMACS in both the classic `p wcnf V C TOP` form and the
/// headerless form where hard clauses start with `h`.
pub fn parse_wcnf(text: &str) -> Result<Wcnf, WcnfError> {
    let mut top: Option<u64> = None;
    let mut num_vars: i32 = 0;
    let mut clauses = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "wcnf" {
                return Err(WcnfError::Malformed {
                    line: lineno + 1,
                    message: "expected `p wcnf VARS CLAUSES TOP`".into(),
                });
            }
            num_vars = parts[1].parse().map_err(|_| WcnfError::Malformed {
                line: lineno + 1,
                message: "bad variable count".into(),
            })?;
            top = Some(parts[3].parse().map_err(|_| WcnfError::Malformed {
                line: lineno + 1,
                message: "bad top weight".into(),
            })?);
            continue;
        }
        let mut parts = line.split_whitespace();
        let first = parts.next().expect("nonempty line has a first token");
        let weight = if first == "h" {
            None
        } else {
            let w: u64 = first.parse().map_err(|_| WcnfError::Malformed {
                line: lineno + 1,
                message: format!("bad weight `{first}`"),
            })?;
            match top {
                Some(t) if w >= t => None,
                _ => Some(w),
            }
        };
        let mut lits = Vec::new();
        for tok in parts {
            let l: i32 = tok.parse().map_err(|_| WcnfError::Malformed {
                line: lineno + 1,
                message: format!("bad literal `{tok}`"),
            })?;
            if l == 0 {
                break;
            }
            num_vars = num_vars.max(l.abs());
            lits.push(l);
        }
        clauses.push(WcnfClause { weight, lits });
    }
    Ok(Wcnf { num_vars, clauses })
}

/// Reads a model from external MaxSAT solver output: `v` lines carrying
/// either signed literals or a 0/1 string (one character per variable).
/// Detects `s UNSATISFIABLE`.
pub fn parse_external_model(text: &str, num_vars: i32) -> Result<Vec<bool>, WcnfError> {
    let mut tokens: Vec<String> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with("s ") && line.contains("UNSATISFIABLE") {
            return Err(WcnfError::Unsatisfiable);
        }
        if let Some(rest) = line.strip_prefix('v') {
            tokens.extend(rest.split_whitespace().map(str::to_string));
        }
    }
    if tokens.is_empty() {
        return Err(WcnfError::NoModel);
    }
    let mut model = vec![false; num_vars as usize + 1];
    let binary = tokens.iter().all(|t| t.chars().all(|c| c == '0' || c == '1'))
        && tokens.iter().map(|t| t.len()).sum::<usize>() == num_vars as usize;
    if binary {
        let mut var = 1usize;
        for tok in &tokens {
            for ch in tok.chars() {
                model[var] = ch == '1';
                var += 1;
            }
        }
    } else {
        for tok in &tokens {
            let l: i64 = tok.parse().map_err(|_| WcnfError::Malformed {
                line: 0,
                message: format!("bad model literal `{tok}`"),
            })?;
            if l == 0 {
                continue;
            }
            let v = l.unsigned_abs() as usize;
            if v < model.len() {
                model[v] = l > 0;
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(priority: u32, lits: Vec<i32>) -> SoftLayer {
        SoftLayer { priority, lits }
    }

    #[test]
    fn single_layer_minimum_is_found() {
        // vars 1..3, at least two must be true
        let clauses =
            vec![vec![1, 2], vec![1, 3], vec![2, 3]];
        let mut sess =
            LexSession::with_varisat(&clauses, 3, &[layer(1, vec![1, 2, 3])]);
        match sess.solve().unwrap() {
            SolveStatus::Optimal { costs, model } => {
                assert_eq!(costs, vec![LayerCost { priority: 1, cost: 2 }]);
                let true_count = (1..=3).filter(|&v| model[v as usize]).count();
                assert_eq!(true_count, 2);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn layer_order_decides_conflicts() {
        // one of the two vars must be true; priorities pick the loser
        let clauses = vec![vec![1, 2]];
        let layers = [layer(5, vec![1]), layer(1, vec![2])];
        let mut sess = LexSession::with_varisat(&clauses, 2, &layers);
        match sess.solve().unwrap() {
            SolveStatus::Optimal { model, costs } => {
                assert!(!model[1] && model[2]);
                assert_eq!(
                    costs,
                    vec![
                        LayerCost { priority: 5, cost: 0 },
                        LayerCost { priority: 1, cost: 1 }
                    ]
                );
            }
            other => panic!("expected optimal, got {other:?}"),
        }
        let layers = [layer(5, vec![2]), layer(1, vec![1])];
        let mut sess = LexSession::with_varisat(&clauses, 2, &layers);
        match sess.solve().unwrap() {
            SolveStatus::Optimal { model, .. } => assert!(model[1] && !model[2]),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unsat_is_reported() {
        let clauses = vec![vec![1], vec![-1]];
        let mut sess = LexSession::with_varisat(&clauses, 1, &[]);
        assert!(matches!(sess.solve().unwrap(), SolveStatus::Unsat));
    }

    #[test]
    fn expired_deadline_times_out() {
        let clauses = vec![vec![1, 2]];
        let mut sess = LexSession::with_varisat(&clauses, 2, &[layer(1, vec![1, 2])]);
        sess.set_deadline(Some(Instant::now()));
        assert!(matches!(sess.solve().unwrap(), SolveStatus::TimedOut));
    }

    #[test]
    fn blocking_with_bounds_enumerates_co_optimal_models() {
        // exactly one of three vars; every model costs 1
        let clauses = vec![vec![1, 2, 3], vec![-1, -2], vec![-1, -3], vec![-2, -3]];
        let vars = [1, 2, 3];
        let mut sess = LexSession::with_varisat(&clauses, 3, &[layer(1, vec![1, 2, 3])]);
        let mut seen = Vec::new();
        loop {
            match sess.solve().unwrap() {
                SolveStatus::Optimal { model, costs } => {
                    assert_eq!(costs[0].cost, 1);
                    let which = (1..=3).find(|&v| model[v as usize]).unwrap();
                    seen.push(which);
                    sess.block_model(&vars, &model, true);
                }
                SolveStatus::Unsat => break,
                other => panic!("unexpected {other:?}"),
            }
        }
        seen.sort_unstable();
        assert_eq!(seen, vec![1, 2, 3]);
    }

    #[test]
    fn blocking_without_bounds_reoptimizes_at_higher_cost() {
        // var 1 alone is the cheapest solution; after blocking it the best
        // models must pay more
        let clauses = vec![vec![1, 2], vec![-2, 3]];
        let vars = [1, 2, 3];
        let mut sess = LexSession::with_varisat(&clauses, 3, &[layer(1, vec![1, 2, 3])]);
        let first = match sess.solve().unwrap() {
            SolveStatus::Optimal { model, costs } => {
                assert_eq!(costs[0].cost, 1);
                assert!(model[1] && !model[2] && !model[3]);
                model
            }
            other => panic!("unexpected {other:?}"),
        };
        sess.block_model(&vars, &first, false);
        match sess.solve().unwrap() {
            SolveStatus::Optimal { costs, .. } => assert_eq!(costs[0].cost, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn counter_outputs_track_threshold() {
        // force vars 1 and 3 true, 2 false; check which outputs must hold
        let mut backend = VarisatBackend::new();
        backend.add_clause(&[1]);
        backend.add_clause(&[-2]);
        backend.add_clause(&[3]);
        let mut next = 4;
        let outputs = build_counter(&mut backend, &[1, 2, 3], &mut next);
        assert_eq!(outputs.len(), 3);
        // count is 2: capping at 1 must fail, capping at 2 must succeed
        assert!(!backend.solve(&[-outputs[1]]).unwrap());
        assert!(backend.solve(&[-outputs[2]]).unwrap());
    }

    #[test]
    fn wcnf_round_trips_and_orders_weights() {
        let clauses = vec![vec![1, -2], vec![2, 3]];
        let layers = [layer(7, vec![1, 2]), layer(2, vec![3])];
        let text = to_wcnf(&clauses, 3, &layers);
        assert!(text.starts_with("p wcnf 3 5"));
        let parsed = parse_wcnf(&text).unwrap();
        assert_eq!(parsed.num_vars, 3);
        let hard: Vec<&WcnfClause> =
            parsed.clauses.iter().filter(|c| c.weight.is_none()).collect();
        assert_eq!(hard.len(), 2);
        assert_eq!(hard[0].lits, vec![1, -2]);
        let softs: Vec<&WcnfClause> =
            parsed.clauses.iter().filter(|c| c.weight.is_some()).collect();
        // the high-priority layer's weight exceeds the whole lower layer
        assert_eq!(softs[0].weight, Some(2));
        assert_eq!(softs[1].weight, Some(2));
        assert_eq!(softs[2].weight, Some(1));
        assert_eq!(softs[0].lits, vec![-1]);
    }

    #[test]
    fn wcnf_accepts_headerless_hard_prefix_format() {
        let text = "c comment\nh 1 -2 0\n3 2 0\n";
        let parsed = parse_wcnf(text).unwrap();
        assert_eq!(parsed.num_vars, 2);
        assert_eq!(parsed.clauses[0].weight, None);
        assert_eq!(parsed.clauses[0].lits, vec![1, -2]);
        assert_eq!(parsed.clauses[1].weight, Some(3));
    }

    #[test]
    fn external_models_parse_in_both_conventions() {
        let lits = parse_external_model("c ok\ns OPTIMUM FOUND\nv 1 -2 3 0\n", 3).unwrap();
        assert_eq!(lits, vec![false, true, false, true]);
        let bits = parse_external_model("v 101\n", 3).unwrap();
        assert_eq!(bits, vec![false, true, false, true]);
        let split = parse_external_model("v 10\nv 1\n", 3).unwrap();
        assert_eq!(split, vec![false, true, false, true]);
        assert!(matches!(
            parse_external_model("s UNSATISFIABLE\n", 3),
            Err(WcnfError::Unsatisfiable)
        ));
        assert!(matches!(parse_external_model("nothing\n", 3), Err(WcnfError::NoModel)));
    }
}
