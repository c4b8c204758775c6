//! Lasso traces `u v^ω` and labeled samples of them.

use thiserror::Error;

use crate::formula::Prop;

pub type State = Vec<bool>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace must have at least one state")]
    Empty,
    #[error("loop start {loop_start} out of range for {len} states")]
    LoopOutOfRange { loop_start: usize, len: usize },
    #[error("state {index} has {got} values, expected {expected}")]
    StateWidth { index: usize, got: usize, expected: usize },
    #[error("traces disagree on atomic propositions")]
    ApMismatch,
    #[error("positive trace {positive} and negative trace {negative} denote the same infinite trace")]
    Overlap { positive: usize, negative: usize },
}

/// A finite trace `u v` denoting the infinite trace `u v^ω`. The loop `v`
/// starts at `loop_start`; states are bit vectors indexed by `ap` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoTrace {
    pub ap: Vec<Prop>,
    pub states: Vec<State>,
    pub loop_start: usize,
}

impl LassoTrace {
    pub fn new(ap: Vec<Prop>, states: Vec<State>, loop_start: usize) -> Result<Self, TraceError> {
        if states.is_empty() {
            return Err(TraceError::Empty);
        }
        if loop_start >= states.len() {
            return Err(TraceError::LoopOutOfRange { loop_start, len: states.len() });
        }
        for (i, s) in states.iter().enumerate() {
            if s.len() != ap.len() {
                return Err(TraceError::StateWidth { index: i, got: s.len(), expected: ap.len() });
            }
        }
        Ok(LassoTrace { ap, states, loop_start })
    }

    /// Number of states in `u v`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Successor position: `i + 1`, wrapping from the final position back to
    /// `loop_start`. Panics if `i` is out of range.
    pub fn succ(&self, i: usize) -> usize {
        assert!(i < self.len(), "position {i} out of range for {} states", self.len());
        if i + 1 < self.len() {
            i + 1
        } else {
            self.loop_start
        }
    }

    /// Positions reachable from `i` by iterating `succ`, including `i`,
    /// in first-visit order.
    pub fn future_indices(&self, i: usize) -> Vec<usize> {
        assert!(i < self.len(), "position {i} out of range for {} states", self.len());
        let mut out = Vec::with_capacity(self.len() - i.min(self.loop_start));
        let mut seen = vec![false; self.len()];
        let mut k = i;
        while !seen[k] {
            seen[k] = true;
            out.push(k);
            k = self.succ(k);
        }
        out
    }

    /// Truth value of the `ap_index`-th proposition at position `k`.
    pub fn value(&self, k: usize, ap_index: usize) -> bool {
        self.states[k][ap_index]
    }

    /// Canonical `(prefix, loop)` pair: two traces denote the same infinite
    /// trace iff their canonical pairs are equal. The loop is reduced to its
    /// primitive period and the prefix tail is absorbed into loop rotations,
    /// leaving the unique shortest-prefix, shortest-period form.
    pub fn canonical(&self) -> (Vec<State>, Vec<State>) {
        let mut u: Vec<State> = self.states[..self.loop_start].to_vec();
        let mut v: Vec<State> = self.states[self.loop_start..].to_vec();

        // primitive period
        let n = v.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (0..n).all(|i| v[i] == v[i % p]) {
                v.truncate(p);
                break;
            }
        }

        // absorb: u·(w·a)^ω = (u minus a)·(a·w)^ω when u ends with a
        while let Some(last) = u.last() {
            if last == v.last().unwrap() {
                u.pop();
                let a = v.pop().unwrap();
                v.insert(0, a);
            } else {
                break;
            }
        }

        (u, v)
    }
}

/// Positive and negative example traces over a shared proposition list.
#[derive(Clone, Debug)]
pub struct Sample {
    pub ap: Vec<Prop>,
    pub positives: Vec<LassoTrace>,
    pub negatives: Vec<LassoTrace>,
}

impl Sample {
    /// Validates shared AP order and that no positive denotes the same
    /// infinite trace as a negative.
    pub fn new(
        ap: Vec<Prop>,
        positives: Vec<LassoTrace>,
        negatives: Vec<LassoTrace>,
    ) -> Result<Self, TraceError> {
        for t in positives.iter().chain(&negatives) {
            if t.ap != ap {
                return Err(TraceError::ApMismatch);
            }
        }
        for (pi, p) in positives.iter().enumerate() {
            let pc = p.canonical();
            for (ni, n) in negatives.iter().enumerate() {
                if pc == n.canonical() {
                    return Err(TraceError::Overlap { positive: pi, negative: ni });
                }
            }
        }
        Ok(Sample { ap, positives, negatives })
    }

    pub fn traces(&self) -> impl Iterator<Item = (&LassoTrace, bool)> {
        self.positives
            .iter()
            .map(|t| (t, true))
            .chain(self.negatives.iter().map(|t| (t, false)))
    }
}
