//! Syntax DAGs: formula trees with optionally shared identical subformulas.

use std::collections::HashMap;
use thiserror::Error;

use crate::formula::{Formula, OpKind, Prop};

/// Label of one DAG node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Op(OpKind),
    Atom(Prop),
}

impl NodeLabel {
    pub fn arity(&self) -> usize {
        match self {
            NodeLabel::Op(k) => k.arity(),
            NodeLabel::Atom(_) => 0,
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, NodeLabel::Op(k) if k.is_temporal())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("node {node}: child index {child} out of range")]
    ChildOutOfRange { node: usize, child: usize },
    #[error("node {node}: arity mismatch for label")]
    Arity { node: usize },
    #[error("cycle through node {node}")]
    Cyclic { node: usize },
    #[error("root index {root} out of range")]
    RootOutOfRange { root: usize },
    #[error("empty DAG")]
    Empty,
}

/// A rooted DAG of labeled nodes. `left`/`right` are partial child maps;
/// unary operators use `left` only. Always acyclic (checked on construction).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxDag {
    pub labels: Vec<NodeLabel>,
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
    pub root: usize,
}

impl SyntaxDag {
    pub fn new(
        labels: Vec<NodeLabel>,
        left: Vec<Option<usize>>,
        right: Vec<Option<usize>>,
        root: usize,
    ) -> Result<Self, DagError> {
        if labels.is_empty() {
            return Err(DagError::Empty);
        }
        if root >= labels.len() {
            return Err(DagError::RootOutOfRange { root });
        }
        assert_eq!(labels.len(), left.len());
        assert_eq!(labels.len(), right.len());
        let d = SyntaxDag { labels, left, right, root };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), DagError> {
        for i in 0..self.len() {
            for c in [self.left[i], self.right[i]].into_iter().flatten() {
                if c >= self.len() {
                    return Err(DagError::ChildOutOfRange { node: i, child: c });
                }
            }
            let ok = match self.labels[i].arity() {
                0 => self.left[i].is_none() && self.right[i].is_none(),
                1 => self.left[i].is_some() && self.right[i].is_none(),
                _ => self.left[i].is_some() && self.right[i].is_some(),
            };
            if !ok {
                return Err(DagError::Arity { node: i });
            }
        }
        // Three-color DFS over every node; white=0 gray=1 black=2.
        let mut color = vec![0u8; self.len()];
        for start in 0..self.len() {
            if color[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = 1;
            while let Some(&(n, next)) = stack.last() {
                if next < 2 {
                    stack.last_mut().unwrap().1 += 1;
                    let k = if next == 0 { self.left[n] } else { self.right[n] };
                    if let Some(k) = k {
                        match color[k] {
                            0 => {
                                color[k] = 1;
                                stack.push((k, 0));
                            }
                            1 => return Err(DagError::Cyclic { node: k }),
                            _ => {}
                        }
                    }
                } else {
                    color[n] = 2;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Reachability from the root.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            for c in [self.left[n], self.right[n]].into_iter().flatten() {
                stack.push(c);
            }
        }
        seen
    }

    /// Number of nodes reachable from the root.
    pub fn dag_size(&self) -> usize {
        self.reachable().iter().filter(|&&b| b).count()
    }

    /// Node indices in children-before-parents order, restricted to nodes
    /// reachable from the root.
    pub fn topo_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut color = vec![0u8; self.len()];
        let mut stack: Vec<(usize, usize)> = vec![(self.root, 0)];
        color[self.root] = 1;
        while let Some(&(n, next)) = stack.last() {
            if next < 2 {
                stack.last_mut().unwrap().1 += 1;
                let k = if next == 0 { self.left[n] } else { self.right[n] };
                if let Some(k) = k {
                    if color[k] == 0 {
                        color[k] = 1;
                        stack.push((k, 0));
                    }
                }
            } else {
                color[n] = 2;
                order.push(n);
                stack.pop();
            }
        }
        order
    }
}

/// Converts a formula tree to a DAG. With `share`, structurally identical
/// subformulas map to a single node; otherwise every occurrence gets its own
/// node. Children always precede parents; the root is the last node.
pub fn formula_to_dag(f: &Formula, share: bool) -> SyntaxDag {
    struct B {
        labels: Vec<NodeLabel>,
        left: Vec<Option<usize>>,
        right: Vec<Option<usize>>,
        memo: HashMap<Formula, usize>,
        share: bool,
    }
    impl B {
        fn go(&mut self, f: &Formula) -> usize {
            if self.share {
                if let Some(&i) = self.memo.get(f) {
                    return i;
                }
            }
            let (l, r) = f.children();
            let li = l.map(|c| self.go(c));
            let ri = r.map(|c| self.go(c));
            let label = match f {
                Formula::Atom(p) => NodeLabel::Atom(p.clone()),
                _ => NodeLabel::Op(f.op().unwrap()),
            };
            let i = self.labels.len();
            self.labels.push(label);
            self.left.push(li);
            self.right.push(ri);
            if self.share {
                self.memo.insert(f.clone(), i);
            }
            i
        }
    }
    let mut b = B {
        labels: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
        memo: HashMap::new(),
        share,
    };
    let root = b.go(f);
    SyntaxDag { labels: b.labels, left: b.left, right: b.right, root }
}

/// Expands a DAG back into a formula tree, duplicating shared nodes.
pub fn dag_to_formula(d: &SyntaxDag) -> Formula {
    fn go(d: &SyntaxDag, n: usize, memo: &mut HashMap<usize, Formula>) -> Formula {
        if let Some(f) = memo.get(&n) {
            return f.clone();
        }
        let f = match &d.labels[n] {
            NodeLabel::Atom(p) => Formula::Atom(p.clone()),
            NodeLabel::Op(k) => {
                let l = go(d, d.left[n].unwrap(), memo);
                if k.arity() == 1 {
                    Formula::unary(*k, l)
                } else {
                    let r = go(d, d.right[n].unwrap(), memo);
                    Formula::binary(*k, l, r)
                }
            }
        };
        memo.insert(n, f.clone());
        f
    }
    go(d, d.root, &mut HashMap::new())
}
