//! Exhaustive formula enumeration — the independent reference oracle the SAT
//! pipeline is validated against.

use crate::eval::holds;
use crate::formula::{Formula, OpKind, Prop};
use crate::trace::Sample;

/// All formulas over `ap` with tree size exactly 1..=max_size, grouped by
/// size. Deterministic order: atoms by `ap` order, operators in `OpKind::ALL`
/// order, binary splits by ascending left size.
pub fn enumerate_formulas(ap: &[Prop], max_size: usize) -> Vec<Vec<Formula>> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new()];
    for size in 1..=max_size {
        let mut level = Vec::new();
        if size == 1 {
            level.extend(ap.iter().cloned().map(Formula::Atom));
        } else {
            for op in OpKind::ALL {
                match op.arity() {
                    1 => {
                        for c in &by_size[size - 1] {
                            level.push(Formula::unary(op, c.clone()));
                        }
                    }
                    2 => {
                        for left in 1..size - 1 {
                            let right = size - 1 - left;
                            for l in &by_size[left] {
                                for r in &by_size[right] {
                                    level.push(Formula::binary(op, l.clone(), r.clone()));
                                }
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        by_size.push(level);
    }
    by_size
}

/// Whether `f` holds on every positive and no negative trace of `sample`.
pub fn consistent(f: &Formula, sample: &Sample) -> bool {
    sample.traces().all(|(t, positive)| holds(f, t) == positive)
}

/// Smallest-tree-size formula consistent with `sample`, searching sizes
/// 1..=max_size in order and honoring an optional shape filter. Returns the
/// first hit in enumeration order, so results are deterministic.
pub fn brute_force_min_consistent(
    sample: &Sample,
    max_size: usize,
    shape_filter: Option<&dyn Fn(&Formula) -> bool>,
) -> Option<Formula> {
    let by_size = enumerate_formulas(&sample.ap, max_size);
    for level in &by_size[1..] {
        for f in level {
            if let Some(filter) = shape_filter {
                if !filter(f) {
                    continue;
                }
            }
            if consistent(f, sample) {
                return Some(f.clone());
            }
        }
    }
    None
}
