//! Approximate semantic equivalence of formulas via randomized trace probing.

use crate::dag::formula_to_dag;
use crate::eval::evaluate;
use crate::formula::{Formula, Prop};
use crate::gen::{random_lasso, rng};

/// Checks two formulas for equivalence: first syntactically up to
/// commutativity of `&`/`|`, then semantically on `samples` random lasso
/// traces (lengths 1..=10) over `ap`. Returns the first distinguishing trace
/// on failure.
pub fn equivalent(
    a: &Formula,
    b: &Formula,
    ap: &[Prop],
    samples: usize,
    seed: u64,
) -> Result<(), crate::trace::LassoTrace> {
    if a.commutative_normal() == b.commutative_normal() {
        return Ok(());
    }
    let da = formula_to_dag(a, true);
    let db = formula_to_dag(b, true);
    let mut r = rng(seed);
    for i in 0..samples {
        let len = 1 + i % 10;
        let t = random_lasso(&mut r, ap, len);
        if evaluate(&da, &t) != evaluate(&db, &t) {
            return Err(t);
        }
    }
    Ok(())
}
