//! Seeded random generation of formulas and traces for cross-checking.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, OpKind, Prop};
use crate::trace::{LassoTrace, State};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random formula with exactly `size` tree nodes over `ap`.
pub fn random_formula<R: Rng>(r: &mut R, ap: &[Prop], size: usize) -> Formula {
    assert!(size >= 1);
    assert!(!ap.is_empty());
    if size == 1 {
        return Formula::Atom(ap[r.gen_range(0..ap.len())].clone());
    }
    // choose an operator whose arity fits the remaining budget
    let ops: Vec<OpKind> = OpKind::ALL
        .iter()
        .copied()
        .filter(|op| size > op.arity())
        .collect();
    let op = ops[r.gen_range(0..ops.len())];
    match op.arity() {
        1 => Formula::unary(op, random_formula(r, ap, size - 1)),
        2 => {
            let left = r.gen_range(1..size - 1);
            Formula::binary(
                op,
                random_formula(r, ap, left),
                random_formula(r, ap, size - 1 - left),
            )
        }
        _ => unreachable!(),
    }
}

/// Random lasso trace over `ap` with `len` states and a random loop start.
pub fn random_lasso<R: Rng>(r: &mut R, ap: &[Prop], len: usize) -> LassoTrace {
    assert!(len >= 1);
    let states: Vec<State> = (0..len)
        .map(|_| (0..ap.len()).map(|_| r.gen_bool(0.5)).collect())
        .collect();
    let loop_start = r.gen_range(0..len);
    LassoTrace::new(ap.to_vec(), states, loop_start).expect("generated trace is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::props;

    #[test]
    fn generated_formulas_have_requested_size() {
        let ap = props(&["a", "b", "c"]);
        let mut r = rng(7);
        for size in 1..=12 {
            for _ in 0..50 {
                let f = random_formula(&mut r, &ap, size);
                assert_eq!(f.tree_size(), size);
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let ap = props(&["a", "b"]);
        let f1 = random_formula(&mut rng(42), &ap, 9);
        let f2 = random_formula(&mut rng(42), &ap, 9);
        assert_eq!(f1, f2);
        let t1 = random_lasso(&mut rng(42), &ap, 8);
        let t2 = random_lasso(&mut rng(42), &ap, 8);
        assert_eq!(t1, t2);
    }

    #[test]
    fn generated_lassos_are_valid() {
        let ap = props(&["a", "b"]);
        let mut r = rng(3);
        for len in 1..=10 {
            let t = random_lasso(&mut r, &ap, len);
            assert_eq!(t.len(), len);
            assert!(t.loop_start < len);
        }
    }
}
