//! Built-in helper functions and named constraint presets.

/// Helper functions available to every program.
pub const PRELUDE: &str = "\
func l(n) = n . L;
func r(n) = n . R;
func desc(n) = n . ^(L + R);
func subNodes(n) = n . *(L + R);
";

/// Forbid shared subterms: every non-leaf node has at most one incoming
/// edge and no node is both children of the same parent, so the syntax DAG
/// is a tree and the edge count is exactly the tree size minus one.
const NO_DAG_REUSE: &str = "\
constraint all n in (Nodes \\ AP) : #(n . ~(L + R)) <= 1;
constraint no (L & R);
";

/// Forbid implications whose sides are the same node.
const NO_TAUTOLOGY: &str = "\
constraint all n in N[->] : not (l(n) = r(n));
";

/// Negation normal form: negation may only be applied to propositions.
const NNF: &str = "\
constraint all n in N[!] : l(n) in AP;
";

/// Response-shaped formulas `G (trigger -> F response)` with propositional
/// trigger and response. The declared nodes `ng`, `nimp`, and `nf` (the `G`,
/// the implication, and the `F`) are part of this preset's interface: user
/// constraints may refer to them.
const LIVENESS_PATTERN: &str = "\
node ng in N[G];
node nimp in N[->];
node nf in N[F];
constraint root = ng;
constraint l(root) = nimp;
constraint r(nimp) = nf;
constraint no (subNodes(l(nimp)) & Temporal);
constraint no (desc(nf) & Temporal);
";

pub const PRESET_NAMES: &[&str] = &["no-dag-reuse", "no-tautology", "nnf", "liveness-pattern"];

pub fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "no-dag-reuse" => Some(NO_DAG_REUSE),
        "no-tautology" => Some(NO_TAUTOLOGY),
        "nnf" => Some(NNF),
        "liveness-pattern" => Some(LIVENESS_PATTERN),
        _ => None,
    }
}
