//! Cross-product grounding, used as an oracle in tests.

use std::collections::HashSet;

use super::compile::{compile_program, LitRule};
use super::{GroundError, GroundProgram};
use crate::sorts::{cartesian, Cardinality, SortTable, TypedProgram};
use crate::value::{GroundLiteral, Value};

/// Largest total number of rule instances [`ground_naive`] will consider.
pub const NAIVE_INSTANCE_BOUND: u128 = 100_000;

/// Instantiates every rule with every combination of values from its
/// variables' domains, then keeps the instances whose positive body is made
/// of possibly derivable atoms.
pub fn ground_naive(tp: &TypedProgram, table: &SortTable) -> Result<GroundProgram, GroundError> {
    let rules = compile_program(tp, table);
    let mut total = Cardinality::Exact(0);
    for r in &rules {
        let n = r.domains.iter().try_fold(1u128, |a, d| d.cardinality().exact().and_then(|c| a.checked_mul(c)));
        total = match (total, n) {
            (Cardinality::Exact(t), Some(n)) => t.checked_add(n).map_or(Cardinality::Large, Cardinality::Exact),
            _ => Cardinality::Large,
        };
    }
    if total.exceeds(NAIVE_INSTANCE_BOUND) {
        return Err(GroundError::NaiveBoundExceeded {
            bound: NAIVE_INSTANCE_BOUND,
            count: total,
        });
    }

    let mut candidates: Vec<LitRule> = Vec::new();
    for r in &rules {
        let lists: Vec<Vec<Value>> = r.domains.iter().map(|d| d.elements()).collect();
        for tuple in cartesian(&lists) {
            let b: Vec<Option<Value>> = tuple.into_iter().map(Some).collect();
            if let Some(inst) = r.instance(&b)? {
                candidates.push(inst);
            }
        }
    }

    let mut possible: HashSet<GroundLiteral> = HashSet::new();
    loop {
        let before = possible.len();
        for c in &candidates {
            if c.pos.iter().all(|l| possible.contains(l)) {
                possible.extend(c.head.iter().cloned());
            }
        }
        if possible.len() == before {
            break;
        }
    }
    candidates.retain(|c| c.pos.iter().all(|l| possible.contains(l)));
    Ok(GroundProgram::build(candidates))
}

#[cfg(test)]
mod tests {
    use super::super::tests::prepare;
    use super::super::{ground, GroundLimits};
    use super::*;

    const TRIANGLE: &str = "
sorts
  #color = {red, green, blue}.
  #state = {s1, s2, s3}.
predicates
  neighbor(#state, #state).
  ofColor(#state, #color).
rules
  neighbor(s1, s2). neighbor(s2, s3). neighbor(s1, s3).
  neighbor(S1, S2) :- neighbor(S2, S1).
  ofColor(S, red) | ofColor(S, green) | ofColor(S, blue).
  :- ofColor(S, C1), ofColor(S, C2), C1 != C2.
  :- ofColor(S1, C), ofColor(S2, C), neighbor(S1, S2).
";

    #[test]
    fn triangle_agrees_with_join_grounding() {
        let (tp, t) = prepare(TRIANGLE);
        let naive = ground_naive(&tp, &t).unwrap();
        let smart = ground(&tp, &t, &GroundLimits::default()).unwrap();
        assert_eq!(naive.rule_set(), smart.rule_set());
        let disjunctive = naive.rules.iter().filter(|r| r.head.len() == 3).count();
        assert_eq!(disjunctive, 3);
        // 3 states x 6 ordered color pairs collapse to 3 x 3 unordered ones;
        // 6 ordered neighbor pairs x 3 colors stay distinct.
        let constraints = naive.rules.iter().filter(|r| r.head.is_empty()).count();
        assert_eq!(constraints, 9 + 18);
    }

    #[test]
    fn empty_rules_section() {
        let (tp, t) = prepare("sorts #s = {a}. predicates p(#s). rules");
        let g = ground_naive(&tp, &t).unwrap();
        assert!(g.rules.is_empty() && g.atoms().is_empty());
    }

    #[test]
    fn refuses_large_products() {
        let (tp, t) = prepare("sorts #s = 1..1000. predicates p(#s, #s). rules p(X, Y).");
        assert!(matches!(ground_naive(&tp, &t), Err(GroundError::NaiveBoundExceeded { .. })));
    }
}
