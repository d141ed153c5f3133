//! Stability checking by reduct and minimal-model test, and the brute-force
//! oracle built on it.

use std::collections::BTreeSet;

use super::{AnswerSet, SolveError};
use crate::ground::{AtomId, GroundProgram};
use crate::value::GroundLiteral;

/// Largest Herbrand base [`brute_force_answer_sets`] accepts.
pub const BRUTE_FORCE_MAX_ATOMS: usize = 20;

/// True iff `candidate` is an answer set of `program`: consistent, a model,
/// and a minimal model of the reduct of `program` with respect to it.
pub fn is_stable(program: &GroundProgram, candidate: &BTreeSet<GroundLiteral>) -> bool {
    let mut in_m = vec![false; program.atoms().len()];
    for l in candidate {
        match program.id_of(l) {
            Some(id) => in_m[id as usize] = true,
            None => return false,
        }
    }
    is_stable_ids(program, &in_m)
}

pub(crate) fn is_stable_ids(program: &GroundProgram, in_m: &[bool]) -> bool {
    let m = |a: &AtomId| in_m[*a as usize];
    for (i, a) in program.atoms().iter().enumerate() {
        if in_m[i] && a.negated {
            if let Some(c) = program.id_of(&a.contrary()) {
                if m(&c) {
                    return false;
                }
            }
        }
    }
    // Model check.
    for r in &program.rules {
        let body = r.pos.iter().all(m) && !r.neg.iter().any(m);
        if body && !r.head.iter().any(m) {
            return false;
        }
    }
    is_minimal(program, in_m)
}

/// Clauses over the atoms of M: a model of the reduct strictly inside M
/// exists iff they are satisfiable together with "some atom of M is false".
fn is_minimal(program: &GroundProgram, in_m: &[bool]) -> bool {
    let members: Vec<AtomId> = (0..in_m.len() as AtomId).filter(|&a| in_m[a as usize]).collect();
    if members.is_empty() {
        return true;
    }
    let mut local = vec![usize::MAX; in_m.len()];
    for (i, &a) in members.iter().enumerate() {
        local[a as usize] = i;
    }
    // (body atoms, head atoms), both as local indices, for reduct rules whose
    // positive body lies inside M.
    let mut clauses: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut horn = true;
    for r in &program.rules {
        if r.neg.iter().any(|a| in_m[*a as usize]) || !r.pos.iter().all(|a| in_m[*a as usize]) {
            continue;
        }
        let head: Vec<usize> = r.head.iter().filter(|a| in_m[**a as usize]).map(|a| local[*a as usize]).collect();
        horn &= head.len() <= 1;
        clauses.push((r.pos.iter().map(|a| local[*a as usize]).collect(), head));
    }
    if horn {
        return least_model_size(members.len(), &clauses) == members.len();
    }
    !smaller_model_exists(members.len(), &clauses)
}

fn least_model_size(n: usize, clauses: &[(Vec<usize>, Vec<usize>)]) -> usize {
    let mut in_lm = vec![false; n];
    let mut count = 0;
    loop {
        let mut changed = false;
        for (body, head) in clauses {
            if let [h] = head[..] {
                if !in_lm[h] && body.iter().all(|&b| in_lm[b]) {
                    in_lm[h] = true;
                    count += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return count;
        }
    }
}

/// DPLL over propositional clauses `body -> head` plus the clause requiring
/// at least one variable to be false.
fn smaller_model_exists(n: usize, clauses: &[(Vec<usize>, Vec<usize>)]) -> bool {
    // Literals: (var, value). A clause is satisfied if any literal holds.
    let mut cls: Vec<Vec<(usize, bool)>> = clauses
        .iter()
        .map(|(body, head)| body.iter().map(|&b| (b, false)).chain(head.iter().map(|&h| (h, true))).collect())
        .collect();
    cls.push((0..n).map(|v| (v, false)).collect());
    let mut assign: Vec<Option<bool>> = vec![None; n];
    dpll(&cls, &mut assign)
}

fn dpll(cls: &[Vec<(usize, bool)>], assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    let ok = loop {
        let mut unit = None;
        let mut conflict = false;
        for c in cls {
            let mut open = None;
            let mut n_open = 0;
            let mut sat = false;
            for &(v, val) in c {
                match assign[v] {
                    Some(x) if x == val => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        n_open += 1;
                        open = Some((v, val));
                    }
                }
            }
            if sat {
                continue;
            }
            if n_open == 0 {
                conflict = true;
                break;
            }
            if n_open == 1 {
                unit = open;
                break;
            }
        }
        if conflict {
            break false;
        }
        match unit {
            Some((v, val)) => {
                assign[v] = Some(val);
                trail.push(v);
            }
            None => break true,
        }
    };
    let result = ok
        && match assign.iter().position(Option::is_none) {
            None => true,
            Some(v) => [false, true].into_iter().any(|val| {
                assign[v] = Some(val);
                let r = dpll(cls, assign);
                assign[v] = None;
                r
            }),
        };
    for v in trail {
        assign[v] = None;
    }
    result
}

/// All answer sets, found by testing every subset of the Herbrand base.
pub fn brute_force_answer_sets(program: &GroundProgram) -> Result<Vec<AnswerSet>, SolveError> {
    let n = program.atoms().len();
    if n > BRUTE_FORCE_MAX_ATOMS {
        return Err(SolveError::BruteForceBound {
            atoms: n,
            bound: BRUTE_FORCE_MAX_ATOMS,
        });
    }
    let mut out = Vec::new();
    let mut in_m = vec![false; n];
    for mask in 0u64..(1u64 << n) {
        for (i, slot) in in_m.iter_mut().enumerate() {
            *slot = mask & (1 << i) != 0;
        }
        if is_stable_ids(program, &in_m) {
            out.push(AnswerSet::from_ids(program, &in_m));
        }
    }
    out.sort();
    Ok(out)
}
