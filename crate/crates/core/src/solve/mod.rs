//! Answer-set enumeration.
//!
//! The search assigns atoms true or false, propagating after each decision:
//! rules whose body holds force their head, rules whose head fails force
//! their body false, a literal excludes its contrary, and atoms without any
//! rule that could still derive them are set false. On stratified programs
//! propagation alone decides every atom, so no branching happens. Every total
//! assignment is confirmed with [`is_stable`] before it is reported.

mod stable;

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::ground::{AtomId, GroundProgram, DEFAULT_MAX_GROUND_RULES};
use crate::value::GroundLiteral;

pub use stable::{brute_force_answer_sets, is_stable, BRUTE_FORCE_MAX_ATOMS};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(20);
pub const MAX_TIMEOUT: Duration = Duration::from_secs(50);
pub const DEFAULT_MAX_ANSWER_SETS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    pub timeout: Duration,
    pub max_answer_sets: usize,
    pub max_ground_rules: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            timeout: DEFAULT_TIMEOUT,
            max_answer_sets: DEFAULT_MAX_ANSWER_SETS,
            max_ground_rules: DEFAULT_MAX_GROUND_RULES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("timed out after {} s", .limit.as_secs_f64())]
    Timeout { limit: Duration },
    #[error("there are too many answer sets (more than {cap})")]
    TooManyAnswerSets { cap: usize },
    #[error("the brute-force checker handles at most {bound} atoms, this program has {atoms}")]
    BruteForceBound { atoms: usize, bound: usize },
}

/// A stable model, as a sorted set of ground literals.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AnswerSet {
    pub literals: Vec<GroundLiteral>,
}

impl AnswerSet {
    pub fn new(literals: impl IntoIterator<Item = GroundLiteral>) -> Self {
        let set: BTreeSet<GroundLiteral> = literals.into_iter().collect();
        AnswerSet {
            literals: set.into_iter().collect(),
        }
    }

    pub(crate) fn from_ids(program: &GroundProgram, in_m: &[bool]) -> Self {
        AnswerSet {
            literals: (0..in_m.len())
                .filter(|&i| in_m[i])
                .map(|i| program.atom(i as AtomId).clone())
                .collect(),
        }
    }

    pub fn contains(&self, l: &GroundLiteral) -> bool {
        self.literals.binary_search(l).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundLiteral> {
        self.literals.iter()
    }

    pub fn to_set(&self) -> BTreeSet<GroundLiteral> {
        self.literals.iter().cloned().collect()
    }
}

/// `{l1, l2, ...}`
impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// All answer sets of `program`, sorted, or an error if the search exceeds
/// `limits.timeout` or finds more than `limits.max_answer_sets`.
pub fn answer_sets(program: &GroundProgram, limits: &SolveLimits) -> Result<Vec<AnswerSet>, SolveError> {
    answer_sets_until(program, limits.max_answer_sets, Instant::now() + limits.timeout, limits.timeout)
}

/// Like [`answer_sets`] with an absolute deadline; `limit` is the duration
/// reported on timeout.
pub fn answer_sets_until(
    program: &GroundProgram,
    cap: usize,
    deadline: Instant,
    limit: Duration,
) -> Result<Vec<AnswerSet>, SolveError> {
    let mut s = Search::new(program);
    let mut found: Vec<Vec<bool>> = Vec::new();
    let mut first = true;
    loop {
        let ok = s.propagate(first);
        first = false;
        if ok {
            match s.pick() {
                Some(a) => {
                    if Instant::now() >= deadline {
                        return Err(SolveError::Timeout { limit });
                    }
                    s.decide(a);
                    continue;
                }
                None => {
                    let m: Vec<bool> = s.value.iter().map(|&v| v == TRUE).collect();
                    if stable::is_stable_ids(program, &m) {
                        found.push(m);
                        if found.len() > cap {
                            return Err(SolveError::TooManyAnswerSets { cap });
                        }
                    }
                }
            }
        }
        if !s.backtrack() {
            break;
        }
    }
    let mut out: Vec<AnswerSet> = found.iter().map(|m| AnswerSet::from_ids(program, m)).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

const UNSET: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

struct Decision {
    atom: AtomId,
    trail_len: usize,
    flipped: bool,
}

struct Search<'p> {
    program: &'p GroundProgram,
    value: Vec<i8>,
    trail: Vec<AtomId>,
    decisions: Vec<Decision>,
    queue: Vec<AtomId>,
    /// Rules mentioning each atom anywhere.
    occurs: Vec<Vec<u32>>,
    contrary: Vec<Option<AtomId>>,
    conflict: bool,
}

impl<'p> Search<'p> {
    fn new(program: &'p GroundProgram) -> Self {
        let n = program.atoms().len();
        let mut occurs = vec![Vec::new(); n];
        for (ri, r) in program.rules.iter().enumerate() {
            for &a in r.head.iter().chain(&r.pos).chain(&r.neg) {
                let o: &mut Vec<u32> = &mut occurs[a as usize];
                if o.last() != Some(&(ri as u32)) {
                    o.push(ri as u32);
                }
            }
        }
        let contrary = program.atoms().iter().map(|a| program.id_of(&a.contrary())).collect();
        Search {
            program,
            value: vec![UNSET; n],
            trail: Vec::new(),
            decisions: Vec::new(),
            queue: Vec::new(),
            occurs,
            contrary,
            conflict: false,
        }
    }

    fn assign(&mut self, a: AtomId, v: i8) {
        match self.value[a as usize] {
            UNSET => {
                self.value[a as usize] = v;
                self.trail.push(a);
                self.queue.push(a);
            }
            cur if cur != v => self.conflict = true,
            _ => {}
        }
    }

    fn decide(&mut self, a: AtomId) {
        self.decisions.push(Decision {
            atom: a,
            trail_len: self.trail.len(),
            flipped: false,
        });
        self.assign(a, FALSE);
    }

    fn undo_to(&mut self, len: usize) {
        for a in self.trail.drain(len..) {
            self.value[a as usize] = UNSET;
        }
        self.queue.clear();
        self.conflict = false;
    }

    /// Flips the most recent decision not yet flipped.
    fn backtrack(&mut self) -> bool {
        while let Some(d) = self.decisions.pop() {
            self.undo_to(d.trail_len);
            if !d.flipped {
                self.decisions.push(Decision {
                    flipped: true,
                    ..d
                });
                self.assign(d.atom, TRUE);
                return true;
            }
        }
        false
    }

    fn pick(&self) -> Option<AtomId> {
        self.value.iter().position(|&v| v == UNSET).map(|i| i as AtomId)
    }

    fn check_rule(&mut self, ri: usize) {
        let r = &self.program.rules[ri];
        let v = |a: &AtomId| self.value[*a as usize];
        let mut body_false = false;
        let mut open_body: Option<(AtomId, i8)> = None;
        let mut n_open_body = 0;
        for a in &r.pos {
            match v(a) {
                FALSE => body_false = true,
                UNSET => {
                    n_open_body += 1;
                    open_body = Some((*a, FALSE));
                }
                _ => {}
            }
        }
        for a in &r.neg {
            match v(a) {
                TRUE => body_false = true,
                UNSET => {
                    n_open_body += 1;
                    open_body = Some((*a, TRUE));
                }
                _ => {}
            }
        }
        if body_false {
            return;
        }
        let mut head_true = false;
        let mut open_head = None;
        let mut n_open_head = 0;
        for a in &r.head {
            match v(a) {
                TRUE => head_true = true,
                UNSET => {
                    n_open_head += 1;
                    open_head = Some(*a);
                }
                _ => {}
            }
        }
        if head_true {
            return;
        }
        match (n_open_body, n_open_head) {
            (0, 0) => self.conflict = true,
            (0, 1) => self.assign(open_head.unwrap(), TRUE),
            (1, 0) => {
                let (a, val) = open_body.unwrap();
                self.assign(a, val);
            }
            _ => {}
        }
    }

    /// Sets false every atom that no rule with a possibly true body can
    /// derive from atoms that are themselves derivable.
    fn unfounded(&mut self) {
        let p = self.program;
        let n = p.atoms().len();
        let mut founded = vec![false; n];
        let mut missing: Vec<usize> = p.rules.iter().map(|r| r.pos.len()).collect();
        let blocked: Vec<bool> = p
            .rules
            .iter()
            .map(|r| {
                r.pos.iter().any(|a| self.value[*a as usize] == FALSE) || r.neg.iter().any(|a| self.value[*a as usize] == TRUE)
            })
            .collect();
        let mut stack: Vec<AtomId> = Vec::new();
        let support = |ri: usize, founded: &mut Vec<bool>, stack: &mut Vec<AtomId>| {
            for &h in &p.rules[ri].head {
                if !founded[h as usize] && self.value[h as usize] != FALSE {
                    founded[h as usize] = true;
                    stack.push(h);
                }
            }
        };
        for (ri, r) in p.rules.iter().enumerate() {
            if r.pos.is_empty() && !blocked[ri] {
                support(ri, &mut founded, &mut stack);
            }
        }
        while let Some(a) = stack.pop() {
            for &ri in &self.occurs[a as usize] {
                let ri = ri as usize;
                let r = &p.rules[ri];
                if blocked[ri] || !r.pos.contains(&a) {
                    continue;
                }
                missing[ri] -= 1;
                if missing[ri] == 0 {
                    support(ri, &mut founded, &mut stack);
                }
            }
        }
        for (a, ok) in founded.iter().enumerate() {
            if !ok {
                self.assign(a as AtomId, FALSE);
            }
        }
    }

    fn propagate(&mut self, full: bool) -> bool {
        if full {
            for ri in 0..self.program.rules.len() {
                self.check_rule(ri);
            }
        }
        loop {
            while let Some(a) = self.queue.pop() {
                if self.conflict {
                    return false;
                }
                if self.value[a as usize] == TRUE {
                    if let Some(c) = self.contrary[a as usize] {
                        self.assign(c, FALSE);
                    }
                }
                for i in 0..self.occurs[a as usize].len() {
                    let ri = self.occurs[a as usize][i] as usize;
                    self.check_rule(ri);
                }
            }
            if self.conflict {
                return false;
            }
            let before = self.trail.len();
            self.unfounded();
            if self.conflict {
                return false;
            }
            if self.trail.len() == before {
                return true;
            }
        }
    }
}
