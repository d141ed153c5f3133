//! Instantiation of typed rules into a variable-free program.
//!
//! [`ground`] first computes the set of atoms that can possibly be derived,
//! joining positive body literals against it, and keeps only rule instances
//! whose positive body lies within that set. [`ground_naive`] builds the same
//! program from the full cross product of variable domains and serves as a
//! test oracle.

mod compile;
mod naive;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use crate::sorts::{Cardinality, SortTable, TypedProgram, DEFAULT_ENUMERATION_GUARD};
use crate::syntax::Pos;
use crate::value::{GroundLiteral, Value};

use compile::{compile_program, unify, CLit, CRule, LitRule};
pub use naive::{ground_naive, NAIVE_INSTANCE_BOUND};

pub type AtomId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundRule {
    /// Disjunctive head; empty for a constraint.
    pub head: Vec<AtomId>,
    pub pos: Vec<AtomId>,
    /// Default-negated body atoms.
    pub neg: Vec<AtomId>,
}

/// A variable-free program over a numbered Herbrand base. Atoms are sorted
/// by predicate name and arguments, so ids follow the literal order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    atoms: Vec<GroundLiteral>,
    index: HashMap<GroundLiteral, AtomId>,
    pub rules: Vec<GroundRule>,
}

/// One rule as sets of literals, for order-insensitive comparison.
pub type LiteralRule = (BTreeSet<GroundLiteral>, BTreeSet<GroundLiteral>, BTreeSet<GroundLiteral>);

impl GroundProgram {
    /// Builds a program from literal rules, numbering every literal that
    /// occurs in them. Duplicate rules are kept once, first occurrence wins.
    pub fn from_rules<I>(rules: I) -> GroundProgram
    where
        I: IntoIterator<Item = (Vec<GroundLiteral>, Vec<GroundLiteral>, Vec<GroundLiteral>)>,
    {
        let rules: Vec<LitRule> = rules.into_iter().map(|(head, pos, neg)| LitRule { head, pos, neg }).collect();
        Self::build(rules)
    }

    fn build(rules: Vec<LitRule>) -> GroundProgram {
        let mut atoms: Vec<GroundLiteral> = rules
            .iter()
            .flat_map(|r| r.head.iter().chain(&r.pos).chain(&r.neg))
            .cloned()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        atoms.sort();
        let index: HashMap<GroundLiteral, AtomId> = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i as AtomId)).collect();
        let ids = |ls: &[GroundLiteral]| {
            let mut v: Vec<AtomId> = ls.iter().map(|l| index[l]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(rules.len());
        for r in &rules {
            let g = GroundRule {
                head: ids(&r.head),
                pos: ids(&r.pos),
                neg: ids(&r.neg),
            };
            if seen.insert(g.clone()) {
                out.push(g);
            }
        }
        GroundProgram { atoms, index, rules: out }
    }

    /// The Herbrand base: every literal occurring in some rule, in order.
    pub fn atoms(&self) -> &[GroundLiteral] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &GroundLiteral {
        &self.atoms[id as usize]
    }

    pub fn id_of(&self, l: &GroundLiteral) -> Option<AtomId> {
        self.index.get(l).copied()
    }

    pub fn literal_rule(&self, r: &GroundRule) -> LiteralRule {
        let set = |ids: &[AtomId]| ids.iter().map(|&i| self.atom(i).clone()).collect();
        (set(&r.head), set(&r.pos), set(&r.neg))
    }

    pub fn rule_set(&self) -> BTreeSet<LiteralRule> {
        self.rules.iter().map(|r| self.literal_rule(r)).collect()
    }

    pub fn format_rule(&self, r: &GroundRule) -> String {
        let names = |ids: &[AtomId]| ids.iter().map(|&i| self.atom(i).to_string()).collect::<Vec<_>>();
        let head = names(&r.head).join(" | ");
        let mut body = names(&r.pos);
        body.extend(r.neg.iter().map(|&i| format!("not {}", self.atom(i))));
        match (head.is_empty(), body.is_empty()) {
            (_, true) => format!("{head}."),
            (true, false) => format!(":- {}.", body.join(", ")),
            (false, false) => format!("{head} :- {}.", body.join(", ")),
        }
    }
}

/// Text dump, one rule per line.
impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", self.format_rule(r))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundLimits {
    pub max_rules: usize,
    /// Largest variable domain that may be enumerated.
    pub enumeration_guard: u128,
    /// Grounding stops with [`GroundError::Timeout`] once this passes.
    pub deadline: Option<Instant>,
}

pub const DEFAULT_MAX_GROUND_RULES: usize = 5_000_000;

impl Default for GroundLimits {
    fn default() -> Self {
        GroundLimits {
            max_rules: DEFAULT_MAX_GROUND_RULES,
            enumeration_guard: DEFAULT_ENUMERATION_GUARD,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("grounding produced more than {limit} rules")]
    GroundSizeExceeded { limit: usize },
    #[error("{pos}: division by zero")]
    DivisionByZero { pos: Pos },
    #[error("{pos}: variable {var} ranges over {cardinality} values, more than the limit of {guard}")]
    EnumerationRefused { var: String, cardinality: Cardinality, guard: u128, pos: Pos },
    #[error("the naive grounder handles at most {bound} rule instances, this program has {count}")]
    NaiveBoundExceeded { bound: u128, count: Cardinality },
    #[error("grounding did not finish before the deadline")]
    Timeout,
}

type Args = Arc<[Value]>;

#[derive(Default)]
struct PredAtoms {
    /// Argument tuples with the round in which they became possible.
    all: Vec<(Args, u32)>,
    by_first: HashMap<Key, Vec<usize>>,
}

/// A coarse key of a value used to index atoms by first argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Int(i64),
    Sym(Arc<str>),
    Func(Arc<str>, usize),
}

fn key_of(v: &Value) -> Key {
    match v {
        Value::Int(n) => Key::Int(*n),
        Value::Sym(s) => Key::Sym(s.clone()),
        Value::Func(n, a) => Key::Func(n.clone(), a.len()),
    }
}

fn pattern_key(t: &compile::CTerm, b: &[Option<Value>]) -> Option<Key> {
    use compile::CTerm;
    match t {
        CTerm::Val(v) => Some(key_of(v)),
        CTerm::Var(i) => b[*i].as_ref().map(key_of),
        CTerm::Func(n, args) => Some(Key::Func(n.clone(), args.len())),
        CTerm::Bin(..) | CTerm::Neg(_) => None,
    }
}

/// The possible atoms found so far, indexed by predicate and polarity.
#[derive(Default)]
struct Store {
    preds: HashMap<(Arc<str>, bool), PredAtoms>,
    stamps: HashMap<GroundLiteral, u32>,
}

impl Store {
    fn insert(&mut self, l: GroundLiteral, round: u32) -> bool {
        if self.stamps.contains_key(&l) {
            return false;
        }
        self.stamps.insert(l.clone(), round);
        let p = self.preds.entry((l.pred.clone(), l.negated)).or_default();
        if let Some(first) = l.args.first() {
            p.by_first.entry(key_of(first)).or_default().push(p.all.len());
        }
        p.all.push((l.args, round));
        true
    }

    fn contains_before(&self, l: &GroundLiteral, round: u32) -> bool {
        self.stamps.get(l).is_some_and(|&r| r < round)
    }
}

struct Grounder<'a> {
    rules: &'a [CRule],
    limits: GroundLimits,
    store: Store,
    /// Instances per rule, keyed by their substitution.
    found: Vec<BTreeMap<Vec<Value>, LitRule>>,
    count: usize,
    ticks: u32,
    new_atoms: Vec<GroundLiteral>,
}

impl Grounder<'_> {
    /// Joins the positive body of rule `ri` in round `round`. Literal
    /// `delta` (if any) only matches atoms of the previous round; the others
    /// match any atom from earlier rounds.
    fn join(&mut self, ri: usize, round: u32, delta: Option<usize>) -> Result<(), GroundError> {
        let rule = &self.rules[ri];
        let mut binding: Vec<Option<Value>> = vec![None; rule.var_names.len()];
        let mut order: Vec<usize> = (0..rule.pos.len()).collect();
        if let Some(d) = delta {
            order.retain(|&i| i != d);
            order.insert(0, d);
        }
        self.descend(ri, round, delta, &order, 0, &mut binding)
    }

    fn descend(
        &mut self,
        ri: usize,
        round: u32,
        delta: Option<usize>,
        order: &[usize],
        depth: usize,
        b: &mut Vec<Option<Value>>,
    ) -> Result<(), GroundError> {
        let rules = self.rules;
        let rule = &rules[ri];
        if depth == order.len() {
            return self.complete(ri, round, b);
        }
        let li = order[depth];
        let lit: &CLit = &rule.pos[li];
        let Some(pa) = self.store.preds.get(&(lit.pred.clone(), lit.negated)) else {
            return Ok(());
        };
        let candidates: Vec<(Args, u32)> = match lit.args.first().and_then(|t| pattern_key(t, b)) {
            Some(k) => pa
                .by_first
                .get(&k)
                .map(|ix| ix.iter().map(|&i| pa.all[i].clone()).collect())
                .unwrap_or_default(),
            None => pa.all.clone(),
        };
        let mut trail = Vec::new();
        for (args, stamp) in candidates {
            let ok_round = if Some(li) == delta { stamp + 1 == round } else { stamp < round };
            if !ok_round {
                continue;
            }
            let matched = lit.args.iter().zip(args.iter()).all(|(t, v)| unify(t, v, b, &mut trail));
            if matched {
                self.descend(ri, round, delta, order, depth + 1, b)?;
            }
            for i in trail.drain(..) {
                b[i] = None;
            }
        }
        Ok(())
    }

    /// Binds the remaining variables and records every surviving instance.
    fn complete(&mut self, ri: usize, round: u32, b: &mut [Option<Value>]) -> Result<(), GroundError> {
        let rule = &self.rules[ri];
        let mut b = b.to_vec();
        if !rule.propagate_assignments(&mut b)? {
            return Ok(());
        }
        let free: Vec<usize> = (0..b.len()).filter(|&i| b[i].is_none()).collect();
        let mut lists = Vec::with_capacity(free.len());
        for &i in &free {
            let d = &rule.domains[i];
            let card = d.cardinality();
            if card.exceeds(self.limits.enumeration_guard) {
                return Err(GroundError::EnumerationRefused {
                    var: rule.var_names[i].clone(),
                    cardinality: card,
                    guard: self.limits.enumeration_guard,
                    pos: rule.at,
                });
            }
            lists.push(d.elements());
        }
        self.enumerate_free(ri, round, &free, &lists, 0, &mut b)
    }

    fn enumerate_free(
        &mut self,
        ri: usize,
        round: u32,
        free: &[usize],
        lists: &[Vec<Value>],
        depth: usize,
        b: &mut Vec<Option<Value>>,
    ) -> Result<(), GroundError> {
        if depth == free.len() {
            return self.record(ri, round, b);
        }
        for v in &lists[depth] {
            b[free[depth]] = Some(v.clone());
            self.enumerate_free(ri, round, free, lists, depth + 1, b)?;
        }
        b[free[depth]] = None;
        Ok(())
    }

    fn record(&mut self, ri: usize, round: u32, b: &[Option<Value>]) -> Result<(), GroundError> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(4096) && self.limits.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(GroundError::Timeout);
        }
        let rule = &self.rules[ri];
        let Some(inst) = rule.instance(b)? else { return Ok(()) };
        if !inst.pos.iter().all(|l| self.store.contains_before(l, round)) {
            return Ok(());
        }
        let subst: Vec<Value> = b.iter().map(|v| v.clone().unwrap()).collect();
        if self.found[ri].contains_key(&subst) {
            return Ok(());
        }
        self.count += 1;
        if self.count > self.limits.max_rules {
            return Err(GroundError::GroundSizeExceeded {
                limit: self.limits.max_rules,
            });
        }
        self.new_atoms.extend(inst.head.iter().cloned());
        self.found[ri].insert(subst, inst);
        Ok(())
    }
}

/// Grounds a typed program. Output rules are ordered by rule index, then by
/// substitution, with duplicates removed.
pub fn ground(tp: &TypedProgram, table: &SortTable, limits: &GroundLimits) -> Result<GroundProgram, GroundError> {
    let rules = compile_program(tp, table);
    let mut g = Grounder {
        rules: &rules,
        limits: *limits,
        store: Store::default(),
        found: vec![BTreeMap::new(); rules.len()],
        count: 0,
        ticks: 0,
        new_atoms: Vec::new(),
    };
    let mut round = 0u32;
    loop {
        for (ri, rule) in rules.iter().enumerate() {
            let n = rule.pos.len();
            if round == 0 {
                if n == 0 {
                    g.join(ri, round, None)?;
                }
            } else {
                for d in 0..n {
                    g.join(ri, round, Some(d))?;
                }
            }
        }
        let mut added = false;
        for l in std::mem::take(&mut g.new_atoms) {
            added |= g.store.insert(l, round);
        }
        if !added {
            break;
        }
        round += 1;
    }
    Ok(GroundProgram::build(g.found.into_iter().flat_map(|m| m.into_values()).collect()))
}
