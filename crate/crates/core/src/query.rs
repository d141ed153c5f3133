//! Cautious query answering over all answer sets.
//!
//! A ground literal is answered `yes` if it belongs to every answer set,
//! `no` if its contrary does, and `unknown` otherwise. A program without
//! answer sets answers `unknown` and is flagged inconsistent.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::solve::AnswerSet;
use crate::sorts::{cartesian, Cardinality, SortTable, TypedProgram, TypedQuery, DEFAULT_ENUMERATION_GUARD};
use crate::syntax::Term;
use crate::value::{GroundLiteral, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        })
    }
}

/// One substitution for the query's variables, in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binding(pub Vec<(String, Value)>);

impl Serialize for Binding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, &v.to_string())?;
        }
        m.end()
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QueryResult {
    Verdict { verdict: Verdict },
    Bindings { bindings: Vec<Binding> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryAnswer {
    #[serde(flatten)]
    pub result: QueryResult,
    /// Set when the program has no answer sets.
    pub inconsistent: bool,
}

pub const INCONSISTENT_NOTICE: &str = "the program is inconsistent: it has no answer sets";
pub const NO_BINDINGS: &str = "no bindings satisfy the query";

/// `yes` / `no` / `unknown`, or one `X = a, Y = b` line per binding,
/// followed by a notice line for inconsistent programs.
impl fmt::Display for QueryAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.result {
            QueryResult::Verdict { verdict } => writeln!(f, "{verdict}")?,
            QueryResult::Bindings { bindings } if bindings.is_empty() => writeln!(f, "{NO_BINDINGS}")?,
            QueryResult::Bindings { bindings } => {
                for b in bindings {
                    writeln!(f, "{b}")?;
                }
            }
        }
        if self.inconsistent {
            writeln!(f, "{INCONSISTENT_NOTICE}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("the query's variables range over {cardinality} combinations, more than the limit of {guard}")]
    EnumerationRefused { cardinality: Cardinality, guard: u128 },
    #[error("arithmetic is not supported in queries")]
    Arithmetic,
}

/// The cautious verdict for a ground literal. Zero answer sets give
/// `Unknown`; callers flag the program as inconsistent.
pub fn answer_ground_query(sets: &[AnswerSet], l: &GroundLiteral) -> Verdict {
    if sets.is_empty() {
        return Verdict::Unknown;
    }
    if sets.iter().all(|s| s.contains(l)) {
        return Verdict::Yes;
    }
    let c = l.contrary();
    if sets.iter().all(|s| s.contains(&c)) {
        return Verdict::No;
    }
    Verdict::Unknown
}

fn substitute(t: &Term, vars: &[String], vals: &[Value]) -> Result<Value, QueryError> {
    Ok(match t {
        Term::Int(n) => Value::Int(*n),
        Term::Const(c) => Value::sym(c),
        Term::Var(v) => vals[vars.iter().position(|x| x == v).expect("typed variable")].clone(),
        Term::Func(name, args) => {
            let args: Result<Vec<Value>, QueryError> = args.iter().map(|a| substitute(a, vars, vals)).collect();
            Value::Func(Arc::from(name.as_str()), Arc::from(args?))
        }
        Term::Binary(..) | Term::Neg(_) => return Err(QueryError::Arithmetic),
    })
}

/// Answers a typed query. Ground queries get a verdict; queries with
/// variables get every substitution from the variables' domains whose
/// instance is answered `yes`.
pub fn answer_query(
    sets: &[AnswerSet],
    query: &TypedQuery,
    program: &TypedProgram,
    table: &SortTable,
) -> Result<QueryAnswer, QueryError> {
    answer_query_with_guard(sets, query, program, table, DEFAULT_ENUMERATION_GUARD)
}

pub fn answer_query_with_guard(
    sets: &[AnswerSet],
    query: &TypedQuery,
    program: &TypedProgram,
    table: &SortTable,
    guard: u128,
) -> Result<QueryAnswer, QueryError> {
    let inconsistent = sets.is_empty();
    let lit = &query.literal;
    let names: Vec<String> = query.vars.iter().map(|v| v.name.clone()).collect();
    let instantiate = |vals: &[Value]| -> Result<GroundLiteral, QueryError> {
        let args: Result<Vec<Value>, QueryError> = lit.args.iter().map(|a| substitute(a, &names, vals)).collect();
        Ok(GroundLiteral::new(lit.negated, &lit.pred, args?))
    };
    if names.is_empty() {
        let verdict = answer_ground_query(sets, &instantiate(&[])?);
        return Ok(QueryAnswer {
            result: QueryResult::Verdict { verdict },
            inconsistent,
        });
    }

    let mut total: u128 = 1;
    for v in &query.vars {
        let c = v.den.cardinality();
        total = match c.exact().and_then(|c| total.checked_mul(c)) {
            Some(t) if t <= guard => t,
            _ => {
                return Err(QueryError::EnumerationRefused {
                    cardinality: c.exact().and_then(|c| total.checked_mul(c)).map_or(Cardinality::Large, Cardinality::Exact),
                    guard,
                })
            }
        };
    }
    let lists: Vec<Vec<Value>> = query.vars.iter().map(|v| v.den.elements()).collect();
    let mut bindings = Vec::new();
    if !inconsistent {
        for tuple in cartesian(&lists) {
            let g = instantiate(&tuple)?;
            let sorts = &program.predicates[&lit.pred];
            let well_sorted = g.args.iter().zip(sorts).all(|(v, s)| table.member(s, v).unwrap_or(false));
            if well_sorted && answer_ground_query(sets, &g) == Verdict::Yes {
                bindings.push(Binding(names.iter().cloned().zip(tuple).collect()));
            }
        }
    }
    Ok(QueryAnswer {
        result: QueryResult::Bindings { bindings },
        inconsistent,
    })
}
