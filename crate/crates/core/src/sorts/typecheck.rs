//! Checks atoms against predicate declarations and infers variable domains.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{term_value, Den, SortTable};
use crate::syntax::{BodyElement, Builtin, Literal, Pos, Program, Query, RelOp, Rule, Term};
use crate::syntax::format_term;

/// Where a sort requirement comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Site {
    Argument { pred: String, index: usize },
    Arithmetic,
    Comparison(RelOp),
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Argument { pred, index } => write!(f, "argument {index} of {pred}"),
            Site::Arithmetic => f.write_str("arithmetic expression"),
            Site::Comparison(op) => write!(f, "comparison `{}`", op.symbol()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("{pos}: predicate {pred}/{arity} is not declared")]
    UndeclaredPredicate { pred: String, arity: usize, pos: Pos },
    #[error("{pos}: {pred} takes {expected} argument(s) but is given {found}")]
    ArityMismatch { pred: String, expected: usize, found: usize, pos: Pos },
    #[error("{pos}: {site}: `{term}` is not in {expected}")]
    SortMismatch { site: Site, term: String, expected: String, pos: Pos },
    #[error("{pos}: variable {var} does not occur in any atom, so its sort is unknown")]
    UnsortableVariable { var: String, pos: Pos },
    #[error("{pos}: variable {var} occurs at positions of disjoint sorts {}", .sorts.join(", "))]
    ConflictingVariableSorts { var: String, sorts: Vec<String>, pos: Pos },
    #[error("{pos}: declaration of {pred} uses unknown sort #{sort}")]
    UnknownSort { pred: String, sort: String, pos: Pos },
    #[error("{pos}: predicate {pred} is declared again with different argument sorts")]
    DuplicatePredicate { pred: String, pos: Pos },
}

/// The domain of one rule variable: the intersection of the sorts of all
/// argument positions it occupies.
#[derive(Clone, Debug)]
pub struct VarDomain {
    pub name: String,
    /// Descriptions of the contributing sorts, e.g. `#frame`.
    pub sorts: Vec<String>,
    pub den: Arc<Den>,
}

#[derive(Clone, Debug)]
pub struct TypedRule {
    /// The rule with `#const` names replaced by their values.
    pub rule: Rule,
    /// Variables in order of first occurrence.
    pub vars: Vec<VarDomain>,
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: Program,
    /// Predicate name to argument sort names.
    pub predicates: BTreeMap<String, Vec<String>>,
    pub rules: Vec<TypedRule>,
}

#[derive(Clone, Debug)]
pub struct TypedQuery {
    pub literal: Literal,
    pub vars: Vec<VarDomain>,
}

impl TypedProgram {
    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }
}

fn subst_consts(t: &Term, consts: &std::collections::HashMap<String, i64>) -> Term {
    match t {
        Term::Const(c) => consts.get(c).map_or_else(|| t.clone(), |n| Term::Int(*n)),
        Term::Func(n, args) => Term::Func(n.clone(), args.iter().map(|a| subst_consts(a, consts)).collect()),
        Term::Binary(op, l, r) => Term::Binary(*op, Box::new(subst_consts(l, consts)), Box::new(subst_consts(r, consts))),
        Term::Neg(inner) => Term::Neg(Box::new(subst_consts(inner, consts))),
        Term::Int(_) | Term::Var(_) => t.clone(),
    }
}

fn subst_literal(l: &Literal, consts: &std::collections::HashMap<String, i64>) -> Literal {
    Literal {
        args: l.args.iter().map(|a| subst_consts(a, consts)).collect(),
        ..l.clone()
    }
}

fn subst_rule(r: &Rule, consts: &std::collections::HashMap<String, i64>) -> Rule {
    Rule {
        head: r.head.iter().map(|l| subst_literal(l, consts)).collect(),
        body: r
            .body
            .iter()
            .map(|b| match b {
                BodyElement::Literal(l) => BodyElement::Literal(subst_literal(l, consts)),
                BodyElement::Naf(l) => BodyElement::Naf(subst_literal(l, consts)),
                BodyElement::Builtin(b) => BodyElement::Builtin(Builtin {
                    lhs: subst_consts(&b.lhs, consts),
                    rhs: subst_consts(&b.rhs, consts),
                    ..b.clone()
                }),
            })
            .collect(),
        pos: r.pos,
    }
}

struct Checker<'a> {
    table: &'a SortTable,
    predicates: &'a BTreeMap<String, Vec<String>>,
    errors: Vec<TypeError>,
}

/// Sort requirements collected for the variables of one rule or query.
#[derive(Default)]
struct Constraints {
    sorts: BTreeMap<String, Vec<(Arc<Den>, String)>>,
    numeric: BTreeMap<String, Site>,
}

impl Checker<'_> {
    fn describe(&self, den: &Arc<Den>) -> Option<String> {
        self.table
            .names()
            .find(|n| {
                let d = self.table.den(n).unwrap();
                Arc::ptr_eq(d, den) || **d == **den
            })
            .map(|n| format!("#{n}"))
    }

    fn literal(&mut self, l: &Literal, c: &mut Constraints) {
        let Some(sorts) = self.predicates.get(&l.pred) else {
            self.errors.push(TypeError::UndeclaredPredicate {
                pred: l.pred.clone(),
                arity: l.args.len(),
                pos: l.pos,
            });
            return;
        };
        if sorts.len() != l.args.len() {
            self.errors.push(TypeError::ArityMismatch {
                pred: l.pred.clone(),
                expected: sorts.len(),
                found: l.args.len(),
                pos: l.pos,
            });
            return;
        }
        for (i, (t, s)) in l.args.iter().zip(sorts).enumerate() {
            let Some(den) = self.table.den(s).cloned() else { continue };
            let site = Site::Argument {
                pred: l.pred.clone(),
                index: i + 1,
            };
            self.term(t, &den, format!("#{s}"), &site, l.pos, c);
        }
    }

    fn term(&mut self, t: &Term, den: &Arc<Den>, desc: String, site: &Site, pos: Pos, c: &mut Constraints) {
        match t {
            Term::Var(v) => c.sorts.entry(v.clone()).or_default().push((den.clone(), desc)),
            Term::Binary(..) | Term::Neg(_) => {
                if !den.has_ints() {
                    self.errors.push(TypeError::SortMismatch {
                        site: site.clone(),
                        term: format_term(t),
                        expected: desc,
                        pos,
                    });
                }
                let mut vars = Vec::new();
                t.variables(&mut vars);
                for v in vars {
                    c.numeric.entry(v).or_insert(Site::Arithmetic);
                }
            }
            Term::Func(name, args) if !t.is_ground() => {
                let products = den.record_products(name, args.len());
                if products.is_empty() {
                    self.errors.push(TypeError::SortMismatch {
                        site: site.clone(),
                        term: format_term(t),
                        expected: desc,
                        pos,
                    });
                    return;
                }
                for (j, a) in args.iter().enumerate() {
                    let comp = products[1..]
                        .iter()
                        .fold((*products[0][j]).clone(), |acc, p| acc.union(&p[j]));
                    let comp = if products.len() == 1 { products[0][j].clone() } else { Arc::new(comp) };
                    let desc = self
                        .describe(&comp)
                        .unwrap_or_else(|| format!("component {} of {name}", j + 1));
                    self.term(a, &comp, desc, site, pos, c);
                }
            }
            _ => {
                let Some(v) = term_value(t, self.table.consts()) else { return };
                if !den.member(&v) {
                    self.errors.push(TypeError::SortMismatch {
                        site: site.clone(),
                        term: v.to_string(),
                        expected: desc,
                        pos,
                    });
                }
            }
        }
    }

    fn builtin(&mut self, b: &Builtin, c: &mut Constraints) {
        if b.op.is_order() || b.lhs.is_arithmetic() || b.rhs.is_arithmetic() {
            let mut vars = Vec::new();
            b.lhs.variables(&mut vars);
            b.rhs.variables(&mut vars);
            for v in vars {
                c.numeric.entry(v).or_insert(Site::Comparison(b.op));
            }
        }
    }

    /// Turns the collected requirements into domains for `vars`.
    fn domains(&mut self, vars: &[String], c: &Constraints, pos: Pos) -> Vec<VarDomain> {
        let mut out = Vec::new();
        for v in vars {
            let Some(reqs) = c.sorts.get(v) else {
                self.errors.push(TypeError::UnsortableVariable { var: v.clone(), pos });
                continue;
            };
            let mut descs: Vec<String> = Vec::new();
            for (_, d) in reqs {
                if !descs.contains(d) {
                    descs.push(d.clone());
                }
            }
            let den = if reqs.len() == 1 {
                reqs[0].0.clone()
            } else {
                Arc::new(reqs[1..].iter().fold((*reqs[0].0).clone(), |acc, (d, _)| acc.intersect(d)))
            };
            if den.is_empty() {
                self.errors.push(TypeError::ConflictingVariableSorts {
                    var: v.clone(),
                    sorts: descs,
                    pos,
                });
                continue;
            }
            if let Some(site) = c.numeric.get(v) {
                if !den.has_ints() {
                    self.errors.push(TypeError::SortMismatch {
                        site: site.clone(),
                        term: v.clone(),
                        expected: "an integer sort".to_string(),
                        pos,
                    });
                    continue;
                }
            }
            out.push(VarDomain {
                name: v.clone(),
                sorts: descs,
                den,
            });
        }
        out
    }
}

fn rule_variables(r: &Rule) -> Vec<String> {
    let mut vars = Vec::new();
    for l in &r.head {
        l.variables(&mut vars);
    }
    for b in &r.body {
        match b {
            BodyElement::Literal(l) | BodyElement::Naf(l) => l.variables(&mut vars),
            BodyElement::Builtin(b) => {
                b.lhs.variables(&mut vars);
                b.rhs.variables(&mut vars);
            }
        }
    }
    vars
}

fn collect_predicates(program: &Program, table: &SortTable, errors: &mut Vec<TypeError>) -> BTreeMap<String, Vec<String>> {
    let mut predicates: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for d in &program.predicates {
        for s in &d.args {
            if !table.contains(s) {
                errors.push(TypeError::UnknownSort {
                    pred: d.name.clone(),
                    sort: s.clone(),
                    pos: d.pos,
                });
            }
        }
        match predicates.get(&d.name) {
            Some(args) if *args != d.args => errors.push(TypeError::DuplicatePredicate {
                pred: d.name.clone(),
                pos: d.pos,
            }),
            Some(_) => {}
            None => {
                predicates.insert(d.name.clone(), d.args.clone());
            }
        }
    }
    predicates
}

/// Checks every rule of a preprocessed program and assigns each variable
/// its domain.
pub fn typecheck(program: &Program, table: &SortTable) -> Result<TypedProgram, Vec<TypeError>> {
    let mut errors = Vec::new();
    let predicates = collect_predicates(program, table, &mut errors);
    let mut checker = Checker {
        table,
        predicates: &predicates,
        errors,
    };
    let mut rules = Vec::new();
    for r in &program.rules {
        let rule = subst_rule(r, table.consts());
        let mut c = Constraints::default();
        for l in &rule.head {
            checker.literal(l, &mut c);
        }
        for b in &rule.body {
            match b {
                BodyElement::Literal(l) | BodyElement::Naf(l) => checker.literal(l, &mut c),
                BodyElement::Builtin(b) => checker.builtin(b, &mut c),
            }
        }
        let vars = checker.domains(&rule_variables(&rule), &c, rule.pos);
        rules.push(TypedRule { rule, vars });
    }
    let errors = checker.errors;
    if errors.is_empty() {
        Ok(TypedProgram {
            program: program.clone(),
            predicates,
            rules,
        })
    } else {
        Err(errors)
    }
}

/// Checks a query literal against the program's declarations.
pub fn typecheck_query(query: &Query, program: &TypedProgram, table: &SortTable) -> Result<TypedQuery, Vec<TypeError>> {
    let mut checker = Checker {
        table,
        predicates: &program.predicates,
        errors: Vec::new(),
    };
    let literal = subst_literal(&query.literal, table.consts());
    let mut c = Constraints::default();
    checker.literal(&literal, &mut c);
    let mut vars = Vec::new();
    literal.variables(&mut vars);
    let vars = if checker.errors.is_empty() {
        checker.domains(&vars, &c, literal.pos)
    } else {
        Vec::new()
    };
    if checker.errors.is_empty() {
        Ok(TypedQuery { literal, vars })
    } else {
        Err(checker.errors)
    }
}
