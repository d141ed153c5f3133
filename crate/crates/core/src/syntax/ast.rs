//! Abstract syntax of SPARC programs and queries.
//!
//! Every statement-level node and every literal carries a [`Pos`]. Positions
//! are ignored by equality, hashing and ordering, so two programs compare
//! equal exactly when they have the same structure.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

/// A location in source text. Line and column are 1-based, the column counts
/// characters, and `offset` is a byte offset.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl Hash for Pos {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl PartialOrd for Pos {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pos {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A parsed SPARC program: directives followed by the three sections.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub consts: Vec<ConstDef>,
    pub includes: Vec<Include>,
    pub sorts: Vec<SortStmt>,
    pub predicates: Vec<PredicateDecl>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn const_value(&self, name: &str) -> Option<i64> {
        self.consts.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn sort_defs(&self) -> impl Iterator<Item = &SortDef> {
        self.sorts.iter().filter_map(|s| match s {
            SortStmt::Def(d) => Some(d),
            SortStmt::Extend(_) => None,
        })
    }
}

/// `#const name = value.`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstDef {
    pub name: String,
    pub value: i64,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IncludePath {
    /// `#include <name>`: searched among the shipped assets first.
    System(String),
    /// `#include "name"`: searched relative to the including file.
    Local(String),
}

impl IncludePath {
    pub fn name(&self) -> &str {
        match self {
            IncludePath::System(s) | IncludePath::Local(s) => s,
        }
    }
}

impl std::fmt::Display for IncludePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IncludePath::System(s) => write!(f, "<{s}>"),
            IncludePath::Local(s) => write!(f, "\"{s}\""),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Include {
    pub path: IncludePath,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SortStmt {
    Def(SortDef),
    Extend(SubsortDecl),
}

/// `#name = expr.` Sort names are stored without the leading `#`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SortDef {
    pub name: String,
    pub expr: SortExpr,
    pub pos: Pos,
}

/// `extend #name with expr.`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsortDecl {
    pub sort: String,
    pub expr: SortExpr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SortExpr {
    /// `{t1, ..., tn}` over ground terms.
    Enum(Vec<Term>),
    /// `lo..hi`, bounds possibly naming a `#const`.
    Range(Bound, Bound),
    /// `e1 + ... + en`, n >= 2.
    Union(Vec<SortExpr>),
    /// `name(#s1, ..., #sn)`, n >= 1.
    Record(String, Vec<String>),
    /// A reference to another sort, `#name`.
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Int(i64),
    Const(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredicateDecl {
    pub name: String,
    pub args: Vec<String>,
    pub pos: Pos,
}

/// `h1 | ... | hn :- b1, ..., bm.` An empty head is a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Vec<Literal>,
    pub body: Vec<BodyElement>,
    pub pos: Pos,
}

impl Rule {
    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BodyElement {
    Literal(Literal),
    /// `not l`
    Naf(Literal),
    Builtin(Builtin),
}

/// An atom `p(t1, ..., tn)`, possibly classically negated (`-p(...)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub negated: bool,
    pub pred: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

impl Literal {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        for t in &self.args {
            t.variables(out);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Neq => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn is_order(self) -> bool {
        !matches!(self, RelOp::Eq | RelOp::Neq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Builtin {
    pub op: RelOp,
    pub lhs: Term,
    pub rhs: Term,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> char {
        match self {
            ArithOp::Add => '+',
            ArithOp::Sub => '-',
            ArithOp::Mul => '*',
            ArithOp::Div => '/',
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Const(String),
    Var(String),
    /// A record term `name(t1, ..., tn)`.
    Func(String, Vec<Term>),
    Binary(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Int(_) | Term::Const(_) => true,
            Term::Var(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            Term::Binary(_, l, r) => l.is_ground() && r.is_ground(),
            Term::Neg(t) => t.is_ground(),
        }
    }

    pub fn is_arithmetic(&self) -> bool {
        matches!(self, Term::Binary(..) | Term::Neg(_))
    }

    /// Appends the variables of this term in order of first occurrence.
    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Int(_) | Term::Const(_) => {}
            Term::Func(_, args) => args.iter().for_each(|a| a.variables(out)),
            Term::Binary(_, l, r) => {
                l.variables(out);
                r.variables(out);
            }
            Term::Neg(t) => t.variables(out),
        }
    }
}

/// A query: a single, possibly non-ground, literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub literal: Literal,
}
