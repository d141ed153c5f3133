//! Rules compiled for instantiation: variables become slot indices and every
//! argument position carries the denotation of its declared sort.

use std::collections::HashMap;
use std::sync::Arc;

use crate::sorts::{Den, SortTable, TypedProgram, TypedRule};
use crate::syntax::{ArithOp, BodyElement, Literal, Pos, RelOp, Term};
use crate::value::{GroundLiteral, Value};

use super::GroundError;

#[derive(Clone, Debug)]
pub(crate) enum CTerm {
    Val(Value),
    Var(usize),
    Func(Arc<str>, Vec<CTerm>),
    Bin(ArithOp, Box<CTerm>, Box<CTerm>),
    Neg(Box<CTerm>),
}

impl CTerm {
    fn compile(t: &Term, slots: &HashMap<&str, usize>) -> CTerm {
        match t {
            Term::Int(n) => CTerm::Val(Value::Int(*n)),
            Term::Const(c) => CTerm::Val(Value::sym(c)),
            Term::Var(v) => CTerm::Var(slots[v.as_str()]),
            Term::Func(name, args) => CTerm::Func(Arc::from(name.as_str()), args.iter().map(|a| Self::compile(a, slots)).collect()),
            Term::Binary(op, l, r) => CTerm::Bin(*op, Box::new(Self::compile(l, slots)), Box::new(Self::compile(r, slots))),
            Term::Neg(inner) => CTerm::Neg(Box::new(Self::compile(inner, slots))),
        }
    }

    pub fn vars(&self, out: &mut Vec<usize>) {
        match self {
            CTerm::Val(_) => {}
            CTerm::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            CTerm::Func(_, args) => args.iter().for_each(|a| a.vars(out)),
            CTerm::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
            CTerm::Neg(inner) => inner.vars(out),
        }
    }

    fn all_bound(&self, b: &[Option<Value>]) -> bool {
        let mut vs = Vec::new();
        self.vars(&mut vs);
        vs.iter().all(|&i| b[i].is_some())
    }
}

/// Outcome of evaluating a term under a binding.
pub(crate) enum Eval {
    Value(Value),
    /// Overflow, or arithmetic on a non-integer: the instance is dropped.
    Undefined,
    DivisionByZero,
}

pub(crate) fn eval(t: &CTerm, b: &[Option<Value>]) -> Eval {
    match t {
        CTerm::Val(v) => Eval::Value(v.clone()),
        CTerm::Var(i) => match &b[*i] {
            Some(v) => Eval::Value(v.clone()),
            None => Eval::Undefined,
        },
        CTerm::Func(name, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match eval(a, b) {
                    Eval::Value(v) => vals.push(v),
                    other => return other,
                }
            }
            Eval::Value(Value::Func(name.clone(), Arc::from(vals)))
        }
        CTerm::Neg(inner) => match eval(inner, b) {
            Eval::Value(Value::Int(n)) => n.checked_neg().map_or(Eval::Undefined, |n| Eval::Value(Value::Int(n))),
            Eval::Value(_) => Eval::Undefined,
            other => other,
        },
        CTerm::Bin(op, l, r) => {
            let (x, y) = match (eval(l, b), eval(r, b)) {
                (Eval::Value(Value::Int(x)), Eval::Value(Value::Int(y))) => (x, y),
                (Eval::DivisionByZero, _) | (_, Eval::DivisionByZero) => return Eval::DivisionByZero,
                _ => return Eval::Undefined,
            };
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::Div if y == 0 => return Eval::DivisionByZero,
                // i64 division truncates toward zero
                ArithOp::Div => x.checked_div(y),
            };
            r.map_or(Eval::Undefined, |n| Eval::Value(Value::Int(n)))
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CLit {
    pub negated: bool,
    pub pred: Arc<str>,
    pub args: Vec<CTerm>,
    pub dens: Vec<Arc<Den>>,
}

#[derive(Clone, Debug)]
pub(crate) struct CBuiltin {
    pub op: RelOp,
    pub lhs: CTerm,
    pub rhs: CTerm,
}

#[derive(Clone, Debug)]
pub(crate) struct CRule {
    pub head: Vec<CLit>,
    pub pos: Vec<CLit>,
    pub neg: Vec<CLit>,
    pub builtins: Vec<CBuiltin>,
    pub var_names: Vec<String>,
    pub domains: Vec<Arc<Den>>,
    pub at: Pos,
}

/// A rule instance before atoms are numbered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct LitRule {
    pub head: Vec<GroundLiteral>,
    pub pos: Vec<GroundLiteral>,
    pub neg: Vec<GroundLiteral>,
}

fn compile_lit(l: &Literal, slots: &HashMap<&str, usize>, tp: &TypedProgram, table: &SortTable) -> CLit {
    let dens = tp.predicates[&l.pred]
        .iter()
        .map(|s| table.den(s).expect("typechecked sort").clone())
        .collect();
    CLit {
        negated: l.negated,
        pred: Arc::from(l.pred.as_str()),
        args: l.args.iter().map(|a| CTerm::compile(a, slots)).collect(),
        dens,
    }
}

pub(crate) fn compile_rule(r: &TypedRule, tp: &TypedProgram, table: &SortTable) -> CRule {
    let slots: HashMap<&str, usize> = r.vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let mut c = CRule {
        head: r.rule.head.iter().map(|l| compile_lit(l, &slots, tp, table)).collect(),
        pos: Vec::new(),
        neg: Vec::new(),
        builtins: Vec::new(),
        var_names: r.vars.iter().map(|v| v.name.clone()).collect(),
        domains: r.vars.iter().map(|v| v.den.clone()).collect(),
        at: r.rule.pos,
    };
    for b in &r.rule.body {
        match b {
            BodyElement::Literal(l) => c.pos.push(compile_lit(l, &slots, tp, table)),
            BodyElement::Naf(l) => c.neg.push(compile_lit(l, &slots, tp, table)),
            BodyElement::Builtin(b) => c.builtins.push(CBuiltin {
                op: b.op,
                lhs: CTerm::compile(&b.lhs, &slots),
                rhs: CTerm::compile(&b.rhs, &slots),
            }),
        }
    }
    c
}

pub(crate) fn compile_program(tp: &TypedProgram, table: &SortTable) -> Vec<CRule> {
    tp.rules.iter().map(|r| compile_rule(r, tp, table)).collect()
}

fn compare(op: RelOp, x: &Value, y: &Value) -> bool {
    match op {
        RelOp::Eq => x == y,
        RelOp::Neq => x != y,
        _ => match (x, y) {
            (Value::Int(a), Value::Int(b)) => match op {
                RelOp::Lt => a < b,
                RelOp::Le => a <= b,
                RelOp::Gt => a > b,
                RelOp::Ge => a >= b,
                RelOp::Eq | RelOp::Neq => unreachable!(),
            },
            _ => false,
        },
    }
}

impl CRule {
    fn div_zero(&self) -> GroundError {
        GroundError::DivisionByZero { pos: self.at }
    }

    /// Evaluates every builtin in textual order under a full binding.
    pub fn builtins_hold(&self, b: &[Option<Value>]) -> Result<bool, GroundError> {
        for bi in &self.builtins {
            let (x, y) = match (eval(&bi.lhs, b), eval(&bi.rhs, b)) {
                (Eval::DivisionByZero, _) | (_, Eval::DivisionByZero) => return Err(self.div_zero()),
                (Eval::Value(x), Eval::Value(y)) => (x, y),
                _ => return Ok(false),
            };
            if !compare(bi.op, &x, &y) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn in_domains(&self, b: &[Option<Value>]) -> bool {
        b.iter().zip(&self.domains).all(|(v, d)| v.as_ref().is_some_and(|v| d.member(v)))
    }

    /// Instantiates a literal; `None` if an argument is undefined or falls
    /// outside its declared sort.
    pub fn instantiate(&self, l: &CLit, b: &[Option<Value>]) -> Result<Option<GroundLiteral>, GroundError> {
        let mut args = Vec::with_capacity(l.args.len());
        for (t, d) in l.args.iter().zip(&l.dens) {
            match eval(t, b) {
                Eval::Value(v) if d.member(&v) => args.push(v),
                Eval::Value(_) | Eval::Undefined => return Ok(None),
                Eval::DivisionByZero => return Err(self.div_zero()),
            }
        }
        Ok(Some(GroundLiteral {
            negated: l.negated,
            pred: l.pred.clone(),
            args: Arc::from(args),
        }))
    }

    /// Instantiates the whole rule under a full binding, applying every
    /// check except membership of the positive body in the possible set.
    pub fn instance(&self, b: &[Option<Value>]) -> Result<Option<LitRule>, GroundError> {
        if !self.in_domains(b) || !self.builtins_hold(b)? {
            return Ok(None);
        }
        let mut out = LitRule {
            head: Vec::with_capacity(self.head.len()),
            pos: Vec::with_capacity(self.pos.len()),
            neg: Vec::with_capacity(self.neg.len()),
        };
        for (lits, dst) in [(&self.head, &mut out.head), (&self.pos, &mut out.pos), (&self.neg, &mut out.neg)] {
            for l in lits {
                match self.instantiate(l, b)? {
                    Some(g) => dst.push(g),
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(out))
    }

    /// Binds variables through assignment builtins `V = expr` (either side)
    /// whose other side is fully bound. Returns false if an assignment
    /// cannot be evaluated.
    pub fn propagate_assignments(&self, b: &mut [Option<Value>]) -> Result<bool, GroundError> {
        loop {
            let mut changed = false;
            for bi in self.builtins.iter().filter(|bi| bi.op == RelOp::Eq) {
                for (var, expr) in [(&bi.lhs, &bi.rhs), (&bi.rhs, &bi.lhs)] {
                    let CTerm::Var(i) = var else { continue };
                    if b[*i].is_some() || !expr.all_bound(b) {
                        continue;
                    }
                    match eval(expr, b) {
                        Eval::Value(v) => {
                            b[*i] = Some(v);
                            changed = true;
                        }
                        Eval::Undefined => return Ok(false),
                        Eval::DivisionByZero => return Err(self.div_zero()),
                    }
                }
            }
            if !changed {
                return Ok(true);
            }
        }
    }
}

/// Matches a compiled term against a value, extending the binding.
/// Arithmetic terms with unbound variables match anything; the instance is
/// verified once fully bound.
pub(crate) fn unify(t: &CTerm, v: &Value, b: &mut Vec<Option<Value>>, trail: &mut Vec<usize>) -> bool {
    match t {
        CTerm::Val(x) => x == v,
        CTerm::Var(i) => match &b[*i] {
            Some(x) => x == v,
            None => {
                b[*i] = Some(v.clone());
                trail.push(*i);
                true
            }
        },
        CTerm::Func(name, args) => match v {
            Value::Func(n2, vals) if n2 == name && vals.len() == args.len() => {
                args.iter().zip(vals.iter()).all(|(a, x)| unify(a, x, b, trail))
            }
            _ => false,
        },
        CTerm::Bin(..) | CTerm::Neg(_) => {
            if t.all_bound(b) {
                matches!(eval(t, b), Eval::Value(x) if x == *v)
            } else {
                true
            }
        }
    }
}
