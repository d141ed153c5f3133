//! Ground terms and ground literals.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// A ground term. The derived order puts integers first (ascending), then
/// symbols, then records, each compared lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(Arc<str>),
    Func(Arc<str>, Arc<[Value]>),
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(Arc::from(s))
    }

    pub fn func(name: &str, args: Vec<Value>) -> Value {
        Value::Func(Arc::from(name), Arc::from(args))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => f.write_str(s),
            Value::Func(name, args) => {
                write!(f, "{name}(")?;
                write_args(f, args)?;
                f.write_str(")")
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Value]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(n) => s.serialize_i64(*n),
            other => s.collect_str(other),
        }
    }
}

/// A ground literal: an atom `p(v1, ..., vn)` or its classical negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundLiteral {
    pub negated: bool,
    pub pred: Arc<str>,
    pub args: Arc<[Value]>,
}

impl GroundLiteral {
    pub fn new(negated: bool, pred: &str, args: Vec<Value>) -> Self {
        GroundLiteral {
            negated,
            pred: Arc::from(pred),
            args: Arc::from(args),
        }
    }

    /// The complementary literal: `-p` for `p` and `p` for `-p`.
    pub fn contrary(&self) -> GroundLiteral {
        GroundLiteral {
            negated: !self.negated,
            pred: self.pred.clone(),
            args: self.args.clone(),
        }
    }
}

/// Literals order by predicate name, then arguments, with `p` before `-p`.
impl Ord for GroundLiteral {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pred
            .cmp(&other.pred)
            .then_with(|| self.args.cmp(&other.args))
            .then_with(|| self.negated.cmp(&other.negated))
    }
}

impl PartialOrd for GroundLiteral {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_args(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Serialize for GroundLiteral {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_order() {
        let l = GroundLiteral::new(false, "draw", vec![Value::func("draw_line", vec![Value::sym("r"), Value::Int(0)])]);
        assert_eq!(l.to_string(), "draw(draw_line(r,0))");
        assert_eq!(l.contrary().to_string(), "-draw(draw_line(r,0))");
        assert!(l < l.contrary());
        assert!(Value::Int(10) < Value::sym("a"));
        assert!(Value::Int(2) < Value::Int(10));
        let p = GroundLiteral::new(false, "p", vec![]);
        assert_eq!(p.to_string(), "p");
    }
}
