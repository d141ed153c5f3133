//! Sort resolution, membership, enumeration and type checking.

mod den;
mod typecheck;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

pub use den::{Cardinality, Den};
pub use typecheck::{typecheck, typecheck_query, TypeError, TypedProgram, TypedQuery, TypedRule, VarDomain};

pub(crate) use den::cartesian;

use crate::syntax::{Bound, Pos, Program, SortExpr, Term};
use crate::value::Value;

/// Default bound on the number of elements [`SortTable::enumerate`] produces.
pub const DEFAULT_ENUMERATION_GUARD: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("{pos}: unknown sort #{name}")]
    UnknownSortName { name: String, pos: Pos },
    #[error("{pos}: cyclic sort definition: {}", .cycle.iter().map(|s| format!("#{s}")).collect::<Vec<_>>().join(" -> "))]
    CyclicSortDefinition { cycle: Vec<String>, pos: Pos },
    #[error("{pos}: sort #{name} is empty")]
    EmptySort { name: String, pos: Pos },
    #[error("{pos}: range of sort #{name} is inverted ({lo}..{hi})")]
    RangeInverted { name: String, lo: i64, hi: i64, pos: Pos },
    #[error("{pos}: unknown constant {name}")]
    UnknownConst { name: String, pos: Pos },
    #[error("{pos}: sort #{name} is defined more than once")]
    DuplicateSort { name: String, pos: Pos },
    #[error("sort #{sort} has {cardinality} elements, more than the enumeration limit of {guard}")]
    EnumerationRefused { sort: String, cardinality: Cardinality, guard: u128 },
}

/// A sort definition after constant substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolvedExpr {
    Values(Vec<Value>),
    Range(i64, i64),
    Union(Vec<ResolvedExpr>),
    Record(Arc<str>, Vec<String>),
    Named(String),
}

#[derive(Clone, Debug)]
pub struct SortEntry {
    pub name: String,
    pub expr: ResolvedExpr,
    pub cardinality: Cardinality,
    pub pos: Pos,
    den: Arc<Den>,
}

/// Resolved sort definitions of one program. Immutable once built.
#[derive(Clone, Debug, Default)]
pub struct SortTable {
    entries: BTreeMap<String, SortEntry>,
    consts: HashMap<String, i64>,
}

/// Converts a ground, arithmetic-free term to a value, reading lowercase
/// names bound by `#const` as integers.
pub(crate) fn term_value(t: &Term, consts: &HashMap<String, i64>) -> Option<Value> {
    match t {
        Term::Int(n) => Some(Value::Int(*n)),
        Term::Const(c) => Some(consts.get(c).map_or_else(|| Value::sym(c), |n| Value::Int(*n))),
        Term::Func(name, args) => {
            let args: Option<Vec<Value>> = args.iter().map(|a| term_value(a, consts)).collect();
            Some(Value::func(name, args?))
        }
        Term::Var(_) | Term::Binary(..) | Term::Neg(_) => None,
    }
}

struct Builder<'p> {
    defs: HashMap<&'p str, &'p crate::syntax::SortDef>,
    consts: &'p HashMap<String, i64>,
    done: BTreeMap<String, SortEntry>,
    failed: HashSet<String>,
    stack: Vec<String>,
    errors: Vec<SortError>,
}

impl Builder<'_> {
    /// Resolves `name`, returning its denotation or `None` if it failed.
    fn resolve(&mut self, name: &str, use_pos: Pos) -> Option<Arc<Den>> {
        if let Some(e) = self.done.get(name) {
            return Some(e.den.clone());
        }
        if self.failed.contains(name) {
            return None;
        }
        let Some(def) = self.defs.get(name).copied() else {
            self.errors.push(SortError::UnknownSortName {
                name: name.to_string(),
                pos: use_pos,
            });
            self.failed.insert(name.to_string());
            return None;
        };
        if let Some(i) = self.stack.iter().position(|s| s == name) {
            let mut cycle = self.stack[i..].to_vec();
            cycle.push(name.to_string());
            self.errors.push(SortError::CyclicSortDefinition { cycle, pos: def.pos });
            for s in &self.stack[i..] {
                self.failed.insert(s.clone());
            }
            return None;
        }
        self.stack.push(name.to_string());
        let resolved = self.expr(name, &def.expr, def.pos);
        self.stack.pop();
        if self.failed.contains(name) {
            return None;
        }
        let (expr, den) = match resolved {
            Some(r) => r,
            None => {
                self.failed.insert(name.to_string());
                return None;
            }
        };
        let den = Arc::new(den);
        let cardinality = den.cardinality();
        if cardinality == Cardinality::Exact(0) {
            self.errors.push(SortError::EmptySort {
                name: name.to_string(),
                pos: def.pos,
            });
        }
        self.done.insert(
            name.to_string(),
            SortEntry {
                name: name.to_string(),
                expr,
                cardinality,
                pos: def.pos,
                den: den.clone(),
            },
        );
        Some(den)
    }

    fn bound(&mut self, b: &Bound, pos: Pos) -> Option<i64> {
        match b {
            Bound::Int(n) => Some(*n),
            Bound::Const(c) => match self.consts.get(c) {
                Some(n) => Some(*n),
                None => {
                    self.errors.push(SortError::UnknownConst { name: c.clone(), pos });
                    None
                }
            },
        }
    }

    fn expr(&mut self, owner: &str, e: &SortExpr, pos: Pos) -> Option<(ResolvedExpr, Den)> {
        match e {
            SortExpr::Enum(items) => {
                let values: Vec<Value> = items.iter().filter_map(|t| term_value(t, self.consts)).collect();
                let den = Den::from_values(&values);
                Some((ResolvedExpr::Values(values), den))
            }
            SortExpr::Range(lo, hi) => {
                let (lo, hi) = (self.bound(lo, pos), self.bound(hi, pos));
                let (lo, hi) = (lo?, hi?);
                if lo > hi {
                    self.errors.push(SortError::RangeInverted {
                        name: owner.to_string(),
                        lo,
                        hi,
                        pos,
                    });
                    return None;
                }
                Some((ResolvedExpr::Range(lo, hi), Den::range(lo, hi)))
            }
            SortExpr::Union(parts) => {
                let mut exprs = Vec::new();
                let mut den = Den::default();
                let mut ok = true;
                for p in parts {
                    match self.expr(owner, p, pos) {
                        Some((e, d)) => {
                            den = den.union(&d);
                            exprs.push(e);
                        }
                        None => ok = false,
                    }
                }
                ok.then_some((ResolvedExpr::Union(exprs), den))
            }
            SortExpr::Record(name, comps) => {
                let dens: Vec<Option<Arc<Den>>> = comps.iter().map(|c| self.resolve(c, pos)).collect();
                let dens: Option<Vec<Arc<Den>>> = dens.into_iter().collect();
                let den = Den::record(name, dens?);
                Some((ResolvedExpr::Record(Arc::from(name.as_str()), comps.clone()), den))
            }
            SortExpr::Named(n) => {
                let den = self.resolve(n, pos)?;
                Some((ResolvedExpr::Named(n.clone()), (*den).clone()))
            }
        }
    }
}

/// Resolves every sort definition of a preprocessed program.
pub fn build_sort_table(program: &Program) -> Result<SortTable, Vec<SortError>> {
    let consts: HashMap<String, i64> = program.consts.iter().map(|c| (c.name.clone(), c.value)).collect();
    let mut defs = HashMap::new();
    let mut errors = Vec::new();
    for d in program.sort_defs() {
        if defs.insert(d.name.as_str(), d).is_some() {
            errors.push(SortError::DuplicateSort {
                name: d.name.clone(),
                pos: d.pos,
            });
        }
    }
    let mut b = Builder {
        defs,
        consts: &consts,
        done: BTreeMap::new(),
        failed: HashSet::new(),
        stack: Vec::new(),
        errors,
    };
    for d in program.sort_defs() {
        b.resolve(&d.name, d.pos);
    }
    if b.errors.is_empty() {
        Ok(SortTable { entries: b.done, consts })
    } else {
        Err(b.errors)
    }
}

impl SortTable {
    fn entry(&self, name: &str) -> Result<&SortEntry, SortError> {
        self.entries.get(name).ok_or_else(|| SortError::UnknownSortName {
            name: name.to_string(),
            pos: Pos::default(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&SortEntry> {
        self.entries.get(name)
    }

    pub fn consts(&self) -> &HashMap<String, i64> {
        &self.consts
    }

    pub fn cardinality(&self, name: &str) -> Result<Cardinality, SortError> {
        Ok(self.entry(name)?.cardinality)
    }

    pub(crate) fn den(&self, name: &str) -> Option<&Arc<Den>> {
        self.entries.get(name).map(|e| &e.den)
    }

    /// Membership by structure: records are checked by name, arity and
    /// componentwise membership, never by listing the sort.
    pub fn member(&self, name: &str, value: &Value) -> Result<bool, SortError> {
        Ok(self.entry(name)?.den.member(value))
    }

    /// Lists the elements of a sort: ranges ascending, enumerations in
    /// textual order, unions left to right without repeats, and records in
    /// lexicographic order of their components.
    pub fn enumerate(&self, name: &str, guard: u128) -> Result<Vec<Value>, SortError> {
        let e = self.entry(name)?;
        if e.cardinality.exceeds(guard) {
            return Err(SortError::EnumerationRefused {
                sort: name.to_string(),
                cardinality: e.cardinality,
                guard,
            });
        }
        if e.cardinality == Cardinality::Exact(0) {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.walk(&e.expr, &mut out, &mut seen);
        Ok(out)
    }

    fn walk(&self, e: &ResolvedExpr, out: &mut Vec<Value>, seen: &mut HashSet<Value>) {
        let mut push = |v: Value, out: &mut Vec<Value>| {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        };
        match e {
            ResolvedExpr::Values(vs) => vs.iter().for_each(|v| push(v.clone(), out)),
            ResolvedExpr::Range(lo, hi) => (*lo..=*hi).for_each(|n| push(Value::Int(n), out)),
            ResolvedExpr::Union(parts) => parts.iter().for_each(|p| self.walk(p, out, seen)),
            ResolvedExpr::Named(n) => self.walk(&self.entries[n].expr, out, seen),
            ResolvedExpr::Record(name, comps) => {
                let lists: Vec<Vec<Value>> = comps
                    .iter()
                    .map(|c| {
                        let mut v = Vec::new();
                        self.walk(&self.entries[c].expr, &mut v, &mut HashSet::new());
                        v
                    })
                    .collect();
                for tuple in cartesian(&lists) {
                    push(Value::Func(name.clone(), Arc::from(tuple)), out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{expand, shipped_header, AssetResolver};
    use crate::syntax::parse_program;

    fn table(src: &str) -> SortTable {
        build_sort_table(&parse_program(src).unwrap()).unwrap()
    }

    fn errors(src: &str) -> Vec<SortError> {
        build_sort_table(&parse_program(src).unwrap()).unwrap_err()
    }

    fn header_table(extra: &str) -> SortTable {
        let src = format!("#include <drawing.sp>\nsorts\n{extra}");
        let p = expand(&parse_program(&src).unwrap(), &AssetResolver).unwrap();
        build_sort_table(&p).unwrap()
    }

    #[test]
    fn frame_range_uses_const() {
        let t = table("#const numFrames = 60. sorts #frame = 0..numFrames.");
        assert_eq!(t.cardinality("frame").unwrap(), Cardinality::Exact(61));
        let frames = t.enumerate("frame", DEFAULT_ENUMERATION_GUARD).unwrap();
        assert_eq!(frames.first(), Some(&Value::Int(0)));
        assert_eq!(frames.last(), Some(&Value::Int(60)));
    }

    #[test]
    fn color_membership_and_order() {
        let t = table("sorts #color = {red, green, blue}. #state = {texas}.");
        assert!(t.member("color", &Value::sym("green")).unwrap());
        assert!(!t.member("color", &Value::sym("texas")).unwrap());
        assert_eq!(
            t.enumerate("color", 10).unwrap(),
            vec![Value::sym("red"), Value::sym("green"), Value::sym("blue")]
        );
    }

    #[test]
    fn draw_line_record_is_counted_not_listed() {
        let t = table(
            "sorts #stylename = {a, b}. #col = 1..500. #row = 1..500.
             #draw_line = draw_line(#stylename,#col,#row,#col,#row).",
        );
        assert_eq!(
            t.cardinality("draw_line").unwrap(),
            Cardinality::Exact(2 * 500u128.pow(4))
        );
        assert!(matches!(
            t.enumerate("draw_line", DEFAULT_ENUMERATION_GUARD),
            Err(SortError::EnumerationRefused { .. })
        ));
        let line = Value::func(
            "draw_line",
            vec![Value::sym("a"), Value::Int(1), Value::Int(1), Value::Int(500), Value::Int(500)],
        );
        assert!(t.member("draw_line", &line).unwrap());
    }

    #[test]
    fn header_draw_line_membership() {
        let t = header_table("");
        let line = Value::func(
            "draw_line",
            vec![Value::sym("redPen"), Value::Int(1), Value::Int(1), Value::Int(500), Value::Int(500)],
        );
        assert!(t.member("draw_line", &line).unwrap());
        assert!(t.member("drawing_command", &line).unwrap());
        assert!(t.member("color", &Value::sym("rebeccaPurple")).unwrap());
    }

    #[test]
    fn inverted_range() {
        assert!(matches!(errors("sorts #s = 5..3.")[0], SortError::RangeInverted { lo: 5, hi: 3, .. }));
    }

    #[test]
    fn unknown_and_cyclic_sorts() {
        assert!(matches!(errors("sorts #a = #b.")[0], SortError::UnknownSortName { .. }));
        let errs = errors("sorts #a = {x} + #b. #b = f(#a).");
        assert!(matches!(errs[0], SortError::CyclicSortDefinition { .. }), "{errs:?}");
        assert!(matches!(errors("sorts #a = 1..n.")[0], SortError::UnknownConst { .. }));
        assert!(matches!(errors("sorts #a = {x}. #a = {y}.")[0], SortError::DuplicateSort { .. }));
    }

    #[test]
    fn union_deduplicates_in_order() {
        let t = table("sorts #a = {x, y}. #b = {y, z} + #a + 1..2.");
        assert_eq!(t.cardinality("b").unwrap(), Cardinality::Exact(5));
        let names: Vec<String> = t.enumerate("b", 100).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(names, ["y", "z", "x", "1", "2"]);
    }

    #[test]
    fn record_enumeration_is_lexicographic() {
        let t = table("sorts #a = {x, y}. #n = 1..2. #r = r(#a, #n).");
        let names: Vec<String> = t.enumerate("r", 100).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(names, ["r(x,1)", "r(x,2)", "r(y,1)", "r(y,2)"]);
    }

    #[test]
    fn header_sorts_and_shipped_text_agree() {
        let p = parse_program(shipped_header()).unwrap();
        assert!(p.sort_defs().any(|d| d.name == "fontsize"));
        let t = header_table("");
        assert_eq!(t.cardinality("frame").unwrap(), Cardinality::Exact(61));
        assert_eq!(t.cardinality("stylename").unwrap(), Cardinality::Exact(12));
    }
}
