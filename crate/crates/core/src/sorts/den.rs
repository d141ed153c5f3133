//! Intensional denotations of sorts.
//!
//! A [`Den`] describes a set of ground terms without listing record
//! elements: integers as disjoint intervals, symbols and explicit records as
//! sets, and record sorts as unions of products of component denotations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::value::Value;

/// The size of a sort. `Large` marks sizes that do not fit in a `u128` or
/// whose exact union size would need too many intersection terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Cardinality {
    Exact(u128),
    Large,
}

impl Cardinality {
    pub fn exact(self) -> Option<u128> {
        match self {
            Cardinality::Exact(n) => Some(n),
            Cardinality::Large => None,
        }
    }

    pub fn exceeds(self, guard: u128) -> bool {
        match self {
            Cardinality::Exact(n) => n > guard,
            Cardinality::Large => true,
        }
    }

    fn add(self, other: Cardinality) -> Cardinality {
        match (self, other) {
            (Cardinality::Exact(a), Cardinality::Exact(b)) => a.checked_add(b).map_or(Cardinality::Large, Cardinality::Exact),
            _ => Cardinality::Large,
        }
    }

    fn mul(self, other: Cardinality) -> Cardinality {
        match (self, other) {
            (Cardinality::Exact(0), _) | (_, Cardinality::Exact(0)) => Cardinality::Exact(0),
            (Cardinality::Exact(a), Cardinality::Exact(b)) => a.checked_mul(b).map_or(Cardinality::Large, Cardinality::Exact),
            _ => Cardinality::Large,
        }
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Exact(n) => write!(f, "{n}"),
            Cardinality::Large => f.write_str("more than 2^128"),
        }
    }
}

type Product = Vec<Arc<Den>>;
type RecordKey = (Arc<str>, usize);

/// Unions with more distinct products per record name than this are not
/// counted exactly.
const MAX_INCLUSION_EXCLUSION: usize = 12;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Den {
    ints: Vec<(i64, i64)>,
    syms: BTreeSet<Arc<str>>,
    funcs: BTreeSet<Value>,
    records: BTreeMap<RecordKey, Vec<Product>>,
}

impl Den {
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a Value>) -> Den {
        let mut d = Den::default();
        for v in values {
            match v {
                Value::Int(n) => d.add_interval(*n, *n),
                Value::Sym(s) => {
                    d.syms.insert(s.clone());
                }
                Value::Func(..) => {
                    d.funcs.insert(v.clone());
                }
            }
        }
        d
    }

    pub fn range(lo: i64, hi: i64) -> Den {
        let mut d = Den::default();
        if lo <= hi {
            d.ints.push((lo, hi));
        }
        d
    }

    pub fn record(name: &str, components: Vec<Arc<Den>>) -> Den {
        let mut d = Den::default();
        d.records.insert((Arc::from(name), components.len()), vec![components]);
        d
    }

    fn add_interval(&mut self, lo: i64, hi: i64) {
        self.ints.push((lo, hi));
        self.ints.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(self.ints.len());
        for &(l, h) in &self.ints {
            match merged.last_mut() {
                Some((_, ph)) if l <= ph.saturating_add(1) => *ph = (*ph).max(h),
                _ => merged.push((l, h)),
            }
        }
        self.ints = merged;
    }

    pub fn union(&self, other: &Den) -> Den {
        let mut d = self.clone();
        for &(l, h) in &other.ints {
            d.add_interval(l, h);
        }
        d.syms.extend(other.syms.iter().cloned());
        d.funcs.extend(other.funcs.iter().cloned());
        for (key, products) in &other.records {
            let mine = d.records.entry(key.clone()).or_default();
            for p in products {
                if !mine.contains(p) {
                    mine.push(p.clone());
                }
            }
        }
        d
    }

    pub fn intersect(&self, other: &Den) -> Den {
        let mut d = Den::default();
        for &(l1, h1) in &self.ints {
            for &(l2, h2) in &other.ints {
                let (l, h) = (l1.max(l2), h1.min(h2));
                if l <= h {
                    d.add_interval(l, h);
                }
            }
        }
        d.syms = self.syms.intersection(&other.syms).cloned().collect();
        d.funcs = self
            .funcs
            .iter()
            .filter(|v| other.member(v))
            .chain(other.funcs.iter().filter(|v| self.member(v)))
            .cloned()
            .collect();
        for (key, mine) in &self.records {
            let Some(theirs) = other.records.get(key) else { continue };
            let mut out: Vec<Product> = Vec::new();
            for p in mine {
                for q in theirs {
                    let comps: Product = p.iter().zip(q).map(|(a, b)| Arc::new(a.intersect(b))).collect();
                    if comps.iter().any(|c| c.is_empty()) || out.contains(&comps) {
                        continue;
                    }
                    out.push(comps);
                }
            }
            if !out.is_empty() {
                d.records.insert(key.clone(), out);
            }
        }
        d
    }

    pub fn member(&self, v: &Value) -> bool {
        match v {
            Value::Int(n) => self.ints.iter().any(|&(l, h)| l <= *n && *n <= h),
            Value::Sym(s) => self.syms.contains(s),
            Value::Func(name, args) => {
                self.funcs.contains(v)
                    || self.records.get(&(name.clone(), args.len())).is_some_and(|products| {
                        products.iter().any(|p| p.iter().zip(args.iter()).all(|(d, a)| d.member(a)))
                    })
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty()
            && self.syms.is_empty()
            && self.funcs.is_empty()
            && self.records.values().flatten().all(|p| p.iter().any(|c| c.is_empty()))
    }

    pub fn has_ints(&self) -> bool {
        !self.ints.is_empty()
    }

    /// Products of record sorts named `name` with `arity` components.
    pub fn record_products(&self, name: &str, arity: usize) -> &[Product] {
        self.records
            .get(&(Arc::from(name), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn cardinality(&self) -> Cardinality {
        let mut total = Cardinality::Exact(0);
        for &(l, h) in &self.ints {
            total = total.add(Cardinality::Exact((h as i128 - l as i128 + 1) as u128));
        }
        total = total.add(Cardinality::Exact(self.syms.len() as u128));
        let loose = self
            .funcs
            .iter()
            .filter(|v| match v {
                Value::Func(name, args) => !self
                    .record_products(name, args.len())
                    .iter()
                    .any(|p| p.iter().zip(args.iter()).all(|(d, a)| d.member(a))),
                _ => true,
            })
            .count();
        total = total.add(Cardinality::Exact(loose as u128));
        for products in self.records.values() {
            total = total.add(union_of_products(products));
        }
        total
    }

    /// All elements: integers ascending, then symbols, then records, each in
    /// value order. Callers check the cardinality first.
    pub fn elements(&self) -> Vec<Value> {
        let mut out: Vec<Value> = Vec::new();
        for &(l, h) in &self.ints {
            out.extend((l..=h).map(Value::Int));
        }
        out.extend(self.syms.iter().map(|s| Value::Sym(s.clone())));
        let mut recs: BTreeSet<Value> = self.funcs.clone();
        for ((name, _), products) in &self.records {
            for p in products {
                let comps: Vec<Vec<Value>> = p.iter().map(|c| c.elements()).collect();
                for tuple in cartesian(&comps) {
                    recs.insert(Value::Func(name.clone(), Arc::from(tuple)));
                }
            }
        }
        out.extend(recs);
        out
    }
}

fn product_cardinality(p: &[Arc<Den>]) -> Cardinality {
    p.iter().fold(Cardinality::Exact(1), |acc, d| acc.mul(d.cardinality()))
}

fn union_of_products(products: &[Product]) -> Cardinality {
    match products.len() {
        0 => Cardinality::Exact(0),
        1 => product_cardinality(&products[0]),
        n if n > MAX_INCLUSION_EXCLUSION => Cardinality::Large,
        n => {
            let (mut plus, mut minus) = (Cardinality::Exact(0), Cardinality::Exact(0));
            for mask in 1u32..(1 << n) {
                let mut chosen = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &products[i]);
                let first = chosen.next().unwrap().clone();
                let meet: Product = chosen.fold(first, |acc, p| {
                    acc.iter().zip(p).map(|(a, b)| Arc::new(a.intersect(b))).collect()
                });
                let c = product_cardinality(&meet);
                if mask.count_ones() % 2 == 1 {
                    plus = plus.add(c);
                } else {
                    minus = minus.add(c);
                }
            }
            match (plus, minus) {
                (Cardinality::Exact(p), Cardinality::Exact(m)) => Cardinality::Exact(p - m),
                _ => Cardinality::Large,
            }
        }
    }
}

/// Lexicographic cartesian product, first component varying slowest.
pub(crate) fn cartesian(comps: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for c in comps {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for v in c {
                let mut t = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(names: &[&str]) -> Den {
        Den::from_values(&names.iter().map(|n| Value::sym(n)).collect::<Vec<_>>())
    }

    #[test]
    fn interval_merging_counts_overlap_once() {
        let d = Den::range(1, 5).union(&Den::range(4, 9)).union(&Den::from_values(&[Value::Int(10)]));
        assert_eq!(d.cardinality(), Cardinality::Exact(10));
        assert!(d.member(&Value::Int(10)));
        assert!(!d.member(&Value::Int(11)));
    }

    #[test]
    fn overlapping_record_products_use_inclusion_exclusion() {
        let ab = Arc::new(syms(&["a", "b"]));
        let bc = Arc::new(syms(&["b", "c"]));
        let d = Den::record("f", vec![ab.clone(), ab.clone()]).union(&Den::record("f", vec![bc.clone(), bc]));
        // {a,b}^2 has 4, {b,c}^2 has 4, they share f(b,b).
        assert_eq!(d.cardinality(), Cardinality::Exact(7));
        assert_eq!(d.elements().len(), 7);
    }

    #[test]
    fn explicit_records_inside_products_count_once() {
        let ab = Arc::new(syms(&["a", "b"]));
        let d = Den::record("f", vec![ab]).union(&Den::from_values(&[
            Value::func("f", vec![Value::sym("a")]),
            Value::func("g", vec![Value::sym("a")]),
        ]));
        assert_eq!(d.cardinality(), Cardinality::Exact(3));
    }

    #[test]
    fn intersection_of_records_is_componentwise() {
        let ab = Arc::new(syms(&["a", "b"]));
        let bc = Arc::new(syms(&["b", "c"]));
        let d = Den::record("f", vec![ab]).intersect(&Den::record("f", vec![bc]));
        assert_eq!(d.elements(), vec![Value::func("f", vec![Value::sym("b")])]);
    }

    #[test]
    fn overflow_is_marked_large() {
        let big = Arc::new(Den::range(i64::MIN, i64::MAX));
        let d = Den::record("f", vec![big.clone(), big.clone(), big]);
        assert_eq!(d.cardinality(), Cardinality::Large);
        assert!(d.cardinality().exceeds(u128::MAX));
    }
}
