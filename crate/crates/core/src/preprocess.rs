//! `#include` resolution and `extend ... with` subsort expansion.
//!
//! The output of [`expand`] is a classical program: no include directives,
//! no subsort statements, and one `#S = S1 + ... + Sn.` definition for every
//! extended sort placed at the start of the sorts section.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::syntax::{parse_program, ConstDef, IncludePath, Pos, Program, SortDef, SortExpr, SortStmt, SyntaxError};

const DRAWING_HEADER: &str = include_str!("../assets/drawing.sp");

/// The standard drawing and animation header, available as `<drawing.sp>`.
pub fn shipped_header() -> &'static str {
    DRAWING_HEADER
}

/// Looks up a bundled asset by the name used in `#include <name>`.
pub fn shipped_asset(name: &str) -> Option<&'static str> {
    match name {
        "drawing.sp" => Some(DRAWING_HEADER),
        _ => None,
    }
}

/// A resolved include: a canonical name used for cycle detection and
/// include-once bookkeeping, plus the file's text.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub name: String,
    pub text: String,
}

pub trait IncludeResolver {
    /// Resolves `path` as written in the file named `from` (`None` for the
    /// top-level program).
    fn resolve(&self, path: &IncludePath, from: Option<&str>) -> Option<Resolved>;
}

fn shipped(path: &IncludePath) -> Option<Resolved> {
    match path {
        IncludePath::System(name) => shipped_asset(name).map(|text| Resolved {
            name: format!("<{name}>"),
            text: text.to_string(),
        }),
        IncludePath::Local(_) => None,
    }
}

/// Resolves from the shipped assets and from directories on disk.
///
/// `<name>` searches the shipped assets, then each include directory.
/// `"name"` searches the including file's folder, then each include directory.
#[derive(Clone, Debug, Default)]
pub struct FsResolver {
    pub include_dirs: Vec<PathBuf>,
}

impl FsResolver {
    pub fn new(include_dirs: Vec<PathBuf>) -> Self {
        FsResolver { include_dirs }
    }

    fn read(path: &Path) -> Option<Resolved> {
        let text = std::fs::read_to_string(path).ok()?;
        let name = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        Some(Resolved {
            name: name.display().to_string(),
            text,
        })
    }
}

impl IncludeResolver for FsResolver {
    fn resolve(&self, path: &IncludePath, from: Option<&str>) -> Option<Resolved> {
        if let Some(r) = shipped(path) {
            return Some(r);
        }
        if let IncludePath::Local(name) = path {
            let base = from.and_then(|f| Path::new(f).parent()).unwrap_or(Path::new("."));
            if let Some(r) = Self::read(&base.join(name)) {
                return Some(r);
            }
        }
        self.include_dirs.iter().find_map(|d| Self::read(&d.join(path.name())))
    }
}

/// An in-memory file system for tests and embedding. Names are matched
/// verbatim; `<name>` falls back to the shipped assets when the map has no
/// entry.
#[derive(Clone, Debug, Default)]
pub struct MapResolver {
    pub files: BTreeMap<String, String>,
}

impl MapResolver {
    pub fn new<I, K, V>(files: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        MapResolver {
            files: files.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

impl IncludeResolver for MapResolver {
    fn resolve(&self, path: &IncludePath, _from: Option<&str>) -> Option<Resolved> {
        match self.files.get(path.name()) {
            Some(text) => Some(Resolved {
                name: path.name().to_string(),
                text: text.clone(),
            }),
            None => shipped(path),
        }
    }
}

/// Resolves only the shipped assets.
#[derive(Clone, Copy, Debug, Default)]
pub struct AssetResolver;

impl IncludeResolver for AssetResolver {
    fn resolve(&self, path: &IncludePath, _from: Option<&str>) -> Option<Resolved> {
        shipped(path)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PreprocessError {
    #[error("{pos}: cannot find include file {path}")]
    IncludeNotFound { path: IncludePath, pos: Pos },
    #[error("{pos}: include cycle: {}", .chain.join(" includes "))]
    IncludeCycle { chain: Vec<String>, pos: Pos },
    #[error("syntax errors in included file {file}: {}", display_list(.errors))]
    IncludedSyntax { file: String, errors: Vec<SyntaxError> },
    #[error("{pos}: sort #{sort} is extended with subsorts and must not also be defined with `=`")]
    SortDoubleDefinition { sort: String, pos: Pos },
    #[error("{pos}: constant {name} is defined twice with different values ({first} and {second})")]
    DuplicateConst { name: String, first: i64, second: i64, pos: Pos },
}

fn display_list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Contents contributed by one file together with everything it includes.
#[derive(Default)]
struct Unit {
    consts: Vec<ConstDef>,
    defs: Vec<SortDef>,
    /// Subsort contributions in first-occurrence order of the sort name.
    subsorts: Vec<(String, Pos, Vec<SortExpr>)>,
    predicates: Vec<crate::syntax::PredicateDecl>,
    rules: Vec<crate::syntax::Rule>,
}

impl Unit {
    fn add_subsort(&mut self, sort: &str, pos: Pos, expr: SortExpr) {
        if let SortExpr::Union(parts) = expr {
            for p in parts {
                self.add_subsort(sort, pos, p);
            }
            return;
        }
        match self.subsorts.iter_mut().find(|(s, ..)| s == sort) {
            Some((_, _, parts)) => parts.push(expr),
            None => self.subsorts.push((sort.to_string(), pos, vec![expr])),
        }
    }

    fn append(&mut self, other: Unit) {
        for c in other.consts {
            if !self.consts.iter().any(|d| d.name == c.name) {
                self.consts.push(c);
            }
        }
        self.defs.extend(other.defs);
        for (sort, pos, parts) in other.subsorts {
            for p in parts {
                self.add_subsort(&sort, pos, p);
            }
        }
        self.predicates.extend(other.predicates);
        self.rules.extend(other.rules);
    }
}

struct Expander<'r> {
    resolver: &'r dyn IncludeResolver,
    stack: Vec<String>,
    done: HashSet<String>,
    errors: Vec<PreprocessError>,
}

impl Expander<'_> {
    fn visit(&mut self, program: &Program, name: Option<&str>) -> Unit {
        let mut unit = Unit::default();
        let mut seen: HashMap<&str, i64> = HashMap::new();
        for c in &program.consts {
            match seen.get(c.name.as_str()) {
                Some(&v) if v != c.value => self.errors.push(PreprocessError::DuplicateConst {
                    name: c.name.clone(),
                    first: v,
                    second: c.value,
                    pos: c.pos,
                }),
                Some(_) => {}
                None => {
                    seen.insert(&c.name, c.value);
                    unit.consts.push(c.clone());
                }
            }
        }

        let mut included = Unit::default();
        for inc in &program.includes {
            let Some(resolved) = self.resolver.resolve(&inc.path, name) else {
                self.errors.push(PreprocessError::IncludeNotFound {
                    path: inc.path.clone(),
                    pos: inc.pos,
                });
                continue;
            };
            if let Some(start) = self.stack.iter().position(|s| *s == resolved.name) {
                let mut chain = self.stack[start..].to_vec();
                chain.push(resolved.name);
                self.errors.push(PreprocessError::IncludeCycle { chain, pos: inc.pos });
                continue;
            }
            if !self.done.insert(resolved.name.clone()) {
                continue;
            }
            match parse_program(&resolved.text) {
                Ok(sub) => {
                    self.stack.push(resolved.name.clone());
                    let sub_unit = self.visit(&sub, Some(&resolved.name));
                    self.stack.pop();
                    included.append(sub_unit);
                }
                Err(errors) => self.errors.push(PreprocessError::IncludedSyntax {
                    file: resolved.name,
                    errors,
                }),
            }
        }

        for s in &program.sorts {
            match s {
                SortStmt::Def(d) => unit.defs.push(d.clone()),
                SortStmt::Extend(e) => unit.add_subsort(&e.sort, e.pos, e.expr.clone()),
            }
        }
        unit.predicates = program.predicates.clone();
        unit.rules = program.rules.clone();

        // The including file's constants win, its other contents come last.
        let mut merged = Unit {
            consts: std::mem::take(&mut unit.consts),
            ..Unit::default()
        };
        merged.append(included);
        merged.append(unit);
        merged
    }
}

/// Expands includes and subsort statements of the top-level `program`.
pub fn expand(program: &Program, resolver: &dyn IncludeResolver) -> Result<Program, Vec<PreprocessError>> {
    expand_named(program, None, resolver)
}

/// Like [`expand`], for a program read from the file `name`. Quoted includes
/// resolve relative to `name`, and self-inclusion is detected.
pub fn expand_named(
    program: &Program,
    name: Option<&str>,
    resolver: &dyn IncludeResolver,
) -> Result<Program, Vec<PreprocessError>> {
    let mut ex = Expander {
        resolver,
        stack: name.map(|n| vec![n.to_string()]).unwrap_or_default(),
        done: name.map(|n| HashSet::from([n.to_string()])).unwrap_or_default(),
        errors: Vec::new(),
    };
    let unit = ex.visit(program, name);
    let mut errors = ex.errors;

    for d in &unit.defs {
        if unit.subsorts.iter().any(|(s, ..)| *s == d.name) {
            errors.push(PreprocessError::SortDoubleDefinition {
                sort: d.name.clone(),
                pos: d.pos,
            });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let mut sorts: Vec<SortStmt> = unit
        .subsorts
        .into_iter()
        .map(|(name, pos, mut parts)| {
            let expr = if parts.len() == 1 {
                parts.pop().unwrap()
            } else {
                SortExpr::Union(parts)
            };
            SortStmt::Def(SortDef { name, expr, pos })
        })
        .collect();
    sorts.extend(unit.defs.into_iter().map(SortStmt::Def));

    Ok(Program {
        consts: unit.consts,
        includes: Vec::new(),
        sorts,
        predicates: unit.predicates,
        rules: unit.rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{format_program, format_sort_expr};

    const SMALL_DRAWING: &str = "
sorts
   extend #stylename with {
     redPen, blackPen
   }.
rules
   draw(text_color(redPen, red)).
";

    const P1: &str = "
#include <drawing.sp>
sorts
   extend #stylename with {
     myPen
   }.
   extend #text with {
     drawingAndAnimation
   }.
rules
   draw(text_color(myPen, green)).
   draw(draw_text(redPen,drawingAAndAnimation, 10, 10)).
   draw(draw_text(myPen,drawingAAndAnimation, 10, 30)).
";

    fn sort_lines(p: &Program) -> Vec<String> {
        p.sort_defs()
            .map(|d| format!("#{} = {}.", d.name, format_sort_expr(&d.expr)))
            .collect()
    }

    #[test]
    fn subsorts_become_unions_included_part_first() {
        let resolver = MapResolver::new([("drawing.sp", SMALL_DRAWING)]);
        let p = parse_program(P1).unwrap();
        let out = expand(&p, &resolver).unwrap();
        let lines = sort_lines(&out);
        assert_eq!(lines[0], "#stylename = {redPen, blackPen} + {myPen}.");
        assert_eq!(lines[1], "#text = {drawingAndAnimation}.");
        assert_eq!(out.rules.len(), 4);
        assert_eq!(crate::syntax::format_rule(&out.rules[0]), "draw(text_color(redPen, red)).");
        assert!(out.includes.is_empty());
        assert!(out.sorts.iter().all(|s| matches!(s, SortStmt::Def(_))));
    }

    #[test]
    fn plain_program_is_unchanged() {
        let p = parse_program("#const n = 3. sorts #s = 1..n. predicates p(#s). rules p(1).").unwrap();
        assert_eq!(expand(&p, &AssetResolver).unwrap(), p);
    }

    #[test]
    fn expansion_is_idempotent() {
        let resolver = MapResolver::new([("drawing.sp", SMALL_DRAWING)]);
        let once = expand(&parse_program(P1).unwrap(), &resolver).unwrap();
        let twice = expand(&once, &resolver).unwrap();
        assert_eq!(once, twice);
        assert_eq!(parse_program(&format_program(&once)).unwrap(), once);
    }

    #[test]
    fn extended_sort_defined_with_eq_is_rejected() {
        let src = "sorts extend #s with {a}. #s = {b}.";
        let errs = expand(&parse_program(src).unwrap(), &AssetResolver).unwrap_err();
        assert!(matches!(&errs[0], PreprocessError::SortDoubleDefinition { sort, .. } if sort == "s"));
    }

    #[test]
    fn two_file_cycle_names_both_files() {
        let resolver = MapResolver::new([("a.sp", "#include \"b.sp\"\nsorts"), ("b.sp", "#include \"a.sp\"\nsorts")]);
        let p = parse_program("#include \"a.sp\"").unwrap();
        let errs = expand(&p, &resolver).unwrap_err();
        let msg = errs[0].to_string();
        assert!(matches!(errs[0], PreprocessError::IncludeCycle { .. }));
        assert!(msg.contains("a.sp") && msg.contains("b.sp"), "{msg}");
    }

    #[test]
    fn self_include_of_named_file() {
        let resolver = MapResolver::new([("me.sp", "#include \"me.sp\"")]);
        let p = parse_program("#include \"me.sp\"").unwrap();
        let errs = expand_named(&p, Some("me.sp"), &resolver).unwrap_err();
        assert!(matches!(errs[0], PreprocessError::IncludeCycle { .. }));
    }

    #[test]
    fn diamond_includes_contribute_once() {
        let resolver = MapResolver::new([
            ("a.sp", "#include \"c.sp\"\nsorts extend #s with {a}."),
            ("b.sp", "#include \"c.sp\"\nsorts extend #s with {b}."),
            ("c.sp", "sorts extend #s with {c}."),
        ]);
        let p = parse_program("#include \"a.sp\"\n#include \"b.sp\"\nsorts extend #s with {d}.").unwrap();
        let out = expand(&p, &resolver).unwrap();
        assert_eq!(sort_lines(&out), vec!["#s = {c} + {a} + {b} + {d}."]);
    }

    #[test]
    fn including_program_consts_win() {
        let resolver = MapResolver::new([("lib.sp", "#const n = 5. #const m = 1.")]);
        let p = parse_program("#include \"lib.sp\"\n#const n = 9.").unwrap();
        let out = expand(&p, &resolver).unwrap();
        assert_eq!(out.const_value("n"), Some(9));
        assert_eq!(out.const_value("m"), Some(1));
    }

    #[test]
    fn duplicate_const_only_when_values_differ() {
        let ok = parse_program("#const n = 1. #const n = 1.").unwrap();
        assert_eq!(expand(&ok, &AssetResolver).unwrap().consts.len(), 1);
        let bad = parse_program("#const n = 1. #const n = 2.").unwrap();
        assert!(matches!(
            expand(&bad, &AssetResolver).unwrap_err()[0],
            PreprocessError::DuplicateConst { .. }
        ));
    }

    #[test]
    fn missing_include_is_reported() {
        let p = parse_program("#include \"nowhere.sp\"").unwrap();
        let errs = expand(&p, &AssetResolver).unwrap_err();
        assert!(matches!(errs[0], PreprocessError::IncludeNotFound { .. }));
    }

    #[test]
    fn shipped_header_parses_and_has_appendix_domains() {
        let p = parse_program(shipped_header()).unwrap();
        let lines: Vec<String> = sort_lines(&p);
        assert!(lines.contains(&"#angle = 1..16.".to_string()));
        assert!(lines.contains(&"#fontsize = 8..72.".to_string()));
        let color = p.sort_defs().find(|d| d.name == "color").unwrap();
        let SortExpr::Enum(items) = &color.expr else { panic!() };
        assert_eq!(items.len(), 148);
        let tail: Vec<String> = items[items.len() - 5..].iter().map(crate::syntax::format_term).collect();
        assert_eq!(tail, ["snow", "yellow", "lightYellow", "ivory", "white"]);
    }
}
