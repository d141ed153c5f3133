//! The end-to-end stages shared by the command line and the service:
//! preprocess, sort and type check, ground, solve, then answer a query or
//! render the display atoms. Every failure becomes a [`Diagnostic`].

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::display::{emit_html, render_answer_set, CanvasConfig, RenderPlan};
use crate::ground::{ground, GroundError, GroundLimits, GroundProgram};
use crate::preprocess::{expand_named, IncludeResolver, PreprocessError};
use crate::query::{answer_query, QueryAnswer};
use crate::solve::{answer_sets_until, AnswerSet, SolveError, SolveLimits};
use crate::sorts::{build_sort_table, typecheck, typecheck_query, SortTable, TypedProgram, DEFAULT_ENUMERATION_GUARD};
use crate::syntax::{parse_program, parse_query, Pos, Program, SyntaxError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Syntax,
    Preprocess,
    Sorts,
    Types,
    Ground,
    Solve,
    Query,
    Display,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Syntax => "syntax",
            Stage::Preprocess => "preprocess",
            Stage::Sorts => "sorts",
            Stage::Types => "types",
            Stage::Ground => "ground",
            Stage::Solve => "solve",
            Stage::Query => "query",
            Stage::Display => "display",
        })
    }
}

/// One reported problem. `code` is the error kind, e.g. `Timeout`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub stage: Stage,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}: ")?;
        }
        write!(f, "{} error: {}", self.stage, self.message)
    }
}

/// The leading identifier of a `Debug` rendering: the variant name.
fn variant_name<E: fmt::Debug>(e: &E) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

impl Diagnostic {
    pub fn new<E: fmt::Debug + fmt::Display>(stage: Stage, e: &E, pos: Option<Pos>) -> Self {
        let text = e.to_string();
        let message = match pos {
            Some(p) => text.strip_prefix(&format!("{p}: ")).unwrap_or(&text).to_string(),
            None => text,
        };
        Diagnostic {
            stage,
            code: variant_name(e),
            message,
            file: None,
            line: pos.map(|p| p.line),
            col: pos.map(|p| p.col),
        }
    }

    fn syntax(e: &SyntaxError, file: Option<&str>) -> Self {
        Diagnostic {
            stage: Stage::Syntax,
            code: "SyntaxError".into(),
            message: e.describe(),
            file: file.map(str::to_string),
            line: Some(e.pos.line),
            col: Some(e.pos.col),
        }
    }

    pub fn is_timeout(&self) -> bool {
        self.code == "Timeout"
    }
}

fn preprocess_diagnostics(errors: Vec<PreprocessError>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for e in errors {
        let pos = match &e {
            PreprocessError::IncludeNotFound { pos, .. }
            | PreprocessError::IncludeCycle { pos, .. }
            | PreprocessError::SortDoubleDefinition { pos, .. }
            | PreprocessError::DuplicateConst { pos, .. } => Some(*pos),
            PreprocessError::IncludedSyntax { file, errors } => {
                out.extend(errors.iter().map(|s| Diagnostic::syntax(s, Some(file))));
                continue;
            }
        };
        out.push(Diagnostic::new(Stage::Preprocess, &e, pos));
    }
    out
}

fn timeout(limits: &SolveLimits) -> Diagnostic {
    Diagnostic::new(Stage::Solve, &SolveError::Timeout { limit: limits.timeout }, None)
}

/// A checked program: expanded, with its sort table and typed rules.
#[derive(Clone, Debug)]
pub struct Checked {
    pub program: Program,
    pub table: SortTable,
    pub typed: TypedProgram,
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub checked: Checked,
    pub ground: GroundProgram,
    pub answer_sets: Vec<AnswerSet>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Execution {
    pub plans: Vec<RenderPlan>,
    pub html: String,
}

/// Shared configuration for one run.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub resolver: &'a dyn IncludeResolver,
    /// Name of the program's file, for relative includes.
    pub file_name: Option<&'a str>,
    pub limits: SolveLimits,
}

impl<'a> Pipeline<'a> {
    pub fn new(resolver: &'a dyn IncludeResolver) -> Self {
        Pipeline {
            resolver,
            file_name: None,
            limits: SolveLimits::default(),
        }
    }

    pub fn check(&self, source: &str) -> Result<Checked, Vec<Diagnostic>> {
        let parsed = parse_program(source).map_err(|es| es.iter().map(|e| Diagnostic::syntax(e, self.file_name)).collect::<Vec<_>>())?;
        let program = expand_named(&parsed, self.file_name, self.resolver).map_err(preprocess_diagnostics)?;
        let table = build_sort_table(&program).map_err(|es| {
            es.iter()
                .map(|e| {
                    let pos = match e {
                        crate::sorts::SortError::UnknownSortName { pos, .. }
                        | crate::sorts::SortError::CyclicSortDefinition { pos, .. }
                        | crate::sorts::SortError::EmptySort { pos, .. }
                        | crate::sorts::SortError::RangeInverted { pos, .. }
                        | crate::sorts::SortError::UnknownConst { pos, .. }
                        | crate::sorts::SortError::DuplicateSort { pos, .. } => Some(*pos),
                        crate::sorts::SortError::EnumerationRefused { .. } => None,
                    };
                    Diagnostic::new(Stage::Sorts, e, pos)
                })
                .collect::<Vec<_>>()
        })?;
        let typed = typecheck(&program, &table).map_err(|es| {
            es.iter()
                .map(|e| Diagnostic::new(Stage::Types, e, Some(type_error_pos(e))))
                .collect::<Vec<_>>()
        })?;
        Ok(Checked { program, table, typed })
    }

    /// Checks, grounds and solves, with one deadline for the last two.
    pub fn solve(&self, source: &str) -> Result<Solved, Vec<Diagnostic>> {
        let start = Instant::now();
        let checked = self.check(source)?;
        self.solve_checked(checked, start)
    }

    fn solve_checked(&self, checked: Checked, start: Instant) -> Result<Solved, Vec<Diagnostic>> {
        let deadline = start + self.limits.timeout;
        let limits = GroundLimits {
            max_rules: self.limits.max_ground_rules,
            enumeration_guard: DEFAULT_ENUMERATION_GUARD,
            deadline: Some(deadline),
        };
        let gp = ground(&checked.typed, &checked.table, &limits).map_err(|e| {
            vec![match e {
                GroundError::Timeout => timeout(&self.limits),
                GroundError::DivisionByZero { pos } | GroundError::EnumerationRefused { pos, .. } => {
                    Diagnostic::new(Stage::Ground, &e, Some(pos))
                }
                other => Diagnostic::new(Stage::Ground, &other, None),
            }]
        })?;
        let sets = answer_sets_until(&gp, self.limits.max_answer_sets, deadline, self.limits.timeout)
            .map_err(|e| vec![Diagnostic::new(Stage::Solve, &e, None)])?;
        Ok(Solved {
            checked,
            ground: gp,
            answer_sets: sets,
        })
    }

    /// Answers `query` against the program's answer sets. The query is
    /// checked before any solving happens.
    pub fn query(&self, source: &str, query: &str) -> Result<QueryAnswer, Vec<Diagnostic>> {
        let start = Instant::now();
        let checked = self.check(source)?;
        let q = parse_query(query).map_err(|e| {
            vec![Diagnostic {
                stage: Stage::Query,
                ..Diagnostic::syntax(&e, None)
            }]
        })?;
        let tq = typecheck_query(&q, &checked.typed, &checked.table).map_err(|es| {
            es.iter()
                .map(|e| Diagnostic::new(Stage::Query, e, Some(type_error_pos(e))))
                .collect::<Vec<_>>()
        })?;
        let solved = self.solve_checked(checked, start)?;
        answer_query(&solved.answer_sets, &tq, &solved.checked.typed, &solved.checked.table)
            .map_err(|e| vec![Diagnostic::new(Stage::Query, &e, None)])
    }

    /// Renders every answer set. A display error in any answer set fails the
    /// whole run, naming the answer set.
    pub fn execute(&self, source: &str) -> Result<Execution, Vec<Diagnostic>> {
        let solved = self.solve(source)?;
        let canvas = CanvasConfig::from_consts(solved.checked.table.consts());
        let mut plans = Vec::with_capacity(solved.answer_sets.len());
        let mut diags = Vec::new();
        for (i, set) in solved.answer_sets.iter().enumerate() {
            match render_answer_set(set, &canvas) {
                Ok(p) => plans.push(p),
                Err(es) => diags.extend(es.iter().map(|e| Diagnostic {
                    message: format!("answer set {i}: {e}"),
                    ..Diagnostic::new(Stage::Display, e, None)
                })),
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }
        let html = emit_html(&plans);
        Ok(Execution { plans, html })
    }
}

fn type_error_pos(e: &crate::sorts::TypeError) -> Pos {
    use crate::sorts::TypeError::*;
    match e {
        UndeclaredPredicate { pos, .. }
        | ArityMismatch { pos, .. }
        | SortMismatch { pos, .. }
        | UnsortableVariable { pos, .. }
        | ConflictingVariableSorts { pos, .. }
        | UnknownSort { pos, .. }
        | DuplicatePredicate { pos, .. } => *pos,
    }
}

/// One answer set per line, in the given order.
pub fn format_answer_sets(sets: &[AnswerSet]) -> String {
    sets.iter().map(|s| format!("{s}\n")).collect()
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// An ordered list with one item per answer set.
pub fn answer_sets_html(sets: &[AnswerSet]) -> String {
    let mut out = String::from("<ol>\n");
    for s in sets {
        out.push_str("<li>");
        out.push_str(&escape_html(&s.to_string()));
        out.push_str("</li>\n");
    }
    out.push_str("</ol>\n");
    out
}
