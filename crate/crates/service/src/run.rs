//! Run requests: the body of `POST /api/run` and its synchronous evaluation.
//! The command-line tool renders the same text fields.

use serde::{Deserialize, Serialize};
use sparc_core::display::RenderPlan;
use sparc_core::pipeline::{answer_sets_html, format_answer_sets, Diagnostic, Pipeline};
use sparc_core::preprocess::IncludeResolver;
use sparc_core::query::QueryAnswer;
use sparc_core::solve::{AnswerSet, SolveLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    AnswerSets,
    Query,
    Execute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRequest {
    pub program: String,
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_sec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_models: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnswerSetsOutput {
    pub count: usize,
    pub sets: Vec<AnswerSet>,
    /// One answer set per line.
    pub text: String,
    /// An ordered list, one item per answer set.
    pub html: String,
}

impl AnswerSetsOutput {
    pub fn new(sets: Vec<AnswerSet>) -> Self {
        AnswerSetsOutput {
            count: sets.len(),
            text: format_answer_sets(&sets),
            html: answer_sets_html(&sets),
            sets,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryOutput {
    #[serde(flatten)]
    pub answer: QueryAnswer,
    pub text: String,
}

/// The limits a run used, echoed back to the client.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EchoedLimits {
    pub timeout_sec: f64,
    pub max_answer_sets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunResponse {
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer_sets: Option<AnswerSetsOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query_answer: Option<QueryOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plans: Option<Vec<RenderPlan>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub limits: EchoedLimits,
}

impl RunResponse {
    fn empty(limits: &SolveLimits) -> Self {
        RunResponse {
            status: RunStatus::Ok,
            answer_sets: None,
            query_answer: None,
            plans: None,
            html: None,
            diagnostics: Vec::new(),
            limits: EchoedLimits {
                timeout_sec: limits.timeout.as_secs_f64(),
                max_answer_sets: limits.max_answer_sets,
            },
        }
    }

    /// The primary text of a successful run: the answer-set lines, the query
    /// answer, or the HTML segment.
    pub fn text(&self) -> Option<&str> {
        if let Some(a) = &self.answer_sets {
            return Some(&a.text);
        }
        if let Some(q) = &self.query_answer {
            return Some(&q.text);
        }
        self.html.as_deref()
    }

    pub fn is_timeout(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_timeout)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunRequestError {
    #[error("mode `query` needs a `query` field")]
    MissingQuery,
    #[error("the program has {size} bytes, the limit is {limit}")]
    ProgramTooLarge { size: usize, limit: usize },
}

impl RunRequest {
    pub fn validate(&self, max_program_bytes: usize) -> Result<(), RunRequestError> {
        if self.program.len() > max_program_bytes {
            return Err(RunRequestError::ProgramTooLarge {
                size: self.program.len(),
                limit: max_program_bytes,
            });
        }
        if self.mode == RunMode::Query && self.query.is_none() {
            return Err(RunRequestError::MissingQuery);
        }
        Ok(())
    }
}

/// Evaluates a validated request. Program errors become diagnostics.
pub fn run(req: &RunRequest, resolver: &dyn IncludeResolver, file_name: Option<&str>, limits: SolveLimits) -> RunResponse {
    let pipeline = Pipeline {
        resolver,
        file_name,
        limits,
    };
    let mut out = RunResponse::empty(&limits);
    let outcome = match req.mode {
        RunMode::AnswerSets => pipeline.solve(&req.program).map(|s| {
            out.answer_sets = Some(AnswerSetsOutput::new(s.answer_sets));
        }),
        RunMode::Query => {
            let query = req.query.as_deref().unwrap_or_default();
            pipeline.query(&req.program, query).map(|answer| {
                out.query_answer = Some(QueryOutput {
                    text: answer.to_string(),
                    answer,
                });
            })
        }
        RunMode::Execute => pipeline.execute(&req.program).map(|ex| {
            out.plans = Some(ex.plans);
            out.html = Some(ex.html);
        }),
    };
    if let Err(diagnostics) = outcome {
        out.status = RunStatus::Error;
        out.diagnostics = diagnostics;
    }
    out
}

#[cfg(test)]
mod tests {
    use sparc_core::preprocess::AssetResolver;

    use super::*;

    const T1: &str = "sorts #s = {a, b}. predicates p(#s). q(#s). rules p(a). q(X) :- p(X).";

    fn req(mode: RunMode, program: &str) -> RunRequest {
        RunRequest {
            program: program.into(),
            mode,
            query: None,
            timeout_sec: None,
            max_models: None,
        }
    }

    #[test]
    fn answer_sets_mode() {
        let r = run(&req(RunMode::AnswerSets, T1), &AssetResolver, None, SolveLimits::default());
        assert_eq!(r.status, RunStatus::Ok);
        let a = r.answer_sets.as_ref().unwrap();
        assert_eq!((a.count, a.text.as_str()), (1, "{p(a), q(a)}\n"));
        assert_eq!(a.html, "<ol>\n<li>{p(a), q(a)}</li>\n</ol>\n");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["answerSets"]["sets"][0], serde_json::json!(["p(a)", "q(a)"]));
        assert_eq!(json["limits"]["timeoutSec"], serde_json::json!(20.0));
        assert!(json.get("plans").is_none());
    }

    #[test]
    fn query_mode() {
        let mut q = req(RunMode::Query, T1);
        q.query = Some("p(b)".into());
        let r = run(&q, &AssetResolver, None, SolveLimits::default());
        assert_eq!(r.text(), Some("unknown\n"));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["queryAnswer"]["kind"], "verdict");
        assert_eq!(json["queryAnswer"]["verdict"], "unknown");
        assert_eq!(json["queryAnswer"]["inconsistent"], false);
    }

    #[test]
    fn errors_become_diagnostics() {
        let r = run(&req(RunMode::Execute, "sorts #s = {a}. predicates p(#s). rules p(b)."), &AssetResolver, None, SolveLimits::default());
        assert_eq!(r.status, RunStatus::Error);
        assert_eq!(r.diagnostics[0].code, "SortMismatch");
        assert!(r.html.is_none());
    }

    #[test]
    fn validation() {
        let q = req(RunMode::Query, T1);
        assert_eq!(q.validate(1 << 20), Err(RunRequestError::MissingQuery));
        assert!(matches!(req(RunMode::Execute, T1).validate(4), Err(RunRequestError::ProgramTooLarge { .. })));
        let parsed: RunRequest = serde_json::from_str(r#"{"program":"x","mode":"answer_sets","timeoutSec":1.5}"#).unwrap();
        assert_eq!(parsed.timeout_sec, Some(1.5));
    }
}
