//! Acceptance criteria, one pass/fail line each. Exits non-zero when any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{fixture, urls, Server};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqwest::StatusCode;
use serde_json::json;
use sparc_core::display::{RenderPlan, Shape, Style};
use sparc_core::ground::GroundProgram;
use sparc_core::pipeline::{Pipeline, Solved};
use sparc_core::preprocess::{expand, AssetResolver, MapResolver, PreprocessError};
use sparc_core::query::{answer_ground_query, Verdict};
use sparc_core::solve::{answer_sets, brute_force_answer_sets, SolveLimits};
use sparc_core::syntax::{format_program, parse_program, BodyElement, Program};
use sparc_core::value::GroundLiteral;
use sparc_service::{ServiceConfig, TimeoutPolicy};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn solve(src: &str) -> Result<Solved, String> {
    Pipeline::new(&AssetResolver).solve(src).map_err(|d| format!("{d:?}"))
}

fn execute(src: &str) -> Result<Vec<RenderPlan>, String> {
    Pipeline::new(&AssetResolver).execute(src).map(|e| e.plans).map_err(|d| format!("{d:?}"))
}

/// Every corpus program that solves quickly.
const CORPUS: [&str; 10] = [
    "disjunction.sp",
    "family_t1.sp",
    "growing_line.sp",
    "map_triangle.sp",
    "map_two_node.sp",
    "moving_box.sp",
    "moving_box_header.sp",
    "negation.sp",
    "p1.sp",
    "red_line.sp",
];

fn random_ground_program(rng: &mut ChaCha8Rng) -> GroundProgram {
    let lit = |rng: &mut ChaCha8Rng| GroundLiteral::new(rng.gen_bool(0.25), &format!("p{}", rng.gen_range(0..7)), vec![]);
    let rules = (0..rng.gen_range(1..12))
        .map(|_| {
            let heads = match rng.gen_range(0..10) {
                0 | 1 => 0,
                2..=6 => 1,
                _ => rng.gen_range(2..4),
            };
            let h = (0..heads).map(|_| lit(rng)).collect::<Vec<_>>();
            let p = (0..rng.gen_range(0..3)).map(|_| lit(rng)).collect::<Vec<_>>();
            let mut n = (0..rng.gen_range(0..3)).map(|_| lit(rng)).collect::<Vec<_>>();
            if h.is_empty() && p.is_empty() && n.is_empty() {
                n.push(lit(rng));
            }
            (h, p, n)
        })
        .collect::<Vec<_>>();
    GroundProgram::from_rules(rules)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut consistent, mut disjunctive) = (0, 0);
    for i in 0..250 {
        let gp = random_ground_program(&mut rng);
        ensure!(gp.atoms().len() <= 14, "program {i} has {} atoms", gp.atoms().len());
        let fast = answer_sets(&gp, &SolveLimits::default()).map_err(|e| e.to_string())?;
        let slow = brute_force_answer_sets(&gp).map_err(|e| e.to_string())?;
        ensure!(fast == slow, "program {i} differs: {fast:?} vs {slow:?}");
        consistent += usize::from(!fast.is_empty());
        disjunctive += usize::from(gp.rules.iter().any(|r| r.head.len() > 1));
    }
    ensure!(consistent > 20 && disjunctive > 20, "weak sample: {consistent} consistent, {disjunctive} disjunctive");
    ensure!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());
    Ok(())
}

fn map_coloring() -> Outcome {
    for name in ["map_triangle.sp", "map_two_node.sp"] {
        let s = solve(&fixture(name))?;
        let oracle = brute_force_answer_sets(&s.ground).map_err(|e| e.to_string())?;
        ensure!(s.answer_sets.len() == 6 && oracle == s.answer_sets, "{name}: {} sets", s.answer_sets.len());
    }
    let base = solve(&fixture("map_two_node.sp"))?;
    let red = GroundLiteral::new(false, "ofColor", vec![sparc_core::value::Value::sym("n1"), sparc_core::value::Value::sym("red")]);
    let with_red = base.answer_sets.iter().filter(|a| a.contains(&red)).count();
    let constrained = solve(&format!("{}\n  :- ofColor(n1, red).", fixture("map_two_node.sp")))?;
    let oracle = brute_force_answer_sets(&constrained.ground).map_err(|e| e.to_string())?;
    ensure!(with_red == 2, "{with_red} sets contain ofColor(n1, red)");
    ensure!(oracle == constrained.answer_sets, "solver and oracle disagree");
    let kept: BTreeSet<_> = base.answer_sets.iter().filter(|a| !a.contains(&red)).collect();
    ensure!(kept == constrained.answer_sets.iter().collect(), "the constraint removed the wrong sets");
    Ok(())
}

fn query_semantics() -> Outcome {
    let p = Pipeline::new(&AssetResolver);
    let verdict = |src: &str, q: &str| p.query(src, q).map(|a| a.to_string()).map_err(|d| format!("{d:?}"));
    ensure!(verdict(&fixture("family_t1.sp"), "q(a)")? == "yes\n", "q(a)");
    ensure!(verdict(&fixture("family_t1.sp"), "p(b)")? == "unknown\n", "p(b)");
    ensure!(verdict(&fixture("disjunction.sp"), "p(a)")? == "unknown\n", "p(a) under disjunction");
    for name in CORPUS {
        let s = solve(&fixture(name))?;
        for l in s.ground.atoms() {
            let yes = answer_ground_query(&s.answer_sets, l) == Verdict::Yes;
            let contrary_no = answer_ground_query(&s.answer_sets, &l.contrary()) == Verdict::No;
            ensure!(yes == contrary_no, "{name}: duality fails for {l}");
        }
    }
    Ok(())
}

fn preprocessor() -> Outcome {
    let resolver = MapResolver::new([("drawing.sp", fixture("drawing_small.sp"))]);
    let p = parse_program(&fixture("p1.sp")).map_err(|e| format!("{e:?}"))?;
    let text = format_program(&expand(&p, &resolver).map_err(|e| format!("{e:?}"))?);
    let sorts: Vec<&str> = text.lines().skip_while(|l| l.trim() != "sorts").skip(1).take(2).map(str::trim).collect();
    ensure!(
        sorts == ["#stylename = {redPen, blackPen} + {myPen}.", "#text = {drawingAndAnimation}."],
        "got {sorts:?}"
    );
    let doubled = parse_program("#include <drawing.sp>.\nsorts\n  #stylename = {myPen}.").map_err(|e| format!("{e:?}"))?;
    match expand(&doubled, &resolver) {
        Err(es) if es.iter().any(|e| matches!(e, PreprocessError::SortDoubleDefinition { .. })) => Ok(()),
        other => Err(format!("expected SortDoubleDefinition, got {other:?}")),
    }
}

fn moving_box() -> Outcome {
    let plans = execute(&fixture("moving_box.sp"))?;
    ensure!(plans.len() == 1, "{} plans", plans.len());
    ensure!(plans[0].frame_count() == 201, "{} frames", plans[0].frame_count());
    for (i, frame) in plans[0].frames.iter().enumerate() {
        let i = i as u32;
        let mut lines = BTreeSet::new();
        let mut titles = 0;
        for s in frame {
            match &s.shape {
                Shape::Line { x1, y1, x2, y2 } => {
                    ensure!(s.style.line_color == "red", "frame {i}: line color {}", s.style.line_color);
                    lines.insert((*x1, *y1, *x2, *y2));
                }
                Shape::Text { text, x, y } => {
                    let st = &s.style;
                    ensure!(
                        text == "aDemonstrationOfAMovingRedBox"
                            && (*x, *y) == (5, 25)
                            && (st.text_color.as_str(), st.font_family.as_str(), st.font_size) == ("blue", "arial", 18),
                        "frame {i}: title {s:?}"
                    );
                    titles += 1;
                }
                other => return Err(format!("frame {i}: unexpected {other:?}")),
            }
        }
        let want = BTreeSet::from([
            (i + 1, 70, i + 11, 70),
            (i + 1, 70, i + 1, 60),
            (i + 1, 60, i + 11, 60),
            (i + 11, 60, i + 11, 70),
        ]);
        ensure!(frame.len() == 5 && lines == want && titles == 1, "frame {i}: {lines:?}");
    }
    Ok(())
}

fn growing_line() -> Outcome {
    let plans = execute(&fixture("growing_line.sp"))?;
    let mut last = 0;
    for (i, frame) in plans[0].frames.iter().enumerate() {
        ensure!(frame.len() == 1, "frame {i} has {} shapes", frame.len());
        let w = frame[0].style.line_width;
        ensure!(w == i as u32 / 6 + 1 && w >= last, "frame {i}: width {w}");
        last = w;
    }
    Ok(())
}

/// The expanded program without the header's default-value rules.
fn without_default_rules(p: &Program) -> Program {
    let helper = |pred: &str| pred == "nonDefaultValueDefined_drawing" || pred == "styleDefinedInFrame";
    let mut out = p.clone();
    out.rules.retain(|r| {
        !r.head.iter().any(|l| helper(&l.pred))
            && !r.body.iter().any(|b| match b {
                BodyElement::Literal(l) | BodyElement::Naf(l) => helper(&l.pred),
                BodyElement::Builtin(_) => false,
            })
    });
    out
}

fn defaults() -> Outcome {
    let src = "#include <drawing.sp>.\nsorts\n  extend #stylename with {plain}.\npredicates\nrules\n  \
               draw(draw_line(plain, 1, 1, 5, 5)).\n  draw(draw_text(plain, a, 5, 5)).";
    let plans = execute(src)?;
    let style = &plans[0].frames[0][0].style;
    let want = Style {
        line_color: "black".into(),
        text_color: "black".into(),
        line_width: 2,
        line_cap: "butt".into(),
        font_size: 11,
        font_family: "arial".into(),
        text_align: "left".into(),
    };
    ensure!(*style == want && Style::default() == want, "resolved {style:?}");
    ensure!(plans[0].frames[0].iter().all(|s| s.style == want), "shapes differ in style");
    for name in CORPUS.iter().copied().chain(std::iter::once("defaults")) {
        let text = if name == "defaults" { src.to_string() } else { fixture(name) };
        let parsed = parse_program(&text).map_err(|e| format!("{e:?}"))?;
        let expanded = expand(&parsed, &AssetResolver).map_err(|e| format!("{e:?}"))?;
        let with = execute(&format_program(&expanded))?;
        let without = execute(&format_program(&without_default_rules(&expanded)))?;
        ensure!(with == without, "{name}: plans differ with the header defaults");
    }
    Ok(())
}

fn html_emission() -> Outcome {
    let ex = Pipeline::new(&AssetResolver).execute(&fixture("red_line.sp")).map_err(|d| format!("{d:?}"))?;
    let golden = include_str!("../../core/tests/golden/red_line.html");
    let normalize = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    ensure!(normalize(&ex.html) == normalize(golden), "differs from the golden page");
    ensure!(ex.html.contains("<canvas id=\"myCanvas\""), "no canvas");
    let mut at = 0;
    for needle in ["ctx.moveTo(0,0);", "ctx.lineTo(2,2);", "ctx.strokeStyle=\"red\";"] {
        match ex.html[at..].find(needle) {
            Some(i) => at += i + needle.len(),
            None => return Err(format!("{needle} missing or out of order")),
        }
    }
    let three = "sorts\n  #c = {a, b, c}.\npredicates\n  p(#c).\nrules\n  p(a) | p(b) | p(c).";
    let ex = Pipeline::new(&AssetResolver).execute(three).map_err(|d| format!("{d:?}"))?;
    ensure!(ex.plans.len() == 3, "{} plans", ex.plans.len());
    ensure!(ex.html.contains("<button onclick=\"animate2()\"> 2 </button>"), "no third button");
    Ok(())
}

async fn limits() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = Server::start(ServiceConfig {
        data_dir: dir.path().to_path_buf(),
        max_answer_sets: 5,
        ..ServiceConfig::default()
    })
    .await;
    let start = Instant::now();
    let (_, r) = s.run(None, json!({ "program": fixture("pigeonhole.sp"), "mode": "answer_sets", "timeoutSec": 1 })).await;
    let elapsed = start.elapsed();
    ensure!(r["diagnostics"][0]["code"] == "Timeout", "got {r}");
    ensure!(elapsed <= Duration::from_secs(3), "took {elapsed:?}");
    let (_, r) = s.run(None, json!({ "program": fixture("map_triangle.sp"), "mode": "answer_sets" })).await;
    ensure!(r["diagnostics"][0]["code"] == "TooManyAnswerSets", "got {r}");
    let (st, r) = s.run(None, json!({ "program": fixture("family_t1.sp"), "mode": "answer_sets", "timeoutSec": 51 })).await;
    ensure!(st == StatusCode::BAD_REQUEST && r["error"] == "InvalidLimits", "51 s accepted: {st} {r}");
    s.stop().await;

    let s = Server::start(ServiceConfig {
        data_dir: dir.path().to_path_buf(),
        timeout_policy: TimeoutPolicy::Clamp,
        ..ServiceConfig::default()
    })
    .await;
    let (st, r) = s.run(None, json!({ "program": fixture("family_t1.sp"), "mode": "answer_sets", "timeoutSec": 51 })).await;
    ensure!(st == StatusCode::OK && r["limits"]["timeoutSec"] == 50.0, "not clamped: {st} {r}");
    Ok(())
}

async fn service_round_trip() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = Server::in_dir(dir.path()).await;
    let token = s.account("alice").await;
    let t = Some(token.as_str());
    let (st, folder) = s.post("/api/folders", t, json!({ "parent": null, "name": "hw1" })).await;
    ensure!(st == StatusCode::CREATED, "folder: {st}");
    let (st, file) = s.post("/api/files", t, json!({ "folder": folder["id"], "name": "map.sp", "content": fixture("map_triangle.sp") })).await;
    ensure!(st == StatusCode::CREATED, "file: {st}");
    let tree = s.get("/api/tree", t).await.1;
    ensure!(urls(&tree) == ["/hw1", "/hw1/map.sp"], "tree {tree}");
    let saved = s.get(&format!("/api/files/{}", file["id"]), t).await.1;
    let (_, r) = s.run(t, json!({ "program": saved["content"], "mode": "answer_sets" })).await;
    ensure!(r["answerSets"]["count"] == 6, "run: {r}");
    let (st, scratch) = s.post("/api/files", t, json!({ "folder": null, "name": "scratch.sp", "content": "" })).await;
    ensure!(st == StatusCode::CREATED, "scratch: {st}");
    let (st, _) = s.delete(&format!("/api/files/{}", scratch["id"]), t).await;
    ensure!(st == StatusCode::NO_CONTENT, "delete: {st}");
    ensure!(urls(&s.get("/api/tree", t).await.1) == ["/hw1", "/hw1/map.sp"], "tree after delete");
    s.stop().await;

    let s = Server::in_dir(dir.path()).await;
    let login = s.post("/api/login", None, json!({ "username": "alice", "password": "secret" })).await.1;
    let t = login["token"].as_str().map(str::to_string);
    let after = s.get(&format!("/api/files/{}", file["id"]), t.as_deref()).await.1;
    ensure!(after["content"].as_str() == Some(fixture("map_triangle.sp").as_str()), "lost after restart: {after}");
    let (st, _) = s.delete(&format!("/api/folders/{}", folder["id"]), t.as_deref()).await;
    ensure!(st == StatusCode::NO_CONTENT, "folder delete: {st}");
    ensure!(urls(&s.get("/api/tree", t.as_deref()).await.1).is_empty(), "tree not empty");
    ensure!(start.elapsed() < Duration::from_secs(30), "took {:?}", start.elapsed());
    Ok(())
}

fn check(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    match outcome {
        Ok(()) => {
            println!("PASS {name}");
            true
        }
        Err(why) => {
            println!("FAIL {name}: {why}");
            false
        }
    }
}

fn main() {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let results = [
        check("stable-model oracle equivalence", oracle_equivalence),
        check("map coloring", map_coloring),
        check("query semantics", query_semantics),
        check("preprocessor", preprocessor),
        check("moving box", moving_box),
        check("growing line", growing_line),
        check("defaults", defaults),
        check("html emission", html_emission),
        check("limits", || rt.block_on(limits())),
        check("service round trip", || rt.block_on(service_round_trip())),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
