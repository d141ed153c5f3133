//! End-to-end checks of the fixture programs against hand-derived answers.

use std::collections::BTreeSet;

use sparc_core::display::{render_answer_set, CanvasConfig, Shape, Style};
use sparc_core::pipeline::{answer_sets_html, format_answer_sets, Pipeline, Solved, Stage};
use sparc_core::preprocess::{expand, AssetResolver, MapResolver};
use sparc_core::solve::brute_force_answer_sets;
use sparc_core::syntax::{format_program, parse_program};

fn fixture(name: &str) -> String {
    let path = format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn solve(name: &str) -> Solved {
    Pipeline::new(&AssetResolver).solve(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

fn rendered(s: &Solved) -> Vec<sparc_core::display::RenderPlan> {
    let canvas = CanvasConfig::from_consts(s.checked.table.consts());
    s.answer_sets.iter().map(|a| render_answer_set(a, &canvas).unwrap()).collect()
}

#[test]
fn map_colorings_match_the_oracle() {
    for name in ["map_triangle.sp", "map_two_node.sp"] {
        let s = solve(name);
        assert_eq!(s.answer_sets.len(), 6, "{name}");
        assert_eq!(brute_force_answer_sets(&s.ground).unwrap(), s.answer_sets, "{name}");
        let colorings: BTreeSet<String> = s.answer_sets.iter().map(|a| a.iter().filter(|l| &*l.pred == "ofColor").map(|l| l.to_string()).collect::<Vec<_>>().join(" ")).collect();
        assert_eq!(colorings.len(), 6);
    }
}

#[test]
fn triangle_answer_sets_as_text_and_html() {
    let s = solve("map_triangle.sp");
    let text = format_answer_sets(&s.answer_sets);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.starts_with('{') && l.ends_with('}')));
    let html = answer_sets_html(&s.answer_sets);
    assert!(html.starts_with("<ol>\n") && html.ends_with("</ol>\n"));
    assert_eq!(html.matches("<li>").count(), 6);
}

#[test]
fn family_and_disjunction() {
    let s = solve("family_t1.sp");
    assert_eq!(format_answer_sets(&s.answer_sets), "{p(a), q(a)}\n");
    let s = solve("disjunction.sp");
    assert_eq!(format_answer_sets(&s.answer_sets), "{p(a)}\n{p(b)}\n");
}

#[test]
fn negation_fixture_matches_the_oracle() {
    let s = solve("negation.sp");
    assert_eq!(brute_force_answer_sets(&s.ground).unwrap(), s.answer_sets);
    // tweety may or may not be caged; sam flies and is not caged.
    assert_eq!(s.answer_sets.len(), 2);
    for a in &s.answer_sets {
        let text = a.to_string();
        assert!(text.contains("-flies(pingu)"));
        assert!(text.contains("flies(sam)"));
        assert!(text.contains("-caged(sam)"));
    }
}

#[test]
fn query_answers() {
    let p = Pipeline::new(&AssetResolver);
    let t1 = fixture("family_t1.sp");
    assert_eq!(p.query(&t1, "q(a)").unwrap().to_string(), "yes\n");
    assert_eq!(p.query(&t1, "p(b)").unwrap().to_string(), "unknown\n");
    assert_eq!(p.query(&fixture("disjunction.sp"), "p(a)").unwrap().to_string(), "unknown\n");
    assert_eq!(p.query(&fixture("negation.sp"), "flies(pingu)").unwrap().to_string(), "no\n");
    assert_eq!(p.query(&fixture("negation.sp"), "-flies(X)").unwrap().to_string(), "X = pingu\n");
    assert_eq!(
        p.query(&fixture("map_triangle.sp"), "ofColor(texas, C)").unwrap().to_string(),
        "no bindings satisfy the query\n"
    );
}

#[test]
fn inconsistent_program_query() {
    let src = "sorts #s = {a}. predicates p(#s). rules p(a). :- p(a).";
    let ans = Pipeline::new(&AssetResolver).query(src, "p(a)").unwrap();
    assert!(ans.inconsistent);
    assert_eq!(ans.to_string(), "unknown\nthe program is inconsistent: it has no answer sets\n");
}

fn leading_sorts(text: &str) -> Vec<String> {
    text.lines().skip_while(|l| l.trim() != "sorts").skip(1).take(2).map(|l| l.trim().to_string()).collect()
}

#[test]
fn p1_expansion_with_the_small_header() {
    let resolver = MapResolver::new([("drawing.sp", fixture("drawing_small.sp"))]);
    let p = parse_program(&fixture("p1.sp")).unwrap();
    let text = format_program(&expand(&p, &resolver).unwrap());
    assert_eq!(leading_sorts(&text), ["#stylename = {redPen, blackPen} + {myPen}.", "#text = {drawingAndAnimation}."]);
}

#[test]
fn p1_expansion_with_the_shipped_header() {
    let p = parse_program(&fixture("p1.sp")).unwrap();
    let sorts = leading_sorts(&format_program(&expand(&p, &AssetResolver).unwrap()));
    assert!(sorts[0].starts_with("#stylename = {redPen, "), "{}", sorts[0]);
    assert!(sorts[0].ends_with("} + {myPen}."), "{}", sorts[0]);
    assert_eq!(sorts[1], "#text = {a, b, c, d} + {drawingAndAnimation}.");
}

#[test]
fn p1_renders_both_texts() {
    let s = solve("p1.sp");
    assert_eq!(s.answer_sets.len(), 1);
    let plan = &rendered(&s)[0];
    assert_eq!(plan.frame_count(), 61);
    let colors: Vec<(&str, u32)> = plan.frames[0]
        .iter()
        .map(|sh| match &sh.shape {
            Shape::Text { y, .. } => (sh.style.text_color.as_str(), *y),
            other => panic!("unexpected {other:?}"),
        })
        .collect();
    assert_eq!(colors, [("green", 30), ("red", 10)]);
}

#[test]
fn moving_box_frames() {
    let s = solve("moving_box.sp");
    let plan = &rendered(&s)[0];
    assert_eq!(plan.frame_count(), 201);
    let f0: Vec<&Shape> = plan.frames[0].iter().map(|s| &s.shape).collect();
    assert_eq!(f0[0], &Shape::Text { text: "aDemonstrationOfAMovingRedBox".into(), x: 5, y: 25 });
    assert!(f0.contains(&&Shape::Line { x1: 1, y1: 60, x2: 11, y2: 60 }));
    assert!(f0.contains(&&Shape::Line { x1: 11, y1: 60, x2: 11, y2: 70 }));
    let f199: Vec<&Shape> = plan.frames[199].iter().map(|s| &s.shape).collect();
    assert!(f199.contains(&&Shape::Line { x1: 200, y1: 70, x2: 210, y2: 70 }));
}

#[test]
fn header_moving_box_uses_the_red_pen() {
    let s = solve("moving_box_header.sp");
    let plan = &rendered(&s)[0];
    assert_eq!(plan.frame_count(), 61);
    for (i, frame) in plan.frames.iter().enumerate() {
        assert_eq!(frame.len(), 5);
        let title = &frame[0];
        assert_eq!((title.style.text_color.as_str(), title.style.font_size), ("blue", 18));
        for line in &frame[1..] {
            assert_eq!((line.style.line_color.as_str(), line.style.line_width), ("red", 2));
            let Shape::Line { x1, .. } = line.shape else { panic!() };
            assert!(x1 == i as u32 + 1 || x1 == i as u32 + 11);
        }
    }
}

#[test]
fn growing_line_widths() {
    let s = solve("growing_line.sp");
    let plan = &rendered(&s)[0];
    for (i, frame) in plan.frames.iter().enumerate() {
        assert_eq!(frame.len(), 1);
        assert_eq!(frame[0].style.line_width, i as u32 / 6 + 1);
        assert_eq!(frame[0].shape, Shape::Line { x1: 2 * i as u32 + 1, y1: 110, x2: 2 * i as u32 + 71, y2: 110 });
    }
}

#[test]
fn red_line_plan_and_page() {
    let ex = Pipeline::new(&AssetResolver).execute(&fixture("red_line.sp")).unwrap();
    let plan = &ex.plans[0];
    assert!(plan.frames.iter().all(|f| f.len() == 1
        && f[0].shape == Shape::Line { x1: 0, y1: 0, x2: 2, y2: 2 }
        && f[0].style == Style { line_color: "red".into(), ..Style::default() }));
    let golden = include_str!("golden/red_line.html");
    assert_eq!(ex.html, golden);
}

#[test]
fn slow_fixture_times_out() {
    let mut p = Pipeline::new(&AssetResolver);
    p.limits.timeout = std::time::Duration::from_millis(300);
    let e = p.solve(&fixture("pigeonhole.sp")).unwrap_err();
    assert_eq!((e[0].stage, e[0].code.as_str()), (Stage::Solve, "Timeout"));
}
