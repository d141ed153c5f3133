//! Standalone HTML segment: a canvas, one script with an animation function
//! per plan, and one numbered button per plan.

use std::fmt::Write;

use super::{RenderPlan, Shape, StyledShape, DEFAULT_CANVAS, FPS};

fn js_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn emit_shape(out: &mut String, s: &StyledShape) {
    let st = &s.style;
    let stroke = |out: &mut String| {
        let _ = writeln!(out, "      ctx.strokeStyle={};", js_string(&st.line_color));
        let _ = writeln!(out, "      ctx.lineWidth={};", st.line_width);
        let _ = writeln!(out, "      ctx.lineCap={};", js_string(&st.line_cap));
        out.push_str("      ctx.stroke();\n");
    };
    match &s.shape {
        Shape::Line { x1, y1, x2, y2 } => {
            out.push_str("      ctx.beginPath();\n");
            let _ = writeln!(out, "      ctx.moveTo({x1},{y1});");
            let _ = writeln!(out, "      ctx.lineTo({x2},{y2});");
            stroke(out);
        }
        Shape::QuadCurve { x1, y1, cx, cy, x2, y2 } => {
            out.push_str("      ctx.beginPath();\n");
            let _ = writeln!(out, "      ctx.moveTo({x1},{y1});");
            let _ = writeln!(out, "      ctx.quadraticCurveTo({cx},{cy},{x2},{y2});");
            stroke(out);
        }
        Shape::BezierCurve { x1, y1, c1x, c1y, c2x, c2y, x2, y2 } => {
            out.push_str("      ctx.beginPath();\n");
            let _ = writeln!(out, "      ctx.moveTo({x1},{y1});");
            let _ = writeln!(out, "      ctx.bezierCurveTo({c1x},{c1y},{c2x},{c2y},{x2},{y2});");
            stroke(out);
        }
        Shape::Arc { x, y, r, start, end } => {
            out.push_str("      ctx.beginPath();\n");
            let _ = writeln!(out, "      ctx.arc({x},{y},{r},{start}*Math.PI/8,{end}*Math.PI/8);");
            stroke(out);
        }
        Shape::Text { text, x, y } => {
            let _ = writeln!(out, "      ctx.fillStyle={};", js_string(&st.text_color));
            let _ = writeln!(out, "      ctx.font={};", js_string(&format!("{}px {}", st.font_size, st.font_family)));
            let _ = writeln!(out, "      ctx.textAlign={};", js_string(&st.text_align));
            let _ = writeln!(out, "      ctx.fillText({},{x},{y});", js_string(text));
        }
    }
}

/// The segment for `plans`, one per answer set. Canvas dimensions come from
/// the first plan. Output depends only on the plans.
pub fn emit_html(plans: &[RenderPlan]) -> String {
    let (w, h) = plans.first().map_or((DEFAULT_CANVAS, DEFAULT_CANVAS), |p| (p.canvas.w, p.canvas.h));
    let mut out = String::new();
    let _ = writeln!(out, "<canvas id=\"myCanvas\" width=\"{w}\" height=\"{h}\"> </canvas>");
    out.push_str("<script>\n");
    out.push_str("var sparcTimer = null;\n");
    out.push_str("function play(drawings) {\n");
    out.push_str("  var ctx = mainf();\n");
    out.push_str("  if (sparcTimer !== null) { cancelAnimationFrame(sparcTimer); sparcTimer = null; }\n");
    out.push_str("  if (drawings.length === 0) { return; }\n");
    out.push_str("  var start = null;\n");
    out.push_str("  function step(now) {\n");
    out.push_str("    if (start === null) { start = now; }\n");
    let _ = writeln!(
        out,
        "    var i = Math.min(Math.floor((now - start) * {FPS} / 1000), drawings.length - 1);"
    );
    let _ = writeln!(out, "    ctx.clearRect(0, 0, {w}, {h});");
    out.push_str("    drawings[i](ctx);\n");
    out.push_str("    sparcTimer = i < drawings.length - 1 ? requestAnimationFrame(step) : null;\n");
    out.push_str("  }\n");
    out.push_str("  sparcTimer = requestAnimationFrame(step);\n");
    out.push_str("}\n");
    for (k, plan) in plans.iter().enumerate() {
        let _ = writeln!(out, "function animate{k}() {{");
        out.push_str("  var drawings = [\n");
        for frame in &plan.frames {
            out.push_str("    function (ctx) {\n");
            for s in frame {
                emit_shape(&mut out, s);
            }
            out.push_str("    },\n");
        }
        out.push_str("  ];\n");
        out.push_str("  play(drawings);\n");
        out.push_str("}\n");
    }
    out.push_str("function mainf() {\n");
    let names: Vec<String> = (0..plans.len()).map(|k| format!("animate{k}")).collect();
    let _ = writeln!(out, "  var animations = [{}];", names.join(", "));
    out.push_str("  return document.getElementById(\"myCanvas\").getContext(\"2d\");\n");
    out.push_str("}\n");
    out.push_str("</script>\n");
    for k in 0..plans.len() {
        let _ = writeln!(out, "<button onclick=\"animate{k}()\"> {k} </button>");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{Canvas, Style};
    use super::*;

    fn plan(frames: Vec<Vec<StyledShape>>) -> RenderPlan {
        RenderPlan {
            canvas: Canvas { w: 500, h: 500 },
            fps: FPS,
            frames,
        }
    }

    #[test]
    fn red_line_statements_in_order() {
        let shape = StyledShape {
            shape: Shape::Line { x1: 0, y1: 0, x2: 2, y2: 2 },
            style: Style {
                line_color: "red".into(),
                ..Style::default()
            },
        };
        let html = emit_html(&[plan(vec![vec![shape]])]);
        assert!(html.starts_with("<canvas id=\"myCanvas\" width=\"500\" height=\"500\"> </canvas>\n"));
        let at = |needle: &str| html.find(needle).unwrap_or_else(|| panic!("missing {needle}"));
        assert!(at("ctx.beginPath();") < at("ctx.moveTo(0,0);"));
        assert!(at("ctx.moveTo(0,0);") < at("ctx.lineTo(2,2);"));
        assert!(at("ctx.lineTo(2,2);") < at("ctx.strokeStyle=\"red\";"));
        assert!(at("ctx.strokeStyle=\"red\";") < at("ctx.stroke();"));
        assert!(html.ends_with("<button onclick=\"animate0()\"> 0 </button>\n"));
    }

    #[test]
    fn one_button_per_plan_and_mainf_last() {
        let html = emit_html(&[plan(vec![]), plan(vec![]), plan(vec![])]);
        assert!(html.contains("<button onclick=\"animate2()\"> 2 </button>"));
        assert_eq!(html.matches("<button").count(), 3);
        assert!(html.find("function animate2()").unwrap() < html.find("function mainf()").unwrap());
        assert_eq!(html, emit_html(&[plan(vec![]), plan(vec![]), plan(vec![])]));
    }

    #[test]
    fn text_and_arc() {
        let text = StyledShape {
            shape: Shape::Text {
                text: "hello".into(),
                x: 5,
                y: 25,
            },
            style: Style::default(),
        };
        let arc = StyledShape {
            shape: Shape::Arc {
                x: 10,
                y: 10,
                r: 5,
                start: 1,
                end: 16,
            },
            style: Style::default(),
        };
        let html = emit_html(&[plan(vec![vec![text, arc]])]);
        assert!(html.contains("ctx.font=\"11px arial\";"));
        assert!(html.contains("ctx.fillText(\"hello\",5,25);"));
        assert!(html.contains("ctx.arc(10,10,5,1*Math.PI/8,16*Math.PI/8);"));
    }
}
