//! Display atoms to frame-indexed render plans.
//!
//! `draw(c)` atoms hold in every frame and `animate(c, i)` atoms only in
//! frame `i`. A shape's style is resolved per frame and per property: an
//! `animate` style command for that frame wins over a `draw` one, which wins
//! over the built-in default.

mod html;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::preprocess::shipped_header;
use crate::solve::AnswerSet;
use crate::syntax::{parse_program, SortExpr, Term};
use crate::value::{GroundLiteral, Value};

pub use html::emit_html;

pub const FPS: u32 = 60;
pub const DEFAULT_CANVAS: u32 = 500;
pub const DEFAULT_FRAMES: u32 = 60;

pub const DEFAULT_COLOR: &str = "black";
pub const DEFAULT_LINE_WIDTH: u32 = 2;
pub const DEFAULT_FONT_SIZE: u32 = 11;
pub const DEFAULT_FONT_FAMILY: &str = "arial";

pub const CAPS: [&str; 3] = ["butt", "round", "square"];
pub const ALIGNMENTS: [&str; 5] = ["left", "right", "center", "start", "end"];

fn header_enum(sort: &str) -> Vec<String> {
    let program = parse_program(shipped_header()).expect("shipped header parses");
    let def = program.sort_defs().find(|d| d.name == sort).expect("sort defined in the shipped header");
    match &def.expr {
        SortExpr::Enum(terms) => terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                other => panic!("unexpected element {other:?} in #{sort}"),
            })
            .collect(),
        other => panic!("#{sort} is not an enumeration: {other:?}"),
    }
}

/// The accepted color names, in the order the header lists them.
pub fn colors() -> &'static [String] {
    static COLORS: OnceLock<Vec<String>> = OnceLock::new();
    COLORS.get_or_init(|| header_enum("color"))
}

/// The accepted font families.
pub fn font_families() -> &'static [String] {
    static FONTS: OnceLock<Vec<String>> = OnceLock::new();
    FONTS.get_or_init(|| header_enum("fontfamily"))
}

/// Canvas dimensions and the frame count used when a program does not set
/// one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CanvasConfig {
    pub width: u32,
    pub height: u32,
    /// Upper bound of line widths and arc radii.
    pub size: u32,
    pub default_frames: u32,
}

impl Default for CanvasConfig {
    fn default() -> Self {
        CanvasConfig {
            width: DEFAULT_CANVAS,
            height: DEFAULT_CANVAS,
            size: DEFAULT_CANVAS,
            default_frames: DEFAULT_FRAMES,
        }
    }
}

impl CanvasConfig {
    /// Reads `canvasWidth`, `canvasHeight`, `canvasSize` and `numFrames`,
    /// falling back to the defaults for absent or non-positive values.
    pub fn from_consts(consts: &HashMap<String, i64>) -> Self {
        let get = |name: &str, default: u32| {
            consts
                .get(name)
                .and_then(|&v| u32::try_from(v).ok())
                .filter(|&v| v > 0 || name == "numFrames")
                .unwrap_or(default)
        };
        let width = get("canvasWidth", DEFAULT_CANVAS);
        let height = get("canvasHeight", DEFAULT_CANVAS);
        CanvasConfig {
            width,
            height,
            size: get("canvasSize", width.min(height)),
            default_frames: get("numFrames", DEFAULT_FRAMES),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Shape {
    Line {
        x1: u32,
        y1: u32,
        x2: u32,
        y2: u32,
    },
    QuadCurve {
        x1: u32,
        y1: u32,
        cx: u32,
        cy: u32,
        x2: u32,
        y2: u32,
    },
    BezierCurve {
        x1: u32,
        y1: u32,
        c1x: u32,
        c1y: u32,
        c2x: u32,
        c2y: u32,
        x2: u32,
        y2: u32,
    },
    /// Clockwise from `start` to `end`, both in sixteenths of a full turn.
    Arc {
        x: u32,
        y: u32,
        r: u32,
        start: u32,
        end: u32,
    },
    Text {
        text: String,
        x: u32,
        y: u32,
    },
}

impl Shape {
    pub fn is_text(&self) -> bool {
        matches!(self, Shape::Text { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    LineColor,
    TextColor,
    LineWidth,
    LineCap,
    TextFont,
    TextAlign,
}

impl Property {
    pub fn command(self) -> &'static str {
        match self {
            Property::LineColor => "line_color",
            Property::TextColor => "text_color",
            Property::LineWidth => "line_width",
            Property::LineCap => "line_cap",
            Property::TextFont => "text_font",
            Property::TextAlign => "text_align",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StyleSetting {
    LineColor(String),
    TextColor(String),
    LineWidth(u32),
    LineCap(String),
    TextFont { size: u32, family: String },
    TextAlign(String),
}

impl StyleSetting {
    pub fn property(&self) -> Property {
        match self {
            StyleSetting::LineColor(_) => Property::LineColor,
            StyleSetting::TextColor(_) => Property::TextColor,
            StyleSetting::LineWidth(_) => Property::LineWidth,
            StyleSetting::LineCap(_) => Property::LineCap,
            StyleSetting::TextFont { .. } => Property::TextFont,
            StyleSetting::TextAlign(_) => Property::TextAlign,
        }
    }
}

impl fmt::Display for StyleSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StyleSetting::LineColor(v) | StyleSetting::TextColor(v) | StyleSetting::LineCap(v) | StyleSetting::TextAlign(v) => {
                f.write_str(v)
            }
            StyleSetting::LineWidth(w) => write!(f, "{w}"),
            StyleSetting::TextFont { size, family } => write!(f, "{size} {family}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DrawingCommand {
    Shape { style: String, shape: Shape },
    Style { style: String, setting: StyleSetting },
    SetNumberOfFrames(u32),
}

/// A validated `draw` (frame `None`) or `animate` atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DisplayAtom {
    pub frame: Option<u32>,
    pub command: DrawingCommand,
    pub source: GroundLiteral,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DisplayError {
    #[error("{atom}: {found} is not a drawing command")]
    NotACommand { atom: String, found: String },
    #[error("{atom}: unknown drawing command {name}")]
    UnknownCommand { atom: String, name: String },
    #[error("{atom}: {command} takes {expected} arguments, found {found}")]
    BadArity { atom: String, command: String, expected: usize, found: usize },
    #[error("{atom}: {command} expects an integer for {argument}, found {found}")]
    NotAnInteger { atom: String, command: String, argument: &'static str, found: String },
    #[error("{atom}: {command} argument {argument} = {value} is outside {lo}..{hi}")]
    OutOfRange { atom: String, command: String, argument: &'static str, value: i64, lo: i64, hi: i64 },
    #[error("{atom}: {command} argument {argument} = {value} is not a known {what}")]
    UnknownValue { atom: String, command: String, argument: &'static str, value: String, what: &'static str },
    #[error("{atom}: frame {frame} is outside 0..{max}")]
    FrameOutOfRange { atom: String, frame: i64, max: u32 },
    #[error("the number of frames is set to both {first} and {second}")]
    ConflictingFrameCount { first: u32, second: u32 },
    #[error("{scope}: {property} of style {style} is set to both {first} and {second}")]
    ConflictingStyle { style: String, property: &'static str, scope: String, first: String, second: String },
}

struct Args<'a> {
    atom: String,
    command: &'a str,
    args: &'a [Value],
}

impl Args<'_> {
    fn int(&self, i: usize, argument: &'static str, lo: i64, hi: i64) -> Result<u32, DisplayError> {
        match &self.args[i] {
            Value::Int(n) if (lo..=hi).contains(n) => Ok(*n as u32),
            Value::Int(n) => Err(DisplayError::OutOfRange {
                atom: self.atom.clone(),
                command: self.command.to_string(),
                argument,
                value: *n,
                lo,
                hi,
            }),
            other => Err(DisplayError::NotAnInteger {
                atom: self.atom.clone(),
                command: self.command.to_string(),
                argument,
                found: other.to_string(),
            }),
        }
    }

    fn one_of(&self, i: usize, argument: &'static str, what: &'static str, allowed: &[&str]) -> Result<String, DisplayError> {
        let v = &self.args[i];
        match v.as_sym() {
            Some(s) if allowed.contains(&s) => Ok(s.to_string()),
            _ => Err(DisplayError::UnknownValue {
                atom: self.atom.clone(),
                command: self.command.to_string(),
                argument,
                value: v.to_string(),
                what,
            }),
        }
    }

    fn name(&self, i: usize, argument: &'static str, what: &'static str) -> Result<String, DisplayError> {
        match &self.args[i] {
            Value::Func(..) => Err(DisplayError::UnknownValue {
                atom: self.atom.clone(),
                command: self.command.to_string(),
                argument,
                value: self.args[i].to_string(),
                what,
            }),
            v => Ok(v.to_string()),
        }
    }
}

fn parse_command(atom: &GroundLiteral, c: &Value, canvas: &CanvasConfig) -> Result<DrawingCommand, DisplayError> {
    let atom_text = atom.to_string();
    let Value::Func(name, args) = c else {
        return Err(DisplayError::NotACommand {
            atom: atom_text,
            found: c.to_string(),
        });
    };
    let expected = match &**name {
        "draw_line" => 5,
        "draw_quad_curve" => 7,
        "draw_bezier_curve" => 9,
        "draw_arc_curve" => 6,
        "draw_text" => 4,
        "line_width" | "line_cap" | "text_align" | "line_color" | "text_color" => 2,
        "text_font" => 3,
        "set_number_of_frames" => 1,
        _ => {
            return Err(DisplayError::UnknownCommand {
                atom: atom_text,
                name: name.to_string(),
            })
        }
    };
    if args.len() != expected {
        return Err(DisplayError::BadArity {
            atom: atom_text,
            command: name.to_string(),
            expected,
            found: args.len(),
        });
    }
    let a = Args {
        atom: atom_text,
        command: name,
        args,
    };
    let (w, h, size) = (i64::from(canvas.width), i64::from(canvas.height), i64::from(canvas.size));
    let x = |i: usize, arg| a.int(i, arg, 0, w);
    let y = |i: usize, arg| a.int(i, arg, 0, h);
    let colors: Vec<&str> = colors().iter().map(String::as_str).collect();
    let fonts: Vec<&str> = font_families().iter().map(String::as_str).collect();
    if &**name == "set_number_of_frames" {
        return Ok(DrawingCommand::SetNumberOfFrames(a.int(0, "frames", 0, i64::from(u32::MAX))?));
    }
    let style = a.name(0, "style name", "style name")?;
    let shape = |shape| Ok(DrawingCommand::Shape { style: style.clone(), shape });
    let setting = |setting| Ok(DrawingCommand::Style { style: style.clone(), setting });
    match &**name {
        "draw_line" => shape(Shape::Line {
            x1: x(1, "xs")?,
            y1: y(2, "ys")?,
            x2: x(3, "xe")?,
            y2: y(4, "ye")?,
        }),
        "draw_quad_curve" => shape(Shape::QuadCurve {
            x1: x(1, "xs")?,
            y1: y(2, "ys")?,
            cx: x(3, "bx")?,
            cy: y(4, "by")?,
            x2: x(5, "xe")?,
            y2: y(6, "ye")?,
        }),
        "draw_bezier_curve" => shape(Shape::BezierCurve {
            x1: x(1, "xs")?,
            y1: y(2, "ys")?,
            c1x: x(3, "b1x")?,
            c1y: y(4, "b1y")?,
            c2x: x(5, "b2x")?,
            c2y: y(6, "b2y")?,
            x2: x(7, "xe")?,
            y2: y(8, "ye")?,
        }),
        "draw_arc_curve" => shape(Shape::Arc {
            x: x(1, "x")?,
            y: y(2, "y")?,
            r: a.int(3, "r", 1, size)?,
            start: a.int(4, "sa", 1, 16)?,
            end: a.int(5, "se", 1, 16)?,
        }),
        "draw_text" => shape(Shape::Text {
            text: a.name(1, "text", "text constant")?,
            x: x(2, "xs")?,
            y: y(3, "ys")?,
        }),
        "line_width" => setting(StyleSetting::LineWidth(a.int(1, "t", 1, size)?)),
        "text_font" => setting(StyleSetting::TextFont {
            size: a.int(1, "fs", 8, 72)?,
            family: a.one_of(2, "ff", "font family", &fonts)?,
        }),
        "line_cap" => setting(StyleSetting::LineCap(a.one_of(1, "c", "cap", &CAPS)?)),
        "text_align" => setting(StyleSetting::TextAlign(a.one_of(1, "al", "alignment", &ALIGNMENTS)?)),
        "line_color" => setting(StyleSetting::LineColor(a.one_of(1, "c", "color", &colors)?)),
        "text_color" => setting(StyleSetting::TextColor(a.one_of(1, "c", "color", &colors)?)),
        _ => unreachable!("arity table covers every command"),
    }
}

/// Selects and validates the positive `draw/1` and `animate/2` atoms of an
/// answer set. Other atoms are ignored. Every malformed atom is reported.
pub fn extract_display_atoms(set: &AnswerSet, canvas: &CanvasConfig) -> Result<Vec<DisplayAtom>, Vec<DisplayError>> {
    let mut atoms = Vec::new();
    let mut errors = Vec::new();
    for l in set.iter().filter(|l| !l.negated) {
        let (command, frame) = match (&*l.pred, &l.args[..]) {
            ("draw", [c]) => (c, None),
            ("animate", [c, f]) => (c, Some(f)),
            _ => continue,
        };
        let frame = match frame {
            None => None,
            Some(Value::Int(n)) if *n >= 0 && *n <= i64::from(u32::MAX) => Some(*n as u32),
            Some(Value::Int(n)) => {
                errors.push(DisplayError::FrameOutOfRange {
                    atom: l.to_string(),
                    frame: *n,
                    max: u32::MAX,
                });
                continue;
            }
            Some(other) => {
                errors.push(DisplayError::NotAnInteger {
                    atom: l.to_string(),
                    command: "animate".into(),
                    argument: "frame",
                    found: other.to_string(),
                });
                continue;
            }
        };
        match parse_command(l, command, canvas) {
            Ok(command) => atoms.push(DisplayAtom {
                frame,
                command,
                source: l.clone(),
            }),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(atoms)
    } else {
        Err(errors)
    }
}

/// Every style property, resolved.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Style {
    pub line_color: String,
    pub text_color: String,
    pub line_width: u32,
    pub line_cap: String,
    pub font_size: u32,
    pub font_family: String,
    pub text_align: String,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            line_color: DEFAULT_COLOR.into(),
            text_color: DEFAULT_COLOR.into(),
            line_width: DEFAULT_LINE_WIDTH,
            line_cap: CAPS[0].into(),
            font_size: DEFAULT_FONT_SIZE,
            font_family: DEFAULT_FONT_FAMILY.into(),
            text_align: ALIGNMENTS[0].into(),
        }
    }
}

impl Style {
    fn apply(&mut self, s: &StyleSetting) {
        match s {
            StyleSetting::LineColor(c) => self.line_color = c.clone(),
            StyleSetting::TextColor(c) => self.text_color = c.clone(),
            StyleSetting::LineWidth(w) => self.line_width = *w,
            StyleSetting::LineCap(c) => self.line_cap = c.clone(),
            StyleSetting::TextFont { size, family } => {
                self.font_size = *size;
                self.font_family = family.clone();
            }
            StyleSetting::TextAlign(a) => self.text_align = a.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StyledShape {
    pub shape: Shape,
    pub style: Style,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Canvas {
    pub w: u32,
    pub h: u32,
}

/// The frames of one answer set's drawing. Frame `i` is shown from `i/fps`
/// seconds for `1/fps` seconds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RenderPlan {
    pub canvas: Canvas,
    pub fps: u32,
    pub frames: Vec<Vec<StyledShape>>,
}

impl RenderPlan {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

type StyleKey = (String, Property);

fn record_setting(
    map: &mut BTreeMap<StyleKey, StyleSetting>,
    style: &str,
    setting: &StyleSetting,
    scope: impl Fn() -> String,
    errors: &mut Vec<DisplayError>,
) {
    let key = (style.to_string(), setting.property());
    match map.get(&key) {
        Some(prev) if prev != setting => {
            let (first, second) = if prev < setting { (prev, setting) } else { (setting, prev) };
            errors.push(DisplayError::ConflictingStyle {
                style: style.to_string(),
                property: setting.property().command(),
                scope: scope(),
                first: first.to_string(),
                second: second.to_string(),
            });
        }
        Some(_) => {}
        None => {
            map.insert(key, setting.clone());
        }
    }
}

/// Builds the plan for one answer set's display atoms. The frame count is
/// `N + 1` where `N` comes from `set_number_of_frames`, else from
/// `canvas.default_frames`.
pub fn compile_render_plan(atoms: &[DisplayAtom], canvas: &CanvasConfig) -> Result<RenderPlan, Vec<DisplayError>> {
    let mut errors = Vec::new();
    let mut n: Option<u32> = None;
    for a in atoms {
        if let DrawingCommand::SetNumberOfFrames(k) = a.command {
            match n {
                Some(prev) if prev != k => errors.push(DisplayError::ConflictingFrameCount {
                    first: prev.min(k),
                    second: prev.max(k),
                }),
                _ => n = Some(k),
            }
        }
    }
    let n = n.unwrap_or(canvas.default_frames);

    let mut draw_styles: BTreeMap<StyleKey, StyleSetting> = BTreeMap::new();
    let mut frame_styles: BTreeMap<u32, BTreeMap<StyleKey, StyleSetting>> = BTreeMap::new();
    let mut draw_shapes: Vec<&DisplayAtom> = Vec::new();
    let mut frame_shapes: BTreeMap<u32, Vec<&DisplayAtom>> = BTreeMap::new();
    for a in atoms {
        if let Some(f) = a.frame {
            if f > n {
                errors.push(DisplayError::FrameOutOfRange {
                    atom: a.source.to_string(),
                    frame: i64::from(f),
                    max: n,
                });
                continue;
            }
        }
        match (&a.command, a.frame) {
            (DrawingCommand::Style { style, setting }, None) => {
                record_setting(&mut draw_styles, style, setting, || "draw".into(), &mut errors)
            }
            (DrawingCommand::Style { style, setting }, Some(f)) => record_setting(
                frame_styles.entry(f).or_default(),
                style,
                setting,
                || format!("frame {f}"),
                &mut errors,
            ),
            (DrawingCommand::Shape { .. }, None) => draw_shapes.push(a),
            (DrawingCommand::Shape { .. }, Some(f)) => frame_shapes.entry(f).or_default().push(a),
            (DrawingCommand::SetNumberOfFrames(_), _) => {}
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    draw_shapes.sort_by(|a, b| a.source.cmp(&b.source));
    for v in frame_shapes.values_mut() {
        v.sort_by(|a, b| a.source.cmp(&b.source));
    }

    let empty = BTreeMap::new();
    let resolve = |style: &str, frame: u32| {
        let mut s = Style::default();
        let per_frame = frame_styles.get(&frame).unwrap_or(&empty);
        for p in [
            Property::LineColor,
            Property::TextColor,
            Property::LineWidth,
            Property::LineCap,
            Property::TextFont,
            Property::TextAlign,
        ] {
            let key = (style.to_string(), p);
            if let Some(setting) = per_frame.get(&key).or_else(|| draw_styles.get(&key)) {
                s.apply(setting);
            }
        }
        s
    };
    let styled = |a: &DisplayAtom, frame: u32| {
        let DrawingCommand::Shape { style, shape } = &a.command else {
            unreachable!("only shapes are collected")
        };
        StyledShape {
            shape: shape.clone(),
            style: resolve(style, frame),
        }
    };
    let frames = (0..=n)
        .map(|i| {
            draw_shapes
                .iter()
                .map(|a| styled(a, i))
                .chain(frame_shapes.get(&i).into_iter().flatten().map(|a| styled(a, i)))
                .collect()
        })
        .collect();
    Ok(RenderPlan {
        canvas: Canvas {
            w: canvas.width,
            h: canvas.height,
        },
        fps: FPS,
        frames,
    })
}

/// Extracts and compiles in one step.
pub fn render_answer_set(set: &AnswerSet, canvas: &CanvasConfig) -> Result<RenderPlan, Vec<DisplayError>> {
    compile_render_plan(&extract_display_atoms(set, canvas)?, canvas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Value {
        match s.parse::<i64>() {
            Ok(n) => Value::Int(n),
            Err(_) => Value::sym(s),
        }
    }

    fn cmd(name: &str, args: &[&str]) -> Value {
        Value::func(name, args.iter().map(|a| v(a)).collect())
    }

    fn draw(c: Value) -> GroundLiteral {
        GroundLiteral::new(false, "draw", vec![c])
    }

    fn animate(c: Value, i: i64) -> GroundLiteral {
        GroundLiteral::new(false, "animate", vec![c, Value::Int(i)])
    }

    fn red_line() -> AnswerSet {
        AnswerSet::new([
            draw(cmd("line_color", &["redline", "red"])),
            draw(cmd("draw_line", &["redline", "0", "0", "2", "2"])),
        ])
    }

    #[test]
    fn header_lists() {
        assert_eq!(colors().len(), 148);
        assert!(colors().iter().any(|c| c == "red"));
        assert!(font_families().iter().any(|f| f == "arial"));
    }

    #[test]
    fn red_line_atoms() {
        let atoms = extract_display_atoms(&red_line(), &CanvasConfig::default()).unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms.iter().filter(|a| matches!(a.command, DrawingCommand::Style { .. })).count(), 1);
        assert_eq!(atoms.iter().filter(|a| matches!(a.command, DrawingCommand::Shape { .. })).count(), 1);
    }

    #[test]
    fn non_display_atoms_are_ignored() {
        let set = AnswerSet::new([GroundLiteral::new(false, "p", vec![v("a")])]);
        assert!(extract_display_atoms(&set, &CanvasConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn bad_arity_names_the_command() {
        let set = AnswerSet::new([draw(cmd("draw_line", &["redline", "0", "0"]))]);
        let errs = extract_display_atoms(&set, &CanvasConfig::default()).unwrap_err();
        assert!(matches!(&errs[0], DisplayError::BadArity { command, expected: 5, found: 3, .. } if command == "draw_line"));
        assert!(errs[0].to_string().contains("draw_line"));
    }

    #[test]
    fn range_and_vocabulary_errors() {
        let canvas = CanvasConfig::default();
        let bad = [
            cmd("draw_line", &["s", "0", "0", "501", "2"]),
            cmd("line_color", &["s", "mauve"]),
            cmd("line_cap", &["s", "arrow"]),
            cmd("text_font", &["s", "7", "arial"]),
            cmd("draw_arc_curve", &["s", "5", "5", "3", "0", "4"]),
            cmd("paint", &["s"]),
            v("plain"),
        ];
        let set = AnswerSet::new(bad.iter().cloned().map(draw));
        let errs = extract_display_atoms(&set, &canvas).unwrap_err();
        assert_eq!(errs.len(), bad.len());
    }

    #[test]
    fn red_line_plan() {
        let plan = render_answer_set(&red_line(), &CanvasConfig::default()).unwrap();
        assert_eq!(plan.frame_count(), 61);
        for f in &plan.frames {
            assert_eq!(f.len(), 1);
            assert_eq!(f[0].shape, Shape::Line { x1: 0, y1: 0, x2: 2, y2: 2 });
            assert_eq!(f[0].style.line_color, "red");
            assert_eq!(f[0].style.line_width, 2);
            assert_eq!(f[0].style.line_cap, "butt");
        }
    }

    #[test]
    fn undefined_style_gets_defaults() {
        let set = AnswerSet::new([draw(cmd("draw_text", &["nobody", "hi", "3", "4"]))]);
        let plan = render_answer_set(&set, &CanvasConfig::default()).unwrap();
        assert_eq!(plan.frames[0][0].style, Style::default());
    }

    #[test]
    fn per_frame_override() {
        let set = AnswerSet::new([
            draw(cmd("line_color", &["s", "blue"])),
            draw(cmd("set_number_of_frames", &["3"])),
            animate(cmd("line_color", &["s", "red"]), 2),
            draw(cmd("draw_line", &["s", "1", "1", "2", "2"])),
        ]);
        let plan = render_answer_set(&set, &CanvasConfig::default()).unwrap();
        let colors: Vec<&str> = plan.frames.iter().map(|f| f[0].style.line_color.as_str()).collect();
        assert_eq!(colors, ["blue", "blue", "red", "blue"]);
    }

    #[test]
    fn animate_shapes_only_in_their_frame() {
        let set = AnswerSet::new([
            draw(cmd("set_number_of_frames", &["2"])),
            animate(cmd("draw_line", &["s", "1", "1", "2", "2"]), 1),
            draw(cmd("draw_text", &["s", "t", "1", "1"])),
        ]);
        let plan = render_answer_set(&set, &CanvasConfig::default()).unwrap();
        let counts: Vec<usize> = plan.frames.iter().map(Vec::len).collect();
        assert_eq!(counts, [1, 2, 1]);
        assert!(plan.frames[1][0].shape.is_text());
    }

    #[test]
    fn conflicts_are_reported() {
        let set = AnswerSet::new([
            draw(cmd("line_color", &["s", "blue"])),
            draw(cmd("line_color", &["s", "red"])),
        ]);
        let errs = render_answer_set(&set, &CanvasConfig::default()).unwrap_err();
        assert!(matches!(&errs[0], DisplayError::ConflictingStyle { property: "line_color", .. }));
        let frames = AnswerSet::new([
            draw(cmd("set_number_of_frames", &["2"])),
            draw(cmd("set_number_of_frames", &["3"])),
        ]);
        assert!(matches!(
            render_answer_set(&frames, &CanvasConfig::default()).unwrap_err()[0],
            DisplayError::ConflictingFrameCount { first: 2, second: 3 }
        ));
        let late = AnswerSet::new([
            draw(cmd("set_number_of_frames", &["2"])),
            animate(cmd("draw_line", &["s", "1", "1", "2", "2"]), 3),
        ]);
        assert!(matches!(
            render_answer_set(&late, &CanvasConfig::default()).unwrap_err()[0],
            DisplayError::FrameOutOfRange { frame: 3, max: 2, .. }
        ));
    }

    #[test]
    fn plan_json_shape() {
        let plan = render_answer_set(&red_line(), &CanvasConfig::default()).unwrap();
        let j = serde_json::to_value(&plan).unwrap();
        assert_eq!(j["canvas"]["w"], 500);
        assert_eq!(j["fps"], 60);
        assert_eq!(j["frames"][0][0]["shape"]["kind"], "line");
        assert_eq!(j["frames"][0][0]["shape"]["x2"], 2);
        assert_eq!(j["frames"][0][0]["style"]["lineColor"], "red");
    }

    #[test]
    fn canvas_from_consts() {
        let consts: HashMap<String, i64> = [("canvasWidth".to_string(), 300), ("numFrames".to_string(), 200)].into();
        let c = CanvasConfig::from_consts(&consts);
        assert_eq!((c.width, c.height, c.size, c.default_frames), (300, 500, 300, 200));
    }
}
