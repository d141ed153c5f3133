use std::fmt::Write;

use super::ast::*;

/// Deterministic pretty-printer. `parse_program(&format_program(p))` is
/// structurally equal to `p`.
pub fn format_program(p: &Program) -> String {
    let mut out = String::new();
    for inc in &p.includes {
        let _ = writeln!(out, "#include {}", inc.path);
    }
    for c in &p.consts {
        let _ = writeln!(out, "#const {} = {}.", c.name, c.value);
    }
    out.push_str("sorts\n");
    for s in &p.sorts {
        match s {
            SortStmt::Def(d) => {
                let _ = writeln!(out, "  #{} = {}.", d.name, format_sort_expr(&d.expr));
            }
            SortStmt::Extend(e) => {
                let _ = writeln!(out, "  extend #{} with {}.", e.sort, format_sort_expr(&e.expr));
            }
        }
    }
    out.push_str("predicates\n");
    for d in &p.predicates {
        let args: Vec<_> = d.args.iter().map(|a| format!("#{a}")).collect();
        let _ = writeln!(out, "  {}({}).", d.name, args.join(", "));
    }
    out.push_str("rules\n");
    for r in &p.rules {
        let _ = writeln!(out, "  {}", format_rule(r));
    }
    out
}

pub fn format_sort_expr(e: &SortExpr) -> String {
    match e {
        SortExpr::Enum(items) => {
            let items: Vec<_> = items.iter().map(format_term).collect();
            format!("{{{}}}", items.join(", "))
        }
        SortExpr::Range(lo, hi) => format!("{}..{}", format_bound(lo), format_bound(hi)),
        SortExpr::Union(parts) => parts.iter().map(format_sort_expr).collect::<Vec<_>>().join(" + "),
        SortExpr::Record(name, fields) => {
            let fields: Vec<_> = fields.iter().map(|f| format!("#{f}")).collect();
            format!("{}({})", name, fields.join(", "))
        }
        SortExpr::Named(n) => format!("#{n}"),
    }
}

fn format_bound(b: &Bound) -> String {
    match b {
        Bound::Int(n) => n.to_string(),
        Bound::Const(c) => c.clone(),
    }
}

pub fn format_rule(r: &Rule) -> String {
    let head: Vec<_> = r.head.iter().map(format_literal).collect();
    let body: Vec<_> = r
        .body
        .iter()
        .map(|b| match b {
            BodyElement::Literal(l) => format_literal(l),
            BodyElement::Naf(l) => format!("not {}", format_literal(l)),
            BodyElement::Builtin(b) => {
                let lhs = format_term(&b.lhs);
                // parenthesized so a leading minus is not read as classical negation
                let lhs = if lhs.starts_with('-') && lhs[1..].starts_with(|c: char| c.is_ascii_lowercase()) {
                    format!("({lhs})")
                } else {
                    lhs
                };
                format!("{lhs} {} {}", b.op.symbol(), format_term(&b.rhs))
            }
        })
        .collect();
    match (head.is_empty(), body.is_empty()) {
        (_, true) => format!("{}.", head.join(" | ")),
        (true, false) => format!(":- {}.", body.join(", ")),
        (false, false) => format!("{} :- {}.", head.join(" | "), body.join(", ")),
    }
}

pub fn format_literal(l: &Literal) -> String {
    let mut s = String::new();
    if l.negated {
        s.push('-');
    }
    s.push_str(&l.pred);
    if !l.args.is_empty() {
        let args: Vec<_> = l.args.iter().map(format_term).collect();
        let _ = write!(s, "({})", args.join(", "));
    }
    s
}

pub fn format_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Const(c) | Term::Var(c) => out.push_str(c),
        Term::Func(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(out, a);
            }
            out.push(')');
        }
        Term::Binary(op, l, r) => {
            let prec = op.precedence();
            write_operand(out, l, |p| p < prec);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, r, |p| p <= prec);
        }
        Term::Neg(inner) => {
            out.push('-');
            write_operand(out, inner, |_| true);
        }
    }
}

fn write_operand(out: &mut String, t: &Term, needs_parens: impl Fn(u8) -> bool) {
    let wrap = match t {
        Term::Binary(op, ..) => needs_parens(op.precedence()),
        // `-(-3)` rather than `--3`
        Term::Int(n) => *n < 0 && needs_parens(3),
        Term::Neg(_) => needs_parens(3),
        _ => false,
    };
    if wrap {
        out.push('(');
        write_term(out, t);
        out.push(')');
    } else {
        write_term(out, t);
    }
}
