use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

type PResult<T> = Result<T, SyntaxError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    None,
    Sorts,
    Predicates,
    Rules,
}

fn section_keyword(tok: &Tok) -> Option<Section> {
    match tok {
        Tok::Ident(s) if s == "sorts" => Some(Section::Sorts),
        Tok::Ident(s) if s == "predicates" => Some(Section::Predicates),
        Tok::Ident(s) if s == "rules" => Some(Section::Rules),
        _ => None,
    }
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
}

/// Parses a whole program. Errors are recovered at statement boundaries, so
/// every syntax error in the file is reported in one pass.
pub fn parse_program(src: &str) -> Result<Program, Vec<SyntaxError>> {
    let (tokens, mut errors) = tokenize(src);
    let mut p = Parser { tokens, idx: 0 };
    let mut program = Program::default();
    let mut section = Section::None;

    while p.peek() != &Tok::Eof {
        let start = p.idx;
        if let Err(e) = p.statement(&mut section, &mut program) {
            errors.push(e);
            p.recover(start);
        }
    }

    if errors.is_empty() {
        Ok(program)
    } else {
        errors.sort_by_key(|e| e.pos.offset);
        Err(errors)
    }
}

/// Parses a query: one literal, optionally followed by `?` (or `.`).
pub fn parse_query(src: &str) -> Result<Query, SyntaxError> {
    let (tokens, errors) = tokenize(src);
    if let Some(e) = errors.into_iter().next() {
        return Err(e);
    }
    let mut p = Parser { tokens, idx: 0 };
    let literal = p.literal()?;
    if matches!(p.peek(), Tok::Question | Tok::Dot) {
        p.bump();
    }
    match p.peek() {
        Tok::Eof => Ok(Query { literal }),
        Tok::Comma => Err(p.error("a query is a single literal; conjunctions are not supported", &[])),
        Tok::If => Err(p.error("a query is a single literal, not a rule", &[])),
        _ => Err(p.error("unexpected input after the query", &["`?`", "end of input"])),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.idx + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.idx].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.idx].clone();
        if t.tok != Tok::Eof {
            self.idx += 1;
        }
        t
    }

    fn error(&self, message: &str, expected: &[&str]) -> SyntaxError {
        let t = &self.tokens[self.idx];
        SyntaxError::new(t.pos, message, &t.lexeme).expecting(expected)
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        let what = format!("unexpected {}", self.peek().describe());
        self.error(&what, expected)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[tok.describe()]))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn sort_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::SortName(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["sort name"])),
        }
    }

    /// Skips to just past the next `.`, stopping early at anything that can
    /// only start a new statement. Always consumes at least one token when
    /// the failed statement consumed none.
    fn recover(&mut self, start: usize) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Dot => {
                    self.bump();
                    return;
                }
                t if self.idx > start
                    && (matches!(t, Tok::ConstKw | Tok::Include(_)) || section_keyword(t).is_some()) =>
                {
                    return
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn statement(&mut self, section: &mut Section, program: &mut Program) -> PResult<()> {
        match self.peek().clone() {
            Tok::ConstKw => {
                let pos = self.pos();
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                let value = self.integer()?;
                self.expect(Tok::Dot)?;
                program.consts.push(ConstDef { name, value, pos });
                Ok(())
            }
            Tok::Include(path) => {
                let pos = self.pos();
                self.bump();
                program.includes.push(Include { path, pos });
                Ok(())
            }
            t if section_keyword(&t).is_some() => {
                let next = section_keyword(&t).unwrap();
                if next <= *section {
                    return Err(self.error(
                        "sections must appear once each, in the order sorts, predicates, rules",
                        &[],
                    ));
                }
                self.bump();
                *section = next;
                Ok(())
            }
            _ => match *section {
                Section::None => Err(self.unexpected(&["`sorts`", "`predicates`", "`rules`", "`#const`", "`#include`"])),
                Section::Sorts => {
                    let stmt = self.sort_statement()?;
                    program.sorts.push(stmt);
                    Ok(())
                }
                Section::Predicates => {
                    let decl = self.predicate_decl()?;
                    program.predicates.push(decl);
                    Ok(())
                }
                Section::Rules => {
                    let rule = self.rule()?;
                    program.rules.push(rule);
                    Ok(())
                }
            },
        }
    }

    fn integer(&mut self) -> PResult<i64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn sort_statement(&mut self) -> PResult<SortStmt> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::SortName(name) => {
                self.bump();
                self.expect(Tok::Eq)?;
                let expr = self.sort_expr()?;
                self.expect(Tok::Dot)?;
                Ok(SortStmt::Def(SortDef { name, expr, pos }))
            }
            Tok::Ident(kw) if kw == "extend" => {
                self.bump();
                let sort = self.sort_name()?;
                match self.peek() {
                    Tok::Ident(w) if w == "with" => {
                        self.bump();
                    }
                    _ => return Err(self.unexpected(&["`with`"])),
                }
                let expr = self.sort_expr()?;
                self.expect(Tok::Dot)?;
                Ok(SortStmt::Extend(SubsortDecl { sort, expr, pos }))
            }
            _ => Err(self.unexpected(&["sort name", "`extend`"])),
        }
    }

    fn sort_expr(&mut self) -> PResult<SortExpr> {
        let first = self.sort_atom()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut parts = vec![first];
        while *self.peek() == Tok::Plus {
            self.bump();
            parts.push(self.sort_atom()?);
        }
        Ok(SortExpr::Union(parts))
    }

    fn sort_atom(&mut self) -> PResult<SortExpr> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        let start = self.idx;
                        let t = self.term()?;
                        if !t.is_ground() || contains_arithmetic(&t) {
                            self.idx = start;
                            return Err(self.error(
                                "sort elements must be constants, integers or ground records",
                                &[],
                            ));
                        }
                        items.push(t);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(SortExpr::Enum(items))
            }
            Tok::SortName(name) => {
                self.bump();
                Ok(SortExpr::Named(name))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let mut fields = vec![self.sort_name()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    fields.push(self.sort_name()?);
                }
                self.expect(Tok::RParen)?;
                Ok(SortExpr::Record(name, fields))
            }
            Tok::Ident(_) | Tok::Int(_) | Tok::Minus => {
                let lo = self.bound()?;
                self.expect(Tok::DotDot)?;
                let hi = self.bound()?;
                Ok(SortExpr::Range(lo, hi))
            }
            _ => Err(self.unexpected(&["`{`", "sort name", "record name", "range"])),
        }
    }

    fn bound(&mut self) -> PResult<Bound> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Bound::Const(name))
            }
            _ => Ok(Bound::Int(self.integer()?)),
        }
    }

    fn predicate_decl(&mut self) -> PResult<PredicateDecl> {
        let pos = self.pos();
        let name = self.ident()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                args.push(self.sort_name()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.sort_name()?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Dot)?;
        Ok(PredicateDecl { name, args, pos })
    }

    fn rule(&mut self) -> PResult<Rule> {
        let pos = self.pos();
        let mut head = Vec::new();
        if *self.peek() != Tok::If {
            head.push(self.head_literal()?);
            while *self.peek() == Tok::Bar {
                self.bump();
                head.push(self.head_literal()?);
            }
        }
        let mut body = Vec::new();
        match self.peek() {
            Tok::If => {
                self.bump();
                body.push(self.body_element()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    body.push(self.body_element()?);
                }
                self.expect(Tok::Dot)?;
            }
            Tok::Dot => {
                self.bump();
            }
            _ if head.is_empty() => return Err(self.unexpected(&["`:-`"])),
            _ => return Err(self.unexpected(&["`.`", "`:-`", "`|`"])),
        }
        Ok(Rule { head, body, pos })
    }

    fn head_literal(&mut self) -> PResult<Literal> {
        let start = self.idx;
        let lit = self.literal();
        if lit.is_err() || is_relop(self.peek()) {
            let failed_at = self.idx;
            self.idx = start;
            if self.term().is_ok() && is_relop(self.peek()) {
                self.idx = start;
                return Err(self.error("comparisons are only allowed in rule bodies", &[]));
            }
            self.idx = failed_at;
        }
        lit
    }

    fn literal(&mut self) -> PResult<Literal> {
        let pos = self.pos();
        let negated = if matches!(self.peek(), Tok::Minus | Tok::Not) {
            self.bump();
            true
        } else {
            false
        };
        let pred = match self.peek().clone() {
            Tok::Ident(s) if s != "not" => {
                self.bump();
                s
            }
            _ => return Err(self.unexpected(&["predicate name"])),
        };
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            let args = self.term_list(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            args
        } else {
            Vec::new()
        };
        Ok(Literal {
            negated,
            pred,
            args,
            pos,
        })
    }

    fn body_element(&mut self) -> PResult<BodyElement> {
        let pos = self.pos();
        match self.peek() {
            Tok::Ident(s) if s == "not" => {
                self.bump();
                return Ok(BodyElement::Naf(self.literal()?));
            }
            Tok::Not => return Ok(BodyElement::Literal(self.literal()?)),
            Tok::Minus if matches!(self.peek_at(1), Tok::Ident(_)) => {
                return Ok(BodyElement::Literal(self.literal()?));
            }
            _ => {}
        }
        let lhs = self.term()?;
        if let Some(op) = relop(self.peek()) {
            self.bump();
            let rhs = self.term()?;
            return Ok(BodyElement::Builtin(Builtin { op, lhs, rhs, pos }));
        }
        match lhs {
            Term::Const(pred) => Ok(BodyElement::Literal(Literal {
                negated: false,
                pred,
                args: Vec::new(),
                pos,
            })),
            Term::Func(pred, args) => Ok(BodyElement::Literal(Literal {
                negated: false,
                pred,
                args,
                pos,
            })),
            _ => Err(self.unexpected(&["comparison operator"])),
        }
    }

    fn term_list(&mut self, close: Tok) -> PResult<Vec<Term>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            return Ok(out);
        }
        out.push(self.term()?);
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.term()?);
        }
        Ok(out)
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Term::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(match self.unary()? {
                Term::Int(n) => Term::Int(-n),
                t => Term::Neg(Box::new(t)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Ident(name) if name != "not" => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self.term_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    if args.is_empty() {
                        Ok(Term::Const(name))
                    } else {
                        Ok(Term::Func(name, args))
                    }
                } else {
                    Ok(Term::Const(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.unexpected(&["term"])),
        }
    }
}

fn relop(tok: &Tok) -> Option<RelOp> {
    Some(match tok {
        Tok::Eq => RelOp::Eq,
        Tok::Neq => RelOp::Neq,
        Tok::Lt => RelOp::Lt,
        Tok::Le => RelOp::Le,
        Tok::Gt => RelOp::Gt,
        Tok::Ge => RelOp::Ge,
        _ => return None,
    })
}

fn is_relop(tok: &Tok) -> bool {
    relop(tok).is_some()
}

fn contains_arithmetic(t: &Term) -> bool {
    match t {
        Term::Binary(..) | Term::Neg(_) => true,
        Term::Func(_, args) => args.iter().any(contains_arithmetic),
        _ => false,
    }
}
