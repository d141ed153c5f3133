use super::ast::{IncludePath, Pos};
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    SortName(String),
    Int(i64),
    ConstKw,
    Include(IncludePath),
    Dot,
    DotDot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    If,
    Bar,
    Plus,
    Minus,
    Star,
    Slash,
    Question,
    /// `¬`, the non-ASCII spelling of classical negation.
    Not,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::Var(_) => "variable",
            Tok::SortName(_) => "sort name",
            Tok::Int(_) => "integer",
            Tok::ConstKw => "`#const`",
            Tok::Include(_) => "`#include`",
            Tok::Dot => "`.`",
            Tok::DotDot => "`..`",
            Tok::Comma => "`,`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Eq => "`=`",
            Tok::Neq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::If => "`:-`",
            Tok::Bar => "`|`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Question => "`?`",
            Tok::Not => "`¬`",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
    pub lexeme: String,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            offset: self.offset,
            line: self.line,
            col: self.col,
        }
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.offset;
        while self.peek().is_some_and(&f) {
            self.bump();
        }
        &self.src[start..self.offset]
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `src` into tokens. Unrecognised characters are reported and
/// skipped; lexing always reaches the end of the input.
pub(crate) fn tokenize(src: &str) -> (Vec<Token>, Vec<SyntaxError>) {
    let mut cur = Cursor {
        src,
        offset: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    loop {
        // whitespace and `%` comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('%') => {
                    cur.eat_while(|c| c != '\n');
                }
                _ => break,
            }
        }
        let pos = cur.pos();
        let start = cur.offset;
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                tok: Tok::Eof,
                pos,
                lexeme: String::new(),
            });
            break;
        };

        let tok = if c.is_ascii_lowercase() {
            Tok::Ident(cur.eat_while(is_ident_char).to_string())
        } else if c.is_ascii_uppercase() {
            Tok::Var(cur.eat_while(is_ident_char).to_string())
        } else if c.is_ascii_digit() {
            let digits = cur.eat_while(|c| c.is_ascii_digit());
            match digits.parse::<i64>() {
                Ok(n) => Tok::Int(n),
                Err(_) => {
                    errors.push(SyntaxError::new(pos, "integer literal out of range", digits));
                    Tok::Int(0)
                }
            }
        } else if c == '#' {
            cur.bump();
            let word = cur.eat_while(is_ident_char);
            match word {
                "const" => Tok::ConstKw,
                "include" => match lex_include_path(&mut cur) {
                    Ok(path) => Tok::Include(path),
                    Err(e) => {
                        errors.push(e);
                        continue;
                    }
                },
                "" => {
                    errors.push(SyntaxError::new(pos, "expected a sort name after `#`", "#"));
                    continue;
                }
                w if w.starts_with(|c: char| c.is_ascii_digit()) => {
                    errors.push(SyntaxError::new(pos, "sort names must not start with a digit", &src[start..cur.offset]));
                    continue;
                }
                w => Tok::SortName(w.to_string()),
            }
        } else {
            cur.bump();
            match c {
                '.' if cur.peek() == Some('.') => {
                    cur.bump();
                    Tok::DotDot
                }
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '=' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Eq
                }
                '=' => Tok::Eq,
                '!' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Neq
                }
                '<' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Le
                }
                '<' if cur.peek() == Some('>') => {
                    cur.bump();
                    Tok::Neq
                }
                '<' => Tok::Lt,
                '>' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Ge
                }
                '>' => Tok::Gt,
                ':' if cur.peek() == Some('-') => {
                    cur.bump();
                    Tok::If
                }
                '|' => Tok::Bar,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '?' => Tok::Question,
                '¬' => Tok::Not,
                _ => {
                    errors.push(SyntaxError::new(pos, "unexpected character", &src[start..cur.offset]));
                    continue;
                }
            }
        };
        tokens.push(Token {
            tok,
            pos,
            lexeme: src[start..cur.offset].to_string(),
        });
    }
    (tokens, errors)
}

fn lex_include_path(cur: &mut Cursor<'_>) -> Result<IncludePath, SyntaxError> {
    cur.eat_while(|c| c == ' ' || c == '\t');
    let pos = cur.pos();
    let (close, system) = match cur.peek() {
        Some('<') => ('>', true),
        Some('"') => ('"', false),
        _ => {
            let rest: String = cur.src[cur.offset..].chars().take_while(|c| !c.is_whitespace()).collect();
            return Err(SyntaxError::new(pos, "expected `<file>` or `\"file\"` after #include", &rest)
                .expecting(&["`<`", "`\"`"]));
        }
    };
    cur.bump();
    let name = cur.eat_while(|c| c != close && c != '\n');
    if cur.peek() != Some(close) || name.trim().is_empty() {
        return Err(SyntaxError::new(pos, "unterminated include path", name));
    }
    let name = name.trim().to_string();
    cur.bump();
    // A dot directly after the path is a statement terminator, not part of it.
    if cur.peek() == Some('.') && cur.peek2() != Some('.') {
        cur.bump();
    }
    Ok(if system {
        IncludePath::System(name)
    } else {
        IncludePath::Local(name)
    })
}
