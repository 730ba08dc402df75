//! Prolog-style clause syntax.
//!
//! ```text
//! odd(3).                          % fact
//! p(A,C) :- e(A,B), p(B,C).        % rule; `←` is accepted for `:-`
//! head_pred(f,1).                  % bias directive
//! constant(lt,2,[1,2,3]).
//! ```
//!
//! Variables start with an uppercase letter or `_`; constants are lowercase
//! names, integers or single-quoted atoms. Terms are function-free:
//! a compound term in argument position is rejected.

use std::fmt;

use thiserror::Error;

use crate::logic::{Hypothesis, Literal, Rule, Term};
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Location {
    pub file: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.file.is_empty() {
            write!(f, "{}:{}", self.line, self.col)
        } else {
            write!(f, "{}:{}:{}", self.file, self.line, self.col)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{at}: syntax error: {msg}")]
    Syntax { at: Location, msg: String },
    #[error("{at}: function symbols are not supported: `{name}` applied to arguments")]
    FunctionSymbol { at: Location, name: String },
    #[error("{at}: arity mismatch for `{pred}`: declared {declared}, found {found}")]
    Arity { at: Location, pred: String, declared: usize, found: usize },
    #[error("{at}: unsafe rule: head variable {var} does not occur in the body")]
    UnsafeRule { at: Location, var: String },
    #[error("{at}: example {atom} is both positive and negative")]
    Overlap { at: Location, atom: String },
    #[error("{at}: unknown predicate `{pred}` in examples (target is {expected})")]
    UnknownPredicate { at: Location, pred: String, expected: String },
    #[error("{at}: {msg}")]
    Invalid { at: Location, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl ParseError {
    fn syntax(at: Location, msg: impl Into<String>) -> Self {
        ParseError::Syntax { at, msg: msg.into() }
    }

    pub(crate) fn invalid(at: Location, msg: impl Into<String>) -> Self {
        ParseError::Invalid { at, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Name(String),
    Var(String),
    Int(String),
    Quoted(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Neck,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Name(s) | Token::Var(s) | Token::Int(s) => write!(f, "`{s}`"),
            Token::Quoted(s) => write!(f, "`'{s}'`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::LBracket => f.write_str("`[`"),
            Token::RBracket => f.write_str("`]`"),
            Token::Comma => f.write_str("`,`"),
            Token::Dot => f.write_str("`.`"),
            Token::Neck => f.write_str("`:-`"),
        }
    }
}

fn tokenize(file: &str, src: &str) -> Result<Vec<(Token, Location)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let loc = |line, col| Location { file: file.to_string(), line, col };
    while let Some(&c) = chars.peek() {
        let start = loc(line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '(' | ')' | '[' | ']' | ',' | '.' | '←' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '[' => Token::LBracket,
                    ']' => Token::RBracket,
                    ',' => Token::Comma,
                    '.' => Token::Dot,
                    _ => Token::Neck,
                };
                out.push((tok, start));
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    out.push((Token::Neck, start));
                } else {
                    return Err(ParseError::syntax(start, "expected `:-`"));
                }
            }
            '\'' => {
                bump(&mut chars);
                let mut text = String::new();
                loop {
                    match bump(&mut chars) {
                        Some('\'') => break,
                        Some('\n') | None => return Err(ParseError::syntax(start, "unterminated quoted atom")),
                        Some(c) => text.push(c),
                    }
                }
                out.push((Token::Quoted(text), start));
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut text = String::new();
                text.push(bump(&mut chars).unwrap());
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                if text == "-" {
                    return Err(ParseError::syntax(start, "unexpected `-`"));
                }
                out.push((Token::Int(text), start));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        text.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let first = text.chars().next().unwrap();
                if first.is_uppercase() || first == '_' {
                    out.push((Token::Var(text), start));
                } else {
                    out.push((Token::Name(text), start));
                }
            }
            other => return Err(ParseError::syntax(start, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// Generic term tree used before validation.
#[derive(Clone, Debug)]
pub(crate) enum Ast {
    Var(String, Location),
    Const(String, Location),
    Compound(String, Vec<Ast>, Location),
    List(Vec<Ast>, Location),
}

impl Ast {
    pub(crate) fn location(&self) -> &Location {
        match self {
            Ast::Var(_, l) | Ast::Const(_, l) | Ast::Compound(_, _, l) | Ast::List(_, l) => l,
        }
    }

    pub(crate) fn functor(&self) -> Option<(&str, &[Ast])> {
        match self {
            Ast::Const(name, _) => Some((name, &[])),
            Ast::Compound(name, args, _) => Some((name, args)),
            _ => None,
        }
    }

    pub(crate) fn to_term(&self) -> Result<Term, ParseError> {
        match self {
            Ast::Var(name, _) => Ok(Term::Var(Symbol::intern(name))),
            Ast::Const(name, _) => Ok(Term::Const(Symbol::intern(name))),
            Ast::Compound(name, _, at) => Err(ParseError::FunctionSymbol { at: at.clone(), name: name.clone() }),
            Ast::List(_, at) => Err(ParseError::syntax(at.clone(), "lists are only allowed in bias directives")),
        }
    }

    pub(crate) fn to_literal(&self) -> Result<Literal, ParseError> {
        match self {
            Ast::Const(name, _) => Ok(Literal::new(Symbol::intern(name), Vec::new())),
            Ast::Compound(name, args, _) => {
                let args = args.iter().map(Ast::to_term).collect::<Result<Vec<_>, _>>()?;
                Ok(Literal::new(Symbol::intern(name), args))
            }
            Ast::Var(_, at) => Err(ParseError::syntax(at.clone(), "expected a literal, found a variable")),
            Ast::List(_, at) => Err(ParseError::syntax(at.clone(), "expected a literal, found a list")),
        }
    }
}

/// One parsed clause: `head.` or `head :- body.`
#[derive(Clone, Debug)]
pub(crate) struct RawClause {
    pub head: Ast,
    pub body: Vec<Ast>,
}

impl RawClause {
    pub(crate) fn location(&self) -> &Location {
        self.head.location()
    }

    pub(crate) fn to_rule(&self) -> Result<Rule, ParseError> {
        let head = self.head.to_literal()?;
        let body = self.body.iter().map(Ast::to_literal).collect::<Result<Vec<_>, _>>()?;
        Ok(Rule::new(head, body))
    }
}

struct Parser {
    tokens: Vec<(Token, Location)>,
    pos: usize,
    eof: Location,
}

impl Parser {
    fn new(file: &str, src: &str) -> Result<Parser, ParseError> {
        let tokens = tokenize(file, src)?;
        let lines = src.lines().count().max(1);
        let last_col = src.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        let eof = Location { file: file.to_string(), line: lines, col: last_col };
        Ok(Parser { tokens, pos: 0, eof })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Location {
        self.tokens.get(self.pos).map(|(_, l)| l.clone()).unwrap_or_else(|| self.eof.clone())
    }

    fn next(&mut self) -> Option<(Token, Location)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        let at = self.here();
        match self.next() {
            Some((t, _)) if t == want => Ok(()),
            Some((t, _)) => Err(ParseError::syntax(at, format!("expected {want}, found {t}"))),
            None => Err(ParseError::syntax(at, format!("expected {want}, found end of input"))),
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let at = self.here();
        match self.next() {
            Some((Token::Var(v), at)) => Ok(Ast::Var(v, at)),
            Some((Token::Int(i), at)) => Ok(Ast::Const(i, at)),
            Some((Token::Quoted(q), at)) => Ok(Ast::Const(q, at)),
            Some((Token::Name(name), at)) => {
                if self.peek() == Some(&Token::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.term()?];
                    while self.peek() == Some(&Token::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    self.expect(Token::RParen)?;
                    Ok(Ast::Compound(name, args, at))
                } else {
                    Ok(Ast::Const(name, at))
                }
            }
            Some((Token::LBracket, at)) => {
                let mut items = Vec::new();
                if self.peek() == Some(&Token::RBracket) {
                    self.pos += 1;
                    return Ok(Ast::List(items, at));
                }
                items.push(self.term()?);
                while self.peek() == Some(&Token::Comma) {
                    self.pos += 1;
                    items.push(self.term()?);
                }
                self.expect(Token::RBracket)?;
                Ok(Ast::List(items, at))
            }
            Some((t, _)) => Err(ParseError::syntax(at, format!("expected a term, found {t}"))),
            None => Err(ParseError::syntax(at, "expected a term, found end of input")),
        }
    }

    fn clause(&mut self, require_dot: bool) -> Result<RawClause, ParseError> {
        let head = self.term()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Token::Neck) {
            self.pos += 1;
            body.push(self.term()?);
            while self.peek() == Some(&Token::Comma) {
                self.pos += 1;
                body.push(self.term()?);
            }
        }
        if require_dot || self.peek().is_some() {
            self.expect(Token::Dot)?;
        }
        Ok(RawClause { head, body })
    }
}

pub(crate) fn parse_clauses(file: &str, src: &str) -> Result<Vec<RawClause>, ParseError> {
    let mut parser = Parser::new(file, src)?;
    let mut out = Vec::new();
    while parser.peek().is_some() {
        out.push(parser.clause(true)?);
    }
    Ok(out)
}

/// Parses a single rule; the trailing `.` is optional.
pub fn parse_rule(src: &str) -> Result<Rule, ParseError> {
    let mut parser = Parser::new("", src)?;
    let clause = parser.clause(false)?;
    if parser.peek().is_some() {
        return Err(ParseError::syntax(parser.here(), "trailing input after rule"));
    }
    clause.to_rule()
}

pub fn parse_literal(src: &str) -> Result<Literal, ParseError> {
    let mut parser = Parser::new("", src)?;
    let ast = parser.term()?;
    if parser.peek().is_some() {
        return Err(ParseError::syntax(parser.here(), "trailing input after literal"));
    }
    ast.to_literal()
}

/// Parses a `.`-terminated list of rules into a hypothesis.
pub fn parse_rules(file: &str, src: &str) -> Result<Vec<Rule>, ParseError> {
    parse_clauses(file, src)?.iter().map(RawClause::to_rule).collect()
}

pub fn parse_hypothesis(src: &str) -> Result<Hypothesis, ParseError> {
    Ok(Hypothesis::new(parse_rules("", src)?))
}
