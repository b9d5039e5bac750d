//! Lexer and recursive-descent parsers for formula, program and
//! specification files.
//!
//! Formulas: `true false ~f (f & g) (f | g) (f -> g) X f (f U g) (f W g)
//! F f G f E x. f` with backtick atoms handed to the constraint system.
//! `->` binds loosest and, like `&`, `|`, `U` and `W`, associates to the right.
//!
//! Programs: `p(y) :- agent .` with agents `skip`, `tell C`,
//! `now C then A else A`, `ask C -> A + ask D -> B`, `A || B`,
//! `exists x A`, calls `p(x)`, and parentheses. Specifications:
//! `p(y) |= formula .`. Lines starting with `#` are comments.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::constraint::{Constraint, ConstraintError, ConstraintSystem, Variable};
use crate::formula::Formula;
use crate::tccp::{Agent, Declaration, Interpretation, ProcessFormula, ProcessId, Program, TccpError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: {source}")]
    Atom {
        line: usize,
        col: usize,
        source: ConstraintError,
    },
    #[error("{line}:{col}: the specification of `{process}` uses an existential quantifier")]
    SpecUsesExists { line: usize, col: usize, process: String },
    #[error("{line}:{col}: `{process}` is specified twice")]
    DuplicateSpec { line: usize, col: usize, process: String },
    #[error(transparent)]
    Program(#[from] TccpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Atom(String),
    LParen,
    RParen,
    Tilde,
    Amp,
    Bar,
    BarBar,
    Arrow,
    Dot,
    Comma,
    Semi,
    Plus,
    Defines,
    Models,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Atom(s) => format!("atom `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::BarBar => "`||`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Defines => "`:-`".into(),
            Tok::Models => "`|=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        let tok = if c == '`' {
            bump(&mut chars);
            let mut s = String::new();
            loop {
                match bump(&mut chars) {
                    Some('`') => break,
                    Some(c) => s.push(c),
                    None => return Err(syntax(l, k, "unterminated atom")),
                }
            }
            Tok::Atom(s)
        } else if is_ident_char(c) {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| is_ident_char(c)) {
                s.push(bump(&mut chars).unwrap());
            }
            Tok::Ident(s)
        } else {
            bump(&mut chars);
            let next = chars.peek().copied();
            let mut two = |tok: Tok, chars: &mut std::iter::Peekable<std::str::Chars>| {
                bump(chars);
                tok
            };
            match (c, next) {
                ('|', Some('|')) => two(Tok::BarBar, &mut chars),
                ('|', Some('=')) => two(Tok::Models, &mut chars),
                ('-', Some('>')) => two(Tok::Arrow, &mut chars),
                (':', Some('-')) => two(Tok::Defines, &mut chars),
                ('|', _) => Tok::Bar,
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                ('~', _) => Tok::Tilde,
                ('&', _) => Tok::Amp,
                ('.', _) => Tok::Dot,
                (',', _) => Tok::Comma,
                (';', _) => Tok::Semi,
                ('+', _) => Tok::Plus,
                _ => return Err(syntax(l, k, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Spanned { tok, line: l, col: k });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    cs: &'a dyn ConstraintSystem,
}

impl<'a> Parser<'a> {
    fn new(text: &str, cs: &'a dyn ConstraintSystem) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            cs,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(syntax(
            line,
            col,
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.error("an identifier"),
        }
    }

    fn variable(&mut self) -> Result<Variable, ParseError> {
        let (line, col) = self.here();
        let name = self.ident()?;
        Variable::new(&name).map_err(|source| ParseError::Atom { line, col, source })
    }

    fn constraint(&mut self) -> Result<Constraint, ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Atom(text) => {
                self.advance();
                self.cs
                    .parse_atom(&text)
                    .map_err(|source| ParseError::Atom { line, col, source })
            }
            _ => self.error("a backtick-quoted constraint"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            return Ok(Formula::implies(lhs, self.formula()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.conjunction()?;
        if *self.peek() == Tok::Bar {
            self.advance();
            return Ok(Formula::or(lhs, self.disjunction()?));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.until()?;
        if *self.peek() == Tok::Amp {
            self.advance();
            return Ok(Formula::and(lhs, self.conjunction()?));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.is_keyword("U") {
            self.advance();
            return Ok(Formula::until(lhs, self.until()?));
        }
        if self.is_keyword("W") {
            self.advance();
            return Ok(Formula::weak_until(lhs, self.until()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(kw) if matches!(kw.as_str(), "X" | "F" | "G") => {
                self.advance();
                let f = self.unary()?;
                Ok(match kw.as_str() {
                    "X" => Formula::next(f),
                    "F" => Formula::eventually(f),
                    _ => Formula::always(f),
                })
            }
            Tok::Ident(kw) if kw == "E" => {
                self.advance();
                let x = self.variable()?;
                self.expect(Tok::Dot)?;
                Ok(Formula::exists(x, self.unary()?))
            }
            Tok::Ident(kw) if kw == "true" => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::Ident(kw) if kw == "false" => {
                self.advance();
                Ok(Formula::False)
            }
            Tok::Atom(_) => Ok(Formula::atom(self.constraint()?)),
            Tok::LParen => {
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => self.error("a formula"),
        }
    }

    fn params(&mut self) -> Result<Vec<Variable>, ParseError> {
        let mut out = Vec::new();
        if *self.peek() != Tok::LParen {
            return Ok(out);
        }
        self.advance();
        if *self.peek() == Tok::RParen {
            self.advance();
            return Ok(out);
        }
        loop {
            out.push(self.variable()?);
            match self.advance() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(out),
                _ => {
                    self.pos -= 1;
                    return self.error("`,` or `)`");
                }
            }
        }
    }

    fn agent(&mut self) -> Result<Agent, ParseError> {
        let lhs = self.agent_unary()?;
        if *self.peek() == Tok::BarBar {
            self.advance();
            return Ok(Agent::par(lhs, self.agent()?));
        }
        Ok(lhs)
    }

    fn ask(&mut self) -> Result<(Constraint, Agent), ParseError> {
        self.keyword("ask")?;
        let c = self.constraint()?;
        self.expect(Tok::Arrow)?;
        Ok((c, self.agent_unary()?))
    }

    fn agent_unary(&mut self) -> Result<Agent, ParseError> {
        let Tok::Ident(word) = self.peek().clone() else {
            if *self.peek() == Tok::LParen {
                self.advance();
                let a = self.agent()?;
                self.expect(Tok::RParen)?;
                return Ok(a);
            }
            return self.error("an agent");
        };
        match word.as_str() {
            "skip" => {
                self.advance();
                Ok(Agent::Skip)
            }
            "tell" => {
                self.advance();
                Ok(Agent::Tell(self.constraint()?))
            }
            "now" => {
                self.advance();
                let c = self.constraint()?;
                self.keyword("then")?;
                let then = self.agent_unary()?;
                self.keyword("else")?;
                Ok(Agent::now(c, then, self.agent_unary()?))
            }
            "ask" => {
                let mut alts = vec![self.ask()?];
                while *self.peek() == Tok::Plus {
                    self.advance();
                    alts.push(self.ask()?);
                }
                Ok(Agent::Choice(alts))
            }
            "exists" => {
                self.advance();
                let x = self.variable()?;
                Ok(Agent::hide(x, self.agent_unary()?))
            }
            "then" | "else" => self.error("an agent"),
            _ => {
                self.advance();
                Ok(Agent::Call(word, self.params()?))
            }
        }
    }
}

/// One formula, the whole input.
pub fn parse_formula(text: &str, cs: &dyn ConstraintSystem) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, cs)?;
    let f = p.formula()?;
    p.expect(Tok::Eof)?;
    Ok(f)
}

/// Formulas separated (or terminated) by `;`.
pub fn parse_formulas(text: &str, cs: &dyn ConstraintSystem) -> Result<Vec<Formula>, ParseError> {
    let mut p = Parser::new(text, cs)?;
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        out.push(p.formula()?);
        if *p.peek() == Tok::Semi {
            p.advance();
        } else if *p.peek() != Tok::Eof {
            return p.error("`;` or end of input");
        }
    }
    Ok(out)
}

pub fn parse_program(text: &str, cs: &dyn ConstraintSystem) -> Result<Program, ParseError> {
    let mut p = Parser::new(text, cs)?;
    let mut decls = Vec::new();
    while *p.peek() != Tok::Eof {
        let name = p.ident()?;
        let params = p.params()?;
        p.expect(Tok::Defines)?;
        let body = p.agent()?;
        p.expect(Tok::Dot)?;
        decls.push(Declaration { name, params, body });
    }
    Ok(Program::new(decls)?)
}

pub fn parse_spec(text: &str, cs: &dyn ConstraintSystem) -> Result<Interpretation, ParseError> {
    let mut p = Parser::new(text, cs)?;
    let mut out = Interpretation::new();
    while *p.peek() != Tok::Eof {
        let (line, col) = p.here();
        let name = p.ident()?;
        let params = p.params()?;
        let id = ProcessId {
            name,
            arity: params.len(),
        };
        if params.iter().collect::<BTreeSet<_>>().len() != params.len() {
            return Err(TccpError::RepeatedParameter(id.name).into());
        }
        p.expect(Tok::Models)?;
        let formula = p.formula()?;
        p.expect(Tok::Dot)?;
        if formula.contains_exists() {
            return Err(ParseError::SpecUsesExists {
                line,
                col,
                process: id.to_string(),
            });
        }
        if out.contains_key(&id) {
            return Err(ParseError::DuplicateSpec {
                line,
                col,
                process: id.to_string(),
            });
        }
        out.insert(id, ProcessFormula { params, formula });
    }
    Ok(out)
}
