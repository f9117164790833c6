use std::collections::HashMap;

use thiserror::Error;

use super::ast::{Formula, Symbol, Term};
use super::var::{OrderKey, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("arity conflict for symbol `{symbol}` at {line}:{col}: used with {found} argument(s), earlier with {expected}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Not,
    And,
    Or,
    Implies,
    Iff,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Not => "`~`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Implies => "`->`".into(),
        Tok::Iff => "`<->`".into(),
        Tok::End => "end of input".into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' | '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | ',' | '.' | '=' | '~' | '&' | '|' | '¬' | '∧' | '∨' | '→' | '↔' => {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '=' => Tok::Eq,
                    '~' | '¬' => Tok::Not,
                    '&' | '∧' => Tok::And,
                    '|' | '∨' => Tok::Or,
                    '→' => Tok::Implies,
                    _ => Tok::Iff,
                };
                out.push((t, pos));
                advance(1, &mut i, &mut col);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Implies, pos));
                advance(2, &mut i, &mut col);
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((Tok::Iff, pos));
                advance(3, &mut i, &mut col);
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                col += i - start;
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

#[derive(Debug)]
enum RawTerm {
    Name(String, Pos),
    App(String, Vec<RawTerm>, Pos),
}

#[derive(Debug)]
enum Raw {
    True,
    False,
    Eq(RawTerm, RawTerm),
    Finite(RawTerm),
    Not(Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
    Quant(bool, Vec<(String, Pos)>, Box<Raw>),
}

#[derive(Debug, Clone, Copy)]
enum BinOp {
    And,
    Or,
    Implies,
    Iff,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> Result<T, ParseError> {
        let p = self.pos();
        Err(ParseError::Syntax {
            line: p.line,
            col: p.col,
            message,
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", describe(&t), describe(self.peek())))
        }
    }

    fn formula(&mut self) -> Result<Raw, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.implies()?;
        if *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.iff()?;
            return Ok(Raw::Bin(BinOp::Iff, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Raw::Bin(BinOp::Implies, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Raw::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Raw::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(word) if word == "ex" || word == "all" || word == "∃" || word == "∀" => {
                self.bump();
                let mut vars = Vec::new();
                loop {
                    let pos = self.pos();
                    match self.bump().0 {
                        Tok::Ident(name) if name.starts_with(|c: char| c.is_alphabetic() || c == '_') => {
                            vars.push((name, pos))
                        }
                        other => {
                            self.at -= 1;
                            return self.error(format!("expected a variable name, found {}", describe(&other)));
                        }
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(Raw::Quant(word == "ex" || word == "∃", vars, Box::new(body)))
            }
            Tok::Ident(word) if word == "true" => {
                self.bump();
                Ok(Raw::True)
            }
            Tok::Ident(word) if word == "false" => {
                self.bump();
                Ok(Raw::False)
            }
            Tok::Ident(word) if word == "finite" && self.toks[self.at + 1].0 == Tok::LParen => {
                self.bump();
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Raw::Finite(t))
            }
            Tok::Ident(_) => {
                let lhs = self.term()?;
                self.expect(Tok::Eq)?;
                let rhs = self.term()?;
                Ok(Raw::Eq(lhs, rhs))
            }
            other => self.error(format!("expected a formula, found {}", describe(&other))),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let pos = self.pos();
        let name = match self.bump().0 {
            Tok::Ident(name) => name,
            other => {
                self.at -= 1;
                return self.error(format!("expected a term, found {}", describe(&other)));
            }
        };
        if *self.peek() != Tok::LParen {
            return Ok(RawTerm::Name(name, pos));
        }
        self.bump();
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.term()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(RawTerm::App(name, args, pos))
    }
}

/// Parsing options: a prescribed order on free variables.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Free variable names from `≻`-greatest to least. Unlisted free
    /// variables are placed below them, earlier appearances lowest.
    pub free_order: Vec<String>,
}

struct Resolver {
    symbols: HashMap<String, (usize, Pos)>,
    free: HashMap<String, Variable>,
    scopes: Vec<(String, Variable)>,
    next_key: i64,
}

fn is_constant_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_digit())
}

impl Resolver {
    fn collect_free(raw: &Raw, bound: &mut Vec<String>, out: &mut Vec<String>) {
        fn term(t: &RawTerm, bound: &[String], out: &mut Vec<String>) {
            match t {
                RawTerm::Name(n, _) => {
                    if !is_constant_name(n) && !bound.contains(n) && !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                RawTerm::App(_, args, _) => args.iter().for_each(|a| term(a, bound, out)),
            }
        }
        match raw {
            Raw::True | Raw::False => {}
            Raw::Eq(s, t) => {
                term(s, bound, out);
                term(t, bound, out);
            }
            Raw::Finite(t) => term(t, bound, out),
            Raw::Not(a) => Self::collect_free(a, bound, out),
            Raw::Bin(_, a, b) => {
                Self::collect_free(a, bound, out);
                Self::collect_free(b, bound, out);
            }
            Raw::Quant(_, vs, body) => {
                let n = bound.len();
                bound.extend(vs.iter().map(|(v, _)| v.clone()));
                Self::collect_free(body, bound, out);
                bound.truncate(n);
            }
        }
    }

    fn symbol(&mut self, name: &str, arity: usize, pos: Pos) -> Result<Symbol, ParseError> {
        match self.symbols.get(name) {
            Some(&(expected, _)) if expected != arity => Err(ParseError::Arity {
                symbol: name.to_string(),
                expected,
                found: arity,
                line: pos.line,
                col: pos.col,
            }),
            Some(_) => Ok(Symbol::new(name, arity)),
            None => {
                self.symbols.insert(name.to_string(), (arity, pos));
                Ok(Symbol::new(name, arity))
            }
        }
    }

    fn term(&mut self, t: &RawTerm) -> Result<Term, ParseError> {
        match t {
            RawTerm::Name(n, pos) if is_constant_name(n) => Ok(Term::App(self.symbol(n, 0, *pos)?, vec![])),
            RawTerm::Name(n, _) => {
                if let Some((_, v)) = self.scopes.iter().rev().find(|(name, _)| name == n) {
                    return Ok(Term::Var(v.clone()));
                }
                Ok(Term::Var(self.free[n].clone()))
            }
            RawTerm::App(f, args, pos) => {
                let sym = self.symbol(f, args.len(), *pos)?;
                let args = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Ok(Term::App(sym, args))
            }
        }
    }

    fn formula(&mut self, raw: &Raw) -> Result<Formula, ParseError> {
        Ok(match raw {
            Raw::True => Formula::True,
            Raw::False => Formula::False,
            Raw::Eq(s, t) => Formula::Eq(self.term(s)?, self.term(t)?),
            Raw::Finite(t) => Formula::Finite(self.term(t)?),
            Raw::Not(a) => Formula::not(self.formula(a)?),
            Raw::Bin(op, a, b) => {
                let (a, b) = (Box::new(self.formula(a)?), Box::new(self.formula(b)?));
                match op {
                    BinOp::And => Formula::And(a, b),
                    BinOp::Or => Formula::Or(a, b),
                    BinOp::Implies => Formula::Implies(a, b),
                    BinOp::Iff => Formula::Iff(a, b),
                }
            }
            Raw::Quant(ex, vs, body) => {
                let mut vars: Vec<Variable> = Vec::new();
                for (name, pos) in vs {
                    if vars.iter().any(|v| v.name() == name) {
                        return Err(ParseError::Syntax {
                            line: pos.line,
                            col: pos.col,
                            message: format!("variable `{name}` quantified twice in one block"),
                        });
                    }
                    self.next_key += 1;
                    vars.push(Variable::new(name.clone(), OrderKey::from_int(self.next_key)));
                }
                let depth = self.scopes.len();
                self.scopes.extend(vars.iter().map(|v| (v.name().to_string(), v.clone())));
                let body = self.formula(body);
                self.scopes.truncate(depth);
                if *ex {
                    Formula::Exists(vars, Box::new(body?))
                } else {
                    Formula::Forall(vars, Box::new(body?))
                }
            }
        })
    }
}

/// Parses a formula. Bare identifiers are variables unless they start with a
/// digit (constants); `f(...)` and `c()` are applications.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    parse_formula_with(src, &ParseOptions::default())
}

pub fn parse_formula_with(src: &str, opts: &ParseOptions) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let raw = p.formula()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {} after formula", describe(p.peek())));
    }
    let mut names = Vec::new();
    Resolver::collect_free(&raw, &mut Vec::new(), &mut names);
    let mut ordered: Vec<String> = names.iter().filter(|n| !opts.free_order.contains(n)).cloned().collect();
    ordered.extend(opts.free_order.iter().rev().cloned());
    let mut r = Resolver {
        symbols: HashMap::new(),
        free: HashMap::new(),
        scopes: Vec::new(),
        next_key: 0,
    };
    for name in ordered {
        r.next_key += 1;
        let v = Variable::new(name.clone(), OrderKey::from_int(r.next_key));
        r.free.insert(name, v);
    }
    r.formula(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("a = b & c = d | e = e -> x = y -> z = z").unwrap();
        match f {
            Formula::Implies(lhs, rhs) => {
                assert!(matches!(*lhs, Formula::Or(..)));
                assert!(matches!(*rhs, Formula::Implies(..)));
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let f = parse_formula("x = x & ex y. y = x | y = y").unwrap();
        match f {
            Formula::And(_, rhs) => match *rhs {
                Formula::Exists(_, body) => assert!(matches!(*body, Formula::Or(..))),
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn digits_are_constants() {
        let f = parse_formula("x = c(0, 1)").unwrap();
        assert_eq!(f.free_vars().len(), 1);
    }

    #[test]
    fn missing_paren_is_a_syntax_error() {
        match parse_formula("f(x").unwrap_err() {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_conflict_names_the_symbol() {
        match parse_formula("f(x) = f(x, y)").unwrap_err() {
            ParseError::Arity { symbol, expected, found, .. } => {
                assert_eq!(symbol, "f");
                assert_eq!((expected, found), (1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_order_is_honoured() {
        let opts = ParseOptions {
            free_order: vec!["v".into(), "w".into(), "u".into()],
        };
        let f = parse_formula_with("u = v & w = w", &opts).unwrap();
        let fv: Vec<String> = f.free_vars().iter().map(|v| v.name().to_string()).collect();
        assert_eq!(fv, vec!["u", "w", "v"]);
    }

    #[test]
    fn shadowing_binds_innermost() {
        let f = parse_formula("ex x. (x = y & ex x. x = y)").unwrap();
        let mut bound = Vec::new();
        f.visit(&mut |g| {
            if let Formula::Exists(vs, _) = g {
                bound.extend(vs.clone());
            }
        });
        assert_eq!(bound.len(), 2);
        assert_ne!(bound[0], bound[1]);
        assert!(bound[1].succ(&bound[0]));
    }
}
