//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' ['-'] int | '^' '(' ['-'] int ')')?
//! atom   := int | ident | ('exp' | 'log') '(' expr ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;

use super::expr::Expr;
use super::scalar::Scalar;
use super::var::{Field, Var};
use super::SymError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

impl Lexer {
    fn new(text: &str) -> Result<Self, SymError> {
        let mut toks = Vec::new();
        let mut line = 1;
        let mut col = 1;
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            let (l0, c0) = (line, col);
            if ch == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if ch.is_whitespace() {
                col += 1;
                i += 1;
                continue;
            }
            if ch.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                toks.push((Tok::Int(s.parse().expect("digits")), l0, c0));
                continue;
            }
            if ch.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                toks.push((Tok::Ident(s), l0, c0));
                continue;
            }
            if "+-*/^()".contains(ch) {
                toks.push((Tok::Op(ch), l0, c0));
                col += 1;
                i += 1;
                continue;
            }
            return Err(SymError::Syntax {
                line,
                col,
                msg: format!("unexpected character `{ch}`"),
            });
        }
        Ok(Lexer { toks })
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn arith(r: Result<Expr, SymError>, line: usize, col: usize) -> Result<Expr, SymError> {
    r.map_err(|e| match e {
        SymError::Syntax { .. } | SymError::UnknownIdentifier { .. } => e,
        other => SymError::Syntax {
            line,
            col,
            msg: other.to_string(),
        },
    })
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn loc(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SymError> {
        let (line, col) = self.loc();
        Err(SymError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SymError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, SymError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SymError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(&Tok::Op('/')) {
                let (l, c) = self.loc();
                self.pos += 1;
                let rhs = self.unary()?;
                acc = arith(acc.checked_div(&rhs), l, c)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SymError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn int_exponent(&mut self) -> Result<i32, SymError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                n
            }
            _ => return self.err("expected integer exponent"),
        };
        if paren {
            self.expect(')')?;
        }
        let k: i32 = match i32::try_from(n) {
            Ok(k) => k,
            Err(_) => return self.err("exponent out of range"),
        };
        Ok(if neg { -k } else { k })
    }

    fn power(&mut self) -> Result<Expr, SymError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            let (l, c) = self.loc();
            self.pos += 1;
            let k = self.int_exponent()?;
            return arith(base.pow(k), l, c);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, SymError> {
        let (line, col) = self.loc();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::constant(Scalar::from_bigints(n, BigInt::from(1))))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "exp" || name == "log" {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    let r = if name == "exp" { arg.exp() } else { arg.log() };
                    return arith(r, line, col);
                }
                match ident_var(&name) {
                    Some(v) => Ok(Expr::var(v)),
                    None => Err(SymError::UnknownIdentifier { name, line, col }),
                }
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

fn ident_var(name: &str) -> Option<Var> {
    match name {
        "lambda" => return Some(Var::Lambda),
        "eps" => return Some(Var::Eps),
        _ => {}
    }
    let mut chars = name.chars();
    let head = chars.next()?;
    let rest: &str = chars.as_str();
    let (a, b) = match rest.split_once('_') {
        Some((a, b)) => (a, Some(b)),
        None => (rest, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    if !digits(a) || b.is_some_and(|b| !digits(b)) {
        return None;
    }
    let idx: u32 = a.parse().ok()?;
    let sub: Option<u32> = match b {
        Some(b) => Some(b.parse().ok()?),
        None => None,
    };
    let field = match head {
        'v' => Some(Field::V),
        'u' => Some(Field::U),
        'w' => Some(Field::W),
        'a' => Some(Field::Test(0)),
        'b' => Some(Field::Test(1)),
        'c' => Some(Field::Test(2)),
        'd' => Some(Field::Delta),
        _ => None,
    };
    if let Some(field) = field {
        if idx == 0 || sub == Some(0) {
            return None;
        }
        return Some(Var::jet(field, idx, sub.unwrap_or(0)));
    }
    match (head, sub) {
        ('t', Some(level)) if idx > 0 => Some(Var::Time { idx, level }),
        ('f', Some(level)) if idx > 0 => Some(Var::OnePoint { idx, level }),
        ('k', None) => Some(Var::Aux(idx)),
        _ => None,
    }
}

/// Parses text into a canonical expression.
pub fn parse(text: &str) -> Result<Expr, SymError> {
    let lexer = Lexer::new(text)?;
    let end = {
        let lines: Vec<&str> = text.split('\n').collect();
        (
            lines.len(),
            lines.last().map(|l| l.chars().count()).unwrap_or(0) + 1,
        )
    };
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
        end,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_monomial() {
        let e = parse("v1^2*v2/2").unwrap();
        assert_eq!(e.to_string(), "1/2*v1^2*v2");
    }

    #[test]
    fn negative_exponent() {
        let e = parse("u1_1^-1").unwrap();
        assert_eq!(e.to_string(), "u1_1^-1");
        assert_eq!(parse("u1_1^(-1)").unwrap(), e);
    }

    #[test]
    fn log_plus_eps() {
        let e = parse("log(u1_1) + eps^2").unwrap();
        assert_eq!(e.num().len(), 2);
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn errors_carry_location() {
        match parse("v1 +\n  * v2") {
            Err(SymError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse("v1 + z3") {
            Err(SymError::UnknownIdentifier { name, col, .. }) => {
                assert_eq!(name, "z3");
                assert_eq!(col, 6);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("v0").is_err());
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn rational_function_round_trip() {
        for s in [
            "1/(u1 - u2)",
            "v1/(v1 + 1)^2 - 3/(v2 - v1)",
            "exp(v2)*exp(v2)",
            "exp(2*log(v1) + v2)",
            "log(-v1 - 1) + log(3)",
            "(v1^2 - v2^2)/(v1 - v2)",
        ] {
            let e = parse(s).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
        assert_eq!(
            parse("(v1^2 - v2^2)/(v1 - v2)").unwrap(),
            parse("v1 + v2").unwrap()
        );
        assert_eq!(
            parse("exp(2*log(v1) + v2)").unwrap(),
            parse("v1^2*exp(v2)").unwrap()
        );
    }
}
