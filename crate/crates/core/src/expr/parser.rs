//! Recursive-descent parser for complex expressions in one variable `z`.
//!
//! Precedence, tightest first: `^` (right associative), unary minus,
//! `*` `/`, then `+` `-`. So `-z^2` is `-(z^2)` and `2^3^2` is `2^9`.

use num_complex::Complex64;
use thiserror::Error;

use super::{BinOp, Func, Node};

/// Nesting deeper than this is rejected instead of recursing further.
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at column {column}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based character column.
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid number '{0}'")]
    InvalidNumber(String),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("'{name}' takes {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("expression nested too deeply")]
    TooDeep,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((tok, column));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Exponent only when a digit follows, so "2e" lexes as 2 then `e`.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::InvalidNumber(text.clone()),
                column,
            })?;
            out.push((Tok::Num(value), column));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), column));
            continue;
        }
        return Err(ParseError {
            kind: ParseErrorKind::UnexpectedChar(c),
            column,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_column: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_column)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            column: self.column(),
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => self.error(ParseErrorKind::UnexpectedToken(t.describe())),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error(ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let node = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Node::Neg(Box::new(self.unary()?))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(node)
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            // Right operand may carry its own sign: z^-1.
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let column = self.column();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Const(Complex64::new(v, 0.0))),
            Some(Tok::LParen) => {
                self.enter()?;
                let inner = self.expr()?;
                self.depth -= 1;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.identifier(name, column),
            Some(_) => {
                self.pos -= 1;
                Err(self.unexpected())
            }
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn identifier(&mut self, name: String, column: usize) -> Result<Node, ParseError> {
        let func = Func::from_name(&name);
        if self.peek() == Some(&Tok::LParen) {
            let Some(func) = func else {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name),
                    column,
                });
            };
            self.bump();
            self.enter()?;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                args.push(self.expr()?);
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    args.push(self.expr()?);
                }
            }
            self.depth -= 1;
            self.expect_rparen()?;
            if args.len() != 1 {
                return Err(ParseError {
                    kind: ParseErrorKind::ArityMismatch {
                        name,
                        expected: 1,
                        found: args.len(),
                    },
                    column,
                });
            }
            let arg = args.pop().expect("one argument");
            return Ok(Node::Call(func, Box::new(arg)));
        }
        if func.is_some() {
            return Err(ParseError {
                kind: ParseErrorKind::ArityMismatch {
                    name,
                    expected: 1,
                    found: 0,
                },
                column,
            });
        }
        match name.as_str() {
            "z" => Ok(Node::Var),
            "i" => Ok(Node::Const(Complex64::i())),
            "pi" => Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
            "e" => Ok(Node::Const(Complex64::new(std::f64::consts::E, 0.0))),
            _ => Err(ParseError {
                kind: ParseErrorKind::UnknownIdentifier(name),
                column,
            }),
        }
    }
}

pub(super) fn parse_node(src: &str) -> Result<Node, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end_column: src.chars().count() + 1,
        depth: 0,
    };
    let node = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(parser.unexpected());
    }
    Ok(node)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(src: &str) -> ParseError {
        parse_node(src).expect_err(src)
    }

    #[test]
    fn precedence() {
        let c = |v: f64| Box::new(Node::Const(Complex64::new(v, 0.0)));
        // -2^2 = -(2^2)
        assert_eq!(
            parse_node("-2^2").unwrap(),
            Node::Neg(Box::new(Node::Binary(BinOp::Pow, c(2.0), c(2.0))))
        );
        // 1-2-3 is left associative
        assert_eq!(
            parse_node("1-2-3").unwrap(),
            Node::Binary(
                BinOp::Sub,
                Box::new(Node::Binary(BinOp::Sub, c(1.0), c(2.0))),
                c(3.0)
            )
        );
        // 2^3^2 is right associative
        assert_eq!(
            parse_node("2^3^2").unwrap(),
            Node::Binary(
                BinOp::Pow,
                c(2.0),
                Box::new(Node::Binary(BinOp::Pow, c(3.0), c(2.0)))
            )
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(
            parse_node("1.5e-3").unwrap(),
            Node::Const(Complex64::new(1.5e-3, 0.0))
        );
        assert_eq!(
            parse_node(".25").unwrap(),
            Node::Const(Complex64::new(0.25, 0.0))
        );
        assert_eq!(
            parse_node("3.").unwrap(),
            Node::Const(Complex64::new(3.0, 0.0))
        );
    }

    #[test]
    fn positioned_errors() {
        assert_eq!(err("z + $").column, 5);
        assert_eq!(err("z + $").kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(
            err("foo(z)").kind,
            ParseErrorKind::UnknownIdentifier("foo".into())
        );
        assert_eq!(err("2 * w").column, 5);
        assert_eq!(err("z +").kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err("z +").column, 4);
        assert_eq!(err("(z").kind, ParseErrorKind::UnexpectedEnd);
        assert!(matches!(err("z)").kind, ParseErrorKind::UnexpectedToken(_)));
        assert_eq!(err("2i").column, 2);
        assert_eq!(err(".").kind, ParseErrorKind::InvalidNumber(".".into()));
    }

    #[test]
    fn arity() {
        assert_eq!(
            err("sin(z, 2)").kind,
            ParseErrorKind::ArityMismatch {
                name: "sin".into(),
                expected: 1,
                found: 2
            }
        );
        assert_eq!(
            err("cos + 1").kind,
            ParseErrorKind::ArityMismatch {
                name: "cos".into(),
                expected: 1,
                found: 0
            }
        );
        assert!(matches!(
            err("exp()").kind,
            ParseErrorKind::ArityMismatch { found: 0, .. }
        ));
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let src = format!("{}z{}", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(err(&src).kind, ParseErrorKind::TooDeep);
        let src = format!("{}z", "-".repeat(5000));
        assert_eq!(err(&src).kind, ParseErrorKind::TooDeep);
    }
}
