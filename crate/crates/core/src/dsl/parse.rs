use super::{BinOp, Func, Node, SymbolExpr};
use crate::error::{Error, Result};

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
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let start = pos;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                    pos += 1;
                }
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    let mut p = pos + 1;
                    if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                        p += 1;
                    }
                    if p < bytes.len() && bytes[p].is_ascii_digit() {
                        while p < bytes.len() && bytes[p].is_ascii_digit() {
                            p += 1;
                        }
                        pos = p;
                    }
                }
                let lit = &text[start..pos];
                let value: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{lit}`")))?;
                if !value.is_finite() {
                    return Err(syntax(start, format!("number `{lit}` overflows")));
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                    pos += 1;
                }
                out.push((Tok::Ident(text[start..pos].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        pos += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    // `^` binds tighter than unary minus on its left and is right associative.
    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Node::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let is_call = *self.peek() == Tok::LParen;
                match (Func::from_name(&name), is_call) {
                    (Some(func), true) => {
                        self.bump();
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Node::call(func, arg))
                    }
                    (Some(_), false) => Err(syntax(
                        self.offset(),
                        format!("function `{name}` needs a parenthesized argument"),
                    )),
                    (None, true) => Err(syntax(offset, format!("unknown function `{name}`"))),
                    (None, false) => Ok(match name.as_str() {
                        "x" => Node::Var,
                        "i" => Node::ImagUnit,
                        _ => Node::Param(name),
                    }),
                }
            }
            other => Err(syntax(
                offset,
                format!("expected an operand, found {}", other.describe()),
            )),
        }
    }
}

/// Parses a symbol definition.
pub fn parse(text: &str) -> Result<SymbolExpr> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.offset(),
            format!("unexpected {} after expression", p.peek().describe()),
        ));
    }
    Ok(SymbolExpr::new(root))
}
