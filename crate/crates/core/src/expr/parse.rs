//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | ident | func '(' expr ')' | '(' expr ')'
//! ```

use super::{BinOp, ExprError, Func, Node};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

pub(super) struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
    lex_error: Option<ExprError>,
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &str, vars: &'a [String]) -> Self {
        let (toks, lex_error) = match lex(text) {
            Ok(t) => (t, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        Parser {
            toks,
            pos: 0,
            vars,
            lex_error,
        }
    }

    pub(super) fn parse(mut self) -> Result<Node, ExprError> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        let node = self.expr()?;
        match self.peek() {
            Tok::End => Ok(node),
            t => Err(self.error(format!("unexpected {}", describe(t)))),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            )))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        match fold_constant(&exponent) {
            Some(e) if e.is_finite() => Ok(Node::Pow(Box::new(base), e)),
            Some(_) => Err(ExprError::Syntax {
                offset: at,
                message: "exponent is not finite".into(),
            }),
            None => Err(ExprError::Syntax {
                offset: at,
                message: "exponent must be a constant".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ExprError::UnknownIdentifier(name.clone()))?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                if Func::from_name(&name).is_some() {
                    return Err(self.error(format!("function `{name}` requires an argument")));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(ExprError::UnknownIdentifier(name)),
                }
            }
            t => Err(ExprError::Syntax {
                offset: at,
                message: format!("unexpected {}", describe(&t)),
            }),
        }
    }
}

fn fold_constant(node: &Node) -> Option<f64> {
    Some(match node {
        Node::Num(v) => *v,
        Node::Var(_) | Node::Call(..) => return None,
        Node::Neg(a) => -fold_constant(a)?,
        Node::Pow(a, e) => fold_constant(a)?.powf(*e),
        Node::Binary(op, a, b) => {
            let (a, b) = (fold_constant(a)?, fold_constant(b)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
    })
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '+' | '-' | '*' | '/' | '^' => {
                out.push((Tok::Op(c), start));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, start));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Tok::Num(v), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}
