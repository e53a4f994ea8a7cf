//! Scalar expressions in named variables.
//!
//! Expressions are parsed once into an immutable [`Expr`] and then evaluated
//! either as plain values or as second-order jets (value, gradient and
//! Hessian) with exact derivative propagation.

mod eval;
mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use jet::Jet2;

/// Errors raised while parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("invalid variable list: {0}")]
    InvalidVariables(String),
    #[error("domain error in `{subexpr}`: {message}")]
    Domain { subexpr: String, message: String },
    #[error("expected a point of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

/// Expression tree node. Exponents of `^` are constants folded at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn num(v: f64) -> Node {
        Node::Num(v)
    }

    pub fn bin(op: BinOp, l: Node, r: Node) -> Node {
        Node::Binary(op, Box::new(l), Box::new(r))
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            Node::Num(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.max_var(),
            Node::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn write(&self, vars: &[String], min_prec: u8, out: &mut String) {
        let wrap = self.precedence() < min_prec;
        if wrap {
            out.push('(');
        }
        match self {
            Node::Num(v) => {
                if v.is_sign_negative() {
                    out.push('-');
                    out.push_str(&format!("{}", -v));
                } else {
                    out.push_str(&format!("{v}"));
                }
            }
            Node::Var(i) => out.push_str(&vars[*i]),
            Node::Neg(a) => {
                out.push('-');
                a.write(vars, 3, out);
            }
            Node::Binary(op, a, b) => {
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                };
                a.write(vars, lp, out);
                out.push(' ');
                out.push(op.symbol());
                out.push(' ');
                b.write(vars, rp, out);
            }
            Node::Pow(a, e) => {
                a.write(vars, 5, out);
                out.push('^');
                if e.is_sign_negative() {
                    out.push_str(&format!("(-{})", -e));
                } else {
                    out.push_str(&format!("{e}"));
                }
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(vars, 0, out);
                out.push(')');
            }
        }
        if wrap {
            out.push(')');
        }
    }
}

/// A parsed scalar expression together with its declared variable list.
///
/// Cloning is cheap for the variable list; the tree itself is cloned.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    vars: Arc<[String]>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.vars == other.vars
    }
}

impl Expr {
    /// Parse `text` over the declared variable names.
    pub fn parse(text: &str, vars: &[impl AsRef<str>]) -> Result<Expr, ExprError> {
        let vars: Arc<[String]> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        validate_vars(&vars)?;
        let root = parse::Parser::new(text, &vars).parse()?;
        Ok(Expr { root, vars })
    }

    /// Build an expression from a node tree. Every variable index must be in range.
    pub fn from_node(root: Node, vars: Arc<[String]>) -> Result<Expr, ExprError> {
        validate_vars(&vars)?;
        if let Some(i) = root.max_var() {
            if i >= vars.len() {
                return Err(ExprError::InvalidVariables(format!(
                    "variable index {i} out of range for {} variables",
                    vars.len()
                )));
            }
        }
        Ok(Expr { root, vars })
    }

    pub fn constant(v: f64, vars: Arc<[String]>) -> Expr {
        Expr { root: Node::Num(v), vars }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// Value-only evaluation.
    pub fn eval_value(&self, point: &[f64]) -> Result<f64, ExprError> {
        self.check_dim(point)?;
        eval::evaluate::<f64>(&self.root, &self.vars, point)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, ExprError> {
        self.check_dim(point)?;
        eval::evaluate::<Jet2>(&self.root, &self.vars, point)
    }

    fn check_dim(&self, point: &[f64]) -> Result<(), ExprError> {
        if point.len() != self.vars.len() {
            return Err(ExprError::Dimension {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn node_text(node: &Node, vars: &[String]) -> String {
        let mut s = String::new();
        node.write(vars, 0, &mut s);
        s
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Expr::node_text(&self.root, &self.vars))
    }
}

pub(crate) fn validate_vars(vars: &[String]) -> Result<(), ExprError> {
    if vars.is_empty() {
        return Err(ExprError::InvalidVariables("no variables declared".into()));
    }
    for (i, v) in vars.iter().enumerate() {
        let mut chars = v.chars();
        let ok_start = chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !ok_start || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ExprError::InvalidVariables(format!("`{v}` is not an identifier")));
        }
        if v == "pi" || Func::from_name(v).is_some() {
            return Err(ExprError::InvalidVariables(format!("`{v}` is reserved")));
        }
        if vars[..i].contains(v) {
            return Err(ExprError::InvalidVariables(format!("duplicate variable `{v}`")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<&'static str> {
        vec!["x", "y"]
    }

    #[test]
    fn parses_grammar_case() {
        let e = Expr::parse("x^2 + sin(y)", &xy()).unwrap();
        let mut leaves = 0;
        fn count(n: &Node, c: &mut usize) {
            match n {
                Node::Var(_) => *c += 1,
                Node::Num(_) => {}
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => count(a, c),
                Node::Binary(_, a, b) => {
                    count(a, c);
                    count(b, c)
                }
            }
        }
        count(e.root(), &mut leaves);
        assert_eq!(leaves, 2);
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = Expr::parse("(x +", &["x"]).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier() {
        let err = Expr::parse("z", &xy()).unwrap_err();
        assert_eq!(err, ExprError::UnknownIdentifier("z".into()));
        let err = Expr::parse("tan(x)", &xy()).unwrap_err();
        assert_eq!(err, ExprError::UnknownIdentifier("tan".into()));
    }

    #[test]
    fn rejects_bad_variable_lists() {
        assert!(Expr::parse("1", &[] as &[&str]).is_err());
        assert!(Expr::parse("x", &["x", "x"]).is_err());
        assert!(Expr::parse("x", &["x", "sin"]).is_err());
        assert!(Expr::parse("x", &["x", "2a"]).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| Expr::parse(s, &["x"]).unwrap().eval_value(&[2.0]).unwrap();
        assert_eq!(v("-x^2"), -4.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("8/4/2"), 1.0);
        assert_eq!(v("8-4-2"), 2.0);
        assert_eq!(v("1 + 2*x"), 5.0);
        assert_eq!(v("x^-1"), 0.5);
        assert_eq!(v("2*-x"), -4.0);
        assert_eq!(v("1.5e1 + .5"), 15.5);
        assert!((v("pi") - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn exponent_must_be_constant() {
        let err = Expr::parse("x^x", &["x"]).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { .. }));
        let e = Expr::parse("x^(1+1)", &["x"]).unwrap();
        assert_eq!(e.root(), &Node::Pow(Box::new(Node::Var(0)), 2.0));
    }

    #[test]
    fn function_arity_is_one() {
        assert!(Expr::parse("sin(x, y)", &xy()).is_err());
        assert!(Expr::parse("sin()", &xy()).is_err());
        assert!(Expr::parse("sin x", &xy()).is_err());
    }

    #[test]
    fn print_round_trip_samples() {
        for s in [
            "x^2 + sin(y)",
            "-(x - y) * -y",
            "x - (y - x)",
            "x / (y / x)",
            "(-x)^2",
            "-x^2",
            "2^3^2",
            "exp(-x^(-1.5)) / sqrt(1 + y*y)",
            "--x",
            "pi * log(x)",
        ] {
            let e = Expr::parse(s, &xy()).unwrap();
            let printed = e.to_string();
            let back = Expr::parse(&printed, &xy()).unwrap();
            assert_eq!(e, back, "{s} -> {printed}");
        }
    }

    #[test]
    fn from_node_checks_indices() {
        let vars: Arc<[String]> = vec!["x".to_string()].into();
        assert!(Expr::from_node(Node::Var(1), vars.clone()).is_err());
        assert!(Expr::from_node(Node::Var(0), vars).is_ok());
    }
}
