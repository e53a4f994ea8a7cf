use super::{BinOp, Expr, ExprError, Func, Jet2, Node};

/// Numeric type an expression tree can be evaluated into.
pub(super) trait Scalar: Clone {
    /// Whether derivatives are propagated (singular points then become errors).
    const DIFFERENTIATES: bool;
    fn constant(v: f64, n: usize) -> Self;
    fn variable(v: f64, i: usize, n: usize) -> Self;
    fn value(&self) -> f64;
    fn add(self, o: &Self) -> Self;
    fn sub(self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(self) -> Self;
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
}

impl Scalar for f64 {
    const DIFFERENTIATES: bool = false;
    fn constant(v: f64, _: usize) -> Self {
        v
    }
    fn variable(v: f64, _: usize, _: usize) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(self, o: &Self) -> Self {
        self + o
    }
    fn sub(self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, _: f64, _: f64) -> Self {
        f0
    }
}

impl Scalar for Jet2 {
    const DIFFERENTIATES: bool = true;
    fn constant(v: f64, n: usize) -> Self {
        Jet2::constant(v, n)
    }
    fn variable(v: f64, i: usize, n: usize) -> Self {
        Jet2::variable(v, i, n)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(self, o: &Self) -> Self {
        Jet2::add(self, o)
    }
    fn sub(self, o: &Self) -> Self {
        Jet2::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Jet2::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Jet2::div(self, o)
    }
    fn neg(self) -> Self {
        Jet2::neg(self)
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2::chain(self, f0, f1, f2)
    }
}

pub(super) fn evaluate<S: Scalar>(root: &Node, vars: &[String], point: &[f64]) -> Result<S, ExprError> {
    Evaluator { vars, point }.eval(root)
}

struct Evaluator<'a> {
    vars: &'a [String],
    point: &'a [f64],
}

impl Evaluator<'_> {
    fn domain(&self, node: &Node, message: &str) -> ExprError {
        ExprError::Domain {
            subexpr: Expr::node_text(node, self.vars),
            message: message.to_string(),
        }
    }

    fn eval<S: Scalar>(&self, node: &Node) -> Result<S, ExprError> {
        let n = self.point.len();
        Ok(match node {
            Node::Num(v) => S::constant(*v, n),
            Node::Var(i) => S::variable(self.point[*i], *i, n),
            Node::Neg(a) => self.eval::<S>(a)?.neg(),
            Node::Binary(op, a, b) => {
                let a = self.eval::<S>(a)?;
                let b = self.eval::<S>(b)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        a.div(&b)
                    }
                }
            }
            Node::Pow(a, e) => {
                let base = self.eval::<S>(a)?;
                self.pow(node, base, *e)?
            }
            Node::Call(f, a) => {
                let a = self.eval::<S>(a)?;
                let v = a.value();
                match f {
                    Func::Sin => a.chain(v.sin(), v.cos(), -v.sin()),
                    Func::Cos => a.chain(v.cos(), -v.sin(), -v.cos()),
                    Func::Exp => {
                        let e = v.exp();
                        a.chain(e, e, e)
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(self.domain(node, "square root of a negative number"));
                        }
                        if S::DIFFERENTIATES && v == 0.0 {
                            return Err(self.domain(node, "square root is not differentiable at 0"));
                        }
                        let s = v.sqrt();
                        a.chain(s, 0.5 / s, -0.25 / (s * v))
                    }
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(self.domain(node, "logarithm of a non-positive number"));
                        }
                        a.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                    }
                }
            }
        })
    }

    fn pow<S: Scalar>(&self, node: &Node, base: S, e: f64) -> Result<S, ExprError> {
        let n = self.point.len();
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            let k = e.abs() as u32;
            let p = powi(base, k, n);
            if e >= 0.0 {
                return Ok(p);
            }
            if p.value() == 0.0 {
                return Err(self.domain(node, "negative power of zero"));
            }
            return Ok(S::constant(1.0, n).div(&p));
        }
        let v = base.value();
        if v <= 0.0 {
            return Err(self.domain(node, "non-integer power requires a positive base"));
        }
        let f0 = v.powf(e);
        Ok(base.chain(f0, e * v.powf(e - 1.0), e * (e - 1.0) * v.powf(e - 2.0)))
    }
}

/// Exponentiation by squaring; identical multiplication order for every scalar type.
fn powi<S: Scalar>(base: S, mut k: u32, n: usize) -> S {
    let mut acc: Option<S> = None;
    let mut sq = base;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => a.mul(&sq),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        sq = sq.mul(&sq);
    }
    acc.unwrap_or_else(|| S::constant(1.0, n))
}
