use nalgebra::{DMatrix, DVector};

/// Second-order jet of a scalar function: value, gradient and Hessian.
///
/// The Hessian is stored as a full symmetric matrix; every operation computes
/// the upper triangle and mirrors it, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, n: usize) -> Self {
        Jet2 {
            value,
            gradient: DVector::zeros(n),
            hessian: DMatrix::zeros(n, n),
        }
    }

    /// The `i`-th coordinate function evaluated at `value`.
    pub fn variable(value: f64, i: usize, n: usize) -> Self {
        let mut j = Jet2::constant(value, n);
        j.gradient[i] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// Fill the Hessian from an upper-triangle rule and mirror it.
    fn with_hessian(value: f64, gradient: DVector<f64>, f: impl Fn(usize, usize) -> f64) -> Self {
        let n = gradient.len();
        let mut hessian = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let h = f(i, j);
                hessian[(i, j)] = h;
                hessian[(j, i)] = h;
            }
        }
        Jet2 {
            value,
            gradient,
            hessian,
        }
    }

    pub(crate) fn add(mut self, o: &Jet2) -> Jet2 {
        self.value += o.value;
        self.gradient += &o.gradient;
        self.hessian += &o.hessian;
        self
    }

    pub(crate) fn sub(mut self, o: &Jet2) -> Jet2 {
        self.value -= o.value;
        self.gradient -= &o.gradient;
        self.hessian -= &o.hessian;
        self
    }

    pub(crate) fn neg(mut self) -> Jet2 {
        self.value = -self.value;
        self.gradient.neg_mut();
        self.hessian.neg_mut();
        self
    }

    pub(crate) fn mul(&self, o: &Jet2) -> Jet2 {
        let (a, b) = (self, o);
        let gradient = &b.gradient * a.value + &a.gradient * b.value;
        Jet2::with_hessian(a.value * b.value, gradient, |i, j| {
            a.value * b.hessian[(i, j)]
                + b.value * a.hessian[(i, j)]
                + a.gradient[i] * b.gradient[j]
                + b.gradient[i] * a.gradient[j]
        })
    }

    /// Quotient rule; the caller guarantees `o.value != 0`.
    pub(crate) fn div(&self, o: &Jet2) -> Jet2 {
        let (a, b) = (self, o);
        let q = a.value / b.value;
        let gradient = (&a.gradient - &b.gradient * q) / b.value;
        let g = &gradient;
        Jet2::with_hessian(q, gradient.clone(), |i, j| {
            (a.hessian[(i, j)] - q * b.hessian[(i, j)] - b.gradient[i] * g[j] - g[i] * b.gradient[j])
                / b.value
        })
    }

    /// Compose with a scalar function whose value and first two derivatives
    /// at `self.value` are `f0`, `f1`, `f2`.
    pub(crate) fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let a = self;
        Jet2::with_hessian(f0, &a.gradient * f1, |i, j| {
            f2 * a.gradient[i] * a.gradient[j] + f1 * a.hessian[(i, j)]
        })
    }
}
