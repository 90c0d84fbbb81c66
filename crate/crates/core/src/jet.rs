//! Second-order forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to a fixed list of seed variables. Arithmetic propagates all three
//! exactly (truncated Taylor arithmetic), so first and second partials of any
//! composition of the supported primitives come out without truncation error.
//!
//! A jet with an empty gradient is a constant and combines with jets of any
//! width.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;

/// Arithmetic shared by plain `f64` evaluation and jet evaluation, so that
/// native sections and transition laws are written once.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn powf(&self, c: f64) -> Self;

    fn scale(&self, c: f64) -> Self {
        self.clone() * Self::constant(c)
    }
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn powf(&self, c: f64) -> Self {
        f64::powf(*self, c)
    }
}

/// Value, gradient and Hessian of a scalar quantity.
///
/// The Hessian is stored as a packed lower triangle, so symmetry holds by
/// construction.
#[derive(Clone, PartialEq)]
pub struct Jet {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet { value, grad: Vec::new(), hess: Vec::new() }
    }

    /// The `index`-th of `nvars` seed variables, valued at `value`.
    pub fn variable(value: f64, index: usize, nvars: usize) -> Self {
        assert!(index < nvars, "seed index {index} out of range for {nvars} variables");
        let mut grad = vec![0.0; nvars];
        grad[index] = 1.0;
        Jet { value, grad, hess: vec![0.0; nvars * (nvars + 1) / 2] }
    }

    /// Seeds every entry of `values` as an independent variable.
    pub fn seed(values: &[f64]) -> Vec<Jet> {
        let n = values.len();
        values.iter().enumerate().map(|(i, &v)| Jet::variable(v, i, n)).collect()
    }

    /// Builds a jet from explicit parts; `hess` is a full symmetric matrix
    /// of which only the lower triangle is read.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: &DMatrix<f64>) -> Self {
        let n = grad.len();
        assert_eq!(hess.nrows(), n);
        let mut packed = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                packed[tri(i, j)] = hess[(i, j)];
            }
        }
        Jet { value, grad, hess: packed }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Gives a constant jet explicit zero derivatives over `n` seeds.
    pub fn widened(self, n: usize) -> Jet {
        if self.grad.is_empty() && n > 0 {
            Jet { value: self.value, grad: vec![0.0; n], hess: vec![0.0; n * (n + 1) / 2] }
        } else {
            self
        }
    }

    pub fn nvars(&self) -> usize {
        self.grad.len()
    }

    /// Partial derivative along seed `i`; zero for constants.
    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.grad.is_empty() {
            0.0
        } else {
            self.hess[tri(i, j)]
        }
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        let n = self.nvars();
        DMatrix::from_fn(n, n, |i, j| self.hess[tri(i, j)])
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    fn width(a: &Jet, b: &Jet) -> usize {
        match (a.grad.len(), b.grad.len()) {
            (0, n) | (n, 0) => n,
            (m, n) => {
                assert_eq!(m, n, "combining jets over different seed sets");
                m
            }
        }
    }

    /// Applies a scalar function with derivatives `d1`, `d2` at `self.value`.
    pub fn chain(&self, f0: f64, d1: f64, d2: f64) -> Jet {
        let n = self.nvars();
        if n == 0 {
            return Jet::constant(f0);
        }
        let grad: Vec<f64> = self.grad.iter().map(|g| d1 * g).collect();
        let mut hess = vec![0.0; self.hess.len()];
        for i in 0..n {
            for j in 0..=i {
                let k = tri(i, j);
                hess[k] = d1 * self.hess[k] + d2 * self.grad[i] * self.grad[j];
            }
        }
        Jet { value: f0, grad, hess }
    }

    pub fn recip(&self) -> Jet {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Second-order Taylor composition: `self` is the 2-jet of some function
    /// at the point `at` in its own variables; `inputs` are jets (over any seed
    /// set) of those variables. Returns the 2-jet of the composite.
    pub fn compose(&self, at: &[f64], inputs: &[Jet]) -> Jet {
        assert_eq!(self.nvars(), inputs.len());
        assert_eq!(at.len(), inputs.len());
        let deltas: Vec<Jet> =
            inputs.iter().zip(at).map(|(y, &y0)| y.clone() - Jet::constant(y0)).collect();
        let mut out = Jet::constant(self.value);
        for i in 0..deltas.len() {
            out = out + deltas[i].clone().scale_by(self.d(i));
            for j in 0..deltas.len() {
                let h = self.d2(i, j);
                if h != 0.0 {
                    out = out + (deltas[i].clone() * deltas[j].clone()).scale_by(0.5 * h);
                }
            }
        }
        out
    }

    fn scale_by(mut self, c: f64) -> Jet {
        self.value *= c;
        self.grad.iter_mut().for_each(|g| *g *= c);
        self.hess.iter_mut().for_each(|h| *h *= c);
        self
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hessian())
            .finish()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let n = Jet::width(&self, &rhs);
        let (mut big, small) = if self.grad.len() == n { (self, rhs) } else { (rhs, self) };
        big.value += small.value;
        if !small.grad.is_empty() {
            big.grad.iter_mut().zip(&small.grad).for_each(|(a, b)| *a += b);
            big.hess.iter_mut().zip(&small.hess).for_each(|(a, b)| *a += b);
        }
        big
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_by(-1.0)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = Jet::width(&self, &rhs);
        if self.grad.is_empty() {
            let c = self.value;
            return rhs.scale_by(c);
        }
        if rhs.grad.is_empty() {
            let c = rhs.value;
            return self.scale_by(c);
        }
        let (a, b) = (self.value, rhs.value);
        let grad: Vec<f64> = (0..n).map(|i| a * rhs.grad[i] + b * self.grad[i]).collect();
        let mut hess = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                let k = tri(i, j);
                hess[k] = a * rhs.hess[k]
                    + b * self.hess[k]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        Jet { value: a * b, grad, hess }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        if rhs.grad.is_empty() {
            let c = rhs.value;
            return self.scale_by(1.0 / c);
        }
        self * rhs.recip()
    }
}

impl Scalar for Jet {
    fn constant(c: f64) -> Self {
        Jet::constant(c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(&self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sqrt(&self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }
    fn abs(&self) -> Self {
        let s = if self.value < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.value.abs(), s, 0.0)
    }
    fn powi(&self, k: i32) -> Self {
        match k {
            0 => Jet::constant(1.0),
            1 => self.clone(),
            _ => {
                let v = self.value;
                let kf = k as f64;
                self.chain(v.powi(k), kf * v.powi(k - 1), kf * (kf - 1.0) * v.powi(k - 2))
            }
        }
    }
    fn powf(&self, c: f64) -> Self {
        let v = self.value;
        self.chain(v.powf(c), c * v.powf(c - 1.0), c * (c - 1.0) * v.powf(c - 2.0))
    }
    fn scale(&self, c: f64) -> Self {
        self.clone().scale_by(c)
    }
}
