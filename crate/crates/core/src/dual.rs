//! Forward-mode dual numbers.
//!
//! `Dual<T>` is generic over any [`Real`], so `Dual<Dual<f64>>` is a
//! hyper-dual number carrying mixed second derivatives. Expressions are
//! evaluated generically over `Real`, which is how metric and immersion
//! jets get exact first and second partials.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type the expression evaluator can run on.
pub trait Real:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Primal (non-infinitesimal) part.
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn min(self, other: Self) -> Self {
        if other.value() < self.value() {
            other
        } else {
            self
        }
    }

    fn max(self, other: Self) -> Self {
        if other.value() > self.value() {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Dual {
            re,
            eps: T::from_f64(0.0),
        }
    }

    pub fn variable(re: T) -> Self {
        Dual {
            re,
            eps: T::from_f64(1.0),
        }
    }

    // f(re + eps) = f(re) + f'(re)·eps
    fn chain(self, f: T, df: T) -> Self {
        Dual {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = T::from_f64(1.0) / rhs.re;
        Dual::new(
            self.re * inv,
            (self.eps * rhs.re - self.re * rhs.eps) * inv * inv,
        )
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Real for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::from_f64(1.0) / self.re)
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }

    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }

    fn tanh(self) -> Self {
        let th = self.re.tanh();
        self.chain(th, T::from_f64(1.0) - th * th)
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::from_f64(0.5) / s)
    }

    fn abs(self) -> Self {
        if self.re.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Dual::from_f64(1.0),
            _ => {
                let lower = self.re.powi(n - 1);
                self.chain(lower * self.re, T::from_f64(n as f64) * lower)
            }
        }
    }
}

/// Derivative of a scalar function at `x` by one forward pass.
pub fn derivative(x: f64, f: impl Fn(Dual<f64>) -> Dual<f64>) -> f64 {
    f(Dual::variable(x)).eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(x: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elementary_derivatives_match_central_differences() {
        let x = 0.7;
        let cases: Vec<(fn(Dual<f64>) -> Dual<f64>, fn(f64) -> f64)> = vec![
            (|v| v.exp(), f64::exp),
            (|v| v.ln(), f64::ln),
            (|v| v.sin(), f64::sin),
            (|v| v.cos(), f64::cos),
            (|v| v.sinh(), f64::sinh),
            (|v| v.cosh(), f64::cosh),
            (|v| v.tanh(), f64::tanh),
            (|v| v.sqrt(), f64::sqrt),
            (|v| v.powi(3), |v| v.powi(3)),
            (|v| v.powi(-2), |v| v.powi(-2)),
        ];
        for (dual_f, real_f) in cases {
            let d = derivative(x, dual_f);
            assert!((d - central(x, real_f)).abs() < 1e-8);
        }
    }

    #[test]
    fn hyper_dual_gives_mixed_second_partial() {
        // f(x, y) = x^2 y^3 ; f_xy = 6 x y^2
        let (x, y) = (1.3, -0.4);
        type H = Dual<Dual<f64>>;
        let hx = H::new(Dual::new(x, 1.0), Dual::new(0.0, 0.0));
        let hy = H::new(Dual::new(y, 0.0), Dual::new(1.0, 0.0));
        let f = hx.powi(2) * hy.powi(3);
        assert!((f.eps.eps - 6.0 * x * y * y).abs() < 1e-12);
        assert!((f.re.eps - 2.0 * x * y.powi(3)).abs() < 1e-12);
        assert!((f.eps.re - 3.0 * x * x * y * y).abs() < 1e-12);
    }

    #[test]
    fn quotient_rule() {
        let d = derivative(2.0, |v| Dual::from_f64(1.0) / (v * v));
        assert!((d + 0.25).abs() < 1e-15);
    }
}
