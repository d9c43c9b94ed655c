//! Truncated Taylor series in a local variable `h`.
//!
//! A [`Series`] of length `n + 1` stores the coefficients of `h^0 .. h^n`.
//! Binary operations truncate to the shorter operand, so accuracy loss from
//! differentiation propagates automatically.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::laurent_poly::Laurent;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    c: Vec<C>,
}

impl Series {
    pub fn from_coeffs(c: Vec<C>) -> Self {
        assert!(!c.is_empty(), "series needs at least one coefficient");
        Series { c }
    }

    /// Constant series of the given order.
    pub fn constant(a: C, order: usize) -> Self {
        let mut c = vec![C::new(0.0, 0.0); order + 1];
        c[0] = a;
        Series { c }
    }

    /// The coordinate `z0 + h`.
    pub fn variable(z0: C, order: usize) -> Self {
        let mut s = Series::constant(z0, order);
        if order >= 1 {
            s.c[1] = C::new(1.0, 0.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.c
    }

    /// Coefficient of `h^k` (zero beyond the order).
    pub fn coeff(&self, k: usize) -> C {
        self.c.get(k).copied().unwrap_or_default()
    }

    pub fn value(&self) -> C {
        self.c[0]
    }

    /// `k`-th derivative at `h = 0`.
    pub fn derivative_at(&self, k: usize) -> C {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.coeff(k) * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        Series { c: self.c[..=order.min(self.order())].to_vec() }
    }

    pub fn scale(&self, a: C) -> Self {
        Series { c: self.c.iter().map(|x| x * a).collect() }
    }

    /// Term-wise derivative; the order drops by one (order zero stays zero).
    pub fn derivative(&self) -> Self {
        if self.c.len() == 1 {
            return Series::constant(C::new(0.0, 0.0), 0);
        }
        Series { c: (1..self.c.len()).map(|k| self.c[k] * k as f64).collect() }
    }

    /// `1/self`; requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut out = vec![C::new(0.0, 0.0); n];
        out[0] = 1.0 / a0;
        for k in 1..n {
            let mut acc = C::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * out[k - j];
            }
            out[k] = -acc / a0;
        }
        Series { c: out }
    }

    /// `exp(self)`.
    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut out = vec![C::new(0.0, 0.0); n];
        out[0] = self.c[0].exp();
        // f' = a' f
        for k in 1..n {
            let mut acc = C::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * j as f64 * out[k - j];
            }
            out[k] = acc / k as f64;
        }
        Series { c: out }
    }

    /// Integer power.
    pub fn powi(&self, k: i32) -> Self {
        let base = if k < 0 { self.recip() } else { self.clone() };
        let mut out = Series::constant(C::new(1.0, 0.0), self.order());
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// Composition `f(inner)` where `f` is given by Taylor coefficients at the
    /// constant term of `inner`; only `inner - inner(0)` enters.
    pub fn compose(outer: &Series, inner: &Series) -> Self {
        let mut d = inner.clone();
        d.c[0] = C::new(0.0, 0.0);
        let order = outer.order().min(inner.order());
        let d = d.truncate(order);
        let mut acc = Series::constant(outer.coeff(order), order);
        for k in (0..order).rev() {
            acc = &acc * &d;
            acc.c[0] += outer.c[k];
        }
        acc
    }

    /// Laurent polynomial evaluated on the series.
    pub fn laurent(f: &Laurent<C>, z: &Series) -> Self {
        let order = z.order();
        let (lo, hi) = match (f.min_exp(), f.max_exp()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Series::constant(C::new(0.0, 0.0), order),
        };
        let mut acc = Series::constant(C::new(0.0, 0.0), order);
        for k in (0..=hi.max(0)).rev() {
            acc = &acc * z;
            acc.c[0] += f.coeff(k);
        }
        if lo < 0 {
            // sum_{k<0} c_k z^k by Horner in 1/z
            let inv = z.recip();
            let mut neg = Series::constant(C::new(0.0, 0.0), order);
            for k in lo..0 {
                neg = &(&neg + &Series::constant(f.coeff(k), order)) * &inv;
            }
            acc = &acc + &neg;
        }
        acc
    }

    /// Evaluates the truncated series at `h`.
    pub fn eval(&self, h: C) -> C {
        self.c.iter().rev().fold(C::new(0.0, 0.0), |acc, x| acc * h + x)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.c.len().min(rhs.c.len());
        Series { c: (0..n).map(|k| self.c[k] + rhs.c[k]).collect() }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.c.len().min(rhs.c.len());
        Series { c: (0..n).map(|k| self.c[k] - rhs.c[k]).collect() }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series { c: self.c.iter().map(|x| -x).collect() }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.c.len().min(rhs.c.len());
        let mut c = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Series { c }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Series {
            type Output = Series;
            fn $m(self, rhs: Series) -> Series {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
