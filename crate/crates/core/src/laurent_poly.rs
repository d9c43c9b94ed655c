//! Laurent polynomials with coefficients in a [`Scalar`] field.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::scalar::Scalar;

/// `sum_i c[i] z^(low + i)`, kept trimmed so that zero is the empty vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<S> {
    low: i32,
    c: Vec<S>,
}

impl<S: Scalar> Laurent<S> {
    pub fn zero() -> Self {
        Laurent { low: 0, c: Vec::new() }
    }

    /// Ordinary polynomial from ascending coefficients.
    pub fn from_coeffs(c: Vec<S>) -> Self {
        Laurent { low: 0, c }.trimmed()
    }

    pub fn from_parts(low: i32, c: Vec<S>) -> Self {
        Laurent { low, c }.trimmed()
    }

    pub fn constant(a: S) -> Self {
        Laurent::monomial(a, 0)
    }

    /// `a z^k`.
    pub fn monomial(a: S, k: i32) -> Self {
        Laurent { low: k, c: vec![a] }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
        let lead = self.c.iter().take_while(|x| x.is_zero()).count();
        if lead > 0 {
            self.c.drain(..lead);
            self.low += lead as i32;
        }
        if self.c.is_empty() {
            self.low = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn min_exp(&self) -> Option<i32> {
        (!self.c.is_empty()).then_some(self.low)
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn max_exp(&self) -> Option<i32> {
        (!self.c.is_empty()).then(|| self.low + self.c.len() as i32 - 1)
    }

    /// Degree of an ordinary polynomial (`None` for zero).
    pub fn degree(&self) -> Option<i32> {
        self.max_exp()
    }

    /// Coefficient of `z^k`.
    pub fn coeff(&self, k: i32) -> S {
        let i = k - self.low;
        if i < 0 || i as usize >= self.c.len() {
            S::zero()
        } else {
            self.c[i as usize].clone()
        }
    }

    /// Whether all exponents are nonnegative.
    pub fn is_polynomial(&self) -> bool {
        self.min_exp().map_or(true, |m| m >= 0)
    }

    /// Ascending coefficients from `z^0` to the top degree.
    pub fn poly_coeffs(&self) -> Vec<S> {
        match self.max_exp() {
            None => Vec::new(),
            Some(top) => (0..=top.max(0)).map(|k| self.coeff(k)).collect(),
        }
    }

    pub fn scale(&self, a: &S) -> Self {
        Laurent { low: self.low, c: self.c.iter().map(|x| x.clone() * a.clone()).collect() }.trimmed()
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i32) -> Self {
        Laurent { low: self.low + k, c: self.c.clone() }
    }

    pub fn derivative(&self) -> Self {
        let c = self.c.iter().enumerate().map(|(i, x)| x.clone() * S::from_i64((self.low + i as i32) as i64)).collect();
        Laurent { low: self.low - 1, c }.trimmed()
    }

    /// Substitution `z -> -z`.
    pub fn reflect(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, x)| if (self.low + i as i32).rem_euclid(2) == 1 { -x.clone() } else { x.clone() })
            .collect();
        Laurent { low: self.low, c }
    }

    /// Substitution `z -> 1/z`.
    pub fn invert(&self) -> Self {
        match self.max_exp() {
            None => Laurent::zero(),
            Some(top) => {
                let mut c = self.c.clone();
                c.reverse();
                Laurent { low: -top, c }
            }
        }
    }

    /// Exact evaluation at a nonzero field element.
    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero();
        for x in self.c.iter().rev() {
            acc = acc * z.clone() + x.clone();
        }
        if self.low >= 0 {
            acc * pow_field(z, self.low as u32)
        } else {
            acc / pow_field(z, (-self.low) as u32)
        }
    }

    /// Floating-point evaluation.
    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in self.c.iter().rev() {
            acc = acc * z + x.to_c64();
        }
        acc * z.powi(self.low)
    }

    /// Largest coefficient magnitude (zero for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> Laurent<Complex64> {
        Laurent { low: self.low, c: self.c.iter().map(|x| x.to_c64()).collect() }
    }
}

fn pow_field<S: Scalar>(z: &S, n: u32) -> S {
    let mut acc = S::one();
    for _ in 0..n {
        acc = acc * z.clone();
    }
    acc
}

impl<S: Scalar> Add for &Laurent<S> {
    type Output = Laurent<S>;
    fn add(self, rhs: &Laurent<S>) -> Laurent<S> {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let low = self.low.min(rhs.low);
        let high = self.max_exp().unwrap().max(rhs.max_exp().unwrap());
        let c = (low..=high).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Laurent { low, c }.trimmed()
    }
}

impl<S: Scalar> Sub for &Laurent<S> {
    type Output = Laurent<S>;
    fn sub(self, rhs: &Laurent<S>) -> Laurent<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Neg for &Laurent<S> {
    type Output = Laurent<S>;
    fn neg(self) -> Laurent<S> {
        Laurent { low: self.low, c: self.c.iter().map(|x| -x.clone()).collect() }
    }
}

impl<S: Scalar> Mul for &Laurent<S> {
    type Output = Laurent<S>;
    fn mul(self, rhs: &Laurent<S>) -> Laurent<S> {
        if self.is_zero() || rhs.is_zero() {
            return Laurent::zero();
        }
        let mut c = vec![S::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Laurent { low: self.low + rhs.low, c }.trimmed()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<S: Scalar> $tr for Laurent<S> {
            type Output = Laurent<S>;
            fn $m(self, rhs: Laurent<S>) -> Laurent<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn arithmetic_and_trim() {
        let a = Laurent::from_coeffs(vec![c(1.0), c(2.0)]);
        let b = Laurent::from_coeffs(vec![c(-1.0), c(-2.0)]);
        assert!((&a + &b).is_zero());
        let m = Laurent::monomial(c(3.0), -2);
        let prod = &a * &m;
        assert_eq!(prod.min_exp(), Some(-2));
        assert_eq!(prod.max_exp(), Some(-1));
        assert_eq!(prod.coeff(-1), c(6.0));
    }

    #[test]
    fn substitutions() {
        let p = Laurent::from_parts(-1, vec![c(1.0), c(2.0), c(3.0)]);
        let z = Complex64::new(0.7, -0.4);
        assert!((p.invert().eval_c64(z) - p.eval_c64(1.0 / z)).norm() < 1e-13);
        assert!((p.reflect().eval_c64(z) - p.eval_c64(-z)).norm() < 1e-13);
        let h = 1e-6;
        let fd = (p.eval_c64(z + h) - p.eval_c64(z - h)) / (2.0 * h);
        assert!((p.derivative().eval_c64(z) - fd).norm() < 1e-7);
    }
}
