//! Multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::affine::AffineFunction;
use crate::rational::{fmt_q, to_f64, Q};

/// Sparse polynomial in `dim` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Q) -> Self {
        Self::monomial(dim, vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Q::one())
    }

    pub fn monomial(dim: usize, exponents: Vec<u32>, coeff: Q) -> Self {
        assert_eq!(exponents.len(), dim, "exponent length must equal dimension");
        let mut p = Self::zero(dim);
        if !coeff.is_zero() {
            p.terms.insert(exponents, coeff);
        }
        p
    }

    /// The coordinate function `y_i`.
    pub fn variable(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(dim, e, Q::one())
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: Q) {
        assert_eq!(exponents.len(), self.dim);
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponents);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), x * c))
                .collect(),
        }
    }

    pub fn eval(&self, y: &[Q]) -> Q {
        debug_assert_eq!(y.len(), self.dim);
        self.terms.iter().fold(Q::zero(), |acc, (e, c)| {
            let m = e
                .iter()
                .zip(y)
                .fold(c.clone(), |m, (&k, yi)| m * num_traits::pow(yi.clone(), k as usize));
            acc + m
        })
    }

    pub fn eval_f64(&self, y: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (e, c)| {
            let m = e
                .iter()
                .zip(y)
                .fold(to_f64(c), |m, (&k, yi)| m * yi.powi(k as i32));
            acc + m
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.dim), |acc, _| &acc * self)
    }
}

impl From<&AffineFunction> for Polynomial {
    fn from(a: &AffineFunction) -> Self {
        let n = a.dim();
        let mut p = Polynomial::constant(n, a.constant.clone());
        for (i, g) in a.gradient.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, g.clone());
        }
        p
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Q::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Polynomial::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| {
                        if k == 1 {
                            format!("y{}", i + 1)
                        } else {
                            format!("y{}^{}", i + 1, k)
                        }
                    })
                    .collect();
                if mono.is_empty() {
                    fmt_q(c)
                } else {
                    format!("{}*{}", fmt_q(c), mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn arithmetic_cancels_zero_terms() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let s = &x + &y;
        let d = &x - &y;
        let p = &s * &d; // x^2 - y^2
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.eval(&[q(3), q(2)]), q(5));
        assert!((&p - &p).is_zero());
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn affine_conversion() {
        let a = AffineFunction::new(qf(1, 2), vec![q(2), q(-1)]);
        let p = Polynomial::from(&a);
        assert_eq!(p.eval(&[q(1), q(1)]), qf(3, 2));
        assert_eq!(p.eval_f64(&[1.0, 1.0]), 1.5);
    }
}
