use std::fmt;

use num_traits::Zero;
use crate::rational::{dot, fmt_q, to_f64, Q};

/// Affine map `y ↦ constant + ⟨gradient, y⟩` on `R^n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineFunction {
    pub constant: Q,
    pub gradient: Vec<Q>,
}

impl AffineFunction {
    pub fn new(constant: Q, gradient: Vec<Q>) -> Self {
        Self { constant, gradient }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(Q::zero(), vec![Q::zero(); dim])
    }

    pub fn constant_fn(dim: usize, c: Q) -> Self {
        Self::new(c, vec![Q::zero(); dim])
    }

    /// Coefficients `(b0, b1, ..., bn)`.
    pub fn from_coeffs(coeffs: &[Q]) -> Self {
        Self::new(coeffs[0].clone(), coeffs[1..].to_vec())
    }

    pub fn coeffs(&self) -> Vec<Q> {
        std::iter::once(self.constant.clone())
            .chain(self.gradient.iter().cloned())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn eval(&self, y: &[Q]) -> Q {
        &self.constant + dot(&self.gradient, y)
    }

    pub fn eval_f64(&self, y: &[f64]) -> f64 {
        to_f64(&self.constant)
            + self
                .gradient
                .iter()
                .zip(y)
                .map(|(g, x)| to_f64(g) * x)
                .sum::<f64>()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &self.constant + &other.constant,
            self.gradient
                .iter()
                .zip(&other.gradient)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::from_integer(1.into())))
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(
            &self.constant * c,
            self.gradient.iter().map(|g| g * c).collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.gradient.iter().all(Zero::is_zero)
    }

    /// Sup-norm distance between coefficient vectors.
    pub fn coeff_distance(&self, other: &Self) -> Q {
        self.coeffs()
            .iter()
            .zip(other.coeffs())
            .map(|(a, b)| num_traits::Signed::abs(&(a - b)))
            .max()
            .unwrap_or_else(Q::zero)
    }
}

impl fmt::Debug for AffineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.gradient.iter().map(fmt_q).collect();
        write!(f, "{} + <[{}], y>", fmt_q(&self.constant), g.join(", "))
    }
}
