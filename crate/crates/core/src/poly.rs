//! Sparse bivariate polynomials over a generic coefficient ring.
//!
//! Monomials are keyed by exponent pairs `(i, j)` for `x^i y^j`. The same
//! representation backs both floating-point work and the exact rational
//! arithmetic used by the blow-down chain, so every transformation below is
//! written once, generically.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient ring for [`Poly2`]. Implemented for `f64` and `BigRational`.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Sparse polynomial in two variables; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Poly2<T: Coeff> {
    terms: BTreeMap<(u32, u32), T>,
}

impl<T: Coeff> Poly2<T> {
    pub fn zero() -> Self {
        Poly2 {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(value: T) -> Self {
        Self::monomial(0, 0, value)
    }

    pub fn monomial(i: u32, j: u32, coeff: T) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, coeff);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), T)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, coeff: T) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry((i, j));
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> T {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    /// Maximum total degree `i + j` over stored terms; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    /// Minimum total degree over stored terms; `None` for the zero polynomial.
    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).min()
    }

    /// The homogeneous part of total degree `m`.
    pub fn homogeneous_part(&self, m: u32) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| i + j == m)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, -v.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((i, j), c) in other.terms.iter() {
            out.add_term(*i, *j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((i1, j1), c1) in self.terms.iter() {
            for ((i2, j2), c2) in other.terms.iter() {
                out.add_term(i1 + i2, j1 + j2, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn scale(&self, factor: &T) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v.clone() * factor.clone()))
                .collect(),
        }
    }

    /// Multiply by the monomial `x^i y^j`.
    pub fn mul_monomial(&self, i: u32, j: u32) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), v)| ((a + i, b + j), v.clone()))
                .collect(),
        }
    }

    /// Exact division by `x^i y^j`; errors if any term lacks the factor.
    pub fn div_monomial(&self, i: u32, j: u32) -> Result<Self> {
        let mut out = Self::zero();
        for (&(a, b), v) in self.terms.iter() {
            if a < i || b < j {
                return Err(Error::InexactDivision);
            }
            out.add_term(a - i, b - j, v.clone());
        }
        Ok(out)
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        let mut acc = T::zero();
        for (&(i, j), c) in self.terms.iter() {
            let mut term = c.clone();
            for _ in 0..i {
                term = term * x.clone();
            }
            for _ in 0..j {
                term = term * y.clone();
            }
            acc = acc + term;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c.to_f64() * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in self.terms.iter() {
            if i > 0 {
                out.add_term(i - 1, j, c.clone() * T::from_i64(i as i64));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in self.terms.iter() {
            if j > 0 {
                out.add_term(i, j - 1, c.clone() * T::from_i64(j as i64));
            }
        }
        out
    }

    /// Substitute `x -> sx`, `y -> sy` where the images are arbitrary polynomials.
    pub fn substitute(&self, sx: &Self, sy: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in self.terms.iter() {
            let mut term = Self::constant(c.clone());
            for _ in 0..i {
                term = term.mul(sx);
            }
            for _ in 0..j {
                term = term.mul(sy);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Poly2<U> {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter_map(|(k, v)| {
                    let c = f(v);
                    (!c.is_zero()).then_some((*k, c))
                })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.terms.values().all(|c| c.to_f64().is_finite())
    }
}

impl<T: Coeff> fmt::Debug for Poly2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| format!("{c:?}*x^{i}*y^{j}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A planar polynomial vector field `(P, Q)`.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyField2<T: Coeff> {
    pub p: Poly2<T>,
    pub q: Poly2<T>,
}

impl<T: Coeff> PolyField2<T> {
    pub fn new(p: Poly2<T>, q: Poly2<T>) -> Self {
        PolyField2 { p, q }
    }

    /// Degree `d = max(deg P, deg Q)`.
    pub fn degree(&self) -> u32 {
        self.p.degree().max(self.q.degree())
    }

    /// Lowest total degree `m` present in either component.
    pub fn lowest_degree(&self) -> Option<u32> {
        match (self.p.lowest_degree(), self.q.lowest_degree()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, b) => b,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> (f64, f64) {
        (self.p.eval_f64(x, y), self.q.eval_f64(x, y))
    }

    pub fn scale(&self, factor: &T) -> Self {
        PolyField2::new(self.p.scale(factor), self.q.scale(factor))
    }

    pub fn substitute(&self, sx: &Poly2<T>, sy: &Poly2<T>) -> Self {
        PolyField2::new(self.p.substitute(sx, sy), self.q.substitute(sx, sy))
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U + Copy) -> PolyField2<U> {
        PolyField2::new(self.p.map_coeffs(f), self.q.map_coeffs(f))
    }

    /// Jacobian matrix entries `[[P_x, P_y], [Q_x, Q_y]]` evaluated at a point.
    pub fn jacobian_at(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        [
            [self.p.dx().eval_f64(x, y), self.p.dy().eval_f64(x, y)],
            [self.q.dx().eval_f64(x, y), self.q.dy().eval_f64(x, y)],
        ]
    }
}

/// Shorthand for rational fields used by the exact blow-down chain.
pub type RatPoly2 = Poly2<BigRational>;
pub type RatField2 = PolyField2<BigRational>;

/// Convenience: an exact rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}
