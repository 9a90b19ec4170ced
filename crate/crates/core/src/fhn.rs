//! The FitzHugh-Nagumo family
//!
//! ```text
//!     x' = c [ y - (x^3/3 - x) ]
//!     y' = -(x - a + b y) / c
//! ```
//!
//! with `a, b` real and `c != 0`, together with its Jacobian, divergence,
//! the `Z_2` symmetry `kappa(x, y) = (-x, -y)` and the expansion into a
//! generic polynomial field.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Coeff, Poly2, PolyField2, RatField2};

/// Parameter triple `(a, b, c)` selecting a member of the family.
///
/// Construction rejects `c = 0` and non-finite values: every formula in the
/// family divides by `c`; deserialization is deliberately not derived so the
/// invariant cannot be bypassed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    a: f64,
    b: f64,
    c: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite parameters ({a}, {b}, {c})"
            )));
        }
        if c == 0.0 {
            return Err(Error::InvalidParams(
                "c = 0 is outside the family's domain".into(),
            ));
        }
        Ok(Params { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Same `(a, b)` with `c` negated; orbits run backwards in time.
    pub fn time_reversed(&self) -> Params {
        Params {
            a: self.a,
            b: self.b,
            c: -self.c,
        }
    }

    /// Right-hand side at a state.
    pub fn velocity(&self, s: State) -> (f64, f64) {
        let Params { a, b, c } = *self;
        (
            c * (s.y - (s.x * s.x * s.x / 3.0 - s.x)),
            -(s.x - a + b * s.y) / c,
        )
    }

    /// Jacobian `[[c - c x^2, c], [-1/c, -b/c]]` at a state.
    pub fn jacobian(&self, s: State) -> [[f64; 2]; 2] {
        let Params { b, c, .. } = *self;
        [[c - c * s.x * s.x, c], [-1.0 / c, -b / c]]
    }

    /// Divergence `c - c x^2 - b/c`; strictly negative on `b > c^2`.
    pub fn divergence(&self, s: State) -> f64 {
        let Params { b, c, .. } = *self;
        c - c * s.x * s.x - b / c
    }

    /// Expansion into monomial coefficients (degree 3).
    pub fn to_polynomial(&self) -> PolyField2<f64> {
        let Params { a, b, c } = *self;
        let p = Poly2::from_terms([((0, 1), c), ((1, 0), c), ((3, 0), -c / 3.0)]);
        let q = Poly2::from_terms([((0, 0), a / c), ((1, 0), -1.0 / c), ((0, 1), -b / c)]);
        PolyField2::new(p, q)
    }

    /// Exact rational expansion for parameters given as rationals.
    pub fn to_polynomial_exact(a: BigRational, b: BigRational, c: BigRational) -> RatField2 {
        let third = BigRational::from_i64(1) / BigRational::from_i64(3);
        let p = Poly2::from_terms([
            ((0, 1), c.clone()),
            ((1, 0), c.clone()),
            ((3, 0), -(c.clone() * third)),
        ]);
        let q = Poly2::from_terms([
            ((0, 0), a / c.clone()),
            ((1, 0), -(BigRational::from_i64(1) / c.clone())),
            ((0, 1), -(b / c)),
        ]);
        PolyField2::new(p, q)
    }
}

/// A phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// The `Z_2` action `(x, y) -> (-x, -y)`; the field is equivariant for `a = 0`.
pub fn kappa(s: State) -> State {
    State::new(-s.x, -s.y)
}
