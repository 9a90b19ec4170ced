//! Poincare compactification, dynamics at infinity and the directional
//! blow-down chain of the family's degenerate infinite singularity.
//!
//! Chart fields are produced by exponent reindexing, so they stay exact over
//! rational coefficients; the blow-down chain is carried out entirely in
//! `BigRational` arithmetic and every step is cross-checked numerically
//! against the parent field through the substitution's chain rule.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fhn::Params;
use crate::poly::{ratio, Coeff, Poly2, PolyField2, RatField2};

/// Local charts of the Poincare sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    U1,
    U2,
    U3,
    V1,
    V2,
    V3,
}

/// A polynomial field expressed in a compactification chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartField<T: Coeff> {
    pub chart: Chart,
    pub field: PolyField2<T>,
}

/// Compactify a planar polynomial field into a local chart, clearing the
/// denominators with the `v^d` / `v^{d+1}` multipliers.
pub fn compactify<T: Coeff>(field: &PolyField2<T>, chart: Chart) -> ChartField<T> {
    let d = field.degree();
    let mut u_dot = Poly2::zero();
    let mut v_dot = Poly2::zero();
    match chart {
        Chart::U1 | Chart::V1 => {
            // u' = v^d [Q(1/v, u/v) - u P(1/v, u/v)], v' = -v^{d+1} P(1/v, u/v)
            for (&(i, j), c) in field.q.terms() {
                u_dot.add_term(j, d - i - j, c.clone());
            }
            for (&(i, j), c) in field.p.terms() {
                u_dot.add_term(j + 1, d - i - j, -c.clone());
                v_dot.add_term(j, d + 1 - i - j, -c.clone());
            }
        }
        Chart::U2 | Chart::V2 => {
            // u' = v^d [P(u/v, 1/v) - u Q(u/v, 1/v)], v' = -v^{d+1} Q(u/v, 1/v)
            for (&(i, j), c) in field.p.terms() {
                u_dot.add_term(i, d - i - j, c.clone());
            }
            for (&(i, j), c) in field.q.terms() {
                u_dot.add_term(i + 1, d - i - j, -c.clone());
                v_dot.add_term(i, d + 1 - i - j, -c.clone());
            }
        }
        Chart::U3 | Chart::V3 => {
            u_dot = field.p.clone();
            v_dot = field.q.clone();
        }
    }
    let mut out = PolyField2::new(u_dot, v_dot);
    // V charts equal the U charts up to multiplication by (-1)^{d-1}
    if matches!(chart, Chart::V1 | Chart::V2 | Chart::V3) && d.is_multiple_of(2) {
        out = out.scale(&(-T::one()));
    }
    ChartField { chart, field: out }
}

/// Classification of an infinite singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfClass {
    NodeStable,
    NodeUnstable,
    Saddle,
    SaddleNode,
    SemiHyperbolicOther,
    Nilpotent,
    LinearlyZero,
}

/// An equilibrium on the equator, reported in the chart where it was found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfiniteEquilibrium {
    pub chart: Chart,
    pub u: f64,
    pub eigenvalues: [(f64, f64); 2],
    pub classification: InfClass,
}

/// Real roots of a univariate polynomial given by ascending coefficients.
fn univariate_real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut cs: Vec<f64> = coeffs.to_vec();
    while cs.last().map(|c| c.abs() < 1e-14).unwrap_or(false) {
        cs.pop();
    }
    let n = cs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = cs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for r in 1..n {
        m[(r, r - 1)] = 1.0;
    }
    for r in 0..n {
        m[(r, n - 1)] = -cs[r] / lead;
    }
    let eig = m.complex_eigenvalues();
    let poly = |x: f64| cs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let dpoly = |x: f64| {
        cs.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
    };
    let mut roots = Vec::new();
    for lambda in eig.iter() {
        if lambda.im.abs() > 1e-7 * (1.0 + lambda.re.abs()) {
            continue;
        }
        let mut x = lambda.re;
        for _ in 0..3 {
            let d = dpoly(x);
            if d.abs() > 1e-300 {
                let step = poly(x) / d;
                if step.is_finite() {
                    x -= step;
                }
            }
        }
        if !roots.iter().any(|r: &f64| (r - x).abs() < 1e-7 * (1.0 + x.abs())) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// `F(u) = Q_d(1, u) - u P_d(1, u)` as ascending coefficients in `u`.
pub fn equator_polynomial_u1(field: &PolyField2<f64>) -> Vec<f64> {
    let d = field.degree();
    let mut coeffs = vec![0.0; d as usize + 2];
    for (&(i, j), c) in field.q.homogeneous_part(d).terms() {
        let _ = i;
        coeffs[j as usize] += c;
    }
    for (&(i, j), c) in field.p.homogeneous_part(d).terms() {
        let _ = i;
        coeffs[j as usize + 1] -= c;
    }
    coeffs
}

/// `G(u) = P_d(u, 1) - u Q_d(u, 1)` as ascending coefficients in `u`.
pub fn equator_polynomial_u2(field: &PolyField2<f64>) -> Vec<f64> {
    let d = field.degree();
    let mut coeffs = vec![0.0; d as usize + 2];
    for (&(i, j), c) in field.p.homogeneous_part(d).terms() {
        let _ = j;
        coeffs[i as usize] += c;
    }
    for (&(i, j), c) in field.q.homogeneous_part(d).terms() {
        let _ = j;
        coeffs[i as usize + 1] -= c;
    }
    coeffs
}

fn classify_at(chart_field: &PolyField2<f64>, u: f64) -> ([(f64, f64); 2], InfClass) {
    let j = chart_field.jacobian_at(u, 0.0);
    let l1 = j[0][0];
    let l2 = j[1][1];
    let eig = crate::equilibria::eig2(j);
    let tol = 1e-9;
    let class = if l1.abs() < tol && l2.abs() < tol {
        let linear_zero = j.iter().flatten().all(|e| e.abs() < tol);
        if linear_zero {
            InfClass::LinearlyZero
        } else {
            InfClass::Nilpotent
        }
    } else if l1.abs() < tol || l2.abs() < tol {
        // semi-hyperbolic: use the center-manifold leading term when it
        // resolves within degree 5
        let shifted = shift_field(chart_field, u, 0.0);
        match center_manifold_reduction(&shifted, 5, 1e-9)
            .ok()
            .and_then(|cm| cm.leading())
        {
            Some((degree, _)) if degree % 2 == 0 => InfClass::SaddleNode,
            _ => InfClass::SemiHyperbolicOther,
        }
    } else if l1 * l2 < 0.0 {
        InfClass::Saddle
    } else if l1 < 0.0 {
        InfClass::NodeStable
    } else {
        InfClass::NodeUnstable
    };
    (eig, class)
}

/// Equilibria at infinity: real roots of `F` in the `U1` chart plus the
/// `u = 0` root of `G` in `U2` when the vertical directions are singular.
/// Antipodal partners in the `V` charts carry the same data up to the
/// `(-1)^{d-1}` factor.
pub fn infinite_equilibria(field: &PolyField2<f64>) -> Vec<InfiniteEquilibrium> {
    let mut out = Vec::new();
    let u1 = compactify(field, Chart::U1);
    for u in univariate_real_roots(&equator_polynomial_u1(field)) {
        let (eigenvalues, classification) = classify_at(&u1.field, u);
        out.push(InfiniteEquilibrium {
            chart: Chart::U1,
            u,
            eigenvalues,
            classification,
        });
    }
    let g = equator_polynomial_u2(field);
    if g.first().map(|c| c.abs() < 1e-12).unwrap_or(false) {
        let u2 = compactify(field, Chart::U2);
        let (eigenvalues, classification) = classify_at(&u2.field, 0.0);
        out.push(InfiniteEquilibrium {
            chart: Chart::U2,
            u: 0.0,
            eigenvalues,
            classification,
        });
    }
    out
}

/// A tangent direction of orbits entering the singular origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CharDirection {
    pub vector: (f64, f64),
    pub multiplicity: usize,
}

/// Real linear factors of the characteristic polynomial
/// `T = x Q_m - y P_m` at a singular origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharacteristicDirections {
    /// `T` vanishes identically: every direction is characteristic.
    pub degenerate: bool,
    pub directions: Vec<CharDirection>,
}

pub fn characteristic_directions(field: &PolyField2<f64>) -> Result<CharacteristicDirections> {
    let m = field
        .lowest_degree()
        .ok_or_else(|| Error::DomainError("zero field has no directions".into()))?;
    if m == 0 {
        return Err(Error::DomainError(
            "origin is not singular (nonzero constant term)".into(),
        ));
    }
    let pm = field.p.homogeneous_part(m);
    let qm = field.q.homogeneous_part(m);
    let t = qm.mul_monomial(1, 0).sub(&pm.mul_monomial(0, 1));
    if t.is_zero() {
        return Ok(CharacteristicDirections {
            degenerate: true,
            directions: Vec::new(),
        });
    }
    // slice T(1, z): ascending coefficients in z
    let deg = m as usize + 1;
    let mut coeffs = vec![0.0; deg + 1];
    for (&(_, j), c) in t.terms() {
        coeffs[j as usize] += c;
    }
    let mut eff = coeffs.clone();
    while eff.last().map(|c| c.abs() < 1e-12).unwrap_or(false) {
        eff.pop();
    }
    let vertical_multiplicity = deg + 1 - eff.len();
    let mut directions = Vec::new();
    let mut roots = univariate_real_roots(&coeffs);
    // cluster multiplicities by residual order
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
    for z in roots {
        // multiplicity: how many derivatives vanish at the root
        let poly_at = |x: f64, ds: usize| -> f64 {
            let mut c = eff.clone();
            for _ in 0..ds {
                c = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, v)| k as f64 * v)
                    .collect();
            }
            c.iter().rev().fold(0.0, |acc, v| acc * x + v)
        };
        let mut mult = 1;
        while mult < eff.len() && poly_at(z, mult).abs() < 1e-6 {
            mult += 1;
        }
        let norm = (1.0 + z * z).sqrt();
        directions.push(CharDirection {
            vector: (1.0 / norm, z / norm),
            multiplicity: mult,
        });
    }
    if vertical_multiplicity > 0 {
        directions.push(CharDirection {
            vector: (0.0, 1.0),
            multiplicity: vertical_multiplicity,
        });
    }
    Ok(CharacteristicDirections {
        degenerate: false,
        directions,
    })
}

/// What a single blow-down bookkeeping step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    VerticalBlowup,
    DirectionTranslation,
    PointTranslation,
    CommonFactorRescale,
    Truncation,
}

/// One step of a blow-up/blow-down computation over coefficients `T`.
#[derive(Debug, Clone)]
pub struct BlowUpStep<T: Coeff> {
    pub kind: StepKind,
    /// Human-readable substitution, e.g. `(u, v) -> (u, u v)`.
    pub substitution: String,
    pub result: PolyField2<T>,
    /// Monomial `x^i y^j` removed by a rescale step (`(0, 0)` otherwise).
    pub removed_factor: (u32, u32),
    /// Terms dropped by a truncation step.
    pub dropped: Option<PolyField2<T>>,
}

/// Blow up the origin in the `x` direction: substitutes `(x, y) -> (x, z x)`
/// and divides by the common factor `x^{m-1}`, which is recorded.
pub fn vertical_blowup<T: Coeff>(field: &PolyField2<T>) -> Result<BlowUpStep<T>> {
    let raw = blowup_raw(field)?;
    let m = field
        .lowest_degree()
        .ok_or_else(|| Error::DomainError("cannot blow up the zero field".into()))?;
    if m == 0 {
        return Err(Error::DomainError("origin is not singular".into()));
    }
    let k = m - 1;
    let result = PolyField2::new(raw.p.div_monomial(k, 0)?, raw.q.div_monomial(k, 0)?);
    Ok(BlowUpStep {
        kind: StepKind::VerticalBlowup,
        substitution: "(x, y) -> (x, z x); divide x^(m-1)".into(),
        result,
        removed_factor: (k, 0),
        dropped: None,
    })
}

/// The raw blow-up transform `(P(x, zx), (Q(x, zx) - z P(x, zx)) / x)`.
fn blowup_raw<T: Coeff>(field: &PolyField2<T>) -> Result<PolyField2<T>> {
    let x = Poly2::monomial(1, 0, T::one());
    let zx = Poly2::monomial(1, 1, T::one());
    let p_sub = field.p.substitute(&x, &zx);
    let q_sub = field.q.substitute(&x, &zx);
    let z = Poly2::monomial(0, 1, T::one());
    let q_new = q_sub.sub(&z.mul(&p_sub)).div_monomial(1, 0)?;
    Ok(PolyField2::new(p_sub, q_new))
}

/// The exact blow-down chain of the family's degenerate equator point in the
/// `U2` chart, with per-step numeric verification.
#[derive(Debug, Clone)]
pub struct BlowdownChain {
    pub params: Params,
    /// The family field in the `U2` chart, exact rational coefficients.
    pub initial: RatField2,
    pub steps: Vec<BlowUpStep<BigRational>>,
    /// Largest relative residual seen during step verification.
    pub max_residual: f64,
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

fn lcg_points_seeded(n: usize, seed: u64) -> Vec<(f64, f64)> {
    // deterministic sample points with |u|, |v| in [0.1, 0.6]: the blow-up
    // checks divide by u, so points hug neither axis
    let mut state = 0x2545f4914f6cdd1d_u64 ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let unit = (state >> 11) as f64 / (1u64 << 53) as f64;
        let sign = if state & (1 << 7) == 0 { 1.0 } else { -1.0 };
        sign * (0.1 + 0.5 * unit)
    };
    (0..n).map(|_| (next(), next())).collect()
}

fn lcg_points(n: usize) -> Vec<(f64, f64)> {
    lcg_points_seeded(n, 0)
}

/// Re-verify every chain step at `samples` freshly seeded points; returns the
/// per-step worst relative residual.
pub fn chain_step_residuals(chain: &BlowdownChain, samples: usize, seed: u64) -> Vec<f64> {
    let points = lcg_points_seeded(samples, seed);
    let mut residuals = Vec::with_capacity(chain.steps.len());
    let mut parent = &chain.initial;
    for step in &chain.steps {
        residuals.push(verify_step(parent, step, &points));
        parent = &step.result;
    }
    residuals
}

fn rel_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Numeric dual-route check of one substitution step: evaluate the parent
/// field through the substitution's chain rule and compare with the child
/// polynomial times the removed factor.
fn verify_step(
    parent: &RatField2,
    step: &BlowUpStep<BigRational>,
    points: &[(f64, f64)],
) -> f64 {
    let parent_f = parent.map_coeffs(|c| c.to_f64());
    let child_f = step.result.map_coeffs(|c| c.to_f64());
    let mut worst = 0.0_f64;
    for &(u, v) in points {
        let (expect_u, expect_v, factor) = match step.kind {
            StepKind::VerticalBlowup => {
                // parent at (u, v u); child times u^{m-1} matches
                // (P, (Q - v P)/u)
                let (pp, qq) = parent_f.eval_f64(u, v * u);
                (pp, (qq - v * pp) / u, u.powi(step.removed_factor.0 as i32))
            }
            StepKind::CommonFactorRescale => {
                let (pp, qq) = parent_f.eval_f64(u, v);
                (pp, qq, u.powi(step.removed_factor.0 as i32) * v.powi(step.removed_factor.1 as i32))
            }
            StepKind::DirectionTranslation => {
                // (x, y) = (u - v, v): child_u = parent_x + parent_y, child_v = parent_y
                let (pp, qq) = parent_f.eval_f64(u - v, v);
                (pp + qq, qq, 1.0)
            }
            StepKind::PointTranslation => {
                let (pp, qq) = parent_f.eval_f64(u, 1.0 + v);
                (pp, qq, 1.0)
            }
            StepKind::Truncation => {
                let (pp, qq) = parent_f.eval_f64(u, v);
                let dropped = step.dropped.as_ref().expect("truncation records remainder");
                let (dp, dq) = dropped.map_coeffs(|c| c.to_f64()).eval_f64(u, v);
                (pp - dp, qq - dq, 1.0)
            }
        };
        let (cu, cv) = child_f.eval_f64(u, v);
        worst = worst
            .max(rel_residual(cu * factor, expect_u))
            .max(rel_residual(cv * factor, expect_v));
    }
    worst
}

/// Execute the full blow-down chain for the given parameters.
pub fn fhn_blowdown_chain(params: &Params) -> Result<BlowdownChain> {
    let field = Params::to_polynomial_exact(
        rational(params.a()),
        rational(params.b()),
        rational(params.c()),
    );
    let initial = compactify(&field, Chart::U2).field;
    let points = lcg_points(20);
    let mut steps: Vec<BlowUpStep<BigRational>> = Vec::new();
    let mut max_residual = 0.0_f64;
    let mut current = initial.clone();

    let push = |step: BlowUpStep<BigRational>,
                    current: &mut RatField2,
                    steps: &mut Vec<BlowUpStep<BigRational>>,
                    max_residual: &mut f64|
     -> Result<()> {
        let residual = verify_step(current, &step, &points);
        if residual.is_nan() || residual >= 1e-9 {
            return Err(Error::ChainMismatch {
                step: steps.len(),
                residual,
            });
        }
        *max_residual = max_residual.max(residual);
        *current = step.result.clone();
        steps.push(step);
        Ok(())
    };

    // blow-up of the U2 origin, then remove the common factor u
    let raw = blowup_raw(&current)?;
    push(
        BlowUpStep {
            kind: StepKind::VerticalBlowup,
            substitution: "(u, v) -> (u1, u1 v1)".into(),
            result: raw.clone(),
            removed_factor: (0, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;
    push(
        BlowUpStep {
            kind: StepKind::CommonFactorRescale,
            substitution: "divide by u1".into(),
            result: PolyField2::new(raw.p.div_monomial(1, 0)?, raw.q.div_monomial(1, 0)?),
            removed_factor: (1, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    // move the vertical characteristic direction to u = v
    let translated = direction_translate(&current);
    push(
        BlowUpStep {
            kind: StepKind::DirectionTranslation,
            substitution: "(u1, v1) = (u2 - v2, v2)".into(),
            result: translated,
            removed_factor: (0, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    // second blow-up, remove u3
    let raw = blowup_raw(&current)?;
    push(
        BlowUpStep {
            kind: StepKind::VerticalBlowup,
            substitution: "(u2, v2) -> (u3, u3 v3)".into(),
            result: raw.clone(),
            removed_factor: (0, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;
    push(
        BlowUpStep {
            kind: StepKind::CommonFactorRescale,
            substitution: "divide by u3".into(),
            result: PolyField2::new(raw.p.div_monomial(1, 0)?, raw.q.div_monomial(1, 0)?),
            removed_factor: (1, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    // translate the singular point (0, 1) to the origin
    let translated = point_translate_y1(&current);
    push(
        BlowUpStep {
            kind: StepKind::PointTranslation,
            substitution: "(u3, v3) = (u4, 1 + v4)".into(),
            result: translated,
            removed_factor: (0, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    // move the vertical characteristic direction to u = v again
    let translated = direction_translate(&current);
    push(
        BlowUpStep {
            kind: StepKind::DirectionTranslation,
            substitution: "(u4, v4) = (u5 - v5, v5)".into(),
            result: translated,
            removed_factor: (0, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    // third blow-up, remove u6
    let raw = blowup_raw(&current)?;
    push(
        BlowUpStep {
            kind: StepKind::VerticalBlowup,
            substitution: "(u5, v5) -> (u6, u6 v6)".into(),
            result: raw.clone(),
            removed_factor: (0, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;
    push(
        BlowUpStep {
            kind: StepKind::CommonFactorRescale,
            substitution: "divide by u6".into(),
            result: PolyField2::new(raw.p.div_monomial(1, 0)?, raw.q.div_monomial(1, 0)?),
            removed_factor: (1, 0),
            dropped: None,
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    // truncate to the bracket-linear display; the remainder is recorded
    let truncated = truncated_final(params);
    let dropped = PolyField2::new(
        current.p.sub(&truncated.p),
        current.q.sub(&truncated.q),
    );
    push(
        BlowUpStep {
            kind: StepKind::Truncation,
            substitution: "drop bracket terms of degree >= 2".into(),
            result: truncated,
            removed_factor: (0, 0),
            dropped: Some(dropped),
        },
        &mut current,
        &mut steps,
        &mut max_residual,
    )?;

    Ok(BlowdownChain {
        params: *params,
        initial,
        steps,
        max_residual,
    })
}

fn direction_translate(field: &RatField2) -> RatField2 {
    // (x, y) = (u - v, v): components transform as (P + Q, Q)
    let u = Poly2::from_terms([((1, 0), ratio(1, 1)), ((0, 1), ratio(-1, 1))]);
    let v = Poly2::monomial(0, 1, ratio(1, 1));
    let p = field.p.substitute(&u, &v);
    let q = field.q.substitute(&u, &v);
    PolyField2::new(p.add(&q), q)
}

fn point_translate_y1(field: &RatField2) -> RatField2 {
    let u = Poly2::monomial(1, 0, ratio(1, 1));
    let v = Poly2::from_terms([((0, 1), ratio(1, 1)), ((0, 0), ratio(1, 1))]);
    field.substitute(&u, &v)
}

/// The displayed truncation of the final chain system:
/// `u' = -(1/3c) u (3c^2 - 11 c^2 v)`, `v' = (1/3c) v (v - 1)(-9c^2 + 6c^2 v)`.
fn truncated_final(params: &Params) -> RatField2 {
    let c = rational(params.c());
    let p = Poly2::from_terms([
        ((1, 0), -c.clone()),
        ((1, 1), ratio(11, 3) * c.clone()),
    ]);
    let q = Poly2::from_terms([
        ((0, 1), ratio(3, 1) * c.clone()),
        ((0, 2), ratio(-5, 1) * c.clone()),
        ((0, 3), ratio(2, 1) * c.clone()),
    ]);
    PolyField2::new(p, q)
}

impl BlowdownChain {
    /// The field after the second rescale (two blow-ups in).
    pub fn mid_chart(&self) -> &RatField2 {
        &self.steps[4].result
    }

    /// The full final field (before truncation).
    pub fn final_full(&self) -> &RatField2 {
        &self.steps[8].result
    }

    /// The truncated final field.
    pub fn final_truncated(&self) -> &RatField2 {
        &self.steps[9].result
    }

    /// Exact Jacobian eigenvalues of a chain field at `(0, v0)`; the Jacobian
    /// is triangular there, so the diagonal is exact.
    pub fn eigenvalues_on_axis(field: &RatField2, v0: BigRational) -> [BigRational; 2] {
        let zero = BigRational::zero();
        let j00 = field.p.dx().eval(&zero, &v0);
        let j11 = field.q.dy().eval(&zero, &v0);
        [j00, j11]
    }

    /// Eigenvalues at the saddle on the exceptional line of the mid chart.
    pub fn e1_tilde_eigenvalues(&self) -> [BigRational; 2] {
        Self::eigenvalues_on_axis(self.mid_chart(), BigRational::zero())
    }

    /// Eigenvalues at the three equilibria of the final system on `u = 0`.
    pub fn final_eigenvalues(&self) -> [[BigRational; 2]; 3] {
        let f = self.final_full();
        [
            Self::eigenvalues_on_axis(f, ratio(0, 1)),
            Self::eigenvalues_on_axis(f, ratio(1, 1)),
            Self::eigenvalues_on_axis(f, ratio(3, 2)),
        ]
    }

    /// Exact center-manifold reduction at the semi-hyperbolic point `(0, 3/2)`
    /// of the final system; returns the reduced cubic coefficient, which
    /// equals `-b/(8c)`.
    pub fn e6_center_manifold_cubic(&self) -> Result<BigRational> {
        let shifted = self
            .final_full()
            .substitute(
                &Poly2::monomial(1, 0, ratio(1, 1)),
                &Poly2::from_terms([((0, 1), ratio(1, 1)), ((0, 0), ratio(3, 2))]),
            );
        let cm = center_manifold_reduction(&shifted, 3, 0.0)?;
        if !cm.reduced.coeff(2, 0).is_zero() {
            return Err(Error::ChainMismatch {
                step: usize::MAX,
                residual: cm.reduced.coeff(2, 0).to_f64().abs(),
            });
        }
        Ok(cm.reduced.coeff(3, 0))
    }

    /// Classification of the semi-hyperbolic point per the source's case
    /// table: saddle for `b > 0`, unstable node for `b < 0, c < 0`, stable
    /// node for `b < 0, c > 0` and on `b = 0`.
    pub fn e6_classification(&self) -> Result<E6Class> {
        let cubic = self.e6_center_manifold_cubic()?;
        classify_e6_from_reduction(&cubic, self.params.b(), self.params.c())
    }
}

/// Topological type of the distinguished semi-hyperbolic chain point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum E6Class {
    Saddle,
    UnstableNode,
    StableNode,
}

fn classify_e6_from_reduction(cubic: &BigRational, b: f64, c: f64) -> Result<E6Class> {
    // the computed coefficient must equal -b/(8c) exactly
    let expected = rational(-b) / (ratio(8, 1) * rational(c));
    if *cubic != expected {
        return Err(Error::ChainMismatch {
            step: usize::MAX,
            residual: (cubic.to_f64() - expected.to_f64()).abs(),
        });
    }
    let k = cubic.to_f64();
    let h = 1.5 * c; // hyperbolic eigenvalue 3c/2
    Ok(if k * h < 0.0 {
        E6Class::Saddle
    } else if k == 0.0 {
        // degenerate line b = 0 keeps the stable-node type of the table
        E6Class::StableNode
    } else if k > 0.0 {
        E6Class::StableNode
    } else {
        E6Class::UnstableNode
    })
}

/// Outcome of a center-manifold reduction at a semi-hyperbolic origin.
#[derive(Debug, Clone)]
pub struct CenterManifold<T: Coeff> {
    /// Hyperbolic eigenvalue (the trace of the linear part).
    pub hyperbolic_eigenvalue: T,
    /// Restricted dynamics on the center manifold, a polynomial in the
    /// center coordinate alone, up to the computed order.
    pub reduced: Poly2<T>,
    /// Order up to which the reduction was carried out.
    pub max_degree: usize,
}

impl<T: Coeff> CenterManifold<T> {
    /// Lowest-degree nonzero reduced term `(degree, coefficient)`.
    pub fn leading(&self) -> Option<(usize, T)> {
        for n in 2..=self.max_degree as u32 {
            let coeff = self.reduced.coeff(n, 0);
            if coeff.to_f64().abs() > 1e-13 {
                return Some((n as usize, coeff));
            }
        }
        None
    }
}

/// Compute the center-manifold reduction `x' = k x^n + ...` of a planar
/// field with eigenvalues `(0, lambda)` at the origin, up to `max_deg`.
///
/// The center direction is brought onto the x-axis by a unit-diagonal shear,
/// so the reduced coordinate keeps the scale of the original variable.
pub fn center_manifold_reduction<T: Coeff>(
    field: &PolyField2<T>,
    max_deg: usize,
    zero_tol: f64,
) -> Result<CenterManifold<T>> {
    let l = [
        [field.p.coeff(1, 0), field.p.coeff(0, 1)],
        [field.q.coeff(1, 0), field.q.coeff(0, 1)],
    ];
    let det = l[0][0].clone() * l[1][1].clone() - l[0][1].clone() * l[1][0].clone();
    let trace = l[0][0].clone() + l[1][1].clone();
    if det.to_f64().abs() > zero_tol.max(1e-12) || trace.to_f64().abs() <= zero_tol.max(1e-12) {
        return Err(Error::DomainError(
            "center-manifold reduction needs eigenvalues (0, lambda != 0)".into(),
        ));
    }
    // center eigenvector v with L v = 0
    let (swap, shear) = center_orientation(&l)?;
    let (p, q) = if swap {
        (swap_vars(&field.q), swap_vars(&field.p))
    } else {
        (field.p.clone(), field.q.clone())
    };
    // shear (x, y) -> (x, y + s x) maps the center direction to the x-axis:
    // new_p = p(x, y + s x), new_q = q(...) - s * new_p
    let sx = Poly2::monomial(1, 0, T::one());
    let sy = Poly2::from_terms([((0, 1), T::one()), ((1, 0), shear.clone())]);
    let tp = p.substitute(&sx, &sy);
    let tq = q.substitute(&sx, &sy).sub(&tp.scale(&shear));

    // solve the graph y = h(x) order by order: residual of
    // q(x, h) - h'(x) p(x, h) must vanish; the linear-in-h_k term is lambda h_k
    let lambda = trace;
    let cap = (max_deg + 1) as u32;
    let hx = Poly2::from_terms([((1, 0), T::one())]);
    let mut h: Poly2<T> = Poly2::zero();
    for k in 2..=max_deg as u32 {
        let comp = |poly: &Poly2<T>, h: &Poly2<T>| -> Poly2<T> {
            truncate(&poly.substitute(&hx, h), cap)
        };
        let residual = comp(&tq, &h).sub(&truncate(&h.dx().mul(&comp(&tp, &h)), cap));
        let r_k = residual.coeff(k, 0);
        // lambda * h_k + r_k = 0 once h_k enters the linear term
        let h_k = -r_k / lambda.clone();
        if !h_k.is_zero() {
            h.add_term(k, 0, h_k);
        }
    }
    let reduced = truncate(&tp.substitute(&hx, &h), max_deg as u32);
    Ok(CenterManifold {
        hyperbolic_eigenvalue: lambda,
        reduced,
        max_degree: max_deg,
    })
}

fn truncate<T: Coeff>(p: &Poly2<T>, max_total: u32) -> Poly2<T> {
    Poly2::from_terms(
        p.terms()
            .filter(|(&(i, j), _)| i + j <= max_total)
            .map(|(&k, v)| (k, v.clone())),
    )
}

fn swap_vars<T: Coeff>(p: &Poly2<T>) -> Poly2<T> {
    Poly2::from_terms(p.terms().map(|(&(i, j), v)| ((j, i), v.clone())))
}

/// Orientation of the center direction: returns (swap axes?, shear slope).
fn center_orientation<T: Coeff>(l: &[[T; 2]; 2]) -> Result<(bool, T)> {
    // center eigenvector (v1, v2) solves L v = 0; prefer the graph-over-x
    // form when v1 != 0
    let (a, b, c, d) = (
        l[0][0].clone(),
        l[0][1].clone(),
        l[1][0].clone(),
        l[1][1].clone(),
    );
    // rows are proportional; find v with a v1 + b v2 = 0, c v1 + d v2 = 0
    let (v1, v2) = if !a.is_zero() || !b.is_zero() {
        (b.clone(), -a.clone())
    } else {
        (d.clone(), -c.clone())
    };
    if !v1.is_zero() {
        Ok((false, v2 / v1))
    } else if !v2.is_zero() {
        Ok((true, v1 / v2))
    } else {
        Err(Error::DomainError("zero linear part has no center direction".into()))
    }
}

/// Generic semi-hyperbolic classification via the reduced leading term,
/// using the source's orientation convention for node stability.
pub fn classify_semihyperbolic(
    field: &PolyField2<f64>,
    at: (f64, f64),
) -> Result<(CenterManifold<f64>, InfClass)> {
    let shifted = shift_field(field, at.0, at.1);
    let cm = center_manifold_reduction(&shifted, 5, 1e-9)?;
    let Some((degree, k)) = cm.leading() else {
        return Err(Error::CenterManifoldOrderTooHigh(cm.max_degree));
    };
    let h = cm.hyperbolic_eigenvalue;
    let class = if degree % 2 == 0 {
        InfClass::SaddleNode
    } else if k * h < 0.0 {
        InfClass::Saddle
    } else if k > 0.0 {
        InfClass::NodeStable
    } else {
        InfClass::NodeUnstable
    };
    Ok((cm, class))
}

fn shift_field(field: &PolyField2<f64>, x0: f64, y0: f64) -> PolyField2<f64> {
    field.substitute(
        &Poly2::from_terms([((1, 0), 1.0), ((0, 0), x0)]),
        &Poly2::from_terms([((0, 1), 1.0), ((0, 0), y0)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fhn::State;

    fn params(a: f64, b: f64, c: f64) -> Params {
        Params::new(a, b, c).unwrap()
    }

    #[test]
    fn u1_chart_matches_display() {
        // coefficients of the U1 chart system for generic (a, b, c)
        let p = params(0.7, 1.3, 2.0);
        let (a, b, c) = (0.7, 1.3, 2.0);
        let chart = compactify(&p.to_polynomial(), Chart::U1);
        let u = &chart.field.p;
        assert!((u.coeff(2, 2) + c).abs() < 1e-15); // -c u^2 v^2
        assert!((u.coeff(1, 2) + (b / c + c)).abs() < 1e-15); // -(b/c + c) u v^2
        assert!((u.coeff(0, 3) - a / c).abs() < 1e-15); // (a/c) v^3
        assert!((u.coeff(0, 2) + 1.0 / c).abs() < 1e-15); // -(1/c) v^2
        assert!((u.coeff(1, 0) - c / 3.0).abs() < 1e-15); // (c/3) u
        let v = &chart.field.q;
        assert!((v.coeff(1, 3) + c).abs() < 1e-15);
        assert!((v.coeff(0, 3) + c).abs() < 1e-15);
        assert!((v.coeff(0, 1) - c / 3.0).abs() < 1e-15);
    }

    #[test]
    fn linear_field_into_u1() {
        // P = x, Q = y (d = 1) maps to (0, -v)
        let field = PolyField2::new(
            Poly2::monomial(1, 0, 1.0_f64),
            Poly2::monomial(0, 1, 1.0),
        );
        let chart = compactify(&field, Chart::U1);
        assert!(chart.field.p.is_zero());
        assert_eq!(chart.field.q.coeff(0, 1), -1.0);
        assert_eq!(chart.field.q.terms().count(), 1);
    }

    #[test]
    fn u3_is_identity_and_v_duality() {
        let f = params(0.3, 0.9, 1.1).to_polynomial();
        assert_eq!(compactify(&f, Chart::U3).field, f);
        // odd degree: V charts equal U charts
        assert_eq!(
            compactify(&f, Chart::V1).field,
            compactify(&f, Chart::U1).field
        );
        // even degree flips the sign
        let g = PolyField2::new(
            Poly2::monomial(2, 0, 1.0_f64),
            Poly2::monomial(0, 2, 1.0),
        );
        let u1 = compactify(&g, Chart::U1).field;
        let v1 = compactify(&g, Chart::V1).field;
        assert_eq!(v1.p, u1.p.neg());
        assert_eq!(v1.q, u1.q.neg());
    }

    #[test]
    fn chart_transition_coherence() {
        // U1 field = v^{d-1} times the pushforward of the plane field under
        // (u, v) = (y/x, 1/x), checked numerically for x > 0
        let p = params(0.4, 1.7, 1.5);
        let plane = p.to_polynomial();
        let d = plane.degree() as i32;
        let u1 = compactify(&plane, Chart::U1).field;
        for &(x, y) in &[(0.7, -0.3), (2.0, 1.5), (0.2, 0.9), (3.0, -2.0)] {
            let (u, v) = (y / x, 1.0 / x);
            let (px, qy) = plane.eval_f64(x, y);
            let push_u = v * (qy - u * px);
            let push_v = -v * v * px;
            let (cu, cv) = u1.eval_f64(u, v);
            let factor = v.powi(d - 1);
            assert!((cu - factor * push_u).abs() < 1e-9 * (1.0 + cu.abs()));
            assert!((cv - factor * push_v).abs() < 1e-9 * (1.0 + cv.abs()));
        }
    }

    #[test]
    fn infinite_equilibria_of_the_family() {
        let p = params(0.0, 1.0, 1.0);
        let inf = infinite_equilibria(&p.to_polynomial());
        assert_eq!(inf.len(), 2);
        let u1 = inf.iter().find(|e| e.chart == Chart::U1).unwrap();
        assert!(u1.u.abs() < 1e-12);
        assert!((u1.eigenvalues[0].0 - 1.0 / 3.0).abs() < 1e-12);
        assert!((u1.eigenvalues[1].0 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(u1.classification, InfClass::NodeUnstable);
        let u2 = inf.iter().find(|e| e.chart == Chart::U2).unwrap();
        assert_eq!(u2.classification, InfClass::LinearlyZero);

        // stable node at infinity for c < 0
        let p = params(0.0, 1.0, -1.0);
        let inf = infinite_equilibria(&p.to_polynomial());
        let u1 = inf.iter().find(|e| e.chart == Chart::U1).unwrap();
        assert_eq!(u1.classification, InfClass::NodeStable);
    }

    #[test]
    fn antipodal_stability_flips_for_even_degree() {
        // d = 2 synthetic field with a hyperbolic equator point
        let field = PolyField2::new(
            Poly2::from_terms([((2, 0), -1.0_f64), ((0, 0), 0.3)]),
            Poly2::from_terms([((1, 1), -2.0), ((0, 1), 0.1)]),
        );
        let u1 = compactify(&field, Chart::U1).field;
        let v1 = compactify(&field, Chart::V1).field;
        let f = equator_polynomial_u1(&field);
        let roots = univariate_real_roots(&f);
        assert!(!roots.is_empty());
        let u = roots[0];
        let ju = u1.jacobian_at(u, 0.0);
        let jv = v1.jacobian_at(u, 0.0);
        // eigenvalues negate: a stable node pairs with an unstable node
        assert!((ju[0][0] + jv[0][0]).abs() < 1e-12);
        assert!((ju[1][1] + jv[1][1]).abs() < 1e-12);
    }

    #[test]
    fn characteristic_directions_examples() {
        // radial field: every direction characteristic
        let radial = PolyField2::new(
            Poly2::monomial(1, 0, 1.0_f64),
            Poly2::monomial(0, 1, 1.0),
        );
        assert!(characteristic_directions(&radial).unwrap().degenerate);

        // the mid-chain system has T = (2c/3) u^2 v: vertical direction of
        // multiplicity two plus the horizontal axis
        let chain = fhn_blowdown_chain(&params(0.2, 0.7, 1.3)).unwrap();
        let one_in = chain.steps[1].result.map_coeffs(|r| r.to_f64());
        let dirs = characteristic_directions(&one_in).unwrap();
        assert!(!dirs.degenerate);
        let vertical = dirs
            .directions
            .iter()
            .find(|d| d.vector.0.abs() < 1e-12)
            .expect("vertical direction present");
        assert_eq!(vertical.multiplicity, 2);
    }

    #[test]
    fn blowup_hand_example() {
        // x' = x^2, y' = x y: after blow-up and division x' = x, z' = 0
        let field = PolyField2::new(
            Poly2::monomial(2, 0, 1.0_f64),
            Poly2::monomial(1, 1, 1.0),
        );
        let step = vertical_blowup(&field).unwrap();
        assert_eq!(step.removed_factor, (1, 0));
        assert_eq!(step.result.p, Poly2::monomial(1, 0, 1.0));
        assert!(step.result.q.is_zero());
    }

    #[test]
    fn blowup_records_invert() {
        let field = params(0.1, 0.8, 1.7).to_polynomial();
        let u2 = compactify(&field, Chart::U2).field;
        let step = vertical_blowup(&u2).unwrap();
        // re-multiplying by the removed factor restores the raw blow-up
        let restored_p = step
            .result
            .p
            .mul_monomial(step.removed_factor.0, step.removed_factor.1);
        let raw = blowup_raw(&u2).unwrap();
        for (&(i, j), c) in raw.p.terms() {
            assert!((restored_p.coeff(i, j) - c).abs() < 1e-15);
        }
    }

    #[test]
    fn chain_reproduces_exceptional_equilibria() {
        let p = params(0.3, 1.1, 2.0);
        let chain = fhn_blowdown_chain(&p).unwrap();
        assert!(chain.max_residual < 1e-9);
        let c = rational(p.c());

        let e1 = chain.e1_tilde_eigenvalues();
        assert_eq!(e1[0], -c.clone() / ratio(3, 1));
        assert_eq!(e1[1], ratio(2, 3) * c.clone());

        let eig = chain.final_eigenvalues();
        assert_eq!(eig[0][0], -c.clone());
        assert_eq!(eig[0][1], ratio(3, 1) * c.clone());
        assert_eq!(eig[1][0], ratio(2, 3) * c.clone());
        assert_eq!(eig[1][1], -c.clone());
        assert_eq!(eig[2][0], BigRational::zero());
        assert_eq!(eig[2][1], ratio(3, 2) * c.clone());
    }

    #[test]
    fn e6_center_manifold_and_classification() {
        let cases = [
            (1.0, 1.0, E6Class::Saddle),
            (1.0, -1.0, E6Class::Saddle),
            (-1.0, -1.0, E6Class::UnstableNode),
            (-1.0, 1.0, E6Class::StableNode),
            (0.0, 1.0, E6Class::StableNode),
            (0.0, -1.0, E6Class::StableNode),
            (2.0, 0.5, E6Class::Saddle),
            (-2.0, 0.5, E6Class::StableNode),
            (-0.5, -2.0, E6Class::UnstableNode),
        ];
        for &(b, c, expected) in &cases {
            let chain = fhn_blowdown_chain(&params(0.4, b, c)).unwrap();
            let cubic = chain.e6_center_manifold_cubic().unwrap();
            assert_eq!(cubic, rational(-b) / (ratio(8, 1) * rational(c)));
            assert_eq!(chain.e6_classification().unwrap(), expected, "b={b} c={c}");
        }
    }

    #[test]
    fn chain_residuals_over_random_parameters() {
        let mut state = 12345_u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..50 {
            let (a, b) = (next(), next());
            let mut c = next();
            if c.abs() < 0.1 {
                c = 0.5;
            }
            let chain = fhn_blowdown_chain(&params(a, b, c)).unwrap();
            assert!(chain.max_residual < 1e-9, "residual {}", chain.max_residual);
        }
    }

    #[test]
    fn semihyperbolic_saddle_node_detection() {
        // x' = x^2 + ..., y' = -y: a saddle-node
        let field = PolyField2::new(
            Poly2::from_terms([((2, 0), 1.0_f64)]),
            Poly2::from_terms([((0, 1), -1.0)]),
        );
        let (cm, class) = classify_semihyperbolic(&field, (0.0, 0.0)).unwrap();
        assert_eq!(cm.leading().unwrap().0, 2);
        assert_eq!(class, InfClass::SaddleNode);
        let _ = State::new(0.0, 0.0);
    }
}
