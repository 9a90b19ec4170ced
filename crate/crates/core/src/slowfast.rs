//! The `epsilon = 1/c^2` slow-fast form: critical-manifold geometry, fold
//! and singular-fold detection, normal-form canard coefficients and a
//! numerical canard-tracking harness.
//!
//! Fast stability of critical-manifold branches is always computed from the
//! sign of `df/dx = 1 - x^2`: the middle branch `|x| < 1` is repelling and
//! the outer branches are attracting.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, IntegrateOptions};
use crate::error::{Error, Result};
use crate::fhn::{Params, State};
use crate::poly::ratio;

/// The family rewritten on the slow time scale:
/// `eps x' = y - (x^3/3 - x)`, `y' = -(x - a + b y)` with `eps = 1/c^2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlowFastForm {
    pub epsilon: f64,
    pub params: Params,
}

impl SlowFastForm {
    /// Fast map `f(x, y) = y - (x^3/3 - x)`.
    pub fn fast(&self, s: State) -> f64 {
        s.y - (s.x * s.x * s.x / 3.0 - s.x)
    }

    /// Slow map `g(x, y) = -(x - a + b y)`.
    pub fn slow(&self, s: State) -> f64 {
        -(s.x - self.params.a() + self.params.b() * s.y)
    }
}

/// Rewrite the family in slow-fast form.
pub fn to_slow_fast(params: &Params) -> SlowFastForm {
    SlowFastForm {
        epsilon: 1.0 / (params.c() * params.c()),
        params: *params,
    }
}

/// The cubic critical manifold `y = x^3/3 - x`.
pub fn critical_curve(x: f64) -> f64 {
    x * x * x / 3.0 - x
}

/// Branch of the critical manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `x < -1`
    Left,
    /// `-1 < x < 1`
    Middle,
    /// `x > 1`
    Right,
    /// `x = +-1`
    Fold,
}

/// Fast-flow stability of a critical-manifold point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FastStability {
    Attracting,
    Repelling,
    Degenerate,
}

/// A point of the critical manifold with its branch and fast stability.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub branch: Branch,
    pub fast_stability: FastStability,
}

/// Classify the critical-manifold point over `x`.
pub fn critical_point(x: f64) -> CriticalPoint {
    let df_dx = 1.0 - x * x;
    let (branch, fast_stability) = if df_dx == 0.0 {
        (Branch::Fold, FastStability::Degenerate)
    } else if df_dx > 0.0 {
        (Branch::Middle, FastStability::Repelling)
    } else if x < -1.0 {
        (Branch::Left, FastStability::Attracting)
    } else {
        (Branch::Right, FastStability::Attracting)
    };
    CriticalPoint {
        x,
        y: critical_curve(x),
        branch,
        fast_stability,
    }
}

/// Fold-point record at `(+-1, -+2/3)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FoldPointRec {
    pub location: State,
    /// Fold with `g != 0` there.
    pub is_regular_fold: bool,
    /// Fold coinciding with an equilibrium (`g = 0`).
    pub is_singular_fold: bool,
    /// Singular fold with `dg/dx != 0` and a nonzero parameter derivative.
    pub is_regular_singular: bool,
    /// `g` at the fold.
    pub g_value: f64,
}

/// Evaluate the fold conditions at the two parameter-independent folds.
pub fn fold_analysis(params: &Params) -> Vec<FoldPointRec> {
    [-1.0_f64, 1.0_f64]
        .iter()
        .map(|&x| {
            let loc = State::new(x, critical_curve(x));
            let form = to_slow_fast(params);
            let g = form.slow(loc);
            let singular = g.abs() < 1e-12;
            // dg/dx = -1 always; dg/da = 1 always; dg/db = -y != 0 at folds
            FoldPointRec {
                location: loc,
                is_regular_fold: !singular,
                is_singular_fold: singular,
                is_regular_singular: singular,
                g_value: g,
            }
        })
        .collect()
}

/// Values and x-derivatives at the origin of the six normal-form factors of
/// the singular-Hopf canonical form.
#[derive(Debug, Clone)]
pub struct NormalFormFactors {
    pub l: [BigRational; 6],
    pub dl_dx: [BigRational; 6],
}

impl NormalFormFactors {
    /// Case A factors at the fold `E3` with `lambda = b - 3/2`
    /// (`l2 = -1 - x/3` contributes the only nonzero derivative besides `l6`).
    pub fn case_a() -> Self {
        NormalFormFactors {
            l: [
                ratio(-1, 1),
                ratio(-1, 1),
                ratio(0, 1),
                ratio(1, 1),
                ratio(1, 1),
                ratio(-3, 2),
            ],
            dl_dx: [
                ratio(0, 1),
                ratio(-1, 3),
                ratio(0, 1),
                ratio(0, 1),
                ratio(0, 1),
                ratio(0, 1),
            ],
        }
    }

    /// Case B factors at the fold `(1, -2/3)` after time reversal with
    /// `lambda = a - 1` (`l2 = 1 + x/3`).
    pub fn case_b() -> Self {
        NormalFormFactors {
            l: [
                ratio(-1, 1),
                ratio(1, 1),
                ratio(0, 1),
                ratio(1, 1),
                ratio(1, 1),
                ratio(0, 1),
            ],
            dl_dx: [
                ratio(0, 1),
                ratio(1, 3),
                ratio(0, 1),
                ratio(0, 1),
                ratio(0, 1),
                ratio(0, 1),
            ],
        }
    }
}

/// Singular-fold normal-form coefficients and the asymptotic canard/Hopf
/// parameter expansions, kept as exact rationals.
#[derive(Debug, Clone)]
pub struct CanardData {
    pub factors: NormalFormFactors,
    /// `A = (-l1_x + 3 l2_x - 2 l4_x + 2 l6) / 8`.
    pub a: BigRational,
    /// The un-normalised combination `8A`; the source reports this raw value
    /// for Case B.
    pub a_raw: BigRational,
    /// `B = (l3_x + l6) / 2`.
    pub b: BigRational,
    /// `epsilon`-coefficient of the canard curve, `-(B + A)`.
    pub lambda_c_coeff: BigRational,
    /// `epsilon`-coefficient of the singular Hopf curve, `-B`.
    pub lambda_h_coeff: BigRational,
}

impl CanardData {
    pub fn a_f64(&self) -> f64 {
        rational_to_f64(&self.a)
    }
    pub fn b_f64(&self) -> f64 {
        rational_to_f64(&self.b)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Evaluate the `A`/`B` combinations of the singular-Hopf normal form.
pub fn canard_coefficients(factors: &NormalFormFactors) -> CanardData {
    let two = ratio(2, 1);
    let three = ratio(3, 1);
    let eight = ratio(8, 1);
    let a_raw = -factors.dl_dx[0].clone() + three * factors.dl_dx[1].clone()
        - two.clone() * factors.dl_dx[3].clone()
        + two.clone() * factors.l[5].clone();
    let a = a_raw.clone() / eight;
    let b = (factors.dl_dx[2].clone() + factors.l[5].clone()) / two;
    let lambda_c_coeff = -(b.clone() + a.clone());
    let lambda_h_coeff = -b.clone();
    CanardData {
        factors: factors.clone(),
        a,
        a_raw,
        b,
        lambda_c_coeff,
        lambda_h_coeff,
    }
}

/// Which singular scenario a canard query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CanardCase {
    /// `a = 0`, canard in `b` near `3/2`.
    A,
    /// `b = 0`, canard offset in `a` near the fold value.
    B,
}

/// Asymptotic canard parameter: Case A returns `b_c = 3/2 + (5/4) eps`;
/// Case B returns the offset `-eps/8` that the source writes as `a_c`.
pub fn canard_curve(case: CanardCase, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::DomainError(format!(
            "asymptotic canard formulas hold for 0 < eps <= 0.25, got {eps}"
        )));
    }
    Ok(match case {
        CanardCase::A => {
            let data = canard_coefficients(&NormalFormFactors::case_a());
            1.5 + rational_to_f64(&data.lambda_c_coeff) * eps
        }
        CanardCase::B => {
            let data = canard_coefficients(&NormalFormFactors::case_b());
            rational_to_f64(&data.lambda_c_coeff) * eps
        }
    })
}

/// Leading-order Case A separation `b_c - b_H = eps/2`.
pub fn hopf_canard_separation(eps: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&eps) {
        return Err(Error::DomainError(format!(
            "separation formula holds for 0 <= eps <= 0.25, got {eps}"
        )));
    }
    let data = canard_coefficients(&NormalFormFactors::case_a());
    Ok(rational_to_f64(&(data.lambda_c_coeff.clone() - data.lambda_h_coeff.clone())) * eps)
}

/// Result of the canard-tracking harness.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CanardTracking {
    /// Longest contiguous slow-time interval spent within the tracking band
    /// of the fast-repelling branch.
    pub tracked_slow_time: f64,
    /// Largest distance to the branch seen during that interval.
    pub max_distance_to_manifold: f64,
}

/// Slow-time integration horizon of the tracking harness.
const TRACK_HORIZON_SLOW: f64 = 8.0;

/// Integrate the full system at `c = 1/sqrt(eps)` from a point arriving at
/// the fold along the attracting branch and measure for how much slow time
/// the orbit stays within `5 eps` of the fast-repelling middle branch.
pub fn verify_canard(case: CanardCase, eps: f64, param: f64) -> Result<CanardTracking> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::DomainError(format!("eps must be positive, got {eps}")));
    }
    if eps > 0.05 {
        return Err(Error::StiffnessBudgetExceeded(format!(
            "tracking harness is budgeted for eps <= 0.05, got {eps}"
        )));
    }
    let c = 1.0 / eps.sqrt();
    let params = match case {
        CanardCase::A => Params::new(0.0, param, c)?,
        CanardCase::B => Params::new(param, 0.0, c)?,
    };
    let x0 = 1.0 + eps.sqrt();
    let s0 = State::new(x0, critical_curve(x0));
    let opts = IntegrateOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        sample_dt: Some(2e-3 * c),
        max_steps: 50_000_000,
        ..Default::default()
    };
    let seg = integrate(&params, s0, TRACK_HORIZON_SLOW * c, &opts)?;

    let band = 5.0 * eps;
    let mut best = 0.0_f64;
    let mut best_dist = 0.0_f64;
    let mut run_start: Option<f64> = None;
    let mut run_dist = 0.0_f64;
    let mut prev_t = 0.0;
    for &(t, s) in &seg.samples {
        let dist = (s.y - critical_curve(s.x)).abs();
        let in_band = s.x.abs() < 1.0 && dist <= band;
        if in_band {
            if run_start.is_none() {
                run_start = Some(t);
                run_dist = 0.0;
            }
            run_dist = run_dist.max(dist);
            if t - run_start.unwrap() > best {
                best = t - run_start.unwrap();
                best_dist = run_dist;
            }
        } else if let Some(start) = run_start.take() {
            if prev_t - start > best {
                best = prev_t - start;
                best_dist = run_dist;
            }
        }
        prev_t = t;
    }
    Ok(CanardTracking {
        tracked_slow_time: best / c,
        max_distance_to_manifold: best_dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate;

    #[test]
    fn slow_fast_form_basics() {
        let p = Params::new(0.0, 1.5, 10.0).unwrap();
        let form = to_slow_fast(&p);
        assert!((form.epsilon - 0.01).abs() < 1e-15);
        // fold points are zeros of both maps at b = 3/2
        for &x in &[-1.0, 1.0] {
            let s = State::new(x, critical_curve(x));
            assert!(form.fast(s).abs() < 1e-15);
            assert!(form.slow(s).abs() < 1e-15);
        }
    }

    #[test]
    fn slow_time_rescale_reproduces_orbits() {
        // (x' = f/eps, y' = g) on slow time tau equals the family field on
        // t = c tau; integrate the family over t in [0, 5] and the slow-fast
        // field over tau in [0, 5/c] by reusing the family integrator.
        let c = 5.0;
        let p = Params::new(0.0, 1.5, c).unwrap();
        let s0 = State::new(2.0, 0.5);
        let opts = IntegrateOptions {
            sample_dt: Some(0.5),
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            ..Default::default()
        };
        let fast = integrate(&p, s0, 5.0, &opts).unwrap();
        // the slow-fast vector field is (f/eps, g) = c^2 f, g); its orbit at
        // tau = t/c passes the same points, so check a midpoint via the form
        let form = to_slow_fast(&p);
        for &(_, s) in fast.samples.iter() {
            let (vx, vy) = p.velocity(s);
            let sf = (form.fast(s) / form.epsilon, form.slow(s));
            // d/dt = (1/c) d/dtau
            assert!((vx - sf.0 / c).abs() < 1e-9 * (1.0 + sf.0.abs()));
            assert!((vy - sf.1 / c).abs() < 1e-9 * (1.0 + sf.1.abs()));
        }
    }

    #[test]
    fn critical_point_classification() {
        let p = critical_point(0.0);
        assert_eq!(p.branch, Branch::Middle);
        assert_eq!(p.fast_stability, FastStability::Repelling);

        for &x in &[-1.0, 1.0] {
            let p = critical_point(x);
            assert_eq!(p.branch, Branch::Fold);
            assert_eq!(p.fast_stability, FastStability::Degenerate);
            assert!((p.y + x * 2.0 / 3.0).abs() < 1e-15);
        }

        let p = critical_point(2.0);
        assert_eq!(p.branch, Branch::Right);
        assert_eq!(p.fast_stability, FastStability::Attracting);
        assert!((p.y - 2.0 / 3.0).abs() < 1e-15);

        // branch stability is even in x
        for &x in &[0.3, 0.9, 1.5, 3.0] {
            assert_eq!(
                critical_point(x).fast_stability,
                critical_point(-x).fast_stability
            );
        }
    }

    #[test]
    fn fold_records() {
        // both folds singular and regular at (a, b) = (0, 3/2)
        let recs = fold_analysis(&Params::new(0.0, 1.5, 10.0).unwrap());
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.is_singular_fold && r.is_regular_singular));

        // only the right fold is singular at (a, b) = (1, 0)
        let recs = fold_analysis(&Params::new(1.0, 0.0, 10.0).unwrap());
        let right = recs.iter().find(|r| r.location.x > 0.0).unwrap();
        let left = recs.iter().find(|r| r.location.x < 0.0).unwrap();
        assert!(right.is_singular_fold);
        assert!(left.is_regular_fold && !left.is_singular_fold);

        // generic parameters leave both folds regular
        let recs = fold_analysis(&Params::new(0.3, 0.2, 10.0).unwrap());
        assert!(recs.iter().all(|r| r.is_regular_fold));
    }

    #[test]
    fn canard_coefficients_match_source_instances() {
        let a = canard_coefficients(&NormalFormFactors::case_a());
        assert_eq!(a.a, ratio(-1, 2));
        assert_eq!(a.b, ratio(-3, 4));
        assert_eq!(a.lambda_c_coeff, ratio(5, 4));

        let b = canard_coefficients(&NormalFormFactors::case_b());
        assert_eq!(b.a_raw, ratio(1, 1));
        assert_eq!(b.a, ratio(1, 8));
        assert_eq!(b.b, ratio(0, 1));
        assert_eq!(b.lambda_c_coeff, ratio(-1, 8));

        // all factors one, l3 = 0, derivatives zero
        let flat = NormalFormFactors {
            l: std::array::from_fn(|i| if i == 2 { ratio(0, 1) } else { ratio(1, 1) }),
            dl_dx: std::array::from_fn(|_| ratio(0, 1)),
        };
        let d = canard_coefficients(&flat);
        assert_eq!(d.a, ratio(1, 4));
        assert_eq!(d.b, ratio(1, 2));
    }

    #[test]
    fn canard_curve_values() {
        assert!((canard_curve(CanardCase::A, 0.01).unwrap() - 1.5125).abs() < 1e-12);
        assert!((canard_curve(CanardCase::A, 1e-9).unwrap() - 1.5).abs() < 1e-8);
        assert!((canard_curve(CanardCase::B, 0.04).unwrap() + 0.005).abs() < 1e-12);
        assert!(canard_curve(CanardCase::A, 0.3).is_err());
    }

    #[test]
    fn separation_values() {
        assert!((hopf_canard_separation(0.01).unwrap() - 0.005).abs() < 1e-15);
        assert_eq!(hopf_canard_separation(0.0).unwrap(), 0.0);
        // -(A) with A = -1/2 gives the eps/2 coefficient
        let data = canard_coefficients(&NormalFormFactors::case_a());
        assert_eq!(
            data.lambda_c_coeff.clone() - data.lambda_h_coeff.clone(),
            -data.a
        );
    }
}
