//! Bifurcation and transition curves of the family, first Lyapunov
//! coefficients, local reductions and the parameter-plane region classifier.
//!
//! Case A (`a = 0`) curves are functions of `c` returning a `b` value; the
//! Case B (`b = 0`) Belyakov hyperbola is parameterised by `a` and returns a
//! `c` value; the Case C Hopf condition depends on `(a, b)` and lives in
//! [`hopf_condition_case_c`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, LimitCycle};
use crate::equilibria::{find_equilibria, EqClass, Equilibrium};
use crate::error::{Error, Result};
use crate::fhn::{Params, State};
use crate::poly::Poly2;

/// Identifier for every analytic curve the atlas evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveId {
    /// Pitchfork line `b = 1` (Case A).
    Tp,
    /// Belyakov parabola of `E1`, `b = -c^2 + 2c` (Case A, "+" branch).
    Tf1,
    /// Hopf parabola of `E1`, `b = c^2`, valid for `|c| < 1` (Case A).
    Th1,
    /// Lower Belyakov branch of `E2`/`E3` (Case A).
    Tf23Minus,
    /// Upper Belyakov branch of `E2`/`E3` (Case A).
    Tf23Plus,
    /// Hopf curve of `E2`/`E3`, `b = c(-c + sqrt(c^2 + 3))`, `b > 1` (Case A).
    Th23,
    /// Approximate double-homoclinic curve: positive root of
    /// `7b^2 + 10bc^2 - 17c^2 = 0` (Case A).
    Dh,
    /// Saddle-node-of-cycles curve `b = c^2 + c sqrt(c^2 - 1)`, `|c| >= 1`.
    SnlPlus,
    /// Saddle-node-of-cycles curve `b = c^2 - c sqrt(c^2 - 1)`, `|c| >= 1`.
    SnlMinus,
    /// Case B Belyakov hyperbola `c = 2/(a^2 - 1)`, parameterised by `a`.
    Tfb0,
    /// Case B Hopf line `a = -1`.
    Thb0Minus,
    /// Case B Hopf line `a = +1`.
    Thb0Plus,
    /// Case C Hopf condition; see [`hopf_condition_case_c`].
    ThCaseC,
}

impl CurveId {
    pub const ALL: [CurveId; 13] = [
        CurveId::Tp,
        CurveId::Tf1,
        CurveId::Th1,
        CurveId::Tf23Minus,
        CurveId::Tf23Plus,
        CurveId::Th23,
        CurveId::Dh,
        CurveId::SnlPlus,
        CurveId::SnlMinus,
        CurveId::Tfb0,
        CurveId::Thb0Minus,
        CurveId::Thb0Plus,
        CurveId::ThCaseC,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CurveId::Tp => "TP",
            CurveId::Tf1 => "TF1",
            CurveId::Th1 => "TH1",
            CurveId::Tf23Minus => "TF23_minus",
            CurveId::Tf23Plus => "TF23_plus",
            CurveId::Th23 => "TH23",
            CurveId::Dh => "DH",
            CurveId::SnlPlus => "SNL_plus",
            CurveId::SnlMinus => "SNL_minus",
            CurveId::Tfb0 => "TFb0",
            CurveId::Thb0Minus => "THb0_minus",
            CurveId::Thb0Plus => "THb0_plus",
            CurveId::ThCaseC => "TH_caseC",
        }
    }
}

/// One evaluated curve point.
///
/// `param` is `c` for the Case A curves and the Case B Hopf lines, and `a`
/// for [`CurveId::Tfb0`]; `value` is the `b` coordinate (Case A) or the `a`
/// (Hopf lines) / `c` (Belyakov hyperbola) coordinate for Case B.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvePoint {
    pub curve: CurveId,
    pub param: f64,
    pub value: f64,
    pub valid: bool,
}

impl CurvePoint {
    /// The value, or `DomainError` when the point lies outside the curve's domain.
    pub fn require_valid(&self) -> Result<f64> {
        if self.valid {
            Ok(self.value)
        } else {
            Err(Error::DomainError(format!(
                "{} is not defined at parameter {}",
                self.curve.name(),
                self.param
            )))
        }
    }
}

/// Real roots in `b` of the two quadratic factors of the `E2`/`E3` Belyakov
/// locus, `(b^2 + 2cb - 2c^2 b + 3c^2)(b^2 - 2cb - 2c^2 b + 3c^2) = 0`.
fn tf23_roots(c: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    for sign in [1.0, -1.0] {
        // b^2 + (2 sign c - 2c^2) b + 3c^2
        let p = 2.0 * sign * c - 2.0 * c * c;
        let q = 3.0 * c * c;
        let disc = p * p - 4.0 * q;
        if disc >= 0.0 {
            let s = disc.sqrt();
            roots.push((-p - s) / 2.0);
            roots.push((-p + s) / 2.0);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Evaluate a bifurcation/transition curve at a parameter value.
pub fn eval_curve(id: CurveId, t: f64) -> CurvePoint {
    let point = |value: f64, valid: bool| CurvePoint {
        curve: id,
        param: t,
        value,
        valid,
    };
    match id {
        CurveId::Tp => point(1.0, t != 0.0),
        CurveId::Tf1 => point(-t * t + 2.0 * t, t != 0.0),
        CurveId::Th1 => point(t * t, t != 0.0 && t.abs() < 1.0),
        CurveId::Tf23Minus => {
            let admissible: Vec<f64> =
                tf23_roots(t).into_iter().filter(|&b| b > 1.0).collect();
            match admissible.first() {
                Some(&b) => point(b, true),
                None => point(f64::NAN, false),
            }
        }
        CurveId::Tf23Plus => {
            let admissible: Vec<f64> =
                tf23_roots(t).into_iter().filter(|&b| b > 1.0).collect();
            match admissible.last() {
                Some(&b) => point(b, true),
                None => point(f64::NAN, false),
            }
        }
        CurveId::Th23 => {
            let b = t * (-t + (t * t + 3.0).sqrt());
            point(b, b > 1.0)
        }
        CurveId::Dh => {
            let b = (-5.0 * t * t + (25.0 * t.powi(4) + 119.0 * t * t).sqrt()) / 7.0;
            point(b, t.abs() > 1.0)
        }
        CurveId::SnlPlus => {
            let r = t * t - 1.0;
            point(t * t + t.abs() * r.max(0.0).sqrt(), r >= 0.0)
        }
        CurveId::SnlMinus => {
            let r = t * t - 1.0;
            point(t * t - t.abs() * r.max(0.0).sqrt(), r >= 0.0)
        }
        CurveId::Tfb0 => {
            let denom = t * t - 1.0;
            if denom == 0.0 {
                point(f64::NAN, false)
            } else {
                point(2.0 / denom, true)
            }
        }
        CurveId::Thb0Minus => point(-1.0, true),
        CurveId::Thb0Plus => point(1.0, true),
        CurveId::ThCaseC => point(f64::NAN, false),
    }
}

/// Diagnostic companion of [`CurveId::Dh`]: the positive root in `b` of the
/// square-root factor `-7b^2 + 5bc^2 + 2c^2` of the homoclinic expression.
/// Only the rational factor's zero (the `Dh` curve) is consistent with the
/// large-`c` limit 17/10; this locus is exposed for inspection only.
pub fn dh_sqrt_factor_locus(c: f64) -> f64 {
    (5.0 * c * c + (25.0 * c.powi(4) + 56.0 * c * c).sqrt()) / 14.0
}

/// The five Case A curve values at a given `c`, in the order
/// `TF23- <= TH23 <= DH <= SNL+ <= TF23+`, with the ordering verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveOrdering {
    pub c: f64,
    pub points: Vec<CurvePoint>,
    pub sorted_values: Vec<f64>,
    pub ordering_holds: bool,
}

pub fn curve_ordering_check(c: f64) -> CurveOrdering {
    let ids = [
        CurveId::Tf23Minus,
        CurveId::Th23,
        CurveId::Dh,
        CurveId::SnlPlus,
        CurveId::Tf23Plus,
    ];
    let points: Vec<CurvePoint> = ids.iter().map(|&id| eval_curve(id, c)).collect();
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ordering_holds = points.iter().all(|p| p.valid)
        && values.windows(2).all(|w| w[0] <= w[1] + 1e-12);
    CurveOrdering {
        c,
        points,
        sorted_values: sorted,
        ordering_holds,
    }
}

/// First-Lyapunov data at a Hopf point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Imaginary part of the critical eigenvalue pair.
    pub omega: f64,
    pub r1: f64,
    pub r2: f64,
    /// First Lyapunov coefficient `l = (R1 + omega R2) / (16 omega)`.
    pub l: f64,
    /// `d Re(lambda) / d mu` along the natural unfolding parameter
    /// (`b` in general, `a` when `b = 0`).
    pub transversality: f64,
}

/// Compute the first Lyapunov coefficient at an equilibrium carrying a
/// pure-imaginary eigenvalue pair.
///
/// The system is shifted to the equilibrium and brought to the real Jordan
/// form `u' = -omega v + ..., v' = omega u + ...` by the linear map with
/// columns `p = (1/2, 0)` and `q = A p / omega`; `R1`/`R2` are the standard
/// second/third-derivative combinations in those coordinates.
pub fn first_lyapunov(params: &Params, eq: &Equilibrium) -> Result<LyapunovResult> {
    let a = params.jacobian(eq.location);
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if tr.abs() > 1e-7 || det <= 0.0 {
        return Err(Error::NotOnHopfCurve(eq.eigenvalues));
    }
    let omega = det.sqrt();

    // basis: p = (1/2, 0), q = A p / omega gives A [p q] = [p q] [[0, -w], [w, 0]]
    let p = [0.5, 0.0];
    let q = [a[0][0] * 0.5 / omega, a[1][0] * 0.5 / omega];
    let s = [[p[0], q[0]], [p[1], q[1]]];
    let det_s = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let s_inv = [
        [s[1][1] / det_s, -s[0][1] / det_s],
        [-s[1][0] / det_s, s[0][0] / det_s],
    ];

    // shift the cubic field to the equilibrium and change coordinates
    let field = params.to_polynomial();
    let x_shift = Poly2::from_terms([((1, 0), 1.0), ((0, 0), eq.location.x)]);
    let y_shift = Poly2::from_terms([((0, 1), 1.0), ((0, 0), eq.location.y)]);
    let shifted_p = field.p.substitute(&x_shift, &y_shift);
    let shifted_q = field.q.substitute(&x_shift, &y_shift);
    let u_map = Poly2::from_terms([((1, 0), s[0][0]), ((0, 1), s[0][1])]);
    let v_map = Poly2::from_terms([((1, 0), s[1][0]), ((0, 1), s[1][1])]);
    let comp_p = shifted_p.substitute(&u_map, &v_map);
    let comp_q = shifted_q.substitute(&u_map, &v_map);
    let f1 = comp_p.scale(&s_inv[0][0]).add(&comp_q.scale(&s_inv[0][1]));
    let f2 = comp_p.scale(&s_inv[1][0]).add(&comp_q.scale(&s_inv[1][1]));

    let f1_uu = 2.0 * f1.coeff(2, 0);
    let f1_uv = f1.coeff(1, 1);
    let f1_vv = 2.0 * f1.coeff(0, 2);
    let f2_uu = 2.0 * f2.coeff(2, 0);
    let f2_uv = f2.coeff(1, 1);
    let f2_vv = 2.0 * f2.coeff(0, 2);
    let f1_uuu = 6.0 * f1.coeff(3, 0);
    let f1_uvv = 2.0 * f1.coeff(1, 2);
    let f2_uuv = 2.0 * f2.coeff(2, 1);
    let f2_vvv = 6.0 * f2.coeff(0, 3);

    let r1 = f1_uv * (f1_uu + f1_vv) - f2_uv * (f2_uu + f2_vv) - f1_uu * f2_uu
        + f1_vv * f2_vv;
    let r2 = f1_uuu + f1_uvv + f2_uuv + f2_vvv;
    let l = (r1 + omega * r2) / (16.0 * omega);

    Ok(LyapunovResult {
        omega,
        r1,
        r2,
        l,
        transversality: transversality(params, eq.location),
    })
}

/// `d Re(lambda) / d mu` at an equilibrium, following the equilibrium branch
/// as the unfolding parameter moves (`b` in general, `a` when `b = 0`).
pub fn transversality(params: &Params, loc: State) -> f64 {
    let h = 1e-5;
    let re_at = |p: &Params| -> f64 {
        let eqs = find_equilibria(p).expect("perturbed parameters stay valid");
        let eq = eqs
            .into_iter()
            .min_by(|u, v| {
                u.location
                    .dist(loc)
                    .partial_cmp(&v.location.dist(loc))
                    .unwrap()
            })
            .expect("equilibrium persists under small perturbation");
        eq.trace / 2.0
    };
    let (plus, minus) = if params.b() == 0.0 {
        (
            Params::new(params.a() + h, 0.0, params.c()).unwrap(),
            Params::new(params.a() - h, 0.0, params.c()).unwrap(),
        )
    } else {
        (
            Params::new(params.a(), params.b() + h, params.c()).unwrap(),
            Params::new(params.a(), params.b() - h, params.c()).unwrap(),
        )
    };
    (re_at(&plus) - re_at(&minus)) / (2.0 * h)
}

/// Center-manifold pitchfork coefficients at `b = 1 + mu` for Case A:
/// the reduced dynamics are `x' = lin * x + cub * x^3` with
/// `lin = -c mu / (c^2 - 1)` and `cub = c / (3 (c^2 - 1)^3)`.
pub fn pitchfork_reduction(params: &Params) -> Result<(f64, f64)> {
    if params.a() != 0.0 {
        return Err(Error::DomainError("pitchfork reduction requires a = 0".into()));
    }
    let c = params.c();
    let denom = c * c - 1.0;
    if denom.abs() < 1e-6 {
        return Err(Error::DegenerateCenterManifold(denom.abs()));
    }
    let mu = params.b() - 1.0;
    Ok((-c * mu / denom, c / (3.0 * denom.powi(3))))
}

/// Case C Hopf condition `c^2 = b / (1 - x*^2)` for the unique equilibrium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseCHopf {
    pub x_star: f64,
    /// Positive critical `c`; the condition holds at both signs. `None` when
    /// `x*^2 >= 1` leaves no real critical value.
    pub c_critical: Option<f64>,
    /// Whether the given `c` sits on the critical locus.
    pub on_curve: bool,
}

pub fn hopf_condition_case_c(params: &Params) -> Result<CaseCHopf> {
    if !(params.a() > 0.0 && params.b() > 0.0 && params.b() < 1.0) {
        return Err(Error::DomainError(
            "Case C requires a > 0 and 0 < b < 1".into(),
        ));
    }
    let eqs = find_equilibria(params)?;
    let x_star = eqs[0].location.x;
    if (x_star.abs() - 1.0).abs() < 1e-12 {
        return Err(Error::DomainError("x* = +-1 contradicts 0 < b < 1".into()));
    }
    let denom = 1.0 - x_star * x_star;
    let c_critical = (denom > 0.0).then(|| (params.b() / denom).sqrt());
    let on_curve = (params.c() * params.c() * denom - params.b()).abs() < 1e-9;
    Ok(CaseCHopf {
        x_star,
        c_critical,
        on_curve,
    })
}

/// Bendixson criterion: the divergence is sign-definite when `b > c^2`, so
/// no periodic orbit exists there.
pub fn bendixson_excludes_cycles(params: &Params) -> bool {
    params.b() > params.c() * params.c()
}

/// Invariant signature of a parameter-plane region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSignature {
    pub equilibrium_count: usize,
    /// Classification multiset, sorted for deterministic comparison.
    pub classes: Vec<EqClass>,
    /// Distinct cycles found by the probe (a lower bound), when requested.
    pub limit_cycle_count: Option<usize>,
    pub kappa_symmetric: bool,
}

/// Number of initial conditions on the probe ring.
const PROBE_RING: usize = 12;
/// Probe ring radius.
const PROBE_RADIUS: f64 = 3.0;

/// Classify a parameter point by its equilibria and, optionally, a bounded
/// limit-cycle probe from a ring of initial conditions. The ring is
/// kappa-symmetric, so for `a = 0` the probe outcome is invariant under
/// conjugation of the initial conditions by the symmetry.
pub fn classify_region(params: &Params, probe_cycles: bool) -> Result<RegionSignature> {
    let eqs = find_equilibria(params)?;
    let mut classes: Vec<EqClass> = eqs.iter().map(|e| e.classification).collect();
    classes.sort();
    let limit_cycle_count = if probe_cycles {
        Some(probe_distinct_cycles(params)?.len())
    } else {
        None
    };
    Ok(RegionSignature {
        equilibrium_count: eqs.len(),
        classes,
        limit_cycle_count,
        kappa_symmetric: params.a() == 0.0,
    })
}

/// Run the cycle probe and return the distinct cycles found, ordered by
/// x-amplitude then by center.
pub fn probe_distinct_cycles(params: &Params) -> Result<Vec<LimitCycle>> {
    let seeds: Vec<State> = (0..PROBE_RING)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / PROBE_RING as f64;
            State::new(PROBE_RADIUS * theta.cos(), PROBE_RADIUS * theta.sin())
        })
        .collect();
    let found: Vec<Result<Option<LimitCycle>>> = seeds
        .par_iter()
        .map(|&s0| match dynamics::find_limit_cycle(params, s0) {
            Ok(cycle) => Ok(Some(cycle)),
            Err(Error::NoCycleFound(_)) => Ok(None),
            Err(Error::StiffnessBudgetExceeded(msg)) | Err(Error::CycleProbeTimeout(msg)) => {
                Err(Error::CycleProbeTimeout(msg))
            }
            Err(Error::StepSizeUnderflow { t, h }) => Err(Error::CycleProbeTimeout(format!(
                "step underflow at t = {t} (h = {h:e})"
            ))),
            Err(e) => Err(e),
        })
        .collect();
    let mut cycles: Vec<LimitCycle> = Vec::new();
    for item in found {
        let Some(cycle) = item? else { continue };
        let center_x = |c: &LimitCycle| {
            c.points.iter().map(|p| p.x).sum::<f64>() / c.points.len() as f64
        };
        let cx = center_x(&cycle);
        let duplicate = cycles.iter().any(|known| {
            (known.x_amplitude - cycle.x_amplitude).abs() < 1e-3 * (1.0 + cycle.x_amplitude)
                && (center_x(known) - cx).abs() < 1e-3 * (1.0 + cx.abs())
        });
        if !duplicate {
            cycles.push(cycle);
        }
    }
    cycles.sort_by(|u, v| {
        (u.x_amplitude, centroid_x(u))
            .partial_cmp(&(v.x_amplitude, centroid_x(v)))
            .unwrap()
    });
    Ok(cycles)
}

fn centroid_x(c: &LimitCycle) -> f64 {
    c.points.iter().map(|p| p.x).sum::<f64>() / c.points.len() as f64
}
