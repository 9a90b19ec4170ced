//! Finite equilibria and their linear classification.
//!
//! Case A (`a = 0`) and Case B (`b = 0`) use the closed forms; everything
//! else reduces to the cubic `H(x) = -(c/3) x^3 + c(1 - 1/b) x + ac/b`,
//! solved through companion-matrix eigenvalues for uniform accuracy near the
//! discriminant-zero boundary.

use nalgebra::{Complex, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fhn::{Params, State};

/// Absolute tolerance below which a classification quantity is treated as zero.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Hyperbolicity classes for a planar equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqClass {
    Saddle,
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    NonHyperbolicPureImaginary,
    NonHyperbolicDoubleZero,
    SemiHyperbolic,
}

/// Conventional name of an equilibrium within the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    E1,
    E2,
    E3,
    #[serde(rename = "generic")]
    Generic,
}

/// An equilibrium with its eigenvalue data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: State,
    /// Eigenvalues as `(re, im)` pairs, ordered by real then imaginary part.
    pub eigenvalues: [(f64, f64); 2],
    pub trace: f64,
    pub determinant: f64,
    pub classification: EqClass,
    pub label: Label,
}

/// The reduced cubic for the general case, its discriminant and real roots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicData {
    /// Coefficients `(x^3, x^1, x^0)` of `H`; the `x^2` term is absent.
    pub coefficients: (f64, f64, f64),
    pub discriminant: f64,
    pub real_roots: Vec<f64>,
}

/// Eigenvalues of a real 2x2 matrix as `(re, im)` pairs, sorted.
pub fn eig2(m: [[f64; 2]; 2]) -> [(f64, f64); 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    let mut eig = if disc >= 0.0 {
        let s = disc.sqrt();
        [((tr - s) / 2.0, 0.0), ((tr + s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt() / 2.0;
        [(tr / 2.0, -s), (tr / 2.0, s)]
    };
    eig.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    eig
}

fn classify_from_matrix(m: [[f64; 2]; 2]) -> (EqClass, [(f64, f64); 2], f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    let eig = eig2(m);
    let class = if det.abs() < CLASSIFY_TOL {
        if tr.abs() < CLASSIFY_TOL {
            EqClass::NonHyperbolicDoubleZero
        } else {
            EqClass::SemiHyperbolic
        }
    } else if det < 0.0 {
        EqClass::Saddle
    } else if tr.abs() < CLASSIFY_TOL {
        EqClass::NonHyperbolicPureImaginary
    } else if disc < -CLASSIFY_TOL {
        if tr < 0.0 {
            EqClass::StableFocus
        } else {
            EqClass::UnstableFocus
        }
    } else if tr < 0.0 {
        EqClass::StableNode
    } else {
        EqClass::UnstableNode
    };
    (class, eig, tr, det)
}

/// Classify a point that is already known to be an equilibrium.
pub fn classify_equilibrium(params: &Params, loc: State) -> Result<Equilibrium> {
    classify_with_label(params, loc, Label::Generic)
}

fn classify_with_label(params: &Params, loc: State, label: Label) -> Result<Equilibrium> {
    let (vx, vy) = params.velocity(loc);
    let residual = vx.hypot(vy);
    if residual > 1e-9 * (1.0 + loc.norm().powi(3)) {
        return Err(Error::NotAnEquilibrium(residual));
    }
    let (classification, eigenvalues, trace, determinant) =
        classify_from_matrix(params.jacobian(loc));
    Ok(Equilibrium {
        location: loc,
        eigenvalues,
        trace,
        determinant,
        classification,
        label,
    })
}

/// The cubic `H` whose roots are the equilibrium x-coordinates for `b != 0`.
pub fn equilibrium_cubic(params: &Params) -> CubicData {
    let (a, b, c) = (params.a(), params.b(), params.c());
    let c3 = -c / 3.0;
    let c1 = c * (1.0 - 1.0 / b);
    let c0 = a * c / b;
    let discriminant = 4.0 / 3.0 * c.powi(4) * (1.0 - 1.0 / b).powi(3) - 3.0 * c.powi(4) * a * a / (b * b);
    let real_roots = cubic_real_roots(c3, 0.0, c1, c0);
    CubicData {
        coefficients: (c3, c1, c0),
        discriminant,
        real_roots,
    }
}

/// Real roots of `k3 x^3 + k2 x^2 + k1 x + k0` via companion-matrix
/// eigenvalues, polished by Newton and deduplicated.
pub fn cubic_real_roots(k3: f64, k2: f64, k1: f64, k0: f64) -> Vec<f64> {
    assert!(k3 != 0.0, "leading coefficient must be nonzero");
    let (p2, p1, p0) = (k2 / k3, k1 / k3, k0 / k3);
    let companion = Matrix3::new(0.0, 0.0, -p0, 1.0, 0.0, -p1, 0.0, 1.0, -p2);
    let eig = companion.complex_eigenvalues();
    let h = |x: f64| ((k3 * x + k2) * x + k1) * x + k0;
    let dh = |x: f64| (3.0 * k3 * x + 2.0 * k2) * x + k1;
    let mut roots: Vec<f64> = Vec::new();
    for lambda in eig.iter() {
        let Complex { re, im } = *lambda;
        if im.abs() > 1e-8 * (1.0 + re.abs()) {
            continue;
        }
        let mut x = re;
        for _ in 0..3 {
            let d = dh(x);
            if d.abs() > 1e-300 {
                let step = h(x) / d;
                if step.is_finite() {
                    x -= step;
                }
            }
        }
        if !roots.iter().any(|r| (r - x).abs() < 1e-8 * (1.0 + x.abs())) {
            roots.push(x);
        }
    }
    roots.sort_by(|u, v| u.partial_cmp(v).unwrap());
    roots
}

/// All real equilibria, sorted by x-coordinate.
pub fn find_equilibria(params: &Params) -> Result<Vec<Equilibrium>> {
    let (a, b, _c) = (params.a(), params.b(), params.c());
    let mut out = Vec::new();
    if a == 0.0 {
        // origin always; the symmetric pair exists iff b < 0 or b >= 1,
        // coalescing into the origin at b = 1
        out.push(classify_with_label(params, State::new(0.0, 0.0), Label::E1)?);
        if !(0.0..=1.0).contains(&b) {
            let x = (3.0 * (b - 1.0) / b).sqrt();
            out.push(classify_with_label(
                params,
                State::new(-x, x / b),
                Label::E2,
            )?);
            out.push(classify_with_label(
                params,
                State::new(x, -x / b),
                Label::E3,
            )?);
        }
    } else if b == 0.0 {
        out.push(classify_with_label(
            params,
            State::new(a, -a + a * a * a / 3.0),
            Label::E1,
        )?);
    } else {
        let cubic = equilibrium_cubic(params);
        let (k3, k1, k0) = cubic.coefficients;
        for &r in &cubic.real_roots {
            let residual = ((k3 * r) * r + k1) * r + k0;
            if residual.abs() > 1e-10 * (1.0 + r.abs().powi(3)) {
                return Err(Error::RootFindingFailure {
                    x: r,
                    residual: residual.abs(),
                });
            }
            let label = if cubic.real_roots.len() == 1 {
                Label::E1
            } else {
                Label::Generic
            };
            out.push(classify_with_label(
                params,
                State::new(r, (a - r) / b),
                label,
            )?);
        }
    }
    out.sort_by(|u, v| u.location.x.partial_cmp(&v.location.x).unwrap());
    Ok(out)
}

/// Closed-form eigenvalues for Case A equilibria (`a = 0`).
pub fn closed_form_eigenvalues(params: &Params, which: Label) -> Result<[(f64, f64); 2]> {
    if params.a() != 0.0 {
        return Err(Error::DomainError(
            "closed forms require a = 0 (Case A)".into(),
        ));
    }
    let (b, c) = (params.b(), params.c());
    let (num, radicand, denom) = match which {
        Label::E1 => (
            c * c - b,
            (c * c + b).powi(2) - 4.0 * c * c,
            2.0 * c,
        ),
        Label::E2 | Label::E3 => {
            if (0.0..1.0).contains(&b) {
                return Err(Error::DomainError(format!(
                    "E2/E3 do not exist for b = {b} in [0, 1)"
                )));
            }
            let (b2, b3, b4) = (b * b, b * b * b, b * b * b * b);
            let (c2, c4) = (c * c, c * c * c * c);
            (
                3.0 * c2 - b2 - 2.0 * c2 * b,
                4.0 * c4 * b2 - 12.0 * c4 * b - 4.0 * c2 * b3 + 9.0 * c4 + 2.0 * c2 * b2 + b4,
                2.0 * c * b,
            )
        }
        Label::Generic => {
            return Err(Error::DomainError(
                "no closed form for a generic equilibrium".into(),
            ))
        }
    };
    let mut eig = if radicand >= 0.0 {
        let s = radicand.sqrt();
        [((num - s) / denom, 0.0), ((num + s) / denom, 0.0)]
    } else {
        let s = (-radicand).sqrt() / denom.abs();
        [(num / denom, -s), (num / denom, s)]
    };
    eig.sort_by(|u, v| (u.0, u.1).partial_cmp(&(v.0, v.1)).unwrap());
    Ok(eig)
}

fn lerp_params(p0: &Params, p1: &Params, t: f64) -> Params {
    Params::new(
        p0.a() + t * (p1.a() - p0.a()),
        p0.b() + t * (p1.b() - p0.b()),
        p0.c() + t * (p1.c() - p0.c()),
    )
    .expect("interpolated parameters stay valid")
}

fn eigen_discriminant(params: &Params, which: Label) -> Option<(f64, f64, f64)> {
    let eqs = find_equilibria(params).ok()?;
    let eq = eqs.into_iter().find(|e| e.label == which)?;
    let disc = eq.trace * eq.trace - 4.0 * eq.determinant;
    Some((disc, eq.trace, eq.determinant))
}

/// Parameters along a one-parameter path where the tracked equilibrium's
/// eigenvalues switch between real and complex conjugate while the real-part
/// sign stays fixed. Located by bisection to `1e-10`.
pub fn belyakov_crossing(path: &[Params], which: Label) -> Vec<Params> {
    let mut crossings = Vec::new();
    for window in path.windows(2) {
        let (p0, p1) = (&window[0], &window[1]);
        let (Some((d0, t0, _)), Some((d1, t1, _))) = (
            eigen_discriminant(p0, which),
            eigen_discriminant(p1, which),
        ) else {
            continue;
        };
        if d0 == 0.0 || d0.signum() == d1.signum() {
            continue;
        }
        // Belyakov: the real-part sign must not change through the transition
        // (det > 0 on the complex side is automatic when the discriminant flips)
        if t0.signum() != t1.signum() {
            continue;
        }
        let (mut lo, mut hi, mut dlo) = (0.0_f64, 1.0_f64, d0);
        let span = (p1.a() - p0.a())
            .abs()
            .max((p1.b() - p0.b()).abs())
            .max((p1.c() - p0.c()).abs());
        while (hi - lo) * span > 1e-10 {
            let mid = 0.5 * (lo + hi);
            let Some((dm, _, _)) = eigen_discriminant(&lerp_params(p0, p1, mid), which) else {
                break;
            };
            if dm.signum() == dlo.signum() {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        crossings.push(lerp_params(p0, p1, 0.5 * (lo + hi)));
    }
    crossings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, c: f64) -> Params {
        Params::new(a, b, c).unwrap()
    }

    /// Cardano/trigonometric oracle for depressed-ish cubics (k2 = 0 here).
    fn cardano_roots(k3: f64, k1: f64, k0: f64) -> Vec<f64> {
        let p = k1 / k3;
        let q = k0 / k3;
        let half_q = q / 2.0;
        let third_p = p / 3.0;
        let disc = half_q * half_q + third_p * third_p * third_p;
        let mut roots = if disc > 0.0 {
            let s = disc.sqrt();
            let u = (-half_q + s).cbrt();
            let v = (-half_q - s).cbrt();
            vec![u + v]
        } else {
            let r = (-third_p).sqrt();
            let phi = (-half_q / (r * r * r)).clamp(-1.0, 1.0).acos();
            (0..3)
                .map(|k| 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
                .collect()
        };
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }

    #[test]
    fn companion_roots_match_cardano_oracle() {
        let cases = [
            (-1.0 / 3.0, 0.5, 0.25),
            (-2.0 / 3.0, 2.0 * (1.0 - 1.0 / 4.0), 0.3),
            (1.0, -1.0, 0.1),
            (0.5, -2.0, 0.0),
        ];
        for &(k3, k1, k0) in &cases {
            let mine = cubic_real_roots(k3, 0.0, k1, k0);
            let oracle = cardano_roots(k3, k1, k0);
            assert_eq!(mine.len(), oracle.len(), "case {k3} {k1} {k0}");
            for (m, o) in mine.iter().zip(oracle.iter()) {
                assert!((m - o).abs() < 1e-9, "{m} vs {o}");
            }
        }
    }

    #[test]
    fn case_a_dispatch() {
        // three equilibria at (0, 3/2, 1)
        let eqs = find_equilibria(&params(0.0, 1.5, 1.0)).unwrap();
        assert_eq!(eqs.len(), 3);
        assert!((eqs[0].location.x + 1.0).abs() < 1e-14);
        assert!((eqs[0].location.y - 2.0 / 3.0).abs() < 1e-14);
        assert!((eqs[2].location.x - 1.0).abs() < 1e-14);
        assert!((eqs[2].location.y + 2.0 / 3.0).abs() < 1e-14);

        // single equilibrium for b in (0, 1)
        let eqs = find_equilibria(&params(0.0, 0.5, 1.0)).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].location, State::new(0.0, 0.0));

        // E3 = (3/2, -3/8) at b = 4
        let eqs = find_equilibria(&params(0.0, 4.0, 1.0)).unwrap();
        let e3 = eqs.iter().find(|e| e.label == Label::E3).unwrap();
        assert!((e3.location.x - 1.5).abs() < 1e-13);
        assert!((e3.location.y + 3.0 / 8.0).abs() < 1e-13);

        // coalesced pitchfork point reports a single double-zero E1
        let eqs = find_equilibria(&params(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].classification, EqClass::NonHyperbolicDoubleZero);
    }

    #[test]
    fn case_b_and_case_c_dispatch() {
        let eqs = find_equilibria(&params(1.0, 0.0, 2.0)).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!((eqs[0].location.x - 1.0).abs() < 1e-14);
        assert!((eqs[0].location.y + 2.0 / 3.0).abs() < 1e-14);

        // Case C: exactly one root, negative discriminant
        let p = params(0.5, 0.5, 1.3);
        let cubic = equilibrium_cubic(&p);
        assert!(cubic.discriminant < 0.0);
        let eqs = find_equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].label, Label::E1);
    }

    #[test]
    fn determinant_identities_case_a() {
        for &b in &[-2.0, -0.5, 1.2, 2.5, 4.0] {
            for &c in &[0.4, 1.0, 2.0] {
                let p = params(0.0, b, c);
                let eqs = find_equilibria(&p).unwrap();
                for eq in &eqs {
                    let expected = match eq.label {
                        Label::E1 => 1.0 - b,
                        Label::E2 | Label::E3 => 2.0 * (b - 1.0),
                        Label::Generic => continue,
                    };
                    assert!(
                        (eq.determinant - expected).abs() < 1e-12 * (1.0 + expected.abs())
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        // pure-imaginary pair on the Hopf parabola b = c^2, |c| < 1
        let eig = closed_form_eigenvalues(&params(0.0, 0.25, 0.5), Label::E1).unwrap();
        assert!(eig[0].0.abs() < 1e-14);
        assert!((eig[1].1 - 0.75_f64.sqrt()).abs() < 1e-12);

        // double zero at the organizing center
        let eig = closed_form_eigenvalues(&params(0.0, 1.0, 1.0), Label::E1).unwrap();
        assert!(eig[0].0.abs() < 1e-14 && eig[1].0.abs() < 1e-14);
        assert!(eig[0].1.abs() < 1e-14 && eig[1].1.abs() < 1e-14);

        // against the numeric eigensolver away from curves
        let p = params(0.0, 4.0, 1.0);
        let e2 = find_equilibria(&p)
            .unwrap()
            .into_iter()
            .find(|e| e.label == Label::E2)
            .unwrap();
        let closed = closed_form_eigenvalues(&p, Label::E2).unwrap();
        for (cf, nm) in closed.iter().zip(e2.eigenvalues.iter()) {
            assert!((cf.0 - nm.0).abs() < 1e-10 && (cf.1 - nm.1).abs() < 1e-10);
        }

        assert!(closed_form_eigenvalues(&params(0.0, 0.5, 1.0), Label::E2).is_err());
    }

    #[test]
    fn classification_examples() {
        let eq = classify_equilibrium(&params(0.0, 4.0, 1.0), State::new(0.0, 0.0)).unwrap();
        assert_eq!(eq.classification, EqClass::Saddle);
        assert!((eq.determinant + 3.0).abs() < 1e-14);

        let eq = classify_equilibrium(&params(0.0, 1.0, 1.0), State::new(0.0, 0.0)).unwrap();
        assert_eq!(eq.classification, EqClass::NonHyperbolicDoubleZero);

        let p = params(0.0, 4.0, 0.5);
        let e2 = find_equilibria(&p)
            .unwrap()
            .into_iter()
            .find(|e| e.label == Label::E2)
            .unwrap();
        assert_eq!(e2.classification, EqClass::StableNode);

        assert!(matches!(
            classify_equilibrium(&params(0.0, 4.0, 1.0), State::new(0.3, 0.2)),
            Err(Error::NotAnEquilibrium(_))
        ));
    }

    #[test]
    fn kappa_symmetry_of_equilibrium_set() {
        let eqs = find_equilibria(&params(0.0, 2.5, 0.7)).unwrap();
        let e2 = eqs.iter().find(|e| e.label == Label::E2).unwrap();
        let e3 = eqs.iter().find(|e| e.label == Label::E3).unwrap();
        assert_eq!(e2.location.x, -e3.location.x);
        assert_eq!(e2.location.y, -e3.location.y);
    }

    #[test]
    fn belyakov_crossings() {
        // Case A, E1, path in b at c = 0.8 crosses b = -c^2 + 2c = 0.96
        let c = 0.8;
        let path: Vec<Params> = (0..=20)
            .map(|i| params(0.0, 0.5 + i as f64 * 0.05, c))
            .collect();
        let hits = belyakov_crossing(&path, Label::E1);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].b() - (-c * c + 2.0 * c)).abs() < 1e-8);

        // Case B, E1, path in c at a = sqrt(3) crosses c = 2/(a^2 - 1) = 1
        let a = 3.0_f64.sqrt();
        let path: Vec<Params> = (0..=25)
            .map(|i| params(a, 0.0, 0.5 + i as f64 * 0.1))
            .collect();
        let hits = belyakov_crossing(&path, Label::E1);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].c() - 1.0).abs() < 1e-8);

        // a path inside the complex region has no crossing
        let path: Vec<Params> = (0..=10)
            .map(|i| params(0.0, 2.0 + i as f64 * 0.1, 0.8))
            .collect();
        assert!(belyakov_crossing(&path, Label::E1).is_empty());
    }
}
