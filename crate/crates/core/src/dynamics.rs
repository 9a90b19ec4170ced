//! Trajectory integration and periodic-orbit machinery.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with the standard
//! quartic dense output; section crossings are located on the dense output by
//! bisection. Limit cycles are found as fixed points of a Poincare return map
//! anchored at the nearest equilibrium, Newton-iterated on the section
//! coordinate, with the Floquet multiplier read off the return-map derivative
//! and cross-checked against the divergence line integral.

use serde::{Deserialize, Serialize};

use crate::equilibria::{eig2, find_equilibria};
use crate::error::{Error, Result};
use crate::fhn::{Params, State};

// Dormand-Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error coefficients (5th minus embedded 4th order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output coefficients
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Why an integration run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalReason {
    TimeLimit,
    EscapedRadius,
    ConvergedToPoint,
    SectionCrossingsReached,
}

/// A computed trajectory segment.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    /// `(t, state)` samples with strictly increasing times.
    pub samples: Vec<(f64, State)>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub terminal_reason: TerminalReason,
    /// Section crossings recorded by the active event, in time order.
    pub crossings: Vec<(f64, State)>,
}

impl OrbitSegment {
    pub fn last_state(&self) -> State {
        self.samples.last().expect("segment is never empty").1
    }
    pub fn last_time(&self) -> f64 {
        self.samples.last().expect("segment is never empty").0
    }
}

/// Integration controls; defaults follow the artifact-wide policy.
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub escape_radius: f64,
    pub max_steps: usize,
    /// When set, samples are recorded on the fixed grid `k * dt` via dense
    /// output instead of at the adaptive step points.
    pub sample_dt: Option<f64>,
    /// Stop early once the state sits at a sink (velocity below threshold and
    /// locally contracting linearisation).
    pub detect_convergence: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            escape_radius: 1e6,
            max_steps: 10_000_000,
            sample_dt: None,
            detect_convergence: false,
        }
    }
}

/// An oriented section-crossing event.
pub struct EventSpec<'a> {
    /// Scalar whose zero set is the section.
    pub g: Box<dyn Fn(State) -> f64 + 'a>,
    /// +1: only upward crossings, -1: only downward, 0: both.
    pub direction: i8,
    /// Additional membership constraint evaluated at the crossing point.
    pub constraint: Option<Box<dyn Fn(State) -> bool + 'a>>,
    /// Stop the run after this many recorded crossings (0 = never stop).
    pub stop_after: usize,
    /// Crossings before this much elapsed time are ignored.
    pub dead_time: f64,
}

struct DenseStep {
    t: f64,
    h: f64,
    rcont: [[f64; 2]; 5],
}

impl DenseStep {
    fn eval(&self, theta: f64) -> State {
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i]
                + theta
                    * (r[1][i]
                        + (1.0 - theta)
                            * (r[2][i] + theta * (r[3][i] + (1.0 - theta) * r[4][i])));
        }
        State::new(out[0], out[1])
    }
}

fn rhs(params: &Params, s: State) -> [f64; 2] {
    let (vx, vy) = params.velocity(s);
    [vx, vy]
}

fn is_sink(params: &Params, s: State) -> bool {
    let j = params.jacobian(s);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    tr < 0.0 && det > 0.0
}

/// Adaptive forward integration of the family field over `[0, t_end]`.
pub fn integrate(
    params: &Params,
    s0: State,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<OrbitSegment> {
    integrate_with_event(params, s0, t_end, opts, None)
}

/// Same as [`integrate`] but with an optional section-crossing event.
pub fn integrate_with_event(
    params: &Params,
    s0: State,
    t_end: f64,
    opts: &IntegrateOptions,
    mut event: Option<&mut EventSpec>,
) -> Result<OrbitSegment> {
    assert!(t_end > 0.0, "t_end must be positive; reverse c for backward time");
    let mut t = 0.0;
    let mut y = [s0.x, s0.y];
    let mut k1 = rhs(params, s0);
    let mut samples = vec![(0.0, s0)];
    let mut crossings: Vec<(f64, State)> = Vec::new();
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    // integer-indexed grid avoids floating-point drift across samples
    let mut next_sample_idx: u64 = 1;

    // initial step from the velocity scale
    let scale0 = 1.0 + s0.norm();
    let v0 = k1[0].hypot(k1[1]).max(1e-12);
    let mut h = (1e-4 * scale0 / v0).min(t_end).max(1e-10);

    let mut g_prev = event.as_ref().map(|e| (e.g)(s0));

    loop {
        if t >= t_end {
            samples_dedup_tail(&mut samples, t, State::new(y[0], y[1]));
            return Ok(OrbitSegment {
                samples,
                accepted_steps: accepted,
                rejected_steps: rejected,
                terminal_reason: TerminalReason::TimeLimit,
                crossings,
            });
        }
        if accepted + rejected > opts.max_steps {
            return Err(Error::StiffnessBudgetExceeded(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        h = h.min(t_end - t);
        if h < 1e-15 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        // the six internal stages plus FSAL
        let st = |y: &[f64; 2]| State::new(y[0], y[1]);
        let y2 = [y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1]];
        let k2 = rhs(params, st(&y2));
        let y3 = [
            y[0] + h * (A31 * k1[0] + A32 * k2[0]),
            y[1] + h * (A31 * k1[1] + A32 * k2[1]),
        ];
        let k3 = rhs(params, st(&y3));
        let y4 = [
            y[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            y[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
        ];
        let k4 = rhs(params, st(&y4));
        let y5 = [
            y[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            y[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
        ];
        let k5 = rhs(params, st(&y5));
        let y6 = [
            y[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            y[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
        ];
        let k6 = rhs(params, st(&y6));
        let ynew = [
            y[0] + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
            y[1] + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
        ];
        let k7 = rhs(params, st(&ynew));

        // scaled error norm
        let mut err = 0.0;
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / 2.0).sqrt();

        if err > 1.0 {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }

        // accepted: build dense output for this step
        let ydiff = [ynew[0] - y[0], ynew[1] - y[1]];
        let mut rcont = [[0.0; 2]; 5];
        for i in 0..2 {
            let bspl = h * k1[i] - ydiff[i];
            rcont[0][i] = y[i];
            rcont[1][i] = ydiff[i];
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff[i] - h * k7[i] - bspl;
            rcont[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = DenseStep { t, h, rcont };
        let t_new = t + h;
        let s_new = State::new(ynew[0], ynew[1]);
        accepted += 1;

        // event handling on the dense output
        if let Some(ev) = event.as_deref_mut() {
            let g_new = (ev.g)(s_new);
            let g_old = g_prev.unwrap_or(g_new);
            let sign_change = g_old * g_new < 0.0
                && (ev.direction == 0
                    || (ev.direction > 0 && g_new > g_old)
                    || (ev.direction < 0 && g_new < g_old));
            if sign_change && t_new > ev.dead_time {
                let mut lo = 0.0;
                let mut hi = 1.0;
                let mut glo = g_old;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let gm = (ev.g)(dense.eval(mid));
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (gm > 0.0) == (glo > 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                let theta = 0.5 * (lo + hi);
                let t_cross = t + theta * h;
                let s_cross = dense.eval(theta);
                let admissible = ev
                    .constraint
                    .as_ref()
                    .map(|c| c(s_cross))
                    .unwrap_or(true)
                    && t_cross > ev.dead_time;
                if admissible {
                    crossings.push((t_cross, s_cross));
                    if ev.stop_after > 0 && crossings.len() >= ev.stop_after {
                        record_grid_samples(&mut samples, &dense, &mut next_sample_idx, opts, t_cross);
                        samples_dedup_tail(&mut samples, t_cross, s_cross);
                        return Ok(OrbitSegment {
                            samples,
                            accepted_steps: accepted,
                            rejected_steps: rejected,
                            terminal_reason: TerminalReason::SectionCrossingsReached,
                            crossings,
                        });
                    }
                }
            }
            g_prev = Some(g_new);
        }

        record_grid_samples(&mut samples, &dense, &mut next_sample_idx, opts, t_new);
        if opts.sample_dt.is_none() {
            samples.push((t_new, s_new));
        }

        t = t_new;
        y = ynew;
        k1 = k7; // FSAL

        if s_new.norm() > opts.escape_radius {
            samples_dedup_tail(&mut samples, t, s_new);
            return Ok(OrbitSegment {
                samples,
                accepted_steps: accepted,
                rejected_steps: rejected,
                terminal_reason: TerminalReason::EscapedRadius,
                crossings,
            });
        }
        if opts.detect_convergence {
            let v = k1[0].hypot(k1[1]);
            if v < 1e-12 * (1.0 + s_new.norm()) && is_sink(params, s_new) {
                samples_dedup_tail(&mut samples, t, s_new);
                return Ok(OrbitSegment {
                    samples,
                    accepted_steps: accepted,
                    rejected_steps: rejected,
                    terminal_reason: TerminalReason::ConvergedToPoint,
                    crossings,
                });
            }
        }

        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
}

fn record_grid_samples(
    samples: &mut Vec<(f64, State)>,
    dense: &DenseStep,
    next_sample_idx: &mut u64,
    opts: &IntegrateOptions,
    t_stop: f64,
) {
    let Some(dt) = opts.sample_dt else { return };
    loop {
        let ts = *next_sample_idx as f64 * dt;
        if ts > t_stop || ts > dense.t + dense.h {
            break;
        }
        if ts >= dense.t {
            let theta = ((ts - dense.t) / dense.h).clamp(0.0, 1.0);
            samples.push((ts, dense.eval(theta)));
        }
        *next_sample_idx += 1;
    }
}

fn samples_dedup_tail(samples: &mut Vec<(f64, State)>, t: f64, s: State) {
    if samples.last().map(|&(tl, _)| t > tl).unwrap_or(true) {
        samples.push((t, s));
    }
}

/// A periodic orbit described by its return-map fixed point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCycle {
    pub period: f64,
    /// Closed polyline sampled over one period (first point repeated last).
    pub points: Vec<State>,
    /// Sample times matching `points`, starting at zero.
    pub times: Vec<f64>,
    /// Forward-time nontrivial Floquet multiplier from the return-map slope.
    pub floquet_multiplier: f64,
    /// max x minus min x over the cycle.
    pub x_amplitude: f64,
    pub stable: bool,
}

/// Orientation of a Poincare section through an anchor equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionAxis {
    /// `{y = y*, x > x*}`: the default, transversal near Hopf-born cycles.
    HorizontalRight,
    /// `{x = x*, y > y*}`: fallback when the horizontal section is nearly
    /// tangent to the cycle (relaxation cycles topping out at the anchor's
    /// y-level).
    VerticalUp,
}

#[derive(Debug, Clone, Copy)]
struct Section {
    anchor: State,
    axis: SectionAxis,
}

impl Section {
    fn g(&self, s: State) -> f64 {
        match self.axis {
            SectionAxis::HorizontalRight => s.y - self.anchor.y,
            SectionAxis::VerticalUp => s.x - self.anchor.x,
        }
    }

    fn admissible(&self, s: State) -> bool {
        match self.axis {
            SectionAxis::HorizontalRight => s.x > self.anchor.x,
            SectionAxis::VerticalUp => s.y > self.anchor.y,
        }
    }

    /// Crossing orientation of the flow on the admissible half-section.
    fn direction(&self, c: f64) -> i8 {
        // right of the anchor, y' = -(x - x*)/c < 0 for c > 0; above the
        // anchor, x' = c (y - y*) + O(dx) > 0 for c > 0
        let base = match self.axis {
            SectionAxis::HorizontalRight => -1,
            SectionAxis::VerticalUp => 1,
        };
        if c > 0.0 {
            base
        } else {
            -base
        }
    }

    /// The free coordinate on the section.
    fn coordinate(&self, s: State) -> f64 {
        match self.axis {
            SectionAxis::HorizontalRight => s.x,
            SectionAxis::VerticalUp => s.y,
        }
    }

    fn point(&self, xi: f64) -> State {
        match self.axis {
            SectionAxis::HorizontalRight => State::new(xi, self.anchor.y),
            SectionAxis::VerticalUp => State::new(self.anchor.x, xi),
        }
    }
}

fn return_crossing(
    params: &Params,
    section: &Section,
    from: f64,
    t_budget: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let sec = *section;
    let mut ev = EventSpec {
        g: Box::new(move |s: State| sec.g(s)),
        direction: section.direction(params.c()),
        constraint: Some(Box::new(move |s: State| sec.admissible(s))),
        stop_after: 1,
        dead_time: 1e-6,
    };
    let opts = IntegrateOptions {
        rel_tol: tol,
        abs_tol: tol * 1e-2,
        escape_radius: 100.0,
        ..Default::default()
    };
    let seg = integrate_with_event(params, section.point(from), t_budget, &opts, Some(&mut ev))?;
    match seg.terminal_reason {
        TerminalReason::SectionCrossingsReached => {
            let (t, s) = seg.crossings[0];
            Ok((section.coordinate(s), t))
        }
        reason => Err(Error::NoCycleFound(format!(
            "return map lost the orbit ({reason:?})"
        ))),
    }
}

/// Search for a limit cycle from `s0`: forward first, then backward in time
/// for repelling cycles. Returns the cycle in forward-time convention.
pub fn find_limit_cycle(params: &Params, s0: State) -> Result<LimitCycle> {
    match cycle_in_direction(params, s0, false) {
        Ok(cycle) => Ok(cycle),
        Err(_) => cycle_in_direction(params, s0, true),
    }
}

fn cycle_in_direction(params: &Params, s0: State, backward: bool) -> Result<LimitCycle> {
    let work = if backward {
        params.time_reversed()
    } else {
        *params
    };
    // transient: approach the attractor of the working direction; recurrent
    // dynamics of the family are confined near the cubic nullcline, so a
    // probe beyond radius 100 never returns
    let opts = IntegrateOptions {
        detect_convergence: true,
        escape_radius: 100.0,
        ..Default::default()
    };
    let seg = integrate(&work, s0, 400.0, &opts)?;
    match seg.terminal_reason {
        TerminalReason::ConvergedToPoint => {
            return Err(Error::NoCycleFound("converged to an equilibrium".into()))
        }
        TerminalReason::EscapedRadius => {
            return Err(Error::NoCycleFound("orbit escaped".into()))
        }
        _ => {}
    }
    let s1 = seg.last_state();

    // section through the nearest equilibrium
    let eqs = find_equilibria(params)?;
    let anchor = eqs
        .iter()
        .map(|e| e.location)
        .min_by(|u, v| u.dist(s1).partial_cmp(&v.dist(s1)).unwrap())
        .ok_or_else(|| Error::NoCycleFound("no equilibrium to anchor the section".into()))?;

    let mut last_err = Error::NoCycleFound("no section attempt ran".into());
    for axis in [SectionAxis::HorizontalRight, SectionAxis::VerticalUp] {
        let section = Section { anchor, axis };
        match newton_on_section(&work, &section, s1, backward) {
            Ok(cycle) => return Ok(cycle),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn newton_on_section(
    work: &Params,
    section: &Section,
    near: State,
    backward: bool,
) -> Result<LimitCycle> {
    // land on the section once
    let sec = *section;
    let mut ev = EventSpec {
        g: Box::new(move |s: State| sec.g(s)),
        direction: section.direction(work.c()),
        constraint: Some(Box::new(move |s: State| sec.admissible(s))),
        stop_after: 1,
        dead_time: 1e-6,
    };
    let land_opts = IntegrateOptions {
        escape_radius: 100.0,
        ..Default::default()
    };
    let seg = integrate_with_event(work, near, 400.0, &land_opts, Some(&mut ev))?;
    if seg.terminal_reason != TerminalReason::SectionCrossingsReached {
        return Err(Error::NoCycleFound("orbit never met the section".into()));
    }
    let mut xi = section.coordinate(seg.crossings[0].1);

    // Newton on the return map; the derivative uses the finite-difference
    // step 1e-6 scaled to the coordinate
    let mut period = 0.0;
    let mut multiplier = 1.0;
    let mut converged = false;
    for _ in 0..40 {
        let (pxi, t_ret) = return_crossing(work, section, xi, 500.0, 1e-11)?;
        let residual = pxi - xi;
        period = t_ret;
        let fd = 1e-6 * (1.0 + xi.abs());
        let (pp, _) = return_crossing(work, section, xi + fd, 500.0, 1e-11)?;
        let (pm, _) = return_crossing(work, section, xi - fd, 500.0, 1e-11)?;
        multiplier = (pp - pm) / (2.0 * fd);
        if residual.abs() < 1e-9 {
            converged = true;
            break;
        }
        let denom = multiplier - 1.0;
        if denom.abs() < 1e-12 {
            return Err(Error::NoCycleFound("degenerate return map".into()));
        }
        let step = residual / denom;
        // damp Newton when the map is strongly contracting or expanding
        xi -= step.clamp(-0.5, 0.5);
    }
    if !converged {
        return Err(Error::NoCycleFound("return map Newton did not converge".into()));
    }
    // strongly contracting maps leave the 1e-6 difference below the float
    // quantization of the crossing; widen the step so the slope resolves
    if multiplier.abs() < 1e-3 {
        let fd = 1e-3 * (1.0 + xi.abs());
        let (pp, _) = return_crossing(work, section, xi + fd, 500.0, 1e-12)?;
        let (pm, _) = return_crossing(work, section, xi - fd, 500.0, 1e-12)?;
        multiplier = (pp - pm) / (2.0 * fd);
    }
    if multiplier <= 0.0 {
        return Err(Error::NoCycleFound(format!(
            "orientation-reversing return slope {multiplier}"
        )));
    }

    // sample one period densely
    let opts = IntegrateOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        sample_dt: Some(period / 4096.0),
        ..Default::default()
    };
    let seg = integrate(work, section.point(xi), period, &opts)?;
    let mut times: Vec<f64> = seg.samples.iter().map(|&(t, _)| t).collect();
    let mut points: Vec<State> = seg.samples.iter().map(|&(_, s)| s).collect();
    times.push(period);
    points.push(points[0]); // close the polyline

    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &points {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
    }

    // translate the working-direction slope to the forward-time multiplier
    let forward_multiplier = if backward { 1.0 / multiplier } else { multiplier };
    if backward {
        times = times.iter().map(|t| period - t).collect();
        times.reverse();
        points.reverse();
    }
    Ok(LimitCycle {
        period,
        points,
        times,
        floquet_multiplier: forward_multiplier,
        x_amplitude: xmax - xmin,
        stable: forward_multiplier < 1.0,
    })
}

/// Nontrivial Floquet multiplier via the divergence line integral
/// `exp(integral of div over one period)` -- the route independent of the
/// return map. The cycle is re-traversed once at high resolution so the
/// trapezoid quadrature resolves the relaxation corners.
pub fn floquet(params: &Params, cycle: &LimitCycle) -> f64 {
    let n = 32_768;
    let opts = IntegrateOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        sample_dt: Some(cycle.period / n as f64),
        ..Default::default()
    };
    let seg = integrate(params, cycle.points[0], cycle.period, &opts)
        .expect("cycle re-traversal stays bounded");
    let mut acc = 0.0;
    for w in seg.samples.windows(2) {
        let (t0, s0) = w[0];
        let (t1, s1) = w[1];
        acc += 0.5 * (params.divergence(s0) + params.divergence(s1)) * (t1 - t0);
    }
    acc.exp()
}

/// Which symmetric half-plane a separatrix shot targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// Signed separation between the unstable separatrix of the saddle `E1`
/// (shot forward) and its stable separatrix (shot backward), measured at
/// their first crossing of the section `x = x(E3)` in the leftward flow
/// direction. Zero locates the homoclinic loop.
pub fn separatrix_gap(params: &Params) -> Result<f64> {
    separatrix_gap_side(params, Side::Right)
}

/// Same probe on a chosen side; the two sides are kappa-mirror images for `a = 0`.
pub fn separatrix_gap_side(params: &Params, side: Side) -> Result<f64> {
    if params.a() != 0.0 || params.b() <= 1.0 {
        return Err(Error::DomainError(
            "separatrix gap requires a = 0 and a saddle at the origin (b > 1)".into(),
        ));
    }
    let b = params.b();
    let x3 = (3.0 * (b - 1.0) / b).sqrt();
    let section_x = match side {
        Side::Right => x3,
        Side::Left => -x3,
    };
    let yu = separatrix_crossing(params, section_x, side, true, 1e-7)?;
    let ys = separatrix_crossing(params, section_x, side, false, 1e-7)?;
    Ok(yu - ys)
}

fn separatrix_crossing(
    params: &Params,
    section_x: f64,
    side: Side,
    unstable: bool,
    offset: f64,
) -> Result<f64> {
    let j = params.jacobian(State::new(0.0, 0.0));
    let eig = eig2(j);
    let lambda = if unstable { eig[1].0 } else { eig[0].0 };
    // eigenvector of [[j11, j12], [j21, j22]] for a real eigenvalue (j12 = c != 0)
    let mut v = (j[0][1], lambda - j[0][0]);
    let n = v.0.hypot(v.1);
    v = (v.0 / n, v.1 / n);
    let want_positive_x = side == Side::Right;
    if (v.0 > 0.0) != want_positive_x {
        v = (-v.0, -v.1);
    }
    let seed = State::new(offset * v.0, offset * v.1);
    // stable branch is traced backward in time (c -> -c)
    let work = if unstable {
        *params
    } else {
        params.time_reversed()
    };
    // crossing taken where the loop's return leg passes: x decreasing in
    // forward time on the right side (mirrored on the left)
    let fwd_dir: i8 = match side {
        Side::Right => -1,
        Side::Left => 1,
    };
    let dir = if unstable { fwd_dir } else { -fwd_dir };
    let mut ev = EventSpec {
        g: Box::new(move |s: State| s.x - section_x),
        direction: dir,
        constraint: None,
        stop_after: 1,
        dead_time: 0.0,
    };
    let opts = IntegrateOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let seg = integrate_with_event(&work, seed, 500.0, &opts, Some(&mut ev))?;
    match seg.terminal_reason {
        TerminalReason::SectionCrossingsReached => Ok(seg.crossings[0].1.y),
        TerminalReason::EscapedRadius => Err(Error::SeparatrixEscaped),
        reason => Err(Error::NoCycleFound(format!(
            "separatrix never met the section ({reason:?})"
        ))),
    }
}

/// Bisect `separatrix_gap` over `[b_lo, b_hi]` at fixed `(a, c)`; the zero is
/// the double-homoclinic parameter.
pub fn homoclinic_b(params: &Params, b_lo: f64, b_hi: f64, tol_b: f64) -> Result<f64> {
    let at = |b: f64| -> Result<f64> {
        separatrix_gap(&Params::new(params.a(), b, params.c())?)
    };
    let mut lo = b_lo;
    let mut hi = b_hi;
    let mut glo = at(lo)?;
    let ghi = at(hi)?;
    if glo * ghi > 0.0 {
        return Err(Error::DomainError(format!(
            "no gap sign change on [{b_lo}, {b_hi}] (gaps {glo:.3e}, {ghi:.3e})"
        )));
    }
    while hi - lo > tol_b {
        let mid = 0.5 * (lo + hi);
        let gm = at(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// True when the polygon `cycle` winds around the point (odd crossing rule).
pub fn encloses(points: &[State], p: State) -> bool {
    let mut inside = false;
    let n = points.len();
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (points[i], points[i + 1]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_int = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_int {
                inside = !inside;
            }
        }
    }
    inside
}
