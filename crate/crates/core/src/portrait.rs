//! Global phase portraits on the Poincare disc: trajectory projection,
//! nullclines, equilibrium glyphs and SVG/CSV emission.
//!
//! The CSV sample table is the source of truth; the SVG is a pure view of the
//! same points, so a fixed spec renders byte-identically.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::compactification::{infinite_equilibria, Chart};
use crate::dynamics::{integrate, IntegrateOptions};
use crate::equilibria::{find_equilibria, EqClass};
use crate::error::Result;
use crate::fhn::{Params, State};

/// A point of the closed Poincare disc; the boundary represents infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    pub x: f64,
    pub y: f64,
}

/// Upper-hemisphere central projection `(x, y) / sqrt(1 + x^2 + y^2)`.
pub fn project_to_disc(s: State) -> DiscPoint {
    let delta = (1.0 + s.x * s.x + s.y * s.y).sqrt();
    DiscPoint {
        x: s.x / delta,
        y: s.y / delta,
    }
}

/// A ring of initial conditions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ring {
    pub count: usize,
    pub radius: f64,
}

/// Style controls for the SVG view.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StyleOptions {
    pub stroke_width: f64,
    pub arrowheads: bool,
    pub draw_equator: bool,
}

impl Default for StyleOptions {
    fn default() -> Self {
        StyleOptions {
            stroke_width: 1.2,
            arrowheads: false,
            draw_equator: true,
        }
    }
}

/// Full description of a portrait rendering job.
#[derive(Debug, Clone, Serialize)]
pub struct PortraitSpec {
    pub params: Params,
    pub rings: Vec<Ring>,
    /// Forward/backward integration horizon per initial condition.
    pub horizon: f64,
    pub style: StyleOptions,
    /// Draw only nullclines and the equator (no trajectories).
    pub nullclines_only: bool,
    /// Probe for limit cycles and overlay them as closed curves.
    pub draw_cycles: bool,
    /// x-range used to sample the cubic nullcline.
    pub x_range: (f64, f64),
}

impl PortraitSpec {
    pub fn new(params: Params) -> Self {
        PortraitSpec {
            params,
            rings: vec![Ring {
                count: 8,
                radius: 2.5,
            }],
            horizon: 40.0,
            style: StyleOptions::default(),
            nullclines_only: false,
            draw_cycles: false,
            x_range: (-3.0, 3.0),
        }
    }
}

/// Rendered artifacts: the CSV sample table and its SVG view.
#[derive(Debug, Clone)]
pub struct Portrait {
    pub svg: String,
    pub csv: String,
}

/// Finite states are clipped once their disc radius exceeds this value;
/// the analysis of infinity is done in the charts, the portrait only needs
/// the visual continuation.
const CLIP_DISC_RADIUS: f64 = 0.999;

const CANVAS: f64 = 1000.0;
const DISC_RADIUS_PX: f64 = 480.0;

/// Nine-significant-digit float formatting shared by CSV and SVG.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000e0".into();
    }
    format!("{:.8e}", x)
}

fn to_canvas(p: DiscPoint) -> (f64, f64) {
    (
        CANVAS / 2.0 + DISC_RADIUS_PX * p.x,
        CANVAS / 2.0 - DISC_RADIUS_PX * p.y,
    )
}

/// Uniform-x sampling of the cubic nullcline plus the line nullcline
/// (a two-point segment, vertical at `x = a` when `b = 0`).
pub fn sample_nullclines(params: &Params, x_range: (f64, f64), n: usize) -> (Vec<State>, Vec<State>) {
    assert!(n >= 2, "nullcline sampling needs n >= 2");
    let (x0, x1) = x_range;
    let cubic: Vec<State> = (0..n)
        .map(|k| {
            let x = x0 + (x1 - x0) * k as f64 / (n - 1) as f64;
            State::new(x, x * x * x / 3.0 - x)
        })
        .collect();
    let line = if params.b() == 0.0 {
        let span = x0.abs().max(x1.abs());
        vec![
            State::new(params.a(), -span),
            State::new(params.a(), span),
        ]
    } else {
        vec![
            State::new(x0, (params.a() - x0) / params.b()),
            State::new(x1, (params.a() - x1) / params.b()),
        ]
    };
    (cubic, line)
}

struct Trajectory {
    id: usize,
    /// `(t, state)` samples; negative times mark the backward leg.
    samples: Vec<(f64, State)>,
}

fn clip_radius() -> f64 {
    // |disc(s)| = r / sqrt(1 + r^2) = CLIP_DISC_RADIUS
    CLIP_DISC_RADIUS / (1.0 - CLIP_DISC_RADIUS * CLIP_DISC_RADIUS).sqrt()
}

/// Render the portrait; integration failures only drop the affected
/// trajectory, never the document.
pub fn render_portrait(spec: &PortraitSpec) -> Result<Portrait> {
    let params = &spec.params;
    let mut trajectories: Vec<Trajectory> = Vec::new();
    if !spec.nullclines_only {
        let mut seeds: Vec<State> = Vec::new();
        for ring in &spec.rings {
            for k in 0..ring.count {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / ring.count as f64;
                seeds.push(State::new(
                    ring.radius * theta.cos(),
                    ring.radius * theta.sin(),
                ));
            }
        }
        let opts = IntegrateOptions {
            escape_radius: clip_radius(),
            sample_dt: Some(spec.horizon / 1000.0),
            detect_convergence: true,
            ..Default::default()
        };
        for (k, &s0) in seeds.iter().enumerate() {
            // forward leg
            if let Ok(seg) = integrate(params, s0, spec.horizon, &opts) {
                trajectories.push(Trajectory {
                    id: 2 * k,
                    samples: seg.samples,
                });
            }
            // backward leg via the time-reversal symmetry
            if let Ok(seg) = integrate(&params.time_reversed(), s0, spec.horizon, &opts) {
                trajectories.push(Trajectory {
                    id: 2 * k + 1,
                    samples: seg.samples.into_iter().map(|(t, s)| (-t, s)).collect(),
                });
            }
        }
    }

    // CSV: source of truth for every plotted sample
    let mut csv = String::from("traj_id,t,x,y,X,Y\n");
    for traj in &trajectories {
        for &(t, s) in &traj.samples {
            let d = project_to_disc(s);
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                traj.id,
                fmt9(t),
                fmt9(s.x),
                fmt9(s.y),
                fmt9(d.x),
                fmt9(d.y)
            );
        }
    }

    // SVG view
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 1000 1000\">"
    );
    let _ = writeln!(svg, "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>");
    if spec.style.draw_equator {
        let _ = writeln!(
            svg,
            "<circle cx=\"500\" cy=\"500\" r=\"480\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>"
        );
    }

    // nullclines, dashed
    let (cubic, line) = sample_nullclines(params, spec.x_range, 241);
    for (pts, name) in [(&cubic, "cubic-nullcline"), (&line, "line-nullcline")] {
        let path: Vec<String> = pts
            .iter()
            .map(|&s| {
                let (cx, cy) = to_canvas(project_to_disc(s));
                format!("{},{}", fmt9(cx), fmt9(cy))
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polyline class=\"{name}\" points=\"{}\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>",
            path.join(" ")
        );
    }

    // trajectories
    for traj in &trajectories {
        let path: Vec<String> = traj
            .samples
            .iter()
            .map(|&(_, s)| {
                let (cx, cy) = to_canvas(project_to_disc(s));
                format!("{},{}", fmt9(cx), fmt9(cy))
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polyline class=\"trajectory\" data-id=\"{}\" points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"{}\"/>",
            traj.id,
            path.join(" "),
            fmt9(spec.style.stroke_width)
        );
    }

    // detected limit cycles as closed curves
    if spec.draw_cycles {
        if let Ok(cycles) = crate::atlas::probe_distinct_cycles(params) {
            for (k, cycle) in cycles.iter().enumerate() {
                let path: Vec<String> = cycle
                    .points
                    .iter()
                    .map(|&s| {
                        let (cx, cy) = to_canvas(project_to_disc(s));
                        format!("{},{}", fmt9(cx), fmt9(cy))
                    })
                    .collect();
                let color = if cycle.stable { "darkgreen" } else { "darkorange" };
                let _ = writeln!(
                    svg,
                    "<polyline class=\"limit-cycle\" data-id=\"{k}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2.5\"/>",
                    path.join(" ")
                );
            }
        }
    }

    // finite equilibrium glyphs: filled = stable, hollow = unstable,
    // half-filled = saddle
    if let Ok(eqs) = find_equilibria(params) {
        for eq in &eqs {
            let (cx, cy) = to_canvas(project_to_disc(eq.location));
            match eq.classification {
                EqClass::StableNode | EqClass::StableFocus => {
                    let _ = writeln!(
                        svg,
                        "<circle class=\"equilibrium stable\" cx=\"{}\" cy=\"{}\" r=\"7\" fill=\"black\"/>",
                        fmt9(cx),
                        fmt9(cy)
                    );
                }
                EqClass::Saddle => {
                    let _ = writeln!(
                        svg,
                        "<path class=\"equilibrium saddle\" d=\"M {} {} m -7 0 a 7 7 0 0 1 14 0 z\" fill=\"black\"/><circle cx=\"{}\" cy=\"{}\" r=\"7\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
                        fmt9(cx),
                        fmt9(cy),
                        fmt9(cx),
                        fmt9(cy)
                    );
                }
                _ => {
                    let _ = writeln!(
                        svg,
                        "<circle class=\"equilibrium unstable\" cx=\"{}\" cy=\"{}\" r=\"7\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>",
                        fmt9(cx),
                        fmt9(cy)
                    );
                }
            }
        }
    }

    // infinite equilibria: diametrically opposite equator glyph pairs
    for inf in infinite_equilibria(&params.to_polynomial()) {
        let (dx, dy) = match inf.chart {
            Chart::U1 | Chart::V1 => {
                let n = (1.0 + inf.u * inf.u).sqrt();
                (1.0 / n, inf.u / n)
            }
            _ => (0.0, 1.0),
        };
        for sign in [1.0, -1.0] {
            let (cx, cy) = to_canvas(DiscPoint {
                x: sign * dx,
                y: sign * dy,
            });
            let _ = writeln!(
                svg,
                "<rect class=\"infinite-equilibrium\" x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"darkred\"/>",
                fmt9(cx - 5.0),
                fmt9(cy - 5.0)
            );
        }
    }

    let _ = writeln!(svg, "</svg>");
    Ok(Portrait { svg, csv })
}
