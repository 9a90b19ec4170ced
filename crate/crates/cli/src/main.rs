//! Command-line interface to the FitzHugh-Nagumo atlas: equilibrium
//! classification, bifurcation-curve tables, region sweeps, canard
//! verification, the analysis at infinity and Poincare-disc portraits.
//!
//! Output is deterministic: identical invocations produce byte-identical
//! files. Numeric failures exit with status 1 and a machine-readable JSON
//! object on stderr; argument errors exit with status 2.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fhn_atlas::atlas::{classify_region, eval_curve, hopf_condition_case_c, CurveId};
use fhn_atlas::compactification::{chain_step_residuals, fhn_blowdown_chain, infinite_equilibria};
use fhn_atlas::portrait::{fmt9, render_portrait, PortraitSpec, Ring};
use fhn_atlas::slowfast::{canard_curve, verify_canard, CanardCase};
use fhn_atlas::Params;

#[derive(Parser)]
#[command(
    name = "fhn-atlas",
    version,
    about = "Numerical atlas for the FitzHugh-Nagumo planar family"
)]
struct Cli {
    /// Seed for randomized sampling (chain verification points).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Parse a finite decimal.
fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !v.is_finite() {
        return Err("value must be a finite decimal".into());
    }
    Ok(v)
}

/// Parse the time-scale parameter; the family is only defined for c != 0.
fn nonzero_c(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v == 0.0 {
        return Err("c = 0 is outside the model's domain (the family divides by c)".into());
    }
    Ok(v)
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, value_parser = nonzero_c, allow_hyphen_values = true)]
    c: f64,
}

impl ParamArgs {
    fn params(&self) -> anyhow::Result<Params> {
        Ok(Params::new(self.a, self.b, self.c)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum CaseArg {
    #[value(alias = "a")]
    A,
    #[value(alias = "b")]
    B,
    #[value(alias = "c")]
    C,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria with classification plus the region signature.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Launch the bounded limit-cycle probe.
        #[arg(long)]
        probe_cycles: bool,
    },
    /// CSV table of the bifurcation/transition curves of a case.
    ///
    /// Case A sweeps c; Case B sweeps a (the Belyakov hyperbola returns the
    /// c on the curve); Case C sweeps a at fixed --b and returns the
    /// critical c of the Hopf condition.
    Curves {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        c_min: f64,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        c_max: f64,
        #[arg(long)]
        steps: usize,
        /// Fixed b for the Case C sweep.
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        b: Option<f64>,
    },
    /// CSV of region signatures over a (b, c) grid (Case A).
    RegionSweep {
        #[arg(long, value_enum)]
        case: CaseArg,
        /// b range as LO:HI.
        #[arg(long)]
        b_range: String,
        /// c range as LO:HI.
        #[arg(long)]
        c_range: String,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        probe_cycles: bool,
    },
    /// Asymptotic canard parameter, optionally verified by stiff integration.
    Canard {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, value_parser = finite)]
        eps: f64,
        #[arg(long)]
        verify: bool,
    },
    /// Equilibria at infinity and the blow-down chain summary.
    Infinity {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Render the Poincare-disc portrait (SVG, optional CSV of samples).
    Portrait {
        #[command(flatten)]
        params: ParamArgs,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the trajectory sample table.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Initial-condition rings as COUNT:RADIUS[,COUNT:RADIUS...].
        #[arg(long, default_value = "8:2.5")]
        rings: String,
        #[arg(long, default_value_t = 40.0)]
        horizon: f64,
        /// Draw only nullclines and the equator.
        #[arg(long)]
        nullclines_only: bool,
        /// Overlay detected limit cycles as closed curves.
        #[arg(long)]
        cycles: bool,
    },
    /// Re-verify every blow-down step at freshly sampled points.
    VerifyChain {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("FHN_ATLAS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            let kind = err
                .downcast_ref::<fhn_atlas::Error>()
                .map(error_kind)
                .unwrap_or("other");
            let payload = json!({ "error": err.to_string(), "kind": kind });
            eprintln!("{payload}");
            std::process::exit(1);
        }
    }
}

fn error_kind(e: &fhn_atlas::Error) -> &'static str {
    use fhn_atlas::Error::*;
    match e {
        InvalidParams(_) => "invalid-params",
        RootFindingFailure { .. } => "root-finding-failure",
        DomainError(_) => "domain-error",
        NotAnEquilibrium(_) => "not-an-equilibrium",
        NotOnHopfCurve(_) => "not-on-hopf-curve",
        DegenerateCenterManifold(_) => "degenerate-center-manifold",
        CycleProbeTimeout(_) => "cycle-probe-timeout",
        StepSizeUnderflow { .. } => "step-size-underflow",
        NoCycleFound(_) => "no-cycle-found",
        SeparatrixEscaped => "separatrix-escaped",
        StiffnessBudgetExceeded(_) => "stiffness-budget-exceeded",
        ChainMismatch { .. } => "chain-mismatch",
        CenterManifoldOrderTooHigh(_) => "center-manifold-order-too-high",
        InexactDivision => "inexact-division",
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow::anyhow!("range must be LO:HI, got {s}"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Classify {
            params,
            probe_cycles,
        } => {
            let p = params.params()?;
            let equilibria = fhn_atlas::equilibria::find_equilibria(&p)?;
            let region = classify_region(&p, probe_cycles)?;
            let payload = json!({
                "command": "classify",
                "params": p,
                "equilibria": equilibria,
                "region": region,
            });
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&payload)?),
            )
        }
        Command::Curves {
            case,
            c_min,
            c_max,
            steps,
            b,
        } => {
            anyhow::ensure!(steps >= 2, "need at least 2 steps");
            let mut csv = String::from("curve_id,c,value,valid\n");
            let grid =
                (0..steps).map(|k| c_min + (c_max - c_min) * k as f64 / (steps - 1) as f64);
            match case {
                CaseArg::A => {
                    let ids = [
                        CurveId::Tp,
                        CurveId::Tf1,
                        CurveId::Th1,
                        CurveId::Tf23Minus,
                        CurveId::Tf23Plus,
                        CurveId::Th23,
                        CurveId::Dh,
                        CurveId::SnlPlus,
                        CurveId::SnlMinus,
                    ];
                    for c in grid {
                        for id in ids {
                            let pt = eval_curve(id, c);
                            csv.push_str(&curve_row(id, c, pt.value, pt.valid));
                        }
                    }
                }
                CaseArg::B => {
                    for a in grid {
                        for id in [CurveId::Tfb0, CurveId::Thb0Minus, CurveId::Thb0Plus] {
                            let pt = eval_curve(id, a);
                            csv.push_str(&curve_row(id, a, pt.value, pt.valid));
                        }
                    }
                }
                CaseArg::C => {
                    let b = b.ok_or_else(|| {
                        anyhow::anyhow!("Case C needs --b to fix the recovery coupling")
                    })?;
                    for a in grid {
                        let hopf = Params::new(a, b, 1.0)
                            .ok()
                            .and_then(|p| hopf_condition_case_c(&p).ok());
                        match hopf.and_then(|h| h.c_critical) {
                            Some(c_crit) => {
                                csv.push_str(&curve_row(CurveId::ThCaseC, a, c_crit, true))
                            }
                            None => {
                                csv.push_str(&curve_row(CurveId::ThCaseC, a, f64::NAN, false))
                            }
                        }
                    }
                }
            }
            emit(&cli.out, &csv)
        }
        Command::RegionSweep {
            case,
            b_range,
            c_range,
            grid,
            probe_cycles,
        } => {
            anyhow::ensure!(
                matches!(case, CaseArg::A),
                "region sweeps cover Case A (a = 0)"
            );
            anyhow::ensure!(grid >= 2, "grid must be at least 2");
            let (b_lo, b_hi) = parse_range(&b_range)?;
            let (c_lo, c_hi) = parse_range(&c_range)?;
            let points: Vec<(f64, f64)> = (0..grid)
                .flat_map(|i| {
                    let b = b_lo + (b_hi - b_lo) * i as f64 / (grid - 1) as f64;
                    (0..grid)
                        .map(move |j| (b, c_lo + (c_hi - c_lo) * j as f64 / (grid - 1) as f64))
                })
                .collect();
            use rayon::prelude::*;
            let rows: Vec<String> = points
                .par_iter()
                .map(|&(b, c)| {
                    let sig =
                        Params::new(0.0, b, c).and_then(|p| classify_region(&p, probe_cycles));
                    match sig {
                        Ok(sig) => {
                            let classes: Vec<String> = sig
                                .classes
                                .iter()
                                .map(|cl| {
                                    serde_json::to_string(cl)
                                        .expect("class serializes")
                                        .trim_matches('"')
                                        .to_string()
                                })
                                .collect();
                            format!(
                                "{},{},{},{},{},{}\n",
                                fmt9(b),
                                fmt9(c),
                                sig.equilibrium_count,
                                classes.join("+"),
                                sig.limit_cycle_count
                                    .map(|n| n.to_string())
                                    .unwrap_or_default(),
                                sig.kappa_symmetric
                            )
                        }
                        Err(e) => format!("{},{},error:{e},,,\n", fmt9(b), fmt9(c)),
                    }
                })
                .collect();
            let mut csv = String::from(
                "b,c,equilibrium_count,classes,limit_cycle_count,kappa_symmetric\n",
            );
            for row in rows {
                csv.push_str(&row);
            }
            emit(&cli.out, &csv)
        }
        Command::Canard { case, eps, verify } => {
            let (case_id, key) = match case {
                CaseArg::A => (CanardCase::A, "b_c"),
                CaseArg::B => (CanardCase::B, "a_c"),
                CaseArg::C => anyhow::bail!("canards are analysed in Cases A and B"),
            };
            let value = canard_curve(case_id, eps)?;
            let mut payload = json!({
                "command": "canard",
                "case": match case_id { CanardCase::A => "A", CanardCase::B => "B" },
                "eps": eps,
                key: value,
            });
            if verify {
                let tracking = verify_canard(case_id, eps, value)?;
                payload["tracked_slow_time"] = json!(tracking.tracked_slow_time);
                payload["max_distance_to_manifold"] =
                    json!(tracking.max_distance_to_manifold);
            }
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&payload)?),
            )
        }
        Command::Infinity { params } => {
            let p = params.params()?;
            let inf = infinite_equilibria(&p.to_polynomial());
            let chain = fhn_blowdown_chain(&p)?;
            use num_traits::ToPrimitive;
            let as_f64 = |pair: &[num_rational::BigRational; 2]| -> Vec<f64> {
                pair.iter().map(|r| r.to_f64().unwrap()).collect()
            };
            let eig = chain.final_eigenvalues();
            let e1 = chain.e1_tilde_eigenvalues();
            let cubic = chain.e6_center_manifold_cubic()?;
            let payload = json!({
                "command": "infinity",
                "params": p,
                "infinite_equilibria": inf,
                "chain": {
                    "steps": chain.steps.iter().map(|s| json!({
                        "kind": s.kind,
                        "substitution": s.substitution,
                        "removed_factor": s.removed_factor,
                    })).collect::<Vec<_>>(),
                    "max_residual": chain.max_residual,
                    "e1_tilde_eigenvalues": as_f64(&e1),
                    "e4_eigenvalues": as_f64(&eig[0]),
                    "e5_eigenvalues": as_f64(&eig[1]),
                    "e6_eigenvalues": as_f64(&eig[2]),
                    "e6_center_manifold_cubic": cubic.to_f64().unwrap(),
                    "e6_classification": chain.e6_classification()?,
                },
            });
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&payload)?),
            )
        }
        Command::Portrait {
            params,
            out,
            csv,
            rings,
            horizon,
            nullclines_only,
            cycles,
        } => {
            let p = params.params()?;
            let mut spec = PortraitSpec::new(p);
            spec.horizon = horizon;
            spec.nullclines_only = nullclines_only;
            spec.draw_cycles = cycles;
            spec.rings = rings
                .split(',')
                .map(|part| -> anyhow::Result<Ring> {
                    let (count, radius) = part
                        .split_once(':')
                        .ok_or_else(|| anyhow::anyhow!("ring must be COUNT:RADIUS"))?;
                    Ok(Ring {
                        count: count.trim().parse()?,
                        radius: radius.trim().parse()?,
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let portrait = render_portrait(&spec)?;
            std::fs::write(&out, &portrait.svg)?;
            if let Some(csv_path) = csv {
                std::fs::write(csv_path, &portrait.csv)?;
            }
            Ok(())
        }
        Command::VerifyChain { params, samples } => {
            let p = params.params()?;
            let chain = fhn_blowdown_chain(&p)?;
            let residuals = chain_step_residuals(&chain, samples, cli.seed);
            let worst = residuals.iter().cloned().fold(0.0, f64::max);
            let payload = json!({
                "command": "verify-chain",
                "params": p,
                "samples": samples,
                "steps": chain.steps.iter().zip(residuals.iter()).enumerate().map(|(i, (s, r))| json!({
                    "index": i,
                    "kind": s.kind,
                    "substitution": s.substitution,
                    "residual": r,
                })).collect::<Vec<_>>(),
                "max_residual": worst,
                "ok": worst < 1e-9,
            });
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&payload)?),
            )?;
            if worst >= 1e-9 {
                anyhow::bail!(fhn_atlas::Error::ChainMismatch {
                    step: residuals
                        .iter()
                        .position(|r| *r >= 1e-9)
                        .unwrap_or_default(),
                    residual: worst
                });
            }
            Ok(())
        }
    }
}

fn curve_row(id: CurveId, c: f64, value: f64, valid: bool) -> String {
    format!(
        "{},{},{},{}\n",
        id.name(),
        fmt9(c),
        if value.is_nan() {
            String::from("nan")
        } else {
            fmt9(value)
        },
        valid
    )
}
