//! Command-line front end: every pipeline behind one executable, JSON
//! reports with explicit error budgets, optional CSV curves.
//!
//! Exit codes: 0 pass/ok, 1 fail, 2 inconclusive or refused, 3 input error.

mod report;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilbvol::acute;
use hilbvol::banach::load_norm;
use hilbvol::besicovitch::{self, Verdict};
use hilbvol::john::{self, JohnParams, MveeParams, VolumeParams};
use hilbvol::metric::{self, load_grid, PartialFunction, Space};
use hilbvol::periodic::{
    ball_growth, burago_ivanov_report, stable_norm, BiParams, BiVerdict, PeriodicMetric,
    StableNormParams,
};
use report::{write_report, OutputSink};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hilbvol", version, about = "Volume inequalities at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// `csv` additionally writes curve data next to the JSON report.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// John form, contact decomposition and ball volume of a polytopal norm.
    John {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 500_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 10_000)]
        domination_samples: usize,
        #[arg(long, default_value_t = 1_000_000)]
        volume_samples: usize,
        #[arg(long, default_value_t = 0x6a6f686e)]
        seed: u64,
        /// Alias of --out kept for report-oriented scripts.
        #[arg(long)]
        report: Option<std::path::PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stable norm of a periodic metric along one lattice direction.
    StableNorm {
        #[arg(long)]
        metric: std::path::PathBuf,
        /// Lattice direction, comma-separated, e.g. `3,1`.
        #[arg(long)]
        dir: String,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
        #[arg(long, default_value_t = 40_000_000)]
        budget: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ball growth curve of a periodic metric.
    Growth {
        #[arg(long)]
        metric: std::path::PathBuf,
        #[arg(long, default_value_t = 20.0)]
        rmax: f64,
        /// Explicit radii, comma-separated; overrides --rmax.
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value_t = 60_000_000)]
        budget: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Full volume-growth report: stable ball, John form, growth verdict.
    BiReport {
        #[arg(long)]
        metric: std::path::PathBuf,
        #[arg(long, default_value_t = 22.0)]
        rmax: f64,
        #[arg(long, default_value_t = 48)]
        directions: usize,
        #[arg(long, default_value_t = 0x766f6c)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cube volume inequality with straightening certificates.
    CubeCheck {
        #[arg(long)]
        metric: std::path::PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simplex volume inequality.
    SimplexCheck {
        #[arg(long)]
        metric: std::path::PathBuf,
        /// Expected simplex dimension; validated against the file.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Filling bound for the unit ball of a planar norm.
    FillingCheck {
        #[arg(long)]
        norm: std::path::PathBuf,
        #[arg(long)]
        metric: std::path::PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dihedral angles and simplex-product factorization of an H-polytope.
    Acute {
        #[arg(long)]
        polytope: std::path::PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minimal Lipschitz extension of partial data on a grid metric.
    Extend {
        #[arg(long)]
        metric: std::path::PathBuf,
        /// JSON file `{"domain": [...], "values": [...]}`.
        #[arg(long)]
        values: std::path::PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stencil accuracy of the flat grid.
    Calibrate {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        stencil: usize,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded property suite over every module.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            3
        }
    });
}

fn run(cli: Cli) -> Result<i32, hilbvol::Error> {
    match cli.command {
        Command::John {
            input,
            tol,
            max_iter,
            domination_samples,
            volume_samples,
            seed,
            report,
            mut output,
        } => {
            if output.out.is_none() {
                output.out = report;
            }
            let norm = load_norm(&input)?;
            let params = JohnParams {
                mvee: MveeParams { tol, max_iter, ..Default::default() },
                domination_samples,
                seed,
                ..Default::default()
            };
            let r = john::john_form(&norm, &params)?;
            let volume = john::john_volume_of_unit_ball(
                &norm,
                &r.form,
                &VolumeParams { samples: volume_samples, seed },
            )?;
            let n = norm.dim();
            let hdia: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| r.form.matrix()[(i, j)]).collect())
                .collect();
            let atoms: Vec<serde_json::Value> = r
                .partition
                .atoms()
                .iter()
                .map(|a| json!({"weight": a.weight, "functional": a.functional.coeffs()}))
                .collect();
            let ok = r.converged
                && r.residuals.decomposition <= 1e-6
                && r.residuals.mass_gap <= 1e-6
                && r.residuals.max_domination_violation <= 1e-9;
            let body = json!({
                "config": {
                    "input": input.display().to_string(),
                    "tol": tol, "max_iter": max_iter,
                    "domination_samples": domination_samples,
                    "volume_samples": volume_samples, "seed": seed,
                },
                "hdia": hdia,
                "atoms": atoms,
                "mass": r.partition.total_mass(),
                "iterations": r.iterations,
                "converged": r.converged,
                "residuals": {
                    "decomposition": r.residuals.decomposition,
                    "mass_gap": r.residuals.mass_gap,
                    "max_domination_violation": r.residuals.max_domination_violation,
                },
                "volume": {
                    "hilbertian": volume.value,
                    "lebesgue": volume.lebesgue,
                    "sqrt_det": volume.sqrt_det,
                    "std_error": volume.std_error,
                    "method": format!("{:?}", volume.method),
                },
                "error_budget": {
                    "decomposition_tol": 1e-6,
                    "mass_tol": 1e-6,
                    "domination_tol": 1e-9,
                    "mvee_logdet_tol": tol,
                },
                "verdict": if ok { "PASS" } else if r.converged { "FAIL" } else { "INCONCLUSIVE" },
            });
            write_report(&output_sink(&output), &body, None)?;
            Ok(if ok { 0 } else if r.converged { 1 } else { 2 })
        }

        Command::StableNorm { metric, dir, kmax, budget, output } => {
            let cell = load_grid(&metric)?;
            let pm = PeriodicMetric::new(cell)?;
            let v = parse_i64_list(&dir)?;
            let est = stable_norm(
                &pm,
                &v,
                kmax,
                &StableNormParams { window_budget: budget, d_cell: None },
            )?;
            let csv = Some(
                std::iter::once("k,a_k".to_string())
                    .chain(est.per_k.iter().enumerate().map(|(i, a)| format!("{},{a}", i + 1)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
            let body = json!({
                "config": {"metric": metric.display().to_string(), "dir": v, "kmax": kmax},
                "estimate": est.estimate,
                "bracket": {"lo": est.lo, "hi": est.hi},
                "k_used": est.k_used,
                "per_k": est.per_k,
                "error_budget": {"d_cell": est.d_cell, "bracket_width": est.hi - est.lo},
                "window_nodes": est.window_nodes,
            });
            write_report(&output_sink(&output), &body, csv)?;
            Ok(0)
        }

        Command::Growth { metric, rmax, radii, budget, output } => {
            let cell = load_grid(&metric)?;
            let pm = PeriodicMetric::new(cell)?;
            let rs = match radii {
                Some(ref s) => parse_f64_list(s)?,
                None => default_radii(rmax),
            };
            let growth = ball_growth(&pm, &rs, budget)?;
            let csv = Some(
                std::iter::once("r,volume,ratio".to_string())
                    .chain(growth.iter().map(|g| format!("{},{},{}", g.r, g.volume, g.ratio)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
            let body = json!({
                "config": {"metric": metric.display().to_string(), "radii": rs},
                "growth": growth.iter().map(|g| json!({
                    "r": g.r, "volume": g.volume, "ratio": g.ratio,
                })).collect::<Vec<_>>(),
            });
            write_report(&output_sink(&output), &body, csv)?;
            Ok(0)
        }

        Command::BiReport { metric, rmax, directions, seed, output } => {
            let cell = load_grid(&metric)?;
            let pm = PeriodicMetric::new(cell)?;
            let params = BiParams {
                radii: default_radii(rmax),
                direction_count: directions,
                volume: VolumeParams { seed, ..Default::default() },
                ..Default::default()
            };
            let r = burago_ivanov_report(&pm, &params)?;
            let csv = Some(
                std::iter::once("r,volume,ratio".to_string())
                    .chain(r.growth.iter().map(|g| format!("{},{},{}", g.r, g.volume, g.ratio)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
            let (verdict, code, reason) = match &r.verdict {
                BiVerdict::Pass => ("PASS", 0, None),
                BiVerdict::Fail => ("FAIL", 1, None),
                BiVerdict::Refused { reason } => ("REFUSED", 2, Some(reason.clone())),
            };
            let body = json!({
                "config": {
                    "metric": metric.display().to_string(),
                    "radii": params.radii, "directions": directions, "seed": seed,
                },
                "verdict": verdict,
                "refusal_reason": reason,
                "liminf_proxy": r.liminf_proxy,
                "growth": r.growth.iter().map(|g| json!({
                    "r": g.r, "volume": g.volume, "ratio": g.ratio,
                })).collect::<Vec<_>>(),
                "error_budget": {
                    "eps_stencil": r.error_budget.eps_stencil,
                    "stencil_term": r.error_budget.stencil_term,
                    "quadrature_term": r.error_budget.quadrature_term,
                    "bracket_term": r.error_budget.bracket_term,
                    "sampling_term": r.error_budget.sampling_term,
                    "total": r.error_budget.total,
                },
                "john": r.john.as_ref().map(|j| json!({
                    "hdia": j.hdia,
                    "ball_volume": j.ball_volume,
                    "omega_n": j.omega_n,
                    "margin": j.margin,
                    "sampling_gap": j.sampling_gap,
                    "max_bracket_rel": j.max_bracket_rel,
                })),
            });
            write_report(&output_sink(&output), &body, csv)?;
            Ok(code)
        }

        Command::CubeCheck { metric, output } => {
            let gm = load_grid(&metric)?;
            let cs = besicovitch::CubicalSpace::new(gm)?;
            let r = besicovitch::cube_inequality_check(&cs)?;
            let (verdict, code) = verdict_code(r.verdict);
            let body = json!({
                "config": {"metric": metric.display().to_string()},
                "lhs": r.volume,
                "rhs": r.rhs,
                "face_distances": r.face_dist,
                "margin": r.margin,
                "tol": r.tol_grid,
                "rhs_from_certificate": r.rhs_from_certificate,
                "cross_check_ok": r.cross_check_ok,
                "error_budget": {"tol_grid": r.tol_grid,
                    "formula": "4 * n / m * max(phi)^n * extent^n"},
                "verdict": verdict,
            });
            write_report(&output_sink(&output), &body, None)?;
            Ok(code)
        }

        Command::SimplexCheck { metric, n, output } => {
            let ss = besicovitch::load_simplex(&metric)?;
            if let Some(n) = n {
                if n != ss.n() {
                    return Err(hilbvol::Error::DimensionMismatch { expected: n, got: ss.n() });
                }
            }
            let r = besicovitch::simplex_inequality_check(&ss)?;
            let (verdict, code) = verdict_code(r.verdict);
            let body = json!({
                "config": {"metric": metric.display().to_string(), "n": ss.n()},
                "lhs": r.volume,
                "rhs": r.rhs,
                "s_ratio": r.s_ratio,
                "margin": r.margin,
                "tol": r.tol_grid,
                "lambda": r.lambda,
                "partition_residual": r.partition_residual,
                "error_budget": {"tol_grid": r.tol_grid,
                    "formula": "4 * n / m * max(phi)^n * vol(simplex) * max(S^n, 1)"},
                "verdict": verdict,
            });
            write_report(&output_sink(&output), &body, None)?;
            Ok(code)
        }

        Command::FillingCheck { norm, metric, output } => {
            let nrm = load_norm(&norm)?;
            let gm = load_grid(&metric)?;
            let r = besicovitch::filling_extremality_check(&nrm, &gm)?;
            let (verdict, code) = verdict_code(r.verdict);
            let body = json!({
                "config": {
                    "norm": norm.display().to_string(),
                    "metric": metric.display().to_string(),
                },
                "lhs": r.volume,
                "rhs": r.rhs,
                "lebesgue": r.lebesgue,
                "sqrt_det": r.sqrt_det,
                "margin": r.margin,
                "tol": r.tol_grid,
                "error_budget": {"tol_grid": r.tol_grid},
                "verdict": verdict,
            });
            write_report(&output_sink(&output), &body, None)?;
            Ok(code)
        }

        Command::Acute { polytope, tol, output } => {
            let p = acute::load_polytope(&polytope)?;
            let report = acute::validate(&p)?;
            let angles = acute::dihedral_angles(&p)?;
            let acute_flag = acute::is_acute(&p, tol)?;
            let factorization = acute::simplex_product_factorization(&p)?;
            let (fact_json, is_product) = match &factorization {
                acute::Factorization::Product(blocks) => (
                    json!({
                        "blocks": blocks.iter().map(|b| json!({
                            "dim": b.dim, "facets": b.facet_indices,
                        })).collect::<Vec<_>>(),
                    }),
                    true,
                ),
                acute::Factorization::NotAProduct { reason } => {
                    (json!({ "not_a_product": reason }), false)
                }
            };
            // an acute polytope that fails to factor contradicts the
            // factorization theorem; surface it as a failure
            let ok = !acute_flag || is_product;
            let body = json!({
                "config": {"polytope": polytope.display().to_string(), "tol": tol},
                "vertices": report.vertex_count,
                "redundant_facets": report.redundant,
                "dihedral_angles": angles.iter().map(|&(i, j, a)| json!({
                    "facets": [i, j], "angle": a,
                })).collect::<Vec<_>>(),
                "is_acute": acute_flag,
                "factorization": fact_json,
                "verdict": if ok { "PASS" } else { "FAIL" },
            });
            write_report(&output_sink(&output), &body, None)?;
            Ok(if ok { 0 } else { 1 })
        }

        Command::Extend { metric, values, lambda, output } => {
            let gm = load_grid(&metric)?;
            let text = std::fs::read_to_string(&values)?;
            let parsed: serde_json::Value = serde_json::from_str(&text)?;
            let domain: Vec<usize> = serde_json::from_value(
                parsed
                    .get("domain")
                    .cloned()
                    .ok_or_else(|| hilbvol::Error::Invalid("missing field `domain`".into()))?,
            )?;
            let vals: Vec<f64> = serde_json::from_value(
                parsed
                    .get("values")
                    .cloned()
                    .ok_or_else(|| hilbvol::Error::Invalid("missing field `values`".into()))?,
            )?;
            let pf = PartialFunction::new(domain, vals)?;
            let ext = metric::mcshane_extend(&gm, &pf, lambda)?;
            let body = json!({
                "config": {
                    "metric": metric.display().to_string(),
                    "values": values.display().to_string(),
                    "lambda": lambda,
                },
                "lipschitz": ext.lipschitz,
                "nodes": Space::node_count(&gm),
                "extension": ext.values,
            });
            write_report(&output_sink(&output), &body, None)?;
            Ok(0)
        }

        Command::Calibrate { dim, stencil, resolution, directions, output } => {
            let cal = metric::stencil_calibration(dim, stencil, resolution, directions)?;
            let csv = Some(
                std::iter::once("ratio_minus_1,direction".to_string())
                    .chain(cal.per_direction.iter().map(|(u, r)| {
                        format!(
                            "{r},{}",
                            u.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
                        )
                    }))
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
            let body = json!({
                "config": {"dim": dim, "stencil": stencil,
                    "resolution": resolution, "directions": directions},
                "eps_stencil": cal.eps,
                "per_direction": cal.per_direction.iter().map(|(u, r)| json!({
                    "direction": u, "ratio_minus_1": r,
                })).collect::<Vec<_>>(),
            });
            write_report(&output_sink(&output), &body, csv)?;
            Ok(0)
        }

        Command::Selftest { seed } => Ok(selftest::run(seed)),
    }
}

fn verdict_code(v: Verdict) -> (&'static str, i32) {
    match v {
        Verdict::Pass => ("PASS", 0),
        Verdict::Inconclusive => ("INCONCLUSIVE", 2),
        Verdict::Fail => ("FAIL", 1),
    }
}

fn output_sink(args: &OutputArgs) -> OutputSink {
    OutputSink { out: args.out.clone(), csv: args.format == Format::Csv }
}

fn default_radii(rmax: f64) -> Vec<f64> {
    // a short curve ending at rmax with three close gate radii at the top
    vec![rmax * 0.45, rmax * 0.7, rmax * 0.91, rmax * 0.955, rmax]
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>, hilbvol::Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| hilbvol::Error::Invalid(format!("bad integer `{t}`: {e}")))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, hilbvol::Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| hilbvol::Error::Invalid(format!("bad number `{t}`: {e}")))
        })
        .collect()
}
