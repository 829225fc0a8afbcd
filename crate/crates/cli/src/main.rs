//! Command-line frontend for the darboux toolkit.
//!
//! One subcommand per computational area. All inputs are inline expression
//! strings or small JSON files; outputs are a single deterministic text line,
//! a JSON report with fixed key order, or CSV for trajectories. Exit codes:
//! 0 success, 1 domain error (bad input data, singularities), 2 usage error.

use clap::{Parser, Subcommand};
use darboux::expr::parse::parse;
use darboux::expr::Expr;
use darboux::forms::{Chart, DiffForm, MatExpr};
use darboux::gauge::{holonomy, wilson_loop, Loop, PathCurve, TransportMethod};
use darboux::knots::{jones_at_level, parse_pd, skein_evaluate, writhe, SkeinSpec};
use darboux::lie::{ad, exp_matrix, CMat, Complex64};
use darboux::mech::{flow_integrate, poisson, standard_chart, HamiltonianSystem};
use darboux::prequant::{prequant_op, PrequantConnection};
use darboux::sigma::{geodesic_integrate, Metric};
use darboux::symplin::{symplectic_basis, QMatrix};
use serde::Deserialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "darboux", version, about = "Exact symplectic geometry, quantization, and knot polynomials")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact normal form B^T Omega B = diag(0, J) for an antisymmetric rational matrix
    SymplecticBasis {
        /// JSON file: array of arrays of rationals as "p/q" strings
        #[arg(long)]
        omega: PathBuf,
    },
    /// Poisson bracket {f, g} on the standard chart of R^2n
    Poisson {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// degrees of freedom (chart q,p for n = 1, else q1..qn,p1..pn)
        #[arg(long)]
        n: usize,
        /// emit a JSON report instead of the bare value
        #[arg(long)]
        json: bool,
    },
    /// Integrate Hamilton's equations; emits CSV rows t,q...,p...
    Flow {
        #[arg(long = "H")]
        hamiltonian: String,
        #[arg(long)]
        n: usize,
        /// starting point, comma-separated floats in chart order
        #[arg(long)]
        x0: String,
        #[arg(long = "T")]
        t_final: f64,
        #[arg(long = "h")]
        step: f64,
    },
    /// Matrix exponential and bracket on complex matrices
    Lie {
        #[command(subcommand)]
        op: LieOp,
    },
    /// Parallel transport around a closed polyline, from the identity
    Holonomy {
        /// JSON file: {"chart": [...], "comps": [matrix of expr strings per coordinate]}
        #[arg(long)]
        a: PathBuf,
        /// JSON file: {"chart": [...], "points": [[...], ...]}, first point = last
        #[arg(long = "loop")]
        loop_path: PathBuf,
        #[arg(long, default_value = "rk4")]
        method: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Trace of the path-ordered exponential of i times the connection
    Wilson {
        #[arg(long)]
        a: PathBuf,
        #[arg(long = "loop")]
        loop_path: PathBuf,
        #[arg(long, default_value = "rk4")]
        method: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Prequantization operator Q(f) applied to a wave function
    Quantize {
        #[arg(long)]
        f: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        json: bool,
    },
    /// Integrate the geodesic equation; emits CSV rows t,x...,dx...
    Geodesic {
        /// JSON file: {"chart": [...], "g": [matrix of expr strings]}
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        v0: String,
        #[arg(long = "T")]
        t_final: f64,
        #[arg(long = "h")]
        step: f64,
    },
    /// Knot and link invariants from a PD code
    Knot {
        /// JSON file with the PD code
        #[arg(long)]
        pd: PathBuf,
        #[arg(long)]
        invariant: String,
        /// evaluate the Jones value at s = exp(i pi/(k+2))
        #[arg(long)]
        at_level: Option<u32>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum LieOp {
    /// exp(X) for a complex matrix X (JSON entries [re, im])
    Exp {
        #[arg(long)]
        x: PathBuf,
    },
    /// [X, Y] = XY - YX
    Ad {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
}

enum AppError {
    Usage(String),
    Domain(String),
}

fn dom<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Domain(e.to_string())
}

fn usage<S: Into<String>>(msg: S) -> AppError {
    AppError::Usage(msg.into())
}

fn main() {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => print!("{out}"),
        Err(AppError::Domain(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(2);
        }
    }
}

fn run(cmd: Cmd) -> Result<String, AppError> {
    match cmd {
        Cmd::SymplecticBasis { omega } => cmd_symplectic_basis(&omega),
        Cmd::Poisson { f, g, n, json } => cmd_poisson(&f, &g, n, json),
        Cmd::Flow {
            hamiltonian,
            n,
            x0,
            t_final,
            step,
        } => cmd_flow(&hamiltonian, n, &x0, t_final, step),
        Cmd::Lie { op } => match op {
            LieOp::Exp { x } => {
                let m = exp_matrix(&read_cmat(&x)?).map_err(dom)?;
                Ok(format!("{}\n", report(&[("exp", cmat_json(&m))])))
            }
            LieOp::Ad { x, y } => {
                let m = ad(&read_cmat(&x)?, &read_cmat(&y)?).map_err(dom)?;
                Ok(format!("{}\n", report(&[("ad", cmat_json(&m))])))
            }
        },
        Cmd::Holonomy {
            a,
            loop_path,
            method,
            steps,
        } => {
            let (form, lp, meth) = transport_inputs(&a, &loop_path, &method)?;
            let g = holonomy(&form, &lp, meth, steps).map_err(dom)?;
            Ok(format!(
                "{}\n",
                report(&[
                    ("method", json!(method)),
                    ("steps", json!(steps)),
                    ("holonomy", cmat_json(&g)),
                ])
            ))
        }
        Cmd::Wilson {
            a,
            loop_path,
            method,
            steps,
        } => {
            let (form, lp, meth) = transport_inputs(&a, &loop_path, &method)?;
            let w = wilson_loop(&form, &lp, meth, steps).map_err(dom)?;
            Ok(format!(
                "{}\n",
                report(&[
                    ("method", json!(method)),
                    ("steps", json!(steps)),
                    ("value", json!([w.re, w.im])),
                ])
            ))
        }
        Cmd::Quantize { f, n, psi, json } => cmd_quantize(&f, n, &psi, json),
        Cmd::Geodesic {
            metric,
            x0,
            v0,
            t_final,
            step,
        } => cmd_geodesic(&metric, &x0, &v0, t_final, step),
        Cmd::Knot {
            pd,
            invariant,
            at_level,
            json,
        } => cmd_knot(&pd, &invariant, at_level, json),
    }
}

fn cmd_symplectic_basis(path: &Path) -> Result<String, AppError> {
    let rows: Vec<Vec<String>> = serde_json::from_str(&read(path)?).map_err(dom)?;
    let omega = QMatrix::from_string_rows(&rows).map_err(dom)?;
    let sb = symplectic_basis(&omega).map_err(dom)?;
    Ok(format!(
        "{}\n",
        report(&[
            ("kernel_dim", json!(sb.kernel_dim)),
            ("pairs", json!(sb.pairs)),
            ("basis", json!(sb.basis.to_string_rows())),
            ("normal_form", json!(sb.normal_form().to_string_rows())),
        ])
    ))
}

fn cmd_poisson(f: &str, g: &str, n: usize, as_json: bool) -> Result<String, AppError> {
    let bracket = poisson(&parse_expr(f)?, &parse_expr(g)?, n).map_err(dom)?;
    let text = bracket.to_string();
    if as_json {
        Ok(format!(
            "{}\n",
            report(&[
                ("f", json!(f)),
                ("g", json!(g)),
                ("n", json!(n)),
                ("value", json!(text)),
            ])
        ))
    } else {
        Ok(format!("{text}\n"))
    }
}

fn cmd_flow(h_src: &str, n: usize, x0: &str, t_final: f64, step: f64) -> Result<String, AppError> {
    let sys = HamiltonianSystem::new(n, parse_expr(h_src)?).map_err(dom)?;
    let rows = flow_integrate(&sys, &floats(x0)?, t_final, step).map_err(dom)?;
    Ok(csv(&standard_chart(n).names, &rows))
}

fn cmd_quantize(f: &str, n: usize, psi: &str, as_json: bool) -> Result<String, AppError> {
    let conn = PrequantConnection::standard(n);
    let out = prequant_op(&parse_expr(f)?, &conn, &parse_expr(psi)?).map_err(dom)?;
    let text = out.to_string();
    if as_json {
        Ok(format!(
            "{}\n",
            report(&[
                ("f", json!(f)),
                ("psi", json!(psi)),
                ("n", json!(n)),
                ("value", json!(text)),
            ])
        ))
    } else {
        Ok(format!("{text}\n"))
    }
}

fn cmd_geodesic(
    metric_path: &Path,
    x0: &str,
    v0: &str,
    t_final: f64,
    step: f64,
) -> Result<String, AppError> {
    let m = read_metric(metric_path)?;
    let rows = geodesic_integrate(&m, &floats(x0)?, &floats(v0)?, t_final, step).map_err(dom)?;
    let mut names = m.chart.names.clone();
    let vel: Vec<String> = m.chart.names.iter().map(|s| format!("d{s}")).collect();
    names.extend(vel);
    Ok(csv(&names, &rows))
}

fn cmd_knot(
    pd: &Path,
    invariant: &str,
    at_level: Option<u32>,
    as_json: bool,
) -> Result<String, AppError> {
    let spec: SkeinSpec = invariant
        .parse()
        .map_err(|_| usage(format!("unknown invariant {invariant:?}")))?;
    if at_level.is_some() && spec != SkeinSpec::Jones {
        return Err(usage("--at-level applies only to --invariant jones"));
    }
    let d = parse_pd(&read(pd)?).map_err(dom)?;
    let value = skein_evaluate(&d, spec).map_err(dom)?;
    let text = value.to_string();
    let level_value = match at_level {
        Some(k) => Some(jones_at_level(&d, k).map_err(dom)?),
        None => None,
    };
    if as_json {
        let mut pairs = vec![
            ("invariant", json!(invariant)),
            ("value", json!(text)),
            ("writhe", json!(writhe(&d))),
        ];
        if let Some(k) = at_level {
            pairs.push(("level", json!(k)));
            let v = level_value.expect("value computed with the level");
            pairs.push(("at_level", json!([v.re, v.im])));
        }
        Ok(format!("{}\n", report(&pairs)))
    } else {
        let mut out = format!("{text}\n");
        if let Some(k) = at_level {
            let v = level_value.expect("value computed with the level");
            let _ = writeln!(out, "at level {k}: {:.12}{:+.12}i", v.re, v.im);
        }
        Ok(out)
    }
}

// input decoding

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OneFormFile {
    chart: Vec<String>,
    /// comps[mu] is the matrix coefficient of dx_mu, entries as expr strings
    comps: Vec<Vec<Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolylineFile {
    chart: Vec<String>,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    chart: Vec<String>,
    g: Vec<Vec<String>>,
}

fn read(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|e| AppError::Domain(format!("{}: {e}", path.display())))
}

fn parse_expr(src: &str) -> Result<Expr, AppError> {
    parse(src).map_err(dom)
}

fn floats(csv: &str) -> Result<Vec<f64>, AppError> {
    csv.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| usage(format!("not a number: {t:?}")))
        })
        .collect()
}

fn parse_matrix(entries: &[Vec<String>]) -> Result<Vec<Vec<Expr>>, AppError> {
    entries
        .iter()
        .map(|row| row.iter().map(|s| parse_expr(s)).collect())
        .collect()
}

fn read_cmat(path: &Path) -> Result<CMat, AppError> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&read(path)?).map_err(dom)?;
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(AppError::Domain(format!(
            "{}: matrix must be rectangular and nonempty",
            path.display()
        )));
    }
    Ok(CMat::from_fn(r, c, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn read_metric(path: &Path) -> Result<Metric, AppError> {
    let file: MetricFile = serde_json::from_str(&read(path)?).map_err(dom)?;
    let chart = Chart::new(file.chart).map_err(dom)?;
    Metric::new(chart, parse_matrix(&file.g)?).map_err(dom)
}

fn transport_inputs(
    a_path: &Path,
    loop_path: &Path,
    method: &str,
) -> Result<(DiffForm, Loop, TransportMethod), AppError> {
    let meth: TransportMethod = method.parse().map_err(usage)?;
    let file: OneFormFile = serde_json::from_str(&read(a_path)?).map_err(dom)?;
    let chart = Chart::new(file.chart).map_err(dom)?;
    let comps = file
        .comps
        .iter()
        .map(|m| MatExpr::from_entries(parse_matrix(m)?).map_err(dom))
        .collect::<Result<Vec<_>, _>>()?;
    let form = DiffForm::one_form(chart.clone(), comps).map_err(dom)?;
    let lp: PolylineFile = serde_json::from_str(&read(loop_path)?).map_err(dom)?;
    let loop_chart = Chart::new(lp.chart).map_err(dom)?;
    let path = PathCurve::polyline(loop_chart, lp.points).map_err(dom)?;
    let lp = Loop::new(path).map_err(dom)?;
    Ok((form, lp, meth))
}

// output encoding

/// JSON object with keys in the given order (serde maps would sort them).
fn report(pairs: &[(&str, Value)]) -> String {
    let body: Vec<String> = pairs
        .iter()
        .map(|(k, v)| {
            format!(
                "{}:{}",
                serde_json::to_string(k).expect("key"),
                serde_json::to_string(v).expect("value")
            )
        })
        .collect();
    format!("{{{}}}", body.join(","))
}

fn cmat_json(m: &CMat) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

fn csv(names: &[String], rows: &[(f64, Vec<f64>)]) -> String {
    let mut out = String::from("t");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (t, vals) in rows {
        let _ = write!(out, "{t}");
        for v in vals {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
