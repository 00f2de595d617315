//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a certificate failed or a computation was
//! truncated, 2 invalid arguments or input.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::Ratio;
use serde_json::{json, Value};

use concordance_lab::crofton::{self, ProjCurve};
use concordance_lab::fdomain::{self, compose_class, decompose};
use concordance_lab::lattice::lehmer_bound;
use concordance_lab::ns_models::{composed_entropy, model_by_name};
use concordance_lab::torus::{self, line_class, TorusClass};
use concordance_lab::vieta::{self, EstimateOptions, SurfacePoint};
use concordance_lab::Error;

const THREADS_ENV: &str = "CONCORDANCE_LAB_THREADS";

#[derive(Parser)]
#[command(name = "concordance-lab", version, about = "Entropy, concordance and length computations for real algebraic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed for Monte Carlo commands
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output format (each command has its own default)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy log λ of the automorphism given by a word in a model's
    /// covering involutions, λ the spectral radius on Néron–Severi
    Entropy {
        /// triple-quadric or wehler
        #[arg(long)]
        model: String,
        /// Comma-separated 1-based involution indices, rightmost applied first
        #[arg(long, value_delimiter = ',', required = true)]
        word: Vec<usize>,
    },
    /// Entropy lower bound α · log λ10 from a concordance lower bound α,
    /// λ10 the largest root of Lehmer's polynomial
    LehmerBound {
        /// Concordance lower bound in [0, 1]
        #[arg(long)]
        alpha: f64,
    },
    /// Built-in Néron–Severi models
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Abelian surface E × E with E = C/(Z + iyZ)
    Torus {
        #[command(subcommand)]
        action: TorusAction,
    },
    /// Fundamental domain of a hyperbolic automorphism acting on an ample cone
    Fdomain {
        #[command(subcommand)]
        action: FdomainAction,
    },
    /// Real dynamics of f = s1∘s2∘s3 on (x1²+1)(x2²+1)(x3²+1) + t·x1x2x3 = 2
    Vieta {
        #[command(subcommand)]
        action: VietaAction,
    },
    /// Cauchy–Crofton Monte Carlo length of a curve in P^d(R), with the
    /// Fubini–Study metric normalized so that a line has length π
    Crofton(CroftonArgs),
}

#[derive(Subcommand)]
enum ModelAction {
    /// Print the gram matrix and involutions of a model
    Dump {
        #[arg(long)]
        model: String,
    },
}

#[derive(Subcommand)]
enum TorusAction {
    /// Certify mvol_R(θ) ≥ y^{-1/2} vol_C(θ)^{1/2} for every ample class
    /// θ = αH + βV + γΔ with |α|,|β|,|γ| ≤ max-coord, by writing θ as a
    /// nonnegative combination of three rational line classes
    Certify {
        /// Imaginary part of the lattice parameter, e.g. 1, 2 or 1/2
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 5)]
        max_coord: i64,
    },
}

#[derive(Subcommand)]
enum FdomainAction {
    /// Write f^{-n}(θ) = k1 θ1 + k2 θ2 (+ p_j) with f^{-n}(θ) in the domain
    /// between θ1 and f(θ1)
    Decompose {
        /// Only wehler carries a rank-2 cone basis
        #[arg(long, default_value = "wehler")]
        model: String,
        /// Class coordinates, comma-separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        theta: Vec<i64>,
    },
}

#[derive(Subcommand)]
enum VietaAction {
    /// Arc-length growth rates h and the bounds α ≤ h / log(9+4√5)
    Sweep {
        /// Comma-separated parameters t
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Maximal distance between consecutive arc points
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Maximal number of arc points
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        /// Seed curves x3 = c; the largest growth rate is reported
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        seed_slices: Vec<f64>,
        /// Initial number of points on each seed curve
        #[arg(long, default_value_t = 64)]
        seed_points: usize,
    },
    /// Orbit f^k(p) for k = 0..n
    Orbit {
        /// Starting point x1,x2,x3 on the surface
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Args)]
struct CroftonArgs {
    /// line, conic, two-lines, or a curve file (one homogeneous point per
    /// line, blank lines between components, `# closed=true` and
    /// `# degree=n` directives)
    #[arg(long)]
    curve: String,
    /// Projective dimension of the ambient space
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Points per component for built-in curves
    #[arg(long, default_value_t = 1024)]
    points: usize,
    /// Compare the length with degree · π
    #[arg(long)]
    degree: Option<u32>,
    /// Write running estimates per sampling block to this CSV file
    #[arg(long)]
    convergence: Option<PathBuf>,
}

/// A command's result in both serializations.
struct Report {
    json: Value,
    csv: Csv,
    /// Exit with status 1.
    failed: bool,
}

struct Csv {
    schema: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn render(&self) -> String {
        let mut s = format!("# schema: {}\n{}\n", self.schema, self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

fn parse_y(s: &str) -> Result<f64, Error> {
    let bad = || Error::Parameter(format!("cannot parse y = '{s}'"));
    let y = if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        let r = Ratio::new(p, q);
        *r.numer() as f64 / *r.denom() as f64
    } else {
        s.trim().parse().map_err(|_| bad())?
    };
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Parameter(format!("y must be positive, got {s}")));
    }
    Ok(y)
}

fn cmd_entropy(model: &str, word: &[usize]) -> Result<Report, Error> {
    let m = model_by_name(model)?;
    let e = composed_entropy(&m, word)?;
    let word_str = word.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ");
    Ok(Report {
        json: json!({
            "schema": "entropy/v1",
            "model": m.name,
            "word": word,
            "log_lambda": e.value,
            "lambda": e.radius,
            "certified": e.certified,
        }),
        csv: Csv {
            schema: "entropy/v1",
            header: vec!["model", "word", "log_lambda", "lambda", "certified"],
            rows: vec![vec![m.name.clone(), word_str, e.value.to_string(), e.radius.to_string(), e.certified.to_string()]],
        },
        failed: false,
    })
}

fn cmd_lehmer(alpha: f64) -> Result<Report, Error> {
    let b = lehmer_bound(alpha)?;
    Ok(Report {
        json: json!({
            "schema": "lehmer-bound/v1",
            "alpha": b.alpha,
            "lehmer_number": b.lehmer_number,
            "lehmer_log": b.lehmer_log,
            "bound": b.bound,
            "bound_literal": b.bound_literal,
        }),
        csv: Csv {
            schema: "lehmer-bound/v1",
            header: vec!["alpha", "lehmer_number", "lehmer_log", "bound", "bound_literal"],
            rows: vec![vec![
                b.alpha.to_string(),
                b.lehmer_number.to_string(),
                b.lehmer_log.to_string(),
                b.bound.to_string(),
                b.bound_literal.to_string(),
            ]],
        },
        failed: false,
    })
}

fn cmd_model_dump(model: &str) -> Result<Report, Error> {
    let m = model_by_name(model)?;
    let mut json = m.to_json();
    json["schema"] = json!("model/v1");
    let rows = m
        .gram
        .matrix()
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let entries = r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            vec!["gram".to_string(), m.basis_labels[i].clone(), entries]
        })
        .chain(m.involutions.iter().enumerate().flat_map(|(k, s)| {
            let labels = m.basis_labels.clone();
            s.matrix().rows().into_iter().enumerate().map(move |(i, r)| {
                let entries = r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
                vec![format!("s{}", k + 1), labels[i].clone(), entries]
            })
        }))
        .collect();
    Ok(Report { json, csv: Csv { schema: "model/v1", header: vec!["matrix", "row", "entries"], rows }, failed: false })
}

fn cmd_certify(y: &str, max_coord: i64) -> Result<Report, Error> {
    if max_coord < 1 {
        return Err(Error::Parameter("max-coord must be at least 1".into()));
    }
    let yv = parse_y(y)?;
    let certs = torus::certificate_sweep(max_coord, yv)?;
    let mut failed = false;
    let mut rows = Vec::with_capacity(certs.len());
    let mut items = Vec::with_capacity(certs.len());
    for c in &certs {
        let mut sum = [0i64; 3];
        for (k, line) in c.k.iter().zip(c.lines.iter()) {
            let lc = line_class(*line).coords;
            for i in 0..3 {
                sum[i] += k * lc[i];
            }
        }
        let reconstructs = TorusClass { coords: sum } == c.theta;
        failed |= !(c.holds && reconstructs);
        let rhs = c.c * c.vol_c.sqrt();
        let [a, b, g] = c.theta.coords;
        rows.push(vec![
            a.to_string(),
            b.to_string(),
            g.to_string(),
            yv.to_string(),
            c.k[0].to_string(),
            c.k[1].to_string(),
            c.k[2].to_string(),
            c.lines.iter().map(|s| format!("{}/{}", s.a(), s.b())).collect::<Vec<_>>().join(" "),
            c.mvol_r_lower.to_string(),
            c.vol_c.to_string(),
            rhs.to_string(),
            c.ratio().to_string(),
            c.holds.to_string(),
            reconstructs.to_string(),
        ]);
        items.push(json!({
            "theta": c.theta.coords,
            "k": c.k,
            "g": c.g,
            "slopes": c.lines.iter().map(|s| [s.a(), s.b()]).collect::<Vec<_>>(),
            "mvol_r_lower": c.mvol_r_lower,
            "vol_c": c.vol_c,
            "c_sqrt_vol_c": rhs,
            "holds": c.holds,
            "reconstructs": reconstructs,
        }));
    }
    Ok(Report {
        json: json!({ "schema": "torus-certify/v1", "y": yv, "max_coord": max_coord, "certificates": items }),
        csv: Csv {
            schema: "torus-certify/v1",
            header: vec![
                "alpha", "beta", "gamma", "y", "k1", "k2", "k3", "slopes", "mvol_r_lower", "vol_c", "c_sqrt_vol_c",
                "ratio", "holds", "reconstructs",
            ],
            rows,
        },
        failed,
    })
}

fn cmd_decompose(model: &str, theta: &[i64]) -> Result<Report, Error> {
    let m = model_by_name(model)?;
    if m.name != "wehler" {
        return Err(Error::Parameter(format!("model '{}' has no rank-2 cone basis", m.name)));
    }
    let theta: [i64; 2] = theta.try_into().map_err(|_| Error::DimensionMismatch { expected: 2, got: theta.len() })?;
    let cb = fdomain::wehler_cone_basis();
    let d = decompose(&cb, theta)?;
    let back = compose_class(&cb, &d)?;
    let point = match d.j {
        Some(j) => Some(fdomain::parallelogram_points(&cb)?[j]),
        None => None,
    };
    let failed = back != theta;
    let fmt_opt = |v: Option<String>| v.unwrap_or_default();
    Ok(Report {
        json: json!({
            "schema": "fdomain-decompose/v1",
            "model": m.name,
            "theta": theta,
            "theta1": cb.theta1(),
            "theta2": cb.theta2(),
            "n": d.n,
            "k1": d.k1,
            "k2": d.k2,
            "j": d.j,
            "point": point,
            "reconstructed": back,
        }),
        csv: Csv {
            schema: "fdomain-decompose/v1",
            header: vec!["coord1", "coord2", "n", "k1", "k2", "j", "point", "reconstructed"],
            rows: vec![vec![
                theta[0].to_string(),
                theta[1].to_string(),
                d.n.to_string(),
                d.k1.to_string(),
                d.k2.to_string(),
                fmt_opt(d.j.map(|j| j.to_string())),
                fmt_opt(point.map(|p| format!("{} {}", p[0], p[1]))),
                format!("{} {}", back[0], back[1]),
            ]],
        },
        failed,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    ts: &[f64],
    n_max: usize,
    eps: f64,
    budget: usize,
    slices: &[f64],
    seed_points: usize,
) -> Result<Report, Error> {
    let opts = EstimateOptions { seed_points, ..EstimateOptions::new(n_max, eps, budget) };
    let recs = vieta::sweep(ts, slices, &opts)?;
    let mut rows = Vec::new();
    let mut failed = false;
    for r in &recs {
        failed |= r.diagnostics.truncated;
        let flag = if r.diagnostics.truncated { "truncated" } else { "ok" };
        for (n, l) in &r.lengths {
            rows.push(vec![
                r.t.to_string(),
                n.to_string(),
                l.to_string(),
                r.h_estimate.to_string(),
                r.alpha_upper.to_string(),
                r.seed_c.to_string(),
                r.diagnostics.points[*n].to_string(),
                flag.to_string(),
            ]);
        }
    }
    Ok(Report {
        json: json!({ "schema": "vieta-sweep/v1", "records": recs }),
        csv: Csv {
            schema: "vieta-sweep/v1",
            header: vec!["t", "n", "L_n", "h_estimate", "alpha_upper", "seed_c", "points", "flags"],
            rows,
        },
        failed,
    })
}

fn cmd_orbit(point: &[f64], t: f64, n: usize) -> Result<Report, Error> {
    let [x1, x2, x3]: [f64; 3] =
        point.try_into().map_err(|_| Error::DimensionMismatch { expected: 3, got: point.len() })?;
    let orbit = vieta::orbit(&SurfacePoint::new(x1, x2, x3, t), n, vieta::DEFAULT_X_MAX)?;
    let rows = orbit
        .iter()
        .enumerate()
        .map(|(k, p)| {
            vec![
                k.to_string(),
                p.x[0].to_string(),
                p.x[1].to_string(),
                p.x[2].to_string(),
                vieta::residual(p).to_string(),
            ]
        })
        .collect();
    Ok(Report {
        json: json!({ "schema": "vieta-orbit/v1", "t": t, "orbit": orbit.iter().map(|p| p.x).collect::<Vec<_>>() }),
        csv: Csv { schema: "vieta-orbit/v1", header: vec!["n", "x1", "x2", "x3", "residual"], rows },
        failed: false,
    })
}

fn cmd_crofton(a: &CroftonArgs, seed: u64) -> Result<Report, Error> {
    let curve: ProjCurve = match a.curve.as_str() {
        "line" => crofton::projective_line(a.d, a.points)?,
        "conic" => crofton::unit_circle_conic(a.d, a.points)?,
        "two-lines" => crofton::two_lines(a.d, a.points)?,
        path => crofton::load_curve(Path::new(path))?,
    };
    let res = crofton::crofton_length(&curve, a.samples, seed)?;
    let direct = crofton::fs_length(&curve);
    let degree = a.degree.or(curve.degree_hint());
    let report = match degree {
        Some(deg) => Some(crofton::degree_bound_report(&curve, deg, a.samples, seed)?),
        None => None,
    };
    if let Some(path) = &a.convergence {
        let rows = crofton::crofton_convergence(&curve, a.samples, seed)?
            .iter()
            .enumerate()
            .map(|(b, r)| vec![b.to_string(), r.samples.to_string(), r.estimate.to_string(), r.stderr.to_string()])
            .collect();
        let csv = Csv { schema: "crofton-convergence/v1", header: vec!["block", "samples", "estimate", "stderr"], rows };
        write_file(path, &csv.render())?;
    }
    let failed = report.is_some_and(|r| !r.satisfied);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    Ok(Report {
        json: json!({
            "schema": "crofton/v1",
            "curve": a.curve,
            "d": curve.ambient_dim(),
            "samples": res.samples,
            "seed": res.seed,
            "estimate": res.estimate,
            "stderr": res.stderr,
            "fs_length": direct,
            "degenerate_segments": crofton::degenerate_segments(&curve),
            "degree_report": report,
        }),
        csv: Csv {
            schema: "crofton/v1",
            header: vec!["curve", "d", "samples", "seed", "estimate", "stderr", "fs_length", "bound", "satisfied"],
            rows: vec![vec![
                a.curve.clone(),
                curve.ambient_dim().to_string(),
                res.samples.to_string(),
                res.seed.to_string(),
                res.estimate.to_string(),
                res.stderr.to_string(),
                direct.to_string(),
                opt(report.map(|r| r.bound)),
                report.map(|r| r.satisfied.to_string()).unwrap_or_default(),
            ]],
        },
        failed,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display())))
}

/// Computational failures exit with 1, invalid input with 2.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::Overflow
        | Error::ReductionBudget(_)
        | Error::LeftAffineWindow(_)
        | Error::UnboundedRealLocus(_)
        | Error::TooFewLengths(_) => 1,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Parameter(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(Report, Format), Error> {
    configure_threads()?;
    let (report, default) = match &cli.command {
        Command::Entropy { model, word } => (cmd_entropy(model, word)?, Format::Json),
        Command::LehmerBound { alpha } => (cmd_lehmer(*alpha)?, Format::Json),
        Command::Model { action: ModelAction::Dump { model } } => (cmd_model_dump(model)?, Format::Json),
        Command::Torus { action: TorusAction::Certify { y, max_coord } } => (cmd_certify(y, *max_coord)?, Format::Csv),
        Command::Fdomain { action: FdomainAction::Decompose { model, theta } } => {
            (cmd_decompose(model, theta)?, Format::Json)
        }
        Command::Vieta { action: VietaAction::Sweep { t_list, n_max, eps, budget, seed_slices, seed_points } } => {
            (cmd_sweep(t_list, *n_max, *eps, *budget, seed_slices, *seed_points)?, Format::Csv)
        }
        Command::Vieta { action: VietaAction::Orbit { point, t, n } } => (cmd_orbit(point, *t, *n)?, Format::Csv),
        Command::Crofton(a) => (cmd_crofton(a, cli.common.seed)?, Format::Json),
    };
    Ok((report, cli.common.format.unwrap_or(default)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, format)) => {
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report.json).expect("JSON values serialize");
                    s.push('\n');
                    s
                }
                Format::Csv => report.csv.render(),
            };
            let written = match &cli.common.out {
                Some(path) => write_file(path, &text),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| Error::Parameter(format!("cannot write output: {e}"))),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(u8::from(report.failed))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
