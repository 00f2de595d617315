//! Real dynamics on the K3 surfaces
//! `X^t : (x1²+1)(x2²+1)(x3²+1) + t x1 x2 x3 = 2` in the affine chart of
//! `(P^1)^3`.
//!
//! Each coordinate enters the equation quadratically, so forgetting `x_j`
//! gives a double cover and swapping the two roots is the involution
//! `s_j`. The composite `f = s1 ∘ s2 ∘ s3` (with `s3` applied first) has
//! complex entropy `log(9 + 4√5)` for every `t != 0`; at `t = 0` it is the
//! antipodal map. Real entropy is estimated from the exponential growth of
//! the length of an iterated arc.
//!
//! For `|t| <= 1` the real locus is compact inside the chart: AM-GM gives
//! `|x1 x2 x3| <= 2 / (8 - |t|)`, hence every `|x_i| <= 1.14`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual tolerance for points accepted as lying on the surface.
pub const ON_SURFACE_TOL: f64 = 1e-9;
/// Residual targeted after a corrective Newton step.
pub const PROJECTED_TOL: f64 = 1e-12;
pub const DEFAULT_X_MAX: f64 = 10.0;
/// Bound on `max |x_i|` checked along orbits when `|t| <= 1`.
pub const REAL_LOCUS_BOUND: f64 = 1.5;
/// Distance of the seed parameter range from the branch points of the slice.
pub const SEED_MARGIN: f64 = 1e-3;

/// `log(9 + 4√5)`, the complex entropy of `f^t` for `t != 0`.
pub fn complex_entropy() -> f64 {
    (9.0 + 4.0 * 5f64.sqrt()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: [f64; 3],
    pub t: f64,
}

impl SurfacePoint {
    pub fn new(x1: f64, x2: f64, x3: f64, t: f64) -> Self {
        SurfacePoint { x: [x1, x2, x3], t }
    }

    pub fn dist(&self, other: &SurfacePoint) -> f64 {
        let d = [self.x[0] - other.x[0], self.x[1] - other.x[1], self.x[2] - other.x[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `(x1²+1)(x2²+1)(x3²+1) + t x1 x2 x3 - 2`.
pub fn residual(p: &SurfacePoint) -> f64 {
    let [a, b, c] = p.x;
    (a * a + 1.0) * (b * b + 1.0) * (c * c + 1.0) + p.t * a * b * c - 2.0
}

/// Gradient of the defining polynomial.
pub fn gradient(p: &SurfacePoint) -> [f64; 3] {
    let [a, b, c] = p.x;
    let (qa, qb, qc) = (a * a + 1.0, b * b + 1.0, c * c + 1.0);
    [
        2.0 * a * qb * qc + p.t * b * c,
        2.0 * b * qa * qc + p.t * a * c,
        2.0 * c * qa * qb + p.t * a * b,
    ]
}

fn others(j: usize) -> (usize, usize) {
    match j {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Vieta involution in coordinate `j ∈ {0, 1, 2}`: the other root of the
/// quadratic in `x_j`, `x_j ↦ -t x_k x_l / ((x_k²+1)(x_l²+1)) - x_j`.
pub fn involution(p: &SurfacePoint, j: usize, x_max: f64) -> Result<SurfacePoint> {
    if j > 2 {
        return Err(Error::Parameter(format!("axis index {j} out of range 0..=2")));
    }
    let r = residual(p);
    if r.is_nan() || r.abs() > ON_SURFACE_TOL {
        return Err(Error::OffSurface(r));
    }
    let (k, l) = others(j);
    let (xk, xl) = (p.x[k], p.x[l]);
    let a = (xk * xk + 1.0) * (xl * xl + 1.0);
    let mut out = *p;
    out.x[j] = -p.t * xk * xl / a - p.x[j];
    let r = residual(&out);
    if r.abs() > PROJECTED_TOL {
        let slope = 2.0 * out.x[j] * a + p.t * xk * xl;
        if slope != 0.0 {
            out.x[j] -= r / slope;
        }
    }
    if out.x[j].is_nan() || out.x[j].abs() > x_max {
        return Err(Error::LeftAffineWindow(out.x[j].abs()));
    }
    Ok(out)
}

/// `f = s1 ∘ s2 ∘ s3`.
pub fn f_map(p: &SurfacePoint, x_max: f64) -> Result<SurfacePoint> {
    let q = involution(p, 2, x_max)?;
    let q = involution(&q, 1, x_max)?;
    involution(&q, 0, x_max)
}

/// Orbit `p, f(p), ..., f^n(p)`.
pub fn orbit(p: &SurfacePoint, n: usize, x_max: f64) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(*p);
    for i in 0..n {
        out.push(f_map(&out[i], x_max)?);
    }
    Ok(out)
}

/// The curve `X^t ∩ {x3 = c}` parametrized by `x1`, upper branch in `x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSlice {
    pub t: f64,
    pub c: f64,
    lo: f64,
    hi: f64,
}

impl SeedSlice {
    pub fn new(t: f64, c: f64) -> Result<Self> {
        if c.is_nan() || c.abs() >= 1.0 {
            return Err(Error::Parameter(format!("seed slice x3 = {c} must satisfy |c| < 1")));
        }
        let mut s = SeedSlice { t, c, lo: 0.0, hi: 0.0 };
        if s.discriminant(0.0) <= 0.0 {
            return Err(Error::Parameter(format!("slice x3 = {c} has no real point over x1 = 0")));
        }
        let edge = |sign: f64| {
            // outermost |x1| with a real point: the discriminant changes sign there
            let (mut inside, mut outside) = (0.0f64, 2.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if s.discriminant(sign * mid) > 0.0 {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            sign * inside
        };
        let (lo, hi) = (edge(-1.0), edge(1.0));
        s.lo = lo + SEED_MARGIN;
        s.hi = hi - SEED_MARGIN;
        Ok(s)
    }

    fn discriminant(&self, u: f64) -> f64 {
        let a = (self.c * self.c + 1.0) * (u * u + 1.0);
        let b = self.t * self.c * u;
        b * b - 4.0 * a * (a - 2.0)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn point(&self, u: f64) -> SurfacePoint {
        if self.c == 0.0 {
            let x2 = (2.0 / (u * u + 1.0) - 1.0).max(0.0).sqrt();
            return SurfacePoint::new(u, x2, 0.0, self.t);
        }
        let a = (self.c * self.c + 1.0) * (u * u + 1.0);
        let b = self.t * self.c * u;
        let disc = (b * b - 4.0 * a * (a - 2.0)).max(0.0);
        SurfacePoint::new(u, (-b + disc.sqrt()) / (2.0 * a), self.c, self.t)
    }
}

/// Polyline on `X^t(R)` together with the seed parameters of its vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub t: f64,
    pub seed: SeedSlice,
    /// Number of times `f` has been applied to the seed.
    pub level: usize,
    pub params: Vec<f64>,
    pub points: Vec<SurfacePoint>,
}

impl Arc {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn max_gap(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).fold(0.0, f64::max)
    }
}

/// `m` points on the slice `x3 = 0`, uniform in `x1 ∈ [-1+δ, 1-δ]`.
pub fn seed_arc(t: f64, m: usize) -> Result<Arc> {
    seed_arc_on(SeedSlice::new(t, 0.0)?, m)
}

pub fn seed_arc_on(seed: SeedSlice, m: usize) -> Result<Arc> {
    if m < 16 {
        return Err(Error::Parameter(format!("seed arc needs at least 16 points, got {m}")));
    }
    let (lo, hi) = seed.range();
    let params: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let points = params.iter().map(|&u| seed.point(u)).collect();
    Ok(Arc { t: seed.t, seed, level: 0, params, points })
}

/// Parameters controlling arc iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterateOptions {
    pub eps: f64,
    /// Cap on the number of arc vertices.
    pub budget: usize,
    pub x_max: f64,
}

impl IterateOptions {
    pub fn new(eps: f64, budget: usize) -> Self {
        IterateOptions { eps, budget, x_max: DEFAULT_X_MAX }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    /// Midpoints inserted at each level (index = level).
    pub refinements: Vec<usize>,
    /// Vertex count at each level.
    pub points: Vec<usize>,
    /// Refinement stopped early because the budget was reached; the
    /// offending level is not reported in the length table.
    pub truncated: bool,
    /// Gaps left above `eps` because the parameter could not be split further.
    pub unresolved_gaps: usize,
}

fn trace(seed: &SeedSlice, u: f64, level: usize, x_max: f64) -> Result<SurfacePoint> {
    let mut p = seed.point(u);
    for _ in 0..level {
        p = f_map(&p, x_max)?;
    }
    Ok(p)
}

/// Bisect every gap longer than `eps`, re-tracing new vertices from the
/// seed. Returns the number of inserted vertices, or `None` on budget
/// exhaustion.
fn refine(arc: &mut Arc, opts: &IterateOptions, diag: &mut IterationDiagnostics) -> Result<Option<usize>> {
    let mut params = Vec::with_capacity(arc.params.len());
    let mut points = Vec::with_capacity(arc.points.len());
    let mut inserted = 0usize;
    let n = arc.params.len();
    for i in 0..n {
        params.push(arc.params[i]);
        points.push(arc.points[i]);
        if i + 1 == n {
            break;
        }
        // depth-first subdivision of [u_i, u_{i+1}], emitted in order
        let mut stack = vec![(arc.params[i], arc.points[i], arc.params[i + 1], arc.points[i + 1])];
        while let Some((ua, pa, ub, pb)) = stack.pop() {
            if pa.dist(&pb) <= opts.eps {
                if ub != arc.params[i + 1] {
                    params.push(ub);
                    points.push(pb);
                }
                continue;
            }
            let um = 0.5 * (ua + ub);
            if um <= ua || um >= ub {
                diag.unresolved_gaps += 1;
                if ub != arc.params[i + 1] {
                    params.push(ub);
                    points.push(pb);
                }
                continue;
            }
            if n + inserted >= opts.budget {
                return Ok(None);
            }
            let pm = trace(&arc.seed, um, arc.level, opts.x_max)?;
            inserted += 1;
            stack.push((um, pm, ub, pb));
            stack.push((ua, pa, um, pm));
        }
    }
    arc.params = params;
    arc.points = points;
    Ok(Some(inserted))
}

/// Push the arc forward `n` times, refining to gaps of at most `eps`
/// after every step. Returns the final arc and the lengths `L_0, ..., L_k`
/// of every fully refined level (`k = n` unless the budget ran out).
pub fn iterate_arc(arc: &Arc, n: usize, opts: &IterateOptions) -> Result<(Arc, Vec<f64>, IterationDiagnostics)> {
    if n < 1 {
        return Err(Error::Parameter("iteration count must be at least 1".into()));
    }
    if opts.eps.is_nan() || opts.eps <= 0.0 {
        return Err(Error::Parameter(format!("eps must be positive, got {}", opts.eps)));
    }
    let mut diag = IterationDiagnostics::default();
    let mut arc = arc.clone();
    let mut lengths = Vec::with_capacity(n + 1);
    for level in 0..=n {
        if level > 0 {
            arc.points = arc.points.iter().map(|p| f_map(p, opts.x_max)).collect::<Result<_>>()?;
            arc.level = level;
        }
        match refine(&mut arc, opts, &mut diag)? {
            Some(k) => {
                if arc.t.abs() <= 1.0 {
                    let m = arc.points.iter().fold(0.0f64, |m, p| m.max(p.max_abs()));
                    if m > REAL_LOCUS_BOUND {
                        return Err(Error::UnboundedRealLocus(m));
                    }
                }
                diag.refinements.push(k);
                diag.points.push(arc.points.len());
                lengths.push(arc.length());
            }
            None => {
                diag.truncated = true;
                break;
            }
        }
    }
    Ok((arc, lengths, diag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub t: f64,
    /// `(n, L_n)`.
    pub lengths: Vec<(usize, f64)>,
    /// Growth rate of `log L_n`, clamped at 0.
    pub h_estimate: f64,
    /// `h_estimate / log(9 + 4√5)`, an upper bound for the concordance.
    pub alpha_upper: f64,
    /// Unclamped least-squares slope.
    pub raw_slope: f64,
    /// Seed slice `x3 = c` the record was computed from.
    pub seed_c: f64,
    pub diagnostics: IterationDiagnostics,
}

/// Settings for [`entropy_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub n_max: usize,
    pub eps: f64,
    pub budget: usize,
    pub seed_points: usize,
    pub seed_c: f64,
    pub x_max: f64,
}

impl EstimateOptions {
    pub fn new(n_max: usize, eps: f64, budget: usize) -> Self {
        EstimateOptions { n_max, eps, budget, seed_points: 64, seed_c: 0.0, x_max: DEFAULT_X_MAX }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Numerical real entropy of `f^t` from arc-length growth, fitted over
/// `n ∈ [⌈n_max/3⌉, n_max]`.
pub fn entropy_estimate(t: f64, opts: &EstimateOptions) -> Result<GrowthRecord> {
    if opts.n_max < 2 || opts.eps.is_nan() || opts.eps <= 0.0 || opts.budget == 0 {
        return Err(Error::Parameter("n_max >= 2, eps > 0 and budget > 0 are required".into()));
    }
    let seed = seed_arc_on(SeedSlice::new(t, opts.seed_c)?, opts.seed_points)?;
    let iter_opts = IterateOptions { eps: opts.eps, budget: opts.budget, x_max: opts.x_max };
    let (_, lengths, diagnostics) = iterate_arc(&seed, opts.n_max, &iter_opts)?;
    let start = opts.n_max.div_ceil(3);
    let window: Vec<(f64, f64)> = lengths
        .iter()
        .enumerate()
        .filter(|(n, l)| *n >= start && **l > 0.0)
        .map(|(n, l)| (n as f64, l.ln()))
        .collect();
    if window.len() < 3 {
        return Err(Error::TooFewLengths(window.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = window.into_iter().unzip();
    let raw_slope = ls_slope(&xs, &ys);
    let h_estimate = raw_slope.max(0.0);
    Ok(GrowthRecord {
        t,
        lengths: lengths.into_iter().enumerate().collect(),
        h_estimate,
        alpha_upper: h_estimate / complex_entropy(),
        raw_slope,
        seed_c: opts.seed_c,
        diagnostics,
    })
}

/// Best (largest) estimate over several seed slices.
pub fn entropy_estimate_slices(t: f64, slices: &[f64], opts: &EstimateOptions) -> Result<GrowthRecord> {
    let mut best: Option<GrowthRecord> = None;
    for &c in slices {
        let rec = entropy_estimate(t, &EstimateOptions { seed_c: c, ..*opts })?;
        if best.as_ref().is_none_or(|b| rec.h_estimate > b.h_estimate) {
            best = Some(rec);
        }
    }
    best.ok_or_else(|| Error::Parameter("no seed slices given".into()))
}

/// Estimates for several parameters, computed in parallel and returned in
/// input order.
pub fn sweep(ts: &[f64], slices: &[f64], opts: &EstimateOptions) -> Result<Vec<GrowthRecord>> {
    ts.par_iter().map(|&t| entropy_estimate_slices(t, slices, opts)).collect()
}
