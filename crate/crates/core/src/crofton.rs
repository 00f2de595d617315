//! Monte Carlo Cauchy–Crofton lengths of curves in real projective space.
//!
//! Points of `P^d(R)` are represented by unit vectors in `R^{d+1}` and the
//! Fubini–Study metric is the quotient of the round unit sphere, so a
//! projective line has length `π`. For a random hyperplane `u^⊥` drawn
//! from the rotation-invariant measure, `length = π · E[#(curve ∩ u^⊥)]`.
//!
//! Sampling is split into fixed-size blocks. Block `b` draws from the
//! ChaCha8 stream `(seed, b)` and contributes integer count sums, so the
//! result depends only on `(seed, samples)` and not on scheduling.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperplanes per random stream.
pub const BLOCK_SIZE: usize = 4096;
pub const MIN_SAMPLES: usize = 100;
const UNIT_TOL: f64 = 1e-12;

/// Polyline in `P^d(R)`, possibly made of several components.
///
/// Representatives are unit vectors, sign-aligned so consecutive points of
/// a component have positive dot product. A closed component also joins its
/// last point to its first (or to the antipode of the first, whichever is
/// nearer on the sphere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjCurve {
    dim: usize,
    points: Vec<Vec<f64>>,
    starts: Vec<usize>,
    closed: bool,
    degree_hint: Option<u32>,
    /// Row-major copy of `points` for the counting loop.
    flat: Vec<f64>,
    /// Per component: the closing segment joins the last point to minus the first.
    closing_flip: Vec<bool>,
}

impl ProjCurve {
    /// Single component through `points` in `R^{d+1}`; vectors are normalized.
    pub fn new(points: Vec<Vec<f64>>, closed: bool, degree_hint: Option<u32>) -> Result<Self> {
        Self::from_components(vec![points], closed, degree_hint)
    }

    pub fn from_components(components: Vec<Vec<Vec<f64>>>, closed: bool, degree_hint: Option<u32>) -> Result<Self> {
        if degree_hint == Some(0) {
            return Err(Error::InvalidCurve("degree hint must be positive".into()));
        }
        let dim = components.iter().flatten().next().map_or(0, |p| p.len());
        if dim == 1 {
            return Err(Error::InvalidCurve("points need at least two homogeneous coordinates".into()));
        }
        let mut points = Vec::new();
        let mut starts = Vec::new();
        for comp in components.into_iter().filter(|c| !c.is_empty()) {
            starts.push(points.len());
            let mut prev: Option<Vec<f64>> = None;
            for p in comp {
                if p.len() != dim {
                    return Err(Error::InvalidCurve(format!("point of length {} in a curve of length {dim}", p.len())));
                }
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidCurve("non-finite coordinate".into()));
                }
                let norm = dot(&p, &p).sqrt();
                if norm < UNIT_TOL {
                    return Err(Error::InvalidCurve("zero vector is not a projective point".into()));
                }
                let mut q: Vec<f64> = p.iter().map(|v| v / norm).collect();
                if let Some(prev) = &prev {
                    if dot(prev, &q) < 0.0 {
                        q.iter_mut().for_each(|v| *v = -*v);
                    }
                }
                prev = Some(q.clone());
                points.push(q);
            }
        }
        let flat = points.concat();
        let mut c = ProjCurve { dim, points, starts, closed, degree_hint, flat, closing_flip: Vec::new() };
        c.closing_flip = c.components().map(|comp| dot(&comp[comp.len() - 1], &comp[0]) < 0.0).collect();
        Ok(c)
    }

    /// Projective dimension `d`; 0 for the empty curve.
    pub fn ambient_dim(&self) -> usize {
        self.dim.saturating_sub(1)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn degree_hint(&self) -> Option<u32> {
        self.degree_hint
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = &[Vec<f64>]> {
        let ends = self.starts.iter().skip(1).copied().chain(std::iter::once(self.points.len()));
        self.starts.iter().zip(ends).map(|(&s, e)| &self.points[s..e])
    }

    /// Consecutive pairs of points, including closing segments.
    fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        let closed = self.closed;
        self.components().flat_map(move |comp| {
            let inner = comp.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice()));
            let closing = (closed && comp.len() > 1).then(|| (comp[comp.len() - 1].as_slice(), comp[0].as_slice()));
            inner.chain(closing)
        })
    }

    /// Apply a linear map given as row-major `(d+1)×(d+1)` entries.
    pub fn transform(&self, m: &[f64]) -> Result<Self> {
        if m.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim * self.dim, got: m.len() });
        }
        let comps = self
            .components()
            .map(|c| c.iter().map(|p| (0..self.dim).map(|i| dot(&m[i * self.dim..(i + 1) * self.dim], p)).collect()).collect())
            .collect();
        ProjCurve::from_components(comps, self.closed, self.degree_hint)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angle between the lines through unit vectors `a` and `b`, in `[0, π/2]`.
fn fs_distance(a: &[f64], b: &[f64]) -> f64 {
    let s = if dot(a, b) < 0.0 { -1.0 } else { 1.0 };
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        diff += (x - s * y) * (x - s * y);
        sum += (x + s * y) * (x + s * y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Fubini–Study length of the polyline.
pub fn fs_length(c: &ProjCurve) -> f64 {
    c.segments().map(|(a, b)| fs_distance(a, b)).sum()
}

/// Number of segments joining identical projective points.
pub fn degenerate_segments(c: &ProjCurve) -> usize {
    c.segments().filter(|(a, b)| fs_distance(a, b) == 0.0).count()
}

/// Normal of a uniformly random hyperplane in `P^d`: a normalized
/// standard Gaussian vector in `R^{d+1}`.
pub fn sample_hyperplane<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..=d).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Sign changes of `<u, p>` along the lifted curve, or `None` when some
/// vertex lies exactly on the hyperplane.
pub fn intersection_count(c: &ProjCurve, u: &[f64]) -> Option<u32> {
    let dim = c.dim;
    let at = |i: usize| -> f64 {
        let p = &c.flat[i * dim..(i + 1) * dim];
        let mut s = 0.0;
        for k in 0..dim {
            s += u[k] * p[k];
        }
        s
    };
    let mut count = 0;
    for (ci, &start) in c.starts.iter().enumerate() {
        let end = c.starts.get(ci + 1).copied().unwrap_or(c.points.len());
        let first = at(start);
        if first == 0.0 {
            return None;
        }
        let mut prev = first;
        for i in start + 1..end {
            let d = at(i);
            if d == 0.0 {
                return None;
            }
            if (d < 0.0) != (prev < 0.0) {
                count += 1;
            }
            prev = d;
        }
        if c.closed && end - start > 1 {
            let wrap = if c.closing_flip[ci] { -first } else { first };
            if (wrap < 0.0) != (prev < 0.0) {
                count += 1;
            }
        }
    }
    Some(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CroftonResult {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct BlockSums {
    n: u64,
    sum: u64,
    sum_sq: u64,
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn run_block(c: &ProjCurve, seed: u64, block: usize, n: usize) -> BlockSums {
    let mut rng = block_rng(seed, block);
    let d = c.ambient_dim();
    let mut s = BlockSums::default();
    for _ in 0..n {
        let k = loop {
            let u = sample_hyperplane(&mut rng, d);
            if let Some(k) = intersection_count(c, &u) {
                break k as u64;
            }
        };
        s.n += 1;
        s.sum += k;
        s.sum_sq += k * k;
    }
    s
}

fn block_sums(c: &ProjCurve, n_samples: usize, seed: u64) -> Vec<BlockSums> {
    let blocks = n_samples.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|b| run_block(c, seed, b, BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE)))
        .collect()
}

fn summarize(s: BlockSums, seed: u64) -> CroftonResult {
    let n = s.n as f64;
    let mean = s.sum as f64 / n;
    let var = if s.n > 1 { ((s.sum_sq as f64) - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    CroftonResult { estimate: PI * mean, stderr: PI * (var / n).sqrt(), samples: s.n as usize, seed }
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Parameter(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    Ok(())
}

/// `π · mean(#(c ∩ u^⊥))` over `n_samples` random hyperplanes.
pub fn crofton_length(c: &ProjCurve, n_samples: usize, seed: u64) -> Result<CroftonResult> {
    check_samples(n_samples)?;
    if c.is_empty() {
        return Ok(CroftonResult { estimate: 0.0, stderr: 0.0, samples: n_samples, seed });
    }
    let total = block_sums(c, n_samples, seed).into_iter().fold(BlockSums::default(), |a, b| BlockSums {
        n: a.n + b.n,
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
    });
    Ok(summarize(total, seed))
}

/// Running estimate after each block.
pub fn crofton_convergence(c: &ProjCurve, n_samples: usize, seed: u64) -> Result<Vec<CroftonResult>> {
    check_samples(n_samples)?;
    if c.is_empty() {
        return Ok(vec![CroftonResult { estimate: 0.0, stderr: 0.0, samples: n_samples, seed }]);
    }
    let mut acc = BlockSums::default();
    Ok(block_sums(c, n_samples, seed)
        .into_iter()
        .map(|b| {
            acc = BlockSums { n: acc.n + b.n, sum: acc.sum + b.sum, sum_sq: acc.sum_sq + b.sum_sq };
            summarize(acc, seed)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeBoundReport {
    pub degree: u32,
    pub length_mc: f64,
    pub stderr: f64,
    pub length_direct: f64,
    /// `degree · π`.
    pub bound: f64,
    pub satisfied: bool,
    /// `bound - length_direct`.
    pub slack: f64,
}

/// Compare the length of a degree `deg` curve with `deg · vol(P^1)`.
pub fn degree_bound_report(c: &ProjCurve, deg: u32, n_samples: usize, seed: u64) -> Result<DegreeBoundReport> {
    if deg == 0 {
        return Err(Error::Parameter("degree must be positive".into()));
    }
    if let Some(h) = c.degree_hint() {
        if h != deg {
            return Err(Error::InvalidCurve(format!("curve carries degree hint {h}, report asked for {deg}")));
        }
    }
    let mc = crofton_length(c, n_samples, seed)?;
    let length_direct = fs_length(c);
    let bound = deg as f64 * PI;
    let satisfied = length_direct <= bound * (1.0 + 1e-9) && mc.estimate <= bound + 4.0 * mc.stderr;
    Ok(DegreeBoundReport {
        degree: deg,
        length_mc: mc.estimate,
        stderr: mc.stderr,
        length_direct,
        bound,
        satisfied,
        slack: bound - length_direct,
    })
}

fn basis_point(d: usize, coords: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; d + 1];
    for &(i, x) in coords {
        v[i] = x;
    }
    v
}

fn line_points(d: usize, i: usize, j: usize, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let a = PI * k as f64 / m as f64;
            basis_point(d, &[(i, a.cos()), (j, a.sin())])
        })
        .collect()
}

fn check_builder(d: usize, min_d: usize, m: usize) -> Result<()> {
    if d < min_d {
        return Err(Error::Parameter(format!("ambient dimension must be at least {min_d}, got {d}")));
    }
    if m < 4 {
        return Err(Error::Parameter(format!("need at least 4 sample points, got {m}")));
    }
    Ok(())
}

/// The line `P(span(e0, e1))` in `P^d`, sampled at `m` points.
pub fn projective_line(d: usize, m: usize) -> Result<ProjCurve> {
    check_builder(d, 1, m)?;
    ProjCurve::new(line_points(d, 0, 1, m), true, Some(1))
}

/// The conic `x0² + x1² = x2²` in `P^d`, i.e. the unit circle of the chart
/// `x2 = 1`, sampled at `m` points. Its length is `π√2`.
pub fn unit_circle_conic(d: usize, m: usize) -> Result<ProjCurve> {
    check_builder(d, 2, m)?;
    let pts = (0..m)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / m as f64;
            basis_point(d, &[(0, a.cos()), (1, a.sin()), (2, 1.0)])
        })
        .collect();
    ProjCurve::new(pts, true, Some(2))
}

/// Union of the lines `P(span(e0, e1))` and `P(span(e0, e2))`.
pub fn two_lines(d: usize, m: usize) -> Result<ProjCurve> {
    check_builder(d, 2, m)?;
    ProjCurve::from_components(vec![line_points(d, 0, 1, m), line_points(d, 0, 2, m)], true, Some(2))
}

/// Parse a curve from text: one point per line as comma-separated
/// homogeneous coordinates, blank lines between components, `#` comments.
/// The directives `# closed=true|false` and `# degree=<n>` are honoured.
pub fn parse_curve(text: &str) -> Result<ProjCurve> {
    let mut comps: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
    let mut closed = false;
    let mut degree = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("closed=") {
                closed = v.trim().parse().map_err(|_| Error::InvalidCurve(format!("line {}: bad closed flag", lineno + 1)))?;
            } else if let Some(v) = comment.strip_prefix("degree=") {
                degree = Some(v.trim().parse().map_err(|_| Error::InvalidCurve(format!("line {}: bad degree", lineno + 1)))?);
            }
            continue;
        }
        if line.is_empty() {
            if comps.last().is_some_and(|c| !c.is_empty()) {
                comps.push(Vec::new());
            }
            continue;
        }
        let p = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidCurve(format!("line {}: {e}", lineno + 1)))?;
        comps.last_mut().expect("nonempty").push(p);
    }
    ProjCurve::from_components(comps, closed, degree)
}

pub fn load_curve(path: &Path) -> Result<ProjCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidCurve(format!("{}: {e}", path.display())))?;
    parse_curve(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn fs_length_examples() {
        let line = projective_line(2, 1024).unwrap();
        assert!((fs_length(&line) - PI).abs() < 1e-4);
        let seg = ProjCurve::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], false, None).unwrap();
        assert!((fs_length(&seg) - PI / 2.0).abs() < 1e-15);
        let same = ProjCurve::new(vec![vec![1.0, 2.0], vec![1.0, 2.0]], false, None).unwrap();
        assert_eq!(fs_length(&same), 0.0);
        assert_eq!(degenerate_segments(&same), 1);
        let conic = unit_circle_conic(2, 4096).unwrap();
        assert!((fs_length(&conic) - PI * 2f64.sqrt()).abs() < 1e-5);
        assert!((fs_length(&two_lines(2, 512).unwrap()) - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn representatives_are_aligned() {
        let c = ProjCurve::new(vec![vec![1.0, 0.0], vec![-1.0, -0.1], vec![1.0, 0.2]], false, None).unwrap();
        for w in c.points().windows(2) {
            assert!(dot(&w[0], &w[1]) > 0.0);
        }
        for p in c.points() {
            assert!((dot(p, p) - 1.0).abs() < 1e-12);
        }
        assert!(ProjCurve::new(vec![vec![0.0, 0.0]], false, None).is_err());
        assert!(ProjCurve::new(vec![vec![1.0, 0.0], vec![1.0]], false, None).is_err());
    }

    #[test]
    fn intersection_examples() {
        let line = projective_line(2, 256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let conic = unit_circle_conic(2, 256).unwrap();
        for _ in 0..2000 {
            let u = sample_hyperplane(&mut rng, 2);
            assert_eq!(intersection_count(&line, &u), Some(1));
            assert!(intersection_count(&conic, &u).unwrap() <= 2);
        }
        // the conic has no real point with x2 = 0, while the line lies inside it
        assert_eq!(intersection_count(&conic, &[0.0, 0.0, 1.0]), Some(0));
        assert_eq!(intersection_count(&line, &[0.0, 0.0, 1.0]), None);
    }

    #[test]
    fn hyperplane_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        let n = 100_000;
        let mut mean = [0.0; 4];
        let mut cov = [[0.0; 4]; 4];
        for _ in 0..n {
            let u = sample_hyperplane(&mut rng, d);
            for i in 0..4 {
                mean[i] += u[i];
                for j in 0..4 {
                    cov[i][j] += u[i] * u[j];
                }
            }
        }
        // each coordinate has variance 1/(d+1)
        let sigma = (0.25 / n as f64).sqrt();
        for i in 0..4 {
            assert!((mean[i] / n as f64).abs() < 3.0 * sigma);
            for j in 0..4 {
                let c = cov[i][j] / n as f64;
                if i == j {
                    assert!((c - 0.25).abs() < 0.05 * 0.25);
                } else {
                    assert!(c.abs() < 0.05 * 0.25);
                }
            }
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let a = sample_hyperplane(&mut block_rng(9, 3), 4);
        let b = sample_hyperplane(&mut block_rng(9, 3), 4);
        let c = sample_hyperplane(&mut block_rng(9, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn crofton_line_and_conic() {
        let line = projective_line(2, 1024).unwrap();
        let r = crofton_length(&line, 100_000, 7).unwrap();
        assert!((r.estimate - PI).abs() < 0.02 * PI);
        let conic = unit_circle_conic(2, 1024).unwrap();
        let r = crofton_length(&conic, 100_000, 7).unwrap();
        let direct = fs_length(&conic);
        assert!((r.estimate - direct).abs() < 0.02 * direct);
        assert!(r.estimate < 2.0 * PI);
        let empty = ProjCurve::new(vec![], false, None).unwrap();
        assert_eq!(crofton_length(&empty, 1000, 1).unwrap().estimate, 0.0);
        assert!(crofton_length(&line, 99, 1).is_err());
    }

    #[test]
    fn result_independent_of_thread_count() {
        let conic = unit_circle_conic(3, 200).unwrap();
        let a = crofton_length(&conic, 20_000, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| crofton_length(&conic, 20_000, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn convergence_ends_at_full_estimate() {
        let line = projective_line(2, 128).unwrap();
        let rows = crofton_convergence(&line, 10_000, 2).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(*rows.last().unwrap(), crofton_length(&line, 10_000, 2).unwrap());
    }

    #[test]
    fn degree_reports() {
        let r = degree_bound_report(&projective_line(2, 1024).unwrap(), 1, 20_000, 1).unwrap();
        assert!(r.satisfied && r.slack.abs() < 1e-9);
        let r = degree_bound_report(&unit_circle_conic(2, 1024).unwrap(), 2, 20_000, 1).unwrap();
        assert!(r.satisfied && r.slack > 1.0);
        let r = degree_bound_report(&two_lines(2, 1024).unwrap(), 2, 20_000, 1).unwrap();
        assert!(r.satisfied && r.slack.abs() < 1e-9);
        assert!(degree_bound_report(&two_lines(2, 64).unwrap(), 1, 1000, 1).is_err());
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let m: Vec<f64> = (0..9).map(|k| q[(k / 3, k % 3)]).collect();
        let conic = unit_circle_conic(2, 512).unwrap();
        let rotated = conic.transform(&m).unwrap();
        assert!((fs_length(&conic) - fs_length(&rotated)).abs() < 1e-9);
        let a = crofton_length(&conic, 50_000, 4).unwrap();
        let b = crofton_length(&rotated, 50_000, 4).unwrap();
        assert!((a.estimate - b.estimate).abs() < 3.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt());
    }

    #[test]
    fn parse_examples() {
        let c = parse_curve("# closed=true\n# degree=2\n1,0,0\n0,1,0\n\n1,0,0\n0,0,1\n").unwrap();
        assert!(c.closed());
        assert_eq!(c.degree_hint(), Some(2));
        assert_eq!(c.components().count(), 2);
        assert!(parse_curve("1,x\n").is_err());
    }
}
