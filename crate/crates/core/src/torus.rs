//! The abelian surface `X = E × E` with `E = C / (Z + τZ)`, `y = Im τ`.
//!
//! Néron-Severi classes are written in the basis `([H], [V], [Δ])` of the
//! horizontal, vertical and diagonal curves; the intersection form in that
//! basis is `[[0,1,1],[1,0,1],[1,1,0]]`. A rational line `a z1 = b z2` has
//! direction `(b, a)` in `C^2`, and `SL2(Z)` acts on directions linearly.
//!
//! Every ample class is moved into the cone spanned by `H, V, Δ` by walking
//! the Farey tessellation: the three ideal triangles adjacent to
//! `(H, V, Δ)` are reached by fixed generators, and each step crosses the
//! edge opposite a vertex whose coordinate is negative. The walk is exact
//! integer arithmetic and follows the unique path in the dual tree.

use num::integer::Integer;
use num::rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{spectral_logradius, GramMatrix, IntMatrix, LatticeMap};

/// 2x2 integer matrix acting on `C^2`, row-major.
pub type Mat2 = [[i64; 2]; 2];

pub const IDENTITY2: Mat2 = [[1, 0], [0, 1]];

const MAX_WALK_STEPS: usize = 100_000;

/// Slope `a/b` of a rational line, stored primitive with `b > 0` or `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slope {
    a: i64,
    b: i64,
}

impl Slope {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if (a, b) == (0, 0) || a.gcd(&b) != 1 {
            return Err(Error::InvalidSlope(a, b));
        }
        Ok(if b < 0 || (b == 0 && a < 0) { Slope { a: -a, b: -b } } else { Slope { a, b } })
    }

    /// Slope of the line with direction vector `(b, a)`, reduced.
    pub fn from_direction(b: i64, a: i64) -> Result<Self> {
        let g = a.gcd(&b);
        if g == 0 {
            return Err(Error::InvalidSlope(a, b));
        }
        Slope::new(a / g, b / g)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn direction(&self) -> (i64, i64) {
        (self.b, self.a)
    }

    /// Image of the line under `m` acting on `C^2`.
    pub fn transform(&self, m: &Mat2) -> Result<Slope> {
        let (b, a) = self.direction();
        Slope::from_direction(m[0][0] * b + m[0][1] * a, m[1][0] * b + m[1][1] * a)
    }
}

pub const SLOPE_H: Slope = Slope { a: 0, b: 1 };
pub const SLOPE_V: Slope = Slope { a: 1, b: 0 };
pub const SLOPE_DIAG: Slope = Slope { a: 1, b: 1 };

/// Class `α[H] + β[V] + γ[Δ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusClass {
    pub coords: [i64; 3],
}

impl TorusClass {
    pub fn new(alpha: i64, beta: i64, gamma: i64) -> Self {
        TorusClass { coords: [alpha, beta, gamma] }
    }

    pub fn self_intersection(&self) -> i64 {
        let [a, b, c] = self.coords;
        2 * (a * b + a * c + b * c)
    }

    pub fn dot_h(&self) -> i64 {
        self.coords[1] + self.coords[2]
    }

    pub fn dot_v(&self) -> i64 {
        self.coords[0] + self.coords[2]
    }

    pub fn dot_diag(&self) -> i64 {
        self.coords[0] + self.coords[1]
    }

    /// Positive square on the component of the positive cone containing `H + V`.
    pub fn is_ample(&self) -> bool {
        self.self_intersection() > 0 && self.dot_h() + self.dot_v() > 0
    }
}

pub fn torus_gram() -> GramMatrix {
    GramMatrix::from_rows(&[[0, 1, 1], [1, 0, 1], [1, 1, 0]]).expect("static gram")
}

/// Class of the rational line of slope `a/b`: `(b² - ab, a² - ab, ab)`.
pub fn line_class(s: Slope) -> TorusClass {
    let (a, b) = (s.a, s.b);
    TorusClass::new(b * b - a * b, a * a - a * b, a * b)
}

/// `(vol_R, vol_C)` of a rational line for the flat metric.
pub fn line_volumes(s: Slope, y: f64) -> Result<(f64, f64)> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::Parameter(format!("y must be positive, got {y}")));
    }
    let n = (s.a * s.a + s.b * s.b) as f64;
    Ok((n.sqrt(), y * n))
}

/// Exact form of [`line_volumes`]: `(vol_R², vol_C)` for rational `y`.
pub fn line_volume_squares(s: Slope, y: Ratio<i64>) -> Result<(i64, Ratio<i64>)> {
    if y <= Ratio::from_integer(0) {
        return Err(Error::Parameter(format!("y must be positive, got {y}")));
    }
    let n = s.a * s.a + s.b * s.b;
    Ok((n, y * n))
}

pub fn mat2_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

pub fn mat2_det(m: &Mat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn mat2_inv_sl2(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

/// Matrix of `M_*` on `([H],[V],[Δ])` for `M ∈ SL2(Z)`.
pub fn sl2_pushforward(m: &Mat2) -> Result<LatticeMap> {
    let d = mat2_det(m);
    if d != 1 {
        return Err(Error::NotUnimodular(d as i128));
    }
    let cols: Vec<[i64; 3]> = [SLOPE_H, SLOPE_V, SLOPE_DIAG]
        .iter()
        .map(|s| s.transform(m).map(|t| line_class(t).coords))
        .collect::<Result<_>>()?;
    let rows: Vec<[i64; 3]> = (0..3).map(|i| [cols[0][i], cols[1][i], cols[2][i]]).collect();
    Ok(LatticeMap::new(IntMatrix::from_rows(&rows)?))
}

/// Generators taking the triangle `(H, V, Δ)` to its neighbour across the
/// edge opposite `H`, `V` and `Δ` respectively.
const FAREY_STEPS: [Mat2; 3] = [[[1, 0], [1, 1]], [[1, 1], [0, 1]], [[1, 0], [-1, 1]]];

/// Find `g ∈ SL2(Z)` and `k ≥ 0` with `g_*(k1 H + k2 V + k3 Δ) = θ`.
pub fn reduce_to_triangle(theta: TorusClass) -> Result<(Mat2, [i64; 3])> {
    if !theta.is_ample() {
        return Err(Error::NotAmple(theta.coords.to_vec()));
    }
    let inverse_steps: Vec<LatticeMap> = FAREY_STEPS
        .iter()
        .map(|g| sl2_pushforward(&mat2_inv_sl2(g)))
        .collect::<Result<_>>()?;
    let mut g = IDENTITY2;
    let mut c = theta.coords.to_vec();
    for _ in 0..MAX_WALK_STEPS {
        let Some(i) = c.iter().position(|&x| x < 0) else {
            return Ok((g, [c[0], c[1], c[2]]));
        };
        c = inverse_steps[i].apply(&c)?;
        g = mat2_mul(&g, &FAREY_STEPS[i]);
    }
    Err(Error::ReductionBudget(MAX_WALK_STEPS))
}

/// Lower bound `Σ k_j vol_R(D_j)` for `mvol_R(θ)` against `C vol_C(θ)^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceCertificate {
    pub theta: TorusClass,
    pub g: Mat2,
    pub k: [i64; 3],
    /// Images `g(H), g(V), g(Δ)` as slopes.
    pub lines: [Slope; 3],
    pub mvol_r_lower: f64,
    pub vol_c: f64,
    pub c: f64,
    pub holds: bool,
}

impl ConcordanceCertificate {
    /// `mvol_r_lower / (C vol_C^{1/2})`.
    pub fn ratio(&self) -> f64 {
        self.mvol_r_lower / (self.c * self.vol_c.sqrt())
    }
}

pub fn certify_concordance(theta: TorusClass, y: f64) -> Result<ConcordanceCertificate> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::Parameter(format!("y must be positive, got {y}")));
    }
    let (g, k) = reduce_to_triangle(theta)?;
    let lines = [SLOPE_H.transform(&g)?, SLOPE_V.transform(&g)?, SLOPE_DIAG.transform(&g)?];
    let mut mvol_r_lower = 0.0;
    for (kj, line) in k.iter().zip(lines.iter()) {
        mvol_r_lower += *kj as f64 * line_volumes(*line, y)?.0;
    }
    let vol_c = y * (theta.dot_h() + theta.dot_v()) as f64;
    let c = y.powf(-0.5);
    let holds = mvol_r_lower >= c * vol_c.sqrt() - 1e-12;
    Ok(ConcordanceCertificate { theta, g, k, lines, mvol_r_lower, vol_c, c, holds })
}

/// All ample classes with `|coords| <= max_coord`, in lexicographic order.
pub fn ample_classes(max_coord: i64) -> Vec<TorusClass> {
    let r = -max_coord..=max_coord;
    r.clone()
        .flat_map(|a| r.clone().flat_map(move |b| (-max_coord..=max_coord).map(move |c| TorusClass::new(a, b, c))))
        .filter(TorusClass::is_ample)
        .collect()
}

/// Certificates for every ample class in the box, in lexicographic order
/// (parallel evaluation, ordered collection).
pub fn certificate_sweep(max_coord: i64, y: f64) -> Result<Vec<ConcordanceCertificate>> {
    ample_classes(max_coord).into_par_iter().map(|t| certify_concordance(t, y)).collect()
}

/// `(h(f_R), h(f_C))` for the linear automorphism of `R^2/Z^2` (and of
/// `E × E`) induced by `M`; on tori the complex entropy doubles.
pub fn linear_map_entropies(m: &Mat2) -> Result<(f64, f64)> {
    let d = mat2_det(m);
    if d.abs() != 1 {
        return Err(Error::NotUnimodular(d as i128));
    }
    let h = spectral_logradius(&LatticeMap::from_rows(m)?).value;
    Ok((h, 2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::is_isometry;

    /// Brute-force solution of β+γ = a², α+γ = b², α+β = (a-b)².
    fn class_by_pairings(a: i64, b: i64) -> [i64; 3] {
        for al in -100i64..=100 {
            for be in -100i64..=100 {
                let ga = a * a - be;
                if al + ga == b * b && al + be == (a - b) * (a - b) {
                    return [al, be, ga];
                }
            }
        }
        panic!("no solution")
    }

    #[test]
    fn slope_normalization() {
        assert_eq!(Slope::new(-1, -2).unwrap(), Slope::new(1, 2).unwrap());
        assert_eq!(Slope::new(-1, 0).unwrap(), SLOPE_V);
        assert!(Slope::new(2, 4).is_err());
        assert!(Slope::new(0, 0).is_err());
    }

    #[test]
    fn line_class_examples() {
        assert_eq!(line_class(SLOPE_H).coords, [1, 0, 0]);
        assert_eq!(line_class(SLOPE_DIAG).coords, [0, 0, 1]);
        assert_eq!(line_class(Slope::new(1, 2).unwrap()).coords, [2, -1, 2]);
        assert_eq!(class_by_pairings(1, 2), [2, -1, 2]);
        for (a, b) in [(3, 5), (-2, 7), (4, 1)] {
            assert_eq!(line_class(Slope::new(a, b).unwrap()).coords, class_by_pairings(a, b));
        }
    }

    #[test]
    fn line_pairings_in_box() {
        let g = torus_gram();
        for a in -50i64..=50 {
            for b in -50i64..=50 {
                let Ok(s) = Slope::new(a, b) else { continue };
                let c = line_class(s).coords;
                assert_eq!(g.pair(&c, &[1, 0, 0]).unwrap(), (a * a) as i128);
                assert_eq!(g.pair(&c, &[0, 1, 0]).unwrap(), (b * b) as i128);
                assert_eq!(g.pair(&c, &[0, 0, 1]).unwrap(), ((a - b) * (a - b)) as i128);
                // lines are isotropic
                assert_eq!(g.square(&c).unwrap(), 0);
            }
        }
    }

    #[test]
    fn volumes() {
        assert_eq!(line_volumes(SLOPE_H, 1.0).unwrap(), (1.0, 1.0));
        assert_eq!(line_volumes(SLOPE_DIAG, 1.0).unwrap(), (2f64.sqrt(), 2.0));
        assert_eq!(line_volumes(Slope::new(3, 4).unwrap(), 2.0).unwrap(), (5.0, 50.0));
        assert!(line_volumes(SLOPE_H, 0.0).is_err());
        assert!(line_volumes(SLOPE_H, -1.0).is_err());
        let (r2, c) = line_volume_squares(Slope::new(3, 4).unwrap(), Ratio::new(1, 2)).unwrap();
        assert_eq!((r2, c), (25, Ratio::new(25, 2)));
    }

    #[test]
    fn pushforward_examples() {
        assert_eq!(sl2_pushforward(&IDENTITY2).unwrap(), LatticeMap::identity(3));
        let s = sl2_pushforward(&[[0, -1], [1, 0]]).unwrap();
        assert_eq!(s.matrix().column(0), vec![0, 1, 0]);
        assert_eq!(s.matrix().column(1), vec![1, 0, 0]);
        assert_eq!(s.matrix().column(2), vec![2, 2, -1]);
        let t = sl2_pushforward(&[[1, 1], [0, 1]]).unwrap();
        assert_eq!(t.matrix().column(0), vec![1, 0, 0]);
        assert_eq!(t.matrix().column(1), vec![0, 0, 1]);
        assert_eq!(t.matrix().column(2), vec![2, -1, 2]);
        assert!(sl2_pushforward(&[[2, 0], [0, 1]]).is_err());
    }

    #[test]
    fn pushforward_is_isometry_and_homomorphism() {
        let g = torus_gram();
        let ms: [Mat2; 4] = [[[2, 1], [1, 1]], [[0, -1], [1, 0]], [[1, 3], [0, 1]], [[5, 2], [7, 3]]];
        for m1 in &ms {
            let p1 = sl2_pushforward(m1).unwrap();
            assert!(is_isometry(&g, &p1).unwrap());
            for m2 in &ms {
                let p12 = sl2_pushforward(&mat2_mul(m1, m2)).unwrap();
                assert_eq!(p12, p1.compose(&sl2_pushforward(m2).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn pushforward_moves_line_classes() {
        let m: Mat2 = [[3, 2], [1, 1]];
        let p = sl2_pushforward(&m).unwrap();
        for (a, b) in [(1, 2), (-3, 5), (7, 1)] {
            let s = Slope::new(a, b).unwrap();
            let img = p.apply(&line_class(s).coords).unwrap();
            assert_eq!(img, line_class(s.transform(&m).unwrap()).coords.to_vec());
        }
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce_to_triangle(TorusClass::new(1, 1, 0)).unwrap(), (IDENTITY2, [1, 1, 0]));
        assert_eq!(reduce_to_triangle(TorusClass::new(1, 1, 4)).unwrap(), (IDENTITY2, [1, 1, 4]));
        let theta = TorusClass::new(5, -2, 4);
        let (g, k) = reduce_to_triangle(theta).unwrap();
        assert!(k.iter().all(|&x| x >= 0));
        let back = sl2_pushforward(&g).unwrap().apply(&k).unwrap();
        assert_eq!(back, theta.coords.to_vec());
        assert_eq!(reduce_to_triangle(TorusClass::new(1, 0, 0)), Err(Error::NotAmple(vec![1, 0, 0])));
        assert!(reduce_to_triangle(TorusClass::new(-1, -1, 0)).is_err());
    }

    #[test]
    fn reduction_agrees_with_bfs_oracle() {
        // breadth-first search over words in S, T, T^-1 of length <= 10
        let gens: [Mat2; 3] = [[[0, -1], [1, 0]], [[1, 1], [0, 1]], [[1, -1], [0, 1]]];
        let theta = TorusClass::new(5, -2, 4);
        let mut frontier = vec![IDENTITY2];
        let mut found = None;
        'outer: for _ in 0..=10 {
            let mut next = Vec::new();
            for g in &frontier {
                let inv = sl2_pushforward(&mat2_inv_sl2(g)).unwrap();
                let k = inv.apply(&theta.coords).unwrap();
                if k.iter().all(|&x| x >= 0) {
                    found = Some(k);
                    break 'outer;
                }
                for s in &gens {
                    next.push(mat2_mul(g, s));
                }
            }
            frontier = next;
        }
        let k_bfs = found.expect("BFS oracle finds a reduction");
        let (_, k) = reduce_to_triangle(theta).unwrap();
        // the multiset of coefficients is an invariant of the containing triangle
        let (mut a, mut b) = (k_bfs.clone(), k.to_vec());
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn certificate_examples() {
        let c = certify_concordance(TorusClass::new(1, 1, 0), 1.0).unwrap();
        assert_eq!(c.mvol_r_lower, 2.0);
        assert_eq!(c.vol_c, 2.0);
        assert!(c.holds);
        for k in 1..=6 {
            let c = certify_concordance(TorusClass::new(k, k, 0), 1.0).unwrap();
            assert_eq!(c.mvol_r_lower, 2.0 * k as f64);
            assert!(c.mvol_r_lower >= (2.0 * k as f64).sqrt());
        }
        let c = certify_concordance(TorusClass::new(1, 1, 4), 1.0).unwrap();
        // independent recomputation: k = (1,1,4) on H, V, Δ
        let lower = 1.0 + 1.0 + 4.0 * 2f64.sqrt();
        let vol_c: f64 = 1.0 * 1.0 + 1.0 * 1.0 + 4.0 * 2.0;
        assert!((c.mvol_r_lower - lower).abs() < 1e-12);
        assert!((c.vol_c - vol_c).abs() < 1e-12);
        assert!(c.holds && lower >= vol_c.sqrt());
    }

    #[test]
    fn certificate_vol_c_is_linear_in_k() {
        for theta in ample_classes(6) {
            let c = certify_concordance(theta, 2.0).unwrap();
            let sum: f64 = c.k.iter().zip(c.lines.iter()).map(|(k, s)| *k as f64 * line_volumes(*s, 2.0).unwrap().1).sum();
            assert!((sum - c.vol_c).abs() < 1e-9, "{theta:?}");
        }
    }

    #[test]
    fn cat_map_entropies() {
        let (hr, hc) = linear_map_entropies(&[[2, 1], [1, 1]]).unwrap();
        let h = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((hr - h).abs() < 1e-12 && (hc - 2.0 * h).abs() < 1e-12);
        assert_eq!(linear_map_entropies(&[[1, 1], [0, 1]]).unwrap(), (0.0, 0.0));
        assert_eq!(linear_map_entropies(&[[0, -1], [1, 0]]).unwrap(), (0.0, 0.0));
        assert!(linear_map_entropies(&[[2, 0], [0, 1]]).is_err());
    }
}
