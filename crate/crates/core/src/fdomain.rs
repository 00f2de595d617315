//! Fundamental domains for a hyperbolic isometry acting on the ample cone
//! of a rank-2 lattice.
//!
//! With `θ2 = f(θ1)`, the cone spanned by `θ1` and `θ2` (punctured at 0)
//! tiles the positive cone under the powers of `f`. Edge ownership is
//! half-open: the ray through `θ1` belongs to the domain, the ray through
//! `θ2` to the next translate. All position tests are exact integer sign
//! tests in the `(θ1, θ2)` frame.

use num::integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{is_isometry, spectral_logradius, GramMatrix, LatticeMap};

const MAX_DYNAMICS_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeBasis {
    gram: GramMatrix,
    f: LatticeMap,
    f_inv: LatticeMap,
    theta1: [i64; 2],
    theta2: [i64; 2],
}

fn det2(u: [i64; 2], v: [i64; 2]) -> i128 {
    u[0] as i128 * v[1] as i128 - u[1] as i128 * v[0] as i128
}

fn to2(v: Vec<i64>) -> [i64; 2] {
    [v[0], v[1]]
}

fn combo(k1: i64, u: [i64; 2], k2: i64, v: [i64; 2]) -> Result<[i64; 2]> {
    let c = |i: usize| -> Result<i64> {
        let x = (k1 as i128) * (u[i] as i128) + (k2 as i128) * (v[i] as i128);
        i64::try_from(x).map_err(|_| Error::Overflow)
    };
    Ok([c(0)?, c(1)?])
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

impl ConeBasis {
    pub fn new(gram: GramMatrix, f: LatticeMap, theta1: [i64; 2]) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidConeBasis(m.to_string()));
        if gram.dim() != 2 || f.dim() != 2 {
            return Err(Error::WrongRank(gram.dim().max(f.dim())));
        }
        if gram.det() >= 0 {
            return Err(Error::NotHyperbolic(gram.det()));
        }
        if !is_isometry(&gram, &f)? {
            return bad("f is not an isometry of the form");
        }
        if f.det()? != 1 {
            return bad("f must have determinant 1");
        }
        if spectral_logradius(&f).value <= 0.0 {
            return Err(Error::NotHyperbolicMap);
        }
        if theta1[0].gcd(&theta1[1]) != 1 {
            return bad("theta1 must be primitive");
        }
        if gram.square(&theta1)? <= 0 {
            return bad("theta1 must have positive square");
        }
        let theta2 = to2(f.apply(&theta1)?);
        if gram.pair(&theta1, &theta2)? <= 0 {
            return bad("f must preserve the component of the positive cone containing theta1");
        }
        let f_inv = f.inverse()?;
        Ok(ConeBasis { gram, f, f_inv, theta1, theta2 })
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn f(&self) -> &LatticeMap {
        &self.f
    }

    pub fn theta1(&self) -> [i64; 2] {
        self.theta1
    }

    pub fn theta2(&self) -> [i64; 2] {
        self.theta2
    }

    /// Numerators of the frame coordinates `(s, t)` of `v = s θ1 + t θ2`
    /// and their common denominator `det(θ1 | θ2)`.
    fn frame(&self, v: [i64; 2]) -> (i128, i128, i128) {
        (det2(v, self.theta2), det2(self.theta1, v), det2(self.theta1, self.theta2))
    }

    /// Closed cone spanned by `θ1, θ2`, minus the open ray through `θ2`.
    pub fn in_domain(&self, v: [i64; 2]) -> bool {
        let (s, t, d) = self.frame(v);
        let (s, t) = if d > 0 { (s, t) } else { (-s, -t) };
        s > 0 && t >= 0
    }

    pub fn in_positive_cone(&self, v: [i64; 2]) -> Result<bool> {
        Ok(self.gram.square(&v)? > 0 && self.gram.pair(&v, &self.theta1)? > 0)
    }

    pub fn apply_power(&self, n: i64, v: [i64; 2]) -> Result<[i64; 2]> {
        let (m, steps) = if n >= 0 { (&self.f, n) } else { (&self.f_inv, -n) };
        let mut out = v;
        for _ in 0..steps {
            out = to2(m.apply(&out)?);
        }
        Ok(out)
    }
}

/// Unit eigenvectors of `f` for `λ(f)` and `λ(f)^{-1}`, oriented into the
/// closure of the positive cone containing `θ1`.
pub fn isotropic_halflines(cb: &ConeBasis) -> Result<([f64; 2], [f64; 2])> {
    let m = cb.f.matrix();
    let (a, b, c, d) = (m.get(0, 0) as f64, m.get(0, 1) as f64, m.get(1, 0) as f64, m.get(1, 1) as f64);
    let tr = a + d;
    if tr.abs() <= 2.0 {
        return Err(Error::NotHyperbolicMap);
    }
    let disc = (tr * tr - 4.0).sqrt();
    // larger eigenvalue in modulus first; det 1 so both share the sign of tr
    let big = if tr > 0.0 { (tr + disc) / 2.0 } else { (tr - disc) / 2.0 };
    let small = 1.0 / big;
    let t1 = [cb.theta1[0] as f64, cb.theta1[1] as f64];
    let eig = |lam: f64| -> [f64; 2] {
        let u = [b, lam - a];
        let v = [lam - d, c];
        let pick = if u[0].hypot(u[1]) >= v[0].hypot(v[1]) { u } else { v };
        let n = pick[0].hypot(pick[1]);
        let mut e = [pick[0] / n, pick[1] / n];
        if cb.gram.pair_f64(&e, &t1) < 0.0 {
            e = [-e[0], -e[1]];
        }
        e
    };
    Ok((eig(big), eig(small)))
}

/// Nonzero integer points `s θ1 + t θ2` with `s, t ∈ [0, 1)`, sorted.
///
/// Coset representatives of `Z^2 / <θ1, θ2>` come from the Hermite normal
/// form of `(θ1 | θ2)` and are then folded into the parallelogram.
pub fn parallelogram_points(cb: &ConeBasis) -> Result<Vec<[i64; 2]>> {
    points_for_frame(cb.theta1, cb.theta2)
}

/// Frame version of [`parallelogram_points`] for arbitrary independent vectors.
pub fn points_for_frame(theta1: [i64; 2], theta2: [i64; 2]) -> Result<Vec<[i64; 2]>> {
    let d = det2(theta1, theta2);
    if d == 0 {
        return Err(Error::InvalidConeBasis("theta1 and theta2 are collinear".into()));
    }
    // column operations bring [[x1, x2], [y1, y2]] to Hermite form
    // [[g, 0], [*, det / g]] with g = gcd(x1, x2); the box
    // [0, g) x [0, |det / g|) is a transversal of Z^2 / <θ1, θ2>
    let (x1, x2) = (theta1[0] as i128, theta2[0] as i128);
    let (y1, y2) = (theta1[1] as i128, theta2[1] as i128);
    let h11 = x1.gcd(&x2);
    let h22 = (d / h11).abs();
    let mut pts = Vec::with_capacity((h11 * h22) as usize);
    for i in 0..h11 {
        for j in 0..h22 {
            let (s, t) = (det2i(i, j, x2, y2), det2i(x1, y1, i, j));
            let ks = floor_div(s, d);
            let kt = floor_div(t, d);
            let px = i - ks * x1 - kt * x2;
            let py = j - ks * y1 - kt * y2;
            if (px, py) != (0, 0) {
                pts.push([
                    i64::try_from(px).map_err(|_| Error::Overflow)?,
                    i64::try_from(py).map_err(|_| Error::Overflow)?,
                ]);
            }
        }
    }
    pts.sort();
    Ok(pts)
}

fn det2i(a: i128, b: i128, c: i128, d: i128) -> i128 {
    a * d - b * c
}

/// `n` and `residue = f^{-n}(θ)` with the residue in the half-open domain.
pub fn reduce_by_dynamics(cb: &ConeBasis, theta: [i64; 2]) -> Result<(i64, [i64; 2])> {
    if !cb.in_positive_cone(theta)? {
        return Err(Error::NotInPositiveCone(theta.to_vec()));
    }
    let mut r = theta;
    let mut n = 0i64;
    for _ in 0..MAX_DYNAMICS_STEPS {
        let (s, t, d) = cb.frame(r);
        let (s, t) = if d > 0 { (s, t) } else { (-s, -t) };
        if s > 0 && t >= 0 {
            return Ok((n, r));
        }
        if s <= 0 {
            // at or beyond the θ2 ray: pull back
            r = to2(cb.f_inv.apply(&r)?);
            n += 1;
        } else {
            r = to2(cb.f.apply(&r)?);
            n -= 1;
        }
    }
    Err(Error::ReductionBudget(MAX_DYNAMICS_STEPS))
}

/// Unique decomposition `f^{-n}(θ) = k1 θ1 + k2 θ2 (+ p_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub n: i64,
    pub k1: i64,
    pub k2: i64,
    pub j: Option<usize>,
}

pub fn decompose(cb: &ConeBasis, theta: [i64; 2]) -> Result<Decomposition> {
    let (n, r) = reduce_by_dynamics(cb, theta)?;
    let (s, t, d) = cb.frame(r);
    let k1 = floor_div(s, d);
    let k2 = floor_div(t, d);
    let k1 = i64::try_from(k1).map_err(|_| Error::Overflow)?;
    let k2 = i64::try_from(k2).map_err(|_| Error::Overflow)?;
    let base = combo(k1, cb.theta1, k2, cb.theta2)?;
    let rest = [r[0] - base[0], r[1] - base[1]];
    let j = if rest == [0, 0] {
        None
    } else {
        let pts = parallelogram_points(cb)?;
        Some(pts.binary_search(&rest).map_err(|_| {
            Error::InvalidConeBasis(format!("remainder {rest:?} is not a parallelogram point"))
        })?)
    };
    Ok(Decomposition { n, k1, k2, j })
}

/// Inverse of [`decompose`].
pub fn compose_class(cb: &ConeBasis, d: &Decomposition) -> Result<[i64; 2]> {
    let mut v = combo(d.k1, cb.theta1, d.k2, cb.theta2)?;
    if let Some(j) = d.j {
        let pts = parallelogram_points(cb)?;
        let p = pts.get(j).ok_or(Error::Parameter(format!("point index {j} out of range")))?;
        v = [v[0] + p[0], v[1] + p[1]];
    }
    cb.apply_power(d.n, v)
}

/// Cone basis of the Wehler model with `f = s1 s2` and `θ1 = F1`.
pub fn wehler_cone_basis() -> ConeBasis {
    let m = crate::ns_models::model_wehler();
    let f = m.word_matrix(&[1, 2]).expect("valid word");
    ConeBasis::new(m.gram, f, [1, 0]).expect("Wehler data form a cone basis")
}
