//! Integral quadratic lattices, their isometries, spectral entropy and the
//! Lehmer number.
//!
//! All lattice arithmetic is exact: entries are `i64`, products are formed
//! in `i128` and every operation is overflow-checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow)
}

impl IntMatrix {
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::MalformedMatrix);
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::MalformedMatrix);
            }
            entries.extend_from_slice(r);
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        IntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(|c| c.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        IntMatrix { dim: n, entries }
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let n = self.dim;
        if other.dim != n {
            return Err(Error::DimensionMismatch { expected: n, got: other.dim });
        }
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    let p = (self.get(i, k) as i128)
                        .checked_mul(other.get(k, j) as i128)
                        .ok_or(Error::Overflow)?;
                    acc = acc.checked_add(p).ok_or(Error::Overflow)?;
                }
                entries[i * n + j] = narrow(acc)?;
            }
        }
        Ok(IntMatrix { dim: n, entries })
    }

    pub fn apply(&self, v: &[i64]) -> Result<Vec<i64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        (0..self.dim)
            .map(|i| {
                let mut acc: i128 = 0;
                for (k, &x) in v.iter().enumerate() {
                    acc = acc
                        .checked_add((self.get(i, k) as i128).checked_mul(x as i128).ok_or(Error::Overflow)?)
                        .ok_or(Error::Overflow)?;
                }
                narrow(acc)
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Result<IntMatrix> {
        let mut out = IntMatrix::identity(self.dim);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<i128> {
        bareiss_det(self.dim, self.entries.iter().map(|&v| v as i128).collect())
    }

    /// Inverse of a unimodular matrix (adjugate times determinant).
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let d = self.det()?;
        if d != 1 && d != -1 {
            return Err(Error::NotUnimodular(d));
        }
        let n = self.dim;
        if n == 1 {
            return Ok(IntMatrix { dim: 1, entries: vec![narrow(d)?] });
        }
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                // cofactor C_ji goes to (i, j)
                let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                for r in 0..n {
                    if r == j {
                        continue;
                    }
                    for c in 0..n {
                        if c == i {
                            continue;
                        }
                        minor.push(self.get(r, c) as i128);
                    }
                }
                let m = bareiss_det(n - 1, minor)?;
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                entries[i * n + j] = narrow(sign * m * d)?;
            }
        }
        Ok(IntMatrix { dim: n, entries })
    }

    pub fn trace(&self) -> Result<i64> {
        let mut acc: i128 = 0;
        for i in 0..self.dim {
            acc += self.get(i, i) as i128;
        }
        narrow(acc)
    }
}

fn bareiss_det(n: usize, mut a: Vec<i128>) -> Result<i128> {
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                return Ok(0);
            };
            for c in 0..n {
                a.swap(k * n + c, swap * n + c);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let lhs = a[i * n + j].checked_mul(a[k * n + k]).ok_or(Error::Overflow)?;
                let rhs = a[i * n + k].checked_mul(a[k * n + j]).ok_or(Error::Overflow)?;
                a[i * n + j] = lhs.checked_sub(rhs).ok_or(Error::Overflow)? / prev;
            }
        }
        prev = a[k * n + k];
    }
    Ok(sign * a[n * n - 1])
}

/// Integral symmetric nondegenerate bilinear form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IntMatrix", into = "IntMatrix")]
pub struct GramMatrix(IntMatrix, i128);

impl TryFrom<IntMatrix> for GramMatrix {
    type Error = Error;

    fn try_from(m: IntMatrix) -> Result<Self> {
        GramMatrix::new(m)
    }
}

impl From<GramMatrix> for IntMatrix {
    fn from(g: GramMatrix) -> IntMatrix {
        g.0
    }
}

impl GramMatrix {
    pub fn new(m: IntMatrix) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let det = m.det()?;
        if det == 0 {
            return Err(Error::DegenerateLattice);
        }
        Ok(GramMatrix(m, det))
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn det(&self) -> i128 {
        self.1
    }

    /// `u^T G v` in exact arithmetic.
    pub fn pair(&self, u: &[i64], v: &[i64]) -> Result<i128> {
        let n = self.dim();
        if u.len() != n || v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len().min(v.len()) });
        }
        let mut acc: i128 = 0;
        for i in 0..n {
            for j in 0..n {
                let t = (u[i] as i128)
                    .checked_mul(self.0.get(i, j) as i128)
                    .and_then(|x| x.checked_mul(v[j] as i128))
                    .ok_or(Error::Overflow)?;
                acc = acc.checked_add(t).ok_or(Error::Overflow)?;
            }
        }
        Ok(acc)
    }

    pub fn square(&self, v: &[i64]) -> Result<i128> {
        self.pair(v, v)
    }

    /// Real-valued pairing, for eigenvector checks.
    pub fn pair_f64(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += u[i] * self.0.get(i, j) as f64 * v[j];
            }
        }
        acc
    }
}

/// Square integer matrix acting on a lattice basis (columns are images of
/// basis vectors).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeMap(IntMatrix);

impl LatticeMap {
    pub fn new(m: IntMatrix) -> Self {
        LatticeMap(m)
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Ok(LatticeMap(IntMatrix::from_rows(rows)?))
    }

    pub fn identity(dim: usize) -> Self {
        LatticeMap(IntMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn det(&self) -> Result<i128> {
        self.0.det()
    }

    /// `self * other`: `other` acts first.
    pub fn compose(&self, other: &LatticeMap) -> Result<LatticeMap> {
        Ok(LatticeMap(self.0.mul(&other.0)?))
    }

    pub fn apply(&self, v: &[i64]) -> Result<Vec<i64>> {
        self.0.apply(v)
    }

    pub fn pow(&self, k: u32) -> Result<LatticeMap> {
        Ok(LatticeMap(self.0.pow(k)?))
    }

    pub fn inverse(&self) -> Result<LatticeMap> {
        Ok(LatticeMap(self.0.inverse_unimodular()?))
    }

    /// `self^k` for any integer `k`, using the inverse for negative powers.
    pub fn pow_signed(&self, k: i64) -> Result<LatticeMap> {
        let e = u32::try_from(k.unsigned_abs()).map_err(|_| Error::Overflow)?;
        if k >= 0 {
            self.pow(e)
        } else {
            self.inverse()?.pow(e)
        }
    }
}

/// Topological entropy in nats: the logarithm of a spectral radius,
/// clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    /// Spectral radius the value was derived from.
    pub radius: f64,
    /// The matrix was nilpotent (all eigenvalues zero); value 0 by convention.
    pub nilpotent: bool,
    /// Dominant eigenvalue confirmed by a real sign-change bracket.
    pub certified: bool,
}

/// `|det G|`.
pub fn discriminant(g: &GramMatrix) -> u128 {
    g.det().unsigned_abs()
}

/// `M^T G M == G`, exactly.
pub fn is_isometry(g: &GramMatrix, m: &LatticeMap) -> Result<bool> {
    if g.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: m.dim() });
    }
    let lhs = m.0.transpose().mul(&g.0)?.mul(&m.0)?;
    Ok(lhs == g.0)
}

fn check_hyperbolic_rank2(g: &GramMatrix) -> Result<()> {
    if g.dim() != 2 {
        return Err(Error::WrongRank(g.dim()));
    }
    let d = g.det();
    if d >= 0 {
        return Err(Error::NotHyperbolic(d));
    }
    Ok(())
}

pub(crate) fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

pub(crate) fn is_square(n: u128) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Whether the quadratic form of a hyperbolic rank-2 lattice has a nonzero
/// isotropic vector, i.e. whether its discriminant is a perfect square.
pub fn represents_zero_rank2(g: &GramMatrix) -> Result<bool> {
    check_hyperbolic_rank2(g)?;
    Ok(is_square(discriminant(g)))
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Smallest solution `(t, u)`, `u > 0`, of `t^2 - D u^2 = 4` for a
/// nonsquare discriminant `D > 4`, read off the continued fraction of the
/// surd `(σ + √D) / 2` with `σ ≡ D (mod 2)`.
pub fn fundamental_unit(d: i128) -> Result<(i128, i128)> {
    if d <= 4 || is_square(d as u128) {
        return Err(Error::Parameter(format!("discriminant {d} must be a nonsquare > 4")));
    }
    let s = isqrt(d as u128) as i128;
    let sigma = d.rem_euclid(2);
    // complete quotient (P + √D) / Q
    let (mut p, mut q) = (sigma, 2i128);
    // convergents h/k, seeded with h_{-1}/k_{-1} = 1/0 and h_{-2}/k_{-2} = 0/1
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    // a norm-1 hit (t, u) yields (2t, 2u); a later coprime norm-4 hit may be smaller
    let mut doubled: Option<(i128, i128)> = None;
    for _ in 0..10_000 {
        let a = if q > 0 { floor_div(p + s, q) } else { floor_div(p + s + 1, q) };
        let h_next = a.checked_mul(h).and_then(|x| x.checked_add(h_prev)).ok_or(Error::Overflow)?;
        let k_next = a.checked_mul(k).and_then(|x| x.checked_add(k_prev)).ok_or(Error::Overflow)?;
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
        if let Some(best) = doubled {
            if k >= best.1 {
                return Ok(best);
            }
        }
        // candidate unit h - k ω̄ = (t + u √D) / 2
        let t = h.checked_mul(2).and_then(|x| x.checked_sub(k * sigma)).ok_or(Error::Overflow)?;
        let u = k;
        let norm = t
            .checked_mul(t)
            .and_then(|tt| u.checked_mul(u).and_then(|uu| uu.checked_mul(d)).and_then(|duu| tt.checked_sub(duu)))
            .ok_or(Error::Overflow)?;
        if norm == 4 && t > 0 {
            return Ok((t, u));
        }
        if norm == 1 && t > 0 && doubled.is_none() {
            doubled = Some((2 * t, 2 * u));
        }
        p = a * q - p;
        q = (d - p * p) / q;
    }
    Err(Error::Overflow)
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Hyperbolic isometry of a rank-2 hyperbolic lattice, if one exists.
///
/// Returns the fundamental automorph of the associated binary form: the
/// generator with determinant 1 and the smallest trace above 2, which
/// preserves each component of the positive cone. `None` when the
/// discriminant is a perfect square.
pub fn hyperbolic_isometry_rank2(g: &GramMatrix) -> Result<Option<LatticeMap>> {
    check_hyperbolic_rank2(g)?;
    if is_square(discriminant(g)) {
        return Ok(None);
    }
    let m = g.matrix();
    let (g11, g12, g22) = (m.get(0, 0) as i128, m.get(0, 1) as i128, m.get(1, 1) as i128);
    // binary form a x^2 + b xy + c y^2, made primitive
    let (a, b, c) = (g11, 2 * g12, g22);
    let content = gcd_i128(gcd_i128(a, b), c);
    let (a, b, c) = (a / content, b / content, c / content);
    let d = b * b - 4 * a * c;
    let (t, u) = fundamental_unit(d)?;
    let entries = [(t - b * u) / 2, -c * u, a * u, (t + b * u) / 2];
    let rows = [[narrow(entries[0])?, narrow(entries[1])?], [narrow(entries[2])?, narrow(entries[3])?]];
    let map = LatticeMap::from_rows(&rows)?;
    debug_assert!(is_isometry(g, &map)?);
    Ok(Some(map))
}

/// Log of the spectral radius of an integer matrix.
pub fn spectral_logradius(m: &LatticeMap) -> EntropyValue {
    let (radius, certified) = poly::spectral_radius(m.dim(), m.matrix().entries());
    let nilpotent = radius == 0.0;
    let value = if radius > 1.0 { radius.ln() } else { 0.0 };
    EntropyValue { value, radius, nilpotent, certified }
}

/// Coefficients (lowest degree first) of x^10 + x^9 - x^7 - x^6 - x^5 - x^4 - x^3 + x + 1.
pub const LEHMER_POLYNOMIAL: [f64; 11] = [1.0, 1.0, 0.0, -1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 1.0, 1.0];

/// Largest real root of Lehmer's polynomial, by bisection on (1, 2).
pub fn lehmer_number() -> f64 {
    let p = &LEHMER_POLYNOMIAL;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    let flo = poly::eval(p, lo);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        let fm = poly::eval(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lower bound for the real entropy of a hyperbolic automorphism whose
/// surface has concordance at least `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LehmerBound {
    pub alpha: f64,
    pub lehmer_number: f64,
    pub lehmer_log: f64,
    /// `alpha · log λ10`, the bound in entropy units.
    pub bound: f64,
    /// `alpha · λ10`.
    pub bound_literal: f64,
}

pub fn lehmer_bound(alpha: f64) -> Result<LehmerBound> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let l = lehmer_number();
    Ok(LehmerBound { alpha, lehmer_number: l, lehmer_log: l.ln(), bound: alpha * l.ln(), bound_literal: alpha * l })
}
