//! Integer polynomials: exact characteristic polynomials, square-free
//! reduction over the rationals, and numerical root isolation.
//!
//! Coefficients are stored lowest degree first.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Characteristic polynomial `det(x I - A)` of a square integer matrix
/// (row-major), computed exactly with the Faddeev-LeVerrier recurrence.
pub fn charpoly(dim: usize, entries: &[i64]) -> Vec<BigInt> {
    let a: Vec<BigInt> = entries.iter().map(|&v| BigInt::from(v)).collect();
    let mut coeffs = vec![BigInt::zero(); dim + 1];
    coeffs[dim] = BigInt::one();
    // m holds M_k; start with M_0 = 0, c_n = 1
    let mut m = vec![BigInt::zero(); dim * dim];
    for k in 1..=dim {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(dim, &a, &m);
        for i in 0..dim {
            next[i * dim + i] += &coeffs[dim - k + 1];
        }
        let am = matmul(dim, &a, &next);
        let trace: BigInt = (0..dim).map(|i| am[i * dim + i].clone()).sum();
        coeffs[dim - k] = -(trace / BigInt::from(k as i64));
        m = next;
    }
    coeffs
}

fn matmul(n: usize, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = &a[i * n + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * &b[k * n + j];
            }
        }
    }
    out
}

fn trim(p: &mut Vec<BigRational>) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let q = &r[dr] / &lead;
        for i in 0..=db {
            let t = &q * &b[i];
            r[dr - db + i] -= t;
        }
        r.pop();
        trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    trim(&mut r);
    r
}

fn quot(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![BigRational::zero()];
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lead = b[db].clone();
    for dr in (db..r.len()).rev() {
        let c = &r[dr] / &lead;
        for i in 0..=db {
            let t = &c * &b[i];
            r[dr - db + i] -= t;
        }
        q[dr - db] = c;
    }
    q
}

fn is_zero_poly(p: &[BigRational]) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !is_zero_poly(&y) {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

/// Square-free part `p / gcd(p, p')`, returned as f64 coefficients of a
/// monic polynomial.
pub fn squarefree_part(p: &[BigInt]) -> Vec<f64> {
    let mut pr: Vec<BigRational> = p.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    trim(&mut pr);
    if pr.len() <= 2 {
        return monic_f64(&pr);
    }
    let deriv: Vec<BigRational> = pr
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i as i64)))
        .collect();
    let g = gcd(&pr, &deriv);
    let sf = if g.len() > 1 { quot(&pr, &g) } else { pr };
    monic_f64(&sf)
}

fn monic_f64(p: &[BigRational]) -> Vec<f64> {
    let lead = p.last().cloned().unwrap_or_else(BigRational::one);
    p.iter().map(|c| (c / &lead).to_f64().unwrap_or(f64::NAN)).collect()
}

/// Horner evaluation at a real point.
pub fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_c_deriv(p: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

/// All complex roots of a monic real polynomial by the Aberth-Ehrlich
/// iteration with deterministic starting points.
pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(-p[0] / p[1], 0.0)];
    }
    // Cauchy bound
    let bound = 1.0 + p[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(0.5 * bound, ang)
        })
        .collect();
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (v, d) = eval_c_deriv(p, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    // Newton polish
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = eval_c_deriv(p, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    z
}

/// Refine a simple real root near `x0` by bisection inside a bracket with
/// a certified sign change. Returns `None` when no sign change is found.
pub fn bracket_real_root(p: &[f64], x0: f64) -> Option<f64> {
    let scale = x0.abs().max(1.0);
    let mut h = 1e-13 * scale;
    let (mut lo, mut hi) = loop {
        let (a, b) = (x0 - h, x0 + h);
        let (fa, fb) = (eval(p, a), eval(p, b));
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() != fb.signum() {
            break (a, b);
        }
        h *= 4.0;
        if h > 1e-6 * scale {
            return None;
        }
    };
    let mut flo = eval(p, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(p, mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Spectral radius of an integer matrix from its characteristic polynomial.
///
/// The second component reports whether the dominant modulus was confirmed
/// by a real sign-change bracket (always the case for isometries of
/// hyperbolic lattices, whose dominant eigenvalue is real).
pub fn spectral_radius(dim: usize, entries: &[i64]) -> (f64, bool) {
    let cp = charpoly(dim, entries);
    // strip the factor x^k (zero eigenvalues)
    let first_nonzero = cp.iter().position(|c| !c.is_zero()).unwrap_or(cp.len() - 1);
    let stripped: Vec<BigInt> = cp[first_nonzero..].to_vec();
    if stripped.len() <= 1 {
        return (0.0, true);
    }
    let sf = squarefree_part(&stripped);
    let rts = roots(&sf);
    let rho = rts.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // try to certify a real dominant root of either sign
    let mut best: Option<f64> = None;
    for z in &rts {
        if (z.norm() - rho).abs() <= 1e-8 * rho.max(1.0) && z.im.abs() <= 1e-7 * rho.max(1.0) {
            if let Some(r) = bracket_real_root(&sf, z.re) {
                best = Some(best.map_or(r.abs(), |b: f64| b.max(r.abs())));
            }
        }
    }
    match best {
        Some(r) => (r, true),
        None => (rho, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn charpoly_of_cat_map() {
        assert_eq!(charpoly(2, &[2, 1, 1, 1]), ints(&[1, -3, 1]));
    }

    #[test]
    fn charpoly_of_3x3() {
        // det(xI - A) for A = [[0,2,2],[2,0,2],[2,2,0]]: x^3 - 12x - 16
        assert_eq!(charpoly(3, &[0, 2, 2, 2, 0, 2, 2, 2, 0]), ints(&[-16, -12, 0, 1]));
    }

    #[test]
    fn squarefree_removes_repeated_roots() {
        // (x-1)^3
        let sf = squarefree_part(&ints(&[-1, 3, -3, 1]));
        assert_eq!(sf.len(), 2);
        assert!((sf[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn roots_of_quadratic() {
        let r = roots(&[1.0, -3.0, 1.0]);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[1] - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_dominant_root() {
        // rotation by 90 degrees scaled by 2: eigenvalues +-2i
        let (rho, certified) = spectral_radius(2, &[0, -2, 2, 0]);
        assert!((rho - 2.0).abs() < 1e-12);
        assert!(!certified);
    }
}
