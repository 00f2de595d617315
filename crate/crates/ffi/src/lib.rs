//! C ABI for `concordance-lab`.
//!
//! Every fallible function returns a [`ConcordanceStatus`] and writes its
//! results through out-pointers. On failure a description is available from
//! [`concordance_last_error`] on the calling thread. Models and curves are
//! opaque handles owned by the caller and released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use concordance_lab::crofton::{self, ProjCurve};
use concordance_lab::fdomain;
use concordance_lab::lattice;
use concordance_lab::ns_models::{self, SurfaceModel};
use concordance_lab::torus::{self, TorusClass};
use concordance_lab::vieta;
use concordance_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcordanceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The computation itself failed (overflow, reduction budget, orbit
    /// leaving the chart).
    ComputationFailed = 3,
    Panic = 4,
}

/// Opaque Néron–Severi model.
pub struct ConcordanceModel(SurfaceModel);

/// Opaque curve in real projective space.
pub struct ConcordanceCurve(ProjCurve);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ConcordanceStatus {
    match e {
        Error::Overflow
        | Error::ReductionBudget(_)
        | Error::LeftAffineWindow(_)
        | Error::UnboundedRealLocus(_)
        | Error::TooFewLengths(_) => ConcordanceStatus::ComputationFailed,
        _ => ConcordanceStatus::InvalidArgument,
    }
}

/// Run `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), ConcordanceStatus>>(f: F) -> ConcordanceStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ConcordanceStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            ConcordanceStatus::Panic
        }
    }
}

fn fail(e: Error) -> ConcordanceStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> ConcordanceStatus {
    set_error(&format!("{what} is null"));
    ConcordanceStatus::NullPointer
}

fn invalid(msg: &str) -> ConcordanceStatus {
    set_error(msg);
    ConcordanceStatus::InvalidArgument
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, ConcordanceStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], ConcordanceStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message describing the last failure on this thread, or an empty string.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn concordance_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a built-in model (`"triple-quadric"` or `"wehler"`).
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn concordance_model_new(name: *const c_char, out: *mut *mut ConcordanceModel) -> ConcordanceStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| invalid("name is not UTF-8"))?;
        let m = ns_models::model_by_name(name).map_err(fail)?;
        *out = Box::into_raw(Box::new(ConcordanceModel(m)));
        Ok(())
    })
}

unsafe fn out_ptr<'a, T>(p: *mut *mut T) -> Result<&'a mut *mut T, ConcordanceStatus> {
    let o = out(p, "out")?;
    *o = ptr::null_mut();
    Ok(o)
}

/// # Safety
/// `model` must come from [`concordance_model_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn concordance_model_free(model: *mut ConcordanceModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Rank of the model's lattice, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn concordance_model_rank(model: *const ConcordanceModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Entropy `log λ` of the automorphism given by a word of 1-based
/// involution indices (rightmost applied first); `λ` is written to
/// `out_radius` when it is non-null.
///
/// # Safety
/// `word` must point to `len` readable values, `out_entropy` must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_model_entropy(
    model: *const ConcordanceModel,
    word: *const usize,
    len: usize,
    out_entropy: *mut f64,
    out_radius: *mut f64,
) -> ConcordanceStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let word = slice(word, len, "word")?;
        let dst = out(out_entropy, "out_entropy")?;
        let e = ns_models::composed_entropy(&m.0, word).map_err(fail)?;
        *dst = e.value;
        if let Some(r) = out_radius.as_mut() {
            *r = e.radius;
        }
        Ok(())
    })
}

/// Largest real root of Lehmer's polynomial.
#[no_mangle]
pub extern "C" fn concordance_lehmer_number() -> f64 {
    lattice::lehmer_number()
}

/// `alpha · log λ10` and `alpha · λ10` for `alpha ∈ [0, 1]`.
///
/// # Safety
/// Both out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_lehmer_bound(alpha: f64, out_bound: *mut f64, out_literal: *mut f64) -> ConcordanceStatus {
    guard(|| {
        let b = out(out_bound, "out_bound")?;
        let l = out(out_literal, "out_literal")?;
        let r = lattice::lehmer_bound(alpha).map_err(fail)?;
        *b = r.bound;
        *l = r.bound_literal;
        Ok(())
    })
}

/// Hyperbolic isometry of the rank-2 lattice with gram `[[g11, g12], [g12, g22]]`,
/// written row-major to `out_matrix`. `*out_found` is 0 when none exists
/// (square discriminant).
///
/// # Safety
/// `out_matrix` must hold 4 values; `out_found` must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_rank2_isometry(
    g11: i64,
    g12: i64,
    g22: i64,
    out_matrix: *mut i64,
    out_found: *mut i32,
) -> ConcordanceStatus {
    guard(|| {
        let found = out(out_found, "out_found")?;
        if out_matrix.is_null() {
            return Err(null("out_matrix"));
        }
        let g = lattice::GramMatrix::from_rows(&[[g11, g12], [g12, g22]]).map_err(fail)?;
        *found = 0;
        if let Some(m) = lattice::hyperbolic_isometry_rank2(&g).map_err(fail)? {
            std::slice::from_raw_parts_mut(out_matrix, 4).copy_from_slice(m.matrix().entries());
            *found = 1;
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConcordanceTorusCertificate {
    /// Reducing matrix, row-major.
    pub g: [i64; 4],
    /// Multiplicities of the three line classes.
    pub k: [i64; 3],
    /// Slopes `(a, b)` of the three lines.
    pub slopes: [i64; 6],
    pub mvol_r_lower: f64,
    pub vol_c: f64,
    pub c: f64,
    pub holds: bool,
}

/// Certificate for the ample class `alpha·H + beta·V + gamma·Δ` on
/// `E × E` with `E = C/(Z + iyZ)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_torus_certify(
    alpha: i64,
    beta: i64,
    gamma: i64,
    y: f64,
    out_cert: *mut ConcordanceTorusCertificate,
) -> ConcordanceStatus {
    guard(|| {
        let dst = out(out_cert, "out_cert")?;
        let c = torus::certify_concordance(TorusClass::new(alpha, beta, gamma), y).map_err(fail)?;
        let mut slopes = [0; 6];
        for (i, s) in c.lines.iter().enumerate() {
            slopes[2 * i] = s.a();
            slopes[2 * i + 1] = s.b();
        }
        *dst = ConcordanceTorusCertificate {
            g: [c.g[0][0], c.g[0][1], c.g[1][0], c.g[1][1]],
            k: c.k,
            slopes,
            mvol_r_lower: c.mvol_r_lower,
            vol_c: c.vol_c,
            c: c.c,
            holds: c.holds,
        };
        Ok(())
    })
}

/// `f^{-n}(θ) = k1 θ1 + k2 θ2 (+ p_j)`; `j` is -1 when no parallelogram
/// point is needed.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConcordanceDecomposition {
    pub n: i64,
    pub k1: i64,
    pub k2: i64,
    pub j: i64,
}

/// Decompose a class of the Wehler model.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_wehler_decompose(
    x: i64,
    y: i64,
    out_dec: *mut ConcordanceDecomposition,
) -> ConcordanceStatus {
    guard(|| {
        let dst = out(out_dec, "out_dec")?;
        let d = fdomain::decompose(&fdomain::wehler_cone_basis(), [x, y]).map_err(fail)?;
        *dst = ConcordanceDecomposition { n: d.n, k1: d.k1, k2: d.k2, j: d.j.map_or(-1, |j| j as i64) };
        Ok(())
    })
}

/// Inverse of [`concordance_wehler_decompose`].
///
/// # Safety
/// `dec` must be valid and `out_class` must hold 2 values.
#[no_mangle]
pub unsafe extern "C" fn concordance_wehler_compose(
    dec: *const ConcordanceDecomposition,
    out_class: *mut i64,
) -> ConcordanceStatus {
    guard(|| {
        let d = dec.as_ref().ok_or_else(|| null("dec"))?;
        if out_class.is_null() {
            return Err(null("out_class"));
        }
        let j = match d.j {
            -1 => None,
            j if j >= 0 => Some(j as usize),
            _ => return Err(invalid("j must be -1 or a point index")),
        };
        let dec = fdomain::Decomposition { n: d.n, k1: d.k1, k2: d.k2, j };
        let v = fdomain::compose_class(&fdomain::wehler_cone_basis(), &dec).map_err(fail)?;
        std::slice::from_raw_parts_mut(out_class, 2).copy_from_slice(&v);
        Ok(())
    })
}

/// Arc-length growth rate of `f^t` and the resulting concordance upper
/// bound. `*out_truncated` is set when the point budget ran out.
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_vieta_entropy(
    t: f64,
    n_max: usize,
    eps: f64,
    budget: usize,
    out_h: *mut f64,
    out_alpha_upper: *mut f64,
    out_truncated: *mut bool,
) -> ConcordanceStatus {
    guard(|| {
        let h = out(out_h, "out_h")?;
        let a = out(out_alpha_upper, "out_alpha_upper")?;
        let tr = out(out_truncated, "out_truncated")?;
        let rec = vieta::entropy_estimate(t, &vieta::EstimateOptions::new(n_max, eps, budget)).map_err(fail)?;
        *h = rec.h_estimate;
        *a = rec.alpha_upper;
        *tr = rec.diagnostics.truncated;
        Ok(())
    })
}

/// Curve through `n_points` homogeneous points of length `stride = d + 1`,
/// stored consecutively. `degree_hint` 0 means none.
///
/// # Safety
/// `coords` must point to `n_points * stride` readable values.
#[no_mangle]
pub unsafe extern "C" fn concordance_curve_new(
    coords: *const f64,
    n_points: usize,
    stride: usize,
    closed: bool,
    degree_hint: u32,
    out_curve: *mut *mut ConcordanceCurve,
) -> ConcordanceStatus {
    guard(|| {
        let dst = out_ptr(out_curve)?;
        let len = n_points.checked_mul(stride).ok_or_else(|| invalid("size overflow"))?;
        let xs = slice(coords, len, "coords")?;
        if n_points > 0 && stride == 0 {
            return Err(invalid("stride must be positive"));
        }
        let pts = xs.chunks(stride.max(1)).map(<[f64]>::to_vec).collect();
        let hint = (degree_hint > 0).then_some(degree_hint);
        let c = ProjCurve::new(pts, closed, hint).map_err(fail)?;
        *dst = Box::into_raw(Box::new(ConcordanceCurve(c)));
        Ok(())
    })
}

/// Built-in curve in `P^d`: 0 line, 1 unit-circle conic, 2 two lines.
///
/// # Safety
/// `out_curve` must be valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_curve_builtin(
    kind: u32,
    d: usize,
    points: usize,
    out_curve: *mut *mut ConcordanceCurve,
) -> ConcordanceStatus {
    guard(|| {
        let dst = out_ptr(out_curve)?;
        let c = match kind {
            0 => crofton::projective_line(d, points),
            1 => crofton::unit_circle_conic(d, points),
            2 => crofton::two_lines(d, points),
            _ => return Err(invalid("unknown curve kind")),
        }
        .map_err(fail)?;
        *dst = Box::into_raw(Box::new(ConcordanceCurve(c)));
        Ok(())
    })
}

/// # Safety
/// `curve` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn concordance_curve_free(curve: *mut ConcordanceCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Fubini–Study length (a line has length π).
///
/// # Safety
/// `curve` must be live and `out_length` valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_curve_fs_length(curve: *const ConcordanceCurve, out_length: *mut f64) -> ConcordanceStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        *out(out_length, "out_length")? = crofton::fs_length(&c.0);
        Ok(())
    })
}

/// Monte Carlo Crofton length with its standard error; deterministic in
/// `(seed, samples)`.
///
/// # Safety
/// `curve` must be live and the out-pointers valid.
#[no_mangle]
pub unsafe extern "C" fn concordance_crofton_length(
    curve: *const ConcordanceCurve,
    samples: usize,
    seed: u64,
    out_estimate: *mut f64,
    out_stderr: *mut f64,
) -> ConcordanceStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        let e = out(out_estimate, "out_estimate")?;
        let s = out(out_stderr, "out_stderr")?;
        let r = crofton::crofton_length(&c.0, samples, seed).map_err(fail)?;
        *e = r.estimate;
        *s = r.stderr;
        Ok(())
    })
}
