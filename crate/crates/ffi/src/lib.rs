//! C ABI for `qdg`.
//!
//! Matrices cross the boundary as two row-major `double` arrays of length
//! `n * n`, one for real and one for imaginary parts; `im` may be null for a
//! real matrix. Credal sets are opaque handles released with
//! `qdg_credal_free`. Every fallible call returns a [`QdgStatus`]; the message
//! of the last failure on the calling thread is available through
//! `qdg_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdg::cli::{dispatch, parse_scenario, Command, Format, Tolerances};
use qdg::credal::{check_coherence, condition_selective, frechet_check, marginal, natural_extension, Assessment, CredalSet};
use qdg::linalg::{CMatrix, Complex64, HermitianMatrix, Subsystem, UnitaryMap};
use qdg::measurement::{born_probabilities, DensityMatrix, ProjectiveMeasurement, Projector};
use qdg::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotHermitian = 3,
    DimensionMismatch = 4,
    NotUnitary = 5,
    NotProjector = 6,
    NotDensityMatrix = 7,
    Incoherent = 8,
    EmptyCredalSet = 9,
    UndefinedConditioning = 10,
    Unsupported = 11,
    SolverFailure = 12,
    ParseError = 13,
    Panic = 14,
}

/// Opaque credal set.
pub struct QdgCredalSet {
    inner: CredalSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QdgStatus {
    match e {
        Error::NotSquare { .. } | Error::NonFinite { .. } | Error::InvalidArgument(_) | Error::InvalidDistribution(_) => {
            QdgStatus::InvalidArgument
        }
        Error::NotHermitian { .. } => QdgStatus::NotHermitian,
        Error::DimensionMismatch { .. } | Error::DimensionTooLarge(_) => QdgStatus::DimensionMismatch,
        Error::NotUnitary { .. } => QdgStatus::NotUnitary,
        Error::NotProjector { .. } | Error::NotOrthogonal { .. } | Error::NotComplete { .. } | Error::RankNotOne { .. } => {
            QdgStatus::NotProjector
        }
        Error::NotDensityMatrix { .. } | Error::NegativeProbability { .. } | Error::NotMaximal { .. } => {
            QdgStatus::NotDensityMatrix
        }
        Error::Incoherent(_) | Error::NotIncoherent => QdgStatus::Incoherent,
        Error::EmptyCredalSet { .. } => QdgStatus::EmptyCredalSet,
        Error::UndefinedConditioning { .. } => QdgStatus::UndefinedConditioning,
        Error::Unsupported(_) => QdgStatus::Unsupported,
        Error::NoConvergence { .. }
        | Error::SolverFailure(_)
        | Error::MaxIterations { .. }
        | Error::BracketFailure { .. } => QdgStatus::SolverFailure,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (QdgStatus, String)>) -> QdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QdgStatus::Panic
        }
    }
}

type FfiResult<T> = Result<T, (QdgStatus, String)>;

fn lift<T>(r: qdg::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QdgStatus, String) {
    (QdgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn cmatrix(n: usize, re: *const f64, im: *const f64) -> FfiResult<CMatrix> {
    if re.is_null() {
        return Err(null("matrix data"));
    }
    if n == 0 {
        return Err((QdgStatus::InvalidArgument, "dimension must be positive".into()));
    }
    let re = std::slice::from_raw_parts(re, n * n);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n * n)) };
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im.map_or(0.0, |v| v[i * n + j]))))
}

unsafe fn hermitian(n: usize, re: *const f64, im: *const f64) -> FfiResult<HermitianMatrix> {
    lift(HermitianMatrix::new(cmatrix(n, re, im)?))
}

unsafe fn density(n: usize, re: *const f64, im: *const f64) -> FfiResult<DensityMatrix> {
    lift(DensityMatrix::new(hermitian(n, re, im)?))
}

/// `count` matrices stored back to back.
unsafe fn hermitian_batch(n: usize, count: usize, re: *const f64, im: *const f64) -> FfiResult<Vec<HermitianMatrix>> {
    (0..count)
        .map(|k| hermitian(n, re.add(k * n * n), if im.is_null() { im } else { im.add(k * n * n) }))
        .collect()
}

unsafe fn set_ref<'a>(h: *const QdgCredalSet) -> FfiResult<&'a CredalSet> {
    h.as_ref().map(|s| &s.inner).ok_or_else(|| null("credal set handle"))
}

unsafe fn write_handle(out: *mut *mut QdgCredalSet, set: CredalSet) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(QdgCredalSet { inner: set }));
    Ok(())
}

unsafe fn write<T>(out: *mut T, v: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

/// Copies the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn qdg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let k = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, k);
                *buf.add(k) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qdg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Coherence of `count` gambles of dimension `n`. `strict[k]` is non-zero for
/// a strict assessment. On return `coherent` is 1 or 0 and `margin` holds the
/// margin; for incoherent input `alpha` (length `count`, may be null) and
/// `beta` (may be null) receive the partial-loss certificate.
///
/// # Safety
/// Arrays must hold `count * n * n` (matrices) and `count` (flags) elements.
#[no_mangle]
pub unsafe extern "C" fn qdg_check_coherence(
    n: usize,
    count: usize,
    re: *const f64,
    im: *const f64,
    strict: *const u8,
    coherent: *mut i32,
    margin: *mut f64,
    alpha: *mut f64,
    beta: *mut f64,
) -> QdgStatus {
    guard(|| {
        let assessments = assessments(n, count, re, im, strict)?;
        let r = lift(check_coherence(&assessments, n))?;
        write(coherent, i32::from(r.is_coherent()))?;
        write(margin, r.margin)?;
        if let Some(c) = &r.certificate {
            if !alpha.is_null() {
                ptr::copy_nonoverlapping(c.alpha.as_ptr(), alpha, count);
            }
            if !beta.is_null() {
                *beta = c.beta;
            }
        }
        Ok(())
    })
}

unsafe fn assessments(n: usize, count: usize, re: *const f64, im: *const f64, strict: *const u8) -> FfiResult<Vec<Assessment>> {
    if strict.is_null() && count > 0 {
        return Err(null("strictness flags"));
    }
    let gambles = hermitian_batch(n, count, re, im)?;
    Ok(gambles
        .into_iter()
        .enumerate()
        .map(|(k, g)| if *strict.add(k) != 0 { Assessment::strict(g) } else { Assessment::border(g) })
        .collect())
}

/// All density matrices of dimension `n`. Returns null for `n == 0`.
#[no_mangle]
pub extern "C" fn qdg_credal_vacuous(n: usize) -> *mut QdgCredalSet {
    if n == 0 {
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(QdgCredalSet { inner: CredalSet::vacuous(n) }))
}

/// Credal set dual to coherent assessments; `Incoherent` otherwise.
///
/// # Safety
/// As for [`qdg_check_coherence`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_from_assessments(
    n: usize,
    count: usize,
    re: *const f64,
    im: *const f64,
    strict: *const u8,
    out: *mut *mut QdgCredalSet,
) -> QdgStatus {
    guard(|| {
        let a = assessments(n, count, re, im, strict)?;
        write_handle(out, lift(qdg::credal::credal_from_assessments(&a, n))?)
    })
}

/// Convex hull of `count` density matrices.
///
/// # Safety
/// Arrays must hold `count * n * n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_from_extreme_points(
    n: usize,
    count: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QdgCredalSet,
) -> QdgStatus {
    guard(|| {
        let pts = hermitian_batch(n, count, re, im)?
            .into_iter()
            .map(|m| lift(DensityMatrix::new(m)))
            .collect::<FfiResult<Vec<_>>>()?;
        write_handle(out, lift(CredalSet::from_extreme_points(pts))?)
    })
}

/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_free(set: *mut QdgCredalSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Dimension of the set, 0 for a null handle.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_dim(set: *const QdgCredalSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.dim())
}

/// Lower and upper prevision of a gamble of the set's dimension.
///
/// # Safety
/// `set` must be live; arrays must hold `n * n` elements.
#[no_mangle]
pub unsafe extern "C" fn qdg_prevision(
    set: *const QdgCredalSet,
    re: *const f64,
    im: *const f64,
    lower: *mut f64,
    upper: *mut f64,
) -> QdgStatus {
    guard(|| {
        let s = set_ref(set)?;
        let g = hermitian(s.dim(), re, im)?;
        let p = lift(s.prevision(&g))?;
        write(lower, p.lower)?;
        write(upper, p.upper)
    })
}

/// Membership of a density matrix.
///
/// # Safety
/// As for [`qdg_prevision`].
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_contains(
    set: *const QdgCredalSet,
    re: *const f64,
    im: *const f64,
    member: *mut i32,
) -> QdgStatus {
    guard(|| {
        let s = set_ref(set)?;
        let rho = density(s.dim(), re, im)?;
        write(member, i32::from(lift(s.contains(&rho))?))
    })
}

/// Selective conditioning on a projector.
///
/// # Safety
/// As for [`qdg_prevision`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_condition(
    set: *const QdgCredalSet,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QdgCredalSet,
) -> QdgStatus {
    guard(|| {
        let s = set_ref(set)?;
        let p = lift(Projector::new(hermitian(s.dim(), re, im)?))?;
        write_handle(out, lift(condition_selective(s, &p))?)
    })
}

/// Evolution by a unitary (or, with `antiunitary != 0`, by `U` composed with
/// complex conjugation).
///
/// # Safety
/// As for [`qdg_credal_condition`].
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_evolve(
    set: *const QdgCredalSet,
    re: *const f64,
    im: *const f64,
    antiunitary: i32,
    out: *mut *mut QdgCredalSet,
) -> QdgStatus {
    guard(|| {
        let s = set_ref(set)?;
        let u = lift(UnitaryMap::new(cmatrix(s.dim(), re, im)?, antiunitary != 0))?;
        write_handle(out, lift(s.evolve(&u))?)
    })
}

/// Marginal on factor A (`keep == 0`) or B (otherwise) of a set on
/// `n_a * n_b` dimensions.
///
/// # Safety
/// `set` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdg_credal_marginal(
    set: *const QdgCredalSet,
    n_a: usize,
    n_b: usize,
    keep: i32,
    out: *mut *mut QdgCredalSet,
) -> QdgStatus {
    guard(|| {
        let s = set_ref(set)?;
        let keep = if keep == 0 { Subsystem::A } else { Subsystem::B };
        write_handle(out, lift(marginal(s, (n_a, n_b), keep))?)
    })
}

/// Natural extension of two marginal sets.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdg_natural_extension(
    a: *const QdgCredalSet,
    b: *const QdgCredalSet,
    out: *mut *mut QdgCredalSet,
) -> QdgStatus {
    guard(|| write_handle(out, lift(natural_extension(set_ref(a)?, set_ref(b)?))?))
}

/// Born probabilities of `count` projectors (a complete measurement) on a
/// state. `probs` receives `count` values.
///
/// # Safety
/// `rho_*` hold `n * n` elements, `proj_*` hold `count * n * n`.
#[no_mangle]
pub unsafe extern "C" fn qdg_born_probabilities(
    n: usize,
    rho_re: *const f64,
    rho_im: *const f64,
    count: usize,
    proj_re: *const f64,
    proj_im: *const f64,
    probs: *mut f64,
) -> QdgStatus {
    guard(|| {
        let rho = density(n, rho_re, rho_im)?;
        let m = lift(ProjectiveMeasurement::new(hermitian_batch(n, count, proj_re, proj_im)?))?;
        let p = lift(born_probabilities(&rho, &m))?;
        if probs.is_null() {
            return Err(null("probabilities"));
        }
        ptr::copy_nonoverlapping(p.as_ptr(), probs, p.len());
        Ok(())
    })
}

/// The four separability bounds of a state on `n_a * n_b` dimensions.
/// `min_eigenvalues` and `holds` receive four entries each.
///
/// # Safety
/// Arrays must hold `(n_a n_b)^2` elements; outputs four.
#[no_mangle]
pub unsafe extern "C" fn qdg_frechet_check(
    n_a: usize,
    n_b: usize,
    re: *const f64,
    im: *const f64,
    min_eigenvalues: *mut f64,
    holds: *mut i32,
) -> QdgStatus {
    guard(|| {
        let rho = density(n_a * n_b, re, im)?;
        let r = lift(frechet_check(&rho, (n_a, n_b)))?;
        if min_eigenvalues.is_null() || holds.is_null() {
            return Err(null("output array"));
        }
        for i in 0..4 {
            *min_eigenvalues.add(i) = r.min_eigenvalues[i];
            *holds.add(i) = i32::from(r.holds[i]);
        }
        Ok(())
    })
}

/// Runs a CLI command (e.g. `"check"`) on scenario JSON and returns the JSON
/// report through `report` (free with `qdg_string_free`) and the command's
/// exit code through `exit_code`.
///
/// # Safety
/// `command` and `scenario` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn qdg_run_scenario(
    command: *const c_char,
    scenario: *const c_char,
    report: *mut *mut c_char,
    exit_code: *mut i32,
) -> QdgStatus {
    guard(|| {
        if command.is_null() || scenario.is_null() {
            return Err(null("string argument"));
        }
        let cmd = CStr::from_ptr(command).to_str().map_err(|e| (QdgStatus::ParseError, e.to_string()))?;
        let cmd = Command::from_name(cmd).ok_or_else(|| (QdgStatus::InvalidArgument, format!("unknown command `{cmd}`")))?;
        let text = CStr::from_ptr(scenario).to_str().map_err(|e| (QdgStatus::ParseError, e.to_string()))?;
        let s = parse_scenario(text).map_err(|e| (QdgStatus::ParseError, e.to_string()))?;
        let mut tol = Tolerances::default();
        tol.apply(&s.tolerances).map_err(|e| (QdgStatus::InvalidArgument, e))?;
        let r = lift(dispatch(cmd, &s, &tol))?;
        let json = qdg::cli::emit_report(&r, Format::Json);
        if report.is_null() {
            return Err(null("report"));
        }
        write(exit_code, r.exit_code)?;
        *report = CString::new(json).map_err(|e| (QdgStatus::Panic, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qdg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
