//! C interface to `nhdyn-core`.
//!
//! Matrices cross the boundary as row-major arrays of [`NhdynComplex`].
//! Every object is an opaque handle owned by the caller and released with
//! the matching `*_free` function. Every fallible function returns an
//! [`NhdynStatus`]; on failure [`nhdyn_last_error`] describes the problem.
//! Outputs are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nhdyn_core::biortho::{build_biorthogonal, BiorthogonalSystem};
use nhdyn_core::fermion::{DmModel, OccupationLabel};
use nhdyn_core::gamma::{GammaContext, SymmetryBasis};
use nhdyn_core::linalg::{expm, op_norm, StateVector};
use nhdyn_core::scenario::{max_dim_from_env, run, RunOptions, ScenarioConfig, ScenarioError};
use nhdyn_core::{ComplexMatrix, Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NhdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Validation = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NhdynComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for NhdynComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<NhdynComplex> for C64 {
    fn from(z: NhdynComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

pub struct NhdynMatrix(ComplexMatrix);
pub struct NhdynSymmetryBasis(SymmetryBasis);
pub struct NhdynBiortho(BiorthogonalSystem);
pub struct NhdynDmModel(DmModel);

struct Failure(NhdynStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension(_)
            | Error::NonFinite { .. }
            | Error::NotNormalized { .. }
            | Error::ClosedFormUnavailable(_)
            | Error::SizeLimit { .. }
            | Error::InvalidArgument(_) => NhdynStatus::InvalidArgument,
            _ => NhdynStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let status = match e {
            ScenarioError::Validation(_) => NhdynStatus::Validation,
            ScenarioError::Numerical(_) => NhdynStatus::Numerical,
            ScenarioError::Io(_) => NhdynStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NhdynStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NhdynStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NhdynStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NhdynStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NhdynStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn nhdyn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn nhdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a `rows × cols` matrix from `rows * cols` row-major entries.
///
/// # Safety
/// `entries` must point to `rows * cols` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_matrix_new(
    rows: usize,
    cols: usize,
    entries: *const NhdynComplex,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("rows * cols overflows"))?;
        let data: Vec<C64> = slice(entries, len, "entries")?
            .iter()
            .map(|&z| z.into())
            .collect();
        let m = ComplexMatrix::from_row_major(rows, cols, &data)?;
        *out = boxed(NhdynMatrix(m));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_matrix_free(m: *mut NhdynMatrix) {
    free(m)
}

/// # Safety
/// `m` must be a live matrix handle; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_matrix_shape(
    m: *const NhdynMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> NhdynStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let (r, c) = (out_ptr(rows, "rows")?, out_ptr(cols, "cols")?);
        (*r, *c) = m.0.shape();
        Ok(())
    })
}

/// Copies the entries row-major into `buf`, which holds `len` values.
///
/// # Safety
/// `m` must be a live handle; `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_matrix_copy(
    m: *const NhdynMatrix,
    buf: *mut NhdynComplex,
    len: usize,
) -> NhdynStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        let data = m.0.to_row_major();
        if len < data.len() {
            return Err(invalid(format!(
                "buffer holds {len} entries, matrix has {}",
                data.len()
            )));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, data.len());
        for (d, s) in dst.iter_mut().zip(data) {
            *d = s.into();
        }
        Ok(())
    })
}

unsafe fn unary(
    a: *const NhdynMatrix,
    out: *mut *mut NhdynMatrix,
    f: impl FnOnce(&ComplexMatrix) -> nhdyn_core::Result<ComplexMatrix>,
) -> NhdynStatus {
    guard(|| {
        let a = deref(a, "matrix")?;
        let out = out_ptr(out, "out")?;
        *out = boxed(NhdynMatrix(f(&a.0)?));
        Ok(())
    })
}

/// Matrix exponential `e^A`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_expm(
    a: *const NhdynMatrix,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    unary(a, out, expm)
}

/// Operator 2-norm (largest singular value).
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_op_norm(a: *const NhdynMatrix, out: *mut f64) -> NhdynStatus {
    guard(|| {
        let a = deref(a, "matrix")?;
        *out_ptr(out, "out")? = op_norm(&a.0)?;
        Ok(())
    })
}

/// `e^{iH†t} X e^{−iHt}`.
///
/// # Safety
/// `h` and `x` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_gamma_t(
    h: *const NhdynMatrix,
    x: *const NhdynMatrix,
    t: f64,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let (h, x) = (deref(h, "h")?, deref(x, "x")?);
        let out = out_ptr(out, "out")?;
        let ctx = GammaContext::new(h.0.clone())?;
        *out = boxed(NhdynMatrix(ctx.gamma_t(&x.0, t)?));
        Ok(())
    })
}

/// `i(H†X − XH)`.
///
/// # Safety
/// `h` and `x` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_delta_gamma(
    h: *const NhdynMatrix,
    x: *const NhdynMatrix,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let (h, x) = (deref(h, "h")?, deref(x, "x")?);
        let out = out_ptr(out, "out")?;
        let ctx = GammaContext::new(h.0.clone())?;
        *out = boxed(NhdynMatrix(ctx.delta_gamma(&x.0)?));
        Ok(())
    })
}

/// State-dependent generator `H + ½⟨Ψ̂,(H†−H)Ψ̂⟩𝟙` for a unit vector of
/// length `len`.
///
/// # Safety
/// `h` must be a live handle; `state` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_h_nl(
    h: *const NhdynMatrix,
    state: *const NhdynComplex,
    len: usize,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let h = deref(h, "h")?;
        let v = StateVector::from_iterator(
            len,
            slice(state, len, "state")?.iter().map(|&z| C64::from(z)),
        );
        let out = out_ptr(out, "out")?;
        *out = boxed(NhdynMatrix(nhdyn_core::flow::h_nl(&h.0, &v)?));
        Ok(())
    })
}

/// Orthonormal basis of solutions of `H†X = XH`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_symmetry_basis(
    h: *const NhdynMatrix,
    rank_tol_rel: f64,
    out: *mut *mut NhdynSymmetryBasis,
) -> NhdynStatus {
    guard(|| {
        let h = deref(h, "h")?;
        let out = out_ptr(out, "out")?;
        let ctx = GammaContext::new(h.0.clone())?;
        *out = boxed(NhdynSymmetryBasis(ctx.gamma_symmetry_basis(rank_tol_rel)?));
        Ok(())
    })
}

/// # Safety
/// `b` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_symmetry_basis_len(
    b: *const NhdynSymmetryBasis,
    len: *mut usize,
) -> NhdynStatus {
    guard(|| {
        *out_ptr(len, "len")? = deref(b, "basis")?.0.len();
        Ok(())
    })
}

/// Copies generator `k` (0-based) into a new matrix handle.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_symmetry_basis_get(
    b: *const NhdynSymmetryBasis,
    k: usize,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let b = deref(b, "basis")?;
        let out = out_ptr(out, "out")?;
        let x =
            b.0.generators
                .get(k)
                .ok_or_else(|| invalid(format!("generator {k} out of range")))?;
        *out = boxed(NhdynMatrix(x.clone()));
        Ok(())
    })
}

/// # Safety
/// `b` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_symmetry_basis_free(b: *mut NhdynSymmetryBasis) {
    free(b)
}

/// Biorthogonal eigensystem of a diagonalizable `H` with simple spectrum.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_biortho_new(
    h: *const NhdynMatrix,
    tol_distinct: f64,
    out: *mut *mut NhdynBiortho,
) -> NhdynStatus {
    guard(|| {
        let h = deref(h, "h")?;
        let out = out_ptr(out, "out")?;
        *out = boxed(NhdynBiortho(build_biorthogonal(&h.0, tol_distinct)?));
        Ok(())
    })
}

/// Writes the eigenvalues (sorted by real, then imaginary part) into `buf`.
///
/// # Safety
/// `b` must be a live handle; `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_biortho_eigenvalues(
    b: *const NhdynBiortho,
    buf: *mut NhdynComplex,
    len: usize,
) -> NhdynStatus {
    guard(|| {
        let b = deref(b, "biortho")?;
        if len < b.0.dim {
            return Err(invalid(format!(
                "buffer holds {len} entries, need {}",
                b.0.dim
            )));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, b.0.dim);
        for (d, &e) in dst.iter_mut().zip(&b.0.eigenvalues) {
            *d = e.into();
        }
        Ok(())
    })
}

/// Condition number of the eigenvector matrix.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_biortho_condition(
    b: *const NhdynBiortho,
    out: *mut f64,
) -> NhdynStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(b, "biortho")?.0.condition;
        Ok(())
    })
}

/// Metric operators `S_φ` (`which == 0`) or `S_Ψ` (`which == 1`).
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_biortho_metric(
    b: *const NhdynBiortho,
    which: u32,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let b = deref(b, "biortho")?;
        let out = out_ptr(out, "out")?;
        let m = match which {
            0 => &b.0.s_phi,
            1 => &b.0.s_psi,
            _ => return Err(invalid(format!("metric selector {which} is not 0 or 1"))),
        };
        *out = boxed(NhdynMatrix(m.clone()));
        Ok(())
    })
}

/// # Safety
/// `b` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_biortho_free(b: *mut NhdynBiortho) {
    free(b)
}

/// Three-mode fermion model `H = b₁†(λb₂ + μb₃)`, `λ, μ > 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_dm_model_new(
    lambda: f64,
    mu: f64,
    out: *mut *mut NhdynDmModel,
) -> NhdynStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(NhdynDmModel(DmModel::new(lambda, mu)?));
        Ok(())
    })
}

/// Copies the 8×8 Hamiltonian into a new matrix handle.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_dm_model_hamiltonian(
    m: *const NhdynDmModel,
    out: *mut *mut NhdynMatrix,
) -> NhdynStatus {
    guard(|| {
        let m = deref(m, "model")?;
        *out_ptr(out, "out")? = boxed(NhdynMatrix(m.0.h().clone()));
        Ok(())
    })
}

/// Occupations `n₁, n₂, n₃` along the normalized trajectory started at the
/// basis state `label` (e.g. "011"). Writes `3 * len` values, one triple
/// per time.
///
/// # Safety
/// `m` must be a live handle, `label` a NUL-terminated string, `times` must
/// hold `len` values and `out` must have room for `3 * len`.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_dm_occupations(
    m: *const NhdynDmModel,
    label: *const c_char,
    times: *const f64,
    len: usize,
    out: *mut f64,
) -> NhdynStatus {
    guard(|| {
        let m = deref(m, "model")?;
        let label: OccupationLabel = c_str(label, "label")?.parse()?;
        let times = slice(times, len, "times")?;
        if len == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let traj = m.0.simulate_occupations(&label, times)?;
        let dst = std::slice::from_raw_parts_mut(out, 3 * len);
        for k in 0..len {
            for j in 0..3 {
                dst[3 * k + j] = traj.n[j][k];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_dm_model_free(m: *mut NhdynDmModel) {
    free(m)
}

/// Runs a JSON scenario. When `out_dir` is non-NULL the CSV files and
/// report.json are written there. `report` receives the report JSON (free
/// it with [`nhdyn_string_free`]) and `exit_status` the report's exit
/// status (0, or 3 when some task failed numerically).
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `out_dir` NULL or one;
/// `report` and `exit_status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nhdyn_run_scenario_json(
    config_json: *const c_char,
    out_dir: *const c_char,
    report: *mut *mut c_char,
    exit_status: *mut i32,
) -> NhdynStatus {
    guard(|| {
        let text = c_str(config_json, "config_json")?;
        let out_dir = if out_dir.is_null() {
            None
        } else {
            Some(PathBuf::from(c_str(out_dir, "out_dir")?))
        };
        let report = out_ptr(report, "report")?;
        let exit_status = out_ptr(exit_status, "exit_status")?;
        let config = ScenarioConfig::from_json(text)?;
        let options = RunOptions {
            out_dir,
            max_dim: max_dim_from_env()?,
        };
        let r = run(&config, &options)?;
        let json = CString::new(r.to_json()).map_err(|_| invalid("report contains NUL"))?;
        *report = json.into_raw();
        *exit_status = r.exit_status;
        Ok(())
    })
}
