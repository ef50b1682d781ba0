//! C interface to `ethlab`.
//!
//! Systems are opaque handles created by `ethlab_*_create` and released with
//! [`ethlab_system_free`]. Every fallible function returns an
//! [`EthlabStatus`]; on failure, [`ethlab_last_error`] describes the error
//! for the calling thread. Outputs are written through pointer arguments
//! only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ethlab::ansatz::{AnsatzInputs, AnsatzKind, AnsatzModel};
use ethlab::experiments::figures::measure_profile;
use ethlab::hamiltonians::{build_random_system, decompose_chain, BipartiteSystem, RandomSystemParams, SpinChainParams};
use ethlab::localize::localizability;
use ethlab::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EthlabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed arguments: bad dimensions, too-small buffers, unknown names.
    InvalidArgument = 2,
    /// Parameters that describe no valid system.
    Configuration = 3,
    /// The computation itself failed.
    Compute = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Density-of-states bins used when building ansatz inputs.
pub const ETHLAB_DENSITY_BINS: usize = 64;

/// A diagonalized bipartite system.
pub struct EthlabSystem {
    inner: BipartiteSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> EthlabStatus {
    match err {
        Error::InvalidInput(_) | Error::Dimension(_) | Error::Range(_) => EthlabStatus::InvalidArgument,
        e if e.exit_code() == 2 => EthlabStatus::Configuration,
        _ => EthlabStatus::Compute,
    }
}

struct Fail(EthlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EthlabStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EthlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EthlabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EthlabStatus::Panic
        }
    }
}

unsafe fn system<'a>(sys: *const EthlabSystem) -> Result<&'a BipartiteSystem, Fail> {
    sys.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn emit(out: *mut *mut EthlabSystem, inner: BipartiteSystem) {
    *out = Box::into_raw(Box::new(EthlabSystem { inner }));
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ethlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Mixed-field Ising chain of `l` sites cut after `l_a` sites.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ethlab_chain_create(
    l: usize,
    l_a: usize,
    j: f64,
    h_x: f64,
    h_z: f64,
    out: *mut *mut EthlabSystem,
) -> EthlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = decompose_chain(&SpinChainParams::new(l, j, h_x, h_z), l_a)?;
        emit(out, sys);
        Ok(())
    })
}

/// Random bipartite system with GOE factors and a coupling on `l_i` qubits
/// straddling the cut, scaled to `‖H_I‖ = f ‖H_0‖`.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ethlab_random_create(
    l_a: usize,
    l_b: usize,
    l_i: usize,
    f: f64,
    seed: u64,
    out: *mut *mut EthlabSystem,
) -> EthlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sys = build_random_system(&RandomSystemParams::new(l_a, l_b, l_i, f, seed))?;
        emit(out, sys);
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle from a create function not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ethlab_system_free(sys: *mut EthlabSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Total, A and B dimensions. Any output pointer may be null.
///
/// # Safety
/// `sys` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ethlab_system_dims(
    sys: *const EthlabSystem,
    dim: *mut usize,
    dim_a: *mut usize,
    dim_b: *mut usize,
) -> EthlabStatus {
    guard(|| {
        let s = system(sys)?;
        for (p, v) in [(dim, s.dim()), (dim_a, s.dim_a()), (dim_b, s.dim_b())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies the ascending eigenvalues of `H_T` into `buf`, which must hold
/// at least `dim` values.
///
/// # Safety
/// `sys` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ethlab_system_eigenvalues(
    sys: *const EthlabSystem,
    buf: *mut f64,
    len: usize,
) -> EthlabStatus {
    guard(|| {
        let s = system(sys)?;
        let e = s.spectrum_t().eigenvalues();
        if len < e.len() {
            return Err(Fail(
                EthlabStatus::InvalidArgument,
                format!("buffer holds {len} values, spectrum has {}", e.len()),
            ));
        }
        slice_mut(buf, len, "buf")?[..e.len()].copy_from_slice(e);
        Ok(())
    })
}

/// Scrambling width `σ_S` measured over the central `center_fraction` of
/// the spectrum.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ethlab_sigma_s(
    sys: *const EthlabSystem,
    center_fraction: f64,
    out: *mut f64,
) -> EthlabStatus {
    guard(|| {
        let s = system(sys)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = measure_profile(s, center_fraction)?.sigma_s;
        Ok(())
    })
}

/// Smallest local dimension `D_O` on which an operator with these
/// eigenvalues can act.
///
/// # Safety
/// `values` must be valid for `len` reads and `d_o` writable.
#[no_mangle]
pub unsafe extern "C" fn ethlab_localizability(
    values: *const f64,
    len: usize,
    tol: f64,
    d_o: *mut usize,
) -> EthlabStatus {
    guard(|| {
        let v = slice(values, len, "values")?;
        if d_o.is_null() {
            return Err(null("d_o"));
        }
        *d_o = localizability(v, tol)?.d_o;
        Ok(())
    })
}

/// Predicted mean `|O_αβ|²` at mean energy `ebar` for each of the `len`
/// values in `omegas`, written to `out`. `model` is a model name such as
/// `"exp_decay_flat_A"`.
///
/// # Safety
/// `sys` must be a live handle, `model` a nul-terminated string, and
/// `omegas` and `out` valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ethlab_predict(
    sys: *const EthlabSystem,
    model: *const c_char,
    sigma_s: f64,
    o2bar: f64,
    ebar: f64,
    omegas: *const f64,
    len: usize,
    out: *mut f64,
) -> EthlabStatus {
    guard(|| {
        let s = system(sys)?;
        if model.is_null() {
            return Err(null("model"));
        }
        let name = CStr::from_ptr(model)
            .to_str()
            .map_err(|_| Fail(EthlabStatus::InvalidArgument, "model name is not UTF-8".into()))?;
        let kind: AnsatzKind = name.parse()?;
        let w = slice(omegas, len, "omegas")?;
        let dst = slice_mut(out, len, "out")?;
        let inputs = AnsatzInputs::from_system(s, ETHLAB_DENSITY_BINS)?;
        let pred = AnsatzModel::new(kind, sigma_s, o2bar, &inputs)?.predict(ebar, w)?;
        dst.copy_from_slice(&pred.variance);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_categories() {
        assert_eq!(status_of(&Error::InvalidInput("x".into())), EthlabStatus::InvalidArgument);
        assert_eq!(status_of(&Error::Configuration("x".into())), EthlabStatus::Configuration);
        assert_eq!(status_of(&Error::Eigensolver("x".into())), EthlabStatus::Compute);
    }

    #[test]
    fn panics_are_contained() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, EthlabStatus::Panic);
        let msg = unsafe { CStr::from_ptr(ethlab_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
    }
}
