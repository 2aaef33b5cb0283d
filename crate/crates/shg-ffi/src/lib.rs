//! C interface to shg-core.
//!
//! Every function returns a [`ShgStatus`]. On failure the message is kept
//! per thread and can be copied out with [`shg_last_error`]. Panics are
//! caught at the boundary and reported as `ShgStatus::Panic`.

use shg_core::equilibrium::{density, fourier_g_at_i, solve_endpoints_with, Density, DensityConfig, NewtonConfig, Support};
use shg_core::model::{derive_scales, ModelParams};
use shg_core::tba::{solve_tba, GridConfig, TbaSolution};
use shg_core::wiener_hopf::{constants, Which, WhFactors};
use shg_core::Error;
use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShgStatus {
    Ok = 0,
    Domain = 1,
    Numerical = 2,
    NullPointer = 3,
    Panic = 4,
}

/// Opaque model handle: parameters, TBA solution and the lazily computed
/// support and density.
pub struct ShgModel {
    params: ModelParams,
    tba: TbaSolution,
    wh: WhFactors,
    support: Option<Support>,
    density: Option<Density>,
}

impl ShgModel {
    fn support(&mut self) -> Result<Support, Error> {
        if self.support.is_none() {
            let fgi = fourier_g_at_i(Some(&self.tba));
            let (s, _) = solve_endpoints_with(&self.params, &self.wh, fgi, &NewtonConfig::default())?;
            self.support = Some(s);
        }
        Ok(self.support.unwrap())
    }

    fn density(&mut self) -> Result<&Density, Error> {
        if self.density.is_none() {
            let s = self.support()?;
            let d = density(&self.params, Some(&self.tba), &self.wh, &s, &DensityConfig::default())?;
            self.density = Some(d);
        }
        Ok(self.density.as_ref().unwrap())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ShgStatus {
    match e {
        Error::Numerical(_) | Error::Check(_) => ShgStatus::Numerical,
        Error::Domain(_) | Error::Io(_) | Error::Json(_) => ShgStatus::Domain,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ShgStatus>) -> ShgStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShgStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ShgStatus::Panic
        }
    }
}

fn fail(e: Error) -> ShgStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> ShgStatus {
    set_error(format!("{what} is null"));
    ShgStatus::NullPointer
}

/// Build a model and solve its TBA equation with the default grid.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn shg_model_new(r: f64, b: f64, alpha: f64, n: u64, eta: f64, out: *mut *mut ShgModel) -> ShgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let params = derive_scales(r, b, alpha, n, eta).map_err(fail)?;
        let tba = solve_tba(r, b, &GridConfig::default()).map_err(fail)?;
        let wh = WhFactors::from_params(&params).map_err(fail)?;
        let m = ShgModel { params, tba, wh, support: None, density: None };
        *out = Box::into_raw(Box::new(m));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`shg_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shg_model_free(model: *mut ShgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Support endpoints a_N < 0 < b_N.
///
/// # Safety
/// `model` must be a live handle; `a` and `b` writable.
#[no_mangle]
pub unsafe extern "C" fn shg_model_endpoints(model: *mut ShgModel, a: *mut f64, b: *mut f64) -> ShgStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        if a.is_null() || b.is_null() {
            return Err(null("output pointer"));
        }
        let s = m.support().map_err(fail)?;
        *a = s.a_n;
        *b = s.b_n;
        Ok(())
    })
}

/// Large-N constants c0, d0 and d1.
///
/// # Safety
/// `model` must be a live handle; the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn shg_model_constants(model: *const ShgModel, c0: *mut f64, d0: *mut f64, d1: *mut f64) -> ShgStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if c0.is_null() || d0.is_null() || d1.is_null() {
            return Err(null("output pointer"));
        }
        let c = constants(&m.params, Which::All).map_err(fail)?;
        *c0 = c.c0;
        *d0 = c.d0;
        *d1 = c.d1;
        Ok(())
    })
}

/// Density samples. Writes at most `cap` pairs into `xi` and `rho` and the
/// full sample count into `len`; call with `cap = 0` to query the size.
///
/// # Safety
/// `model` must be a live handle, `len` writable, and `xi`, `rho` valid for
/// `cap` elements when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn shg_model_density(
    model: *mut ShgModel,
    xi: *mut f64,
    rho: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ShgStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        if len.is_null() || (cap > 0 && (xi.is_null() || rho.is_null())) {
            return Err(null("output pointer"));
        }
        let d = m.density().map_err(fail)?;
        let k = cap.min(d.xi_grid.len());
        if k > 0 {
            std::slice::from_raw_parts_mut(xi, k).copy_from_slice(&d.xi_grid[..k]);
            std::slice::from_raw_parts_mut(rho, k).copy_from_slice(&d.rho_values[..k]);
        }
        *len = d.xi_grid.len();
        Ok(())
    })
}

/// First moment of the equilibrium density.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shg_model_first_moment(model: *mut ShgModel, out: *mut f64) -> ShgStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.density().map_err(fail)?.first_moment();
        Ok(())
    })
}

/// Copy the calling thread's last error message, NUL-terminated and
/// truncated to `cap` bytes. Returns the untruncated length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn shg_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let k = e.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr(), buf as *mut u8, k);
            *buf.add(k) = 0;
        }
        e.len()
    })
}
