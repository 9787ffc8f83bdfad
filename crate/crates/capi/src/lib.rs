//! C ABI for the kobound library: opaque handles, integer status codes and
//! a thread-local last-error message. The header `include/kobound.h` is
//! generated by cbindgen at build time.

use kobound::density;
use kobound::error::Error;
use kobound::geom::{build_fermi_strip, CircleDomain, Disk, PunctureSet, SmoothLoop, Vec2};
use kobound::lattice::{self, Schedule, TorusLattice};
use kobound::select;
use kobound::strip_analysis;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KoboundStatus {
    Ok = 0,
    InvalidArgument = 1,
    OutsideDomain = 2,
    PointIsPuncture = 3,
    BudgetExceeded = 4,
    NumericalFailure = 5,
    NullPointer = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap();
    });
}

fn status_of(e: &Error) -> KoboundStatus {
    match e {
        Error::OutsideDomain | Error::OutsideModel => KoboundStatus::OutsideDomain,
        Error::PointIsPuncture => KoboundStatus::PointIsPuncture,
        Error::BudgetExceeded { .. } => KoboundStatus::BudgetExceeded,
        Error::InvalidConfig(_) | Error::InvalidInput(_) => KoboundStatus::InvalidArgument,
        _ => KoboundStatus::NumericalFailure,
    }
}

fn guarded<T>(out: *mut T, run: impl FnOnce() -> Result<T, Error>) -> KoboundStatus {
    if out.is_null() {
        set_error("null output pointer");
        return KoboundStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(run)) {
        Ok(Ok(value)) => {
            unsafe { out.write(value) };
            KoboundStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            KoboundStatus::Panic
        }
    }
}

/// Message describing the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kobound_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ----------------------------------------------------------------- domain

/// A planar circle domain (opaque).
pub struct KoboundDomain(CircleDomain);

/// Creates a circle domain. `inner_xyr` holds `n_inner` triples
/// `(cx, cy, r)`. Returns null on invalid input (see
/// `kobound_last_error_message`).
///
/// # Safety
/// `inner_xyr` must point to `3 * n_inner` doubles (or be null when
/// `n_inner` is 0).
#[no_mangle]
pub unsafe extern "C" fn kobound_domain_new(
    outer_cx: f64,
    outer_cy: f64,
    outer_radius: f64,
    inner_xyr: *const f64,
    n_inner: usize,
) -> *mut KoboundDomain {
    if n_inner > 0 && inner_xyr.is_null() {
        set_error("null inner-disk array");
        return std::ptr::null_mut();
    }
    let inner: Vec<Disk> = (0..n_inner)
        .map(|i| {
            let cx = unsafe { *inner_xyr.add(3 * i) };
            let cy = unsafe { *inner_xyr.add(3 * i + 1) };
            let r = unsafe { *inner_xyr.add(3 * i + 2) };
            Disk::new(Vec2::new(cx, cy), r)
        })
        .collect();
    match CircleDomain::new(Disk::new(Vec2::new(outer_cx, outer_cy), outer_radius), inner) {
        Ok(domain) => Box::into_raw(Box::new(KoboundDomain(domain))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `domain` must come from `kobound_domain_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kobound_domain_free(domain: *mut KoboundDomain) {
    if !domain.is_null() {
        drop(unsafe { Box::from_raw(domain) });
    }
}

/// Distance to the domain boundary, clamped to 0 outside.
///
/// # Safety
/// `domain` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kobound_domain_dist_to_boundary(
    domain: *const KoboundDomain,
    x: f64,
    y: f64,
) -> f64 {
    let domain = unsafe { &*domain };
    domain.0.dist_to_boundary(Vec2::new(x, y))
}

// ------------------------------------------------------------------- loop

/// A smooth closed curve (opaque).
pub struct KoboundLoop(SmoothLoop);

/// Circle loop handle; never fails for positive radius.
#[no_mangle]
pub extern "C" fn kobound_loop_circle(cx: f64, cy: f64, radius: f64) -> *mut KoboundLoop {
    if !(radius > 0.0) {
        set_error("radius must be positive");
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(KoboundLoop(SmoothLoop::circle(
        Vec2::new(cx, cy),
        radius,
    ))))
}

/// Ellipse loop handle. Returns null when the curve is rejected.
#[no_mangle]
pub extern "C" fn kobound_loop_ellipse(cx: f64, cy: f64, a: f64, b: f64) -> *mut KoboundLoop {
    match SmoothLoop::ellipse(Vec2::new(cx, cy), a, b) {
        Ok(l) => Box::into_raw(Box::new(KoboundLoop(l))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `lp` must come from a loop constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kobound_loop_free(lp: *mut KoboundLoop) {
    if !lp.is_null() {
        drop(unsafe { Box::from_raw(lp) });
    }
}

/// Euclidean length of the loop.
///
/// # Safety
/// `lp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kobound_loop_length(lp: *const KoboundLoop) -> f64 {
    unsafe { &*lp }.0.total_length()
}

// -------------------------------------------------------------- punctures

/// A validated puncture set (opaque).
pub struct KoboundPunctures(PunctureSet);

/// Builds a puncture set from `n` pairs `(x, y)`.
///
/// # Safety
/// `domain` must be live; `xy` must point to `2 * n` doubles (or be null
/// when `n` is 0).
#[no_mangle]
pub unsafe extern "C" fn kobound_punctures_new(
    domain: *const KoboundDomain,
    xy: *const f64,
    n: usize,
) -> *mut KoboundPunctures {
    if n > 0 && xy.is_null() {
        set_error("null puncture array");
        return std::ptr::null_mut();
    }
    let domain = unsafe { &*domain };
    let pts: Vec<Vec2> = (0..n)
        .map(|i| Vec2::new(unsafe { *xy.add(2 * i) }, unsafe { *xy.add(2 * i + 1) }))
        .collect();
    match PunctureSet::new(&domain.0, pts) {
        Ok(s) => Box::into_raw(Box::new(KoboundPunctures(s))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must come from `kobound_punctures_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kobound_punctures_free(s: *mut KoboundPunctures) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

// ---------------------------------------------------------------- density

/// Certified upper bound on the Kobayashi-Royden density at `(x, y)`.
///
/// # Safety
/// `domain` and `punctures` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kobound_upper_density(
    domain: *const KoboundDomain,
    punctures: *const KoboundPunctures,
    x: f64,
    y: f64,
    out: *mut f64,
) -> KoboundStatus {
    let domain = unsafe { &*domain };
    let punctures = unsafe { &*punctures };
    guarded(out, || {
        density::upper_density(&domain.0, &punctures.0, Vec2::new(x, y))
    })
}

/// Certified lower bound on the Kobayashi-Royden density at `(x, y)`.
///
/// # Safety
/// As `kobound_upper_density`.
#[no_mangle]
pub unsafe extern "C" fn kobound_lower_density(
    domain: *const KoboundDomain,
    punctures: *const KoboundPunctures,
    x: f64,
    y: f64,
    out: *mut f64,
) -> KoboundStatus {
    let domain = unsafe { &*domain };
    let punctures = unsafe { &*punctures };
    guarded(out, || {
        density::lower_density(&domain.0, &punctures.0, Vec2::new(x, y))
    })
}

// ------------------------------------------------------------------ strip

/// A Fermi strip around a loop (opaque).
pub struct KoboundStrip(kobound::geom::FermiStrip);

/// Builds the strip lattice; null on failure (inadmissible width, zero
/// clearance).
///
/// # Safety
/// `domain` and `lp` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn kobound_strip_build(
    domain: *const KoboundDomain,
    lp: *const KoboundLoop,
    delta: f64,
    n_tau: usize,
    n_u: usize,
) -> *mut KoboundStrip {
    let domain = unsafe { &*domain };
    let lp = unsafe { &*lp };
    match build_fermi_strip(&domain.0, &lp.0, delta, n_tau, n_u) {
        Ok(strip) => Box::into_raw(Box::new(KoboundStrip(strip))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `strip` must come from `kobound_strip_build` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kobound_strip_free(strip: *mut KoboundStrip) {
    if !strip.is_null() {
        drop(unsafe { Box::from_raw(strip) });
    }
}

/// Certified distance from the strip to the domain boundary.
///
/// # Safety
/// `strip` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kobound_strip_clearance(strip: *const KoboundStrip) -> f64 {
    unsafe { &*strip }.0.clearance()
}

/// Comparability constant of the strip (exactly 1 in the flat metric).
///
/// # Safety
/// `strip` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kobound_strip_kappa0(strip: *const KoboundStrip) -> f64 {
    unsafe { &*strip }.0.kappa0()
}

/// Adaptive quadrature of `upper_density^p` over the strip.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kobound_lp_strip_integral(
    domain: *const KoboundDomain,
    strip: *const KoboundStrip,
    punctures: *const KoboundPunctures,
    p: f64,
    out: *mut f64,
) -> KoboundStatus {
    let domain = unsafe { &*domain };
    let strip = unsafe { &*strip };
    let punctures = unsafe { &*punctures };
    guarded(out, || {
        strip_analysis::lp_strip_integral(&domain.0, &strip.0, &punctures.0, p)
    })
}

/// The explicit lemma constant `A` of the strip.
///
/// # Safety
/// `domain` and `strip` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kobound_lemma_constant_a(
    domain: *const KoboundDomain,
    strip: *const KoboundStrip,
    out: *mut f64,
) -> KoboundStatus {
    let domain = unsafe { &*domain };
    let strip = unsafe { &*strip };
    guarded(out, || {
        Ok(strip_analysis::lemma_constant_a(&domain.0, &strip.0))
    })
}

// ----------------------------------------------------------------- select

/// Flattened selection outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KoboundSelection {
    pub u0: f64,
    pub g_at_u0: f64,
    pub m_threshold: f64,
    pub holder_bound: f64,
    pub measured_upper_length: f64,
    pub clearance: f64,
}

/// The exponent schedule `p(s)`.
#[no_mangle]
pub extern "C" fn kobound_p_schedule(s: usize) -> f64 {
    select::p_schedule(s)
}

/// Offset selection over a grid of `n_grid` offsets (pass 0 for the
/// default).
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kobound_select_u0(
    domain: *const KoboundDomain,
    strip: *const KoboundStrip,
    punctures: *const KoboundPunctures,
    p: f64,
    n_grid: usize,
    out: *mut KoboundSelection,
) -> KoboundStatus {
    let domain = unsafe { &*domain };
    let strip = unsafe { &*strip };
    let punctures = unsafe { &*punctures };
    let n_grid = if n_grid == 0 {
        select::DEFAULT_U_GRID
    } else {
        n_grid
    };
    guarded(out, || {
        let sel = select::select_u0(&domain.0, &strip.0, &punctures.0, p, n_grid)?;
        Ok(KoboundSelection {
            u0: sel.u0,
            g_at_u0: sel.g_at_u0,
            m_threshold: sel.m_threshold,
            holder_bound: sel.holder_bound,
            measured_upper_length: sel.measured_upper_length,
            clearance: sel.clearance,
        })
    })
}

// ---------------------------------------------------------------- lattice

/// A fibre lattice with Gram form and monodromy (opaque).
pub struct KoboundLattice(TorusLattice);

/// Builds a rank-`rank` lattice from row-major `gram` (doubles) and
/// `monodromy` (64-bit integers).
///
/// # Safety
/// `gram` and `monodromy` must each point to `rank * rank` entries.
#[no_mangle]
pub unsafe extern "C" fn kobound_lattice_new(
    rank: usize,
    gram: *const f64,
    monodromy: *const i64,
) -> *mut KoboundLattice {
    if gram.is_null() || monodromy.is_null() {
        set_error("null matrix pointer");
        return std::ptr::null_mut();
    }
    let g: Vec<Vec<f64>> = (0..rank)
        .map(|i| (0..rank).map(|j| unsafe { *gram.add(i * rank + j) }).collect())
        .collect();
    let m: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| unsafe { *monodromy.add(i * rank + j) })
                .collect()
        })
        .collect();
    match TorusLattice::new(g, m) {
        Ok(lat) => Box::into_raw(Box::new(KoboundLattice(lat))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `lat` must come from `kobound_lattice_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kobound_lattice_free(lat: *mut KoboundLattice) {
    if !lat.is_null() {
        drop(unsafe { Box::from_raw(lat) });
    }
}

/// Exact displacement-bounded count with an explicit budget on `h`.
///
/// # Safety
/// `lat` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kobound_count_displacement(
    lat: *const KoboundLattice,
    h: f64,
    h_budget: f64,
    out: *mut u64,
) -> KoboundStatus {
    let lat = unsafe { &*lat };
    guarded(out, || {
        lattice::count_displacement_with_budget(&lat.0, h, h_budget)
    })
}

/// Displacement schedule: `kind` 0 is linear, 1 is sublinear.
#[no_mangle]
pub extern "C" fn kobound_h_schedule(s: usize, kind: i32, c: f64, c0: f64) -> f64 {
    let schedule = if kind == 0 {
        Schedule::Linear
    } else {
        Schedule::Sublinear
    };
    lattice::h_schedule(s, schedule, c, c0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_and_density_roundtrip() {
        unsafe {
            let domain = kobound_domain_new(0.0, 0.0, 1.0, std::ptr::null(), 0);
            assert!(!domain.is_null());
            let punctures = kobound_punctures_new(domain, std::ptr::null(), 0);
            assert!(!punctures.is_null());
            let mut out = 0.0;
            let status = kobound_upper_density(domain, punctures, 0.0, 0.0, &mut out);
            assert_eq!(status, KoboundStatus::Ok);
            assert!((out - 2.0).abs() < 1e-12);
            // outside the domain
            let status = kobound_upper_density(domain, punctures, 2.0, 0.0, &mut out);
            assert_eq!(status, KoboundStatus::OutsideDomain);
            let msg = std::ffi::CStr::from_ptr(kobound_last_error_message());
            assert!(!msg.to_str().unwrap().is_empty());
            kobound_punctures_free(punctures);
            kobound_domain_free(domain);
        }
    }

    #[test]
    fn invalid_domain_returns_null() {
        unsafe {
            let inner = [0.9, 0.0, 0.3]; // pokes out of the unit disk
            let domain = kobound_domain_new(0.0, 0.0, 1.0, inner.as_ptr(), 1);
            assert!(domain.is_null());
        }
    }

    #[test]
    fn strip_and_selection() {
        unsafe {
            let domain = kobound_domain_new(0.0, 0.0, 10.0, std::ptr::null(), 0);
            let lp = kobound_loop_circle(0.0, 0.0, 1.0);
            let strip = kobound_strip_build(domain, lp, 0.1, 128, 8);
            assert!(!strip.is_null());
            assert!((kobound_strip_kappa0(strip) - 1.0).abs() < 1e-12);
            assert!(kobound_strip_clearance(strip) > 8.8);

            let xy = [1.05, 0.0, -1.02, 0.1];
            let punctures = kobound_punctures_new(domain, xy.as_ptr(), 2);
            assert!(!punctures.is_null());

            let mut integral = 0.0;
            let status = kobound_lp_strip_integral(domain, strip, punctures, 1.5, &mut integral);
            assert_eq!(status, KoboundStatus::Ok);
            assert!(integral > 0.0);

            let mut a = 0.0;
            assert_eq!(
                kobound_lemma_constant_a(domain, strip, &mut a),
                KoboundStatus::Ok
            );
            let bound = a * 3.0 / 0.5;
            assert!(integral <= bound);

            let mut sel = KoboundSelection {
                u0: 0.0,
                g_at_u0: 0.0,
                m_threshold: 0.0,
                holder_bound: 0.0,
                measured_upper_length: 0.0,
                clearance: 0.0,
            };
            let p = kobound_p_schedule(2);
            let status = kobound_select_u0(domain, strip, punctures, p, 0, &mut sel);
            assert_eq!(status, KoboundStatus::Ok);
            assert!(sel.clearance > 0.0);
            assert!(sel.g_at_u0 <= sel.m_threshold * 1.05);
            assert!(sel.measured_upper_length <= sel.holder_bound * 1.001);

            // oversized width fails with a usable message
            let bad = kobound_strip_build(domain, lp, 5.0, 64, 8);
            assert!(bad.is_null());

            kobound_punctures_free(punctures);
            kobound_strip_free(strip);
            kobound_loop_free(lp);
            kobound_domain_free(domain);
        }
    }

    #[test]
    fn lattice_counts_through_ffi() {
        unsafe {
            let gram = [1.0, 0.0, 0.0, 1.0];
            let monodromy = [0i64, -1, 1, 0];
            let lat = kobound_lattice_new(2, gram.as_ptr(), monodromy.as_ptr());
            assert!(!lat.is_null());
            let mut n = 0u64;
            assert_eq!(
                kobound_count_displacement(lat, 10.0, 250.0, &mut n),
                KoboundStatus::Ok
            );
            assert_eq!(n, 317);
            assert_eq!(
                kobound_count_displacement(lat, 9999.0, 250.0, &mut n),
                KoboundStatus::BudgetExceeded
            );
            kobound_lattice_free(lat);

            let bad_monodromy = [2i64, 0, 0, 1];
            let bad = kobound_lattice_new(2, gram.as_ptr(), bad_monodromy.as_ptr());
            assert!(bad.is_null());
        }
        assert!((kobound_h_schedule(9, 0, 1.0, 0.0) - 10.0).abs() < 1e-12);
        assert!(
            (kobound_h_schedule(9, 1, 1.0, 0.0) - (10.0f64 * 11.0f64.ln()).sqrt()).abs() < 1e-12
        );
    }
}
