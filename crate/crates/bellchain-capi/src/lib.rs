//! C bindings for the chained-measure library.
//!
//! Scenarios are opaque handles created and freed through this interface;
//! every fallible call returns a [`BellchainStatus`] and leaves a descriptive
//! message readable via [`bellchain_last_error`] on failure. The generated
//! header lives in `include/bellchain.h` and is refreshed on every build.

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};

use bellchain::{
    chained_value_closed_form, chained_value_trace, equally_spaced_settings,
    estimate_chained, local_deterministic_minimum, lp_max_advantage, sample_rounds,
    settings_for_epsilon, EntangledPairState, Error, MeasurementAngle, Schedule,
    ScenarioSettings,
};
use libc::{c_char, c_int};

/// Result of every fallible call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellchainStatus {
    /// The call succeeded and all requested outputs were written.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent; see bellchain_last_error.
    InvalidArgument = 2,
    /// The interior-point solver failed to converge.
    SolverFailure = 3,
    /// An internal invariant failed; see bellchain_last_error.
    Internal = 4,
}

/// A measurement scenario: one list of analyzer angles per party.
pub struct BellchainScenario {
    settings: ScenarioSettings,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn classify(error: &Error) -> BellchainStatus {
    match error {
        Error::Solver(_) => BellchainStatus::SolverFailure,
        _ => BellchainStatus::InvalidArgument,
    }
}

/// Runs a fallible body, translating errors and panics into status codes.
fn ffi_call(body: impl FnOnce() -> bellchain::Result<()>) -> BellchainStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BellchainStatus::Ok,
        Ok(Err(error)) => {
            set_last_error(&error.to_string());
            classify(&error)
        }
        Err(_) => {
            set_last_error("internal panic");
            BellchainStatus::Internal
        }
    }
}

fn state_from(alpha: f64) -> bellchain::Result<EntangledPairState> {
    EntangledPairState::new(alpha)
}

/// Version of the underlying library as a static NUL-terminated string.
/// The pointer is valid for the lifetime of the process; do not free it.
#[no_mangle]
pub extern "C" fn bellchain_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on the calling thread, or null
/// when no call on this thread has failed yet. The pointer stays valid until
/// the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn bellchain_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |text| text.as_ptr())
    })
}

/// Creates the equally spaced scenario with `size` settings per party.
///
/// # Safety
/// `out` must point to writable storage for one pointer. On success it
/// receives a handle that must be released with [`bellchain_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn bellchain_scenario_equally_spaced(
    size: usize,
    out: *mut *mut BellchainScenario,
) -> BellchainStatus {
    if out.is_null() {
        set_last_error("out is null");
        return BellchainStatus::NullPointer;
    }
    ffi_call(|| {
        let settings = equally_spaced_settings(size)?;
        *out = Box::into_raw(Box::new(BellchainScenario { settings }));
        Ok(())
    })
}

/// Creates the smallest equally spaced scenario whose value on the maximally
/// entangled state stays below `epsilon / 2`. Writes the chosen size to
/// `out_size` when that pointer is non-null.
///
/// # Safety
/// `out` must point to writable storage for one pointer; `out_size` must be
/// null or point to writable storage for one `uintptr_t`. On success `out`
/// receives a handle that must be released with [`bellchain_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn bellchain_scenario_for_epsilon(
    epsilon: f64,
    out_size: *mut usize,
    out: *mut *mut BellchainScenario,
) -> BellchainStatus {
    if out.is_null() {
        set_last_error("out is null");
        return BellchainStatus::NullPointer;
    }
    ffi_call(|| {
        let (size, settings) = settings_for_epsilon(epsilon)?;
        if !out_size.is_null() {
            *out_size = size;
        }
        *out = Box::into_raw(Box::new(BellchainScenario { settings }));
        Ok(())
    })
}

/// Creates a scenario from caller-supplied analyzer angles in radians.
///
/// # Safety
/// `alice` and `bob` must each point to `size` readable doubles, and `out`
/// must point to writable storage for one pointer. On success `out` receives
/// a handle that must be released with [`bellchain_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn bellchain_scenario_custom(
    alice: *const f64,
    bob: *const f64,
    size: usize,
    out: *mut *mut BellchainScenario,
) -> BellchainStatus {
    if alice.is_null() || bob.is_null() || out.is_null() {
        set_last_error("alice, bob, and out must be non-null");
        return BellchainStatus::NullPointer;
    }
    let alice = std::slice::from_raw_parts(alice, size);
    let bob = std::slice::from_raw_parts(bob, size);
    ffi_call(|| {
        let settings = ScenarioSettings::new(
            alice.iter().copied().map(MeasurementAngle::new).collect(),
            bob.iter().copied().map(MeasurementAngle::new).collect(),
        )?;
        *out = Box::into_raw(Box::new(BellchainScenario { settings }));
        Ok(())
    })
}

/// Number of settings per party, or 0 when `scenario` is null.
///
/// # Safety
/// `scenario` must be null or a handle returned by this interface that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn bellchain_scenario_size(scenario: *const BellchainScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).settings.n()
}

/// Releases a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a handle returned by this interface, and must
/// not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn bellchain_scenario_free(scenario: *mut BellchainScenario) {
    if scenario.is_null() {
        return;
    }
    drop(Box::from_raw(scenario));
}

/// Chained measure of the two-qubit state with weight `alpha`, evaluated term
/// by term from the density matrix.
///
/// # Safety
/// `scenario` must be a live handle from this interface and `out` must point
/// to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn bellchain_chained_value(
    alpha: f64,
    scenario: *const BellchainScenario,
    out: *mut f64,
) -> BellchainStatus {
    if scenario.is_null() || out.is_null() {
        set_last_error("scenario and out must be non-null");
        return BellchainStatus::NullPointer;
    }
    let settings = &(*scenario).settings;
    ffi_call(|| {
        let state = state_from(alpha)?;
        *out = chained_value_trace(&state, settings).value;
        Ok(())
    })
}

/// Chained measure via the closed form; agrees with
/// [`bellchain_chained_value`] to better than 1e-9.
///
/// # Safety
/// Same contract as [`bellchain_chained_value`].
#[no_mangle]
pub unsafe extern "C" fn bellchain_chained_value_closed_form(
    alpha: f64,
    scenario: *const BellchainScenario,
    out: *mut f64,
) -> BellchainStatus {
    if scenario.is_null() || out.is_null() {
        set_last_error("scenario and out must be non-null");
        return BellchainStatus::NullPointer;
    }
    let settings = &(*scenario).settings;
    ffi_call(|| {
        let state = state_from(alpha)?;
        *out = chained_value_closed_form(&state, settings);
        Ok(())
    })
}

/// Minimum of the chained measure over local deterministic strategies for a
/// scenario with `size` settings per party (exactly 1 for all sizes).
///
/// # Safety
/// `out` must point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn bellchain_local_deterministic_minimum(
    size: usize,
    out: *mut f64,
) -> BellchainStatus {
    if out.is_null() {
        set_last_error("out is null");
        return BellchainStatus::NullPointer;
    }
    ffi_call(|| {
        *out = local_deterministic_minimum(size)?;
        Ok(())
    })
}

/// Largest one-sided predictive advantage achievable by any signal-local,
/// setting-independent decomposition with `z_count` atoms, found by
/// bisecting linear-program feasibility. Optional outputs may be null.
///
/// # Safety
/// `scenario` must be a live handle from this interface; `out_t_star` must
/// point to writable storage for one double; `out_a_star`, `out_sign`, and
/// `out_zero_certificate` must each be null or point to writable storage for
/// their type.
#[no_mangle]
pub unsafe extern "C" fn bellchain_max_advantage(
    alpha: f64,
    scenario: *const BellchainScenario,
    z_count: usize,
    out_t_star: *mut f64,
    out_a_star: *mut usize,
    out_sign: *mut c_int,
    out_zero_certificate: *mut bool,
) -> BellchainStatus {
    if scenario.is_null() || out_t_star.is_null() {
        set_last_error("scenario and out_t_star must be non-null");
        return BellchainStatus::NullPointer;
    }
    let settings = &(*scenario).settings;
    ffi_call(|| {
        let state = state_from(alpha)?;
        let result = lp_max_advantage(&state, settings, z_count)?;
        *out_t_star = result.t_star;
        if !out_a_star.is_null() {
            *out_a_star = result.a_star;
        }
        if !out_sign.is_null() {
            *out_sign = c_int::from(result.sign);
        }
        if !out_zero_certificate.is_null() {
            *out_zero_certificate = result.zero_certificate;
        }
        Ok(())
    })
}

/// Samples `rounds` measurement rounds cycling through the chain pairs and
/// writes the plug-in estimate and the high-confidence upper bound on the
/// chained measure. `out_estimate` may be null.
///
/// # Safety
/// `scenario` must be a live handle from this interface; `out_certified`
/// must point to writable storage for one double; `out_estimate` must be
/// null or point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn bellchain_certified_epsilon(
    alpha: f64,
    scenario: *const BellchainScenario,
    rounds: u64,
    seed: u64,
    confidence: f64,
    out_estimate: *mut f64,
    out_certified: *mut f64,
) -> BellchainStatus {
    if scenario.is_null() || out_certified.is_null() {
        set_last_error("scenario and out_certified must be non-null");
        return BellchainStatus::NullPointer;
    }
    let settings = &(*scenario).settings;
    ffi_call(|| {
        let state = state_from(alpha)?;
        let records = sample_rounds(&state, settings, rounds, seed, Schedule::ChainOnly)?;
        let certificate = estimate_chained(&records, settings, confidence)?;
        if !out_estimate.is_null() {
            *out_estimate = certificate.i_n_hat;
        }
        *out_certified = certificate.certified_epsilon;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    fn make_scenario(size: usize) -> *mut BellchainScenario {
        let mut handle = ptr::null_mut();
        let status = unsafe { bellchain_scenario_equally_spaced(size, &mut handle) };
        assert_eq!(status, BellchainStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn version_is_a_static_string() {
        let ptr = bellchain_version();
        assert!(!ptr.is_null());
        let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
        assert!(text.split('.').count() >= 3);
    }

    #[test]
    fn trace_and_closed_form_agree_through_the_interface() {
        let scenario = make_scenario(2);
        let (mut trace, mut closed) = (0.0, 0.0);
        unsafe {
            assert_eq!(
                bellchain_chained_value(std::f64::consts::FRAC_1_SQRT_2, scenario, &mut trace),
                BellchainStatus::Ok
            );
            assert_eq!(
                bellchain_chained_value_closed_form(
                    std::f64::consts::FRAC_1_SQRT_2,
                    scenario,
                    &mut closed
                ),
                BellchainStatus::Ok
            );
            bellchain_scenario_free(scenario);
        }
        assert!((trace - (2.0 - 2.0f64.sqrt())).abs() < 1e-12);
        assert!((trace - closed).abs() < 1e-12);
    }

    #[test]
    fn epsilon_constructor_reports_the_chosen_size() {
        let mut size = 0usize;
        let mut handle = ptr::null_mut();
        let status = unsafe { bellchain_scenario_for_epsilon(0.5, &mut size, &mut handle) };
        assert_eq!(status, BellchainStatus::Ok);
        assert_eq!(size, 5);
        assert_eq!(unsafe { bellchain_scenario_size(handle) }, 5);
        unsafe { bellchain_scenario_free(handle) };
    }

    #[test]
    fn custom_angles_match_the_equally_spaced_constructor() {
        let n = 3usize;
        let alice: Vec<f64> = (0..n).map(|k| std::f64::consts::PI * k as f64 / 3.0).collect();
        let bob: Vec<f64> = (0..n)
            .map(|l| std::f64::consts::PI * (l as f64 + 0.5) / 3.0)
            .collect();
        let mut custom = ptr::null_mut();
        let status = unsafe {
            bellchain_scenario_custom(alice.as_ptr(), bob.as_ptr(), n, &mut custom)
        };
        assert_eq!(status, BellchainStatus::Ok);
        let spaced = make_scenario(n);
        let (mut v1, mut v2) = (0.0, 0.0);
        unsafe {
            bellchain_chained_value(0.8, custom, &mut v1);
            bellchain_chained_value(0.8, spaced, &mut v2);
            bellchain_scenario_free(custom);
            bellchain_scenario_free(spaced);
        }
        assert_eq!(v1, v2);
    }

    #[test]
    fn advantage_search_reaches_one_for_an_uncorrelated_state() {
        let scenario = make_scenario(2);
        let mut t_star = 0.0;
        let mut a_star = usize::MAX;
        let mut sign = 0;
        let mut zero = true;
        let status = unsafe {
            bellchain_max_advantage(
                1.0,
                scenario,
                1,
                &mut t_star,
                &mut a_star,
                &mut sign,
                &mut zero,
            )
        };
        unsafe { bellchain_scenario_free(scenario) };
        assert_eq!(status, BellchainStatus::Ok);
        assert!((t_star - 1.0).abs() < 1e-7);
        assert_eq!(a_star, 0);
        assert_eq!(sign, 1);
        assert!(!zero);
    }

    #[test]
    fn certificates_come_back_ordered() {
        let scenario = make_scenario(3);
        let (mut estimate, mut certified) = (0.0, 0.0);
        let status = unsafe {
            bellchain_certified_epsilon(
                std::f64::consts::FRAC_1_SQRT_2,
                scenario,
                30_000,
                7,
                0.99,
                &mut estimate,
                &mut certified,
            )
        };
        unsafe { bellchain_scenario_free(scenario) };
        assert_eq!(status, BellchainStatus::Ok);
        assert!(certified > estimate);
        assert!(estimate > 0.0);
    }

    #[test]
    fn local_floor_is_reachable() {
        let mut floor = 0.0;
        assert_eq!(
            unsafe { bellchain_local_deterministic_minimum(4, &mut floor) },
            BellchainStatus::Ok
        );
        assert_eq!(floor, 1.0);
    }

    #[test]
    fn errors_set_codes_and_messages() {
        let mut handle = ptr::null_mut();
        assert_eq!(
            unsafe { bellchain_scenario_equally_spaced(1, &mut handle) },
            BellchainStatus::InvalidArgument
        );
        let message = unsafe { CStr::from_ptr(bellchain_last_error()) }
            .to_str()
            .unwrap();
        assert!(!message.is_empty());

        let scenario = make_scenario(2);
        let mut value = 0.0;
        assert_eq!(
            unsafe { bellchain_chained_value(1.5, scenario, &mut value) },
            BellchainStatus::InvalidArgument
        );
        let message = unsafe { CStr::from_ptr(bellchain_last_error()) }
            .to_str()
            .unwrap();
        assert!(message.contains("alpha"));
        unsafe { bellchain_scenario_free(scenario) };
    }

    #[test]
    fn null_pointers_are_rejected_not_dereferenced() {
        assert_eq!(
            unsafe { bellchain_scenario_equally_spaced(3, ptr::null_mut()) },
            BellchainStatus::NullPointer
        );
        assert_eq!(
            unsafe { bellchain_chained_value(0.5, ptr::null(), ptr::null_mut()) },
            BellchainStatus::NullPointer
        );
        assert_eq!(unsafe { bellchain_scenario_size(ptr::null()) }, 0);
        unsafe { bellchain_scenario_free(ptr::null_mut()) };
    }
}
