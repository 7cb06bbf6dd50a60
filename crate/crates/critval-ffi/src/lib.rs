//! C ABI for the critval toolkit.
//!
//! Conventions: datasets are opaque handles created and freed here; fallible
//! calls return a [`CritvalStatus`] and write results through out-pointers;
//! the last error message is retrievable per thread via
//! [`critval_last_error_message`]. The header `include/critval.h` is
//! regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use critval::composite::{builtin_scheme, composite, MissingPolicy};
use critval::dataset::{
    builtin_phase1, load_records, phase1_analysis_view, Dataset, DimensionId, DimensionScore,
    FileFormat, ScoreMap,
};
use critval::error::Error;
use critval::stats;
use critval::weights::evaluate_scheme;

/// Opaque dataset handle; create via the loaders, release with
/// [`critval_dataset_free`].
pub struct CritvalDataset(Dataset);

/// Status codes for fallible calls. Zero is success; query
/// [`critval_last_error_message`] for details on anything else.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritvalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    IoError = 3,
    ParseError = 4,
    InvalidArgument = 5,
    DegenerateInput = 6,
    Panic = 7,
}

/// Records file formats accepted by [`critval_dataset_load`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritvalFormat {
    Csv = 0,
    Jsonl = 1,
}

/// Missing-data policies for composite computation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritvalPolicy {
    ProportionalReweight = 0,
    CompleteCase = 1,
    Impute = 2,
}

/// Rank-correlation output. `p_bonferroni` is NaN when no correction factor
/// was requested.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CritvalCorrelation {
    pub rho: f64,
    pub p: f64,
    pub p_bonferroni: f64,
    pub n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<Vec<u8>>) {
    let sanitized: Vec<u8> = message
        .into()
        .into_iter()
        .map(|b| if b == 0 { b' ' } else { b })
        .collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(e: &Error) -> CritvalStatus {
    match e {
        Error::Io { .. } => CritvalStatus::IoError,
        Error::Parse { .. } => CritvalStatus::ParseError,
        Error::Invalid(_) | Error::Scheme { .. } | Error::Rule { .. } => {
            CritvalStatus::InvalidArgument
        }
        _ => CritvalStatus::DegenerateInput,
    }
}

fn guard<F: FnOnce() -> CritvalStatus>(f: F) -> CritvalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CritvalStatus::Panic
        }
    }
}

/// Copies the last error message (NUL-terminated) for the calling thread into
/// `buf`; returns the full length including the terminator, so callers can
/// retry with a larger buffer. A null/zero buffer just queries the length.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn critval_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            // always NUL-terminate, truncating if necessary
            *buf.add(n.saturating_sub(1)) = 0;
        }
        bytes.len()
    })
}

/// Toolkit version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn critval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The built-in scored fixture (15 conversations, trust-proxy outcomes).
#[no_mangle]
pub extern "C" fn critval_dataset_builtin_phase1() -> *mut CritvalDataset {
    Box::into_raw(Box::new(CritvalDataset(builtin_phase1())))
}

/// Loads a records file. Returns null on failure; see
/// [`critval_last_error_message`].
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn critval_dataset_load(
    path: *const c_char,
    format: CritvalFormat,
) -> *mut CritvalDataset {
    if path.is_null() {
        set_error("path is null");
        return std::ptr::null_mut();
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        set_error("path is not valid UTF-8");
        return std::ptr::null_mut();
    };
    let format = match format {
        CritvalFormat::Csv => FileFormat::Csv,
        CritvalFormat::Jsonl => FileFormat::Jsonl,
    };
    match load_records(path, format) {
        Ok(d) => Box::into_raw(Box::new(CritvalDataset(d))),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Record count, or -1 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn critval_dataset_record_count(ds: *const CritvalDataset) -> isize {
    if ds.is_null() {
        return -1;
    }
    (*ds).0.records.len() as isize
}

/// Filtered copy excluding trust-collapse (T6) records; the caller owns the
/// returned handle.
///
/// # Safety
/// `ds` must be null or a live handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn critval_dataset_analysis_view(
    ds: *const CritvalDataset,
) -> *mut CritvalDataset {
    if ds.is_null() {
        set_error("dataset handle is null");
        return std::ptr::null_mut();
    }
    let view = phase1_analysis_view(&(*ds).0);
    Box::into_raw(Box::new(CritvalDataset(view)))
}

/// Releases a dataset handle; null is a no-op.
///
/// # Safety
/// `ds` must be a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn critval_dataset_free(ds: *mut CritvalDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Tie-aware Spearman correlation with a two-sided t-approximate p-value.
/// Pass `bonferroni_m = 0` for no correction (`p_bonferroni` is then NaN).
///
/// # Safety
/// `x` and `y` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critval_spearman(
    x: *const f64,
    y: *const f64,
    len: usize,
    bonferroni_m: usize,
    out: *mut CritvalCorrelation,
) -> CritvalStatus {
    guard(|| {
        let (Some(x), Some(y)) = (slice_arg(x, len), slice_arg(y, len)) else {
            set_error("null input array");
            return CritvalStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null out pointer");
            return CritvalStatus::NullPointer;
        }
        let m = if bonferroni_m == 0 {
            None
        } else {
            Some(bonferroni_m)
        };
        match stats::spearman(x, y, m) {
            Ok(r) => {
                *out = CritvalCorrelation {
                    rho: r.rho,
                    p: r.p_uncorrected,
                    p_bonferroni: r.p_bonferroni.unwrap_or(f64::NAN),
                    n: r.n,
                };
                CritvalStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CritvalStatus::DegenerateInput
            }
        }
    })
}

/// Cohen's d with pooled standard deviation.
///
/// # Safety
/// `g1`/`g2` must point to `n1`/`n2` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critval_cohens_d(
    g1: *const f64,
    n1: usize,
    g2: *const f64,
    n2: usize,
    out: *mut f64,
) -> CritvalStatus {
    guard(|| {
        let (Some(g1), Some(g2)) = (slice_arg(g1, n1), slice_arg(g2, n2)) else {
            set_error("null input array");
            return CritvalStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null out pointer");
            return CritvalStatus::NullPointer;
        }
        match stats::cohens_d(g1, g2) {
            Ok(e) => {
                *out = e.d;
                CritvalStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CritvalStatus::DegenerateInput
            }
        }
    })
}

/// Bonferroni correction: `min(1, m * p)`.
#[no_mangle]
pub extern "C" fn critval_bonferroni(p: f64, m: usize) -> f64 {
    stats::bonferroni(p, m)
}

fn scores_from_c(scores: &[f64; 7]) -> Result<ScoreMap, Error> {
    let mut map = ScoreMap::new();
    for (dim, value) in DimensionId::ALL.iter().zip(scores) {
        let score = if value.is_nan() {
            DimensionScore::NotApplicable
        } else if value.fract() == 0.0 && (1.0..=5.0).contains(value) {
            DimensionScore::new(*value as u8)?
        } else {
            return Err(Error::Invalid(format!(
                "score {value} for {dim} is not an integer in 1..=5 or NaN"
            )));
        };
        map.insert(*dim, score);
    }
    Ok(map)
}

fn policy_from_c(policy: CritvalPolicy, impute_value: f64) -> MissingPolicy {
    match policy {
        CritvalPolicy::ProportionalReweight => MissingPolicy::ProportionalReweight,
        CritvalPolicy::CompleteCase => MissingPolicy::CompleteCase,
        CritvalPolicy::Impute => MissingPolicy::Impute(impute_value),
    }
}

/// Weighted composite of seven dimension scores (`NaN` marks N/A) under a
/// built-in scheme. `impute_value` is read only for the impute policy.
/// A complete-case exclusion reports `DegenerateInput` with the out value NaN.
///
/// # Safety
/// `scores7` must point to 7 doubles; `scheme_name` must be NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critval_composite(
    scores7: *const f64,
    scheme_name: *const c_char,
    policy: CritvalPolicy,
    impute_value: f64,
    out: *mut f64,
) -> CritvalStatus {
    guard(|| {
        if scores7.is_null() || scheme_name.is_null() || out.is_null() {
            set_error("null argument");
            return CritvalStatus::NullPointer;
        }
        let Ok(name) = CStr::from_ptr(scheme_name).to_str() else {
            set_error("scheme name is not valid UTF-8");
            return CritvalStatus::InvalidUtf8;
        };
        let Some(scheme) = builtin_scheme(name) else {
            set_error(format!("unknown built-in scheme {name:?}"));
            return CritvalStatus::InvalidArgument;
        };
        let raw: &[f64] = std::slice::from_raw_parts(scores7, 7);
        let scores = match scores_from_c(raw.try_into().expect("length 7")) {
            Ok(s) => s,
            Err(e) => {
                set_error(e.to_string());
                return CritvalStatus::InvalidArgument;
            }
        };
        match composite(&scores, &scheme, policy_from_c(policy, impute_value)) {
            Ok(c) => match c.value.score() {
                Some(v) => {
                    *out = v;
                    CritvalStatus::Ok
                }
                None => {
                    *out = f64::NAN;
                    set_error("record excluded under complete-case policy");
                    CritvalStatus::DegenerateInput
                }
            },
            Err(e) => {
                set_error(e.to_string());
                status_for(&e)
            }
        }
    })
}

/// Evaluates a built-in scheme's criterion validity against the dataset's
/// outcome encoding (datasets with T6 records must pass through
/// [`critval_dataset_analysis_view`] first).
///
/// # Safety
/// `ds` must be a live handle; `scheme_name` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn critval_evaluate_scheme(
    ds: *const CritvalDataset,
    scheme_name: *const c_char,
    policy: CritvalPolicy,
    impute_value: f64,
    out: *mut CritvalCorrelation,
) -> CritvalStatus {
    guard(|| {
        if ds.is_null() || scheme_name.is_null() || out.is_null() {
            set_error("null argument");
            return CritvalStatus::NullPointer;
        }
        let Ok(name) = CStr::from_ptr(scheme_name).to_str() else {
            set_error("scheme name is not valid UTF-8");
            return CritvalStatus::InvalidUtf8;
        };
        let Some(scheme) = builtin_scheme(name) else {
            set_error(format!("unknown built-in scheme {name:?}"));
            return CritvalStatus::InvalidArgument;
        };
        match evaluate_scheme(&(*ds).0, &scheme, policy_from_c(policy, impute_value)) {
            Ok(e) => {
                *out = CritvalCorrelation {
                    rho: e.rho,
                    p: e.p,
                    p_bonferroni: f64::NAN,
                    n: e.n,
                };
                CritvalStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_for(&e)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0i8; 256];
        let n = unsafe { critval_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
        let bytes: Vec<u8> = buf[..n.min(buf.len()) - 1]
            .iter()
            .map(|b| *b as u8)
            .collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = critval_version();
        let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
        assert_eq!(s, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn dataset_lifecycle() {
        unsafe {
            let ds = critval_dataset_builtin_phase1();
            assert_eq!(critval_dataset_record_count(ds), 15);
            let view = critval_dataset_analysis_view(ds);
            assert_eq!(critval_dataset_record_count(view), 14);
            critval_dataset_free(ds);
            critval_dataset_free(view);
            critval_dataset_free(std::ptr::null_mut()); // null is a no-op
            assert_eq!(critval_dataset_record_count(std::ptr::null()), -1);
        }
    }

    #[test]
    fn spearman_through_the_abi() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let mut out = CritvalCorrelation {
            rho: 0.0,
            p: 0.0,
            p_bonferroni: 0.0,
            n: 0,
        };
        let status =
            unsafe { critval_spearman(x.as_ptr(), y.as_ptr(), 5, 7, &mut out) };
        assert_eq!(status, CritvalStatus::Ok);
        // ranks equal the values; sum of squared rank differences is 4
        assert!((out.rho - 0.8).abs() < 1e-12);
        assert!(!out.p_bonferroni.is_nan());

        // degenerate input surfaces as a status with a message
        let constant = [2.0; 5];
        let status = unsafe {
            critval_spearman(constant.as_ptr(), y.as_ptr(), 5, 0, &mut out)
        };
        assert_eq!(status, CritvalStatus::DegenerateInput);
        assert!(last_error().contains("constant"));

        let status = unsafe {
            critval_spearman(std::ptr::null(), y.as_ptr(), 5, 0, &mut out)
        };
        assert_eq!(status, CritvalStatus::NullPointer);
    }

    #[test]
    fn cohens_d_and_bonferroni() {
        let g1 = [0.0, 0.0, 2.0, 2.0];
        let g2 = [1.0, 1.0, 3.0, 3.0];
        let mut d = 0.0;
        let status =
            unsafe { critval_cohens_d(g1.as_ptr(), 4, g2.as_ptr(), 4, &mut d) };
        assert_eq!(status, CritvalStatus::Ok);
        assert!((d - -0.8660254037844387).abs() < 1e-12);
        assert_eq!(critval_bonferroni(0.5, 7), 1.0);
    }

    #[test]
    fn composite_through_the_abi() {
        let scheme = CString::new("v2.0_current").unwrap();
        let scores = [3.0, 3.0, 3.0, 4.0, 4.0, 5.0, 3.0];
        let mut out = 0.0;
        let status = unsafe {
            critval_composite(
                scores.as_ptr(),
                scheme.as_ptr(),
                CritvalPolicy::ProportionalReweight,
                0.0,
                &mut out,
            )
        };
        assert_eq!(status, CritvalStatus::Ok);
        assert!((out - 3.45).abs() < 1e-12);

        // NaN marks N/A; complete-case excludes and reports
        let with_na = [3.0, 3.0, 3.0, 4.0, f64::NAN, 5.0, 3.0];
        let status = unsafe {
            critval_composite(
                with_na.as_ptr(),
                scheme.as_ptr(),
                CritvalPolicy::CompleteCase,
                0.0,
                &mut out,
            )
        };
        assert_eq!(status, CritvalStatus::DegenerateInput);
        assert!(out.is_nan());

        let bad = CString::new("no_such_scheme").unwrap();
        let status = unsafe {
            critval_composite(
                scores.as_ptr(),
                bad.as_ptr(),
                CritvalPolicy::ProportionalReweight,
                0.0,
                &mut out,
            )
        };
        assert_eq!(status, CritvalStatus::InvalidArgument);
    }

    #[test]
    fn evaluate_scheme_matches_library() {
        let ds = critval_dataset_builtin_phase1();
        let view = unsafe { critval_dataset_analysis_view(ds) };
        let scheme = CString::new("v2.0_current").unwrap();
        let mut out = CritvalCorrelation {
            rho: 0.0,
            p: 0.0,
            p_bonferroni: 0.0,
            n: 0,
        };
        let status = unsafe {
            critval_evaluate_scheme(
                view,
                scheme.as_ptr(),
                CritvalPolicy::ProportionalReweight,
                0.0,
                &mut out,
            )
        };
        assert_eq!(status, CritvalStatus::Ok);
        assert!((out.rho - 0.355129).abs() < 1e-4);
        assert_eq!(out.n, 14);

        // unfiltered dataset fails fast on the T6 record
        let status = unsafe {
            critval_evaluate_scheme(
                ds,
                scheme.as_ptr(),
                CritvalPolicy::ProportionalReweight,
                0.0,
                &mut out,
            )
        };
        assert_eq!(status, CritvalStatus::DegenerateInput);
        unsafe {
            critval_dataset_free(ds);
            critval_dataset_free(view);
        }
    }

    #[test]
    fn generated_header_exists_and_names_the_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("critval.h");
        let text = std::fs::read_to_string(header).expect("header generated by build.rs");
        for symbol in [
            "critval_version",
            "critval_dataset_builtin_phase1",
            "critval_spearman",
            "critval_composite",
            "CritvalStatus",
        ] {
            assert!(text.contains(symbol), "header missing {symbol}");
        }
    }
}
