use std::ffi::{CStr, CString};
use std::ptr;

use dpp_ffi::*;

fn spec(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dpp_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn kernel_handle_roundtrip() {
    let s = spec(r#"{"kind": "ginibre-product", "n": 1, "signs": "+"}"#);
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(dpp_kernel_model_new(s.as_ptr(), &mut model), DppStatus::Ok);
        let (mut re, mut im) = (f64::NAN, f64::NAN);
        assert_eq!(dpp_kernel(model, 0.0, 0.0, 0.0, 0.0, &mut re, &mut im), DppStatus::Ok);
        assert!((re - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(im, 0.0);
        let mut rho = f64::NAN;
        assert_eq!(dpp_one_point_density(model, 0.5, 0.5, &mut rho), DppStatus::Ok);
        assert!((rho - (-0.5f64).exp() / std::f64::consts::PI).abs() < 1e-15);
        let mut rho2 = f64::NAN;
        assert_eq!(dpp_two_point_density(model, 0.3, 0.1, 0.3, 0.1, &mut rho2), DppStatus::Ok);
        assert!(rho2.abs() < 1e-12);
        dpp_kernel_model_free(model);
        dpp_kernel_model_free(ptr::null_mut());
    }
}

#[test]
fn invalid_spec_reports_message() {
    let s = spec(r#"{"kind": "truncated-unitary-product", "n": 5, "dims": [5], "signs": "+"}"#);
    let mut model = ptr::null_mut();
    let status = unsafe { dpp_kernel_model_new(s.as_ptr(), &mut model) };
    assert_eq!(status, DppStatus::InvalidSpec);
    assert!(model.is_null());
    assert!(last_error().contains("ambient size"));

    let bad = spec("{not json");
    assert_eq!(unsafe { dpp_kernel_model_new(bad.as_ptr(), &mut model) }, DppStatus::InvalidSpec);
    assert_eq!(unsafe { dpp_kernel_model_new(ptr::null(), &mut model) }, DppStatus::NullPointer);
}

#[test]
fn moments_and_limits() {
    let s = spec(r#"{"kind": "ginibre-product", "n": 4, "signs": "-+"}"#);
    let mut v = 0.0;
    unsafe {
        assert_eq!(dpp_moment_ratio(s.as_ptr(), 1, &mut v), DppStatus::Ok);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(dpp_moment_ratio(s.as_ptr(), 4, &mut v), DppStatus::OutOfRange);

        let mut law = ptr::null_mut();
        assert_eq!(dpp_limit_law_new(s.as_ptr(), &mut law), DppStatus::Ok);
        assert_eq!(dpp_limit_cdf(law, 1.0, &mut v), DppStatus::Ok);
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(dpp_limit_phi(law, 0.5, &mut v), DppStatus::Ok);
        assert!((v - 1.0).abs() < 1e-14);
        assert_eq!(dpp_limit_phi(law, 1.5, &mut v), DppStatus::OutOfRange);
        dpp_limit_law_free(law);

        let one = spec(r#"{"kind": "ginibre-product", "n": 1, "signs": "-+"}"#);
        assert_eq!(dpp_finite_n_cdf(one.as_ptr(), 3.0, false, &mut v), DppStatus::Ok);
        assert!((v - 0.75).abs() < 1e-14);
        let three = spec(r#"{"kind": "ginibre-product", "n": 2, "signs": "+++"}"#);
        assert_eq!(dpp_finite_n_cdf(three.as_ptr(), 1.0, false, &mut v), DppStatus::Unsupported);
    }
}

#[test]
fn sampling_buffer_contract() {
    let s = spec(r#"{"kind": "truncated-unitary-product", "n": 3, "dims": [6], "signs": "+"}"#);
    let mut count = 0usize;
    let mut re = [0.0; 2];
    let mut im = [0.0; 2];
    let status = unsafe {
        dpp_sample_eigenvalues(s.as_ptr(), false, 1, 0, re.as_mut_ptr(), im.as_mut_ptr(), 2, &mut count)
    };
    assert_eq!(status, DppStatus::BufferTooSmall);
    assert_eq!(count, 3);

    let mut re = [0.0; 3];
    let mut im = [0.0; 3];
    let mut again = ([0.0; 3], [0.0; 3]);
    unsafe {
        assert_eq!(
            dpp_sample_eigenvalues(s.as_ptr(), false, 1, 0, re.as_mut_ptr(), im.as_mut_ptr(), 3, &mut count),
            DppStatus::Ok
        );
        dpp_sample_eigenvalues(s.as_ptr(), false, 1, 0, again.0.as_mut_ptr(), again.1.as_mut_ptr(), 3, &mut count);
    }
    assert_eq!((re, im), again);
    for i in 0..3 {
        assert!(re[i].hypot(im[i]) <= 1.0 + 1e-8);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(dpp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
