use std::ffi::{CStr, CString};
use std::ptr;

use orthoglass_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(og_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn semicircle_transforms() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(og_profile_new_semicircle(&mut p), OgStatus::Ok);
        let mut v = 0.0;
        assert_eq!(og_profile_hilbert(p, 2.5, &mut v), OgStatus::Ok);
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(og_profile_r_transform(p, 0.4, &mut v), OgStatus::Ok);
        assert!((v - 0.4).abs() < 1e-12);
        assert_eq!(og_profile_free_energy_limit(p, 0.3, &mut v), OgStatus::Ok);
        assert!((v - 0.09).abs() < 1e-15);
        assert_eq!(
            og_profile_free_energy_limit(p, 0.5, &mut v),
            OgStatus::Domain
        );
        assert!(last_error().contains("H_max"));
        assert_eq!(og_profile_hilbert(p, 1.0, &mut v), OgStatus::Domain);
        og_profile_free(p);
    }
}

#[test]
fn model_json_and_invalid_arguments() {
    unsafe {
        let mut p = ptr::null_mut();
        let json = CString::new(r#"{"kind":"rom","p":0.5}"#).unwrap();
        assert_eq!(
            og_profile_from_model_json(json.as_ptr(), &mut p),
            OgStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(og_profile_r_transform(p, 0.5, &mut v), OgStatus::Ok);
        assert!((v - (2f64.sqrt() - 1.0)).abs() < 1e-14);
        og_profile_free(p);

        let mut q = ptr::null_mut();
        assert_eq!(
            og_profile_new_two_point(1.5, &mut q),
            OgStatus::InvalidArgument
        );
        assert!(q.is_null());
        let bad = CString::new(r#"{"kind":"potts"}"#).unwrap();
        assert_eq!(
            og_profile_from_model_json(bad.as_ptr(), &mut q),
            OgStatus::InvalidArgument
        );
        assert_eq!(
            og_profile_new_semicircle(ptr::null_mut()),
            OgStatus::NullPointer
        );
        assert_eq!(
            og_profile_hilbert(ptr::null(), 3.0, &mut v),
            OgStatus::NullPointer
        );
    }
}

#[test]
fn discrete_profile() {
    unsafe {
        let values = [-1.0, 0.0, 2.0];
        let weights = [0.25, 0.25, 0.5];
        let mut p = ptr::null_mut();
        assert_eq!(
            og_profile_new_discrete(values.as_ptr(), weights.as_ptr(), 3, &mut p),
            OgStatus::Ok
        );
        let mut h = 0.0;
        assert_eq!(og_profile_hilbert(p, 3.0, &mut h), OgStatus::Ok);
        assert!((h - (0.25 / 4.0 + 0.25 / 3.0 + 0.5)).abs() < 1e-15);
        og_profile_free(p);
        let bad = [0.5, 0.2, 0.1];
        assert_eq!(
            og_profile_new_discrete(values.as_ptr(), bad.as_ptr(), 3, &mut p),
            OgStatus::InvalidArgument
        );
    }
}

#[test]
fn variational_calls() {
    unsafe {
        let mut p = ptr::null_mut();
        og_profile_new_semicircle(&mut p);
        let mut rf = ptr::null_mut();
        assert_eq!(og_rate_function_new(p, &mut rf), OgStatus::Ok);
        og_profile_free(p);
        let mut t = 0.0;
        assert_eq!(og_rate_function_value(rf, 1.0, &mut t), OgStatus::Ok);
        assert!((t - 0.25).abs() < 1e-12);
        let mut psi = 0.0;
        assert_eq!(og_psi(rf, 0.3, 0.6, 0.6, &mut psi), OgStatus::Ok);
        assert!((psi - 0.18).abs() < 1e-12);
        let mut sol = OgSolution::default();
        assert_eq!(og_solve_fixed_point(rf, 0.3, &mut sol), OgStatus::Ok);
        assert!((sol.x_star - 0.6).abs() < 1e-11 && sol.converged && sol.classification == 0);
        assert_eq!(og_maximize_psi(rf, 0.3, &mut sol), OgStatus::Ok);
        assert!((sol.psi - 0.18).abs() < 1e-9);
        assert_eq!(og_solve_fixed_point(rf, 0.6, &mut sol), OgStatus::Domain);
        og_rate_function_free(rf);
    }
}

#[test]
fn enumeration() {
    unsafe {
        let d = [1.0, 1.0];
        let o = [1.0, 0.0, 0.0, 1.0];
        let mut phi = 0.0;
        assert_eq!(
            og_exact_log_partition(d.as_ptr(), o.as_ptr(), 2, 0.7, &mut phi),
            OgStatus::Ok
        );
        assert!((phi - 0.7).abs() < 1e-15);
        let big = vec![0.0; 25 * 25];
        let dd = [0.0; 25];
        assert_eq!(
            og_exact_log_partition(dd.as_ptr(), big.as_ptr(), 25, 0.1, &mut phi),
            OgStatus::CapExceeded
        );
    }
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(og_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/orthoglass.h"))
            .unwrap();
    for name in [
        "og_profile_new_semicircle",
        "og_exact_log_partition",
        "OG_STATUS_DOMAIN",
        "typedef struct OgProfile",
        "OgSolution",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
