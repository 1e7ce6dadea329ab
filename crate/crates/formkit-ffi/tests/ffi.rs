//! Exercises the C ABI from Rust: handle lifecycle, status codes, the JSON
//! entry point, and the generated header.

use std::ffi::{CStr, CString};

use formkit_ffi::*;

unsafe fn matrix_from(rows: usize, cols: usize, interleaved: &[f64]) -> *mut FkMatrix {
    let mut handle: *mut FkMatrix = std::ptr::null_mut();
    let status = fk_matrix_new(rows, cols, interleaved.as_ptr(), &mut handle);
    assert_eq!(status, FkStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn polar_of_nilpotent_through_the_abi() {
    unsafe {
        // T = [[0, 1], [0, 0]]
        let t = matrix_from(2, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let mut isometry: *mut FkMatrix = std::ptr::null_mut();
        let mut modulus: *mut FkMatrix = std::ptr::null_mut();
        let mut rank: usize = 0;
        let status = fk_polar(t, 0.0, 0.0, &mut isometry, &mut modulus, &mut rank);
        assert_eq!(status, FkStatus::Ok);
        assert_eq!(rank, 1);
        assert_eq!(fk_matrix_rows(modulus), 2);

        let (mut re, mut im) = (0.0f64, 0.0f64);
        assert_eq!(fk_matrix_get(modulus, 1, 1, &mut re, &mut im), FkStatus::Ok);
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
        assert_eq!(fk_matrix_get(isometry, 0, 1, &mut re, &mut im), FkStatus::Ok);
        assert!((re - 1.0).abs() < 1e-12);

        let mut norm = 0.0f64;
        assert_eq!(fk_operator_norm(t, &mut norm), FkStatus::Ok);
        assert!((norm - 1.0).abs() < 1e-12);

        let mut residual = f64::NAN;
        assert_eq!(
            fk_intertwine_residual(t, 0.0, 0.0, &mut residual),
            FkStatus::Ok
        );
        assert!(residual < 1e-12);

        fk_matrix_free(isometry);
        fk_matrix_free(modulus);
        fk_matrix_free(t);
    }
}

#[test]
fn form_recovery_through_the_abi() {
    unsafe {
        // T = diag(0, 1), B = diag(1, 0): recovered gram must equal T.
        let t = matrix_from(2, 2, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = matrix_from(2, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let mut gram: *mut FkMatrix = std::ptr::null_mut();
        assert_eq!(
            fk_form_from_operator(t, b, 0.0, 0.0, &mut gram),
            FkStatus::Ok
        );
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(fk_matrix_get(gram, 0, 0, &mut re, &mut im), FkStatus::Ok);
        assert!(re.abs() < 1e-12);
        assert_eq!(fk_matrix_get(gram, 1, 1, &mut re, &mut im), FkStatus::Ok);
        assert!((re - 1.0).abs() < 1e-12);
        fk_matrix_free(gram);
        fk_matrix_free(b);
        fk_matrix_free(t);
    }
}

#[test]
fn status_codes_and_error_messages() {
    unsafe {
        // Null pointers.
        let mut out: *mut FkMatrix = std::ptr::null_mut();
        assert_eq!(
            fk_matrix_new(2, 2, std::ptr::null(), &mut out),
            FkStatus::NullPointer
        );

        // Non-finite entries are rejected with a message.
        let mut handle: *mut FkMatrix = std::ptr::null_mut();
        let status = fk_matrix_new(1, 1, [f64::NAN, 0.0].as_ptr(), &mut handle);
        assert_eq!(status, FkStatus::NumericError);
        let message = fk_last_error_message();
        assert!(!message.is_null());
        assert!(CStr::from_ptr(message).to_str().unwrap().contains("non-finite"));

        // Singular T + B is a numeric refusal.
        let t = matrix_from(2, 2, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let zero = matrix_from(2, 2, &[0.0; 8]);
        let mut gram: *mut FkMatrix = std::ptr::null_mut();
        assert_eq!(
            fk_form_from_operator(t, zero, 0.0, 0.0, &mut gram),
            FkStatus::NumericError
        );
        fk_matrix_free(zero);
        fk_matrix_free(t);

        // Invalid tolerance.
        let t = matrix_from(1, 1, &[1.0, 0.0]);
        let mut residual = 0.0;
        assert_eq!(
            fk_intertwine_residual(t, 2.0, 0.0, &mut residual),
            FkStatus::InvalidArgument
        );
        fk_matrix_free(t);
    }
}

#[test]
fn json_entry_point_matches_cli_contract() {
    unsafe {
        let command = CString::new("diagonal").unwrap();
        let spec = CString::new(
            r#"{"schema": "formkit/1", "kind": "diagonal",
                "alpha": {"expr": "n"}, "sweep": [4, 8, 16]}"#,
        )
        .unwrap();
        let mut report_ptr: *mut std::ffi::c_char = std::ptr::null_mut();
        let status = fk_run_spec(command.as_ptr(), spec.as_ptr(), 42, 20, &mut report_ptr);
        assert_eq!(status, FkStatus::Ok);
        let report_text = CStr::from_ptr(report_ptr).to_str().unwrap().to_owned();

        let report: serde_json::Value = serde_json::from_str(&report_text).unwrap();
        assert_eq!(report["schema"], "formkit/1");
        assert_eq!(report["overall"], "pass");
        assert_eq!(report["seed"], 42);

        // Determinism: identical call, identical bytes.
        let mut second_ptr: *mut std::ffi::c_char = std::ptr::null_mut();
        assert_eq!(
            fk_run_spec(command.as_ptr(), spec.as_ptr(), 42, 20, &mut second_ptr),
            FkStatus::Ok
        );
        assert_eq!(CStr::from_ptr(second_ptr).to_bytes(), report_text.as_bytes());
        fk_string_free(second_ptr);
        fk_string_free(report_ptr);

        // Parse failures surface as ParseError with a message.
        let broken = CString::new("{").unwrap();
        let mut out: *mut std::ffi::c_char = std::ptr::null_mut();
        assert_eq!(
            fk_run_spec(command.as_ptr(), broken.as_ptr(), 0, 0, &mut out),
            FkStatus::ParseError
        );
        assert!(!fk_last_error_message().is_null());
    }
}

#[test]
fn generated_header_exposes_the_api() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/formkit.h");
    let text = std::fs::read_to_string(&header).expect("cbindgen header exists after build");
    for symbol in [
        "FkStatus",
        "FkMatrix",
        "fk_matrix_new",
        "fk_polar",
        "fk_run_spec",
        "fk_string_free",
        "fk_last_error_message",
    ] {
        assert!(text.contains(symbol), "header is missing `{symbol}`");
    }
    assert!(text.contains("FORMKIT_H"));
}
