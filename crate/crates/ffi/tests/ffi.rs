use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use nilsol_ffi::*;

fn take_json(p: *mut c_char) -> serde_json::Value {
    assert!(!p.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap();
    unsafe { nilsol_string_free(p) };
    v
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(nilsol_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn sol_of_a_set() {
    unsafe {
        let mut sys = ptr::null_mut();
        assert_eq!(nilsol_system_arithmetic_progression(3, &mut sys), NilsolStatus::Ok);
        let members = [0u64, 1];
        let mut set = ptr::null_mut();
        assert_eq!(nilsol_set_new(5, members.as_ptr(), members.len(), &mut set), NilsolStatus::Ok);
        let mut len = 0usize;
        assert_eq!(nilsol_set_len(set, &mut len), NilsolStatus::Ok);
        assert_eq!(len, 2);
        let (mut num, mut den) = (0i64, 0i64);
        assert_eq!(nilsol_sol_set(sys, set, &mut num, &mut den), NilsolStatus::Ok);
        assert_eq!((num, den), (2, 25));
        nilsol_set_free(set);
        nilsol_system_free(sys);
    }
}

#[test]
fn systems_from_matrix_and_json() {
    unsafe {
        let rows = [1i64, 0, 1, 2];
        let mut sys = ptr::null_mut();
        assert_eq!(nilsol_system_new(rows.as_ptr(), 2, 2, &mut sys), NilsolStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(nilsol_kernelize(sys, &mut json), NilsolStatus::Ok);
        assert_eq!(take_json(json)["badModulus"], 2);
        nilsol_system_free(sys);

        let text = CString::new(r#"{"forms": [[1, 0], [1, 1], [1, 2]], "name": "3AP"}"#).unwrap();
        let mut sys = ptr::null_mut();
        assert_eq!(nilsol_system_from_json(text.as_ptr(), &mut sys), NilsolStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(nilsol_min_sol_exact(sys, 2, 5, 5, 0, &mut json), NilsolStatus::Ok);
        let v = take_json(json);
        assert_eq!(v["value"]["exact"], "2/25");
        assert_eq!(v["boundKind"], "equals");
        nilsol_system_free(sys);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut sys = ptr::null_mut();
        assert_eq!(nilsol_system_arithmetic_progression(3, ptr::null_mut()), NilsolStatus::NullPointer);
        assert!(last_error().contains("out"));
        let bad = CString::new("{not json").unwrap();
        assert_eq!(nilsol_system_from_json(bad.as_ptr(), &mut sys), NilsolStatus::Parse);
        assert!(sys.is_null());
        let zero = [0i64, 0];
        assert_eq!(nilsol_system_new(zero.as_ptr(), 1, 2, &mut sys), NilsolStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        let members = [7u64];
        let mut set = ptr::null_mut();
        assert_ne!(nilsol_set_new(5, members.as_ptr(), 1, &mut set), NilsolStatus::Ok);

        assert_eq!(nilsol_system_arithmetic_progression(3, &mut sys), NilsolStatus::Ok);
        assert!(last_error().is_empty());
        let mut json = ptr::null_mut();
        assert_eq!(nilsol_min_sol_exact(sys, 1, 2, 90, 20, &mut json), NilsolStatus::Timeout);
        assert!(json.is_null());
        nilsol_system_free(sys);

        let mut model = ptr::null_mut();
        let name = CString::new("no-such-model").unwrap();
        assert_eq!(nilsol_model_load(name.as_ptr(), &mut model), NilsolStatus::InvalidArgument);
        let id = CString::new("nope").unwrap();
        assert_eq!(nilsol_reproduce(id.as_ptr(), &mut json), NilsolStatus::InvalidArgument);
        assert!(last_error().contains("kernelize"));
    }
}

#[test]
fn gowers_of_real_and_complex_input() {
    unsafe {
        let ones = [1.0f64; 7];
        let mut out = 0.0;
        assert_eq!(nilsol_gowers_norm(ones.as_ptr(), ptr::null(), 7, 3, &mut out), NilsolStatus::Ok);
        assert!((out - 1.0).abs() < 1e-12);
        // a linear character has U^2 norm 1
        let re: Vec<f64> = (0..7).map(|x| (std::f64::consts::TAU * x as f64 / 7.0).cos()).collect();
        let im: Vec<f64> = (0..7).map(|x| (std::f64::consts::TAU * x as f64 / 7.0).sin()).collect();
        assert_eq!(nilsol_gowers_norm(re.as_ptr(), im.as_ptr(), 7, 2, &mut out), NilsolStatus::Ok);
        assert!((out - 1.0).abs() < 1e-12);
        assert_eq!(nilsol_gowers_norm(re.as_ptr(), im.as_ptr(), 7, 0, &mut out), NilsolStatus::Precondition);
    }
}

#[test]
fn free_density_and_periodic_sequences() {
    unsafe {
        let rows = [1i64, 2];
        let mut sys = ptr::null_mut();
        assert_eq!(nilsol_system_new(rows.as_ptr(), 2, 1, &mut sys), NilsolStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(nilsol_max_free_exact(sys, 7, 0, 0, &mut json), NilsolStatus::Ok);
        assert_eq!(take_json(json)["value"]["exact"], "2/7");
        nilsol_system_free(sys);

        let mut model = ptr::null_mut();
        let name = CString::new("torus:m=2,s=2").unwrap();
        assert_eq!(nilsol_model_load(name.as_ptr(), &mut model), NilsolStatus::Ok);
        assert_eq!(nilsol_build_periodic(model, 37, 2, 7, &mut json), NilsolStatus::Ok);
        let v = take_json(json);
        assert_eq!(v["periodic"], true);
        assert_eq!(v["irrational"], true);
        nilsol_model_free(model);

        let id = CString::new("11").unwrap();
        assert_eq!(nilsol_reproduce(id.as_ptr(), &mut json), NilsolStatus::Ok);
        assert_eq!(take_json(json)["passed"], true);
    }
}

#[test]
fn header_is_generated_and_compiles() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nilsol.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for name in ["nilsol_sol_set", "nilsol_string_free", "NILSOL_STATUS_BUDGET_EXCEEDED", "typedef struct NilsolSystem NilsolSystem"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    match std::process::Command::new("cc").args(["-fsyntax-only", "-xc", "-Wall", "-Werror"]).arg(&header).status() {
        Ok(status) => assert!(status.success(), "header does not compile as C"),
        Err(_) => eprintln!("no C compiler on PATH; syntax check skipped"),
    }
}
