use std::ffi::{CStr, CString};
use std::ptr;

use colombeau_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cl_last_error()) }.to_string_lossy().into_owned()
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { cl_string_free(s) };
    out
}

fn mollifier(q: usize) -> *mut ClMollifier {
    let mut phi = ptr::null_mut();
    assert_eq!(unsafe { cl_mollifier_new(q, 1.0, &mut phi) }, ClStatus::Ok);
    phi
}

fn expr(text: &str) -> *mut ClExpr {
    let t = CString::new(text).unwrap();
    let mut e = ptr::null_mut();
    let s = unsafe { cl_expr_parse(t.as_ptr(), f64::NEG_INFINITY, f64::INFINITY, &mut e) };
    assert_eq!(s, ClStatus::Ok, "{}", last_error());
    e
}

#[test]
fn mollifier_moments_and_scaling() {
    let phi = mollifier(4);
    let mut m = 0.0;
    for j in 0..=4 {
        assert_eq!(unsafe { cl_mollifier_moment(phi, j, &mut m) }, ClStatus::Ok);
        let want = if j == 0 { 1.0 } else { 0.0 };
        assert!((m - want).abs() < 1e-10, "moment {j} = {m}");
    }
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cl_mollifier_scale(phi, 0.5, &mut s) }, ClStatus::Ok);
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        cl_mollifier_eval(phi, 0.6, 0, &mut a);
        cl_mollifier_eval(s, 0.3, 0, &mut b);
    }
    assert!((b - 2.0 * a).abs() < 1e-12);
    unsafe {
        cl_mollifier_free(s);
        cl_mollifier_free(phi);
    }
}

#[test]
fn json_round_trip_is_bit_exact() {
    let phi = mollifier(6);
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { cl_mollifier_to_json(phi, &mut js) }, ClStatus::Ok);
    let text = take(js);
    let c = CString::new(text.clone()).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { cl_mollifier_from_json(c.as_ptr(), &mut back) }, ClStatus::Ok);
    let mut js2 = ptr::null_mut();
    unsafe { cl_mollifier_to_json(back, &mut js2) };
    assert_eq!(take(js2), text);
    unsafe {
        cl_mollifier_free(back);
        cl_mollifier_free(phi);
    }
}

#[test]
fn errors_map_to_codes() {
    let mut phi = ptr::null_mut();
    assert_eq!(unsafe { cl_mollifier_new(2, -1.0, &mut phi) }, ClStatus::InvalidParam);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { cl_mollifier_new(2, 1.0, ptr::null_mut()) }, ClStatus::NullPointer);

    let bad = CString::new("iota(delt)").unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { cl_expr_parse(bad.as_ptr(), -1.0, 1.0, &mut e) }, ClStatus::Syntax);
    assert!(last_error().contains("position 6"), "{}", last_error());
    assert!(e.is_null());

    let junk = CString::new("{\"q\": 1}").unwrap();
    assert_eq!(unsafe { cl_mollifier_from_json(junk.as_ptr(), &mut phi) }, ClStatus::Json);

    let p = mollifier(2);
    let mut v = 0.0;
    assert_eq!(unsafe { cl_mollifier_scale(p, 0.0, &mut phi) }, ClStatus::InvalidParam);
    assert_eq!(unsafe { cl_mollifier_eval(ptr::null(), 0.0, 0, &mut v) }, ClStatus::NullPointer);
    assert_eq!(unsafe { cl_mollifier_eval(p, 0.0, 0, &mut v) }, ClStatus::Ok);
    assert!(last_error().is_empty());
    unsafe { cl_mollifier_free(p) };
}

#[test]
fn expression_eval_and_format() {
    let e = expr("iota(delta)*sigma(sin)");
    let mut s = ptr::null_mut();
    unsafe { cl_expr_format(e, &mut s) };
    assert_eq!(take(s), "iota(delta)*sigma(sin)");
    let phi = mollifier(2);
    let mut eps = ptr::null_mut();
    unsafe { cl_mollifier_scale(phi, 0.25, &mut eps) };
    let (mut v, mut w) = (0.0, 0.0);
    unsafe {
        assert_eq!(cl_expr_eval(e, eps, 0.1, 0, &mut v), ClStatus::Ok);
        cl_mollifier_eval(eps, -0.1, 0, &mut w);
    }
    assert!((v - w * 0.1f64.sin()).abs() < 1e-12);
    unsafe {
        cl_mollifier_free(eps);
        cl_mollifier_free(phi);
        cl_expr_free(e);
    }
}

#[test]
fn sweep_slope_of_delta() {
    let e = expr("iota(delta)");
    let phi = mollifier(2);
    let mut slope = 0.0;
    let s = unsafe { cl_sweep_slope(e, phi, -1.0, 1.0, 0, 2.0, 4, 10, 201, &mut slope) };
    assert_eq!(s, ClStatus::Ok, "{}", last_error());
    assert!((slope + 1.0).abs() < 0.05, "{slope}");
    unsafe {
        cl_mollifier_free(phi);
        cl_expr_free(e);
    }
}

#[test]
fn negligibility_verdicts() {
    let mut degree = 99;
    let e = expr("iota(reg(sin)) - sigma(sin)");
    assert_eq!(unsafe { cl_negligibility(e, -1.0, 1.0, 0, 0, 0, 1, 201, &mut degree) }, ClStatus::Ok);
    assert_eq!(degree, 0);
    unsafe { cl_expr_free(e) };

    let e = expr("iota(H)*iota(H) - iota(H)");
    assert_eq!(unsafe { cl_negligibility(e, -1.0, 1.0, 0, 0, 0, 1, 201, &mut degree) }, ClStatus::Ok);
    assert_eq!(degree, 1);
    unsafe { cl_expr_free(e) };
}

#[test]
fn run_json_mollifier() {
    let cfg = CString::new(r#"{"command": "mollifier", "q": 4}"#).unwrap();
    let mut out = ptr::null_mut();
    let mut code = -1;
    assert_eq!(unsafe { cl_run_json(cfg.as_ptr(), &mut out, &mut code) }, ClStatus::Ok, "{}", last_error());
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert!(v.is_object());

    let cfg = CString::new(r#"{"command": "mollifier", "bogus": 1}"#).unwrap();
    assert_eq!(unsafe { cl_run_json(cfg.as_ptr(), &mut out, &mut code) }, ClStatus::Json);
}
