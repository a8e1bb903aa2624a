use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ellgreen_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let v = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { eg_string_free(s) };
    v
}

fn last_error() -> String {
    let p = eg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Handles {
    ctx: *mut EgContext,
    tau: *mut EgTau,
}

impl Handles {
    fn new(bits: u32, tau: &str) -> Self {
        let mut ctx = ptr::null_mut();
        let mut t = ptr::null_mut();
        let text = CString::new(tau).unwrap();
        unsafe {
            assert_eq!(eg_context_new(bits, 32, &mut ctx), EgStatus::Ok);
            assert_eq!(eg_tau_parse(text.as_ptr(), &mut t), EgStatus::Ok);
        }
        Handles { ctx, tau: t }
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            eg_context_free(self.ctx);
            eg_tau_free(self.tau);
        }
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(eg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn phi_paths_agree_through_the_abi() {
    let h = Handles::new(256, "0,2");
    let z = CString::new("1/3,1/5").unwrap();
    let mut vals = Vec::new();
    for m in [EgMethod::Sigma, EgMethod::Siegel, EgMethod::Kronecker] {
        let mut approx = 0.0;
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { eg_phi(h.ctx, h.tau, z.as_ptr(), m, &mut approx, &mut s) }, EgStatus::Ok);
        let text = take(s);
        assert!((text.parse::<f64>().unwrap() - approx).abs() < 1e-12);
        vals.push((approx, text));
    }
    assert_eq!(vals[0].1[..60], vals[1].1[..60]);
    assert!((vals[0].0 - vals[2].0).abs() < 1e-10);
    assert_eq!(unsafe { eg_context_bits(h.ctx) }, 256);
}

#[test]
fn errors_map_to_status_codes() {
    let h = Handles::new(128, "i");
    let zero = CString::new("0,0").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { eg_phi(h.ctx, h.tau, zero.as_ptr(), EgMethod::Sigma, ptr::null_mut(), &mut s) }, EgStatus::ZeroPoint);
    assert!(s.is_null());
    assert!(last_error().contains("zero"));
    let z = CString::new("1/2,0").unwrap();
    assert_eq!(unsafe { eg_phi(ptr::null(), h.tau, z.as_ptr(), EgMethod::Sigma, ptr::null_mut(), &mut s) }, EgStatus::NullPointer);
    let mut ctx = ptr::null_mut();
    assert_eq!(unsafe { eg_context_new(16, 8, &mut ctx) }, EgStatus::PrecisionTooLow);
    assert!(ctx.is_null());
    let bad = CString::new("0,-1").unwrap();
    let mut tau = ptr::null_mut();
    assert_eq!(unsafe { eg_tau_parse(bad.as_ptr(), &mut tau) }, EgStatus::InvalidInput);
    let mut r = ptr::null_mut();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { eg_ratio_order_bound(0, 2, &mut r, &mut c) }, EgStatus::InvalidInput);
    // freeing null is a no-op
    unsafe {
        eg_string_free(ptr::null_mut());
        eg_context_free(ptr::null_mut());
        eg_tau_free(ptr::null_mut());
    }
}

#[test]
fn exact_arithmetic() {
    let got: Vec<String> = (1..=3)
        .map(|g| {
            let mut s = ptr::null_mut();
            assert_eq!(unsafe { eg_n2g(g, &mut s) }, EgStatus::Ok);
            take(s)
        })
        .collect();
    assert_eq!(got, ["24", "240", "504"]);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { eg_bernoulli(4, &mut s) }, EgStatus::Ok);
    assert_eq!(take(s), "-1/30");
    let (mut r, mut c) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { eg_ratio_order_bound(1, 2, &mut r, &mut c) }, EgStatus::Ok);
    assert_eq!((take(r), take(c)), ("24".to_string(), "24".to_string()));
}

#[test]
fn distribution_check_reports_json() {
    let h = Handles::new(256, "2i");
    let z = CString::new("1/3,0").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { eg_check_distribution(h.ctx, h.tau, z.as_ptr(), 3, &mut json) }, EgStatus::Ok);
    let j = take(json);
    assert!(j.contains("\"passed\":true"), "{j}");
}

#[test]
fn unit_check_through_the_abi() {
    let h = Handles::new(768, "i");
    let mut verdict = EgVerdict::Unrecognized;
    let mut poly = ptr::null_mut();
    assert_eq!(unsafe { eg_unit_check(h.ctx, h.tau, 1, 1, 6, 8, &mut verdict, &mut poly) }, EgStatus::Ok);
    assert_eq!(verdict, EgVerdict::Unit);
    assert_eq!(take(poly), "x^2 - 2841072272208896975425612802*x + 1");
    let low = Handles::new(256, "i");
    assert_eq!(unsafe { eg_unit_check(low.ctx, low.tau, 1, 1, 6, 8, &mut verdict, ptr::null_mut()) }, EgStatus::PrecisionTooLow);
}
