use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use rcqme_ffi::*;

fn bath(lambda: f64, temperature: f64) -> RcqmeBath {
    RcqmeBath {
        lambda,
        omega_rc: 28.0,
        gamma: 0.0071 / PI,
        cutoff: 1000.0 * PI,
        temperature,
    }
}

fn model(lambda: f64) -> *mut RcqmeModel {
    let mut m = ptr::null_mut();
    let status = unsafe { rcqme_model_new(0.0, 1.0, &bath(lambda, 1.0), &bath(lambda, 0.5), &mut m) };
    assert_eq!(status, RcqmeStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = rcqme_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn currents_match_the_core_library() {
    let m = model(2.0);
    let core = rcqme::hamiltonian::JunctionModel::new(
        0.0,
        1.0,
        rcqme::bath::BathSpec::new(2.0, 28.0, 0.0071 / PI, 1000.0 * PI, 1.0).unwrap(),
        rcqme::bath::BathSpec::new(2.0, 28.0, 0.0071 / PI, 1000.0 * PI, 0.5).unwrap(),
    )
    .unwrap();
    for (kind, method) in [
        (RcqmeMethod::RcQme, rcqme::methods::Method::RcQme(3)),
        (RcqmeMethod::Bmr, rcqme::methods::Method::Bmr),
        (RcqmeMethod::EffSb, rcqme::methods::Method::effsb()),
    ] {
        let mut j = f64::NAN;
        assert_eq!(unsafe { rcqme_current(m, kind as u32, 3, &mut j) }, RcqmeStatus::Ok);
        assert_eq!(j, rcqme::methods::evaluate(&core, method).unwrap().current);
        assert!(j > 0.0);
    }
    unsafe { rcqme_model_free(m) };
}

#[test]
fn setters_and_effective_parameters() {
    let m = model(0.0);
    let mut eff = RcqmeEffective {
        delta_eff: 0.0,
        f_hot: 1.0,
        f_cold: 1.0,
        m_used: 0,
        converged: false,
        ill_conditioned: true,
    };
    assert_eq!(unsafe { rcqme_effective_params(m, 0.0, 0, &mut eff) }, RcqmeStatus::Ok);
    assert_eq!((eff.delta_eff, eff.f_hot, eff.f_cold), (1.0, 0.0, 0.0));
    assert!(eff.converged);

    assert_eq!(unsafe { rcqme_model_set_couplings(m, 4.0, 4.0) }, RcqmeStatus::Ok);
    assert_eq!(unsafe { rcqme_effective_params(m, 1e-3, 8, &mut eff) }, RcqmeStatus::Ok);
    assert!(eff.delta_eff < 1.0 && eff.f_hot != 0.0);

    assert_eq!(unsafe { rcqme_model_set_temperatures(m, 0.8, 0.8) }, RcqmeStatus::Ok);
    let mut j = f64::NAN;
    assert_eq!(unsafe { rcqme_current(m, RcqmeMethod::Bmr as u32, 0, &mut j) }, RcqmeStatus::Ok);
    assert!(j.abs() < 1e-12);

    assert_eq!(
        unsafe { rcqme_model_set_temperatures(m, -1.0, 0.5) },
        RcqmeStatus::InvalidParameter
    );
    assert!(last_error().contains("temperature"));
    assert_eq!(unsafe { rcqme_current(m, RcqmeMethod::Bmr as u32, 0, &mut j) }, RcqmeStatus::Ok);
    assert!(j.abs() < 1e-12, "failed setter must leave the model unchanged");
    unsafe { rcqme_model_free(m) };
}

#[test]
fn rectification_round_trip() {
    let m = model(2.0);
    let mut out = RcqmeRectification {
        current_forward: 0.0,
        current_reverse: 0.0,
        ratio: 0.0,
    };
    let mut back = out;
    let kind = RcqmeMethod::EffSb as u32;
    assert_eq!(unsafe { rcqme_rectification(m, 2.0, 0.5, kind, 0, &mut out) }, RcqmeStatus::Ok);
    assert_eq!(unsafe { rcqme_rectification(m, 2.0, -0.5, kind, 0, &mut back) }, RcqmeStatus::Ok);
    assert!((out.ratio * back.ratio - 1.0).abs() < 1e-6);
    assert_eq!(unsafe { rcqme_rectification(m, 2.0, 1.0, kind, 0, &mut out) }, RcqmeStatus::Domain);
    unsafe { rcqme_model_free(m) };
}

#[test]
fn errors_are_reported_not_raised() {
    let mut j = 0.0;
    assert_eq!(
        unsafe { rcqme_current(ptr::null(), RcqmeMethod::Bmr as u32, 0, &mut j) },
        RcqmeStatus::NullPointer
    );
    assert!(last_error().contains("model"));

    let m = model(1.0);
    assert_eq!(unsafe { rcqme_current(m, 17, 0, &mut j) }, RcqmeStatus::Domain);
    assert_eq!(unsafe { rcqme_current(m, RcqmeMethod::RcQme as u32, 9, &mut j) }, RcqmeStatus::Resource);
    assert_eq!(
        unsafe { rcqme_current(m, RcqmeMethod::Bmr as u32, 0, ptr::null_mut()) },
        RcqmeStatus::NullPointer
    );
    unsafe { rcqme_model_free(m) };
    unsafe { rcqme_model_free(ptr::null_mut()) };

    let mut handle = ptr::null_mut();
    let bad = RcqmeBath { gamma: -1.0, ..bath(1.0, 1.0) };
    assert_eq!(
        unsafe { rcqme_model_new(0.0, 1.0, &bad, &bath(1.0, 0.5), &mut handle) },
        RcqmeStatus::InvalidParameter
    );
    assert!(handle.is_null());
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(rcqme_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rcqme.h")).unwrap();
    for symbol in [
        "rcqme_model_new",
        "rcqme_model_free",
        "rcqme_model_set_couplings",
        "rcqme_model_set_temperatures",
        "rcqme_current",
        "rcqme_effective_params",
        "rcqme_rectification",
        "rcqme_last_error",
        "rcqme_version",
        "typedef struct RcqmeModel RcqmeModel;",
        "RCQME_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(symbol), "{symbol} missing from header");
    }
}
