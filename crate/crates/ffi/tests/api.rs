use std::ffi::CStr;
use std::ptr;

use qlspec::*;
use qlspec_core::field::{prepare_state, FieldMode, ModeState, StateSpec};
use qlspec_core::matter;
use qlspec_core::operator::C64;
use qlspec_core::response::{self, Order, SignalKind};

fn two_level() -> *mut QlsMatter {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { qls_matter_new_two_level(1.0, 1.0, 0.05, &mut m) }, QlsStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = qls_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn close(z: QlsComplex, w: C64) -> bool {
    (z.re - w.re).abs() <= 1e-14 * (1.0 + w.norm()) && (z.im - w.im).abs() <= 1e-14 * (1.0 + w.norm())
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(qls_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn chi1_and_chi3_match_core() {
    let m = two_level();
    assert_eq!(unsafe { qls_matter_dim(m) }, 2);
    let sys = matter::two_level(1.0, 1.0, 0.05).unwrap();
    let g = sys.ground_state();

    let mut z = QlsComplex::default();
    assert_eq!(unsafe { qls_chi1(m, f64::INFINITY, 0.9, &mut z) }, QlsStatus::Ok);
    assert!(close(z, response::chi1(&sys, &g, 0.9).unwrap()));

    assert_eq!(unsafe { qls_chi3(m, f64::INFINITY, 0.9, 1.0, -0.8, 0.7, &mut z) }, QlsStatus::Ok);
    assert!(close(z, response::chi3(&sys, &g, 0.9, [1.0, -0.8, 0.7]).unwrap()));

    let rho = matter::thermal_state(&sys, 2.0).unwrap();
    assert_eq!(unsafe { qls_chi1(m, 2.0, 1.1, &mut z) }, QlsStatus::Ok);
    assert!(close(z, response::chi1(&sys, &rho, 1.1).unwrap()));
    unsafe { qls_matter_free(m) };
}

#[test]
fn frequency_constraint_is_an_argument_error() {
    let m = two_level();
    let mut z = QlsComplex::default();
    let s = unsafe { qls_chi3(m, f64::INFINITY, 1.0, 0.3, 0.3, 0.3, &mut z) };
    assert_eq!(s, QlsStatus::Argument);
    assert!(!last_error().is_empty());
    unsafe { qls_matter_free(m) };
}

#[test]
fn null_handles_are_rejected() {
    let mut z = QlsComplex::default();
    assert_eq!(unsafe { qls_chi1(ptr::null(), 1.0, 1.0, &mut z) }, QlsStatus::NullPointer);
    assert!(last_error().contains("matter"));
    let m = two_level();
    assert_eq!(unsafe { qls_chi1(m, 1.0, 1.0, ptr::null_mut()) }, QlsStatus::NullPointer);
    assert_eq!(unsafe { qls_matter_dim(ptr::null()) }, 0);
    unsafe {
        qls_matter_free(m);
        qls_matter_free(ptr::null_mut());
        qls_field_free(ptr::null_mut());
    }
}

#[test]
fn ladder_and_harmonic_handles() {
    let mut m = ptr::null_mut();
    let s = [1.0, 0.9];
    let d = [1.0, 0.5];
    assert_eq!(unsafe { qls_matter_new_ladder(s.as_ptr(), d.as_ptr(), 2, 0.05, &mut m) }, QlsStatus::Ok);
    assert_eq!(unsafe { qls_matter_dim(m) }, 3);
    unsafe { qls_matter_free(m) };

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qls_matter_new_harmonic(5, 1.0, 1.0, 0.05, &mut h) }, QlsStatus::Ok);
    assert_eq!(unsafe { qls_matter_dim(h) }, 5);
    unsafe { qls_matter_free(h) };
}

#[test]
fn signal_matches_core_with_gates() {
    let m = two_level();
    let modes = [
        QlsMode { frequency: 1.0, coupling: 0.1, truncation: 12, kind: QlsModeKind::Coherent, a: 0.8, b: 0.2 },
        QlsMode { frequency: 0.9, coupling: 0.1, truncation: 12, kind: QlsModeKind::Thermal, a: 0.3, b: 0.0 },
    ];
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { qls_field_new(modes.as_ptr(), 2, &mut f) }, QlsStatus::Ok);
    assert_eq!(unsafe { qls_field_dim(f) }, 144);

    let sys = matter::two_level(1.0, 1.0, 0.05).unwrap();
    let fm = [FieldMode::new(1.0, 0.1, 12), FieldMode::new(0.9, 0.1, 12)];
    let field = prepare_state(
        &fm,
        StateSpec::Product(vec![ModeState::Coherent(C64::new(0.8, 0.2)), ModeState::Thermal(0.3)]),
    )
    .unwrap();
    let want = response::signal(&sys, &sys.ground_state(), &field, 0, SignalKind::Quantum, Order::Third).unwrap();

    let mut total = 0.0;
    let mut gates = [QlsComplex::default(); 4];
    let s = unsafe {
        qls_signal(m, f64::INFINITY, f, 0, QlsSignalKind::Quantum, QlsOrder::Third, &mut total, gates.as_mut_ptr())
    };
    assert_eq!(s, QlsStatus::Ok, "{}", last_error());
    assert_eq!(total, want.rows[0].total);
    for (g, w) in gates.iter().zip(&want.rows[0].gates) {
        assert!(close(*g, *w));
    }

    let mut lin = 0.0;
    let s = unsafe {
        qls_signal(m, f64::INFINITY, f, 0, QlsSignalKind::Classical, QlsOrder::Linear, &mut lin, ptr::null_mut())
    };
    assert_eq!(s, QlsStatus::Ok);
    assert!(lin.is_finite());
    unsafe {
        qls_field_free(f);
        qls_matter_free(m);
    }
}

#[test]
fn fock_state_p_average_is_unsupported() {
    let m = two_level();
    let modes = [QlsMode { frequency: 1.0, coupling: 0.1, truncation: 8, kind: QlsModeKind::Fock, a: 1.0, b: 0.0 }];
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { qls_field_new(modes.as_ptr(), 1, &mut f) }, QlsStatus::Ok);
    let mut total = 0.0;
    let s = unsafe {
        qls_signal(m, f64::INFINITY, f, 0, QlsSignalKind::PAveraged, QlsOrder::Third, &mut total, ptr::null_mut())
    };
    assert_eq!(s, QlsStatus::Unsupported);
    unsafe {
        qls_field_free(f);
        qls_matter_free(m);
    }
}

#[test]
fn oversized_coherent_state_is_a_size_or_argument_error() {
    let modes = [QlsMode { frequency: 1.0, coupling: 0.1, truncation: 4, kind: QlsModeKind::Coherent, a: 3.0, b: 0.0 }];
    let mut f = ptr::null_mut();
    let s = unsafe { qls_field_new(modes.as_ptr(), 1, &mut f) };
    assert_ne!(s, QlsStatus::Ok);
    assert!(f.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn fdt_lines_follow_half_coth() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { qls_matter_new_harmonic(6, 1.0, 1.0, 0.05, &mut m) }, QlsStatus::Ok);
    let mut n = 0;
    let s = unsafe { qls_fdt_lines(m, 1.5, ptr::null_mut(), 0, &mut n) };
    assert_eq!(s, QlsStatus::BufferTooSmall);
    assert!(n > 0);
    assert_eq!(unsafe { qls_fdt_lines(m, 1.5, ptr::null_mut(), n, &mut n) }, QlsStatus::NullPointer);
    let mut lines = vec![QlsFdtLine::default(); n];
    assert_eq!(unsafe { qls_fdt_lines(m, 1.5, lines.as_mut_ptr(), n, &mut n) }, QlsStatus::Ok);
    for l in &lines {
        let want = 0.5 / (1.5 * l.omega / 2.0).tanh();
        assert!((l.ratio - want).abs() < 1e-10 * want.abs(), "{l:?}");
        assert!((l.expected - want).abs() < 1e-12 * want.abs());
    }
    unsafe { qls_matter_free(m) };
}

#[test]
fn errors_are_per_thread() {
    let mut z = QlsComplex::default();
    assert_eq!(unsafe { qls_chi1(ptr::null(), 1.0, 1.0, &mut z) }, QlsStatus::NullPointer);
    std::thread::spawn(|| assert!(qls_last_error().is_null())).join().unwrap();
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qlspec.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
}
