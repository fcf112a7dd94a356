use std::ffi::{CStr, CString};
use std::ptr;

use nhdyn::*;

fn c(re: f64, im: f64) -> NhdynComplex {
    NhdynComplex { re, im }
}

fn matrix(rows: usize, cols: usize, entries: &[NhdynComplex]) -> *mut NhdynMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { nhdyn_matrix_new(rows, cols, entries.as_ptr(), &mut m) },
        NhdynStatus::Ok
    );
    m
}

fn entries(m: *const NhdynMatrix) -> Vec<NhdynComplex> {
    let (mut r, mut k) = (0, 0);
    unsafe {
        assert_eq!(nhdyn_matrix_shape(m, &mut r, &mut k), NhdynStatus::Ok);
        let mut buf = vec![NhdynComplex::default(); r * k];
        assert_eq!(
            nhdyn_matrix_copy(m, buf.as_mut_ptr(), buf.len()),
            NhdynStatus::Ok
        );
        buf
    }
}

fn last_error() -> String {
    let p = nhdyn_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn close(a: &[NhdynComplex], b: &[NhdynComplex], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x.re - y.re).hypot(x.im - y.im) <= tol)
}

#[test]
fn expm_of_nilpotent_is_affine() {
    let z = c(0.0, 0.0);
    let a = matrix(2, 2, &[z, c(2.0, 1.0), z, z]);
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(nhdyn_expm(a, &mut e), NhdynStatus::Ok);
        assert!(close(
            &entries(e),
            &[c(1.0, 0.0), c(2.0, 1.0), z, c(1.0, 0.0)],
            1e-14
        ));
        let mut norm = 0.0;
        assert_eq!(nhdyn_op_norm(a, &mut norm), NhdynStatus::Ok);
        assert!((norm - 5f64.sqrt()).abs() < 1e-13);
        nhdyn_matrix_free(e);
        nhdyn_matrix_free(a);
    }
}

#[test]
fn delta_gamma_is_derivative_of_gamma_t() {
    let z = c(0.0, 0.0);
    let h = matrix(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), z, c(2.0, 0.0)]);
    let x = matrix(2, 2, &[c(0.5, 0.0), c(0.0, 1.0), c(1.0, 0.0), z]);
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(nhdyn_delta_gamma(h, x, &mut d), NhdynStatus::Ok);
        let dt = 1e-5;
        let (mut gp, mut gm) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(nhdyn_gamma_t(h, x, dt, &mut gp), NhdynStatus::Ok);
        assert_eq!(nhdyn_gamma_t(h, x, -dt, &mut gm), NhdynStatus::Ok);
        let fd: Vec<_> = entries(gp)
            .iter()
            .zip(entries(gm))
            .map(|(p, m)| c((p.re - m.re) / (2.0 * dt), (p.im - m.im) / (2.0 * dt)))
            .collect();
        assert!(close(&fd, &entries(d), 1e-8));
        for m in [d, gp, gm, x, h] {
            nhdyn_matrix_free(m);
        }
    }
}

#[test]
fn symmetry_basis_of_nilpotent() {
    let z = c(0.0, 0.0);
    let h = matrix(2, 2, &[z, c(1.0, 0.0), z, z]);
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(nhdyn_symmetry_basis(h, 1e-10, &mut b), NhdynStatus::Ok);
        let mut len = 0;
        assert_eq!(nhdyn_symmetry_basis_len(b, &mut len), NhdynStatus::Ok);
        assert_eq!(len, 2);
        let mut x = ptr::null_mut();
        assert_eq!(
            nhdyn_symmetry_basis_get(b, 5, &mut x),
            NhdynStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));
        assert!(x.is_null());
        assert_eq!(nhdyn_symmetry_basis_get(b, 0, &mut x), NhdynStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(nhdyn_delta_gamma(h, x, &mut d), NhdynStatus::Ok);
        assert!(entries(d).iter().all(|z| z.re.abs() + z.im.abs() < 1e-12));
        nhdyn_matrix_free(d);
        nhdyn_matrix_free(x);
        nhdyn_symmetry_basis_free(b);
        nhdyn_matrix_free(h);
    }
}

#[test]
fn h_nl_shifts_by_imaginary_multiple_of_identity() {
    let z = c(0.0, 0.0);
    let h = matrix(2, 2, &[z, c(1.0, 0.0), z, c(0.0, -1.0)]);
    let state = [c(0.6, 0.0), c(0.0, 0.8)];
    unsafe {
        let mut hn = ptr::null_mut();
        assert_eq!(nhdyn_h_nl(h, state.as_ptr(), 2, &mut hn), NhdynStatus::Ok);
        let (a, b) = (entries(h), entries(hn));
        // off-diagonal unchanged, diagonal shifted by the same amount
        assert!(close(&[a[1], a[2]], &[b[1], b[2]], 1e-15));
        let s0 = (b[0].re - a[0].re, b[0].im - a[0].im);
        let s1 = (b[3].re - a[3].re, b[3].im - a[3].im);
        assert!((s0.0 - s1.0).abs() < 1e-15 && (s0.1 - s1.1).abs() < 1e-15);
        assert!(s0.0.abs() < 1e-15);
        assert_eq!(
            nhdyn_h_nl(h, state.as_ptr(), 3, &mut hn),
            NhdynStatus::InvalidArgument
        );
        nhdyn_matrix_free(hn);
        nhdyn_matrix_free(h);
    }
}

#[test]
fn biortho_of_triangular() {
    let z = c(0.0, 0.0);
    let h = matrix(2, 2, &[c(1.0, 0.0), c(0.3, 0.0), z, c(2.0, 0.0)]);
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(nhdyn_biortho_new(h, 1e-8, &mut b), NhdynStatus::Ok);
        let mut ev = [NhdynComplex::default(); 2];
        assert_eq!(
            nhdyn_biortho_eigenvalues(b, ev.as_mut_ptr(), 1),
            NhdynStatus::InvalidArgument
        );
        assert_eq!(
            nhdyn_biortho_eigenvalues(b, ev.as_mut_ptr(), 2),
            NhdynStatus::Ok
        );
        assert!(close(&ev, &[c(1.0, 0.0), c(2.0, 0.0)], 1e-12));
        let mut cond = 0.0;
        assert_eq!(nhdyn_biortho_condition(b, &mut cond), NhdynStatus::Ok);
        assert!(cond >= 1.0);
        let mut s = ptr::null_mut();
        assert_eq!(
            nhdyn_biortho_metric(b, 2, &mut s),
            NhdynStatus::InvalidArgument
        );
        assert_eq!(nhdyn_biortho_metric(b, 0, &mut s), NhdynStatus::Ok);
        let e = entries(s);
        // metric is Hermitian
        assert!((e[1].re - e[2].re).abs() < 1e-12 && (e[1].im + e[2].im).abs() < 1e-12);
        nhdyn_matrix_free(s);
        nhdyn_biortho_free(b);

        let deg = matrix(2, 2, &[c(1.0, 0.0), z, z, c(1.0, 0.0)]);
        assert_eq!(nhdyn_biortho_new(deg, 1e-8, &mut b), NhdynStatus::Numerical);
        assert!(last_error().contains("degenerate"));
        nhdyn_matrix_free(deg);
        nhdyn_matrix_free(h);
    }
}

#[test]
fn dm_occupations_match_closed_form() {
    let (lambda, mu) = (2.0, 1.0);
    let times = [0.0, 0.5, 1.0, 3.0];
    let label = CString::new("phi_011").unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(nhdyn_dm_model_new(lambda, mu, &mut m), NhdynStatus::Ok);
        let mut out = [0.0; 12];
        assert_eq!(
            nhdyn_dm_occupations(
                m,
                label.as_ptr(),
                times.as_ptr(),
                times.len(),
                out.as_mut_ptr()
            ),
            NhdynStatus::Ok
        );
        for (k, t) in times.iter().enumerate() {
            let d = 1.0 + t * t * (lambda * lambda + mu * mu);
            let expect = [
                t * t * (lambda * lambda + mu * mu) / d,
                (1.0 + mu * mu * t * t) / d,
                (1.0 + lambda * lambda * t * t) / d,
            ];
            for j in 0..3 {
                assert!((out[3 * k + j] - expect[j]).abs() < 1e-12);
            }
        }
        let mut h = ptr::null_mut();
        assert_eq!(nhdyn_dm_model_hamiltonian(m, &mut h), NhdynStatus::Ok);
        let (mut r, mut k) = (0, 0);
        nhdyn_matrix_shape(h, &mut r, &mut k);
        assert_eq!((r, k), (8, 8));
        nhdyn_matrix_free(h);

        let bad = CString::new("0111").unwrap();
        assert_eq!(
            nhdyn_dm_occupations(
                m,
                bad.as_ptr(),
                times.as_ptr(),
                times.len(),
                out.as_mut_ptr()
            ),
            NhdynStatus::InvalidArgument
        );
        nhdyn_dm_model_free(m);
        assert_eq!(
            nhdyn_dm_model_new(-1.0, mu, &mut m),
            NhdynStatus::InvalidArgument
        );
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        let mut norm = 0.0;
        assert_eq!(
            nhdyn_op_norm(ptr::null(), &mut norm),
            NhdynStatus::NullPointer
        );
        assert!(last_error().contains("null"));
        let mut m = ptr::null_mut();
        assert_eq!(
            nhdyn_matrix_new(2, 2, ptr::null(), &mut m),
            NhdynStatus::NullPointer
        );
        // success clears the message
        let one = [c(1.0, 0.0)];
        let a = matrix(1, 1, &one);
        assert!(nhdyn_last_error().is_null());
        nhdyn_matrix_free(a);
        nhdyn_matrix_free(ptr::null_mut());
        nhdyn_string_free(ptr::null_mut());
    }
}

#[test]
fn non_finite_entries_rejected() {
    let mut m = ptr::null_mut();
    let e = [c(f64::NAN, 0.0)];
    assert_eq!(
        unsafe { nhdyn_matrix_new(1, 1, e.as_ptr(), &mut m) },
        NhdynStatus::InvalidArgument
    );
    assert!(m.is_null());
}

#[test]
fn scenario_round_trip() {
    let cfg = CString::new(r#"{"hamiltonian": {"fermion_dm": {"lambda": 1, "mu": 1}}, "initial_state": "011", "tasks": ["fermion_demo"], "time": {"t_end": 1, "points": 5}}"#).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        let (mut report, mut status) = (ptr::null_mut(), -1);
        assert_eq!(
            nhdyn_run_scenario_json(cfg.as_ptr(), out_dir.as_ptr(), &mut report, &mut status),
            NhdynStatus::Ok
        );
        assert_eq!(status, 0);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        nhdyn_string_free(report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["fermion_demo"]["status"], "ok");
        assert_eq!(
            std::fs::read_to_string(dir.path().join("report.json")).unwrap(),
            text
        );

        let bad = CString::new(r#"{"hamiltonian": [[[1,0]]], "time": {"points": 1}}"#).unwrap();
        assert_eq!(
            nhdyn_run_scenario_json(bad.as_ptr(), ptr::null(), &mut report, &mut status),
            NhdynStatus::Validation
        );
        assert!(last_error().contains("time.points"));
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(nhdyn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
