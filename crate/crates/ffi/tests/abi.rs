use std::ffi::{CStr, CString};
use std::ptr;

use condcop_ffi::*;

fn last_error() -> String {
    let p = condcop_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const QUADRATIC: u32 = CondcopCalibration::Quadratic as u32;
const EXPBUMP: u32 = CondcopCalibration::ExpBump as u32;

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(condcop_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn kernels_agree_with_the_library() {
    let mut d = 0.0;
    assert_eq!(unsafe { condcop_copula_density(0.3, 0.6, 0.4, &mut d) }, CondcopStatus::Ok);
    let p = condcop::UnitPair::new(0.3, 0.6).unwrap();
    let r = condcop::Correlation::new(0.4).unwrap();
    assert_eq!(d, condcop::gaussian_copula_density(p, r).unwrap());

    let mut c = 0.0;
    assert_eq!(unsafe { condcop_copula_cdf(0.3, 0.6, 0.0, &mut c) }, CondcopStatus::Ok);
    assert!((c - 0.18).abs() < 1e-9);

    // beta = (1/3, 0): theta = 1/3, rho = 0.5
    let beta = [1.0 / 3.0, 0.0];
    let mut cd = 0.0;
    let s = unsafe { condcop_conditional_density(0.3, 0.6, 1.7, QUADRATIC, beta.as_ptr(), 2, &mut cd) };
    assert_eq!(s, CondcopStatus::Ok);
    let mut direct = 0.0;
    unsafe { condcop_copula_density(0.3, 0.6, 0.5, &mut direct) };
    assert!((cd - direct).abs() < 1e-12);

    let mut tau = 0.0;
    assert_eq!(unsafe { condcop_mixture_tau([1.0].as_ptr(), [0.5].as_ptr(), 1, &mut tau) }, CondcopStatus::Ok);
    assert!((tau - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut d = 0.0;
    assert_eq!(unsafe { condcop_copula_density(1.5, 0.5, 0.1, &mut d) }, CondcopStatus::Domain);
    assert!(last_error().contains("1.5"));
    assert_eq!(unsafe { condcop_copula_density(0.5, 0.5, 1.0, &mut d) }, CondcopStatus::Domain);
    assert_eq!(unsafe { condcop_copula_density(0.5, 0.5, 0.1, ptr::null_mut()) }, CondcopStatus::NullPointer);
    assert!(last_error().contains("out_density"));

    let beta = [1.0, 2.0, 3.0];
    let s = unsafe { condcop_conditional_density(0.3, 0.6, 0.0, QUADRATIC, beta.as_ptr(), 3, &mut d) };
    assert_eq!(s, CondcopStatus::InvalidArgument);
    let s = unsafe { condcop_conditional_density(0.3, 0.6, 0.0, 7, beta.as_ptr(), 2, &mut d) };
    assert_eq!(s, CondcopStatus::InvalidArgument);
    assert!(last_error().contains("calibration"));
    let s = unsafe { condcop_conditional_density(0.3, 0.6, 0.0, QUADRATIC, ptr::null(), 2, &mut d) };
    assert_eq!(s, CondcopStatus::NullPointer);
}

#[test]
fn simulate_is_deterministic_and_validated() {
    let n = 50;
    let (mut u1, mut v1, mut x1) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut u2, mut v2, mut x2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let frank = CondcopFamily::Frank as u32;
    unsafe {
        assert_eq!(condcop_simulate(frank, EXPBUMP, ptr::null(), 0, n, 3, u1.as_mut_ptr(), v1.as_mut_ptr(), x1.as_mut_ptr()), CondcopStatus::Ok);
        assert_eq!(condcop_simulate(frank, EXPBUMP, ptr::null(), 0, n, 3, u2.as_mut_ptr(), v2.as_mut_ptr(), x2.as_mut_ptr()), CondcopStatus::Ok);
    }
    assert_eq!((&u1, &v1, &x1), (&u2, &v2, &x2));
    assert!(u1.iter().chain(&v1).all(|&p| p > 0.0 && p < 1.0));
    assert!(x1.iter().all(|&x| (-2.0..=2.0).contains(&x)));

    let beta = [0.1, 0.2];
    let s = unsafe { condcop_simulate(0, EXPBUMP, beta.as_ptr(), 2, n, 3, u1.as_mut_ptr(), v1.as_mut_ptr(), x1.as_mut_ptr()) };
    assert_eq!(s, CondcopStatus::InvalidArgument);
    let s = unsafe { condcop_simulate(9, QUADRATIC, ptr::null(), 0, n, 3, u1.as_mut_ptr(), v1.as_mut_ptr(), x1.as_mut_ptr()) };
    assert_eq!(s, CondcopStatus::InvalidArgument);
}

fn simulated(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut u, mut v, mut x) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let s = unsafe { condcop_simulate(0, QUADRATIC, ptr::null(), 0, n, seed, u.as_mut_ptr(), v.as_mut_ptr(), x.as_mut_ptr()) };
    assert_eq!(s, CondcopStatus::Ok);
    (u, v, x)
}

unsafe fn fit(u: &[f64], v: &[f64], x: &[f64], opts: &CondcopOptions) -> *mut CondcopFit {
    let mut h = ptr::null_mut();
    let s = condcop_fit(u.as_ptr(), v.as_ptr(), x.as_ptr(), u.len(), QUADRATIC, opts, &mut h);
    assert_eq!(s, CondcopStatus::Ok, "{}", last_error());
    assert!(!h.is_null());
    h
}

#[test]
fn fit_handle_lifecycle() {
    let (u, v, x) = simulated(120, 5);
    let mut opts = condcop_options_default();
    opts.iterations = 400;
    opts.burn_in = 300;
    opts.seed = 8;
    unsafe {
        let h = fit(&u, &v, &x, &opts);
        let mut len = 0;
        assert_eq!(condcop_fit_len(h, &mut len), CondcopStatus::Ok);
        assert_eq!(len, 100);

        let mut rate = -1.0;
        condcop_fit_acceptance_rate(h, &mut rate);
        assert!((0.0..=1.0).contains(&rate));

        let mut small = vec![0usize; 10];
        assert_eq!(condcop_fit_d_star(h, small.as_mut_ptr(), small.len()), CondcopStatus::BufferTooSmall);
        let mut d = vec![0usize; len];
        assert_eq!(condcop_fit_d_star(h, d.as_mut_ptr(), len), CondcopStatus::Ok);
        assert!(d.iter().all(|&k| k >= 1));

        let grid = [-2.0, 0.0, 2.0];
        let (mut m, mut lo, mut hi) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        assert_eq!(condcop_fit_tau_curve(h, grid.as_ptr(), 3, m.as_mut_ptr(), lo.as_mut_ptr(), hi.as_mut_ptr()), CondcopStatus::Ok);
        for i in 0..3 {
            assert!(lo[i] <= m[i] && m[i] <= hi[i]);
            assert!(m[i].abs() <= 1.0);
        }

        let (mut pu, mut pv) = ([0.0; 3], [0.0; 3]);
        assert_eq!(condcop_fit_predictive(h, grid.as_ptr(), 3, 1, pu.as_mut_ptr(), pv.as_mut_ptr()), CondcopStatus::Ok);
        assert!(pu.iter().chain(&pv).all(|&p| p > 0.0 && p < 1.0));

        // round trip through the CSV trace
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("trace.csv").to_str().unwrap()).unwrap();
        assert_eq!(condcop_fit_write_trace(h, path.as_ptr()), CondcopStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(condcop_fit_load(path.as_ptr(), &mut loaded), CondcopStatus::Ok);
        let mut d2 = vec![0usize; len];
        condcop_fit_d_star(loaded, d2.as_mut_ptr(), len);
        assert_eq!(d, d2);
        let mut m2 = [0.0; 3];
        condcop_fit_tau_curve(loaded, grid.as_ptr(), 3, m2.as_mut_ptr(), lo.as_mut_ptr(), hi.as_mut_ptr());
        for i in 0..3 {
            assert!((m[i] - m2[i]).abs() < 1e-12);
        }

        condcop_fit_free(loaded);
        condcop_fit_free(h);
        condcop_fit_free(ptr::null_mut());
    }
}

#[test]
fn fits_replay_from_seed() {
    let (u, v, x) = simulated(60, 2);
    let mut opts = condcop_options_default();
    opts.iterations = 200;
    opts.burn_in = 100;
    unsafe {
        let a = fit(&u, &v, &x, &opts);
        let b = fit(&u, &v, &x, &opts);
        let (mut da, mut db) = (vec![0usize; 100], vec![0usize; 100]);
        condcop_fit_d_star(a, da.as_mut_ptr(), 100);
        condcop_fit_d_star(b, db.as_mut_ptr(), 100);
        assert_eq!(da, db);
        condcop_fit_free(a);
        condcop_fit_free(b);
    }
}

#[test]
fn bad_fit_inputs() {
    let (u, v, x) = simulated(30, 1);
    let mut h = ptr::null_mut();
    unsafe {
        let mut opts = condcop_options_default();
        opts.burn_in = opts.iterations;
        let s = condcop_fit(u.as_ptr(), v.as_ptr(), x.as_ptr(), 30, QUADRATIC, &opts, &mut h);
        assert_eq!(s, CondcopStatus::InvalidArgument);
        assert!(h.is_null());

        let mut opts = condcop_options_default();
        opts.lambda = -1.0;
        let s = condcop_fit(u.as_ptr(), v.as_ptr(), x.as_ptr(), 30, QUADRATIC, &opts, &mut h);
        assert_eq!(s, CondcopStatus::InvalidArgument);

        let s = condcop_fit(u.as_ptr(), ptr::null(), x.as_ptr(), 30, QUADRATIC, ptr::null(), &mut h);
        assert_eq!(s, CondcopStatus::NullPointer);

        let mut bad = u.clone();
        bad[3] = 1.0;
        let s = condcop_fit(bad.as_ptr(), v.as_ptr(), x.as_ptr(), 30, QUADRATIC, ptr::null(), &mut h);
        assert_eq!(s, CondcopStatus::Domain);

        let mut len = 0;
        assert_eq!(condcop_fit_len(ptr::null(), &mut len), CondcopStatus::NullPointer);
        let missing = CString::new("/nonexistent/trace.csv").unwrap();
        assert_eq!(condcop_fit_load(missing.as_ptr(), &mut h), CondcopStatus::Runtime);
    }
}
