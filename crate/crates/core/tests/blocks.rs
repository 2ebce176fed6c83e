use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

use wl2_core::blocks::{build_block, sweep, verify_block, Block, BlockShape};
use wl2_core::{CoeffVector, Tolerances};

fn naive_eval(p: &CoeffVector, theta: f64) -> f64 {
    p.iter().map(|(n, c)| (c * Complex64::from_polar(1.0, n as f64 * theta)).re).sum()
}

/// Smallest `A` such that the envelope bound holds, recomputed from scratch.
fn envelope_oracle(b: &Block) -> f64 {
    let mut a = 0.0f64;
    for n in 1..=b.poly.degree() as i64 {
        for k in [n, -n] {
            let t = b.eta * n as f64;
            let env = b.eta * t.powi(b.m as i32).min(t.powi(-(b.m as i32)));
            a = a.max(b.poly.get(k).norm() / env);
        }
    }
    a
}

fn manual_block(poly: CoeffVector) -> Block {
    Block {
        eta: 1.0 / 16.0,
        m: 1,
        s: 4,
        grid: 4096,
        delta: 0.0,
        radii: vec![],
        kappa: 1.0,
        poly,
    }
}

#[test]
fn reference_block_accepted() {
    let tol = Tolerances::default();
    let (b, r) = build_block(1.0 / 16.0, 1, 4, 4096, &tol).unwrap();
    assert!(r.accepted, "{:?}", r.failures);
    assert_eq!(b.poly.get(0), Complex64::new(0.0, 0.0));
    assert!(b.poly.is_real_valued(1e-12));
    assert!(r.floor_meas >= -0.25 - tol.tau_floor);
    assert!(r.max_meas <= 1.0 + tol.tau_flat);
    assert!(r.flat_radius_meas >= tol.delta_min / 16.0);
    assert!((r.a_meas - envelope_oracle(&b)).abs() <= 1e-12 * r.a_meas);

    // Floor and flatness at points off the verification grid.
    for k in 0..2000 {
        let theta = TAU * (k as f64 + 0.37) / 2000.0;
        let v = naive_eval(&b.poly, theta);
        assert!(v >= -0.25 - 1e-6, "g({theta}) = {v}");
        assert!(v <= 1.0 + 1e-6);
    }
    for k in 0..50 {
        let theta = r.flat_radius_meas * (k as f64 / 50.0 - 0.5);
        assert!((naive_eval(&b.poly, theta) - 1.0).abs() <= 1e-5);
    }
}

#[test]
fn zero_polynomial_rejected() {
    let r = verify_block(&manual_block(CoeffVector::zeros(4)), &Tolerances::default());
    assert!(!r.accepted);
    assert_eq!(r.floor_meas, 0.0);
    assert_eq!(r.flat_radius_meas, 0.0);
}

#[test]
fn cosine_mode_rejected() {
    let mut p = CoeffVector::zeros(1);
    p.set(1, Complex64::new(0.5, 0.0));
    p.set(-1, Complex64::new(0.5, 0.0));
    let r = verify_block(&manual_block(p), &Tolerances::default());
    assert!(r.mean_exact);
    assert!((r.floor_meas + 1.0).abs() < 1e-12);
    assert!(!r.accepted);
}

#[test]
fn invalid_parameters() {
    let tol = Tolerances::default();
    assert!(build_block(0.5, 1, 4, 4096, &tol).is_err());
    assert!(build_block(0.0, 1, 4, 4096, &tol).is_err());
    assert!(build_block(1.0 / 16.0, 0, 4, 4096, &tol).is_err());
    assert!(build_block(1.0 / 16.0, 1, 4, 512, &tol).is_err());
    assert!(build_block(1.0 / 16.0, 1, 4, 4095, &tol).is_err());
}

#[test]
fn sweep_envelope_and_floor() {
    let tol = Tolerances::default();
    let etas = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let ms = [1, 2, 3, 4];
    let ss = [2, 4, 8, 16];
    let cells = sweep(&etas, &ms, &ss, 8192, &tol);
    assert_eq!(cells.len(), 64);
    let get = |eta: f64, m: u32, s: u32| {
        cells
            .iter()
            .find(|c| c.eta == eta && c.m == m && c.s == s)
            .unwrap()
            .report
            .as_ref()
            .unwrap()
    };
    for c in &cells {
        let r = c.report.as_ref().unwrap();
        assert!(r.accepted, "{c:?}");
        assert!(r.a_meas < tol.a_max);
        assert!(r.floor_meas >= -1.0 / c.s as f64 - tol.tau_floor);
    }
    for &s in &ss {
        for &m in &ms {
            // halving eta keeps A within a factor 4
            for w in etas.windows(2) {
                let (a, b) = (get(w[0], m, s).a_meas, get(w[1], m, s).a_meas);
                assert!(b <= 4.0 * a && a <= 4.0 * b, "eta {w:?} M {m} S {s}: {a} vs {b}");
            }
        }
        // Blocks sharing a profile (same ceil(M/2)) differ only in the
        // exponent, so A is non-decreasing there.
        for &eta in &etas {
            assert!(get(eta, 1, s).a_meas <= get(eta, 2, s).a_meas);
            assert!(get(eta, 3, s).a_meas <= get(eta, 4, s).a_meas);
        }
    }
}

#[test]
fn flat_radius_shrinks_with_s() {
    let tol = Tolerances::default();
    let radius = |s| build_block(1.0 / 16.0, 3, s, 8192, &tol).unwrap().1.flat_radius_meas;
    let r: Vec<f64> = [2, 4, 8, 16].into_iter().map(radius).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn built_blocks_meet_contract(log_inv_eta in 3u32..7, m in 1u32..=4, s in 1u32..=40) {
        // A(M,S) grows with S: at M=4, S=40 it passes the default cap of 1e6.
        let tol = Tolerances { a_max: 1e8, ..Tolerances::default() };
        let eta = 1.0 / (1u32 << log_inv_eta) as f64;
        let (b, r) = build_block(eta, m, s, 8192, &tol).unwrap();
        prop_assert!(r.accepted);
        prop_assert_eq!(b.poly.get(0), Complex64::new(0.0, 0.0));
        prop_assert!(b.poly.symmetry_defect() <= 1e-12);
        prop_assert!(r.floor_meas >= -1.0 / s as f64 - tol.tau_floor);
        prop_assert!((r.a_meas - envelope_oracle(&b)).abs() <= 1e-12 * r.a_meas);
    }

    #[test]
    fn shape_floor_bound(m in 1u32..=6, s in 1u32..=1000) {
        let shape = BlockShape::new(m, s).unwrap();
        prop_assert!(shape.floor_bound() >= -1.0 / s as f64);
        prop_assert!(shape.floor_bound() < 0.0);
        prop_assert_eq!(shape.radii.len() as u32, m.div_ceil(2));
    }
}
