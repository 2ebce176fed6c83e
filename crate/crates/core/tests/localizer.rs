use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

use wl2_core::localizer::{build_localizer, choose_s, verify_psi, LocalizerOptions};
use wl2_core::weights::{constant_weight, power_weight, WeightSequence};
use wl2_core::{CoeffVector, Error, Tolerances};

fn naive_eval(p: &CoeffVector, theta: f64) -> f64 {
    p.iter().map(|(n, c)| (c * Complex64::from_polar(1.0, n as f64 * theta)).re).sum()
}

fn tail_oracle(p: &CoeffVector, w: &WeightSequence) -> f64 {
    (1..=p.degree() as i64)
        .map(|n| (p.get(n).norm_sqr() + p.get(-n).norm_sqr()) * w.value(n as usize).unwrap())
        .sum()
}

fn opts(grid: usize) -> LocalizerOptions {
    LocalizerOptions {
        grid,
        ..LocalizerOptions::default()
    }
}

#[test]
fn choose_s_constant_weight() {
    let w = constant_weight(1.0);
    let p = choose_s(&w, 0.1, 1000).unwrap();
    assert_eq!((p.j_min, p.s), (10, 21));
    assert_eq!(p.l_value, 12.0);
    let p = choose_s(&w, 0.5, 1000).unwrap();
    assert_eq!((p.j_min, p.s), (2, 5));
    assert_eq!(p.l_value, 4.0);
}

#[test]
fn choose_s_square_weight_fails_premise() {
    // sum_{j>=10} 1/(1+j)^2 < 1/10, far below the target 10
    match choose_s(&power_weight(2.0), 0.1, 100_000) {
        Err(Error::DivergencePremise { target, partial_sum, .. }) => {
            assert_eq!(target, 10.0);
            assert!(partial_sum < 0.1);
        }
        other => panic!("expected divergence premise failure, got {other:?}"),
    }
}

#[test]
fn constant_psi_control() {
    let w = constant_weight(1.0);
    let r = verify_psi(&CoeffVector::constant(1.0), 0.25, 1024, &w, &Tolerances::default()).unwrap();
    assert!(r.pass_range && r.pass_mean && r.pass_tail && r.pass_coeff_sup);
    assert!(!r.pass_deleted_arc);
    assert!(!r.all_pass);
}

#[test]
fn reference_localizer_passes() {
    let w = constant_weight(1.0);
    let tol = Tolerances::default();
    let l = build_localizer(&w, 0.25, &opts(4096), &tol).unwrap();
    let r = &l.report;
    assert!(r.all_pass, "{r:?}");
    assert_eq!(l.psi.get(0), Complex64::new(1.0, 0.0));
    assert!(l.psi.symmetry_defect() <= 1e-12);
    assert!(r.grid_min >= -1e-9 && r.grid_max <= 1.25 + 1e-9);
    assert!(r.coeff_sup <= 0.25 + 1e-9);
    let tail = tail_oracle(&l.psi, &w);
    assert!((tail - r.weighted_tail).abs() <= 1e-12 + 1e-9 * tail);
    assert!(tail <= 0.0625);

    let (lo, hi) = r.zero_run.unwrap();
    assert!(lo <= 0 && hi >= 0);
    for k in lo..=hi {
        let theta = TAU * k as f64 / 4096.0;
        assert!(naive_eval(&l.psi, theta).abs() <= 1e-7 + 1e-10);
    }
}

#[test]
fn deleted_arc_shrinks_with_epsilon() {
    let w = power_weight(0.5);
    let tol = Tolerances::default();
    let lengths: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .into_iter()
        .map(|eps| {
            let l = build_localizer(&w, eps, &opts(65536), &tol).unwrap();
            assert!(l.report.all_pass, "eps {eps}: {:?}", l.report);
            assert!(l.report.weighted_tail <= eps * eps);
            l.report.deleted_arc_length
        })
        .collect();
    assert!(lengths.windows(2).all(|p| p[1] < p[0]), "{lengths:?}");
}

#[test]
fn divergence_failure_propagates() {
    let r = build_localizer(&power_weight(2.0), 0.2, &opts(4096), &Tolerances::default());
    assert!(matches!(r, Err(Error::DivergencePremise { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    // Near gamma = 1 the scan needs S ~ e^{1/eps}, beyond any desk cap.
    fn choose_s_is_minimal(eps in 0.05f64..0.9, gamma in 0.0f64..=0.75) {
        let w = power_weight(gamma);
        let p = choose_s(&w, eps, 1_000_000).unwrap();
        prop_assert!(p.s as f64 > 2.0 / eps);
        prop_assert!(p.l_value >= 1.0 / eps);
        let partial: f64 = (p.j_min..p.s).map(|j| 1.0 / w.value(j).unwrap()).sum();
        prop_assert!((p.s - 1) as f64 <= 2.0 / eps || partial < 1.0 / eps);
    }

    #[test]
    fn built_localizers_meet_tail_and_mean(eps in 0.15f64..0.5, gamma in 0.0f64..=0.75) {
        let w = power_weight(gamma);
        prop_assume!(64 * choose_s(&w, eps, 1_000_000).unwrap().s <= 8192);
        let l = build_localizer(&w, eps, &opts(8192), &Tolerances::default()).unwrap();
        prop_assert_eq!(l.psi.get(0), Complex64::new(1.0, 0.0));
        prop_assert!(l.report.weighted_tail <= eps * eps);
        prop_assert!(l.report.grid_min >= -1e-9);
        prop_assert!(l.report.coeff_sup <= eps + 1e-9);
    }
}
