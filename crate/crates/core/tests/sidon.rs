use proptest::prelude::*;

use wl2_core::sidon::{
    count_representations, distribution, distribution_exhaustive, distribution_mitm, parse_set,
    pisier_profile, Method,
};
use wl2_core::Error;

/// Plain recursion over the sign of each element.
fn count_oracle(n: i64, set: &[u64]) -> u64 {
    match set.split_first() {
        None => u64::from(n == 0),
        Some((&x, rest)) => {
            let x = x as i64;
            count_oracle(n - x, rest) + count_oracle(n, rest) + count_oracle(n + x, rest)
        }
    }
}

#[test]
fn small_examples() {
    let c = |n, set: &[u64]| count_representations(n, set, None, Method::Auto).unwrap().count;
    assert_eq!(c(0, &[1, 2]), 1);
    assert_eq!(c(3, &[1, 2]), 1);
    assert_eq!(c(0, &[1, 2, 3]), 3);
    for n in -7..=7 {
        assert_eq!(c(n, &[1, 2, 3]), count_oracle(n, &[1, 2, 3]));
    }
}

#[test]
fn singleton_profile() {
    let p = pisier_profile(&[7], 0.3, Method::Auto).unwrap();
    assert_eq!(p.sup_count, 1);
    assert!(p.bound >= 1.0 && p.pass);
    assert_eq!(p.total, 3);
}

#[test]
fn lacunary_versus_interval() {
    let lacunary: Vec<u64> = (0..=10).map(|j| 1u64 << j).collect();
    let interval: Vec<u64> = (1..=12).collect();
    let lac = pisier_profile(&lacunary, 0.5, Method::Auto).unwrap();
    let int = pisier_profile(&interval, 0.5, Method::Auto).unwrap();
    assert!(lac.pass, "{lac:?}");
    assert!(!int.pass, "{int:?}");
    // signed binary expansions: the sup count is a Fibonacci number
    assert_eq!(lac.sup_count, 144);
    // smallest passing exponent log R / (|Gamma| log 3) separates the two
    let crit = |p: &wl2_core::sidon::PisierProfile| (p.sup_count as f64).ln() / (p.size as f64 * 3f64.ln());
    assert!(crit(&lac) < 0.46 && crit(&int) > 0.69);
    assert!(!pisier_profile(&interval, 0.4, Method::Auto).unwrap().pass);
    assert_eq!(lac.sup_count, count_oracle(lac.argmax, &lacunary));
    assert_eq!(int.sup_count, count_oracle(0, &interval));
    assert!(int.sup_count > 10 * lac.sup_count);
}

#[test]
fn caps() {
    let big: Vec<u64> = (1..=41).collect();
    assert!(matches!(
        count_representations(0, &big, None, Method::Auto),
        Err(Error::EnumerationCap { size: 41, .. })
    ));
    let mid: Vec<u64> = (1..=17).collect();
    assert!(matches!(distribution_exhaustive(&mid), Err(Error::EnumerationCap { .. })));
    assert!(count_representations(0, &mid, None, Method::MeetInTheMiddle).is_ok());
    assert!(count_representations(0, &[0, 1], None, Method::Auto).is_err());
}

#[test]
fn large_lacunary_by_mitm() {
    let set: Vec<u64> = (0..30).map(|j| 3u64.pow(j as u32 / 2) * (1 + j as u64 % 2)).collect();
    let r = count_representations(0, &set, Some(0.4), Method::MeetInTheMiddle).unwrap();
    assert!(r.count >= 1);
    assert_eq!(r.method, Method::MeetInTheMiddle);
}

#[test]
fn parse_examples() {
    assert_eq!(parse_set("1,2, 4\n8").unwrap(), vec![1, 2, 4, 8]);
    assert!(parse_set("1,-2").is_err());
}

fn small_set() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..200, 0..=12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mitm_equals_exhaustive(set in small_set()) {
        prop_assert_eq!(distribution_mitm(&set).unwrap(), distribution_exhaustive(&set).unwrap());
    }

    #[test]
    fn symmetric_and_total(set in small_set()) {
        let d = distribution(&set, Method::Auto).unwrap();
        for (n, c) in &d {
            prop_assert_eq!(d.get(&-n), Some(c));
        }
        prop_assert_eq!(d.values().sum::<u64>(), 3u64.pow(set.len() as u32));
        prop_assert!(d[&0] >= 1);
    }

    #[test]
    fn counts_match_recursion(set in prop::collection::vec(1u64..30, 0..=8), n in -60i64..60) {
        let r = count_representations(n, &set, None, Method::MeetInTheMiddle).unwrap();
        prop_assert_eq!(r.count, count_oracle(n, &set));
        prop_assert!(r.count <= 3u64.pow(set.len() as u32));
    }
}
