//! Acceptance suite: one PASS/FAIL line per criterion, with runtime against
//! its limit. Lines go straight to stderr so they show without `--nocapture`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::{Duration, Instant};

use wl2_core::baire::{equally_spaced, geometric_budgets, numerical_support, run_baire, BaireOptions, CompactSet};
use wl2_core::blocks::sweep;
use wl2_core::fourier::{dft, evaluate_on_grid, idft, interpolate, pointwise_product};
use wl2_core::localizer::{build_localizer, LocalizerOptions};
use wl2_core::sidon::{distribution_exhaustive, distribution_mitm, pisier_profile, Method};
use wl2_core::thresholds::iistrong::{random_unit_ball, tail_sup_ratios};
use wl2_core::thresholds::{build_divergent_continuous, build_iistrong_weights, default_eps_schedule, Phi};
use wl2_core::weights::{doubling_constant, estimate_m, power_weight, verify_lemma_double};
use wl2_core::{CoeffVector, GridFunction, Tolerances};

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, degree: usize) -> CoeffVector {
    CoeffVector::from_fn(degree, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn naive_convolution(f: &CoeffVector, g: &CoeffVector) -> Vec<Complex64> {
    let (nf, ng) = (f.degree() as i64, g.degree() as i64);
    let mut out = vec![Complex64::new(0.0, 0.0); (2 * (nf + ng) + 1) as usize];
    for i in -nf..=nf {
        for j in -ng..=ng {
            out[(i + j + nf + ng) as usize] += f.get(i) * g.get(j);
        }
    }
    out
}

fn fourier_core() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_roundtrip = 0.0f64;
    for log_g in 0..=14 {
        let size = 1usize << log_g;
        let g = GridFunction::new(
            (0..size).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        )
        .map_err(|e| e.to_string())?;
        let back = evaluate_on_grid(&interpolate(&g), size).map_err(|e| e.to_string())?;
        let err = g.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst_roundtrip = worst_roundtrip.max(err / g.max_abs());
        if size >= 2 {
            let p = random_coeffs(&mut rng, size / 2 - 1);
            let q = dft(&idft(&p, size).map_err(|e| e.to_string())?, None).map_err(|e| e.to_string())?;
            worst_roundtrip = worst_roundtrip.max((&q - &p).max_abs() / p.max_abs());
        }
    }
    check(worst_roundtrip <= 1e-10, format!("roundtrip error {worst_roundtrip:e}"))?;

    let mut worst_conv = 0.0f64;
    for _ in 0..100 {
        let (nf, ng) = (rng.gen_range(0..=64), rng.gen_range(0..=64));
        let f = random_coeffs(&mut rng, nf);
        let g = random_coeffs(&mut rng, ng);
        let r = pointwise_product(&f, &g);
        let oracle = naive_convolution(&f, &g);
        let size = (2 * (nf + ng) + 2).next_power_of_two();
        let grid = idft(&f, size).unwrap().mul(&idft(&g, size).unwrap()).unwrap();
        let via_grid = dft(&grid, Some(nf + ng)).unwrap();
        let scale = oracle.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (k, o) in oracle.iter().enumerate() {
            let n = k as i64 - (nf + ng) as i64;
            worst_conv = worst_conv.max((r.get(n) - o).norm() / scale);
            worst_conv = worst_conv.max((via_grid.get(n) - o).norm() / scale);
        }
    }
    check(worst_conv <= 1e-10, format!("convolution error {worst_conv:e}"))?;
    Ok(format!("roundtrip {worst_roundtrip:.1e}, convolution {worst_conv:.1e}"))
}

fn weights() -> Outcome {
    let cap = 100_000;
    let mut notes = Vec::new();
    for gamma in [0.25, 0.5, 1.0] {
        let w = power_weight(gamma);
        let d = doubling_constant(&w, cap, 16.0).map_err(|e| e.to_string())?;
        check(d.c_est <= 2f64.powf(gamma) + 1e-12, format!("gamma {gamma}: C_est {}", d.c_est))?;
        let m = estimate_m(&w, cap).map_err(|e| e.to_string())?;
        check(m.m_est == 1, format!("gamma {gamma}: M_est {}", m.m_est))?;
        let l = verify_lemma_double(&w, m.m_est + 1, cap).map_err(|e| e.to_string())?;
        check(
            l.passed && l.stable && l.k_b.is_finite() && l.k_c.is_finite(),
            format!("gamma {gamma}: lemma constants K_b {} K_c {} stable {}", l.k_b, l.k_c, l.stable),
        )?;
        notes.push(format!("g={gamma}: C={:.4} K_b={:.3} K_c={:.3}", d.c_est, l.k_b, l.k_c));
    }
    Ok(notes.join("; "))
}

fn blocks() -> Outcome {
    let tol = Tolerances::default();
    let etas = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let cells = sweep(&etas, &[1, 2, 3], &[4, 8, 16], 8192, &tol);
    check(cells.len() == 27, "sweep size")?;
    let mut worst_ratio = 1.0f64;
    for c in &cells {
        let r = c.report.as_ref().map_err(|e| format!("eta {} M {} S {}: {e}", c.eta, c.m, c.s))?;
        check(r.mean_exact, "mean not exactly zero")?;
        check(r.floor_meas >= -1.0 / c.s as f64 - 1e-9, format!("floor {} at S {}", r.floor_meas, c.s))?;
        check(r.flat_radius_meas > 0.0, "flat radius zero")?;
        check(r.a_meas.is_finite(), "A_meas not finite")?;
        if let Some(half) = cells.iter().find(|d| d.m == c.m && d.s == c.s && d.eta == c.eta / 2.0) {
            let a2 = half.report.as_ref().map_err(|e| e.clone())?.a_meas;
            worst_ratio = worst_ratio.max(a2 / r.a_meas).max(r.a_meas / a2);
        }
    }
    check(worst_ratio <= 4.0, format!("A_meas ratio {worst_ratio} under eta halving"))?;
    Ok(format!("27 blocks accepted, worst A ratio {worst_ratio:.3}"))
}

fn localizer() -> Outcome {
    let w = power_weight(0.5);
    let tol = Tolerances::default();
    let opts = LocalizerOptions { grid: 16384, ..Default::default() };
    let mut lengths = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let l = build_localizer(&w, eps, &opts, &tol).map_err(|e| e.to_string())?;
        let r = &l.report;
        check(l.psi.get(0) == Complex64::new(1.0, 0.0), "mean not exactly 1")?;
        check(r.grid_min >= -1e-9, format!("eps {eps}: grid min {}", r.grid_min))?;
        check(r.grid_max <= 1.0 + eps + 1e-9, format!("eps {eps}: grid max {}", r.grid_max))?;
        check(r.zero_run.is_some() && r.residual_sup <= 1e-7, format!("eps {eps}: residual {}", r.residual_sup))?;
        // weighted tail by direct summation
        let tail: f64 = (1..=l.psi.degree() as i64)
            .map(|n| (l.psi.get(n).norm_sqr() + l.psi.get(-n).norm_sqr()) * w.value(n as usize).unwrap())
            .sum();
        check(tail <= eps * eps, format!("eps {eps}: weighted tail {tail}"))?;
        check(r.coeff_sup <= eps + 1e-9, format!("eps {eps}: coefficient sup {}", r.coeff_sup))?;
        check(r.all_pass, format!("eps {eps}: report {r:?}"))?;
        lengths.push(r.deleted_arc_length);
    }
    check(lengths.windows(2).all(|p| p[1] < p[0]), format!("arc lengths {lengths:?}"))?;
    Ok(format!("arc lengths {:.4e} > {:.4e} > {:.4e}", lengths[0], lengths[1], lengths[2]))
}

fn baire() -> Outcome {
    let w = power_weight(0.5);
    let tol = Tolerances::default();
    let size = 16384;
    let opts = BaireOptions {
        localizer: LocalizerOptions { grid: size, ..Default::default() },
        ..Default::default()
    };
    let points = equally_spaced(size, 10);
    // b_k = 2^{-k}, k = 0..9
    let budgets = geometric_budgets(1.0, 0.5, 10);
    let run = run_baire(&CoeffVector::constant(1.0), CompactSet::full(size), &points, &budgets, &w, &opts, &tol)
        .map_err(|e| e.to_string())?;
    let t = &run.trace;
    let support = numerical_support(&run.state.f, size, tol.tau_supp).map_err(|e| e.to_string())?;
    for s in &t.steps {
        for i in 1..s.arc_len {
            let k = (s.arc_start + i) % size;
            check(!support.contains_point(k), format!("step {}: support meets the deleted arc", s.step))?;
        }
    }
    check(t.arcs_avoided, "arcs not avoided")?;
    check((t.final_mean - t.initial_mean).abs() <= 1e-9, format!("mean drift {}", t.final_mean - t.initial_mean))?;
    let total: f64 = budgets.iter().sum();
    check(t.total_charged <= total + 1e-9, format!("charged {} > budgets {total}", t.total_charged))?;
    let nested = run.snapshots.windows(2).all(|p| p[1].e.is_subset(&p[0].e));
    check(nested && t.nested, "support sets not nested")?;
    Ok(format!(
        "10 arcs avoided, charged {:.4} <= {:.4}, mean {:.12}",
        t.total_charged, total, t.final_mean
    ))
}

fn appendix() -> Outcome {
    let w = power_weight(1.0);
    let r = build_divergent_continuous(&w, 20, 64, 4096, 1 << 22).map_err(|e| e.to_string())?;
    for (j, e) in r.weighted_partial_sums.iter().enumerate() {
        check(*e >= (j + 1) as f64 / 4.0 - 1e-9, format!("block {}: energy {e}", j + 1))?;
    }
    check(r.disjoint, "blocks overlap")?;
    check(r.pass_cauchy, format!("Cauchy sup {:?} vs {:?}", r.cauchy_sup, r.cauchy_bound))?;
    check(r.t0_sup <= 1.0 && r.t0_l2 >= 0.5, format!("T0 sup {} L2 {}", r.t0_sup, r.t0_l2))?;
    Ok(format!(
        "energy {:.3} >= 5, T0 sup {:.4} L2 {:.4}, M-test tail {:.4}",
        r.weighted_partial_sums[19], r.t0_sup, r.t0_l2, r.scalar_tail
    ))
}

fn iistrong() -> Outcome {
    let s = build_iistrong_weights(Phi::Identity, &default_eps_schedule(7), 6, 1).map_err(|e| e.to_string())?;
    let c = &s.checks;
    check(c.increasing, "lambda not increasing")?;
    for (k, &n) in s.n_schedule.iter().enumerate() {
        let e = s.eps_schedule[k];
        check(s.lambda(n) == 2f64.powi(2 * (k as i32 + 1)) / (e * e), format!("node {k} inexact"))?;
    }
    check(
        c.divergence_blocks.iter().all(|b| *b >= 0.5 - 1e-12),
        format!("divergence blocks {:?}", c.divergence_blocks),
    )?;
    check(c.max_second_difference <= 1e-14, format!("second difference {:e}", c.max_second_difference))?;
    let samples = random_unit_ball(&s, 50, 4096, 2 * s.n_schedule[6], 7);
    let ratios = tail_sup_ratios(&s, &samples);
    check(ratios.iter().all(|r| *r <= 1.0), format!("tail-sup ratios {ratios:?}"))?;
    Ok(format!("N = {:?}, worst tail ratio {:.3e}", s.n_schedule, ratios.iter().fold(0.0f64, |a, b| a.max(*b))))
}

fn sidon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sets = 0;
    for size in 0..=12 {
        for _ in 0..8 {
            let set: Vec<u64> = (0..size).map(|_| rng.gen_range(1..1000)).collect();
            let a = distribution_exhaustive(&set).map_err(|e| e.to_string())?;
            let b = distribution_mitm(&set).map_err(|e| e.to_string())?;
            check(a == b, format!("methods disagree on {set:?}"))?;
            check(a.values().sum::<u64>() == 3u64.pow(size as u32), format!("total mass on {set:?}"))?;
            sets += 1;
        }
    }
    let lacunary: Vec<u64> = (0..=10).map(|j| 1 << j).collect();
    let interval: Vec<u64> = (1..=12).collect();
    let lac = pisier_profile(&lacunary, 0.5, Method::Auto).map_err(|e| e.to_string())?;
    let int = pisier_profile(&interval, 0.5, Method::Auto).map_err(|e| e.to_string())?;
    check(lac.pass && !int.pass, format!("lacunary sup {} / interval sup {}", lac.sup_count, int.sup_count))?;
    Ok(format!(
        "{sets} sets agree; gamma 0.5: lacunary {} <= {:.0}, interval {} > {:.0}",
        lac.sup_count, lac.bound, int.sup_count, int.bound
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("1 fourier core", Duration::from_secs(10), fourier_core),
        ("2 weights", Duration::from_secs(5), weights),
        ("3 blocks", Duration::from_secs(60), blocks),
        ("4 localizer", Duration::from_secs(120), localizer),
        ("5 baire", Duration::from_secs(600), baire),
        ("6 appendix", Duration::from_secs(30), appendix),
        ("7 full support weights", Duration::from_secs(10), iistrong),
        ("8 sidon", Duration::from_secs(30), sidon),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|s| {
            if elapsed <= limit {
                Ok(s)
            } else {
                Err(format!("{s}; runtime {elapsed:.2?} over {limit:?}"))
            }
        });
        let (tag, detail) = match &outcome {
            Ok(s) => ("PASS", s.clone()),
            Err(s) => ("FAIL", s.clone()),
        };
        writeln!(err, "{tag} criterion {name} [{elapsed:.2?} / {limit:?}]: {detail}").unwrap();
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
