use serde::Serialize;
use std::path::Path;
use std::process::ExitCode;

use wl2_core::baire::{equally_spaced, geometric_budgets, run_baire, BaireOptions, CompactSet};
use wl2_core::blocks::build_block;
use wl2_core::fourier::io::read_csv;
use wl2_core::localizer::{build_localizer, choose_s, Attempt, LocalizerOptions, LocalizerParams, LocalizerReport};
use wl2_core::sidon::{count_representations, parse_set, pisier_profile, Method};
use wl2_core::thresholds::iistrong::{random_unit_ball, tail_sup_ratios};
use wl2_core::thresholds::{
    build_divergent_continuous, build_iistrong_weights, default_eps_schedule, km_hypothesis_test, IiStrongSpec, Phi,
};
use wl2_core::weights::{power_weight, regularity_report};
use wl2_core::{CoeffVector, Error, Tolerances, WeightSequence};

use crate::output::{CliError, CliResult, RunDir, Verdict};
use crate::*;

/// Random unit-ball vectors for the tail-sup check carry this many coefficients.
const UNIT_BALL_SUPPORT: usize = 4096;

pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    let mut tol = Tolerances::default();
    for (k, v) in &cli.tol {
        tol.set(k, *v).map_err(CliError::Usage)?;
    }
    let threads = if cli.parallel { 0 } else { 1 };
    // Ignored if a pool already exists; results do not depend on the thread count.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let mut out = RunDir::new(&cli.output_dir)?;
    let result = dispatch(cli, &tol, &mut out);
    match result {
        Ok(v) if v.failures.is_empty() => {
            out.manifest(cli, &tol, "pass", &[])?;
            eprintln!("PASS");
            Ok(ExitCode::SUCCESS)
        }
        Ok(v) => {
            out.manifest(cli, &tol, "fail", &v.failures)?;
            for f in &v.failures {
                eprintln!("FAIL: {f}");
            }
            Ok(ExitCode::from(1))
        }
        Err(e) => {
            let status = if e.exit_code() == 2 { "usage-error" } else { "fail" };
            out.manifest(cli, &tol, status, &[e.to_string()])?;
            Err(e)
        }
    }
}

fn dispatch(cli: &Cli, tol: &Tolerances, out: &mut RunDir) -> CliResult<Verdict> {
    match &cli.command {
        Command::Weights(WeightsCmd::Check { weight, cap, target }) => weights_check(weight, *cap, *target, tol, out),
        Command::Block(BlockCmd::Build { eta, m, s, grid }) => block_build(*eta, *m, *s, *grid, tol, out),
        Command::Localizer(LocalizerCmd::Build { weight, eps, grid }) => localizer_build(weight, *eps, *grid, tol, out),
        Command::Baire(BaireCmd::Run {
            weight,
            steps,
            grid,
            budget_geom,
            budget_first,
            eps_init,
            max_halvings,
            prepare_delta,
            no_renormalize,
        }) => {
            let opts = BaireOptions {
                localizer: LocalizerOptions {
                    grid: *grid,
                    ..LocalizerOptions::default()
                },
                eps_init: *eps_init,
                max_halvings: *max_halvings,
                prepare_delta: *prepare_delta,
                renormalize: !no_renormalize,
                keep_snapshots: false,
                ..BaireOptions::default()
            };
            let budgets = geometric_budgets(*budget_first, *budget_geom, *steps);
            baire_run(weight, *steps, &budgets, &opts, tol, out)
        }
        Command::Appendix(AppendixCmd::Divergence {
            gamma,
            blocks,
            k,
            grid,
            cap,
        }) => appendix_divergence(*gamma, *blocks, *k, *grid, *cap, out),
        Command::Iistrong(IiStrongCmd::Build {
            phi,
            phi_table,
            stages,
            stretch,
            eps,
            samples,
        }) => iistrong_build(phi, phi_table.as_deref(), *stages, *stretch, eps.as_deref(), *samples, cli.seed, out),
        Command::Km(KmCmd::Test {
            input,
            n,
            gamma,
            eps,
            grid,
        }) => km_test(input, *n, *gamma, *eps, *grid, tol, out),
        Command::Sidon(SidonCmd::Count {
            set,
            set_file,
            n,
            gamma,
            method,
        }) => {
            let set = load_set(set.as_deref(), set_file.as_deref())?;
            let r = count_representations(*n, &set, *gamma, method_of(*method))?;
            let mut v = Verdict::default();
            if let Some(b) = r.bound {
                v.require(
                    r.count as f64 <= b,
                    format!("representation bound R(n) <= 3^(gamma |Gamma|): {} > {b}", r.count),
                );
            }
            emit(out, "sidon_count.json", &r)?;
            Ok(v)
        }
        Command::Sidon(SidonCmd::Profile {
            set,
            set_file,
            gamma,
            method,
        }) => {
            let set = load_set(set.as_deref(), set_file.as_deref())?;
            let p = pisier_profile(&set, *gamma, method_of(*method))?;
            let mut v = Verdict::default();
            v.require(
                p.pass,
                format!(
                    "representation bound sup_n R(n) <= 3^(gamma |Gamma|): {} > {:.4} at n = {}",
                    p.sup_count, p.bound, p.argmax
                ),
            );
            emit(out, "sidon_profile.json", &p)?;
            Ok(v)
        }
    }
}

/// Writes the main report and echoes it on stdout.
fn emit<T: Serialize>(out: &mut RunDir, name: &str, value: &T) -> CliResult<()> {
    out.json(name, value)?;
    print!("{}", wl2_core::report::to_json(value));
    Ok(())
}

fn load_weight(args: &WeightArgs) -> CliResult<WeightSequence> {
    match (args.gamma, &args.weights_csv) {
        (Some(g), None) => Ok(power_weight(g)),
        (None, Some(p)) => Ok(WeightSequence::from_csv(p)?),
        _ => Err(CliError::Usage("give exactly one of --gamma or --weights-csv".into())),
    }
}

fn load_set(set: Option<&str>, file: Option<&Path>) -> CliResult<Vec<u64>> {
    match (set, file) {
        (Some(s), None) => Ok(parse_set(s)?),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_set(&text).map_err(|e| {
                CliError::Core(Error::Parse {
                    path: p.to_path_buf(),
                    message: e.to_string(),
                })
            })
        }
        _ => Err(CliError::Usage("give exactly one of --set or --set-file".into())),
    }
}

fn method_of(m: MethodArg) -> Method {
    match m {
        MethodArg::Auto => Method::Auto,
        MethodArg::Exhaustive => Method::Exhaustive,
        MethodArg::Mitm => Method::MeetInTheMiddle,
    }
}

fn weights_check(args: &WeightArgs, cap: usize, target: f64, tol: &Tolerances, out: &mut RunDir) -> CliResult<Verdict> {
    let w = load_weight(args)?;
    let r = regularity_report(&w, cap, target, tol.doubling_threshold)?;
    let mut v = Verdict::default();
    v.require(
        r.doubling.violation_count == 0,
        format!(
            "doubling condition (lambda_k <= C lambda_n for n <= k <= 2n): {} pairs exceed doubling_threshold {}",
            r.doubling.violation_count, r.doubling.threshold
        ),
    );
    v.require(
        r.divergence.n_hit.is_some(),
        format!(
            "divergence premise (sum of 1/lambda_n = infinity): partial sum {:.6} over [1, {cap}] below {target}",
            r.divergence.partial_sum_at_cap
        ),
    );
    if let Some(l) = &r.lemma {
        v.require(
            l.passed,
            format!("summation estimates with M = {}: constants K_b = {:.4}, K_c = {:.4} not stable", l.m, l.k_b, l.k_c),
        );
    }
    emit(out, "weights_report.json", &r)?;
    Ok(v)
}

fn block_build(eta: f64, m: u32, s: u32, grid: usize, tol: &Tolerances, out: &mut RunDir) -> CliResult<Verdict> {
    let (block, report) = build_block(eta, m, s, grid, tol)?;
    out.coeffs("block.csv", &block.poly)?;
    emit(out, "block_report.json", &report)?;
    Ok(Verdict::default())
}

#[derive(Serialize)]
struct LocalizerOutput<'a> {
    params: &'a LocalizerParams,
    report: &'a LocalizerReport,
    attempts: &'a [Attempt],
}

fn localizer_build(args: &WeightArgs, eps: f64, grid: usize, tol: &Tolerances, out: &mut RunDir) -> CliResult<Verdict> {
    let w = load_weight(args)?;
    let opts = LocalizerOptions {
        grid,
        ..LocalizerOptions::default()
    };
    let l = build_localizer(&w, eps, &opts, tol)?;
    let r = &l.report;
    let mut v = Verdict::default();
    v.require(r.pass_range, format!("range 0 <= psi <= 1 + eps (tau_range): [{}, {}]", r.grid_min, r.grid_max));
    v.require(r.pass_deleted_arc, "psi vanishes on an open arc around 0 (tau_supp)");
    v.require(r.pass_mean, format!("mean psi^(0) = 1: got {}", r.mean));
    v.require(r.pass_coeff_sup, format!("coefficient bound sup |psi^(n)| <= eps: got {}", r.coeff_sup));
    v.require(r.pass_tail, format!("weighted tail <= eps^2: got {}", r.weighted_tail));
    out.coeffs("psi.csv", &l.psi)?;
    emit(
        out,
        "localizer_report.json",
        &LocalizerOutput {
            params: &l.params,
            report: r,
            attempts: &l.attempts,
        },
    )?;
    Ok(v)
}

fn baire_run(
    args: &WeightArgs,
    steps: usize,
    budgets: &[f64],
    opts: &BaireOptions,
    tol: &Tolerances,
    out: &mut RunDir,
) -> CliResult<Verdict> {
    let w = load_weight(args)?;
    // Fail on the premise before any grid work.
    choose_s(&w, opts.eps_init, opts.localizer.scan_cap)?;
    let grid = opts.localizer.grid;
    let points = equally_spaced(grid, steps);
    let run = run_baire(&CoeffVector::constant(1.0), CompactSet::full(grid), &points, budgets, &w, opts, tol)?;
    let t = &run.trace;
    let mut v = Verdict::default();
    v.require(t.nested, "deleted sets are nested");
    v.require(t.arcs_avoided, "support avoids every deleted arc (tau_supp)");
    v.require(
        t.total_charged <= t.budget_total * (1.0 + 1e-12),
        format!("total charge {} within budget {}", t.total_charged, t.budget_total),
    );
    v.require(
        t.final_min >= -tol.tau_range && t.final_max <= 2.0 + tol.tau_range,
        format!("range 0 <= f <= 2 (tau_range): [{}, {}]", t.final_min, t.final_max),
    );
    out.coeffs("baire_final.csv", &run.state.f)?;
    out.json("support.json", &t.final_support)?;
    out.dat(
        "charges.dat",
        "step charge",
        t.steps.iter().map(|s| (s.step as f64, s.charge)),
    )?;
    emit(out, "trace.json", t)?;
    Ok(v)
}

fn appendix_divergence(gamma: f64, blocks: usize, k: usize, grid: usize, cap: usize, out: &mut RunDir) -> CliResult<Verdict> {
    let w = power_weight(gamma);
    let r = build_divergent_continuous(&w, blocks, k, grid, cap)?;
    let mut v = Verdict::default();
    v.require(r.disjoint, "block spectra are disjoint");
    v.require(r.pass_t0, format!("T0 sup <= 1 with L2 norm bounded below: sup {}, L2 {}", r.t0_sup, r.t0_l2));
    v.require(r.pass_divergence, "weighted partial sums grow without bound");
    v.require(r.pass_sup, format!("sup |f_J| {} <= M-test bound {}", r.sup_norm, r.sup_bound));
    v.require(r.pass_cauchy, "uniform Cauchy check against the M-test tail");
    out.coeffs("appendix_f.csv", &r.partial_f)?;
    out.dat(
        "energy.dat",
        "blocks weighted_energy",
        r.weighted_partial_sums.iter().enumerate().map(|(j, e)| ((j + 1) as f64, *e)),
    )?;
    emit(out, "appendix.json", &r)?;
    Ok(v)
}

#[derive(Serialize)]
struct IiStrongOutput<'a> {
    spec: &'a IiStrongSpec,
    samples: usize,
    seed: u64,
    tail_sup_ratios: &'a [f64],
}

#[allow(clippy::too_many_arguments)]
fn iistrong_build(
    phi: &str,
    table: Option<&Path>,
    stages: usize,
    stretch: usize,
    eps: Option<&str>,
    samples: usize,
    seed: u64,
    out: &mut RunDir,
) -> CliResult<Verdict> {
    let phi = match table {
        Some(p) => Phi::Table(read_phi_table(p)?),
        None => Phi::parse(phi).ok_or_else(|| CliError::Usage(format!("unknown Phi `{phi}` (identity, xlog, power:P)")))?,
    };
    let eps = match eps {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("--eps: {e}")))?,
        None => default_eps_schedule(stages + 1),
    };
    let spec = build_iistrong_weights(phi, &eps, stages, stretch)?;
    let top = 2 * spec.n_schedule[spec.stages()];
    let vectors = random_unit_ball(&spec, samples, UNIT_BALL_SUPPORT, top, seed);
    let ratios = tail_sup_ratios(&spec, &vectors);
    let mut v = Verdict::default();
    v.require(spec.checks.increasing, "lambda is increasing");
    v.require(spec.checks.pass, "stage invariants (node values, divergence blocks, gap products)");
    if let Some((k, r)) = ratios.iter().enumerate().find(|(_, r)| **r > 1.0) {
        v.require(false, format!("tail bound sup_(|n| > N_k) |S^(n)| <= lambda_(N_k)^(-1/2) at stage {}: ratio {r}", k + 1));
    }
    emit(
        out,
        "iistrong.json",
        &IiStrongOutput {
            spec: &spec,
            samples,
            seed,
            tail_sup_ratios: &ratios,
        },
    )?;
    Ok(v)
}

fn read_phi_table(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let parse_err = |message: String| {
        CliError::Core(Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
    rdr.deserialize::<(f64, f64)>()
        .map(|r| r.map_err(|e| parse_err(e.to_string())))
        .collect()
}

fn km_test(input: &Path, n: usize, gamma: f64, eps: f64, grid: usize, tol: &Tolerances, out: &mut RunDir) -> CliResult<Verdict> {
    let s = read_csv(input)?;
    let r = km_hypothesis_test(&s, n, gamma, eps, grid, tol.tau_supp)?;
    let mut v = Verdict::default();
    v.require(r.cond1_pass, format!("low-frequency mass sum_(|n| <= N) |S^(n)|^2 >= gamma: {} < {gamma}", r.cond1_value));
    v.require(r.cond2_pass, format!("high-frequency bound sup_(|n| > N) |S^(n)| <= eps: {} > {eps}", r.cond2_value));
    emit(out, "km.json", &r)?;
    Ok(v)
}
