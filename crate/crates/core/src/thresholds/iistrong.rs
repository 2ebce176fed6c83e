//! A weight sequence for which `sum Phi(1/lambda_n) = infinity` and yet every
//! distribution in the unit ball of `l2(lambda)` has full support.
//!
//! `N_{k+1} = N_k + stretch * ceil(1/Phi(eps_k^2 2^{-2k-1}))`,
//! `lambda_{N_k} = 2^{2k}/eps_k^2`, and `1/lambda_n` is affine on each
//! `[N_k, N_{k+1}]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::weights::WeightSequence;

const PHI_FLOOR: f64 = 1e-300;

/// Positive increasing function on `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Phi {
    Identity,
    Power(f64),
    /// `x / log(e + 1/x)`.
    XOverLog,
    /// Piecewise-linear table of `(x, Phi(x))`, increasing in both columns.
    Table(Vec<(f64, f64)>),
}

impl Phi {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "identity" => Some(Self::Identity),
            "xlog" => Some(Self::XOverLog),
            _ => s.strip_prefix("power:").and_then(|p| p.parse().ok()).map(Self::Power),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Power(p) => x.powf(*p),
            Self::XOverLog => x / (std::f64::consts::E + 1.0 / x).ln(),
            Self::Table(rows) => {
                let i = rows.partition_point(|r| r.0 < x);
                if i == 0 {
                    rows[0].1 * (x / rows[0].0).min(1.0)
                } else if i == rows.len() {
                    rows[i - 1].1
                } else {
                    let (a, b) = (rows[i - 1], rows[i]);
                    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Table(rows) = self {
            let ok = !rows.is_empty()
                && rows.iter().all(|r| r.0 > 0.0 && r.1 > 0.0)
                && rows.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1);
            if !ok {
                return Err(Error::InvalidParameter("Phi table must be positive and increasing".into()));
            }
        }
        if let Self::Power(p) = self {
            if !(*p > 0.0) {
                return Err(Error::InvalidParameter("Phi = x^p needs p > 0".into()));
            }
        }
        Ok(())
    }
}

/// `eps_k = 2^{1-k}`, `k = 1..=count`.
pub fn default_eps_schedule(count: usize) -> Vec<f64> {
    (1..=count).map(|k| 2f64.powi(1 - k as i32)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IiStrongChecks {
    pub increasing: bool,
    /// `max_k |lambda(N_k) - 2^{2k}/eps_k^2|`; zero when the nodes are exact.
    pub node_error: f64,
    /// `sum_{N_k <= n <= (N_k + N_{k+1})/2} Phi(1/lambda_n)` per stage.
    pub divergence_blocks: Vec<f64>,
    /// Largest within-stage second difference of `1/lambda_n`.
    pub max_second_difference: f64,
    /// `(N_{k+1} - N_k) Phi(eps_k^2 2^{-2k-1})` per stage.
    pub gap_products: Vec<f64>,
    /// First stage whose divergence block reaches 1/2.
    pub first_stage_block_half: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IiStrongSpec {
    pub phi: Phi,
    pub stretch: usize,
    /// `eps_1 .. eps_{K+1}`.
    pub eps_schedule: Vec<f64>,
    /// `N_1 .. N_{K+1}`.
    pub n_schedule: Vec<usize>,
    /// `lambda_{N_k}`.
    pub node_values: Vec<f64>,
    pub checks: IiStrongChecks,
}

impl IiStrongSpec {
    /// `lambda_n`, constant outside `[N_1, N_{K+1}]`.
    pub fn lambda(&self, n: usize) -> f64 {
        lambda(&self.n_schedule, &self.node_values, n)
    }

    pub fn inv_lambda(&self, n: usize) -> f64 {
        inv_lambda(&self.n_schedule, &self.node_values, n)
    }

    pub fn weights(&self) -> WeightSequence {
        let ns = self.n_schedule.clone();
        let vs = self.node_values.clone();
        WeightSequence::from_fn("iistrong", move |n| lambda(&ns, &vs, n))
    }

    pub fn stages(&self) -> usize {
        self.n_schedule.len() - 1
    }
}

/// Node values are returned as stored so they stay exact.
fn lambda(ns: &[usize], vs: &[f64], n: usize) -> f64 {
    let clamped = n.clamp(ns[0], ns[ns.len() - 1]);
    match ns.binary_search(&clamped) {
        Ok(k) => vs[k],
        Err(_) => 1.0 / inv_lambda(ns, vs, n),
    }
}

fn inv_lambda(ns: &[usize], vs: &[f64], n: usize) -> f64 {
    if n <= ns[0] {
        return 1.0 / vs[0];
    }
    let last = ns.len() - 1;
    if n >= ns[last] {
        return 1.0 / vs[last];
    }
    let k = ns.partition_point(|&m| m <= n) - 1;
    let (a, b) = (ns[k], ns[k + 1]);
    let (ia, ib) = (1.0 / vs[k], 1.0 / vs[k + 1]);
    let t = (n - a) as f64 / (b - a) as f64;
    ia + (ib - ia) * t
}

pub fn build_iistrong_weights(
    phi: Phi,
    eps_schedule: &[f64],
    stages: usize,
    stretch: usize,
) -> Result<IiStrongSpec> {
    phi.validate()?;
    if stretch < 1 || stages < 1 {
        return Err(Error::InvalidParameter("need stages >= 1 and stretch >= 1".into()));
    }
    if eps_schedule.len() < stages + 1 {
        return Err(Error::InvalidParameter(format!(
            "need {} epsilons for {stages} stages, got {}",
            stages + 1,
            eps_schedule.len()
        )));
    }
    let eps = &eps_schedule[..=stages];
    if eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps schedule must be strictly decreasing in (0, 1]".into()));
    }
    let mut ns = vec![1usize];
    let mut gap_products = Vec::with_capacity(stages);
    for k in 1..=stages {
        let arg = eps[k - 1].powi(2) * 2f64.powi(-2 * k as i32 - 1);
        let v = phi.eval(arg);
        if !(v >= PHI_FLOOR) {
            return Err(Error::PhiUnderflow { stage: k, argument: arg });
        }
        let gap = stretch
            .checked_mul((1.0 / v).ceil() as usize)
            .filter(|g| *g < usize::MAX / 4)
            .ok_or_else(|| Error::InvalidParameter(format!("stage {k} gap overflows")))?;
        gap_products.push(gap as f64 * v);
        ns.push(ns[k - 1] + gap);
    }
    let node_values: Vec<f64> = (1..=stages + 1)
        .map(|k| 2f64.powi(2 * k as i32) / eps[k - 1].powi(2))
        .collect();

    let mut spec = IiStrongSpec {
        phi,
        stretch,
        eps_schedule: eps.to_vec(),
        n_schedule: ns,
        node_values,
        checks: IiStrongChecks {
            increasing: false,
            node_error: 0.0,
            divergence_blocks: vec![],
            max_second_difference: 0.0,
            gap_products,
            first_stage_block_half: None,
            pass: false,
        },
    };
    spec.checks = check(&spec);
    Ok(spec)
}

fn check(spec: &IiStrongSpec) -> IiStrongChecks {
    let ns = &spec.n_schedule;
    let mut increasing = true;
    let mut max_second_difference = 0.0f64;
    let mut divergence_blocks = Vec::new();
    for k in 0..ns.len() - 1 {
        let (a, b) = (ns[k], ns[k + 1]);
        let mut prev2 = f64::NAN;
        let mut prev = spec.inv_lambda(a);
        let mut block = CompensatedSum::new();
        block.add(spec.phi.eval(prev));
        let mid = (a + b) / 2;
        for n in a + 1..=b {
            let cur = spec.inv_lambda(n);
            if cur >= prev {
                increasing = false;
            }
            if !prev2.is_nan() {
                max_second_difference = max_second_difference.max((cur - 2.0 * prev + prev2).abs());
            }
            if n <= mid {
                block.add(spec.phi.eval(cur));
            }
            prev2 = prev;
            prev = cur;
        }
        divergence_blocks.push(block.value());
    }
    let node_error = ns
        .iter()
        .zip(&spec.node_values)
        .map(|(&n, v)| (spec.lambda(n) - v).abs())
        .fold(0.0, f64::max);
    let first_stage_block_half = divergence_blocks.iter().position(|b| *b >= 0.5).map(|i| i + 1);
    let pass = increasing
        && node_error == 0.0
        && divergence_blocks.iter().all(|b| *b >= 0.5 - 1e-12)
        && max_second_difference <= 1e-14
        && spec.checks.gap_products.iter().all(|p| *p >= 1.0);
    IiStrongChecks {
        increasing,
        node_error,
        divergence_blocks,
        max_second_difference,
        gap_products: spec.checks.gap_products.clone(),
        first_stage_block_half,
        pass,
    }
}

/// Sparse coefficient vector `(n, c_n)` with `n >= 0`; the conjugate side
/// is implied.
pub type SparseCoeffs = Vec<(usize, f64)>;

/// Random elements of the unit ball of `l2(lambda)` supported on `support`
/// indices in `[0, top]`, log-uniformly spread, with random norms in `(0, 1]`.
pub fn random_unit_ball(spec: &IiStrongSpec, count: usize, support: usize, top: usize, seed: u64) -> Vec<SparseCoeffs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln_top = (top.max(2) as f64).ln();
    (0..count)
        .map(|_| {
            let mut v: SparseCoeffs = (0..support)
                .map(|_| {
                    let n = (rng.gen_range(0.0..ln_top)).exp() as usize;
                    (n.min(top), rng.gen_range(-1.0..1.0))
                })
                .collect();
            v.sort_by_key(|x| x.0);
            v.dedup_by_key(|x| x.0);
            // Both n and -n carry the coefficient.
            let norm: f64 = v
                .iter()
                .map(|(n, c)| c * c * spec.lambda(*n) * if *n == 0 { 1.0 } else { 2.0 })
                .sum::<f64>()
                .sqrt();
            let r: f64 = rng.gen_range(0.0..1.0f64).max(1e-3);
            v.iter_mut().for_each(|x| x.1 *= r / norm);
            v
        })
        .collect()
}

/// Per stage `k`: the largest `sup_{|n| > N_{k+1}} |S^(n)| * lambda_{N_{k+1}}^{1/2}`
/// over the samples. The bound holds when every entry is at most 1.
pub fn tail_sup_ratios(spec: &IiStrongSpec, samples: &[SparseCoeffs]) -> Vec<f64> {
    (1..spec.n_schedule.len())
        .map(|k| {
            let nk = spec.n_schedule[k];
            let bound = spec.lambda(nk).powf(-0.5);
            samples
                .iter()
                .flat_map(|s| s.iter().filter(|(n, _)| *n > nk).map(|(_, c)| c.abs()))
                .fold(0.0f64, f64::max)
                / bound
        })
        .collect()
}
