//! Representation counts `R(n, Gamma) = #{eps in {-1,0,1}^Gamma : sum eps_j lambda_j = n}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Largest set handled by direct enumeration in `Method::Auto`.
pub const EXHAUSTIVE_AUTO_CAP: usize = 12;
/// Largest set direct enumeration accepts when requested explicitly.
pub const EXHAUSTIVE_CAP: usize = 16;
pub const MITM_CAP: usize = 40;
/// Largest number of distinct half-sums kept in memory.
const HALF_MAP_LIMIT: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Exhaustive,
    MeetInTheMiddle,
}

impl Method {
    fn resolve(self, size: usize) -> Result<Self> {
        match self {
            Method::Auto if size <= EXHAUSTIVE_AUTO_CAP => Ok(Method::Exhaustive),
            Method::Auto | Method::MeetInTheMiddle if size <= MITM_CAP => Ok(Method::MeetInTheMiddle),
            Method::Exhaustive if size <= EXHAUSTIVE_CAP => Ok(Method::Exhaustive),
            Method::Exhaustive => Err(Error::EnumerationCap { size, cap: EXHAUSTIVE_CAP }),
            _ => Err(Error::EnumerationCap { size, cap: MITM_CAP }),
        }
    }
}

fn validate(set: &[u64]) -> Result<()> {
    if set.contains(&0) {
        return Err(Error::InvalidParameter("Gamma must hold positive integers".into()));
    }
    let total: u128 = set.iter().map(|&x| x as u128).sum();
    if total > (i64::MAX / 2) as u128 {
        return Err(Error::InvalidParameter("sum of Gamma overflows 64-bit sums".into()));
    }
    Ok(())
}

/// Full distribution by odometer over all `3^|Gamma|` sign patterns, split
/// in parallel over the patterns of the first two elements.
pub fn distribution_exhaustive(set: &[u64]) -> Result<BTreeMap<i64, u64>> {
    validate(set)?;
    if set.len() > EXHAUSTIVE_CAP {
        return Err(Error::EnumerationCap {
            size: set.len(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    let split = set.len().min(2);
    let (head, tail) = set.split_at(split);
    let prefixes: Vec<i64> = odometer_sums(head);
    let parts: Vec<BTreeMap<i64, u64>> = prefixes
        .par_iter()
        .map(|&p| {
            let mut m = BTreeMap::new();
            for s in odometer_sums(tail) {
                *m.entry(p + s).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut out = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}

/// Sums of every sign pattern, enumerated with a base-3 odometer.
fn odometer_sums(set: &[u64]) -> Vec<i64> {
    let k = set.len();
    let mut digits = vec![0u8; k]; // 0 -> -1, 1 -> 0, 2 -> +1
    let mut sum: i64 = -set.iter().map(|&x| x as i64).sum::<i64>();
    let mut out = Vec::with_capacity(3usize.pow(k as u32));
    loop {
        out.push(sum);
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            if digits[i] < 2 {
                digits[i] += 1;
                sum += set[i] as i64;
                break;
            }
            digits[i] = 0;
            sum -= 2 * set[i] as i64;
            i += 1;
        }
    }
}

/// Distinct sums of one half with their multiplicities, built element by element.
fn half_distribution(set: &[u64]) -> Result<HashMap<i64, u64>> {
    let mut m: HashMap<i64, u64> = HashMap::from([(0, 1)]);
    for &x in set {
        let x = x as i64;
        let mut next: HashMap<i64, u64> = HashMap::with_capacity(m.len() * 3);
        for (&s, &c) in &m {
            for d in [-x, 0, x] {
                *next.entry(s + d).or_insert(0) += c;
            }
        }
        if next.len() > HALF_MAP_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "meet-in-the-middle half has more than {HALF_MAP_LIMIT} distinct sums"
            )));
        }
        m = next;
    }
    Ok(m)
}

fn halves(set: &[u64]) -> Result<(HashMap<i64, u64>, HashMap<i64, u64>)> {
    validate(set)?;
    if set.len() > MITM_CAP {
        return Err(Error::EnumerationCap {
            size: set.len(),
            cap: MITM_CAP,
        });
    }
    let (a, b) = set.split_at(set.len() / 2);
    Ok((half_distribution(a)?, half_distribution(b)?))
}

/// Full distribution as the convolution of the two half distributions.
pub fn distribution_mitm(set: &[u64]) -> Result<BTreeMap<i64, u64>> {
    let (left, right) = halves(set)?;
    let mut ls: Vec<(i64, u64)> = left.into_iter().collect();
    ls.sort_unstable();
    let mut out = BTreeMap::new();
    for (s, c) in ls {
        for (&t, &d) in &right {
            *out.entry(s + t).or_insert(0) += c * d;
        }
    }
    Ok(out)
}

pub fn distribution(set: &[u64], method: Method) -> Result<BTreeMap<i64, u64>> {
    match method.resolve(set.len())? {
        Method::Exhaustive => distribution_exhaustive(set),
        _ => distribution_mitm(set),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepCount {
    pub n: i64,
    pub set: Vec<u64>,
    pub count: u64,
    pub gamma: Option<f64>,
    /// `3^(gamma |Gamma|)` when `gamma` is given.
    pub bound: Option<f64>,
    pub method: Method,
}

pub fn count_representations(n: i64, set: &[u64], gamma: Option<f64>, method: Method) -> Result<RepCount> {
    let resolved = method.resolve(set.len())?;
    let count = match resolved {
        Method::Exhaustive => distribution_exhaustive(set)?.get(&n).copied().unwrap_or(0),
        _ => {
            let (left, right) = halves(set)?;
            let mut ls: Vec<(i64, u64)> = left.into_iter().collect();
            ls.sort_unstable();
            ls.iter()
                .map(|(s, c)| c * right.get(&(n - s)).copied().unwrap_or(0))
                .sum()
        }
    };
    Ok(RepCount {
        n,
        set: set.to_vec(),
        count,
        gamma,
        bound: gamma.map(|g| 3f64.powf(g * set.len() as f64)),
        method: resolved,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PisierProfile {
    pub set: Vec<u64>,
    pub size: usize,
    pub gamma: f64,
    pub sup_count: u64,
    /// Smallest `n >= 0` attaining the supremum.
    pub argmax: i64,
    pub bound: f64,
    pub total: u64,
    pub distinct_sums: usize,
    pub symmetric: bool,
    pub pass: bool,
    pub method: Method,
}

/// `sup_n R(n, Gamma)` against `3^(gamma |Gamma|)` for this finite set.
pub fn pisier_profile(set: &[u64], gamma: f64, method: Method) -> Result<PisierProfile> {
    let resolved = method.resolve(set.len())?;
    let dist = distribution(set, resolved)?;
    let (mut sup_count, mut argmax) = (0u64, 0i64);
    for (&n, &c) in dist.range(0..) {
        if c > sup_count {
            sup_count = c;
            argmax = n;
        }
    }
    let symmetric = dist.iter().all(|(n, c)| dist.get(&-n) == Some(c));
    let bound = 3f64.powf(gamma * set.len() as f64);
    Ok(PisierProfile {
        set: set.to_vec(),
        size: set.len(),
        gamma,
        sup_count,
        argmax,
        bound,
        total: dist.values().sum(),
        distinct_sums: dist.len(),
        symmetric,
        pass: sup_count as f64 <= bound,
        method: resolved,
    })
}

/// Parses a comma- or whitespace-separated list of positive integers.
pub fn parse_set(text: &str) -> Result<Vec<u64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("`{t}` is not a positive integer")))
        })
        .collect()
}
