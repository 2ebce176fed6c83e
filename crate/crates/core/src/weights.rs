//! Weight sequences and their regularity diagnostics.
//!
//! Every "for all n" statement is checked on a finite range `[1, cap]` and
//! the report records that range.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

type Generator = dyn Fn(usize) -> f64 + Send + Sync;

/// A positive sequence `lambda_n`, evaluated lazily and cached by exact index.
#[derive(Clone)]
pub struct WeightSequence {
    name: String,
    generator: Arc<Generator>,
    /// Largest index the generator is defined at (tables loaded from disk).
    limit: Option<usize>,
    cache: Arc<RwLock<Arc<Vec<f64>>>>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("name", &self.name)
            .field("limit", &self.limit)
            .field("cached", &self.cache.read().map(|c| c.len()).unwrap_or(0))
            .finish()
    }
}

impl WeightSequence {
    pub fn from_fn(name: impl Into<String>, f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            generator: Arc::new(f),
            limit: None,
            cache: Arc::new(RwLock::new(Arc::new(Vec::new()))),
        }
    }

    /// A finite table `values[n]`; indices past the end are errors.
    pub fn from_table(name: impl Into<String>, values: Vec<f64>) -> Self {
        let limit = values.len().saturating_sub(1);
        let mut w = Self::from_fn(name, move |n| values.get(n).copied().unwrap_or(f64::NAN));
        w.limit = Some(limit);
        w
    }

    /// Loads a CSV with header `n,value`. Indices must be contiguous from 0
    /// or 1; a table starting at 1 gets `lambda_0 = lambda_1`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| parse_err(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| parse_err(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["n", "value"] {
            return Err(parse_err("expected header `n,value`".into()));
        }
        let mut rows: Vec<(usize, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| parse_err(e.to_string()))?;
            let n = rec[0].parse().map_err(|_| parse_err(format!("bad index `{}`", &rec[0])))?;
            let v = rec[1].parse().map_err(|_| parse_err(format!("bad value `{}`", &rec[1])))?;
            rows.push((n, v));
        }
        rows.sort_by_key(|r| r.0);
        let start = rows.first().map(|r| r.0).ok_or_else(|| parse_err("empty weight table".into()))?;
        if start > 1 {
            return Err(parse_err(format!("table starts at index {start}; expected 0 or 1")));
        }
        let mut values = Vec::with_capacity(rows.len() + 1);
        if start == 1 {
            values.push(rows[0].1);
        }
        for (i, (n, v)) in rows.iter().enumerate() {
            if *n != start + i {
                return Err(parse_err(format!("index {} missing from table", start + i)));
            }
            values.push(*v);
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "table".into());
        Ok(Self::from_table(name, values))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn limit(&self) -> Option<usize> {
        self.limit
    }

    /// Cached values `lambda_0..=lambda_upto` (possibly more).
    pub fn table(&self, upto: usize) -> Result<Arc<Vec<f64>>> {
        {
            let cache = self.cache.read().expect("weight cache poisoned");
            if cache.len() > upto {
                return Ok(Arc::clone(&cache));
            }
        }
        if let Some(limit) = self.limit {
            if upto > limit {
                return Err(Error::WeightOutOfRange {
                    name: self.name.clone(),
                    index: upto,
                });
            }
        }
        let mut cache = self.cache.write().expect("weight cache poisoned");
        if cache.len() > upto {
            return Ok(Arc::clone(&cache));
        }
        let mut target = (upto + 1).max(2 * cache.len());
        if let Some(limit) = self.limit {
            target = target.min(limit + 1);
        }
        let mut values = Vec::with_capacity(target);
        values.extend_from_slice(&cache);
        for n in values.len()..target {
            let v = (self.generator)(n);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidWeight {
                    name: self.name.clone(),
                    index: n,
                    value: v,
                });
            }
            values.push(v);
        }
        *cache = Arc::new(values);
        Ok(Arc::clone(&cache))
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        Ok(self.table(n)?[n])
    }

    /// `n -> max(lambda_n, 1)`.
    pub fn clamped_below_one(&self) -> Self {
        let inner = self.clone();
        let mut w = Self::from_fn(format!("max({},1)", self.name), move |n| {
            inner.value(n).map(|v| v.max(1.0)).unwrap_or(f64::NAN)
        });
        w.limit = self.limit;
        w
    }
}

/// `lambda_n = (1 + n)^gamma`.
pub fn power_weight(gamma: f64) -> WeightSequence {
    WeightSequence::from_fn(format!("(1+n)^{gamma}"), move |n| (1.0 + n as f64).powf(gamma))
}

pub fn constant_weight(c: f64) -> WeightSequence {
    WeightSequence::from_fn(format!("const {c}"), move |_| c)
}

/// First index where `sum_{n=from}^{N} 1/lambda_n` reaches `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceWitness {
    pub target: f64,
    pub from: usize,
    pub cap: usize,
    pub n_hit: Option<usize>,
    pub partial_sum_at_hit: Option<f64>,
    pub partial_sum_at_cap: f64,
}

/// Scans `n = 1..=cap` accumulating `1/lambda_n`.
pub fn check_divergence(w: &WeightSequence, target: f64, cap: usize) -> Result<DivergenceWitness> {
    check_divergence_from(w, 1, target, cap)
}

pub fn check_divergence_from(
    w: &WeightSequence,
    from: usize,
    target: f64,
    cap: usize,
) -> Result<DivergenceWitness> {
    if !(target > 0.0) || cap < 1 {
        return Err(Error::InvalidParameter(format!(
            "check_divergence needs target > 0 and cap >= 1 (got {target}, {cap})"
        )));
    }
    let table = w.table(cap)?;
    let mut acc = CompensatedSum::new();
    let mut hit = None;
    for n in from..=cap {
        acc.add(1.0 / table[n]);
        if hit.is_none() && acc.value() >= target {
            hit = Some((n, acc.value()));
        }
    }
    Ok(DivergenceWitness {
        target,
        from,
        cap,
        n_hit: hit.map(|h| h.0),
        partial_sum_at_hit: hit.map(|h| h.1),
        partial_sum_at_cap: acc.value(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub c_est: f64,
    pub range_checked: usize,
    pub threshold: f64,
    /// `(n, k)` pairs with `n <= k <= 2n` whose ratio exceeds the threshold
    /// (first 64 recorded).
    pub violations: Vec<(usize, usize)>,
    pub violation_count: usize,
}

/// `max over 1 <= n <= cap/2, n <= k <= 2n` of `max(lambda_k/lambda_n, lambda_n/lambda_k)`.
///
/// Sliding-window extrema over `[n, 2n]`, so the scan is linear in `cap`.
pub fn doubling_constant(w: &WeightSequence, cap: usize, threshold: f64) -> Result<DoublingReport> {
    if cap < 2 {
        return Err(Error::InvalidParameter("doubling_constant needs cap >= 2".into()));
    }
    let half = cap / 2;
    let t = w.table(2 * half)?;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut right = 0usize;
    let mut c_est = 1.0f64;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for n in 1..=half {
        while right < 2 * n {
            right += 1;
            while maxq.back().is_some_and(|&i| t[i] <= t[right]) {
                maxq.pop_back();
            }
            maxq.push_back(right);
            while minq.back().is_some_and(|&i| t[i] >= t[right]) {
                minq.pop_back();
            }
            minq.push_back(right);
        }
        while maxq.front().is_some_and(|&i| i < n) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i < n) {
            minq.pop_front();
        }
        let (kmax, kmin) = (maxq[0], minq[0]);
        let up = t[kmax] / t[n];
        let down = t[n] / t[kmin];
        let (ratio, k) = if up >= down { (up, kmax) } else { (down, kmin) };
        c_est = c_est.max(ratio);
        if ratio > threshold {
            violation_count += 1;
            if violations.len() < 64 {
                violations.push((n, k));
            }
        }
    }
    Ok(DoublingReport {
        c_est,
        range_checked: cap,
        threshold,
        violations,
        violation_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MReport {
    pub m_est: u32,
    pub range_checked: usize,
    /// `(M, n)`: first `n` at which `(1+n)^-M lambda_n` increases.
    pub rejected: Vec<(u32, usize)>,
}

pub const MAX_M: u32 = 64;

/// Smallest integer `M >= 1` with `(1+n)^-M lambda_n` non-increasing on `[1, cap]`.
pub fn estimate_m(w: &WeightSequence, cap: usize) -> Result<MReport> {
    if cap < 2 {
        return Err(Error::InvalidParameter("estimate_M needs cap >= 2".into()));
    }
    const TOL: f64 = 1e-12;
    let t = w.table(cap)?;
    // M works at n iff M >= m_n := log(lambda_{n+1}/lambda_n) / log((n+2)/(n+1)).
    let mut level = 1u32;
    let mut rejected = Vec::new();
    for n in 1..cap {
        let m_n = (t[n + 1] / t[n]).ln() / ((n as f64 + 2.0) / (n as f64 + 1.0)).ln();
        if m_n > level as f64 + TOL {
            let needed = (m_n - TOL).ceil();
            if needed > MAX_M as f64 {
                return Err(Error::SuperPolynomialGrowth { max_m: MAX_M, cap });
            }
            let needed = needed as u32;
            for m in level..needed {
                rejected.push((m, n));
            }
            level = needed;
        }
    }
    Ok(MReport {
        m_est: level,
        range_checked: cap,
        rejected,
    })
}

/// Empirical constants for the two summation estimates
/// `sum_{j<=n} j^(M-1)/lambda_j <= K_b n^M/lambda_n` and
/// `sum_{j>n} 1/(lambda_j j^(M+1)) <= K_c/(n^M lambda_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaDoubleReport {
    pub m: u32,
    pub cap: usize,
    pub tail_upper: usize,
    pub k_b: f64,
    pub k_c: f64,
    /// Same constants restricted to `n <= cap/2`, for the drift check.
    pub k_b_half: f64,
    pub k_c_half: f64,
    /// Integral-test bound on the omitted tail beyond `tail_upper`
    /// (valid when lambda is non-decreasing past it).
    pub truncation_bound: f64,
    pub paper_constant_b: f64,
    pub counterexamples_b: Vec<usize>,
    pub stable: bool,
    pub passed: bool,
}

const DRIFT_TOL: f64 = 0.05;

pub fn verify_lemma_double(w: &WeightSequence, m: u32, cap: usize) -> Result<LemmaDoubleReport> {
    let m_est = estimate_m(w, cap)?.m_est;
    if m <= m_est {
        return Err(Error::InvalidParameter(format!(
            "verify_lemma_double needs M > M_est = {m_est} (got {m})"
        )));
    }
    let upper = 8 * cap;
    let t = w.table(upper)?;
    let mf = m as f64;

    let mut k_b = 0.0f64;
    let mut k_b_half = 0.0f64;
    let paper_constant_b = 10.0 * mf;
    let mut counterexamples_b = Vec::new();
    let mut acc = CompensatedSum::new();
    for n in 1..=cap {
        let nf = n as f64;
        acc.add(nf.powf(mf - 1.0) / t[n]);
        let ratio = acc.value() / (nf.powf(mf) / t[n]);
        k_b = k_b.max(ratio);
        if n <= cap / 2 {
            k_b_half = k_b;
        }
        if ratio > paper_constant_b && counterexamples_b.len() < 64 {
            counterexamples_b.push(n);
        }
    }

    // suffix[n] = sum_{n<j<=upper}, accumulated from the top.
    let mut suffix = vec![0.0; cap + 1];
    let mut acc = CompensatedSum::new();
    for j in (1..=upper).rev() {
        if j <= cap {
            suffix[j] = acc.value();
        }
        acc.add(1.0 / (t[j] * (j as f64).powf(mf + 1.0)));
    }
    let mut k_c = 0.0f64;
    let mut k_c_half = 0.0f64;
    for n in 1..=cap {
        let ratio = suffix[n] * (n as f64).powf(mf) * t[n];
        k_c = k_c.max(ratio);
        if n <= cap / 2 {
            k_c_half = k_c;
        }
    }
    let truncation_bound = 1.0 / (t[upper] * mf * (upper as f64).powf(mf));

    let finite = k_b.is_finite() && k_c.is_finite();
    let stable = k_b <= (1.0 + DRIFT_TOL) * k_b_half && k_c <= (1.0 + DRIFT_TOL) * k_c_half;
    Ok(LemmaDoubleReport {
        m,
        cap,
        tail_upper: upper,
        k_b,
        k_c,
        k_b_half,
        k_c_half,
        truncation_bound,
        paper_constant_b,
        counterexamples_b,
        stable,
        passed: finite && stable,
    })
}

/// `sum_{n<j<=upper} 1/(lambda_j j^(M+1))`; vacuous when `n >= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub sum: f64,
    pub vacuous: bool,
}

pub fn lemma_c_tail(w: &WeightSequence, m: u32, n: usize, upper: usize) -> Result<TailCheck> {
    if n >= upper {
        return Ok(TailCheck { sum: 0.0, vacuous: true });
    }
    let t = w.table(upper)?;
    let s: CompensatedSum = (n + 1..=upper)
        .map(|j| 1.0 / (t[j] * (j as f64).powi(m as i32 + 1)))
        .collect();
    Ok(TailCheck {
        sum: s.value(),
        vacuous: false,
    })
}

/// Combined output of `weights check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub weight: String,
    pub doubling: DoublingReport,
    pub m: MReport,
    pub lemma: Option<LemmaDoubleReport>,
    pub divergence: DivergenceWitness,
}

pub fn regularity_report(
    w: &WeightSequence,
    cap: usize,
    target: f64,
    doubling_threshold: f64,
) -> Result<RegularityReport> {
    let doubling = doubling_constant(w, cap, doubling_threshold)?;
    let m = estimate_m(w, cap)?;
    let lemma = Some(verify_lemma_double(w, m.m_est + 1, cap)?);
    let divergence = check_divergence(w, target, cap)?;
    Ok(RegularityReport {
        weight: w.name().to_string(),
        doubling,
        m,
        lemma,
        divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_weight_values() {
        assert_eq!(power_weight(0.0).value(17).unwrap(), 1.0);
        assert_eq!(power_weight(1.0).value(3).unwrap(), 4.0);
        assert_eq!(power_weight(0.5).value(8).unwrap(), 3.0);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let w = WeightSequence::from_fn("bad", |n| if n == 5 { 0.0 } else { 1.0 });
        assert!(matches!(w.value(7), Err(Error::InvalidWeight { index: 5, .. })));
        let t = WeightSequence::from_table("t", vec![1.0, 2.0]);
        assert_eq!(t.value(1).unwrap(), 2.0);
        assert!(matches!(t.value(2), Err(Error::WeightOutOfRange { .. })));
    }

    #[test]
    fn constant_weight_divergence() {
        let d = check_divergence(&constant_weight(1.0), 5.0, 100).unwrap();
        assert_eq!(d.n_hit, Some(5));
    }

    #[test]
    fn doubling_of_exponential_records_witnesses() {
        let w = WeightSequence::from_fn("2^n", |n| 2f64.powi(n as i32));
        let r = doubling_constant(&w, 40, 16.0).unwrap();
        assert_eq!(r.c_est, 2f64.powi(20));
        assert!(!r.violations.is_empty());
        let (n, k) = r.violations[0];
        assert!(n <= k && k <= 2 * n);
        assert!(2f64.powi((k - n) as i32) > 16.0);
    }

    #[test]
    fn estimate_m_of_cubic_growth() {
        let w = WeightSequence::from_fn("(1+n)^3", |n| (1.0 + n as f64).powi(3));
        let r = estimate_m(&w, 1000).unwrap();
        assert_eq!(r.m_est, 3);
        assert_eq!(r.rejected.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn exponential_growth_exceeds_search() {
        let w = WeightSequence::from_fn("e^n", |n| (n as f64).exp());
        assert!(matches!(estimate_m(&w, 500), Err(Error::SuperPolynomialGrowth { .. })));
    }

    #[test]
    fn lemma_double_constant_weight() {
        let r = verify_lemma_double(&constant_weight(1.0), 2, 4).unwrap();
        // n = 4: (1+2+3+4)/16
        assert!(r.k_b >= 10.0 / 16.0);
        assert!(verify_lemma_double(&constant_weight(1.0), 1, 100).is_err());
        assert!(lemma_c_tail(&constant_weight(1.0), 2, 32, 32).unwrap().vacuous);
    }
}
