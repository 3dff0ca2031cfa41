//! Gevrey sequences `M_p = (p!)^σ` and their associated functions.
//!
//! Everything is held in the log domain: `ln M_p` is read from a table of
//! `ln p!` built once with compensated summation, so `(p!)^σ` is never formed
//! as a raw float.

use std::ops::RangeInclusive;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Number of exact `ln p!` entries kept in memory.
const LN_FACT_TABLE: usize = 1 << 17;

/// Margin used when a sequence inequality has to be certified strictly.
const STRICT_MARGIN: f64 = 1e-12;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(LN_FACT_TABLE);
        // Neumaier summation of ln k.
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        out.push(0.0);
        for k in 1..LN_FACT_TABLE {
            let term = (k as f64).ln();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            out.push(sum + comp);
        }
        out
    })
}

/// `ln p!`, exact to a few ulp.
pub fn ln_factorial(p: u64) -> f64 {
    match ln_fact_table().get(p as usize) {
        Some(v) => *v,
        None => libm::lgamma(p as f64 + 1.0),
    }
}

/// A log-convex weight sequence together with its `(M.2)` and `(M.6)`
/// constants.
///
/// The same sequence plays the role of both `{M_p}` and `{A_p}`; the two
/// associated functions `M(·)` and `A(·)` therefore coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct GevreySequence {
    sigma: f64,
    c0: f64,
    h: f64,
    l0: f64,
    c0_m6: f64,
    pmax: u64,
    /// User-supplied `ln M_p` values; `None` for the Gevrey family.
    table: Option<Arc<[f64]>>,
}

impl Default for GevreySequence {
    fn default() -> Self {
        GevreySequence::new(1.0).expect("sigma = 1 is valid")
    }
}

/// Value of the associated function together with the smallest maximising
/// index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssocFnValue {
    pub value: f64,
    pub argmax_p: u64,
}

/// Outcome of the `(M.2)*` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M2StarReport {
    /// First index from which `2 m_p <= m_{pN}` holds on the rest of the range.
    pub p0: Option<u64>,
    pub n: u64,
    pub ok: bool,
}

/// Worst slacks of the two associated-function inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssocInequalityReport {
    /// `ln 2 + M(2ρ) + M(2λ) − M(ρ+λ)`, minimised over the samples.
    pub sum_slack: f64,
    pub sum_witness: (f64, f64),
    /// `ln c₀ + M(Hρ) − 2M(ρ)`, minimised over the samples.
    pub square_slack: f64,
    pub square_witness: f64,
}

impl AssocInequalityReport {
    pub fn min_slack(&self) -> f64 {
        self.sum_slack.min(self.square_slack)
    }
}

/// Minimum slacks of `(M.1)`, `(M.2)` and `(M.6)` over a finite index range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceConditionReport {
    pub m1_slack: f64,
    pub m2_slack: f64,
    pub m6_slack: f64,
}

impl GevreySequence {
    /// The Gevrey family `(p!)^σ` with `c₀ = 1`, `H = 2^σ` and `(M.6)`
    /// constants `(1, 1)`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 1.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", "Gevrey exponent must be >= 1"));
        }
        Ok(GevreySequence {
            sigma,
            c0: 1.0,
            h: 2f64.powf(sigma),
            l0: 1.0,
            c0_m6: 1.0,
            pmax: 100_000,
            table: None,
        })
    }

    /// A general sequence given by `ln M_p` for `p = 0..table.len()`.
    /// Indices beyond the table are treated as `M_p = ∞`.
    pub fn from_log_table(table: Vec<f64>, c0: f64, h: f64, l0: f64, c0_m6: f64) -> Result<Self> {
        if table.len() < 2 || table[0] != 0.0 || table[1] != 0.0 {
            return Err(Error::param("table", "need ln M_0 = ln M_1 = 0"));
        }
        if c0 < 1.0 || h < 1.0 || l0 < 1.0 || c0_m6 < 1.0 {
            return Err(Error::param("table", "sequence constants must be >= 1"));
        }
        let pmax = table.len() as u64;
        Ok(GevreySequence {
            sigma: f64::NAN,
            c0,
            h,
            l0,
            c0_m6,
            pmax,
            table: Some(table.into()),
        })
    }

    pub fn with_pmax(mut self, pmax: u64) -> Self {
        self.pmax = pmax;
        self
    }

    /// Gevrey exponent; NaN for table-backed sequences.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn c0_m6(&self) -> f64 {
        self.c0_m6
    }

    pub fn pmax(&self) -> u64 {
        self.pmax
    }

    pub fn is_gevrey(&self) -> bool {
        self.table.is_none()
    }

    /// `ln M_p`.
    pub fn log_value(&self, p: u64) -> f64 {
        match &self.table {
            None => {
                if p < 2 {
                    0.0
                } else {
                    self.sigma * ln_factorial(p)
                }
            }
            Some(t) => t.get(p as usize).copied().unwrap_or(f64::INFINITY),
        }
    }

    /// `ln m_p = ln M_p − ln M_{p−1}` for `p >= 1`.
    pub fn log_ratio(&self, p: u64) -> f64 {
        debug_assert!(p >= 1);
        match &self.table {
            None => self.sigma * (p as f64).ln(),
            Some(_) => self.log_value(p) - self.log_value(p - 1),
        }
    }

    /// `M(ρ) = sup_p ln(ρ^p / M_p)`.
    ///
    /// The map `p ↦ p ln ρ − ln M_p` is concave, so the scan stops at the
    /// first step that does not increase it; ties resolve to the smaller `p`.
    pub fn assoc_fn(&self, rho: f64) -> Result<AssocFnValue> {
        self.scan(rho, Some(self.pmax))
    }

    /// Associated function without the scan cap. Used where the argument is
    /// known to be moderate (weights on bounded grids).
    pub fn assoc_value(&self, rho: f64) -> f64 {
        self.scan(rho, None).map(|v| v.value).unwrap_or(f64::INFINITY)
    }

    fn scan(&self, rho: f64, cap: Option<u64>) -> Result<AssocFnValue> {
        if !(rho > 0.0) {
            return Ok(AssocFnValue { value: 0.0, argmax_p: 0 });
        }
        let ln_rho = rho.ln();
        let mut p = 0u64;
        loop {
            let step = ln_rho - self.log_ratio(p + 1);
            if !(step > 0.0) {
                break;
            }
            p += 1;
            if let Some(cap) = cap {
                if p >= cap {
                    return Err(Error::ScanCapExceeded { rho, pmax: cap });
                }
            }
        }
        let value = if p == 0 {
            0.0
        } else {
            p as f64 * ln_rho - self.log_value(p)
        };
        Ok(AssocFnValue { value, argmax_p: p })
    }

    /// Searches the smallest `N` in `2..=64` with `2 m_p <= m_{pN}` on the
    /// whole range. The inequality is certified strictly (by a margin of
    /// `1e-12` in the log domain) since an equality cannot be decided in
    /// floating point. `forced_n` restricts the search to one value.
    pub fn check_m2star(&self, range: RangeInclusive<u64>, forced_n: Option<u64>) -> M2StarReport {
        let (lo, hi) = (*range.start().max(&1), *range.end());
        let holds = |p: u64, n: u64| -> bool {
            let lhs = std::f64::consts::LN_2 + self.log_ratio(p);
            self.log_ratio(p * n) - lhs > STRICT_MARGIN
        };
        let tail_start = |n: u64| -> Option<u64> {
            let mut start = None;
            for p in (lo..=hi).rev() {
                if holds(p, n) {
                    start = Some(p);
                } else {
                    break;
                }
            }
            start
        };
        let candidates: Vec<u64> = match forced_n {
            Some(n) => vec![n],
            None => (2..=64).collect(),
        };
        for &n in &candidates {
            if n >= 1 && (lo..=hi).all(|p| holds(p, n)) {
                return M2StarReport { p0: Some(lo), n, ok: true };
            }
        }
        let n = *candidates.last().expect("non-empty candidate list");
        M2StarReport { p0: tail_start(n), n, ok: false }
    }

    /// Evaluates `e^{M(ρ+λ)} <= 2e^{M(2ρ)}e^{M(2λ)}` and
    /// `e^{2M(ρ)} <= c₀e^{M(Hρ)}` in the log domain at every sample.
    pub fn check_assoc_inequalities(&self, samples: &[(f64, f64)]) -> Result<AssocInequalityReport> {
        let mut report = AssocInequalityReport {
            sum_slack: f64::INFINITY,
            sum_witness: (f64::NAN, f64::NAN),
            square_slack: f64::INFINITY,
            square_witness: f64::NAN,
        };
        for &(rho, lambda) in samples {
            if rho < 0.0 || lambda < 0.0 {
                return Err(Error::param("samples", "coordinates must be >= 0"));
            }
            let m = |r: f64| self.assoc_fn(r).map(|v| v.value);
            let sum = std::f64::consts::LN_2 + m(2.0 * rho)? + m(2.0 * lambda)? - m(rho + lambda)?;
            if sum < report.sum_slack {
                report.sum_slack = sum;
                report.sum_witness = (rho, lambda);
            }
            for r in [rho, lambda] {
                let sq = self.c0.ln() + m(self.h * r)? - 2.0 * m(r)?;
                if sq < report.square_slack {
                    report.square_slack = sq;
                    report.square_witness = r;
                }
            }
        }
        Ok(report)
    }

    /// Checks `(M.1)`, `(M.2)` and `(M.6)` for indices up to `pmax_check`.
    pub fn check_conditions(&self, pmax_check: u64) -> SequenceConditionReport {
        let top = pmax_check.min(self.pmax.saturating_sub(1));
        let lv = |p: u64| self.log_value(p);
        let mut m1 = f64::INFINITY;
        for p in 1..top {
            m1 = m1.min(lv(p - 1) + lv(p + 1) - 2.0 * lv(p));
        }
        let mut m2 = f64::INFINITY;
        for p in 0..=top / 2 {
            for q in 0..=top / 2 {
                let rhs = self.c0.ln() + (p + q) as f64 * self.h.ln() + lv(p) + lv(q);
                m2 = m2.min(rhs - lv(p + q));
            }
        }
        let mut m6 = f64::INFINITY;
        for p in 0..=top {
            let rhs = self.c0_m6.ln() + p as f64 * self.l0.ln() + lv(p);
            m6 = m6.min(rhs - ln_factorial(p));
        }
        SequenceConditionReport {
            m1_slack: m1,
            m2_slack: m2,
            m6_slack: m6,
        }
    }
}

/// `n` points log-spaced on `[lo, hi]`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(sigma: f64, rho: f64, pmax: u64) -> (f64, u64) {
        // Independent route: ln p! from the gamma function.
        let mut best = (0.0, 0);
        for p in 1..=pmax {
            let v = p as f64 * rho.ln() - sigma * libm::lgamma(p as f64 + 1.0);
            if v > best.0 {
                best = (v, p);
            }
        }
        best
    }

    #[test]
    fn log_values() {
        let s1 = GevreySequence::new(1.0).unwrap();
        let s2 = GevreySequence::new(2.0).unwrap();
        assert_eq!(s1.log_value(0), 0.0);
        assert_eq!(s1.log_value(1), 0.0);
        assert!((s1.log_value(3) - 6f64.ln()).abs() < 1e-15);
        assert!((s2.log_value(3) - 2.0 * 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ln_factorial_matches_lgamma() {
        for p in [2u64, 10, 170, 1000, 50_000, 200_000] {
            let a = ln_factorial(p);
            let b = libm::lgamma(p as f64 + 1.0);
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b, "p = {p}: {a} vs {b}");
        }
    }

    #[test]
    fn assoc_examples() {
        let s1 = GevreySequence::new(1.0).unwrap();
        assert_eq!(s1.assoc_fn(1.0).unwrap(), AssocFnValue { value: 0.0, argmax_p: 0 });
        assert_eq!(s1.assoc_fn(0.0).unwrap(), AssocFnValue { value: 0.0, argmax_p: 0 });
        let e = s1.assoc_fn(std::f64::consts::E).unwrap();
        let (bv, bp) = brute_force(1.0, std::f64::consts::E, 100);
        assert_eq!(e.argmax_p, 2);
        assert_eq!(bp, 2);
        assert!((e.value - bv).abs() < 1e-14);
        assert!((e.value - 1.306853).abs() < 1e-6);

        let s2 = GevreySequence::new(2.0).unwrap();
        let v = s2.assoc_fn(4.0).unwrap();
        assert_eq!(v.argmax_p, 1, "tie between p = 1 and p = 2 resolves low");
        assert!((v.value - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn scan_cap_is_reported() {
        let s = GevreySequence::new(1.0).unwrap().with_pmax(50);
        assert!(matches!(s.assoc_fn(1e3), Err(Error::ScanCapExceeded { .. })));
        assert!(s.assoc_value(1e3).is_finite());
    }

    #[test]
    fn m2star_examples() {
        let s1 = GevreySequence::new(1.0).unwrap();
        let r = s1.check_m2star(1..=1000, None);
        assert!(r.ok);
        assert_eq!(r.n, 3);
        let s2 = GevreySequence::new(2.0).unwrap();
        let r = s2.check_m2star(1..=1000, None);
        assert!(r.ok);
        assert_eq!(r.n, 2);
        let r = s1.check_m2star(1..=1000, Some(1));
        assert!(!r.ok);
        assert_eq!(r.p0, None);
    }

    #[test]
    fn m2star_gevrey_closed_form_choice_succeeds() {
        for sigma in [1.0, 1.5, 2.0, 3.0] {
            let s = GevreySequence::new(sigma).unwrap();
            let n = 2f64.powf(1.0 / sigma).ceil() as u64 + 1;
            assert!(s.check_m2star(1..=500, Some(n)).ok, "sigma = {sigma}");
        }
    }

    #[test]
    fn assoc_inequalities_at_origin_and_grid() {
        let s1 = GevreySequence::new(1.0).unwrap();
        let r = s1.check_assoc_inequalities(&[(0.0, 0.0)]).unwrap();
        assert!((r.sum_slack - std::f64::consts::LN_2).abs() < 1e-15);

        let grid = log_spaced(1e-2, 1e3, 40);
        let samples: Vec<_> = grid.iter().flat_map(|&a| grid.iter().map(move |&b| (a, b))).collect();
        let r = s1.check_assoc_inequalities(&samples).unwrap();
        assert!(r.min_slack() >= -1e-12, "{r:?}");

        let s2 = GevreySequence::new(2.0).unwrap();
        assert_eq!(s2.h(), 4.0);
        let m = |r: f64| s2.assoc_fn(r).unwrap().value;
        assert!(2.0 * m(10.0) <= m(40.0) + s2.c0().ln() + 1e-12);
    }

    #[test]
    fn monotone_and_concave() {
        let s = GevreySequence::new(1.5).unwrap();
        let rhos = log_spaced(0.1, 500.0, 200);
        let vals: Vec<f64> = rhos.iter().map(|&r| s.assoc_fn(r).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        let rho = 37.0f64;
        let term = |p: u64| p as f64 * rho.ln() - s.log_value(p);
        for p in 1..200 {
            assert!(term(p - 1) + term(p + 1) - 2.0 * term(p) <= 1e-9);
        }
    }

    #[test]
    fn sigma_one_scaling_band() {
        let s = GevreySequence::new(1.0).unwrap();
        for rho in log_spaced(10.0, 1e3, 30) {
            let m = s.assoc_fn(rho).unwrap().value;
            assert!((0.3..=1.1).contains(&(m / rho)));
            let stirling = rho - 0.5 * (2.0 * std::f64::consts::PI * rho).ln();
            assert!((m - stirling).abs() < 1.0, "rho = {rho}: {m} vs {stirling}");
        }
    }

    #[test]
    fn conditions_hold_for_gevrey_and_table() {
        let s = GevreySequence::new(1.0).unwrap();
        let r = s.check_conditions(60);
        assert!(r.m1_slack >= -1e-12 && r.m2_slack >= -1e-12 && r.m6_slack >= -1e-12, "{r:?}");

        let table: Vec<f64> = (0..80).map(|p| 2.0 * ln_factorial(p)).collect();
        let t = GevreySequence::from_log_table(table, 1.0, 4.0, 1.0, 1.0).unwrap();
        let g = GevreySequence::new(2.0).unwrap();
        for rho in [0.5, 3.0, 40.0, 901.0] {
            let a = t.assoc_fn(rho).unwrap();
            let b = g.assoc_fn(rho).unwrap();
            assert_eq!(a.argmax_p, b.argmax_p);
            assert!((a.value - b.value).abs() < 1e-12 * b.value.max(1.0));
        }
        assert!(t.check_conditions(70).m1_slack >= -1e-12);
        assert!(GevreySequence::from_log_table(vec![0.0], 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GevreySequence::new(0.5).is_err());
    }
}
