//! Lattice partitions of unity built from a single hat-Gauss window, their
//! defining conditions, and the point-set and decay lemmas used with them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{fl1_norm, Grid, SampledField, Shape};
use crate::gevrey::GevreySequence;
use crate::numeric::pairwise_sum;
use crate::weights::Weight;

/// Tolerance of the partition-of-unity condition on the core region.
pub const PARTITION_TOL: f64 = 1e-10;
/// Half-width of `U` in condition (3), in units of the lattice step.
pub const U_FRACTION: f64 = 0.6;
/// Boundary band, in lattice steps, excluded from sups over `μ`.
pub const EDGE_BAND: f64 = 6.0;
/// Maximum derivative order for condition (1).
pub const MAX_ORDER: usize = 16;

/// Finite set of distinct points in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<PointSet> {
        if dim == 0 {
            return Err(Error::param("dim", "must be >= 1"));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::param("points", "inconsistent dimension"));
            }
            coords.extend_from_slice(p);
        }
        let set = PointSet { dim, coords };
        for i in 0..set.len() {
            for j in 0..i {
                if set.point(i) == set.point(j) {
                    return Err(Error::param("points", "points must be pairwise distinct"));
                }
            }
        }
        Ok(set)
    }

    /// `aℤ ∩ [−L, L]`.
    pub fn lattice_1d(a: f64, half_width: f64) -> Result<PointSet> {
        PointSet::lattice(1, a, half_width)
    }

    /// `aℤⁿ ∩ [−L, L]ⁿ`.
    pub fn lattice(dim: usize, a: f64, half_width: f64) -> Result<PointSet> {
        if !(a > 0.0) {
            return Err(Error::param("a", "lattice step must be > 0"));
        }
        if !(half_width >= 0.0) {
            return Err(Error::param("L_pts", "must be >= 0"));
        }
        let k = (half_width / a + 1e-9).floor() as i64;
        let axis: Vec<f64> = (-k..=k).map(|i| i as f64 * a).collect();
        let mut coords = Vec::new();
        let total = axis.len().pow(dim as u32);
        for idx in 0..total {
            let mut r = idx;
            for _ in 0..dim {
                coords.push(axis[r % axis.len()]);
                r /= axis.len();
            }
        }
        Ok(PointSet { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Coordinates of a one-dimensional set, sorted.
    pub fn sorted_1d(&self) -> Option<Vec<f64>> {
        if self.dim != 1 {
            return None;
        }
        let mut c = self.coords.clone();
        c.sort_by(f64::total_cmp);
        Some(c)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }
}

/// Worst deviation of `Σ_λ ψ_λ` from 1 on the grid points of `|x| <= core`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionReport {
    pub core: f64,
    pub deviation: f64,
    pub at: f64,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.core >= 0.0 && self.deviation <= PARTITION_TOL
    }
}

/// Condition (3) on a core interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverReport {
    pub u_halfwidth: f64,
    pub covered: bool,
    /// Largest distance from a core point to the nearest `y_λ`.
    pub max_gap: f64,
    /// The farthest core point, when it is not covered.
    pub witness: Option<f64>,
}

/// Condition (1) truncated at a derivative order and sampled on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cond1Report {
    pub h: f64,
    pub order: usize,
    pub value: f64,
    pub argmax_order: usize,
    pub argmax_offset: f64,
    /// Largest difference between per-`λ` values after recentering.
    pub lambda_spread: f64,
}

/// Cached results of the four conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificates {
    /// `σ = 1`, `h = 1/4`, order 8.
    pub condition1: Cond1Report,
    /// `C_K` for the unit cube.
    pub condition2: usize,
    pub condition3: CoverReport,
    pub condition4: PartitionReport,
}

/// Lattice UCPU `{T_{ak} ψ}` with `ψ = hat_a ⋆ g_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ucpu {
    pts: PointSet,
    a: f64,
    s: f64,
    l_pts: f64,
    window: SampledField,
    pieces: Vec<SampledField>,
    certs: Certificates,
}

pub fn build_lattice_ucpu(a: f64, s: f64, l_pts: f64) -> Result<Ucpu> {
    build_lattice_ucpu_on(Grid::default(), a, s, l_pts)
}

pub fn build_lattice_ucpu_on(grid: Grid, a: f64, s: f64, l_pts: f64) -> Result<Ucpu> {
    if !(a > 0.0) {
        return Err(Error::param("a", "must be > 0"));
    }
    let ratio = l_pts / a;
    if !(l_pts >= 0.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::param("L_pts", "must be a nonnegative multiple of a"));
    }
    let pts = PointSet::lattice_1d(a, l_pts)?;
    let window = SampledField::hat_gauss(grid, a, s)?;
    let pieces = (0..pts.len())
        .map(|i| window.translate(pts.point(i)[0]))
        .collect::<Result<Vec<_>>>()?;
    let mut u = Ucpu {
        pts,
        a,
        s,
        l_pts,
        window,
        pieces,
        certs: Certificates {
            condition1: Cond1Report {
                h: 0.0,
                order: 0,
                value: f64::NAN,
                argmax_order: 0,
                argmax_offset: 0.0,
                lambda_spread: 0.0,
            },
            condition2: 0,
            condition3: CoverReport {
                u_halfwidth: 0.0,
                covered: false,
                max_gap: f64::NAN,
                witness: None,
            },
            condition4: PartitionReport {
                core: 0.0,
                deviation: f64::NAN,
                at: 0.0,
            },
        },
    };
    let core = u.default_core();
    u.certs = Certificates {
        condition1: check_condition1(&u, &GevreySequence::default(), 0.25, 8)?,
        condition2: check_condition2(&u.pts, 0.5),
        condition3: check_condition3(&u.pts, U_FRACTION * a, (-core.max(0.0), core.max(0.0)), grid.step())?,
        condition4: u.partition_deviation(core),
    };
    Ok(u)
}

impl Ucpu {
    pub fn points(&self) -> &PointSet {
        &self.pts
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn l_pts(&self) -> f64 {
        self.l_pts
    }

    pub fn grid(&self) -> &Grid {
        self.window.grid()
    }

    /// `ψ` itself.
    pub fn window(&self) -> &SampledField {
        &self.window
    }

    /// `ψ_λ = T_{y_λ}ψ`, in point order.
    pub fn pieces(&self) -> &[SampledField] {
        &self.pieces
    }

    /// `y_λ` of a one-dimensional lattice.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.pts.len()).map(|i| self.pts.point(i)[0]).collect()
    }

    /// Pointwise `√ψ`, so that `√ψ·√ψ` is the partition window.
    pub fn sqrt_window(&self) -> SampledField {
        SampledField::sqrt_hat_gauss(*self.grid(), self.a, self.s).expect("validated at build")
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certs
    }

    /// `L_pts − 6·max(a, s)`: where truncation cannot spoil the partition.
    pub fn default_core(&self) -> f64 {
        self.l_pts - EDGE_BAND * self.a.max(self.s)
    }

    /// Whether condition (4) holds on the default core region.
    pub fn is_certified(&self) -> bool {
        self.certs.condition4.ok()
    }

    /// `sup_{|x|<=core} |Σ_λ ψ_λ(x) − 1|` over grid points.
    pub fn partition_deviation(&self, core: f64) -> PartitionReport {
        let grid = self.grid();
        let shape = Shape::HatGauss {
            a: self.a,
            s: self.s,
        };
        let centers = self.centers();
        let mut worst = PartitionReport {
            core,
            deviation: 0.0,
            at: 0.0,
        };
        for j in 0..grid.len() {
            let x = grid.point(j);
            if x.abs() > core {
                continue;
            }
            let terms: Vec<f64> = centers.iter().map(|y| shape.eval(x - y)).collect();
            let dev = (pairwise_sum(&terms) - 1.0).abs();
            if dev > worst.deviation {
                worst.deviation = dev;
                worst.at = x;
            }
        }
        worst
    }
}

/// `sup_{λ, α<=K, x} h^α |ψ_λ^{(α)}(x)| e^{A(h|x−y_λ|)} / M_α` on the grid.
pub fn check_condition1(u: &Ucpu, seq: &GevreySequence, h: f64, order: usize) -> Result<Cond1Report> {
    if order > MAX_ORDER {
        return Err(Error::param("K", format!("derivative order must be <= {MAX_ORDER}")));
    }
    if !(h >= 0.0) {
        return Err(Error::param("h", "must be >= 0"));
    }
    let grid = u.grid();
    let shape = Shape::HatGauss { a: u.a, s: u.s };
    let ln_scale: Vec<f64> = (0..=order)
        .map(|k| {
            if k == 0 {
                -seq.log_value(0)
            } else {
                k as f64 * h.ln() - seq.log_value(k as u64)
            }
        })
        .collect();
    let per_lambda: Vec<(f64, usize, f64)> = u
        .centers()
        .par_iter()
        .map(|&y| {
            let mut best = (0.0, 0, 0.0);
            for j in 0..grid.len() {
                let off = grid.point(j) - y;
                let d = shape.derivs(off, order).expect("hat-Gauss derivatives");
                let growth = seq.assoc_value(h * off.abs());
                for (k, dk) in d.iter().enumerate() {
                    if *dk == 0.0 || (h == 0.0 && k > 0) {
                        continue;
                    }
                    let v = (dk.abs().ln() + ln_scale[k] + growth).exp();
                    if v > best.0 {
                        best = (v, k, off);
                    }
                }
            }
            best
        })
        .collect();
    let (value, argmax_order, argmax_offset) = per_lambda
        .iter()
        .copied()
        .fold((0.0, 0, 0.0), |b, c| if c.0 > b.0 { c } else { b });
    let lo = per_lambda.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    Ok(Cond1Report {
        h,
        order,
        value,
        argmax_order,
        argmax_offset,
        lambda_spread: value - lo,
    })
}

/// `sup_x #{λ : x ∈ y_λ + K}` for the cube `K = [−k, k]ⁿ`.
///
/// The intersection of closed cubes is a box whose upper corner has
/// coordinates of the form `y_{λ,i} + k`, so those points suffice.
pub fn check_condition2(pts: &PointSet, k_halfwidth: f64) -> usize {
    let dim = pts.dim();
    let tol = 1e-12 * (1.0 + k_halfwidth);
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut c: Vec<f64> = (0..pts.len()).map(|l| pts.point(l)[i] + k_halfwidth).collect();
            c.sort_by(f64::total_cmp);
            c.dedup_by(|a, b| (*a - *b).abs() <= tol);
            c
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut best = 0;
    let mut x = vec![0.0; dim];
    for idx in 0..total {
        let mut r = idx;
        for (i, axis) in axes.iter().enumerate() {
            x[i] = axis[r % axis.len()];
            r /= axis.len();
        }
        let count = (0..pts.len())
            .filter(|&l| {
                pts.point(l)
                    .iter()
                    .zip(&x)
                    .all(|(y, xi)| (xi - y).abs() <= k_halfwidth + tol)
            })
            .count();
        best = best.max(count);
    }
    best
}

/// Condition (3) with the open `U = (−u, u)` on the points `lo + iΔ` of the
/// core interval (one-dimensional sets only).
pub fn check_condition3(
    pts: &PointSet,
    u_halfwidth: f64,
    core: (f64, f64),
    step: f64,
) -> Result<CoverReport> {
    let ys = pts
        .sorted_1d()
        .ok_or_else(|| Error::param("dim", "covering check needs a one-dimensional set"))?;
    if ys.is_empty() {
        return Err(Error::param("points", "empty point set"));
    }
    let (lo, hi) = core;
    let n = ((hi - lo) / step + 1e-9).floor().max(0.0) as usize;
    let mut max_gap: f64 = -1.0;
    let mut at = lo;
    for i in 0..=n {
        let x = lo + i as f64 * step;
        let pos = ys.partition_point(|y| *y < x);
        let mut gap = f64::INFINITY;
        if pos < ys.len() {
            gap = gap.min(ys[pos] - x);
        }
        if pos > 0 {
            gap = gap.min(x - ys[pos - 1]);
        }
        // Ties: prefer the smaller |x|, then the larger x.
        let better = gap > max_gap
            || (gap == max_gap && (x.abs() < at.abs() || (x.abs() == at.abs() && x > at)));
        if better {
            max_gap = gap;
            at = x;
        }
    }
    let covered = max_gap < u_halfwidth;
    Ok(CoverReport {
        u_halfwidth,
        covered,
        max_gap,
        witness: (!covered).then_some(at),
    })
}

/// `sup_μ Σ_λ (1 + |y_λ − y_μ|)^{−n−ε}` by a direct double loop.
pub fn lemma33_sum(pts: &PointSet, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be > 0"));
    }
    let expo = -(pts.dim() as f64) - eps;
    let sums: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|m| {
            let terms: Vec<f64> = (0..pts.len())
                .map(|l| (1.0 + pts.distance(l, m)).powf(expo))
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(sums.into_iter().fold(0.0, f64::max))
}

/// A certified envelope `LHS(d) <= C e^{−A(h|d|)}` over sampled separations.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Largest `h` of the grid that works, if any.
    pub h: Option<f64>,
    /// `max_d LHS(d) e^{A(h|d|)}` for the chosen `h`.
    pub c: f64,
    /// `min_d (1 − LHS(d) e^{A(h|d|)}/C)`; zero at the maximising pair.
    pub slack: f64,
    /// `(separation, LHS)` samples the fit was made on.
    pub samples: Vec<(f64, f64)>,
}

/// An `h` works when the envelope maximum is not attained on the outermost
/// separation shell: otherwise the finite window hides growth.
pub fn fit_decay(samples: &[(f64, f64)], seq: &GevreySequence, h_grid: &[f64]) -> DecayFit {
    let outer = samples.iter().map(|(d, _)| d.abs()).fold(0.0, f64::max);
    let mut hs: Vec<f64> = h_grid.to_vec();
    hs.sort_by(f64::total_cmp);
    let mut chosen: Option<(f64, f64)> = None;
    for &h in &hs {
        let mut c: f64 = 0.0;
        let mut at: f64 = 0.0;
        for &(d, lhs) in samples {
            let v = lhs * seq.assoc_value(h * d.abs()).exp();
            if v > c {
                c = v;
                at = d.abs();
            }
        }
        if c.is_finite() && (at < outer || outer == 0.0) {
            chosen = Some((h, c));
        }
    }
    match chosen {
        Some((h, c)) => {
            let slack = samples
                .iter()
                .map(|&(d, lhs)| {
                    if c == 0.0 {
                        0.0
                    } else {
                        1.0 - lhs * seq.assoc_value(h * d.abs()).exp() / c
                    }
                })
                .fold(f64::INFINITY, f64::min);
            DecayFit {
                h: Some(h),
                c,
                slack,
                samples: samples.to_vec(),
            }
        }
        None => DecayFit {
            h: None,
            c: f64::NAN,
            slack: f64::NAN,
            samples: samples.to_vec(),
        },
    }
}

/// Default `h` grid `{1/16, 1/8, 1/4, 1/2, 1}`.
pub fn default_h_grid() -> Vec<f64> {
    vec![1.0 / 16.0, 0.125, 0.25, 0.5, 1.0]
}

/// `sup_{x ∈ y_μ+K} ‖ψ_λ T_x χ‖_{FL¹_η}` over all pairs with `|y_λ − y_μ| <=
/// max_sep` and `μ` outside the boundary band, followed by an envelope fit.
/// `x` runs over nine equispaced points of `y_μ + K`.
pub fn lemma36_decay_fit(
    u: &Ucpu,
    chi: &SampledField,
    eta: &Weight,
    k_halfwidth: f64,
    seq: &GevreySequence,
    h_grid: &[f64],
    max_sep: f64,
) -> Result<DecayFit> {
    if chi.closed_form().is_none() {
        return Err(Error::ClosedFormRequired("lemma36 window".into()));
    }
    let centers = u.centers();
    let inner = u.l_pts - EDGE_BAND * u.a;
    let pairs: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|m| (0..centers.len()).map(move |l| (l, m)))
        .filter(|&(l, m)| {
            centers[m].abs() <= inner.max(0.0) + 1e-9
                && (centers[l] - centers[m]).abs() <= max_sep + 1e-9
        })
        .collect();
    let subs: Vec<f64> = (-4..=4).map(|j| j as f64 * k_halfwidth / 4.0).collect();
    let samples: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(l, m)| {
            let psi = &u.pieces[l];
            let mut sup: f64 = 0.0;
            for dx in &subs {
                let prod = psi.mul(&chi.translate(centers[m] + dx)?)?;
                sup = sup.max(fl1_norm(&prod, eta));
            }
            Ok((centers[m] - centers[l], sup))
        })
        .collect::<Result<_>>()?;
    Ok(fit_decay(&samples, seq, h_grid))
}

/// `‖ψ_λψ_μ‖_{FL¹_η}` as a function of `d = |y_λ − y_μ|`, for lattice
/// separations up to `max_sep`, followed by an envelope fit.
pub fn lemma37_product_decay(
    u: &Ucpu,
    eta: &Weight,
    seq: &GevreySequence,
    h_grid: &[f64],
    max_sep: f64,
) -> Result<DecayFit> {
    let kmax = (max_sep / u.a + 1e-9).floor() as i64;
    let samples: Vec<(f64, f64)> = (0..=kmax)
        .into_par_iter()
        .map(|k| {
            let d = k as f64 * u.a;
            let prod = u.window.mul(&u.window.translate(d)?)?;
            Ok((d, fl1_norm(&prod, eta)))
        })
        .collect::<Result<_>>()?;
    Ok(fit_decay(&samples, seq, h_grid))
}

/// `sup_μ Σ_{|y_λ−y_μ| > R} e^{−A(h|y_λ−y_μ|)}` by a direct double loop.
pub fn tail_sum(pts: &PointSet, seq: &GevreySequence, h: f64, r: f64) -> f64 {
    let sums: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|m| {
            let terms: Vec<f64> = (0..pts.len())
                .filter_map(|l| {
                    let d = pts.distance(l, m);
                    (d > r).then(|| (-seq.assoc_value(h * d)).exp())
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    sums.into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRadius {
    /// Smallest candidate distance (or 0) whose tail is `<= ε` for every `μ`.
    pub r_exact: f64,
    pub tail_at_exact: f64,
    /// Radius from the integral comparison, on a 1/32 grid (1D sets only).
    pub r_constructive: Option<f64>,
    /// Covering half-width `k` and overlap count `C_K` used by the bound.
    pub k: Option<f64>,
    pub c_k: Option<usize>,
}

pub fn lemma39_tail_radius(pts: &PointSet, seq: &GevreySequence, h: f64, eps: f64) -> Result<TailRadius> {
    if !(h > 0.0) {
        return Err(Error::param("h", "must be > 0"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be > 0"));
    }
    let n = pts.len();
    let mut cands: Vec<f64> = vec![0.0];
    for m in 0..n {
        for l in 0..n {
            cands.push(pts.distance(l, m));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    // The tail is nonincreasing in R; bisect over the sorted candidates.
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let tail = |r: f64| tail_sum(pts, seq, h, r);
    if tail(cands[0]) <= eps {
        hi = 0;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if tail(cands[mid]) <= eps {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let r_exact = cands[hi];
    let (r_constructive, k, c_k) = match constructive_radius(pts, seq, h, eps) {
        Some((r, k, c)) => (Some(r), Some(k), Some(c)),
        None => (None, None, None),
    };
    Ok(TailRadius {
        r_exact,
        tail_at_exact: tail(r_exact),
        r_constructive,
        k,
        c_k,
    })
}

/// The integral comparison: with `K = [−k, k]` covering, `C = e^{A(hk)}`, and
/// `C_K` from condition (2), any `R >= k+1` with
/// `∫_{|x| >= R−k} e^{−A(h|x|/2)} dx <= ε|K|/(2 C C_K)` is admissible.
fn constructive_radius(pts: &PointSet, seq: &GevreySequence, h: f64, eps: f64) -> Option<(f64, f64, usize)> {
    let ys = pts.sorted_1d()?;
    if ys.len() < 2 {
        return None;
    }
    let cover = ys.windows(2).map(|w| (w[1] - w[0]) / 2.0).fold(0.0, f64::max);
    let k = cover.ceil().max(1.0);
    let c = seq.assoc_value(h * k).exp();
    let c_k = check_condition2(pts, k);
    let target = eps * 2.0 * k / (2.0 * c * c_k as f64);
    // Simpson panels of width 1/32 on [0, T], tail sums accumulated from the right.
    let step = 1.0 / 64.0;
    let f = |x: f64| (-seq.assoc_value(h * x / 2.0)).exp();
    let mut panels = Vec::new();
    let mut x = 0.0;
    loop {
        let v = (f(x) + 4.0 * f(x + step) + f(x + 2.0 * step)) * step / 3.0;
        panels.push(v);
        x += 2.0 * step;
        if f(x) < 1e-12 * target * h.min(1.0) && x > 1.0 {
            break;
        }
        if panels.len() > 1 << 22 {
            return None;
        }
    }
    let mut suffix = vec![0.0; panels.len() + 1];
    for i in (0..panels.len()).rev() {
        suffix[i] = suffix[i + 1] + panels[i];
    }
    // R − k = 1 + j/32.
    let start = 32usize;
    let j = (start..=panels.len())
        .find(|&i| 2.0 * suffix[i] <= target)
        .unwrap_or(panels.len());
    Some((k + j as f64 / 32.0, k, c_k))
}
