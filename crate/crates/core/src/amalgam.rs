//! Continuous and discrete amalgam norms, their comparison, and the
//! analysis/synthesis pair of a lattice partition.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{GaussianForm, Grid, SampledField};
use crate::local_norms::{LocalSpace, PreparedLocal};
use crate::numeric::{gregory_end_weights, lp_sum, max_or_zero, pairwise_sum};
use crate::ucpu::{Ucpu, EDGE_BAND};
use crate::weights::Weight;
use crate::Complex64;

/// Relative size of the outer profile at the x-grid edge that raises the flag.
pub const OUTER_TAIL_REL: f64 = 1e-8;
/// Distance kept between the outer x-grid and the box edge.
pub const DEFAULT_MARGIN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Global {
    /// `L^p_η`, `p ∈ [1, ∞]`.
    Lp(f64),
    /// `C_{η,0}`.
    C0,
}

impl Global {
    pub fn lp(p: f64) -> Result<Global> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::param("p", "p must be ≥ 1"));
        }
        Ok(Global::Lp(p))
    }

    /// `p`, with `C_0` counted as `∞`.
    pub fn exponent(&self) -> f64 {
        match self {
            Global::Lp(p) => *p,
            Global::C0 => f64::INFINITY,
        }
    }
}

impl fmt::Display for Global {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Global::Lp(p) if p.is_infinite() => write!(f, "Linf"),
            Global::Lp(p) => write!(f, "L{p}"),
            Global::C0 => write!(f, "C0"),
        }
    }
}

/// `W(E, L^p_η)` or `W(E, C_{η,0})`.
#[derive(Debug, Clone)]
pub struct AmalgamSpec {
    pub local: LocalSpace,
    pub global: Global,
    pub eta: Weight,
    /// The outer x-grid is the field grid restricted to `|x| <= L − margin`.
    pub margin: f64,
}

impl AmalgamSpec {
    pub fn new(local: LocalSpace, global: Global, eta: Weight) -> AmalgamSpec {
        AmalgamSpec {
            local,
            global,
            eta,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> AmalgamSpec {
        self.margin = margin;
        self
    }

    /// Indices of the outer x-grid inside the field grid.
    pub fn outer_indices(&self, grid: &Grid) -> Vec<usize> {
        let lim = grid.half_width() - self.margin;
        (0..grid.len()).filter(|&j| grid.point(j).abs() <= lim + 1e-12).collect()
    }

    fn params(&self) -> String {
        format!("E={};global={};eta={}", self.local, self.global, self.eta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub tail_flag: bool,
    pub warnings: Vec<String>,
    pub params: String,
}

fn live_windows<'a>(f: &SampledField, windows: &[&'a SampledField]) -> Result<Vec<&'a SampledField>> {
    let live: Vec<&SampledField> = windows.iter().copied().filter(|w| !w.is_zero()).collect();
    if live.is_empty() {
        return Err(Error::ZeroWindow);
    }
    for w in &live {
        f.check_same_grid(w)?;
    }
    Ok(live)
}

fn local_at(f: &SampledField, live: &[&SampledField], prepared: &PreparedLocal<'_>, eta: &Weight, x: f64) -> Result<(f64, bool)> {
    let mut best: f64 = 0.0;
    let mut warn = false;
    for w in live {
        let r = prepared.report(&f.mul(&w.translate(x)?)?)?;
        best = best.max(r.value);
        warn |= r.tail_warning;
    }
    Ok((best * eta.eval(x), warn))
}

/// `x ↦ sup_{χ ∈ B} ‖f T_xχ‖_E η(x)` on the outer grid.
fn profile(f: &SampledField, windows: &[&SampledField], spec: &AmalgamSpec) -> Result<(Vec<f64>, bool)> {
    let live = live_windows(f, windows)?;
    let grid = *f.grid();
    let prepared: PreparedLocal<'_> = spec.local.prepare(&grid);
    let idx = spec.outer_indices(&grid);
    if idx.is_empty() {
        return Err(Error::InvalidGrid("outer x-grid is empty; reduce the margin".into()));
    }
    let rows: Vec<(f64, bool)> = idx
        .par_iter()
        .map(|&j| local_at(f, &live, &prepared, &spec.eta, grid.point(j)))
        .collect::<Result<_>>()?;
    let warn = rows.iter().any(|r| r.1);
    Ok((rows.into_iter().map(|r| r.0).collect(), warn))
}

/// `∫ g^p` over the outer grid. The weight has a kink at the origin, where
/// the rule switches to Gregory end corrections on each half line.
fn outer_integral(xs: &[f64], prof: &[f64], p: f64, step: f64, kink: bool) -> f64 {
    let scale = max_or_zero(prof);
    if scale == 0.0 {
        return 0.0;
    }
    let mut w = vec![1.0; xs.len()];
    let g = gregory_end_weights();
    let n = g.len();
    if let Some(k) = xs.iter().position(|x| x.abs() < 1e-9 * step) {
        if kink && k >= n && xs.len() - 1 - k >= n {
            for (i, gi) in g.iter().enumerate() {
                w[k + i] += gi;
                w[k - i] += gi;
            }
        }
    }
    let terms: Vec<f64> = prof.iter().zip(&w).map(|(v, wi)| wi * (v / scale).powf(p)).collect();
    scale * (pairwise_sum(&terms) * step).max(0.0).powf(1.0 / p)
}

/// The grid maximum, polished by golden-section search between the
/// neighbours when every window can be translated off the grid.
fn refined_sup(f: &SampledField, live: &[&SampledField], spec: &AmalgamSpec, xs: &[f64], prof: &[f64]) -> Result<f64> {
    let Some((j, &m)) = prof.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return Ok(0.0);
    };
    if m == 0.0 || j == 0 || j + 1 == xs.len() || live.iter().any(|w| w.closed_form().is_none()) {
        return Ok(m);
    }
    let prepared = spec.local.prepare(f.grid());
    let g = |x: f64| local_at(f, live, &prepared, &spec.eta, x).map(|r| r.0);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (xs[j - 1], xs[j + 1]);
    let (mut a, mut b) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut ga, mut gb) = (g(a)?, g(b)?);
    let mut best = m.max(ga).max(gb);
    for _ in 0..48 {
        if ga >= gb {
            hi = b;
            (b, gb) = (a, ga);
            a = hi - r * (hi - lo);
            ga = g(a)?;
            best = best.max(ga);
        } else {
            lo = a;
            (a, ga) = (b, gb);
            b = lo + r * (hi - lo);
            gb = g(b)?;
            best = best.max(gb);
        }
    }
    Ok(best)
}

fn finish(value: f64, prof: &[f64], inner_warn: bool, spec: &AmalgamSpec) -> NormReport {
    let peak = max_or_zero(prof);
    let edge = prof.first().copied().unwrap_or(0.0).max(prof.last().copied().unwrap_or(0.0));
    let mut warnings = Vec::new();
    if inner_warn {
        warnings.push("local norm has mass at the box edge".to_string());
    }
    NormReport {
        value,
        tail_flag: peak > 0.0 && edge > OUTER_TAIL_REL * peak,
        warnings,
        params: spec.params(),
    }
}

/// `(∫ ‖f T_xχ‖_E^p η(x)^p dx)^{1/p}` on the outer grid; the sup for `p = ∞`
/// and `C_0`, where the flag reports decay of the profile at the edge.
pub fn continuous_norm(f: &SampledField, chi: &SampledField, spec: &AmalgamSpec) -> Result<NormReport> {
    family_norm(f, &[chi], spec)
}

/// As [`continuous_norm`] with the inner sup over a finite window family.
pub fn family_norm(f: &SampledField, windows: &[&SampledField], spec: &AmalgamSpec) -> Result<NormReport> {
    let (prof, warn) = profile(f, windows, spec)?;
    let grid = f.grid();
    let xs: Vec<f64> = spec.outer_indices(grid).into_iter().map(|j| grid.point(j)).collect();
    let p = spec.global.exponent();
    let value = if p.is_infinite() {
        refined_sup(f, &live_windows(f, windows)?, spec, &xs, &prof)?
    } else {
        outer_integral(&xs, &prof, p, grid.step(), !spec.eta.is_constant())
    };
    Ok(finish(value, &prof, warn, spec))
}

/// The profile `x ↦ ‖f T_xχ‖_E η(x)` itself, paired with the x-grid.
pub fn continuous_profile(f: &SampledField, chi: &SampledField, spec: &AmalgamSpec) -> Result<Vec<(f64, f64)>> {
    let (prof, _) = profile(f, &[chi], spec)?;
    let xs = spec.outer_indices(f.grid()).into_iter().map(|j| f.grid().point(j));
    Ok(xs.zip(prof).collect())
}

/// `(Σ_λ ‖fψ_λ‖_E^p η(y_λ)^p)^{1/p}`. For `C_0` the flag reports the
/// boundary-band pieces relative to the value.
pub fn discrete_norm(f: &SampledField, u: &Ucpu, spec: &AmalgamSpec) -> Result<NormReport> {
    f.check_same_grid(u.window())?;
    let prepared = spec.local.prepare(f.grid());
    let centers = u.centers();
    let terms: Vec<(f64, bool)> = u
        .pieces()
        .par_iter()
        .zip(centers.par_iter())
        .map(|(psi, y)| {
            let r = prepared.report(&f.mul(psi)?)?;
            Ok((r.value * spec.eta.eval(*y), r.tail_warning))
        })
        .collect::<Result<_>>()?;
    let vals: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let value = lp_sum(&vals, spec.global.exponent(), 1.0);
    let band = u.l_pts() - EDGE_BAND * u.a();
    let edge = vals
        .iter()
        .zip(&centers)
        .filter(|(_, y)| y.abs() > band)
        .map(|(v, _)| *v)
        .fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if !u.is_certified() {
        warnings.push(format!(
            "partition not certified: deviation {:e}",
            u.certificates().condition4.deviation
        ));
    }
    if terms.iter().any(|t| t.1) {
        warnings.push("local norm has mass at the box edge".to_string());
    }
    let tail_flag = match spec.global {
        Global::C0 => value > 0.0 && edge > OUTER_TAIL_REL * value,
        Global::Lp(_) => max_or_zero(&vals) > 0.0 && edge > OUTER_TAIL_REL * max_or_zero(&vals),
    };
    Ok(NormReport {
        value,
        tail_flag,
        warnings,
        params: format!("{};a={};s={}", spec.params(), u.a(), u.s()),
    })
}

/// Per-member ratios with their extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    /// `(numerator, denominator, ratio)` per family member.
    pub rows: Vec<(f64, f64, f64)>,
    pub min: f64,
    pub max: f64,
    /// `max / min`.
    pub spread: f64,
}

impl RatioTable {
    fn from_rows(rows: Vec<(f64, f64, f64)>) -> RatioTable {
        let min = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
        RatioTable {
            rows,
            min,
            max,
            spread: max / min,
        }
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.2).collect()
    }
}

/// Continuous over discrete norm for each member of a family.
pub fn equivalence_report(
    family: &[SampledField],
    chi: &SampledField,
    spec: &AmalgamSpec,
    u: &Ucpu,
) -> Result<RatioTable> {
    let rows = family
        .iter()
        .map(|f| {
            if f.is_zero() {
                return Err(Error::param("family", "members must be nonzero"));
            }
            let c = continuous_norm(f, chi, spec)?.value;
            let d = discrete_norm(f, u, spec)?.value;
            Ok((c, d, c / d))
        })
        .collect::<Result<_>>()?;
    Ok(RatioTable::from_rows(rows))
}

/// Continuous norm with `χ₁` over the one with `χ₂`, for each member.
pub fn window_independence(
    family: &[SampledField],
    chi1: &SampledField,
    chi2: &SampledField,
    spec: &AmalgamSpec,
) -> Result<RatioTable> {
    let rows = family
        .iter()
        .map(|f| {
            let n1 = continuous_norm(f, chi1, spec)?.value;
            let n2 = continuous_norm(f, chi2, spec)?.value;
            Ok((n1, n2, n1 / n2))
        })
        .collect::<Result<_>>()?;
    Ok(RatioTable::from_rows(rows))
}

/// `{f T_{y_λ}ψ₁}_λ`.
pub fn analysis_map(f: &SampledField, u: &Ucpu, psi1: &SampledField) -> Result<Vec<SampledField>> {
    f.check_same_grid(psi1)?;
    u.centers()
        .par_iter()
        .map(|y| f.mul(&psi1.translate(*y)?))
        .collect()
}

/// `Σ_λ f_λ T_{y_λ}ψ₂`.
pub fn synthesis_map(pieces: &[SampledField], u: &Ucpu, psi2: &SampledField) -> Result<SampledField> {
    let centers = u.centers();
    if pieces.len() != centers.len() {
        return Err(Error::param(
            "pieces",
            format!("expected {} pieces, got {}", centers.len(), pieces.len()),
        ));
    }
    let grid = *psi2.grid();
    let prods: Vec<SampledField> = pieces
        .par_iter()
        .zip(centers.par_iter())
        .map(|(p, y)| p.mul(&psi2.translate(*y)?))
        .collect::<Result<_>>()?;
    let values: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            let re: Vec<f64> = prods.iter().map(|p| p.values()[j].re).collect();
            let im: Vec<f64> = prods.iter().map(|p| p.values()[j].im).collect();
            Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
        })
        .collect();
    SampledField::from_values(grid, values)
}

/// `‖𝒫𝒥f − f‖_{L²}/‖f‖_{L²}` on `|x| <= core` with `ψ₁ = ψ₂ = √ψ`.
pub fn retraction_error(f: &SampledField, u: &Ucpu, core: f64) -> Result<f64> {
    let root = u.sqrt_window();
    let back = synthesis_map(&analysis_map(f, u, &root)?, u, &root)?;
    let grid = f.grid();
    let (mut num, mut den) = (Vec::new(), Vec::new());
    for j in 0..grid.len() {
        if grid.point(j).abs() <= core {
            num.push((back.values()[j] - f.values()[j]).norm_sqr());
            den.push(f.values()[j].norm_sqr());
        }
    }
    let den = pairwise_sum(&den);
    if den == 0.0 {
        return Ok(if pairwise_sum(&num) == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((pairwise_sum(&num) / den).sqrt())
}

/// The nine Gaussians `M_{ξ0} T_{x0} e^{−π·²}`, `x0 ∈ {−2, 0, 2}`, `ξ0 ∈ {−1, 0, 1}`.
pub fn gaussian_family(grid: &Grid) -> Vec<SampledField> {
    let mut out = Vec::with_capacity(9);
    for x0 in [-2.0, 0.0, 2.0] {
        for xi0 in [-1.0, 0.0, 1.0] {
            let g = GaussianForm::new(x0, xi0, 1.0).expect("a = 1 is valid");
            out.push(g.sample(grid));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ucpu::build_lattice_ucpu;

    fn l2() -> LocalSpace {
        LocalSpace::weighted_lp(2.0, Weight::constant()).unwrap()
    }

    fn gauss(grid: &Grid) -> SampledField {
        GaussianForm::default().sample(grid)
    }

    #[test]
    fn gaussian_closed_forms() {
        let grid = Grid::default();
        let g = gauss(&grid);
        let one = continuous_norm(&g, &g, &AmalgamSpec::new(l2(), Global::Lp(1.0), Weight::constant())).unwrap();
        assert!((one.value - 1.0).abs() < 1e-8 && !one.tail_flag);
        let two = continuous_norm(&g, &g, &AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant())).unwrap();
        assert!((two.value - 0.5f64.sqrt()).abs() < 1e-8);
        let z = SampledField::zeros(grid);
        let spec = AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant());
        assert_eq!(continuous_norm(&z, &g, &spec).unwrap().value, 0.0);
        assert!(matches!(continuous_norm(&g, &z, &spec), Err(Error::ZeroWindow)));
        assert!(Global::lp(0.5).unwrap_err().to_string().contains("p must be ≥ 1"));
    }

    #[test]
    fn family_sup() {
        let grid = Grid::default();
        let g = gauss(&grid);
        let spec = AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant());
        let c = continuous_norm(&g, &g, &spec).unwrap().value;
        assert_eq!(family_norm(&g, &[&g], &spec).unwrap().value, c);
        let half = g.scale_re(0.5);
        assert_eq!(family_norm(&g, &[&g, &half], &spec).unwrap().value, c);
        let wide = GaussianForm::new(0.0, 0.0, 2.0).unwrap().sample(&grid);
        let both = family_norm(&g, &[&g, &wide], &spec).unwrap().value;
        assert!(both >= c && both >= continuous_norm(&g, &wide, &spec).unwrap().value);
        let z = SampledField::zeros(grid);
        assert!(family_norm(&g, &[&z], &spec).is_err());
    }

    #[test]
    fn c0_matches_sup() {
        let grid = Grid::default();
        let g = GaussianForm::new(1.0, 0.5, 1.0).unwrap().sample(&grid);
        let chi = gauss(&grid);
        let sup = continuous_norm(&g, &chi, &AmalgamSpec::new(l2(), Global::Lp(f64::INFINITY), Weight::poly(1.0))).unwrap();
        let c0 = continuous_norm(&g, &chi, &AmalgamSpec::new(l2(), Global::C0, Weight::poly(1.0))).unwrap();
        assert_eq!(sup.value, c0.value);
        assert!(!c0.tail_flag);
    }

    #[test]
    fn discrete_pieces_match_quadrature() {
        let u = build_lattice_ucpu(1.0, 1.0, 12.0).unwrap();
        let grid = *u.grid();
        let g = gauss(&grid);
        let spec = AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant());
        let d = discrete_norm(&g, &u, &spec).unwrap();
        // Dense trapezoid oracle for each ‖fψ_λ‖₂ from the closed forms.
        let psi = u.window().closed_form().unwrap().clone();
        let n = 64_000;
        let h = 32.0 / n as f64;
        let mut total = 0.0;
        for y in u.centers() {
            let mut s = 0.0;
            for i in 0..=n {
                let t = -16.0 + i as f64 * h;
                let v = (-std::f64::consts::PI * t * t).exp() * psi.eval(t - y).re;
                s += if i == 0 || i == n { 0.5 } else { 1.0 } * v * v;
            }
            total += s * h;
        }
        assert!((d.value - total.sqrt()).abs() < 1e-10, "{} vs {}", d.value, total.sqrt());
        assert!(d.warnings.is_empty());
        let mut last = f64::INFINITY;
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let spec = AmalgamSpec::new(l2(), Global::Lp(p), Weight::constant());
            let v = discrete_norm(&g, &u, &spec).unwrap().value;
            assert!(v <= last);
            last = v;
        }
        assert_eq!(discrete_norm(&SampledField::zeros(grid), &u, &spec).unwrap().value, 0.0);
        let single = build_lattice_ucpu(1.0, 1.0, 0.0).unwrap();
        assert!(!discrete_norm(&g, &single, &spec).unwrap().warnings.is_empty());
    }

    #[test]
    fn equivalence_and_windows() {
        let u = build_lattice_ucpu(1.0, 1.0, 12.0).unwrap();
        let grid = *u.grid();
        let fam = gaussian_family(&grid);
        let chi = gauss(&grid);
        let spec = AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant());
        let t = equivalence_report(&fam, &chi, &spec, &u).unwrap();
        assert!(t.spread.is_finite() && t.spread <= 4.0, "{t:?}");
        let scaled: Vec<_> = fam.iter().map(|f| f.scale_re(10.0)).collect();
        let t10 = equivalence_report(&scaled, &chi, &spec, &u).unwrap();
        for (a, b) in t.ratios().iter().zip(t10.ratios()) {
            assert!((a - b).abs() < 1e-10);
        }
        let same = window_independence(&fam, &chi, &chi, &spec).unwrap();
        assert!(same.ratios().iter().all(|r| *r == 1.0));
        let dbl = window_independence(&fam, &chi, &chi.scale_re(2.0), &spec).unwrap();
        assert!(dbl.ratios().iter().all(|r| (r - 0.5).abs() < 1e-14));
        let chi4 = GaussianForm::new(0.0, 0.0, 4.0).unwrap().sample(&grid);
        assert!(window_independence(&fam, &chi, &chi4, &spec).unwrap().spread <= 4.0);
    }

    #[test]
    fn analysis_and_synthesis() {
        let u = build_lattice_ucpu(1.0, 1.0, 12.0).unwrap();
        let grid = *u.grid();
        let g = GaussianForm::new(2.0, 1.0, 1.0).unwrap().sample(&grid);
        let zero = analysis_map(&SampledField::zeros(grid), &u, u.window()).unwrap();
        assert!(zero.iter().all(|p| p.is_zero()));
        let pieces = analysis_map(&g, &u, u.window()).unwrap();
        let back = synthesis_map(&pieces, &u, &SampledField::constant(grid, 1.0)).unwrap();
        for j in 0..grid.len() {
            if grid.point(j).abs() <= 6.0 {
                assert!((back.values()[j] - g.values()[j]).norm() < 1e-10);
            }
        }
        let l2n: Vec<f64> = pieces.iter().map(|p| crate::local_norms::local_norm(p, &l2()).powi(2)).collect();
        let spec = AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant());
        assert_eq!(lp_sum(&l2n.iter().map(|v| v.sqrt()).collect::<Vec<_>>(), 2.0, 1.0), discrete_norm(&g, &u, &spec).unwrap().value);
        assert!(retraction_error(&g, &u, 6.0).unwrap() < 1e-8);
        let mut lone = vec![SampledField::zeros(grid); u.centers().len()];
        let k = u.centers().iter().position(|y| *y == 3.0).unwrap();
        lone[k] = SampledField::constant(grid, 1.0);
        let s = synthesis_map(&lone, &u, &u.sqrt_window()).unwrap();
        let far = (0..grid.len()).filter(|&j| (grid.point(j) - 3.0).abs() > 6.0).map(|j| s.values()[j].norm()).fold(0.0, f64::max);
        assert!(far < 1e-12);
        assert!(synthesis_map(&lone[1..], &u, u.window()).is_err());
    }
}
