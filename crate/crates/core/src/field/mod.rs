//! Sampled complex fields on uniform one-dimensional grids, optionally backed
//! by an exact closed form (sums of modulated, translated Gaussian or
//! hat-Gauss atoms).

mod fourier;
pub mod special;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gevrey::GevreySequence;
use crate::numeric;
use crate::weights::{parse_kv, Weight};

pub use fourier::{convolve, fourier, fourier_inv};
use special::HatGauss;

pub const DEFAULT_HALF_WIDTH: f64 = 16.0;
pub const DEFAULT_STEP: f64 = 1.0 / 16.0;
/// Edge magnitude, relative to the maximum, above which a norm flags a tail.
pub const TAIL_WARN_REL: f64 = 1e-10;
/// Derivative order used for truncated `D^{M_p,h}_{L¹}` seminorms.
pub const DEFAULT_DERIV_ORDER: usize = 16;

/// Uniform grid `x_j = −L + jΔ`, `j = 0..N`, with `N = 2L/Δ` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    step: f64,
    len: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new(DEFAULT_HALF_WIDTH, DEFAULT_STEP).expect("default grid is valid")
    }
}

impl Grid {
    pub fn new(half_width: f64, step: f64) -> Result<Grid> {
        if !(half_width.is_finite() && step.is_finite() && half_width > 0.0 && step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need L > 0 and delta > 0, got L = {half_width}, delta = {step}"
            )));
        }
        let n = 2.0 * half_width / step;
        let len = n.round();
        if (n - len).abs() > 1e-9 * n || len < 4.0 || len > (1u64 << 30) as f64 {
            return Err(Error::InvalidGrid(format!(
                "2L/delta = {n} is not an integer in [4, 2^30]"
            )));
        }
        let len = len as usize;
        if !len.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count 2L/delta = {len} is not a power of two"
            )));
        }
        Ok(Grid {
            half_width,
            step,
            len,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.point(j)).collect()
    }

    /// Dual grid `(L', Δ') = (1/(2Δ), 1/(2L))` with the same point count.
    pub fn frequency_grid(&self) -> Grid {
        Grid {
            half_width: 0.5 / self.step,
            step: 0.5 / self.half_width,
            len: self.len,
        }
    }

    /// Same box, half the spacing.
    pub fn refined(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            step: self.step / 2.0,
            len: self.len * 2,
        }
    }

    /// Number of steps in `x`, if `x` is a grid multiple.
    pub fn steps_in(&self, x: f64) -> Option<i64> {
        let m = x / self.step;
        let r = m.round();
        ((m - r).abs() <= 1e-9 * r.abs().max(1.0)).then_some(r as i64)
    }

    /// Index of the grid point equal to `x`, if any.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let j = self.steps_in(x + self.half_width)?;
        (0..self.len as i64).contains(&j).then_some(j as usize)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.len == other.len
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Real profile of a closed-form atom, before translation and modulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `e^{−πa u²}`
    Gaussian { a: f64 },
    /// `hat_a ⋆ g_s`
    HatGauss { a: f64, s: f64 },
    /// `(hat_a ⋆ g_s)^{1/2}`
    SqrtHatGauss { a: f64, s: f64 },
    /// `≡ 1`
    Constant,
}

impl Shape {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Shape::Gaussian { a } => (-PI * a * u * u).exp(),
            Shape::HatGauss { a, s } => HatGauss { a, s }.eval(u),
            Shape::SqrtHatGauss { a, s } => HatGauss { a, s }.eval(u).sqrt(),
            Shape::Constant => 1.0,
        }
    }

    /// Derivatives `0..=k` at `u`, where an analytic formula is available.
    pub fn derivs(&self, u: f64, k: usize) -> Option<Vec<f64>> {
        match *self {
            Shape::Gaussian { a } => Some(special::gaussian_derivs(a, u, k)),
            Shape::HatGauss { a, s } => Some(HatGauss { a, s }.derivs(u, k)),
            Shape::SqrtHatGauss { .. } => None,
            Shape::Constant => {
                let mut d = vec![0.0; k + 1];
                d[0] = 1.0;
                Some(d)
            }
        }
    }
}

/// `amp · e^{2πi·freq·t} · shape(t − center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub shape: Shape,
    pub center: f64,
    pub freq: f64,
    pub amp: Complex64,
}

impl Atom {
    pub fn new(shape: Shape) -> Atom {
        Atom {
            shape,
            center: 0.0,
            freq: 0.0,
            amp: Complex64::new(1.0, 0.0),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.amp * Complex64::cis(2.0 * PI * self.freq * t) * self.shape.eval(t - self.center)
    }

    /// Leibniz rule against the modulation factor.
    pub fn derivs(&self, t: f64, k: usize) -> Option<Vec<Complex64>> {
        let s = self.shape.derivs(t - self.center, k)?;
        let w = Complex64::new(0.0, 2.0 * PI * self.freq);
        let base = self.amp * Complex64::cis(2.0 * PI * self.freq * t);
        let mut wpow = vec![Complex64::new(1.0, 0.0); k + 1];
        for i in 1..=k {
            wpow[i] = wpow[i - 1] * w;
        }
        let mut out = Vec::with_capacity(k + 1);
        for order in 0..=k {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut binom = 1.0;
            for j in 0..=order {
                acc += wpow[order - j] * (binom * s[j]);
                binom = binom * (order - j) as f64 / (j + 1) as f64;
            }
            out.push(base * acc);
        }
        Some(out)
    }

    fn translated(&self, x: f64) -> Atom {
        Atom {
            center: self.center + x,
            amp: self.amp * Complex64::cis(-2.0 * PI * self.freq * x),
            ..*self
        }
    }

    fn modulated(&self, xi: f64) -> Atom {
        Atom {
            freq: self.freq + xi,
            ..*self
        }
    }
}

/// Unmodulated-width Gaussian `e^{2πi·xi0·t} e^{−πa(t−x0)²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianForm {
    pub x0: f64,
    pub xi0: f64,
    pub a: f64,
}

impl Default for GaussianForm {
    fn default() -> Self {
        GaussianForm {
            x0: 0.0,
            xi0: 0.0,
            a: 1.0,
        }
    }
}

impl GaussianForm {
    pub fn new(x0: f64, xi0: f64, a: f64) -> Result<GaussianForm> {
        if !(a > 0.0) {
            return Err(Error::param("a", "Gaussian width must be > 0"));
        }
        Ok(GaussianForm { x0, xi0, a })
    }

    pub fn atom(&self) -> Atom {
        Atom {
            shape: Shape::Gaussian { a: self.a },
            center: self.x0,
            freq: self.xi0,
            amp: Complex64::new(1.0, 0.0),
        }
    }

    pub fn sample(&self, grid: &Grid) -> SampledField {
        SampledField::from_closed_form(*grid, ClosedForm::single(self.atom()))
    }
}

/// Finite sum of atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClosedForm {
    atoms: Vec<Atom>,
}

impl ClosedForm {
    pub fn new(atoms: Vec<Atom>) -> ClosedForm {
        ClosedForm { atoms }
    }

    pub fn single(atom: Atom) -> ClosedForm {
        ClosedForm { atoms: vec![atom] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.atoms.iter().map(|a| a.eval(t)).sum()
    }

    pub fn derivs(&self, t: f64, k: usize) -> Option<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); k + 1];
        for a in &self.atoms {
            for (o, d) in out.iter_mut().zip(a.derivs(t, k)?) {
                *o += d;
            }
        }
        Some(out)
    }

    pub fn translated(&self, x: f64) -> ClosedForm {
        ClosedForm::new(self.atoms.iter().map(|a| a.translated(x)).collect())
    }

    pub fn modulated(&self, xi: f64) -> ClosedForm {
        ClosedForm::new(self.atoms.iter().map(|a| a.modulated(xi)).collect())
    }

    pub fn scaled(&self, c: Complex64) -> ClosedForm {
        ClosedForm::new(
            self.atoms
                .iter()
                .map(|a| Atom {
                    amp: a.amp * c,
                    ..*a
                })
                .collect(),
        )
    }

    pub fn conj(&self) -> ClosedForm {
        ClosedForm::new(
            self.atoms
                .iter()
                .map(|a| Atom {
                    amp: a.amp.conj(),
                    freq: -a.freq,
                    ..*a
                })
                .collect(),
        )
    }

    pub fn plus(&self, other: &ClosedForm) -> ClosedForm {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        ClosedForm::new(atoms)
    }

    /// Parses `gauss:x0=..,xi0=..,a=..`, `hatgauss:a=..,s=..`, `zero`, and
    /// `sum:[lit;lit;...]`. Every atom accepts optional `amp`/`amp_im` keys.
    pub fn parse(literal: &str) -> Result<ClosedForm> {
        let lit = literal.trim();
        let bad = |m: &str| Error::parse("field", format!("{m} in `{lit}`"));
        if lit == "zero" {
            return Ok(ClosedForm::default());
        }
        if let Some(inner) = lit.strip_prefix("sum:") {
            let inner = inner
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| bad("expected sum:[...]"))?;
            let mut atoms = Vec::new();
            for part in inner.split(';').filter(|p| !p.trim().is_empty()) {
                if part.trim().starts_with("sum:") {
                    return Err(bad("nested sums are not supported"));
                }
                atoms.extend(ClosedForm::parse(part)?.atoms);
            }
            return Ok(ClosedForm::new(atoms));
        }
        let (head, rest) = lit.split_once(':').unwrap_or((lit, ""));
        let atom = match head.trim() {
            "gauss" => {
                let kv = parse_kv(rest, &["x0", "xi0", "a", "amp", "amp_im"]).map_err(|m| bad(&m))?;
                let a = kv[2].unwrap_or(1.0);
                if !(a > 0.0) {
                    return Err(bad("a must be > 0"));
                }
                Atom {
                    shape: Shape::Gaussian { a },
                    center: kv[0].unwrap_or(0.0),
                    freq: kv[1].unwrap_or(0.0),
                    amp: Complex64::new(kv[3].unwrap_or(1.0), kv[4].unwrap_or(0.0)),
                }
            }
            "hatgauss" | "sqrthatgauss" => {
                let kv = parse_kv(rest, &["a", "s", "x0", "xi0", "amp", "amp_im"])
                    .map_err(|m| bad(&m))?;
                let (a, s) = (kv[0].unwrap_or(1.0), kv[1].unwrap_or(1.0));
                if !(a > 0.0 && s > 0.0) {
                    return Err(bad("a and s must be > 0"));
                }
                Atom {
                    shape: if head.trim() == "hatgauss" {
                        Shape::HatGauss { a, s }
                    } else {
                        Shape::SqrtHatGauss { a, s }
                    },
                    center: kv[2].unwrap_or(0.0),
                    freq: kv[3].unwrap_or(0.0),
                    amp: Complex64::new(kv[4].unwrap_or(1.0), kv[5].unwrap_or(0.0)),
                }
            }
            _ => return Err(bad("unknown field kind")),
        };
        Ok(ClosedForm::single(atom))
    }
}

fn fmt_atom(a: &Atom, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let amp = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
        if a.amp.re != 1.0 || a.amp.im != 0.0 {
            write!(f, ",amp={}", a.amp.re)?;
        }
        if a.amp.im != 0.0 {
            write!(f, ",amp_im={}", a.amp.im)?;
        }
        Ok(())
    };
    match a.shape {
        Shape::Gaussian { a: w } => {
            write!(f, "gauss:x0={},xi0={},a={}", a.center, a.freq, w)?;
        }
        Shape::HatGauss { a: w, s } | Shape::SqrtHatGauss { a: w, s } => {
            let head = if matches!(a.shape, Shape::HatGauss { .. }) {
                "hatgauss"
            } else {
                "sqrthatgauss"
            };
            write!(f, "{head}:a={w},s={s},x0={},xi0={}", a.center, a.freq)?;
        }
        Shape::Constant => return write!(f, "const"),
    }
    amp(f)
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.atoms.as_slice() {
            [] => write!(f, "zero"),
            [a] => fmt_atom(a, f),
            atoms => {
                write!(f, "sum:[")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    fmt_atom(a, f)?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Complex samples on a [`Grid`], with optional exact backing.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<Complex64>,
    closed_form: Option<ClosedForm>,
}

impl SampledField {
    pub(crate) fn from_parts(
        grid: Grid,
        values: Vec<Complex64>,
        closed_form: Option<ClosedForm>,
    ) -> SampledField {
        debug_assert_eq!(values.len(), grid.len());
        SampledField {
            grid,
            values,
            closed_form,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<SampledField> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledField::from_parts(grid, values, None))
    }

    pub fn from_closed_form(grid: Grid, cf: ClosedForm) -> SampledField {
        let values = (0..grid.len()).map(|j| cf.eval(grid.point(j))).collect();
        SampledField::from_parts(grid, values, Some(cf))
    }

    pub fn zeros(grid: Grid) -> SampledField {
        SampledField::from_closed_form(grid, ClosedForm::default())
    }

    pub fn constant(grid: Grid, c: f64) -> SampledField {
        let atom = Atom {
            amp: Complex64::new(c, 0.0),
            ..Atom::new(Shape::Constant)
        };
        SampledField::from_closed_form(grid, ClosedForm::single(atom))
    }

    pub fn gaussian(grid: Grid, g: GaussianForm) -> SampledField {
        g.sample(&grid)
    }

    /// `hat_a ⋆ g_s` with its closed form.
    pub fn hat_gauss(grid: Grid, a: f64, s: f64) -> Result<SampledField> {
        check_window_params(a, s)?;
        Ok(SampledField::from_closed_form(
            grid,
            ClosedForm::single(Atom::new(Shape::HatGauss { a, s })),
        ))
    }

    /// Pointwise positive square root of `hat_a ⋆ g_s`.
    pub fn sqrt_hat_gauss(grid: Grid, a: f64, s: f64) -> Result<SampledField> {
        check_window_params(a, s)?;
        Ok(SampledField::from_closed_form(
            grid,
            ClosedForm::single(Atom::new(Shape::SqrtHatGauss { a, s })),
        ))
    }

    pub fn parse(literal: &str, grid: Grid) -> Result<SampledField> {
        Ok(SampledField::from_closed_form(grid, ClosedForm::parse(literal)?))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Exact value from the closed form, if any.
    pub fn eval(&self, t: f64) -> Option<Complex64> {
        self.closed_form.as_ref().map(|cf| cf.eval(t))
    }

    pub(crate) fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(L={}, delta={}) vs (L={}, delta={})",
                self.grid.half_width, self.grid.step, other.grid.half_width, other.grid.step
            )))
        }
    }

    /// `T_x f = f(· − x)`. Exact for closed forms; an index shift with zero
    /// fill otherwise.
    pub fn translate(&self, x: f64) -> Result<SampledField> {
        if let Some(cf) = &self.closed_form {
            return Ok(SampledField::from_closed_form(self.grid, cf.translated(x)));
        }
        let m = self.grid.steps_in(x).ok_or(Error::OffGridTranslate(x))?;
        let n = self.grid.len as i64;
        let values = (0..n)
            .map(|j| {
                let src = j - m;
                if (0..n).contains(&src) {
                    self.values[src as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(SampledField::from_parts(self.grid, values, None))
    }

    /// `M_ξ f = e^{2πiξ·} f`.
    pub fn modulate(&self, xi: f64) -> SampledField {
        if let Some(cf) = &self.closed_form {
            return SampledField::from_closed_form(self.grid, cf.modulated(xi));
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::cis(2.0 * PI * xi * self.grid.point(j)))
            .collect();
        SampledField::from_parts(self.grid, values, None)
    }

    pub fn scale(&self, c: Complex64) -> SampledField {
        SampledField::from_parts(
            self.grid,
            self.values.iter().map(|v| v * c).collect(),
            self.closed_form.as_ref().map(|cf| cf.scaled(c)),
        )
    }

    pub fn scale_re(&self, c: f64) -> SampledField {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn conj(&self) -> SampledField {
        SampledField::from_parts(
            self.grid,
            self.values.iter().map(|v| v.conj()).collect(),
            self.closed_form.as_ref().map(|cf| cf.conj()),
        )
    }

    /// Pointwise product. The closed form is dropped.
    pub fn mul(&self, other: &SampledField) -> Result<SampledField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(SampledField::from_parts(self.grid, values, None))
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let cf = match (&self.closed_form, &other.closed_form) {
            (Some(a), Some(b)) => Some(a.plus(b)),
            _ => None,
        };
        Ok(SampledField::from_parts(self.grid, values, cf))
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        self.add(&other.scale_re(-1.0))
    }

    /// Same closed form resampled on another grid.
    pub fn resample(&self, grid: Grid) -> Result<SampledField> {
        let cf = self
            .closed_form
            .clone()
            .ok_or_else(|| Error::ClosedFormRequired("resampling".into()))?;
        Ok(SampledField::from_closed_form(grid, cf))
    }

    /// `f^{(k)}` at every grid point for `k = 0..=order`, from the closed form.
    pub fn derivative_samples(&self, order: usize) -> Result<Vec<Vec<Complex64>>> {
        let cf = self
            .closed_form
            .as_ref()
            .ok_or_else(|| Error::ClosedFormRequired("analytic derivatives".into()))?;
        let mut out = vec![Vec::with_capacity(self.grid.len); order + 1];
        for j in 0..self.grid.len {
            let d = cf
                .derivs(self.grid.point(j), order)
                .ok_or_else(|| Error::ClosedFormRequired("shape without derivative formula".into()))?;
            for (k, v) in d.into_iter().enumerate() {
                out[k].push(v);
            }
        }
        Ok(out)
    }
}

fn check_window_params(a: f64, s: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::param("a", "must be > 0"));
    }
    if !(s > 0.0) {
        return Err(Error::param("s", "must be > 0"));
    }
    Ok(())
}

/// `hat_a ⋆ g_s` on the default grid.
pub fn hat_gauss_window(a: f64, s: f64) -> Result<SampledField> {
    SampledField::hat_gauss(Grid::default(), a, s)
}

/// `η` sampled on the grid points.
pub fn weight_samples(grid: &Grid, eta: &Weight) -> Vec<f64> {
    if eta.is_constant() {
        vec![1.0; grid.len()]
    } else {
        (0..grid.len()).map(|j| eta.eval(grid.point(j))).collect()
    }
}

/// A quadrature norm together with its boundary-tail diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub value: f64,
    /// `|ηf|` at the box edge exceeds [`TAIL_WARN_REL`] times its maximum.
    pub tail_warning: bool,
}

/// `‖ηf‖_{L^p}` as a Riemann sum (grid maximum for `p = ∞`).
pub fn lp_norm(f: &SampledField, p: f64, eta: &Weight) -> f64 {
    lp_norm_report(f, p, eta).value
}

pub fn lp_norm_report(f: &SampledField, p: f64, eta: &Weight) -> NormValue {
    let w = weight_samples(f.grid(), eta);
    let mags: Vec<f64> = f.values().iter().zip(&w).map(|(v, w)| v.norm() * w).collect();
    weighted_norm_value(&mags, p, f.grid().step())
}

pub(crate) fn weighted_norm_value(mags: &[f64], p: f64, step: f64) -> NormValue {
    let max = numeric::max_or_zero(mags);
    let edge = mags.first().copied().unwrap_or(0.0).max(mags.last().copied().unwrap_or(0.0));
    NormValue {
        value: numeric::lp_sum(mags, p, step),
        tail_warning: max > 0.0 && edge > TAIL_WARN_REL * max,
    }
}

/// `‖ν F⁻¹f‖_{L^q}`.
pub fn fourier_lebesgue_norm(f: &SampledField, q: f64, nu: &Weight) -> f64 {
    lp_norm(&fourier_inv(f), q, nu)
}

/// `‖ν F⁻¹f‖_{L¹}`.
pub fn fl1_norm(f: &SampledField, nu: &Weight) -> f64 {
    fourier_lebesgue_norm(f, 1.0, nu)
}

/// Outcome of the frequency-decay check
/// `η(ξ)|F⁻¹f(ξ)| <= S_K η(ξ) e^{−M(h|ξ|)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// Truncated seminorm `S_K = max_{k<=K} h^k ‖f^{(k)}‖_{L¹} / M_k`.
    pub seminorm: f64,
    pub order: usize,
    /// `min_ξ (1 − lhs/rhs)`; the bound holds where this is `>= 0`.
    pub slack: f64,
    /// Frequency of the worst ratio.
    pub worst_xi: f64,
    pub violations: usize,
    pub checked: usize,
}

/// Checks the frequency-decay bound on the frequency grid for `|ξ| <= xi_max`.
pub fn lemma22_decay_check(
    f: &SampledField,
    seq: &GevreySequence,
    h: f64,
    eta: &Weight,
    order: usize,
    xi_max: f64,
) -> Result<DecayReport> {
    if !(h > 0.0) {
        return Err(Error::param("h", "must be > 0"));
    }
    let derivs = f.derivative_samples(order)?;
    let step = f.grid().step();
    let mut seminorm: f64 = 0.0;
    for (k, d) in derivs.iter().enumerate() {
        let l1 = numeric::pairwise_sum_by(d, &|v: &Complex64| v.norm()) * step;
        let ln_term = k as f64 * h.ln() + l1.ln() - seq.log_value(k as u64);
        if l1 > 0.0 {
            seminorm = seminorm.max(ln_term.exp());
        }
    }
    // Rounding allowance of the FFT and the L¹ sums, so that the equality
    // case at ξ = 0 (nonnegative f) is not reported as a violation.
    let bound = seminorm * (1.0 + 8.0 * (f.grid().len() as f64).log2() * f64::EPSILON);
    let spec = fourier_inv(f);
    let fgrid = spec.grid();
    let mut slack = f64::INFINITY;
    let mut worst_xi = f64::NAN;
    let mut violations = 0;
    let mut checked = 0;
    for (k, v) in spec.values().iter().enumerate() {
        let xi = fgrid.point(k);
        if xi.abs() > xi_max {
            continue;
        }
        checked += 1;
        let w = eta.eval(xi);
        let lhs = w * v.norm();
        let rhs = bound * w * (-seq.assoc_value(h * xi.abs())).exp();
        let s = if lhs == 0.0 { 1.0 } else { 1.0 - lhs / rhs };
        if s < 0.0 {
            violations += 1;
        }
        if s < slack {
            slack = s;
            worst_xi = xi;
        }
    }
    Ok(DecayReport {
        seminorm,
        order,
        slack,
        worst_xi,
        violations,
        checked,
    })
}
