//! Concrete local components `E`: weighted `L^p`, weighted `C_0`, and
//! Fourier-Lebesgue spaces, with translation and modulation certificates.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{self, convolve, fourier_inv, Grid, NormValue, SampledField};
use crate::gevrey::GevreySequence;
use crate::numeric;
use crate::weights::{Moderation, Weight};

/// Relative tail level above which a `C_0` membership report is flagged.
pub const C0_TAIL_REL: f64 = 1e-8;
/// Tolerance of the multiplier and convolution module bounds.
pub const MODULE_TOL: f64 = 1e-9;
/// Relative tolerance of empirical growth against a certificate.
pub const GROWTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LocalKind {
    /// `‖ηf‖_{L^p}`
    WeightedLp { p: f64, eta: Weight },
    /// `sup |ηf|`, with a decay report standing in for `C_0` membership.
    WeightedC0 { eta: Weight },
    /// `‖ν F⁻¹f‖_{L^q}`; `q = 1` is `FL¹_ν`.
    FourierLebesgue { q: f64, nu: Weight },
}

/// A local space with its `ω_E` and `ν_E` certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSpace {
    kind: LocalKind,
    omega: Moderation,
    nu: Moderation,
}

fn check_exponent(key: &str, p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::param(key, format!("{key} must be ≥ 1")))
    }
}

const ISOMETRY: Moderation = Moderation { c: 1.0, tau: 1.0 };

impl LocalSpace {
    pub fn weighted_lp(p: f64, eta: Weight) -> Result<LocalSpace> {
        check_exponent("p", p)?;
        let omega = eta.certificate();
        Ok(LocalSpace {
            kind: LocalKind::WeightedLp { p, eta },
            omega,
            nu: ISOMETRY,
        })
    }

    pub fn weighted_c0(eta: Weight) -> LocalSpace {
        let omega = eta.certificate();
        LocalSpace {
            kind: LocalKind::WeightedC0 { eta },
            omega,
            nu: ISOMETRY,
        }
    }

    pub fn fourier_lebesgue(q: f64, nu: Weight) -> Result<LocalSpace> {
        check_exponent("q", q)?;
        let cert = nu.certificate();
        Ok(LocalSpace {
            kind: LocalKind::FourierLebesgue { q, nu },
            omega: ISOMETRY,
            nu: cert,
        })
    }

    pub fn fourier_l1(nu: Weight) -> LocalSpace {
        LocalSpace::fourier_lebesgue(1.0, nu).expect("q = 1 is valid")
    }

    pub fn kind(&self) -> &LocalKind {
        &self.kind
    }

    /// `(C, τ)` with `ω_E(x) <= C e^{A(τ|x|)}`.
    pub fn omega_cert(&self) -> Moderation {
        self.omega
    }

    /// `(C, τ)` with `ν_E(ξ) <= C e^{M(τ|ξ|)}`.
    pub fn nu_cert(&self) -> Moderation {
        self.nu
    }

    /// Upper bound of `x ↦ ‖T_x‖_{L(E)}` as a weight.
    pub fn translation_weight(&self) -> Weight {
        match &self.kind {
            LocalKind::WeightedLp { eta, .. } | LocalKind::WeightedC0 { eta } => {
                eta.moderation_envelope()
            }
            LocalKind::FourierLebesgue { .. } => Weight::constant(),
        }
    }

    /// Upper bound of `ξ ↦ ‖M_ξ‖_{L(E)}` as a weight.
    pub fn modulation_weight(&self) -> Weight {
        match &self.kind {
            LocalKind::WeightedLp { .. } | LocalKind::WeightedC0 { .. } => Weight::constant(),
            LocalKind::FourierLebesgue { nu, .. } => nu.moderation_envelope(),
        }
    }

    /// Hölder dual `WeightedLp(p, η) ↦ WeightedLp(p', 1/η)`.
    pub fn holder_dual(&self) -> Option<LocalSpace> {
        match &self.kind {
            LocalKind::WeightedLp { p, eta } => {
                LocalSpace::weighted_lp(conjugate_exponent(*p), eta.inverse()).ok()
            }
            _ => None,
        }
    }

    pub fn is_holder_dual_of(&self, other: &LocalSpace) -> bool {
        match (&self.kind, &other.kind) {
            (LocalKind::WeightedLp { p: q, eta: w }, LocalKind::WeightedLp { p, eta }) => {
                let q_ok = if p.is_infinite() || q.is_infinite() {
                    (*p == 1.0 && q.is_infinite()) || (p.is_infinite() && *q == 1.0)
                } else {
                    (1.0 / p + 1.0 / q - 1.0).abs() < 1e-12
                };
                q_ok && *w.kind() == eta.kind().negated()
            }
            _ => false,
        }
    }

    /// Prepares weight samples for repeated evaluation on `grid`.
    pub fn prepare(&self, grid: &Grid) -> PreparedLocal<'_> {
        let weights = match &self.kind {
            LocalKind::WeightedLp { eta, .. } | LocalKind::WeightedC0 { eta } => {
                field::weight_samples(grid, eta)
            }
            LocalKind::FourierLebesgue { nu, .. } => {
                field::weight_samples(&grid.frequency_grid(), nu)
            }
        };
        PreparedLocal {
            space: self,
            grid: *grid,
            weights,
        }
    }

    /// Parses `lp:p=P,weight=W`, `c0:weight=W`, `fl1:weight=W`, `flq:q=Q,weight=W`.
    /// The weight literal runs to the end of the string.
    pub fn parse(literal: &str, seq: &GevreySequence) -> Result<LocalSpace> {
        let lit = literal.trim();
        let bad = |m: &str| Error::parse("E", format!("{m} in `{lit}`"));
        let (head, rest) = lit.split_once(':').unwrap_or((lit, ""));
        let (params, weight) = match rest.find("weight=") {
            Some(i) => (rest[..i].trim_end_matches(','), Some(&rest[i + 7..])),
            None => (rest, None),
        };
        let eta = match weight {
            Some(w) => Weight::parse(w, seq)?,
            None => Weight::constant(),
        };
        let keys: &[&str] = match head {
            "lp" => &["p"],
            "flq" => &["q"],
            "c0" | "fl1" => &[],
            _ => return Err(bad("unknown local space")),
        };
        let kv = crate::weights::parse_kv(params, keys).map_err(|m| bad(&m))?;
        match head {
            "lp" => LocalSpace::weighted_lp(kv[0].ok_or_else(|| bad("missing p"))?, eta),
            "flq" => LocalSpace::fourier_lebesgue(kv[0].ok_or_else(|| bad("missing q"))?, eta),
            "c0" => Ok(LocalSpace::weighted_c0(eta)),
            _ => Ok(LocalSpace::fourier_l1(eta)),
        }
    }
}

impl fmt::Display for LocalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LocalKind::WeightedLp { p, eta } => write!(f, "lp:p={p},weight={eta}"),
            LocalKind::WeightedC0 { eta } => write!(f, "c0:weight={eta}"),
            LocalKind::FourierLebesgue { q, nu } if *q == 1.0 => write!(f, "fl1:weight={nu}"),
            LocalKind::FourierLebesgue { q, nu } => write!(f, "flq:q={q},weight={nu}"),
        }
    }
}

/// `p' = p/(p−1)` with `1' = ∞`, `∞' = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// A local space with weights sampled on one grid.
#[derive(Debug, Clone)]
pub struct PreparedLocal<'a> {
    space: &'a LocalSpace,
    grid: Grid,
    weights: Vec<f64>,
}

impl PreparedLocal<'_> {
    pub fn norm(&self, f: &SampledField) -> Result<f64> {
        Ok(self.report(f)?.value)
    }

    pub fn report(&self, f: &SampledField) -> Result<NormValue> {
        if !self.grid.same_as(f.grid()) {
            return Err(Error::GridMismatch("field and prepared local space".into()));
        }
        let (mags, step, p) = match &self.space.kind {
            LocalKind::WeightedLp { p, .. } => (self.magnitudes(f.values()), self.grid.step(), *p),
            LocalKind::WeightedC0 { .. } => {
                let mags = self.magnitudes(f.values());
                let value = numeric::max_or_zero(&mags);
                let half = self.grid.half_width() / 2.0;
                let tail: Vec<f64> = mags
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| self.grid.point(*j).abs() > half)
                    .map(|(_, m)| *m)
                    .collect();
                return Ok(NormValue {
                    value,
                    tail_warning: value > 0.0 && numeric::max_or_zero(&tail) > C0_TAIL_REL * value,
                });
            }
            LocalKind::FourierLebesgue { q, .. } => {
                let g = fourier_inv(f);
                (self.magnitudes(g.values()), g.grid().step(), *q)
            }
        };
        Ok(field::weighted_norm_value(&mags, p, step))
    }

    fn magnitudes(&self, values: &[num_complex::Complex64]) -> Vec<f64> {
        values.iter().zip(&self.weights).map(|(v, w)| v.norm() * w).collect()
    }
}

/// `‖f‖_E`.
pub fn local_norm(f: &SampledField, e: &LocalSpace) -> f64 {
    local_norm_report(f, e).value
}

/// `‖f‖_E` with the tail diagnostic: the box edge for `L^p` and `FL^q`, the
/// region `|x| > L/2` for `C_0`.
pub fn local_norm_report(f: &SampledField, e: &LocalSpace) -> NormValue {
    e.prepare(f.grid())
        .report(f)
        .expect("prepared on the field's own grid")
}

/// One row of an empirical translation-growth sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub x: f64,
    /// `max_e ‖T_x e‖_E / ‖e‖_E`, a lower bound of `ω_E(x)`.
    pub ratio: f64,
    /// `C e^{A(τ|x|)}` from the certificate.
    pub bound: f64,
    /// `1 − ratio/bound`.
    pub slack: f64,
}

impl GrowthRow {
    pub fn ok(&self) -> bool {
        self.slack >= -GROWTH_TOL
    }
}

pub fn empirical_translation_growth(
    e: &LocalSpace,
    xs: &[f64],
    probes: &[SampledField],
    seq: &GevreySequence,
) -> Result<Vec<GrowthRow>> {
    let Some(first) = probes.first() else {
        return Err(Error::param("probes", "need at least one probe"));
    };
    let prep = e.prepare(first.grid());
    let base: Vec<f64> = probes.iter().map(|p| prep.norm(p)).collect::<Result<_>>()?;
    if base.iter().any(|b| *b == 0.0) {
        return Err(Error::param("probes", "probes must be nonzero"));
    }
    let cert = e.omega_cert();
    xs.iter()
        .map(|&x| {
            let mut ratio: f64 = 0.0;
            for (p, b) in probes.iter().zip(&base) {
                ratio = ratio.max(prep.norm(&p.translate(x)?)? / b);
            }
            let bound = cert.c * seq.assoc_value(cert.tau * x.abs()).exp();
            Ok(GrowthRow {
                x,
                ratio,
                bound,
                slack: 1.0 - ratio / bound,
            })
        })
        .collect()
}

/// `lhs <= rhs` with `slack = rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl Bound {
    pub fn new(lhs: f64, rhs: f64) -> Bound {
        Bound {
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    pub fn ok(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

/// Both branches of the module bounds of `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierReport {
    /// `‖g·e‖_E <= ‖g‖_{FL¹_{ν_E}} ‖e‖_E`
    pub product: Bound,
    /// `‖g ⋆ e‖_E <= ‖g‖_{L¹_{ω_E}} ‖e‖_E`
    pub convolution: Bound,
}

impl MultiplierReport {
    pub fn ok(&self) -> bool {
        self.product.ok(MODULE_TOL) && self.convolution.ok(MODULE_TOL)
    }
}

pub fn multiplier_bound_check(
    g: &SampledField,
    e: &SampledField,
    space: &LocalSpace,
) -> Result<MultiplierReport> {
    g.check_same_grid(e)?;
    let prep = space.prepare(e.grid());
    let e_norm = prep.norm(e)?;
    let product = Bound::new(
        prep.norm(&g.mul(e)?)?,
        field::fl1_norm(g, &space.modulation_weight()) * e_norm,
    );
    let convolution = Bound::new(
        prep.norm(&convolve(g, e)?)?,
        field::lp_norm(g, 1.0, &space.translation_weight()) * e_norm,
    );
    Ok(MultiplierReport {
        product,
        convolution,
    })
}
