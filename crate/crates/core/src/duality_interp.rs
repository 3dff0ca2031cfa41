//! The dual pairing bound, log-convexity of weighted sequence norms, and the
//! short-time Fourier transform with its modulation-space comparison.

use rayon::prelude::*;

use crate::amalgam::{continuous_norm, AmalgamSpec, Global, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::field::{fourier, Grid, SampledField};
use crate::local_norms::{conjugate_exponent, LocalSpace};
use crate::numeric::{lp_sum, pairwise_sum};
use crate::weights::Weight;
use crate::Complex64;

/// `⟨f, φ⟩ = ∫ fφ`, bilinear.
pub fn pairing(f: &SampledField, phi: &SampledField) -> Result<Complex64> {
    f.check_same_grid(phi)?;
    let prods: Vec<Complex64> = f.values().iter().zip(phi.values()).map(|(a, b)| a * b).collect();
    let re: Vec<f64> = prods.iter().map(|z| z.re).collect();
    let im: Vec<f64> = prods.iter().map(|z| z.im).collect();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) * f.grid().step())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
}

/// `|⟨f, φ⟩| <= ‖χ₀‖_{L²}^{−2} ‖f‖_{W(E′, L^q_{1/η}), χ₀} ‖φ‖_{W(E, L^p_η), χ̄₀}`.
#[allow(clippy::too_many_arguments)]
pub fn duality_bound_check(
    f: &SampledField,
    phi: &SampledField,
    chi0: &SampledField,
    e: &LocalSpace,
    e_dual: &LocalSpace,
    p: f64,
    eta: &Weight,
) -> Result<PairingReport> {
    if !e_dual.is_holder_dual_of(e) {
        return Err(Error::NotHolderDual);
    }
    if chi0.is_zero() {
        return Err(Error::ZeroWindow);
    }
    let global = Global::lp(p)?;
    let q = conjugate_exponent(p);
    let lhs = pairing(f, phi)?.norm();
    let chi_sq: Vec<f64> = chi0.values().iter().map(|v| v.norm_sqr()).collect();
    let chi_l2sq = pairwise_sum(&chi_sq) * chi0.grid().step();
    let nf = continuous_norm(f, chi0, &AmalgamSpec::new(e_dual.clone(), Global::Lp(q), eta.inverse()))?.value;
    let nphi = continuous_norm(phi, &chi0.conj(), &AmalgamSpec::new(e.clone(), global, eta.clone()))?.value;
    let rhs = nf * nphi / chi_l2sq;
    Ok(PairingReport {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

/// A finitely supported sequence on points of ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl WeightedSequence {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<WeightedSequence> {
        if points.len() != values.len() {
            return Err(Error::param("c", "points and values differ in length"));
        }
        Ok(WeightedSequence { points, values })
    }

    /// `‖c‖_{ℓ^p_η}`.
    pub fn norm(&self, p: f64, eta: &Weight) -> f64 {
        let mags: Vec<f64> = self
            .values
            .iter()
            .zip(&self.points)
            .map(|(c, y)| c.abs() * eta.eval(*y))
            .collect();
        lp_sum(&mags, p, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub p_theta: f64,
    /// `‖c‖_{ℓ^{p_θ}_{η_θ}}`.
    pub lhs: f64,
    /// `‖c‖^{1−θ}_{ℓ^{p₀}_{η₀}} ‖c‖^θ_{ℓ^{p₁}_{η₁}}`.
    pub rhs: f64,
    /// `ln rhs − ln lhs`; zero for the zero sequence.
    pub slack: f64,
}

/// `1/p_θ = (1−θ)/p₀ + θ/p₁`.
pub fn interpolated_exponent(p0: f64, p1: f64, theta: f64) -> f64 {
    1.0 / ((1.0 - theta) / p0 + theta / p1)
}

pub fn interpolation_convexity(
    c: &WeightedSequence,
    p0: f64,
    p1: f64,
    eta0: &Weight,
    eta1: &Weight,
    theta: f64,
) -> Result<ConvexityReport> {
    for (k, p) in [("p0", p0), ("p1", p1)] {
        if p.is_nan() || p < 1.0 {
            return Err(Error::param(k, "p must be ≥ 1"));
        }
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param("theta", "must lie in (0, 1)"));
    }
    let pt = interpolated_exponent(p0, p1, theta);
    let eta_t = Weight::interpolate(eta0, eta1, theta);
    let lhs = c.norm(pt, &eta_t);
    let (n0, n1) = (c.norm(p0, eta0), c.norm(p1, eta1));
    let rhs = n0.powf(1.0 - theta) * n1.powf(theta);
    let slack = if lhs == 0.0 {
        0.0
    } else {
        (1.0 - theta) * n0.ln() + theta * n1.ln() - lhs.ln()
    };
    Ok(ConvexityReport {
        p_theta: pt,
        lhs,
        rhs,
        slack,
    })
}

/// `V_φf(x, ξ)` for `x` on the outer grid and `ξ` on the frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StftField {
    pub grid_x: Grid,
    pub xs: Vec<f64>,
    pub grid_xi: Grid,
    /// One row per entry of `xs`.
    pub values: Vec<Vec<Complex64>>,
}

impl StftField {
    /// `‖V‖_{L²(x, ξ)}`.
    pub fn l2_norm(&self) -> f64 {
        let rows: Vec<f64> = self
            .values
            .iter()
            .map(|r| pairwise_sum(&r.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>()))
            .collect();
        (pairwise_sum(&rows) * self.grid_x.step() * self.grid_xi.step()).sqrt()
    }

    /// `‖ ‖V(x,·)‖_{L^q_ξ} η(x) ‖_{L^p_x}`.
    pub fn mixed_norm(&self, p: f64, q: f64, eta: &Weight) -> f64 {
        let inner: Vec<f64> = self
            .values
            .iter()
            .zip(&self.xs)
            .map(|(r, x)| {
                let mags: Vec<f64> = r.iter().map(|v| v.norm()).collect();
                lp_sum(&mags, q, self.grid_xi.step()) * eta.eval(*x)
            })
            .collect();
        lp_sum(&inner, p, self.grid_x.step())
    }
}

/// `V_φf(x, ·) = F(f T_x φ̄)` with the default outer margin.
pub fn stft(f: &SampledField, phi: &SampledField) -> Result<StftField> {
    stft_with_margin(f, phi, DEFAULT_MARGIN)
}

pub fn stft_with_margin(f: &SampledField, phi: &SampledField, margin: f64) -> Result<StftField> {
    f.check_same_grid(phi)?;
    if phi.is_zero() {
        return Err(Error::ZeroWindow);
    }
    let grid = *f.grid();
    let lim = grid.half_width() - margin;
    let xs: Vec<f64> = grid.points().into_iter().filter(|x| x.abs() <= lim + 1e-12).collect();
    let bar = phi.conj();
    let values = xs
        .par_iter()
        .map(|x| Ok(fourier(&f.mul(&bar.translate(*x)?)?).values().to_vec()))
        .collect::<Result<_>>()?;
    Ok(StftField {
        grid_x: grid,
        xs,
        grid_xi: grid.frequency_grid(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationReport {
    /// Mixed `L^p_η(L^q)` norm of the STFT.
    pub modulation: f64,
    /// `‖f‖_{W(FL^q, L^p_η)}` with window `φ̄`.
    pub amalgam: f64,
    pub ratio: f64,
}

/// Compares the two sides of the modulation/amalgam identity.
pub fn modulation_vs_amalgam(
    f: &SampledField,
    phi: &SampledField,
    p: f64,
    q_inner: f64,
    eta: &Weight,
) -> Result<ModulationReport> {
    let global = Global::lp(p)?;
    let v = stft(f, phi)?;
    let modulation = v.mixed_norm(p, q_inner, eta);
    let space = LocalSpace::fourier_lebesgue(q_inner, Weight::constant())?;
    let amalgam = continuous_norm(f, &phi.conj(), &AmalgamSpec::new(space, global, eta.clone()))?.value;
    Ok(ModulationReport {
        modulation,
        amalgam,
        ratio: modulation / amalgam,
    })
}
