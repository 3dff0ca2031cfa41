//! Special functions behind the closed-form windows.
//!
//! The hat-Gauss window is `ψ = hat_a ⋆ g_s` with `hat_a(u) = (1 − |u|/a)_+`
//! and `g_s(t) = s⁻¹ e^{−π t²/s²}`. Writing the hat as a second difference of
//! ramps gives
//!
//! ```text
//! ψ(x) = (1/a) [R(x+a) − 2R(x) + R(x−a)],   R(y) = E[(y − T)_+],  T ~ g_s,
//! ```
//!
//! with `R' = Φ(·/σ)`, `R'' = g_s` and `σ = s/√(2π)`. Far tails are evaluated
//! through a scaled Mills-ratio continued fraction so that `ψ` stays strictly
//! positive down to the subnormal range.

use std::f64::consts::{PI, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `q(w) = 1 − w Φ(−w)/φ(w)` for `w >= 0`, without cancellation.
pub fn mills_q(w: f64) -> f64 {
    debug_assert!(w >= 0.0);
    if w < 5.0 {
        1.0 - w * norm_cdf(-w) / norm_pdf(w)
    } else {
        // Φ(−w)/φ(w) = 1/(w + t₁) with t_k = k/(w + t_{k+1}); then q = t₁/(w + t₁).
        let mut t = 0.0;
        for k in (1..=120).rev() {
            t = k as f64 / (w + t);
        }
        t / (w + t)
    }
}

/// `r(z) = E[(z − Z)_+] = φ(z) + zΦ(z)` for a standard normal `Z`.
pub fn ramp_mean(z: f64) -> f64 {
    if z > 0.0 {
        z + ramp_mean(-z)
    } else {
        let w = -z;
        norm_pdf(w) * mills_q(w)
    }
}

/// Probabilists' Hermite polynomials `He_0..=He_k` at `z`.
pub fn hermite_he(z: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(z);
    }
    for j in 1..k {
        let next = z * out[j] - j as f64 * out[j - 1];
        out.push(next);
    }
    out
}

/// Derivatives `0..=k` of `u ↦ e^{−π a u²}` at `u`.
pub fn gaussian_derivs(a: f64, u: f64, k: usize) -> Vec<f64> {
    let c = (2.0 * PI * a).sqrt();
    let z = c * u;
    let base = (-0.5 * z * z).exp();
    let he = hermite_he(z, k);
    let mut scale = 1.0;
    he.iter()
        .map(|h| {
            let v = scale * h * base;
            scale *= -c;
            v
        })
        .collect()
}

/// Hat-Gauss window parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatGauss {
    pub a: f64,
    pub s: f64,
}

impl HatGauss {
    fn sigma(&self) -> f64 {
        self.s * INV_SQRT_2PI
    }

    /// `ψ(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let a = self.a;
        let sig = self.sigma();
        // ψ is even.
        let x = -x.abs();
        if x <= -a {
            // All three ramps sit in the left tail: factor out φ(w₊).
            let wp = -(x + a) / sig;
            let w0 = -x / sig;
            let wm = -(x - a) / sig;
            let d = a / sig;
            let e0 = (-0.5 * d * (w0 + wp)).exp();
            let em = (-0.5 * 2.0 * d * (wm + wp)).exp();
            let bracket = mills_q(wp) - 2.0 * mills_q(w0) * e0 + mills_q(wm) * em;
            sig / a * norm_pdf(wp) * bracket
        } else {
            let r = |y: f64| ramp_mean(y / sig);
            sig / a * (r(x + a) - 2.0 * r(x) + r(x - a))
        }
    }

    /// Derivatives `ψ^{(j)}(x)` for `j = 0..=k`.
    pub fn derivs(&self, x: f64, k: usize) -> Vec<f64> {
        let a = self.a;
        let sig = self.sigma();
        // ψ^{(j)}(x) = (−1)^j ψ^{(j)}(−x); evaluate on the left half-line.
        let flip = x > 0.0;
        let xl = -x.abs();
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.eval(xl));
        if k >= 1 {
            let g = |y: f64| norm_cdf(y / sig);
            out.push((g(xl + a) - 2.0 * g(xl) + g(xl - a)) / a);
        }
        if k >= 2 {
            // g_s^{(j)}(y) = (−1)^j σ^{−j−1} He_j(y/σ) φ(y/σ)
            let gd = |y: f64| -> Vec<f64> {
                let z = y / sig;
                let he = hermite_he(z, k - 2);
                let base = norm_pdf(z) / sig;
                let mut scale = 1.0;
                he.iter()
                    .map(|h| {
                        let v = scale * h * base;
                        scale *= -1.0 / sig;
                        v
                    })
                    .collect()
            };
            let (p, c, m) = (gd(xl + a), gd(xl), gd(xl - a));
            for j in 0..=k - 2 {
                out.push((p[j] - 2.0 * c[j] + m[j]) / a);
            }
        }
        if flip {
            for (j, v) in out.iter_mut().enumerate() {
                if j % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule on `[lo, hi]` with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn mills_branches_agree() {
        for w in [5.0, 5.5, 6.0, 8.0] {
            let direct = 1.0 - w * norm_cdf(-w) / norm_pdf(w);
            let cf = mills_q(w + 1e-300);
            assert!((direct - cf).abs() / cf < 1e-11, "w = {w}: {direct} vs {cf}");
        }
        // Asymptotics q(w) ≈ 1/w² − 3/w⁴.
        let w = 40.0;
        let q = mills_q(w);
        assert!((q - (1.0 / (w * w) - 3.0 / w.powi(4))).abs() < 20.0 / w.powi(6));
    }

    #[test]
    fn hat_gauss_matches_direct_convolution() {
        for (a, s) in [(1.0, 1.0), (0.5, 1.0), (2.0, 0.3)] {
            let hg = HatGauss { a, s };
            for x in [-2.5, -1.0, -0.3, 0.0, 0.7, 1.9] {
                // ∫ hat_a(x − t) g_s(t) dt over the hat support.
                let conv = simpson(
                    |t| {
                        let u = x - t;
                        let hat = (1.0 - u.abs() / a).max(0.0);
                        hat * (-PI * t * t / (s * s)).exp() / s
                    },
                    x - a,
                    x + a,
                    20_000,
                );
                assert!((hg.eval(x) - conv).abs() < 1e-10, "a={a} s={s} x={x}");
            }
        }
    }

    #[test]
    fn hat_gauss_tail_is_positive_and_continuous() {
        let hg = HatGauss { a: 1.0, s: 1.0 };
        for i in 0..=512 {
            let x = -16.0 + i as f64 / 16.0;
            assert!(hg.eval(x) > 0.0, "x = {x}");
        }
        // The branch switch at x = −a is continuous.
        let l = hg.eval(-1.0 - 1e-12);
        let r = hg.eval(-1.0 + 1e-12);
        assert!((l - r).abs() < 1e-11);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let hg = HatGauss { a: 1.0, s: 0.8 };
        let h = 1e-5;
        for x in [-1.7, -0.4, 0.0, 0.6, 1.3] {
            let d = hg.derivs(x, 4);
            for j in 0..4 {
                let fd = (hg.derivs(x + h, j)[j] - hg.derivs(x - h, j)[j]) / (2.0 * h);
                assert!((fd - d[j + 1]).abs() < 1e-5 * (1.0 + d[j + 1].abs()), "x={x} j={j}");
            }
        }
        let g = gaussian_derivs(1.0, 0.3, 3);
        let f = |u: f64| (-PI * u * u).exp();
        assert!((g[0] - f(0.3)).abs() < 1e-16);
        assert!((g[1] - (-2.0 * PI * 0.3 * f(0.3))).abs() < 1e-14);
    }
}
