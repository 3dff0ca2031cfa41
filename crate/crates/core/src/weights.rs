//! Radial weights and their moderation certificates.
//!
//! A weight `η` is moderate with certificate `(C, τ)` when
//! `η(x+y) <= C η(x) e^{A(τ|y|)}` for all `x, y`. Certificates are checked in
//! the log domain on finite sample grids.

use std::fmt;

use crate::error::{Error, Result};
use crate::gevrey::GevreySequence;

/// Half-width of the canonical moderation grid.
pub const CANONICAL_HALF_WIDTH: f64 = 32.0;
/// Step of the canonical moderation grid.
pub const CANONICAL_STEP: f64 = 0.5;
/// Numerical tolerance for a moderation check to count as satisfied.
pub const MODERATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Constant,
    /// `(1+|x|)^s`
    Polynomial { s: f64 },
    /// `e^{k|x|^{1/σ}}`
    SubExponential { k: f64, sigma: f64 },
    /// `e^{s·A(τ|x|)}`
    AssocExp { s: f64, tau: f64, seq: GevreySequence },
    /// `e^{ln_c + s·M(τ|x|)}`; with `s = 1` the upper envelope `C e^{M(τ|x|)}`
    /// produced from a certificate.
    Envelope { ln_c: f64, s: f64, tau: f64, seq: GevreySequence },
    /// `w0^{1−θ} w1^θ`
    Interpolated {
        w0: Box<WeightKind>,
        w1: Box<WeightKind>,
        theta: f64,
    },
}

impl WeightKind {
    /// `ln η` at radius `r = |x|`.
    pub fn ln_eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            WeightKind::Constant => 0.0,
            WeightKind::Polynomial { s } => s * r.ln_1p(),
            WeightKind::SubExponential { k, sigma } => k * r.powf(1.0 / sigma),
            WeightKind::AssocExp { s, tau, seq } => {
                if *s == 0.0 {
                    0.0
                } else {
                    s * seq.assoc_value(tau * r)
                }
            }
            WeightKind::Envelope { ln_c, s, tau, seq } => ln_c + s * seq.assoc_value(tau * r),
            WeightKind::Interpolated { w0, w1, theta } => {
                (1.0 - theta) * w0.ln_eval(r) + theta * w1.ln_eval(r)
            }
        }
    }

    pub fn negated(&self) -> WeightKind {
        match self {
            WeightKind::Constant => WeightKind::Constant,
            WeightKind::Polynomial { s } => WeightKind::Polynomial { s: -s },
            WeightKind::SubExponential { k, sigma } => WeightKind::SubExponential { k: -k, sigma: *sigma },
            WeightKind::AssocExp { s, tau, seq } => WeightKind::AssocExp {
                s: -s,
                tau: *tau,
                seq: seq.clone(),
            },
            WeightKind::Envelope { ln_c, s, tau, seq } => WeightKind::Envelope {
                ln_c: -ln_c,
                s: -s,
                tau: *tau,
                seq: seq.clone(),
            },
            WeightKind::Interpolated { w0, w1, theta } => WeightKind::Interpolated {
                w0: Box::new(w0.negated()),
                w1: Box::new(w1.negated()),
                theta: *theta,
            },
        }
    }

    /// Default `τ` used when deriving a certificate relative to `seq`.
    fn default_tau(&self, seq: &GevreySequence) -> f64 {
        let sigma_a = if seq.is_gevrey() { seq.sigma() } else { 1.0 };
        match self {
            WeightKind::Constant | WeightKind::Polynomial { .. } => 1.0,
            WeightKind::SubExponential { k, .. } => (2.0 * k.abs()).powf(sigma_a).max(1.0),
            WeightKind::AssocExp { s, tau, seq: own } => {
                let so = if own.is_gevrey() { own.sigma() } else { 1.0 };
                ((2.0 * s.abs()).powf(so) * tau).max(1.0)
            }
            WeightKind::Envelope { s, tau, seq: own, .. } => {
                let so = if own.is_gevrey() { own.sigma() } else { 1.0 };
                ((2.0 * s.abs()).powf(so) * tau).max(1.0)
            }
            WeightKind::Interpolated { w0, w1, .. } => w0.default_tau(seq).max(w1.default_tau(seq)),
        }
    }

    /// A weight `ω` with `η(x+y) <= η(x) ω(y)` that has a closed form, when
    /// one is available without a certificate.
    fn exact_envelope(&self) -> Option<WeightKind> {
        match self {
            WeightKind::Constant => Some(WeightKind::Constant),
            WeightKind::Polynomial { s } => Some(WeightKind::Polynomial { s: s.abs() }),
            WeightKind::SubExponential { k, sigma } => Some(WeightKind::SubExponential {
                k: k.abs(),
                sigma: *sigma,
            }),
            WeightKind::Interpolated { w0, w1, theta } => Some(WeightKind::Interpolated {
                w0: Box::new(w0.exact_envelope()?),
                w1: Box::new(w1.exact_envelope()?),
                theta: *theta,
            }),
            _ => None,
        }
    }
}

/// Moderation certificate `(C, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moderation {
    pub c: f64,
    pub tau: f64,
}

/// A positive continuous radial weight with a moderation certificate relative
/// to a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: WeightKind,
    cert: Moderation,
    seq: GevreySequence,
}

/// Worst case of a moderation check. `slack` is
/// `ln C + A(τ|y|) − ln η(x+y) + ln η(x)` minimised over the sample pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModerationReport {
    pub slack: f64,
    /// The worst pair, if it violates the bound.
    pub witness: Option<(f64, f64)>,
}

impl ModerationReport {
    pub fn ok(&self) -> bool {
        self.slack >= -MODERATION_TOL
    }
}

impl Weight {
    /// `η ≡ 1`.
    pub fn constant() -> Weight {
        Weight {
            kind: WeightKind::Constant,
            cert: Moderation { c: 1.0, tau: 1.0 },
            seq: GevreySequence::default(),
        }
    }

    /// `(1+|x|)^s` certified against the `σ = 1` sequence.
    pub fn poly(s: f64) -> Weight {
        Weight::certified(WeightKind::Polynomial { s }, &GevreySequence::default())
    }

    pub fn subexp(k: f64, sigma: f64) -> Result<Weight> {
        if !(sigma >= 1.0) {
            return Err(Error::param("sigma", "sub-exponential weights need sigma >= 1"));
        }
        Ok(Weight::certified(
            WeightKind::SubExponential { k, sigma },
            &GevreySequence::default(),
        ))
    }

    pub fn assoc(s: f64, tau: f64, seq: &GevreySequence) -> Result<Weight> {
        if !(tau > 0.0) {
            return Err(Error::param("tau", "must be > 0"));
        }
        Ok(Weight::certified(
            WeightKind::AssocExp {
                s,
                tau,
                seq: seq.clone(),
            },
            seq,
        ))
    }

    /// `η₀^{1−θ} η₁^θ`.
    pub fn interpolate(w0: &Weight, w1: &Weight, theta: f64) -> Weight {
        let kind = WeightKind::Interpolated {
            w0: Box::new(w0.kind.clone()),
            w1: Box::new(w1.kind.clone()),
            theta,
        };
        Weight::certified(kind, &w0.seq)
    }

    /// Wraps `kind` with a certificate derived against `seq`: `τ` is a
    /// kind-specific default and `C` the smallest constant that makes the
    /// bound hold on the canonical grid and, where the kind has an exact
    /// translation envelope, on the radial envelope up to `|y| = 128`.
    pub fn certified(kind: WeightKind, seq: &GevreySequence) -> Weight {
        let tau = kind.default_tau(seq);
        let mut ln_c: f64 = 0.0;
        let probe = Weight {
            kind: kind.clone(),
            cert: Moderation { c: 1.0, tau },
            seq: seq.clone(),
        };
        let rep = check_moderate(&probe, seq, 1.0, tau, &canonical_pairs());
        ln_c = ln_c.max(-rep.slack);
        if let Some(env) = kind.exact_envelope() {
            for i in 0..=128 * 16 {
                let r = i as f64 / 16.0;
                ln_c = ln_c.max(env.ln_eval(r) - seq.assoc_value(tau * r));
            }
        }
        Weight {
            kind,
            cert: Moderation { c: ln_c.exp(), tau },
            seq: seq.clone(),
        }
    }

    /// Wraps `kind` with a user-claimed certificate (not verified here).
    pub fn with_claimed(kind: WeightKind, cert: Moderation, seq: &GevreySequence) -> Weight {
        Weight {
            kind,
            cert,
            seq: seq.clone(),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn certificate(&self) -> Moderation {
        self.cert
    }

    /// Sequence the certificate refers to.
    pub fn sequence(&self) -> &GevreySequence {
        &self.seq
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, WeightKind::Constant)
    }

    pub fn ln_eval(&self, x: f64) -> f64 {
        self.kind.ln_eval(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.kind.ln_eval(x).exp()
    }

    /// Evaluation at a point of ℝⁿ (the weight is radial).
    pub fn eval_at(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.eval(r)
    }

    /// `1/η`, recertified.
    pub fn inverse(&self) -> Weight {
        Weight::certified(self.kind.negated(), &self.seq)
    }

    /// Upper bound of the translation operator norm `y ↦ sup_x η(x+y)/η(x)`:
    /// exact Peetre-type envelopes where available, otherwise `C e^{A(τ|y|)}`
    /// from the certificate.
    pub fn moderation_envelope(&self) -> Weight {
        let kind = self.kind.exact_envelope().unwrap_or(WeightKind::Envelope {
            ln_c: self.cert.c.ln(),
            s: 1.0,
            tau: self.cert.tau,
            seq: self.seq.clone(),
        });
        Weight::certified(kind, &self.seq)
    }

    /// Parses `const`, `poly:S`, `subexp:k=K,sigma=S`, `assoc:s=S,tau=T`.
    /// `seq` backs `assoc:` weights and every certificate.
    pub fn parse(literal: &str, seq: &GevreySequence) -> Result<Weight> {
        let lit = literal.trim();
        let (head, rest) = match lit.split_once(':') {
            Some((h, r)) => (h.trim(), r.trim()),
            None => (lit, ""),
        };
        let bad = |m: &str| Error::parse("weight", format!("{m} in `{lit}`"));
        let kind = match head {
            "const" | "1" => {
                if !rest.is_empty() {
                    return Err(bad("`const` takes no parameters"));
                }
                WeightKind::Constant
            }
            "poly" => {
                let s = rest.parse::<f64>().map_err(|_| bad("expected poly:<exponent>"))?;
                WeightKind::Polynomial { s }
            }
            "subexp" => {
                let kv = parse_kv(rest, &["k", "sigma"]).map_err(|m| bad(&m))?;
                let sigma = kv[1].unwrap_or(1.0);
                if !(sigma >= 1.0) {
                    return Err(bad("sigma must be >= 1"));
                }
                WeightKind::SubExponential {
                    k: kv[0].ok_or_else(|| bad("missing k"))?,
                    sigma,
                }
            }
            "assoc" => {
                let kv = parse_kv(rest, &["s", "tau"]).map_err(|m| bad(&m))?;
                let tau = kv[1].unwrap_or(1.0);
                if !(tau > 0.0) {
                    return Err(bad("tau must be > 0"));
                }
                WeightKind::AssocExp {
                    s: kv[0].ok_or_else(|| bad("missing s"))?,
                    tau,
                    seq: seq.clone(),
                }
            }
            _ => return Err(bad("unknown weight kind")),
        };
        Ok(Weight::certified(kind, seq))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_kind(&self.kind, f)
    }
}

fn fmt_kind(kind: &WeightKind, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match kind {
        WeightKind::Constant => write!(f, "const"),
        WeightKind::Polynomial { s } => write!(f, "poly:{s}"),
        WeightKind::SubExponential { k, sigma } => write!(f, "subexp:k={k},sigma={sigma}"),
        WeightKind::AssocExp { s, tau, .. } => write!(f, "assoc:s={s},tau={tau}"),
        WeightKind::Envelope { ln_c, s, tau, .. } => write!(f, "env:lnc={ln_c},s={s},tau={tau}"),
        WeightKind::Interpolated { w0, w1, theta } => {
            write!(f, "interp(")?;
            fmt_kind(w0, f)?;
            write!(f, "|")?;
            fmt_kind(w1, f)?;
            write!(f, "|{theta})")
        }
    }
}

/// Parses `k1=v1,k2=v2` against an ordered key list.
pub(crate) fn parse_kv(s: &str, keys: &[&str]) -> std::result::Result<Vec<Option<f64>>, String> {
    let mut out = vec![None; keys.len()];
    if s.trim().is_empty() {
        return Ok(out);
    }
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        let idx = keys
            .iter()
            .position(|key| *key == k.trim())
            .ok_or_else(|| format!("unknown key `{}`", k.trim()))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad number `{}`", v.trim()))?;
        out[idx] = Some(v);
    }
    Ok(out)
}

/// All pairs of the canonical grid `[−32, 32]²` with step ½.
pub fn canonical_pairs() -> Vec<(f64, f64)> {
    let n = (2.0 * CANONICAL_HALF_WIDTH / CANONICAL_STEP) as i64;
    let pts: Vec<f64> = (0..=n)
        .map(|i| -CANONICAL_HALF_WIDTH + i as f64 * CANONICAL_STEP)
        .collect();
    pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y))).collect()
}

/// Checks `ln η(x+y) − ln η(x) <= ln C + A(τ|y|)` on every pair.
pub fn check_moderate(
    w: &Weight,
    seq: &GevreySequence,
    c: f64,
    tau: f64,
    pairs: &[(f64, f64)],
) -> ModerationReport {
    let ln_c = c.ln();
    let mut worst = f64::INFINITY;
    let mut at = (f64::NAN, f64::NAN);
    let mut a_cache: Vec<(f64, f64)> = Vec::new();
    for &(x, y) in pairs {
        let ay = match a_cache.iter().find(|(r, _)| *r == y.abs()) {
            Some((_, v)) => *v,
            None => {
                let v = seq.assoc_value(tau * y.abs());
                if a_cache.len() < 4096 {
                    a_cache.push((y.abs(), v));
                }
                v
            }
        };
        let slack = ln_c + ay - (w.ln_eval(x + y) - w.ln_eval(x));
        if slack < worst {
            worst = slack;
            at = (x, y);
        }
    }
    let report = ModerationReport {
        slack: worst,
        witness: None,
    };
    if report.ok() {
        report
    } else {
        ModerationReport {
            witness: Some(at),
            ..report
        }
    }
}
