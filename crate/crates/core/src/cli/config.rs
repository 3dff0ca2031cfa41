//! Line-oriented `key = value` experiment files.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Grid, SampledField};
use crate::gevrey::GevreySequence;
use crate::local_norms::LocalSpace;
use crate::weights::Weight;

/// Every key the front end understands.
pub const KEYS: &[&str] = &[
    "sigma", "L", "delta", "weight", "f", "chi", "phi", "E", "p", "q", "a", "s", "L_pts", "h",
    "K", "eps", "seed", "trials", "family", "cond", "rho", "c", "tau",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::parse(key, "unknown key"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::parse(key, format!("expected a nonnegative integer, got `{v}`"))),
        }
    }

    pub fn sequence(&self) -> Result<GevreySequence> {
        let sigma = self.f64_or("sigma", 1.0)?;
        GevreySequence::new(sigma).map_err(|e| Error::param("sigma", e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid> {
        let l = self.f64_or("L", crate::field::DEFAULT_HALF_WIDTH)?;
        let d = self.f64_or("delta", crate::field::DEFAULT_STEP)?;
        Grid::new(l, d).map_err(|e| Error::param("delta", e.to_string()))
    }

    pub fn weight(&self, seq: &GevreySequence) -> Result<Weight> {
        let lit = self.get("weight").unwrap_or("const");
        Weight::parse(lit, seq).map_err(|e| rekey("weight", e))
    }

    pub fn field(&self, key: &str, default: &str, grid: Grid) -> Result<SampledField> {
        let lit = self.get(key).unwrap_or(default);
        SampledField::parse(lit, grid).map_err(|e| rekey(key, e))
    }

    pub fn local(&self, seq: &GevreySequence) -> Result<LocalSpace> {
        let lit = self.get("E").unwrap_or("lp:p=2,weight=const");
        LocalSpace::parse(lit, seq).map_err(|e| rekey("E", e))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| !x.is_nan())
        .ok_or_else(|| Error::parse(key, format!("expected a number, got `{v}`")))
}

/// Names the offending key in a literal error.
fn rekey(key: &str, e: Error) -> Error {
    match e {
        Error::Parse { msg, .. } | Error::InvalidParameter { msg, .. } => Error::parse(key, msg),
        other => Error::parse(key, other.to_string()),
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# stock run\nsigma = 1\nf = sum:[gauss:x0=1,xi0=0,a=1;gauss:x0=-1,xi0=2,a=0.5]\nE = lp:p=2,weight=const\nweight = assoc:s=1,tau=0.5\n\np = inf\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_string()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.f64_or("p", 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let e = ExperimentConfig::parse("gamma = 2").unwrap_err();
        assert!(e.to_string().contains("gamma"));
        let e = ExperimentConfig::parse("sigma 2").unwrap_err();
        assert!(e.to_string().contains("line 1"));
        let cfg = ExperimentConfig::parse("f = gauss:x0=zz").unwrap();
        let e = cfg.field("f", "zero", Grid::default()).unwrap_err();
        assert!(e.to_string().contains("`f`"), "{e}");
        let cfg = ExperimentConfig::parse("delta = 0.3").unwrap();
        assert!(cfg.grid().unwrap_err().to_string().contains("`delta`"));
    }
}
