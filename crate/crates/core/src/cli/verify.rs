//! The `verify` experiments. Every experiment returns its rows in a fixed
//! order; randomised sweeps draw from `ChaCha8Rng::seed_from_u64`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::report::ReportRow;
use crate::amalgam::{
    continuous_norm, equivalence_report, gaussian_family, retraction_error, window_independence, AmalgamSpec,
    Global,
};
use crate::duality_interp::{duality_bound_check, interpolation_convexity, modulation_vs_amalgam, WeightedSequence};
use crate::error::{Error, Result};
use crate::field::{lemma22_decay_check, GaussianForm, Grid, SampledField};
use crate::gevrey::{log_spaced, GevreySequence};
use crate::local_norms::LocalSpace;
use crate::ucpu::{build_lattice_ucpu_on, lemma39_tail_radius, PointSet, Ucpu, PARTITION_TOL};
use crate::weights::Weight;

pub const EXPERIMENTS: &[&str] = &[
    "gaussian",
    "partition",
    "equivalence",
    "window",
    "retraction",
    "duality",
    "interp",
    "modulation",
    "tail",
    "assoc",
    "decay",
];

/// Offset added to `--seed` for the interpolation sweep, so that it does not
/// replay the duality stream.
const INTERP_SEED_OFFSET: u64 = 1;

pub fn run(which: &str, cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    if which == "all" {
        let mut rows = Vec::new();
        for name in EXPERIMENTS {
            rows.extend(run(name, cfg)?);
        }
        return Ok(rows);
    }
    let ctx = Ctx::new(cfg)?;
    match which {
        "gaussian" => ctx.gaussian(),
        "partition" => ctx.partition(),
        "equivalence" => ctx.equivalence(),
        "window" => ctx.window(),
        "retraction" => ctx.retraction(),
        "duality" => ctx.duality(),
        "interp" => ctx.interp(),
        "modulation" => ctx.modulation(),
        "tail" => ctx.tail(),
        "assoc" => ctx.assoc(),
        "decay" => ctx.decay(),
        other => Err(Error::parse("verify", format!("unknown experiment `{other}`"))),
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    seq: GevreySequence,
    grid: Grid,
    a: f64,
    s: f64,
    l_pts: f64,
}

fn rel_change(new: f64, old: f64) -> f64 {
    (new / old - 1.0).abs()
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        Ok(Ctx {
            cfg,
            seq: cfg.sequence()?,
            grid: cfg.grid()?,
            a: cfg.f64_or("a", 1.0)?,
            s: cfg.f64_or("s", 1.0)?,
            l_pts: cfg.f64_or("L_pts", 12.0)?,
        })
    }

    fn ucpu(&self, grid: Grid, a: f64) -> Result<Ucpu> {
        build_lattice_ucpu_on(grid, a, self.s, self.l_pts)
    }

    fn family(&self, grid: &Grid) -> Result<Vec<SampledField>> {
        match self.cfg.get("family").unwrap_or("gauss9") {
            "gauss9" => Ok(gaussian_family(grid)),
            other => Err(Error::parse("family", format!("unknown family `{other}`"))),
        }
    }

    fn exponents(&self, default: &[f64]) -> Result<Vec<f64>> {
        match self.cfg.f64_opt("p")? {
            Some(p) => Ok(vec![Global::lp(p)?.exponent()]),
            None => Ok(default.to_vec()),
        }
    }

    fn weights(&self) -> Result<Vec<(String, Weight)>> {
        match self.cfg.get("weight") {
            Some(lit) => Ok(vec![(lit.to_string(), self.cfg.weight(&self.seq)?)]),
            None => Ok(vec![
                ("const".into(), Weight::constant()),
                ("poly:1".into(), Weight::poly(1.0)),
            ]),
        }
    }

    fn local(&self) -> Result<LocalSpace> {
        self.cfg.local(&self.seq)
    }

    fn gaussian(&self) -> Result<Vec<ReportRow>> {
        let g = GaussianForm::default().sample(&self.grid);
        let l2 = LocalSpace::weighted_lp(2.0, Weight::constant())?;
        let mut rows = Vec::new();
        for (p, exact) in [(1.0, 1.0), (2.0, 0.5f64.sqrt())] {
            let v = continuous_norm(&g, &g, &AmalgamSpec::new(l2.clone(), Global::Lp(p), Weight::constant()))?.value;
            rows.push(ReportRow::new("gaussian", "continuous_norm", format!("p={p}"), v, 1e-7 - (v - exact).abs(), 0.0));
        }
        Ok(rows)
    }

    fn partition(&self) -> Result<Vec<ReportRow>> {
        let u = self.ucpu(self.grid, self.a)?;
        let core = u.default_core();
        let r = u.partition_deviation(core);
        Ok(vec![ReportRow::new(
            "partition",
            "condition4",
            format!("a={};s={};L_pts={};core={core}", self.a, self.s, self.l_pts),
            r.deviation,
            PARTITION_TOL - r.deviation,
            0.0,
        )])
    }

    fn equivalence(&self) -> Result<Vec<ReportRow>> {
        let e = self.local()?;
        let fine = self.grid.refined();
        let base_u = self.ucpu(self.grid, self.a)?;
        let fine_u = self.ucpu(fine, self.a)?;
        let half_u = self.ucpu(self.grid, self.a / 2.0)?;
        let (fam, fam_fine) = (self.family(&self.grid)?, self.family(&fine)?);
        let chi = GaussianForm::default().sample(&self.grid);
        let chi_fine = GaussianForm::default().sample(&fine);
        let mut rows = Vec::new();
        for p in self.exponents(&[1.0, 2.0, f64::INFINITY])? {
            for (wl, w) in self.weights()? {
                let spec = AmalgamSpec::new(e.clone(), Global::Lp(p), w);
                let base = equivalence_report(&fam, &chi, &spec, &base_u)?.spread;
                let dx = equivalence_report(&fam_fine, &chi_fine, &spec, &fine_u)?.spread;
                let ah = equivalence_report(&fam, &chi, &spec, &half_u)?.spread;
                let params = format!("p={};eta={wl}", p_label(p));
                rows.push(ReportRow::new("equivalence", "spread", &params, base, 10.0 - base, 0.0));
                let c = rel_change(dx, base);
                rows.push(ReportRow::new("equivalence", "delta_half", &params, c, 0.05 - c, 0.0));
                let c = rel_change(ah, base);
                rows.push(ReportRow::new("equivalence", "a_half", &params, c, 0.25 - c, 0.0));
            }
        }
        Ok(rows)
    }

    fn window(&self) -> Result<Vec<ReportRow>> {
        let e = self.local()?;
        let fine = self.grid.refined();
        let mut rows = Vec::new();
        let windows = |g: &Grid| -> Result<(SampledField, SampledField)> {
            Ok((GaussianForm::new(0.0, 0.0, 1.0)?.sample(g), GaussianForm::new(0.0, 0.0, 4.0)?.sample(g)))
        };
        let (c1, c2) = windows(&self.grid)?;
        let (f1, f2) = windows(&fine)?;
        let (fam, fam_fine) = (self.family(&self.grid)?, self.family(&fine)?);
        for p in self.exponents(&[1.0, 2.0, f64::INFINITY])? {
            for (wl, w) in self.weights()? {
                let spec = AmalgamSpec::new(e.clone(), Global::Lp(p), w);
                let base = window_independence(&fam, &c1, &c2, &spec)?.spread;
                let dx = window_independence(&fam_fine, &f1, &f2, &spec)?.spread;
                let params = format!("p={};eta={wl}", p_label(p));
                rows.push(ReportRow::new("window", "spread", &params, base, 10.0 - base, 0.0));
                let c = rel_change(dx, base);
                rows.push(ReportRow::new("window", "delta_half", &params, c, 0.05 - c, 0.0));
            }
        }
        Ok(rows)
    }

    fn retraction(&self) -> Result<Vec<ReportRow>> {
        let u = self.ucpu(self.grid, self.a)?;
        let core = u.default_core();
        self.family(&self.grid)?
            .iter()
            .map(|f| {
                let err = retraction_error(f, &u, core)?;
                let id = f.closed_form().map(|c| c.to_string()).unwrap_or_default();
                Ok(ReportRow::new("retraction", "relative_l2", format!("f={id};core={core}"), err, 1e-8 - err, 0.0))
            })
            .collect()
    }

    fn duality(&self) -> Result<Vec<ReportRow>> {
        let trials = self.cfg.u64_or("trials", 200)?;
        let seed = self.cfg.u64_or("seed", 7)?;
        let ps = self.exponents(&[1.0, 2.0, 4.0])?;
        let weights = self.weights()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi0 = GaussianForm::default().sample(&self.grid);
        let draw = |rng: &mut ChaCha8Rng| -> Result<GaussianForm> {
            let x0 = rng.gen_range(-3.0..=3.0);
            let xi0 = rng.gen_range(-2.0..=2.0);
            let a = rng.gen_range(0.5..=2.0);
            GaussianForm::new(x0, xi0, a)
        };
        let mut rows = Vec::new();
        for t in 0..trials as usize {
            let (gf, gp) = (draw(&mut rng)?, draw(&mut rng)?);
            let p = ps[t % ps.len()];
            let (wl, w) = &weights[(t / ps.len()) % weights.len()];
            let e = LocalSpace::weighted_lp(p, Weight::constant())?;
            let ed = e.holder_dual().expect("weighted L^p has a dual");
            let r = duality_bound_check(&gf.sample(&self.grid), &gp.sample(&self.grid), &chi0, &e, &ed, p, w)?;
            let params = format!("trial={t};p={p};eta={wl};f=({},{},{});phi=({},{},{})", gf.x0, gf.xi0, gf.a, gp.x0, gp.xi0, gp.a);
            rows.push(ReportRow::new("duality", "pairing_bound", params, r.lhs, r.slack, 1e-7));
        }
        let l2 = LocalSpace::weighted_lp(2.0, Weight::constant())?;
        let r = duality_bound_check(&chi0, &chi0, &chi0, &l2, &l2, 2.0, &Weight::constant())?;
        rows.push(ReportRow::new("duality", "sharpness", "p=2", r.slack, 1e-7 - r.slack.abs(), 0.0));
        Ok(rows)
    }

    fn interp(&self) -> Result<Vec<ReportRow>> {
        let trials = self.cfg.u64_or("trials", 500)?;
        let seed = self.cfg.u64_or("seed", 7)?.wrapping_add(INTERP_SEED_OFFSET);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let one = Weight::constant();
        let poly = Weight::poly(1.0);
        let exponent = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.1) {
                f64::INFINITY
            } else {
                1.0 + 5.0 * rng.gen::<f64>()
            }
        };
        let mut rows = Vec::new();
        for t in 0..trials {
            let len = rng.gen_range(1..=8);
            let points: Vec<f64> = sample(&mut rng, 21, len).into_iter().map(|i| i as f64 - 10.0).collect();
            let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let (p0, p1) = (exponent(&mut rng), exponent(&mut rng));
            let theta = rng.gen_range(0.01..0.99);
            let c = WeightedSequence::new(points, values)?;
            let r = interpolation_convexity(&c, p0, p1, &one, &poly, theta)?;
            let params = format!("trial={t};p0={};p1={};theta={theta}", p_label(p0), p_label(p1));
            rows.push(ReportRow::new("interp", "log_convexity", params, r.lhs, r.slack, 1e-12));
        }
        let pair = WeightedSequence::new(vec![0.0, 1.0], vec![1.0, 1.0])?;
        let r = interpolation_convexity(&pair, 1.0, f64::INFINITY, &one, &one, 0.5)?;
        rows.push(ReportRow::new("interp", "equality_pair", "p0=1;p1=inf;theta=0.5", r.slack, 1e-12 - r.slack.abs(), 0.0));
        let single = WeightedSequence::new(vec![2.0], vec![0.75])?;
        let r = interpolation_convexity(&single, 1.5, 3.0, &one, &poly, 0.3)?;
        rows.push(ReportRow::new("interp", "equality_singleton", "p0=1.5;p1=3;theta=0.3", r.slack, 1e-12 - r.slack.abs(), 0.0));
        Ok(rows)
    }

    fn modulation(&self) -> Result<Vec<ReportRow>> {
        let g = GaussianForm::default().sample(&self.grid);
        let mut rows = Vec::new();
        for p in [1.0, 2.0] {
            for q in [1.0, 2.0] {
                let r = modulation_vs_amalgam(&g, &g, p, q, &Weight::constant())?;
                let dev = (r.ratio - 1.0).abs();
                rows.push(ReportRow::new("modulation", "ratio", format!("p={p};q_inner={q}"), r.ratio, 1e-6 - dev, 0.0));
            }
        }
        Ok(rows)
    }

    fn tail(&self) -> Result<Vec<ReportRow>> {
        let pts = PointSet::lattice_1d(1.0, 50.0)?;
        let h = self.cfg.f64_or("h", 1.0)?;
        let mut rows = Vec::new();
        for eps in [0.1, 0.01] {
            let r = lemma39_tail_radius(&pts, &self.seq, h, eps)?;
            let params = format!("eps={eps};h={h}");
            rows.push(ReportRow::new("tail", "R_exact", &params, r.r_exact, eps - r.tail_at_exact, 0.0));
            let rc = r.r_constructive.unwrap_or(f64::NAN);
            rows.push(ReportRow::new("tail", "R_constructive", &params, rc, rc - r.r_exact, 0.0));
        }
        Ok(rows)
    }

    fn assoc(&self) -> Result<Vec<ReportRow>> {
        let mut rows = Vec::new();
        for sigma in [1.0, 2.0] {
            let seq = GevreySequence::new(sigma)?;
            let mut worst: f64 = 0.0;
            for rho in log_spaced(1e-2, 1e3, 100) {
                let m = seq.assoc_fn(rho)?.value;
                let naive = naive_assoc(&seq, rho, 10_000);
                worst = worst.max((m - naive).abs() / m.abs().max(1.0));
            }
            rows.push(ReportRow::new("assoc", "scan_vs_naive", format!("sigma={sigma};points=100"), worst, 1e-12 - worst, 0.0));
            let grid = log_spaced(1e-2, 1e2, 20);
            let pairs: Vec<(f64, f64)> = grid.iter().flat_map(|&r| grid.iter().map(move |&l| (r, l))).collect();
            let rep = seq.check_assoc_inequalities(&pairs)?;
            rows.push(ReportRow::new("assoc", "sum_inequality", format!("sigma={sigma}"), rep.sum_slack, rep.sum_slack, 1e-12));
            rows.push(ReportRow::new("assoc", "square_inequality", format!("sigma={sigma}"), rep.square_slack, rep.square_slack, 1e-12));
        }
        Ok(rows)
    }

    fn decay(&self) -> Result<Vec<ReportRow>> {
        let g = GaussianForm::default().sample(&self.grid);
        let r = lemma22_decay_check(&g, &GevreySequence::default(), 0.5, &Weight::constant(), 16, 8.0)?;
        Ok(vec![ReportRow::new("decay", "frequency_bound", "sigma=1;h=0.5;K=16;xi_max=8", r.seminorm, r.slack, 0.0)])
    }
}

/// `max_{p<=pmax} (p ln ρ − ln M_p)` by a full scan.
pub fn naive_assoc(seq: &GevreySequence, rho: f64, pmax: u64) -> f64 {
    (0..=pmax)
        .map(|p| p as f64 * rho.ln() - seq.log_value(p))
        .fold(f64::NEG_INFINITY, f64::max)
}
