//! Acceptance criteria 1 to 12, one line each. Exits nonzero on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use amalgam_lab::amalgam::{
    continuous_norm, equivalence_report, gaussian_family, retraction_error, window_independence, AmalgamSpec, Global,
};
use amalgam_lab::duality_interp::{duality_bound_check, interpolation_convexity, modulation_vs_amalgam, WeightedSequence};
use amalgam_lab::field::{lemma22_decay_check, GaussianForm, Grid, SampledField};
use amalgam_lab::gevrey::{log_spaced, GevreySequence};
use amalgam_lab::local_norms::LocalSpace;
use amalgam_lab::ucpu::{build_lattice_ucpu, build_lattice_ucpu_on, lemma39_tail_radius, PointSet};
use amalgam_lab::weights::Weight;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn l2() -> LocalSpace {
    LocalSpace::weighted_lp(2.0, Weight::constant()).unwrap()
}

fn gauss(grid: &Grid) -> SampledField {
    GaussianForm::default().sample(grid)
}

/// `x ↦ ‖g·T_xg‖₂²` for `g = e^{−π·²}`, on a 1000 × 1000 trapezoid grid
/// over `[−8, 8]²`; returns `(∫ sqrt, ∫ square)`.
fn reference_quadrature() -> (f64, f64) {
    let n = 1000;
    let h = 16.0 / n as f64;
    let g = |t: f64| (-std::f64::consts::PI * t * t).exp();
    let (mut one, mut two) = (0.0, 0.0);
    for i in 0..n {
        let x = -8.0 + (i as f64 + 0.5) * h;
        let mut inner = 0.0;
        for j in 0..n {
            let t = -8.0 + (j as f64 + 0.5) * h;
            let v = g(t) * g(t - x);
            inner += v * v;
        }
        inner *= h;
        one += inner.sqrt() * h;
        two += inner * h;
    }
    (one, two.sqrt())
}

fn c1() -> Outcome {
    let (q1, q2) = reference_quadrature();
    let exact = (1.0, 0.5f64.sqrt());
    if (q1 - exact.0).abs() > 1e-10 || (q2 - exact.1).abs() > 1e-10 {
        return Err(format!("reference quadrature disagrees: {q1} {q2}"));
    }
    let grid = Grid::default();
    let g = gauss(&grid);
    let v1 = continuous_norm(&g, &g, &AmalgamSpec::new(l2(), Global::Lp(1.0), Weight::constant())).unwrap().value;
    let v2 = continuous_norm(&g, &g, &AmalgamSpec::new(l2(), Global::Lp(2.0), Weight::constant())).unwrap().value;
    let (e1, e2) = ((v1 - q1).abs(), (v2 - q2).abs());
    check(e1 <= 1e-7 && e2 <= 1e-7, format!("W(L2,L1)={v1:.12} (err {e1:.1e}), W(L2,L2)={v2:.12} (err {e2:.1e})"))
}

fn c2() -> Outcome {
    let u = build_lattice_ucpu(1.0, 1.0, 12.0).unwrap();
    let r = u.partition_deviation(6.0);
    check(r.deviation <= 1e-10, format!("max deviation {:.2e} at x={}", r.deviation, r.at))
}

fn spread_change(new: f64, old: f64) -> f64 {
    (new / old - 1.0).abs()
}

fn c3() -> Outcome {
    let base_grid = Grid::default();
    let fine = base_grid.refined();
    let u = build_lattice_ucpu(1.0, 1.0, 12.0).unwrap();
    let uf = build_lattice_ucpu_on(fine, 1.0, 1.0, 12.0).unwrap();
    let uh = build_lattice_ucpu(0.5, 1.0, 12.0).unwrap();
    let (fam, famf) = (gaussian_family(&base_grid), gaussian_family(&fine));
    let (chi, chif) = (gauss(&base_grid), gauss(&fine));
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for p in [1.0, 2.0, f64::INFINITY] {
        for eta in [Weight::constant(), Weight::poly(1.0)] {
            let spec = AmalgamSpec::new(l2(), Global::Lp(p), eta);
            let b = equivalence_report(&fam, &chi, &spec, &u).unwrap().spread;
            let f = equivalence_report(&famf, &chif, &spec, &uf).unwrap().spread;
            let h = equivalence_report(&fam, &chi, &spec, &uh).unwrap().spread;
            let (cd, ca) = (spread_change(f, b), spread_change(h, b));
            ok &= b.is_finite() && b <= 10.0 && cd < 0.05 && ca < 0.25;
            worst = (worst.0.max(b), worst.1.max(cd), worst.2.max(ca));
        }
    }
    check(ok, format!("max spread {:.4}, max Δ-halving change {:.2e}, max a-halving change {:.2e}", worst.0, worst.1, worst.2))
}

fn c4() -> Outcome {
    let grid = Grid::default();
    let fine = grid.refined();
    let w = |g: &Grid, a: f64| GaussianForm::new(0.0, 0.0, a).unwrap().sample(g);
    let (fam, famf) = (gaussian_family(&grid), gaussian_family(&fine));
    let mut worst = (0.0f64, 0.0f64);
    let mut ok = true;
    for p in [1.0, 2.0, f64::INFINITY] {
        for eta in [Weight::constant(), Weight::poly(1.0)] {
            let spec = AmalgamSpec::new(l2(), Global::Lp(p), eta);
            let b = window_independence(&fam, &w(&grid, 1.0), &w(&grid, 4.0), &spec).unwrap().spread;
            let f = window_independence(&famf, &w(&fine, 1.0), &w(&fine, 4.0), &spec).unwrap().spread;
            let c = spread_change(f, b);
            ok &= b <= 10.0 && c < 0.05;
            worst = (worst.0.max(b), worst.1.max(c));
        }
    }
    check(ok, format!("max spread {:.4}, max Δ-halving change {:.2e}", worst.0, worst.1))
}

fn c5() -> Outcome {
    let u = build_lattice_ucpu(1.0, 1.0, 12.0).unwrap();
    let worst = gaussian_family(u.grid())
        .iter()
        .map(|f| retraction_error(f, &u, u.default_core()).unwrap())
        .fold(0.0, f64::max);
    check(worst <= 1e-8, format!("max relative L2 error {worst:.2e} on |x| <= {}", u.default_core()))
}

fn c6() -> Outcome {
    let grid = Grid::default();
    let chi0 = gauss(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut draw = || {
        let x0 = rng.gen_range(-3.0..=3.0);
        let xi0 = rng.gen_range(-2.0..=2.0);
        let a = rng.gen_range(0.5..=2.0);
        GaussianForm::new(x0, xi0, a).unwrap().sample(&grid)
    };
    let mut worst = f64::INFINITY;
    for t in 0..200 {
        let (f, phi) = (draw(), draw());
        let p = [1.0, 2.0, 4.0][t % 3];
        let eta = if (t / 3) % 2 == 0 { Weight::constant() } else { Weight::poly(1.0) };
        let e = LocalSpace::weighted_lp(p, Weight::constant()).unwrap();
        let r = duality_bound_check(&f, &phi, &chi0, &e, &e.holder_dual().unwrap(), p, &eta).unwrap();
        worst = worst.min(r.slack);
    }
    let sharp = duality_bound_check(&chi0, &chi0, &chi0, &l2(), &l2(), 2.0, &Weight::constant()).unwrap();
    check(
        worst >= -1e-7 && sharp.slack.abs() <= 1e-7,
        format!("min slack {worst:.3e} over 200 pairs, sharpness slack {:.1e}", sharp.slack),
    )
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (one, poly) = (Weight::constant(), Weight::poly(1.0));
    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let len = rng.gen_range(1..=8);
        let points: Vec<f64> = sample(&mut rng, 21, len).into_iter().map(|i| i as f64 - 10.0).collect();
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut exponent = || if rng.gen_bool(0.1) { f64::INFINITY } else { 1.0 + 5.0 * rng.gen::<f64>() };
        let (p0, p1) = (exponent(), exponent());
        let theta = rng.gen_range(0.01..0.99);
        let c = WeightedSequence::new(points, values).unwrap();
        worst = worst.min(interpolation_convexity(&c, p0, p1, &one, &poly, theta).unwrap().slack);
    }
    let pair = WeightedSequence::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
    let e1 = interpolation_convexity(&pair, 1.0, f64::INFINITY, &one, &one, 0.5).unwrap();
    let single = WeightedSequence::new(vec![4.0], vec![-0.3]).unwrap();
    let e2 = interpolation_convexity(&single, 1.0, 3.0, &one, &poly, 0.4).unwrap();
    let eq = (e1.lhs - e1.rhs).abs().max((e2.lhs - e2.rhs).abs());
    check(
        worst >= -1e-12 && eq <= 1e-12 && (e1.lhs - 2f64.sqrt()).abs() <= 1e-12,
        format!("min log-slack {worst:.2e} over 500 sequences, equality gap {eq:.1e}"),
    )
}

fn c8() -> Outcome {
    let g = gauss(&Grid::default());
    let mut worst: f64 = 0.0;
    for p in [1.0, 2.0] {
        for q in [1.0, 2.0] {
            let r = modulation_vs_amalgam(&g, &g, p, q, &Weight::constant()).unwrap();
            worst = worst.max((r.ratio - 1.0).abs());
        }
    }
    check(worst <= 1e-6, format!("max |ratio − 1| = {worst:.1e}"))
}

/// `A(ρ)` for `σ = 1` by a plain scan over `p <= 400`.
fn oracle_a(rho: f64) -> f64 {
    let mut lf = 0.0;
    let mut best: f64 = 0.0;
    for p in 1..=400u32 {
        lf += (p as f64).ln();
        best = best.max(p as f64 * rho.ln() - lf);
    }
    best
}

fn oracle_tail(r: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for m in -50i32..=50 {
        let s: f64 = (-50i32..=50)
            .map(|l| (l - m).abs() as f64)
            .filter(|d| *d > r)
            .map(|d| (-oracle_a(d)).exp())
            .sum();
        worst = worst.max(s);
    }
    worst
}

fn c9() -> Outcome {
    let pts = PointSet::lattice_1d(1.0, 50.0).unwrap();
    let seq = GevreySequence::new(1.0).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [0.1, 0.01] {
        let r = lemma39_tail_radius(&pts, &seq, 1.0, eps).unwrap();
        let tail = oracle_tail(r.r_exact);
        let rc = r.r_constructive.unwrap_or(f64::NAN);
        ok &= tail <= eps && r.r_exact <= rc;
        parts.push(format!("eps={eps}: R={} (tail {tail:.4}), constructive R={rc}", r.r_exact));
    }
    check(ok, parts.join("; "))
}

fn c10() -> Outcome {
    let mut worst_fit: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    for sigma in [1.0, 2.0] {
        let seq = GevreySequence::new(sigma).unwrap();
        let lnm: Vec<f64> = {
            let mut acc = 0.0;
            let mut v = vec![0.0];
            for p in 1..=10_000u32 {
                acc += (p as f64).ln();
                v.push(sigma * acc);
            }
            v
        };
        for rho in log_spaced(1e-2, 1e3, 100) {
            let naive = lnm
                .iter()
                .enumerate()
                .map(|(p, l)| p as f64 * rho.ln() - l)
                .fold(f64::NEG_INFINITY, f64::max);
            let m = seq.assoc_fn(rho).unwrap().value;
            worst_fit = worst_fit.max((m - naive).abs() / m.abs().max(1.0));
        }
        let grid = log_spaced(1e-2, 1e2, 20);
        let pairs: Vec<(f64, f64)> = grid.iter().flat_map(|&r| grid.iter().map(move |&l| (r, l))).collect();
        worst_slack = worst_slack.min(seq.check_assoc_inequalities(&pairs).unwrap().min_slack());
    }
    check(
        worst_fit <= 1e-12 && worst_slack >= -1e-12,
        format!("max relative scan error {worst_fit:.1e}, min inequality slack {worst_slack:.2e}"),
    )
}

fn c11() -> Outcome {
    let g = gauss(&Grid::default());
    let r = lemma22_decay_check(&g, &GevreySequence::new(1.0).unwrap(), 0.5, &Weight::constant(), 16, 8.0).unwrap();
    check(r.slack >= 0.0, format!("seminorm {:.6}, min slack {:.2e} over {} frequencies", r.seminorm, r.slack, r.checked))
}

fn run_all(jobs: u32) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_amalgam-lab"))
        .args(["verify", "all", "--seed", "7", "--jobs", &jobs.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn c12() -> Outcome {
    let a = run_all(1)?;
    let b = run_all(8)?;
    let parse = |s: &str| -> Vec<Vec<String>> {
        csv::Reader::from_reader(s.as_bytes())
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect()
    };
    let (ra, rb) = (parse(&a), parse(&b));
    if ra.len() != rb.len() {
        return Err(format!("row counts differ: {} vs {}", ra.len(), rb.len()));
    }
    let mut worst: f64 = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        if x[..3] != y[..3] || x[6] != y[6] {
            return Err(format!("rows differ: {x:?} vs {y:?}"));
        }
        for c in 3..6 {
            let (u, v): (f64, f64) = (x[c].parse().unwrap(), y[c].parse().unwrap());
            if u != v {
                worst = worst.max((u - v).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("{} rows, max value difference {worst:.1e}, pass columns identical", ra.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 12] = [
        ("Gaussian amalgam closed forms", c1, Duration::from_secs(1)),
        ("partition of unity on |x| <= 6", c2, Duration::from_secs(1)),
        ("continuous/discrete equivalence", c3, Duration::from_secs(60)),
        ("window independence", c4, Duration::from_secs(30)),
        ("retraction", c5, Duration::from_secs(10)),
        ("pairing bound", c6, Duration::from_secs(30)),
        ("interpolation convexity", c7, Duration::from_secs(5)),
        ("modulation identity", c8, Duration::from_secs(10)),
        ("tail radius", c9, Duration::from_secs(5)),
        ("associated function", c10, Duration::from_secs(5)),
        ("frequency decay", c11, Duration::from_secs(2)),
        ("determinism across --jobs", c12, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let dt = t.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (dt <= *budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}; {:.2}s of {}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            name,
            detail,
            dt.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
