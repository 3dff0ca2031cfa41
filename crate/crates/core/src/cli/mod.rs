//! Batch command-line front end.
//!
//! Flags and `key = value` config entries share one namespace; flags win.
//! Exit codes: 0 when every row passes, 1 when a verification row fails,
//! 2 on a usage or configuration error.

pub mod config;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::amalgam::{continuous_norm, discrete_norm, AmalgamSpec, Global};
use crate::duality_interp::stft;
use crate::error::{Error, Result};
use crate::ucpu::{
    build_lattice_ucpu_on, check_condition1, check_condition2, check_condition3, lemma39_tail_radius, PointSet,
    Ucpu, PARTITION_TOL, U_FRACTION,
};
use crate::weights::{canonical_pairs, check_moderate, MODERATION_TOL};
pub use config::ExperimentConfig;
use report::{num, ReportRow, Table};

#[derive(Debug, Parser)]
#[command(name = "amalgam-lab", version, about = "Amalgam, partition-of-unity and modulation-space numerics")]
struct Cli {
    /// `key = value` experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination (default stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Grid half-width.
    #[arg(long = "L", global = true)]
    l: Option<String>,
    /// Grid step.
    #[arg(long, global = true)]
    delta: Option<String>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Associated function M(ρ).
    Assoc {
        #[arg(long)]
        rho: Option<String>,
    },
    /// Moderation check of a weight literal.
    Weights {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        tau: Option<String>,
    },
    /// Build and check a lattice partition of unity.
    Ucpu {
        action: UcpuAction,
        /// `key=value` pairs (`a`, `s`, `L` for the point half-width, `h`, `K`, `eps`).
        params: Vec<String>,
        #[arg(long)]
        cond: Option<String>,
        #[arg(long)]
        h: Option<String>,
        #[arg(long = "K")]
        k: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long = "L-pts")]
        l_pts: Option<String>,
    },
    /// Continuous or discrete amalgam norm of a field.
    Norm {
        mode: NormMode,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        chi: Option<String>,
        #[arg(long = "E")]
        e: Option<String>,
        /// Global exponent; `inf` for L^∞, `c0` for C_0.
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long = "L-pts")]
        l_pts: Option<String>,
    },
    /// Run verification experiments.
    Verify {
        which: String,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long = "E")]
        e: Option<String>,
    },
    /// Short-time Fourier transform on the outer grid.
    Stft {
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        phi: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UcpuAction {
    Build,
    Check,
    Lemma39,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormMode {
    Cont,
    Disc,
    Both,
}

/// Runs the front end on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return 2;
        }
    };
    match execute(cli) {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Returns whether any row failed.
fn execute(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::parse("config", e.to_string()))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let mut set = |k: &str, v: &Option<String>| -> Result<()> {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
        Ok(())
    };
    set("seed", &cli.seed)?;
    set("sigma", &cli.sigma)?;
    set("L", &cli.l)?;
    set("delta", &cli.delta)?;
    match &cli.cmd {
        Command::Assoc { rho } => set("rho", rho)?,
        Command::Weights { weight, c, tau } => {
            set("weight", weight)?;
            set("c", c)?;
            set("tau", tau)?;
        }
        Command::Ucpu { params, cond, h, k, eps, a, s, l_pts, .. } => {
            for kv in params {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::parse("ucpu", format!("expected key=value, got `{kv}`")))?;
                let key = if k.trim() == "L" { "L_pts" } else { k.trim() };
                cfg.set(key, v.trim())?;
            }
            let mut set = |k: &str, v: &Option<String>| -> Result<()> {
                if let Some(v) = v {
                    cfg.set(k, v)?;
                }
                Ok(())
            };
            set("cond", cond)?;
            set("h", h)?;
            set("K", k)?;
            set("eps", eps)?;
            set("a", a)?;
            set("s", s)?;
            set("L_pts", l_pts)?;
        }
        Command::Norm { f, chi, e, p, weight, a, s, l_pts, .. } => {
            set("f", f)?;
            set("chi", chi)?;
            set("E", e)?;
            set("p", p)?;
            set("weight", weight)?;
            set("a", a)?;
            set("s", s)?;
            set("L_pts", l_pts)?;
        }
        Command::Verify { p, trials, family, weight, e, .. } => {
            set("p", p)?;
            set("trials", trials)?;
            set("family", family)?;
            set("weight", weight)?;
            set("E", e)?;
        }
        Command::Stft { f, phi } => {
            set("f", f)?;
            set("phi", phi)?;
        }
    }
    let work = || dispatch(&cli.cmd, &cfg);
    let table = match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::param("jobs", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let written = match &cli.out {
        Some(path) => File::create(path)
            .map_err(|e| Error::param("out", e.to_string()))
            .and_then(|f| table.write(io::BufWriter::new(f)).map_err(|e| Error::param("out", e.to_string()))),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            let r = table.write(&mut lock).map_err(|e| Error::param("out", e.to_string()));
            let _ = lock.flush();
            r
        }
    };
    written?;
    Ok(table.failed)
}

fn dispatch(cmd: &Command, cfg: &ExperimentConfig) -> Result<Table> {
    match cmd {
        Command::Assoc { .. } => assoc(cfg),
        Command::Weights { .. } => weights(cfg),
        Command::Ucpu { action, .. } => ucpu(*action, cfg),
        Command::Norm { mode, .. } => norm(*mode, cfg),
        Command::Verify { which, .. } => Ok(Table::from_rows(&verify::run(which, cfg)?)),
        Command::Stft { .. } => stft_table(cfg),
    }
}

fn assoc(cfg: &ExperimentConfig) -> Result<Table> {
    let seq = cfg.sequence()?;
    let rho = cfg
        .f64_opt("rho")?
        .ok_or_else(|| Error::param("rho", "required"))?;
    let v = seq.assoc_fn(rho).map_err(|e| Error::param("rho", e.to_string()))?;
    let naive = verify::naive_assoc(&seq, rho, 10_000);
    let tol = 1e-12 * v.value.abs().max(1.0);
    Ok(Table::from_rows(&[ReportRow::new(
        "assoc",
        "assoc_fn",
        format!("sigma={};rho={rho};argmax_p={}", seq.sigma(), v.argmax_p),
        v.value,
        -(v.value - naive).abs(),
        tol,
    )]))
}

fn weights(cfg: &ExperimentConfig) -> Result<Table> {
    let seq = cfg.sequence()?;
    let w = cfg.weight(&seq)?;
    let cert = w.certificate();
    let c = cfg.f64_or("c", cert.c)?;
    let tau = cfg.f64_or("tau", cert.tau)?;
    let r = check_moderate(&w, &seq, c, tau, &canonical_pairs());
    Ok(Table::from_rows(&[ReportRow::new(
        "weights",
        "moderation",
        format!("weight={w};C={c};tau={tau}"),
        c,
        r.slack,
        MODERATION_TOL,
    )]))
}

fn build(cfg: &ExperimentConfig) -> Result<Ucpu> {
    build_lattice_ucpu_on(
        cfg.grid()?,
        cfg.f64_or("a", 1.0)?,
        cfg.f64_or("s", 1.0)?,
        cfg.f64_or("L_pts", 12.0)?,
    )
}

fn ucpu_table(rows: &[(String, String, f64, f64)]) -> Table {
    let mut t = Table::new(&["lemma", "parameter", "value", "slack"]);
    for (lemma, param, value, slack) in rows {
        t.failed |= !(*slack >= 0.0);
        t.push(vec![lemma.clone(), param.clone(), num(*value), num(*slack)]);
    }
    t
}

fn ucpu(action: UcpuAction, cfg: &ExperimentConfig) -> Result<Table> {
    let seq = cfg.sequence()?;
    let mut rows: Vec<(String, String, f64, f64)> = Vec::new();
    match action {
        UcpuAction::Build | UcpuAction::Check => {
            let u = build(cfg)?;
            let which = match action {
                UcpuAction::Build => "all",
                _ => cfg.get("cond").unwrap_or("all"),
            };
            let wants = |c: &str| which == "all" || which.split(',').any(|w| w.trim() == c);
            let valid = which == "all" || which.split(',').all(|w| ["1", "2", "3", "4"].contains(&w.trim()));
            if !valid {
                return Err(Error::param("cond", format!("expected all or a list of 1..4, got `{which}`")));
            }
            if wants("1") {
                let h = cfg.f64_or("h", 0.25)?;
                let k = cfg.u64_or("K", 8)? as usize;
                let r = check_condition1(&u, &seq, h, k)?;
                rows.push(("condition1".into(), format!("h={h};K={k}"), r.value, 1e-9 - r.lambda_spread));
            }
            if wants("2") {
                let c = check_condition2(u.points(), 0.5);
                rows.push(("condition2".into(), "K=[-0.5,0.5]".into(), c as f64, 0.0));
            }
            if wants("3") {
                let core = u.default_core().max(0.0);
                let r = check_condition3(u.points(), U_FRACTION * u.a(), (-core, core), u.grid().step())?;
                let param = match r.witness {
                    Some(w) => format!("U=({0},{1});core={core};witness={w}", -r.u_halfwidth, r.u_halfwidth),
                    None => format!("U=({0},{1});core={core}", -r.u_halfwidth, r.u_halfwidth),
                };
                rows.push(("condition3".into(), param, r.max_gap, r.u_halfwidth - r.max_gap));
            }
            if wants("4") {
                let r = u.certificates().condition4;
                rows.push(("condition4".into(), format!("core={}", r.core), r.deviation, PARTITION_TOL - r.deviation));
            }
        }
        UcpuAction::Lemma39 => {
            let half = cfg.f64_or("L_pts", 50.0)?;
            let pts = PointSet::lattice_1d(cfg.f64_or("a", 1.0)?, half)?;
            let h = cfg.f64_or("h", 1.0)?;
            let eps = cfg.f64_or("eps", 0.1)?;
            let r = lemma39_tail_radius(&pts, &seq, h, eps)?;
            rows.push(("lemma39".into(), format!("R_exact;h={h};eps={eps}"), r.r_exact, eps - r.tail_at_exact));
            if let Some(rc) = r.r_constructive {
                rows.push(("lemma39".into(), format!("R_constructive;h={h};eps={eps}"), rc, rc - r.r_exact));
            }
        }
    }
    Ok(ucpu_table(&rows))
}

fn global(cfg: &ExperimentConfig) -> Result<Global> {
    match cfg.get("p") {
        Some("c0") | Some("C0") => Ok(Global::C0),
        _ => Global::lp(cfg.f64_or("p", 2.0)?),
    }
}

fn norm(mode: NormMode, cfg: &ExperimentConfig) -> Result<Table> {
    let seq = cfg.sequence()?;
    let grid = cfg.grid()?;
    let global = global(cfg)?;
    let f = cfg.field("f", "gauss:x0=0,xi0=0,a=1", grid)?;
    let spec = AmalgamSpec::new(cfg.local(&seq)?, global, cfg.weight(&seq)?);
    let (mut cont, mut disc, mut flag) = (None, None, false);
    if matches!(mode, NormMode::Cont | NormMode::Both) {
        let chi = cfg.field("chi", "gauss:x0=0,xi0=0,a=1", grid)?;
        let r = continuous_norm(&f, &chi, &spec).map_err(|e| match e {
            Error::ZeroWindow => Error::param("chi", "window must not vanish identically"),
            other => other,
        })?;
        flag |= r.tail_flag;
        cont = Some(r.value);
    }
    if matches!(mode, NormMode::Disc | NormMode::Both) {
        let r = discrete_norm(&f, &build(cfg)?, &spec)?;
        flag |= r.tail_flag;
        disc = Some(r.value);
    }
    let mut t = Table::new(&["f_id", "norm_cont", "norm_disc", "ratio", "tail_flag"]);
    let cell = |v: Option<f64>| v.map(num).unwrap_or_default();
    let ratio = match (cont, disc) {
        (Some(c), Some(d)) => Some(c / d),
        _ => None,
    };
    t.push(vec![
        cfg.get("f").unwrap_or("gauss:x0=0,xi0=0,a=1").to_string(),
        cell(cont),
        cell(disc),
        cell(ratio),
        flag.to_string(),
    ]);
    Ok(t)
}

fn stft_table(cfg: &ExperimentConfig) -> Result<Table> {
    let grid = cfg.grid()?;
    let f = cfg.field("f", "gauss:x0=0,xi0=0,a=1", grid)?;
    let phi = cfg.field("phi", "gauss:x0=0,xi0=0,a=1", grid)?;
    let v = stft(&f, &phi).map_err(|e| match e {
        Error::ZeroWindow => Error::param("phi", "window must not vanish identically"),
        other => other,
    })?;
    let mut t = Table::new(&["x", "xi", "re", "im", "abs"]);
    for (x, row) in v.xs.iter().zip(&v.values) {
        for (k, z) in row.iter().enumerate() {
            t.push(vec![num(*x), num(v.grid_xi.point(k)), num(z.re), num(z.im), num(z.norm())]);
        }
    }
    Ok(t)
}
