use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use fermipair::atlas::{boundary_curves, classify, expected_counts, CurveBranch};
use fermipair::determinant::{asymptote_prefactor, constants, CouplingPair};
use fermipair::solver::{spectrum_with, SolverOptions, SpectralReport};
use fermipair::verification::{criteria, Outcome, VerifyConfig};
use fermipair::{Error, GridSpec, Quasimomentum, RegionLabel, Side};

use crate::output::{num, sink, write_csv, write_json, Plot};

#[derive(Debug, Parser)]
#[command(
    name = "fermipair",
    version,
    about = "Bound states of two lattice fermions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Starting grid (points per axis) of the adaptive resolvent quadrature.
    #[arg(long, global = true, env = "FERMIPAIR_GRID_N", default_value_t = 512)]
    pub grid_n: usize,

    /// Output format; JSON for single results and CSV for tables by default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Below,
    Above,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct Coupling {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region of a coupling pair and its predicted eigenvalue counts at K = 0.
    Classify(Coupling),
    /// Eigenvalues outside the band at one quasimomentum.
    Spectrum {
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        k1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        k2: f64,
    },
    /// Sample the phase boundaries C^- = 0 and C^+ = 0.
    Curves {
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
        mu_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
        mu_max: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// Also draw the curves as an SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Regions and K = 0 eigenvalue counts on a rectangular grid of couplings.
    Sweep {
        #[arg(long, allow_hyphen_values = true, default_value_t = -40.0)]
        lambda_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 40.0)]
        lambda_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -25.0)]
        mu_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 25.0)]
        mu_max: f64,
        #[arg(long, default_value_t = 41)]
        lambda_steps: usize,
        #[arg(long, default_value_t = 26)]
        mu_steps: usize,
        /// Worker threads; 0 lets the pool decide.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Also draw the phase boundaries over the swept window as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// The four threshold constants and the coefficients of C^±.
    Constants,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Verification,
    DegenerateBand(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Config(_) => 2,
            Failure::DegenerateBand(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    pub fn message(&self) -> Option<&str> {
        match self {
            Failure::Verification => None,
            Failure::Config(m) | Failure::DegenerateBand(m) | Failure::Runtime(m) => Some(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DegenerateBand(_) => Failure::DegenerateBand(msg),
            Error::NonFiniteCoupling { .. }
            | Error::InvalidGrid(_)
            | Error::EmptyRange { .. }
            | Error::TooFewSamples { .. }
            | Error::InvalidMargin(_) => Failure::Config(msg),
            _ => Failure::Runtime(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

type Res<T> = std::result::Result<T, Failure>;

pub fn run(cli: &Cli) -> Res<()> {
    let grid = GridSpec::new(cli.grid_n)?;
    let opts = SolverOptions::starting_at(grid);
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Classify(c) => classify_cmd(c, cli.format.unwrap_or(Format::Json), out),
        Command::Spectrum { coupling, k1, k2 } => spectrum_cmd(
            coupling,
            *k1,
            *k2,
            &opts,
            cli.format.unwrap_or(Format::Json),
            out,
        ),
        Command::Curves {
            side,
            mu_min,
            mu_max,
            samples,
            svg,
        } => curves_cmd(
            *side,
            *mu_min,
            *mu_max,
            *samples,
            svg.as_deref(),
            cli.format.unwrap_or(Format::Csv),
            out,
        ),
        Command::Sweep {
            lambda_min,
            lambda_max,
            mu_min,
            mu_max,
            lambda_steps,
            mu_steps,
            threads,
            svg,
        } => {
            let window = Window {
                lambda: axis(*lambda_min, *lambda_max, *lambda_steps)?,
                mu: axis(*mu_min, *mu_max, *mu_steps)?,
            };
            sweep_cmd(
                &window,
                *threads,
                &opts,
                svg.as_deref(),
                cli.format.unwrap_or(Format::Csv),
                out,
            )
        }
        Command::Verify { seed, only } => verify_cmd(*seed, only, cli.format, out),
        Command::Constants => constants_cmd(cli.format.unwrap_or(Format::Json), out),
    }
}

fn coupling(c: &Coupling) -> Res<CouplingPair> {
    Ok(CouplingPair::new(c.lambda, c.mu)?)
}

#[derive(Serialize)]
struct Classified {
    coupling: CouplingPair,
    region: String,
    /// `"n_below|n_above"`, absent on a boundary.
    expected: Option<String>,
    label: RegionLabel,
}

fn classify_cmd(c: &Coupling, format: Format, out: Option<&std::path::Path>) -> Res<()> {
    let p = coupling(c)?;
    let label = classify(p);
    let expected = expected_counts(&label)
        .ok()
        .map(|(b, a)| format!("{b}|{a}"));
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            let r = Classified {
                coupling: p,
                region: label.name(),
                expected,
                label,
            };
            write_json(&mut *w, "classify", &r)?;
        }
        Format::Csv => write_csv(
            &mut *w,
            &[
                "lambda",
                "mu",
                "region",
                "n_below",
                "n_above",
                "on_boundary",
            ],
            &[vec![
                num(p.lambda),
                num(p.mu),
                label.name(),
                label.expected_n_below.to_string(),
                label.expected_n_above.to_string(),
                label.on_boundary.to_string(),
            ]],
        )?,
    }
    Ok(())
}

fn spectrum_cmd(
    c: &Coupling,
    k1: f64,
    k2: f64,
    opts: &SolverOptions,
    format: Format,
    out: Option<&std::path::Path>,
) -> Res<()> {
    let p = coupling(c)?;
    if !(k1.is_finite() && k2.is_finite()) {
        return Err(Failure::Config(format!(
            "quasimomentum must be finite, got ({k1}, {k2})"
        )));
    }
    let report: SpectralReport = spectrum_with(p, Quasimomentum::new(k1, k2), opts)?;
    let mut w = sink(out)?;
    match format {
        Format::Json => write_json(&mut *w, "spectrum", &report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .eigenvalues
                .iter()
                .map(|e| vec![num(e.z), e.side.to_string(), e.multiplicity.to_string()])
                .collect();
            write_csv(&mut *w, &["z", "side", "multiplicity"], &rows)?;
        }
    }
    Ok(())
}

fn sides(s: SideArg) -> Vec<Side> {
    match s {
        SideArg::Below => vec![Side::Below],
        SideArg::Above => vec![Side::Above],
        SideArg::Both => Side::BOTH.to_vec(),
    }
}

fn all_curves(side: SideArg, mu_min: f64, mu_max: f64, samples: usize) -> Res<Vec<CurveBranch>> {
    let mut v = Vec::new();
    for s in sides(side) {
        v.extend(boundary_curves(s, mu_min, mu_max, samples)?);
    }
    Ok(v)
}

fn plot_lines(branches: &[CurveBranch]) -> Vec<(String, Vec<(f64, f64)>)> {
    branches
        .iter()
        .map(|b| (format!("{}-{}", b.side, b.branch), b.points.clone()))
        .collect()
}

fn curves_cmd(
    side: SideArg,
    mu_min: f64,
    mu_max: f64,
    samples: usize,
    svg: Option<&std::path::Path>,
    format: Format,
    out: Option<&std::path::Path>,
) -> Res<()> {
    let branches = all_curves(side, mu_min, mu_max, samples)?;
    let mut w = sink(out)?;
    match format {
        Format::Json => write_json(&mut *w, "curves", &branches)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = branches
                .iter()
                .flat_map(|b| {
                    b.points.iter().map(move |&(l, m)| {
                        vec![b.side.to_string(), b.branch.to_string(), num(m), num(l)]
                    })
                })
                .collect();
            write_csv(&mut *w, &["side", "branch", "mu", "lambda"], &rows)?;
        }
    }
    if let Some(path) = svg {
        Plot {
            lambda: (-40.0, 40.0),
            mu: (mu_min, mu_max),
            lines: plot_lines(&branches),
        }
        .render(path)?;
    }
    Ok(())
}

struct Window {
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

fn axis(lo: f64, hi: f64, steps: usize) -> Res<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Failure::Config(format!("empty range [{lo}, {hi}]")));
    }
    match steps {
        0 => Err(Failure::Config("need at least one step".into())),
        1 => Ok(vec![lo]),
        n => Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    lambda: f64,
    mu: f64,
    region: String,
    n_below: u32,
    n_above: u32,
}

fn sweep_point(p: CouplingPair, opts: &SolverOptions) -> fermipair::Result<SweepRow> {
    let rep = spectrum_with(p, Quasimomentum::ZERO, opts)?;
    Ok(SweepRow {
        lambda: p.lambda,
        mu: p.mu,
        region: classify(p).name(),
        n_below: rep.n_below,
        n_above: rep.n_above,
    })
}

fn sweep_cmd(
    window: &Window,
    threads: usize,
    opts: &SolverOptions,
    svg: Option<&std::path::Path>,
    format: Format,
    out: Option<&std::path::Path>,
) -> Res<()> {
    let points: Vec<CouplingPair> = window
        .mu
        .iter()
        .flat_map(|&mu| {
            window
                .lambda
                .iter()
                .map(move |&lambda| CouplingPair { lambda, mu })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|&p| sweep_point(p, opts))
            .collect::<fermipair::Result<Vec<_>>>()
    })?;
    let mut w = sink(out)?;
    match format {
        Format::Json => write_json(&mut *w, "sweep", &rows)?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.lambda),
                        num(r.mu),
                        r.region.clone(),
                        r.n_below.to_string(),
                        r.n_above.to_string(),
                    ]
                })
                .collect();
            write_csv(
                &mut *w,
                &["lambda", "mu", "region", "n_below", "n_above"],
                &table,
            )?;
        }
    }
    if let Some(path) = svg {
        let (mu_lo, mu_hi) = (window.mu[0], *window.mu.last().expect("non-empty axis"));
        let (l_lo, l_hi) = (
            window.lambda[0],
            *window.lambda.last().expect("non-empty axis"),
        );
        if mu_lo < mu_hi && l_lo < l_hi {
            Plot {
                lambda: (l_lo, l_hi),
                mu: (mu_lo, mu_hi),
                lines: plot_lines(&all_curves(SideArg::Both, mu_lo, mu_hi, 2001)?),
            }
            .render(path)?;
        }
    }
    Ok(())
}

fn verify_cmd(
    seed: u64,
    only: &[u8],
    format: Option<Format>,
    out: Option<&std::path::Path>,
) -> Res<()> {
    if let Some(bad) = only.iter().find(|&&id| !(1..=10).contains(&id)) {
        return Err(Failure::Config(format!("no criterion {bad}")));
    }
    let cfg = VerifyConfig { seed };
    let mut w = sink(out)?;
    let mut outcomes: Vec<Outcome> = Vec::new();
    for c in criteria() {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        let o = c.run(&cfg);
        if format.is_none() {
            writeln!(w, "{}", o.line())?;
            for n in &o.notes {
                writeln!(w, "        {n}")?;
            }
            w.flush()?;
        }
        outcomes.push(o);
    }
    match format {
        None => {}
        Some(Format::Json) => write_json(&mut *w, "verify", &outcomes)?,
        Some(Format::Csv) => {
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.id.to_string(),
                        o.title.to_string(),
                        if o.passed { "PASS" } else { "FAIL" }.to_string(),
                        num(o.elapsed.as_secs_f64()),
                        o.summary.clone(),
                    ]
                })
                .collect();
            write_csv(
                &mut *w,
                &["id", "title", "status", "seconds", "summary"],
                &rows,
            )?;
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

/// `C = prefactor * (c0 + c_mu μ + c_mu2 μ² + λ (l0 + l_mu μ + l_mu2 μ²))`
#[derive(Serialize)]
struct Polynomial {
    c0: f64,
    c_mu: f64,
    c_mu2: f64,
    l0: f64,
    l_mu: f64,
    l_mu2: f64,
}

#[derive(Serialize)]
struct ConstantsOut {
    mu0_minus: f64,
    mu0_plus: f64,
    mu1_minus: f64,
    mu1_plus: f64,
    prefactor: f64,
    c_minus: Polynomial,
    c_plus: Polynomial,
}

fn constants_cmd(format: Format, out: Option<&std::path::Path>) -> Res<()> {
    let k = constants();
    let (s0, p0) = (k.mu0_plus + k.mu0_minus, k.mu0_plus * k.mu0_minus);
    let (s1, p1) = (k.mu1_plus + k.mu1_minus, k.mu1_plus * k.mu1_minus);
    let r = ConstantsOut {
        mu0_minus: k.mu0_minus,
        mu0_plus: k.mu0_plus,
        mu1_minus: k.mu1_minus,
        mu1_plus: k.mu1_plus,
        prefactor: asymptote_prefactor(),
        c_minus: Polynomial {
            c0: 8.0 * p0,
            c_mu: -8.0 * s0,
            c_mu2: 8.0,
            l0: p1,
            l_mu: -s1,
            l_mu2: 1.0,
        },
        c_plus: Polynomial {
            c0: 8.0 * p0,
            c_mu: 8.0 * s0,
            c_mu2: 8.0,
            l0: -p1,
            l_mu: -s1,
            l_mu2: -1.0,
        },
    };
    let mut w = sink(out)?;
    match format {
        Format::Json => write_json(&mut *w, "constants", &r)?,
        Format::Csv => {
            let pairs = [
                ("mu0_minus", r.mu0_minus),
                ("mu0_plus", r.mu0_plus),
                ("mu1_minus", r.mu1_minus),
                ("mu1_plus", r.mu1_plus),
                ("prefactor", r.prefactor),
            ];
            let rows: Vec<Vec<String>> = pairs
                .iter()
                .map(|(n, v)| vec![n.to_string(), num(*v)])
                .collect();
            write_csv(&mut *w, &["name", "value"], &rows)?;
        }
    }
    Ok(())
}
