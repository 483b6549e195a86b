//! Command-line front end: `verify`, `solve` and `report`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! configuration or runtime errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::make_divfree_cluster;
use crate::error::{Error, Result};
use crate::fit::{CompositeReport, DecayReport};
use crate::report::{load_run, save_run, write_csvs, write_json, Header, RunRecord};
use crate::solver::{calibrated_solve, PicardDiagnostics};
use crate::verify::solution::{verify_bootstrap, verify_picard, verify_solution_decay};
use crate::verify::suite::{run_suite, ExactnessCheck};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mild-ns", version, about = "Mild Navier-Stokes solutions and weighted decay checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `[verify] seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit JSON (with --csv, the only formats emitted).
    #[arg(long)]
    pub json: bool,
    /// Emit CSV series.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the linear verification suite.
    Verify(Common),
    /// Calibrate the smallness level, run Picard and persist the solution.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Run even if the smallness precondition fails.
        #[arg(long)]
        override_smallness: bool,
    },
    /// Check a persisted solution (defaults to the output directory).
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

struct Ctx {
    cfg: RunConfig,
    seed: u64,
    out: PathBuf,
    json: bool,
    csv: bool,
}

impl Ctx {
    fn new(c: &Common) -> Result<Self> {
        let cfg = match &c.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::from_str("")?,
        };
        let (json, csv) = if c.json || c.csv { (c.json, c.csv) } else { (cfg.output.json, cfg.output.csv) };
        Ok(Self {
            seed: c.seed.unwrap_or(cfg.seed),
            out: c.out.clone().unwrap_or_else(|| cfg.output.dir.clone()),
            json,
            csv,
            cfg,
        })
    }

    fn header(&self, grid: crate::grid::GridSpec) -> Header {
        Header::now(&self.cfg.hash, self.seed, grid)
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_report(r: &DecayReport) {
    println!(
        "{} {:<36} slope {:+.4} target {:+.4} R2 {:.4}",
        mark(r.verdict),
        r.name,
        r.fitted_slope,
        r.target_slope,
        r.r_squared
    );
}

fn print_check(c: &ExactnessCheck) {
    println!("{} {:<36} {:.3e} <= {:.3e}", mark(c.pass), c.name, c.error, c.tol);
}

fn verify(ctx: &Ctx) -> Result<bool> {
    let r = run_suite(&ctx.cfg.verify, ctx.seed)?;
    r.reports.iter().for_each(print_report);
    r.exactness.iter().for_each(print_check);
    for s in &r.self_similarity {
        println!("{} oseen self-similarity t={:.4e}          {:.3e} <= {:.1e}", mark(s.pass), s.result.t, s.result.rel_error, s.tol);
    }
    for c in &r.cross_checks {
        println!("{} {:<36} rel {:.3e}", mark(c.pass), c.name, c.rel_error);
    }
    for a in &r.audits {
        println!("{} kernel audit {:?} alpha={:<22} max {:.4e}", mark(a.max_ratio.is_finite()), a.kind, a.alpha, a.max_ratio);
    }
    let worst = r.beta_checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    println!("{} beta integrals ({} checks)                worst {:.3e}", mark(r.beta_pass()), r.beta_checks.len(), worst);
    if ctx.json {
        write_json(&ctx.out.join("verify.json"), &ctx.header(ctx.cfg.verify.lemma_grid), &r)?;
    }
    if ctx.csv {
        write_csvs(&ctx.out.join("csv"), &r.reports)?;
    }
    println!("overall: {}", mark(r.verdict));
    Ok(r.verdict)
}

#[derive(Serialize)]
struct FailedRun<'a> {
    reason: &'a str,
    diagnostics: &'a PicardDiagnostics,
}

fn solve(ctx: &Ctx, override_smallness: bool) -> Result<bool> {
    let s = &ctx.cfg.solve;
    let mut solver = s.solver.clone();
    solver.override_smallness |= override_smallness;
    let u0 = make_divfree_cluster(s.data, solver.params.beta, solver.grid, &s.centers, &s.amplitudes)?;
    let header = ctx.header(solver.grid);
    let run = match calibrated_solve(&u0, &solver, s.delta, s.eta_samples, ctx.seed) {
        Ok(run) => run,
        Err(Error::Divergence { reason, diagnostics }) => {
            eprintln!("Picard iteration failed: {reason}");
            write_json(&ctx.out.join("failed.json"), &header, &FailedRun { reason: &reason, diagnostics: &diagnostics })?;
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    let d = &run.diagnostics;
    if let Some(e) = &run.estimate {
        println!("eta_hat {:.6e} from {} samples", e.eta_hat, e.ratios.len());
    }
    println!("delta {:.6e}, smallness sup {:.6e}", run.delta, d.smallness_sup);
    for (i, n) in d.difference_norms.iter().enumerate() {
        let ratio = i.checked_sub(1).and_then(|j| d.contraction_ratios.get(j));
        let ratio = ratio.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
        println!("iteration {:>3}: difference {:.4e} ratio {ratio}", i + 1, n);
    }
    println!("residual {:.3e}, converged {}", d.residual, d.converged);
    let record = RunRecord {
        params: solver.params,
        times: run.solution.times().to_vec(),
        delta: run.delta,
        tol: solver.tol,
        estimate: run.estimate.clone(),
        diagnostics: d.clone(),
    };
    save_run(&ctx.out, &header, &record, &run.solution)?;
    Ok(d.converged)
}

#[derive(Serialize)]
struct SolutionReport {
    picard: Vec<ExactnessCheck>,
    decay: CompositeReport,
    bootstrap: CompositeReport,
    verdict: bool,
}

fn report(ctx: &Ctx, dir: &Path) -> Result<bool> {
    let (doc, u) = load_run(dir)?;
    let rec = &doc.body;
    let p = rec.params;
    let picard = verify_picard(&u, &rec.diagnostics, p.alpha, rec.tol)?;
    let decay = verify_solution_decay(&u, &rec.diagnostics, p.gamma, p.beta)?;
    let bootstrap = verify_bootstrap(&u, &rec.diagnostics, p.beta, &ctx.cfg.bootstrap_alphas, &ctx.cfg.bootstrap_hat_betas)?;
    picard.iter().for_each(print_check);
    decay.parts.iter().chain(&bootstrap.parts).for_each(print_report);
    let verdict = picard.iter().all(|c| c.pass) && decay.verdict && bootstrap.verdict;
    let body = SolutionReport { picard, decay, bootstrap, verdict };
    let header = Header::now(&doc.header.config_hash, doc.header.seed, doc.header.grid);
    if ctx.json {
        write_json(&ctx.out.join("report.json"), &header, &body)?;
    }
    if ctx.csv {
        write_csvs(&ctx.out.join("csv"), body.decay.parts.iter().chain(&body.bootstrap.parts))?;
    }
    println!("overall: {}", mark(verdict));
    Ok(verdict)
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Verify(c) => Ctx::new(c).and_then(|ctx| verify(&ctx)),
        Command::Solve { common, override_smallness } => Ctx::new(common).and_then(|ctx| solve(&ctx, *override_smallness)),
        Command::Report { common, run } => Ctx::new(common).and_then(|ctx| {
            let dir = run.clone().unwrap_or_else(|| ctx.out.clone());
            report(&ctx, &dir)
        }),
    };
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
