//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad configuration or
//! I/O, 3 numerical failure.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{GridConfig, OutputConfig, Overrides, RunConfig};
pub use output::{render_report, write_file, SampleSeries};

use crate::error::Error;
use crate::jacobi::{modulus_from_roots, sn, Modulus};
use crate::lattice::{build, time_lift, Seed};
use crate::verify::{
    backlund_residual, commutativity_check, identity_suite, kdv_time_residual, names, static_kdv_residual, GridSpec,
    ResidualReport, Verdict,
};
use crate::weierstrass::{roots_from_invariants, Weierstrass};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("numeric failure: {0}")]
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Numeric(
                Error::NonFiniteInvariants { .. } | Error::DegenerateDeltas { .. } | Error::InvalidGrid(_),
            ) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kdv-elliptic",
    version,
    about = "Elliptic N-soliton solutions of the KdV equation"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write an SVG next to each CSV.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Config override, e.g. `deltas=-0.02,0.04` or `grid.n_points=1601`.
    #[arg(long = "param", value_name = "KEY=VALUE", global = true)]
    pub params: Vec<String>,
    /// Sampling window and point count.
    #[arg(long, value_name = "MIN,MAX,N", global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Tolerance override per identity; `all` sets every one.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    pub tols: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Data for one of the three figures.
    Figure { name: Figure },
    /// Build the N-soliton from the configured δ list and sample it.
    Build,
    /// Run the residual checks and write a report.
    Verify,
    /// Evaluate ℘, ζ or sn at one point.
    Eval {
        func: Func,
        #[arg(allow_negative_numbers = true)]
        x: f64,
    },
    /// Roots of 4t³ − g₂t − g₃.
    Roots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

impl Figure {
    /// Invariants, shifts and window are fixed by the figure captions.
    pub fn deltas(self) -> &'static [f64] {
        match self {
            Figure::Fig1 => &[],
            Figure::Fig2 => &[-0.02, 0.04],
            Figure::Fig3 => &[-0.02, 0.03, 0.05],
        }
    }

    pub fn invariants(self) -> (f64, f64) {
        (0.3, 0.7)
    }

    pub fn grid(self) -> GridSpec {
        GridSpec::default()
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Figure::Fig1 => "z0, g2 = 0.3, g3 = 0.7",
            Figure::Fig2 => "z12, delta = (-0.02, 0.04)",
            Figure::Fig3 => "z123, delta = (-0.02, 0.03, 0.05)",
        }
    }

    pub fn branch(self) -> Result<crate::lattice::SolitonSolution, CliError> {
        let (g2, g3) = self.invariants();
        let inv = crate::weierstrass::Invariants::new(g2, g3)?;
        Ok(build(&crate::lattice::SolitonSpec::new(inv, self.deltas())?)?)
    }

    /// The sampled series this figure plots.
    pub fn series(self, with_u: bool) -> Result<SampleSeries, CliError> {
        SampleSeries::sample(&self.branch()?, &self.grid(), with_u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Func {
    Wp,
    Zeta,
    Sn,
}

/// Parses the arguments, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match run(&cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a verification failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let overrides = Overrides {
        params: cli.params.clone(),
        grid: cli.grid.clone(),
        tols: cli.tols.clone(),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let dir = cfg.out_dir(cli.out.as_deref());
    match &cli.command {
        Command::Figure { name } => {
            let series = name.series(cfg.with_u)?;
            emit_series(&series, &dir, name.file_stem(), name.title(), cli.svg, out)?;
            Ok(true)
        }
        Command::Build => {
            let sol = build(&cfg.spec()?)?;
            let series = SampleSeries::sample(&sol, &cfg.grid()?, true)?;
            let stem = cfg.output.series.trim_end_matches(".csv").to_string();
            let title = format!("N = {}, delta = {:?}", cfg.deltas.len(), cfg.deltas);
            emit_series(&series, &dir, &stem, &title, cli.svg, out)?;
            Ok(true)
        }
        Command::Verify => verify(&cfg, &dir, out),
        Command::Eval { func, x } => {
            let kernel = Weierstrass::new(cfg.invariants()?);
            let v = match func {
                Func::Wp => kernel.wp(*x)?,
                Func::Zeta => kernel.zeta(*x)?,
                Func::Sn => {
                    let m = match cfg.k2 {
                        Some(k2) => Modulus::new(k2).ok_or_else(|| CliError::Config {
                            field: "k2".into(),
                            message: format!("{k2} is outside [0, 1]"),
                        })?,
                        None => modulus_from_roots(&roots_from_invariants(kernel.invariants())).map_err(|e| {
                            CliError::Config {
                                field: "k2".into(),
                                message: format!("not given and not derivable from g2, g3: {e}"),
                            }
                        })?,
                    };
                    sn(*x, m)?
                }
            };
            let _ = writeln!(out, "{v:.16e}");
            Ok(true)
        }
        Command::Roots => {
            let inv = cfg.invariants()?;
            let roots = roots_from_invariants(&inv);
            for (i, e) in roots.as_array().iter().enumerate() {
                if e.im == 0.0 {
                    let _ = writeln!(out, "e{} = {:.16e}", i + 1, e.re + 0.0);
                } else {
                    let _ = writeln!(out, "e{} = {:.16e} {:+.16e}i", i + 1, e.re + 0.0, e.im);
                }
            }
            let _ = writeln!(out, "discriminant = {:.16e}", inv.discriminant());
            let _ = writeln!(out, "kind = {:?}", inv.root_kind());
            if let Ok(m) = modulus_from_roots(&roots) {
                let _ = writeln!(out, "k2 = {:.16e}", m.k_sq());
            }
            Ok(true)
        }
    }
}

fn emit_series(
    series: &SampleSeries,
    dir: &Path,
    stem: &str,
    title: &str,
    svg: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let csv = dir.join(format!("{stem}.csv"));
    write_file(&csv, &series.to_csv())?;
    let _ = writeln!(out, "wrote {}", csv.display());
    if svg {
        let path = dir.join(format!("{stem}.svg"));
        write_file(&path, &series.to_svg(title))?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}

fn verify(cfg: &RunConfig, dir: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let inv = cfg.invariants()?;
    let spec = cfg.spec()?;
    let grid = cfg.grid()?;
    let tol = cfg.tolerances()?;
    let mut reports = identity_suite(&inv, &grid, &tol);

    let base = Seed::base(spec.kernel());
    for p in spec.params() {
        let seed = Seed::shifted(spec.kernel(), *p);
        let r = backlund_residual(&base, &seed, p.lambda_sq(), &grid, tol.get(names::BACKLUND))?;
        reports.push(r.with_note(format!("delta = {}", p.delta())));
    }
    let sol = build(&spec)?;
    reports.push(static_kdv_residual(&sol, &grid, tol.get(names::STATIC_KDV))?);
    if sol.len() >= 2 {
        reports.push(commutativity_check(&sol, &grid, tol.get(names::COMMUTATIVITY))?);
    }
    if let Some(b) = cfg.b {
        let r = kdv_time_residual(&time_lift(&sol, b), &grid, &cfg.t_samples, tol.get(names::KDV_TIME))?;
        reports.push(r.with_note(format!("b = {b}, t = {:?}", cfg.t_samples)));
    }

    for r in &reports {
        let verdict = match r.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        let _ = writeln!(
            out,
            "{verdict} {:<22} max {:.3e}  tol {:.1e}{}",
            r.name,
            r.max_residual,
            r.tolerance,
            r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
        );
    }
    let text = render_report((inv.g2(), inv.g3()), &cfg.deltas, cfg.b, &grid, &reports, &tol)?;
    let path = dir.join(&cfg.output.report);
    write_file(&path, &text)?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(reports.iter().all(|r: &ResidualReport| r.verdict != Verdict::Fail))
}
