//! `pqharm`: energies, residuals, sweeps and region maps from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pqharm::energy::energy;
use pqharm::output::{format_f64, to_json};
use pqharm::regions::{export_region_grid, grid_csv, grid_svg, RegionSpec};
use pqharm::solver::{conformal_axis_sweep, scale_sweep, solve_thm52, SweepOptions};
use pqharm::variational::residual;
use pqharm::verify::{self, VerifyOptions};
use pqharm::{Error, Manifold, MetricParams, QuadratureScheme, QuadratureSet, SectionSpec};

#[derive(Parser)]
#[command(name = "pqharm", version, about = "Vertical (p,q)-energy and (p,q)-harmonic section residuals")]
struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vertical energy of a section.
    Energy(RunArgs),
    /// Euler–Lagrange residual of a section.
    Residual {
        #[command(flatten)]
        run: RunArgs,
        /// Include per-point values (CSV rows with --format csv).
        #[arg(long)]
        per_point: bool,
    },
    /// Residual and energy along a one-parameter rescaling.
    Sweep(SweepArgs),
    /// Conformal-gradient solution on S^n.
    Solve52 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Region labels of the (p,q)-plane on a grid.
    Regions(RegionArgs),
    /// Run the acceptance suite.
    Verify {
        /// Sample sizes at the stated minimum.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the JSON report (no timings) to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "sphere:3")]
    manifold: Manifold,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "monte-carlo")]
    scheme: QuadratureScheme,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    section: SectionSpec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: f64,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[command(flatten)]
    sample: SampleArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// `k·σ` for a unit-length `--section`.
    Scale,
    /// Conformal gradient with axis `c·e₀`.
    Conformal,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "scale")]
    family: Family,
    /// Unit-length base section for the scale family.
    #[arg(long, default_value = "hopf")]
    section: SectionSpec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: f64,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// Parameter range `lo:hi`.
    #[arg(long, visible_aliases = ["k-range", "c-range"], value_parser = parse_range, allow_hyphen_values = true, default_value = "0.1:3")]
    range: (f64, f64),
    #[arg(long, default_value_t = 60)]
    steps: usize,
    /// Grid minima of the l2 residual above this are reported as "no root".
    #[arg(long, default_value_t = 1e-4)]
    no_root_threshold: f64,
    #[command(flatten)]
    sample: SampleArgs,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-5:5")]
    p_range: (f64, f64),
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-8:4")]
    q_range: (f64, f64),
    #[arg(long, default_value_t = 200)]
    res: usize,
    /// CSV destination (default stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((lo, hi))
}

static SUBCOMMAND: OnceLock<&'static str> = OnceLock::new();

/// Exits with status 2, naming `flag` and printing the usage of the running subcommand.
fn usage_error(flag: &str, message: impl std::fmt::Display) -> ! {
    let mut cmd = Cli::command();
    cmd.build();
    let message = format!("invalid value for '{flag}': {message}");
    match SUBCOMMAND.get().and_then(|name| cmd.find_subcommand_mut(name)) {
        Some(sub) => sub.error(ErrorKind::ValueValidation, message).exit(),
        None => cmd.error(ErrorKind::ValueValidation, message).exit(),
    }
}

/// The flag a library error is most plausibly about.
fn flag_for(e: &Error) -> &'static str {
    match e {
        Error::UnsupportedScheme { .. } => "--scheme",
        Error::EmptyQuadrature => "--samples",
        Error::Domain(_) => "--range",
        _ => "--section",
    }
}

fn or_usage<T>(r: pqharm::Result<T>) -> T {
    r.unwrap_or_else(|e| usage_error(flag_for(&e), e))
}

fn emit(text: &str, output: &Option<PathBuf>) {
    match output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                usage_error("--output", format!("{}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
}

fn quadrature(s: &SampleArgs) -> QuadratureSet<f64> {
    or_usage(QuadratureSet::new(s.manifold, s.scheme, s.samples, s.seed))
}

fn check_section(section: &SectionSpec<f64>, m: &Manifold) {
    if let Err(e) = section.validate(m) {
        usage_error("--section", e);
    }
}

#[derive(Serialize)]
struct Solve52Output {
    n: usize,
    p: f64,
    q: f64,
    c: f64,
}

fn run(cli: Cli) -> ExitCode {
    let name = match &cli.command {
        Command::Energy(_) => "energy",
        Command::Residual { .. } => "residual",
        Command::Sweep(_) => "sweep",
        Command::Solve52 { .. } => "solve52",
        Command::Regions(_) => "regions",
        Command::Verify { .. } => "verify",
    };
    let _ = SUBCOMMAND.set(name);
    match cli.command {
        Command::Energy(a) => {
            let m = a.sample.manifold;
            check_section(&a.section, &m);
            let quad = quadrature(&a.sample);
            let r = or_usage(energy(&a.section, &m, MetricParams::new(a.p, a.q), &quad));
            let text = match a.sample.format {
                Format::Json => to_json(&r),
                Format::Csv => format!(
                    "total,density_min,density_max,N,seed,p,q\n{},{},{},{},{},{},{}\n",
                    format_f64(r.total),
                    format_f64(r.density_min),
                    format_f64(r.density_max),
                    r.n,
                    r.seed,
                    format_f64(r.p),
                    format_f64(r.q)
                ),
            };
            emit(&text, &a.sample.output);
        }
        Command::Residual { run, per_point } => {
            let m = run.sample.manifold;
            check_section(&run.section, &m);
            let quad = quadrature(&run.sample);
            let csv = matches!(run.sample.format, Format::Csv);
            let r = or_usage(residual(&run.section, &m, MetricParams::new(run.p, run.q), &quad, per_point || csv));
            let text = if csv { r.per_point_csv().unwrap_or_default() } else { to_json(&r) };
            emit(&text, &run.sample.output);
        }
        Command::Sweep(a) => {
            let m = a.sample.manifold;
            let quad = quadrature(&a.sample);
            let mp = MetricParams::new(a.p, a.q);
            let opts = SweepOptions { no_root_threshold: a.no_root_threshold, ..SweepOptions::default() };
            let r = match a.family {
                Family::Scale => {
                    check_section(&a.section, &m);
                    scale_sweep(&a.section, &m, mp, a.range, a.steps, &quad, &opts)
                }
                Family::Conformal => conformal_axis_sweep(&m, mp, a.range, a.steps, &quad, &opts).map_err(|e| match e {
                    Error::Domain(msg) if !m.is_sphere() => usage_error("--manifold", msg),
                    e => e,
                }),
            };
            let r = r.unwrap_or_else(|e| match e {
                Error::Domain(msg) if msg.contains("steps") => usage_error("--steps", msg),
                e => usage_error(flag_for(&e), e),
            });
            let text = match a.sample.format {
                Format::Json => to_json(&r.summary()),
                Format::Csv => r.to_csv(),
            };
            emit(&text, &a.sample.output);
        }
        Command::Solve52 { n, output } => {
            let s = solve_thm52::<f64>(n).unwrap_or_else(|e| usage_error("--n", e));
            emit(&to_json(&Solve52Output { n: s.n, p: s.p, q: s.q, c: s.c }), &output);
        }
        Command::Regions(a) => {
            let spec = RegionSpec::new(a.mu, a.nu).unwrap_or_else(|e| usage_error(if a.mu > 0.0 { "--nu" } else { "--mu" }, e));
            let rows = export_region_grid(spec, a.p_range, a.q_range, a.res).unwrap_or_else(|e| {
                let msg = e.to_string();
                let flag = if msg.contains("resolution") {
                    "--res"
                } else if msg.contains("empty p") {
                    "--p-range"
                } else {
                    "--q-range"
                };
                usage_error(flag, msg)
            });
            emit(&grid_csv(&rows), &a.output);
            if let Some(path) = &a.svg {
                if let Err(e) = fs::write(path, grid_svg(&rows, spec, a.p_range, a.q_range, a.res)) {
                    usage_error("--svg", format!("{}: {e}", path.display()));
                }
            }
        }
        Command::Verify { fast, seed, json } => {
            let report = verify::run(VerifyOptions { seed, fast });
            print!("{}", report.table());
            if let Some(path) = &json {
                if let Err(e) = fs::write(path, report.to_json()) {
                    usage_error("--json", format!("{}: {e}", path.display()));
                }
            }
            if !report.ok() {
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}

/// Like `Cli::parse`, but every parse error also carries the usage line.
fn parse_args() -> Cli {
    let err = match Cli::try_parse() {
        Ok(cli) => return cli,
        Err(e) => e,
    };
    if !err.use_stderr() {
        err.exit();
    }
    let text = err.render().to_string();
    eprint!("{text}");
    if !text.contains("Usage:") {
        let mut cmd = Cli::command();
        cmd.build();
        let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).collect();
        let sub = std::env::args().skip(1).find(|a| names.contains(a));
        let usage = match sub.and_then(|name| cmd.find_subcommand_mut(&name)) {
            Some(c) => c.render_usage(),
            None => cmd.render_usage(),
        };
        eprintln!("\n{usage}");
    }
    std::process::exit(2)
}

fn main() -> ExitCode {
    let cli = parse_args();
    if let Some(n) = cli.threads {
        if n == 0 {
            usage_error("--threads", "must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            usage_error("--threads", e);
        }
    }
    run(cli)
}
