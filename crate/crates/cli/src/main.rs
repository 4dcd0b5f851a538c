//! `rip`: generate nets, solve them, sweep timing targets, compare strategies.
//!
//! Exit codes: 0 success, 1 infeasible target, 2 usage or validation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rip_core::bench::{
    compare, compute_tau_min, gen_net, reference_config, sweep, GenParams, Strategy, SweepReport,
};
use rip_core::dp::{dp_min_power_with, width_library, width_range, DpConfig, DpOptions};
use rip_core::io::{NetFile, SolutionFile, TechConfig};
use rip_core::rip::{refine_only, rip, RipParams};
use rip_core::{Error, Net64, Tech64};

#[derive(Parser)]
#[command(name = "rip", version, about = "Minimum-power repeater insertion")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random net.
    Gen(GenArgs),
    /// Insert repeaters into one net.
    Solve(SolveArgs),
    /// Run strategies over a range of targets on every net in a directory.
    Sweep(SweepArgs),
    /// Aggregate a sweep report into summary statistics.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Technology config; defaults to the bundled one.
    #[arg(long)]
    tech: Option<PathBuf>,
    /// Driver and receiver width (u).
    #[arg(long, default_value_t = 100.0)]
    terminal_width: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rip,
    Dp,
    Refine,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    net: PathBuf,
    /// Target as a multiple of τ_min under the reference configuration.
    #[arg(long, conflicts_with = "target_sec", required_unless_present = "target_sec")]
    target_ratio: Option<f64>,
    /// Target in seconds.
    #[arg(long)]
    target_sec: Option<f64>,
    #[arg(long, value_enum)]
    mode: Mode,
    /// DP width range as MIN:MAX:STEP (u).
    #[arg(long, conflicts_with_all = ["dp_lib_size", "dp_gran"])]
    dp_widths: Option<String>,
    /// DP library size, starting at 10u with granularity `--dp-gran`.
    #[arg(long, requires = "dp_gran")]
    dp_lib_size: Option<usize>,
    #[arg(long, requires = "dp_lib_size")]
    dp_gran: Option<f64>,
    /// Candidate spacing (µm) of the DP, or of the coarse DP in rip/refine mode.
    #[arg(long)]
    loc_step: Option<f64>,
    #[arg(long)]
    refine_step: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of net JSON files; the file stem is the net id.
    #[arg(long)]
    nets: PathBuf,
    /// Comma-separated strategy ids, e.g. `rip,dp,dp-range-g40`.
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    targets: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    summary: PathBuf,
    #[arg(long, default_value = "dp")]
    baseline: String,
    #[arg(long, default_value = "rip")]
    candidate: String,
}

/// Failure carrying its exit code.
enum Fail {
    Usage(String),
    Infeasible,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible => Fail::Infeasible,
            e => Fail::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => run_gen(a),
        Cmd::Solve(a) => run_solve(a),
        Cmd::Sweep(a) => run_sweep(a),
        Cmd::Compare(a) => run_compare(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Infeasible) => {
            eprintln!("infeasible: no solution meets the delay target");
            ExitCode::from(1)
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_tech(path: Option<&Path>) -> Result<TechConfig, Fail> {
    Ok(match path {
        Some(p) => TechConfig::read(p)?,
        None => TechConfig::default(),
    })
}

fn run_gen(a: GenArgs) -> Result<(), Fail> {
    let cfg = load_tech(a.tech.as_deref())?;
    let mut params = GenParams::new(a.seed, &cfg);
    params.driver_width = a.terminal_width;
    params.receiver_width = a.terminal_width;
    let net = gen_net(&params)?;
    let tech = cfg.tech.to_tech()?;
    NetFile::from_parts(&tech, &net).write(&a.out)?;
    Ok(())
}

fn positive(flag: &str, v: f64) -> Result<f64, Fail> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Fail::Usage(format!("{flag} must be a positive number, got {v}")))
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, Fail> {
    let bad = || Fail::Usage(format!("--dp-widths expects MIN:MAX:STEP, got '{s}'"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [min, max, step] = parts[..] else { return Err(bad()) };
    if !(min > 0.0 && max >= min && step > 0.0) {
        return Err(bad());
    }
    Ok(width_range(min, max, step))
}

fn run_solve(a: SolveArgs) -> Result<(), Fail> {
    let (tech, net) = NetFile::read(&a.net)?.to_parts()?;
    let tau_t = match (a.target_sec, a.target_ratio) {
        (Some(t), _) => positive("--target-sec", t)?,
        (None, Some(r)) => {
            let r = positive("--target-ratio", r)?;
            r * compute_tau_min(&tech, &net, &reference_config(&net)?)?
        }
        (None, None) => return Err(Fail::Usage("one of --target-ratio or --target-sec is required".into())),
    };
    if let Some(v) = a.loc_step {
        positive("--loc-step", v)?;
    }

    let t0 = Instant::now();
    let result = match a.mode {
        Mode::Dp => solve_dp(&a, &tech, &net, tau_t).map(|s| (s, vec![])),
        Mode::Rip | Mode::Refine => {
            let mut p = RipParams::default();
            if let Some(v) = a.loc_step {
                p.coarse_loc_step = v;
            }
            if let Some(v) = a.refine_step {
                p.refine.step = positive("--refine-step", v)?;
            }
            if let Some(v) = a.eps0 {
                p.refine.eps0 = positive("--eps0", v)?;
            }
            if matches!(a.mode, Mode::Rip) {
                rip(&tech, &net, tau_t, &p).map(|o| (o.solution, o.stage_trace))
            } else {
                refine_only(&tech, &net, tau_t, &p).map(|s| (s, vec![]))
            }
        }
    };
    let runtime = t0.elapsed().as_secs_f64();
    match result {
        Ok((sol, trace)) => {
            std::fs::write(&a.out, SolutionFile::feasible(&sol, trace, runtime).to_json()).map_err(Error::from)?;
            Ok(())
        }
        Err(Error::Infeasible) | Err(Error::NoConverge(_)) => {
            std::fs::write(&a.out, SolutionFile::infeasible(vec![], runtime).to_json()).map_err(Error::from)?;
            Err(Fail::Infeasible)
        }
        Err(e) => Err(e.into()),
    }
}

fn solve_dp(a: &SolveArgs, tech: &Tech64, net: &Net64, tau_t: f64) -> rip_core::Result<rip_core::Solution64> {
    let widths = match (&a.dp_widths, a.dp_lib_size, a.dp_gran) {
        (Some(s), _, _) => parse_range(s).map_err(|f| match f {
            Fail::Usage(m) => Error::InvalidConfig(m),
            Fail::Infeasible => Error::Infeasible,
        })?,
        (None, Some(n), Some(g)) => width_library(10.0, n, g),
        _ => width_library(10.0, 10, 10.0),
    };
    let cfg = DpConfig::uniform(net, widths, a.loc_step.unwrap_or(200.0))?;
    Ok(dp_min_power_with(tech, net, &cfg, tau_t, &DpOptions::default())?.solution)
}

fn run_sweep(a: SweepArgs) -> Result<(), Fail> {
    if a.strategies.is_empty() {
        return Err(Fail::Usage("--strategies must name at least one strategy".into()));
    }
    if a.targets < 2 {
        return Err(Fail::Usage("--targets must be at least 2".into()));
    }
    let strategies = a
        .strategies
        .iter()
        .map(|s| Strategy::parse(s.trim()))
        .collect::<rip_core::Result<Vec<_>>>()?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&a.nets)
        .map_err(|e| Fail::Usage(format!("--nets {}: {e}", a.nets.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Fail::Usage(format!("--nets {}: no .json files", a.nets.display())));
    }
    let mut report = SweepReport::default();
    for f in &files {
        let id = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let (tech, net) = NetFile::read(f)?.to_parts()?;
        report.extend(sweep(&tech, &net, &id, &strategies, a.targets)?);
    }
    report.write_csv(&a.out)?;
    let mut meta = a.out.clone().into_os_string();
    meta.push(".anchors.json");
    std::fs::write(PathBuf::from(meta), report.anchors_json()).map_err(Error::from)?;
    Ok(())
}

fn run_compare(a: CompareArgs) -> Result<(), Fail> {
    let report = SweepReport::read_csv(&a.report)?;
    let c = compare(&report.rows, &a.baseline, &a.candidate)?;
    let text = serde_json::to_string_pretty(&c).map_err(Error::from)? + "\n";
    std::fs::write(&a.summary, text).map_err(Error::from)?;
    Ok(())
}
