//! Command-line front end: single runs and one-axis sweeps, writing
//! the standard artifact files into an output directory.
//!
//! Exit codes: 0 success, 2 bad usage or config, 3 run finished but
//! infeasible (artifacts still written), 4 a solver gave up.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twinsplit::config::{load_config, SystemConfig};
use twinsplit::exp::{run_to_dir, sweep_to_dir};
use twinsplit::scenario::Scheme;
use twinsplit::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "twinsplit", version, about = "Split-point, twin, surface, and power co-optimization runs")]
struct Args {
    /// Config file (flat `section.key = value`); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Scheme for a single run: descent, local, offload, ga, admm.
    #[arg(long, default_value = "descent")]
    scheme: String,

    /// Seed for every random draw of a single run.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Cap on outer optimization rounds (descent only).
    #[arg(long)]
    iters: Option<usize>,

    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Config key to sweep; switches to sweep mode.
    #[arg(long)]
    sweep: Option<String>,

    /// Comma-separated axis values (sweep mode).
    #[arg(long)]
    values: Option<String>,

    /// Comma-separated schemes to run per sweep cell.
    #[arg(long, default_value = "descent")]
    schemes: String,

    /// Number of seeds per sweep cell, used as seeds 0..N.
    #[arg(long, default_value_t = 3)]
    seeds: u64,

    /// Record per-block wall times in trace.csv. Off by default so
    /// identical runs stay byte-identical.
    #[arg(long)]
    timings: bool,

    /// Log per-round progress to stderr.
    #[arg(long)]
    verbose: bool,
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::ConfigParse { .. } | Error::ConfigValidation(_) => EXIT_USAGE,
        Error::Io(_) | Error::Json(_) => 1,
        Error::RunAborted { source, .. } => exit_for(source),
        _ => EXIT_SOLVER,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let mut cfg = match &args.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_for(&e));
            }
        },
        None => SystemConfig::default(),
    };
    if let Some(iters) = args.iters {
        cfg.solver.max_iter = iters;
    }

    let code = if args.sweep.is_some() {
        run_sweep_mode(&args, &cfg)
    } else {
        run_single_mode(&args, &cfg)
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn parse_schemes(spec: &str) -> Result<Vec<Scheme>, String> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.parse::<Scheme>() {
            Ok(s) => out.push(s),
            Err(e) => return Err(e.to_string()),
        }
    }
    if out.is_empty() {
        return Err("no schemes given".to_string());
    }
    Ok(out)
}

fn run_single_mode(args: &Args, cfg: &SystemConfig) -> twinsplit::Result<u8> {
    let scheme = match args.scheme.parse::<Scheme>() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    let res = run_to_dir(cfg, scheme, args.seed, args.timings, &args.out)?;
    std::fs::write(args.out.join("config.txt"), cfg.to_kv_string())?;
    for row in &res.trace {
        log::info!(
            "round {}: J = {:.6e}, delay = {:.6e} s, twin share = {:.3}",
            row.iter,
            row.j_value,
            row.sum_delay_s,
            row.dt_fraction
        );
    }
    log::info!(
        "{} finished: converged = {}, infeasible = {}",
        scheme,
        res.converged,
        res.infeasible
    );
    Ok(if res.infeasible { EXIT_INFEASIBLE } else { 0 })
}

fn run_sweep_mode(args: &Args, cfg: &SystemConfig) -> twinsplit::Result<u8> {
    let axis = args.sweep.as_deref().expect("sweep mode requires --sweep");
    let Some(values_spec) = args.values.as_deref() else {
        eprintln!("error: --sweep requires --values");
        return Ok(EXIT_USAGE);
    };
    let mut values = Vec::new();
    for part in values_spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                eprintln!("error: --values: '{part}' is not a number");
                return Ok(EXIT_USAGE);
            }
        }
    }
    if values.is_empty() {
        eprintln!("error: --values lists no values");
        return Ok(EXIT_USAGE);
    }
    let schemes = match parse_schemes(&args.schemes) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Ok(EXIT_USAGE);
        }
    };
    if args.seeds == 0 {
        eprintln!("error: --seeds must be at least 1");
        return Ok(EXIT_USAGE);
    }
    let seeds: Vec<u64> = (0..args.seeds).collect();

    let rows = sweep_to_dir(cfg, axis, &values, &schemes, &seeds, &args.out)?;
    std::fs::write(args.out.join("config.txt"), cfg.to_kv_string())?;
    for row in &rows {
        log::info!(
            "{} = {:e}, scheme = {}, seed = {}: J = {:.6e}{}",
            row.axis,
            row.value,
            row.scheme,
            row.seed,
            row.j_value,
            if row.infeasible { " (infeasible)" } else { "" }
        );
    }
    Ok(0)
}
