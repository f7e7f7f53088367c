//! Experiment artifacts and the sweep driver.
//!
//! Every run can be captured as three files: `trace.csv` (one row per
//! optimization round), `alpha.csv` (final per-device decisions), and
//! `summary.json` (headline numbers). Sweeps fan a config axis out over
//! values, seeds, and schemes into `sweep.csv` plus a per-cell median
//! digest `sweep_median.csv`. All numeric output uses a fixed 12
//! significant digit scientific format so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{parse_config, SystemConfig};
use crate::orchestrator::{Decisions, IterationTrace, RunResult};
use crate::scenario::{run_scheme, Instance, Scheme};
use crate::Result;

fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

pub const TRACE_HEADER: &str = "iter,j_value,sum_delay_s,loss_term,t_dl_sum,t_ul_sum,\
t_comp_sum,dt_fraction,violations,step1_ms,step2_ms,step3_ms,step4_ms,step5_ms";

/// Renders the per-round trace table.
pub fn trace_csv(trace: &[IterationTrace]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{TRACE_HEADER}");
    for r in trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.iter,
            fmt_f(r.j_value),
            fmt_f(r.sum_delay_s),
            fmt_f(r.loss_term),
            fmt_f(r.t_dl_sum),
            fmt_f(r.t_ul_sum),
            fmt_f(r.t_comp_sum),
            fmt_f(r.dt_fraction),
            r.violations,
            fmt_f(r.step_ms[0]),
            fmt_f(r.step_ms[1]),
            fmt_f(r.step_ms[2]),
            fmt_f(r.step_ms[3]),
            fmt_f(r.step_ms[4]),
        );
    }
    s
}

pub const ALPHA_HEADER: &str = "k,alpha_k,m_k,delta_f_k,p_ap_k";

/// Renders the final per-device decision table.
pub fn alpha_csv(d: &Decisions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{ALPHA_HEADER}");
    for k in 0..d.m.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            k,
            fmt_f(d.alpha[k]),
            d.m[k],
            fmt_f(d.delta_f[k]),
            fmt_f(d.p_ap[k]),
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSummary {
    pub quad_value: f64,
    pub objective: f64,
    pub objective_upper: f64,
    pub iterations: usize,
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scheme: String,
    pub seed: u64,
    pub k_users: usize,
    pub m_layers: usize,
    pub j_value: f64,
    pub sum_delay_s: f64,
    pub loss_term: f64,
    pub t_dl_sum: f64,
    pub t_ul_sum: f64,
    pub t_comp_sum: f64,
    pub dt_fraction: f64,
    pub mean_p_ap_w: f64,
    pub converged: bool,
    pub iterations: usize,
    pub infeasible: bool,
    pub violations: usize,
    pub sdp: Option<SdpSummary>,
}

fn last_dt_fraction(res: &RunResult) -> f64 {
    res.trace.last().map(|r| r.dt_fraction).unwrap_or(0.0)
}

fn last_violations(res: &RunResult) -> usize {
    res.trace.last().map(|r| r.violations).unwrap_or(0)
}

pub fn summarize(res: &RunResult, scheme: Scheme, seed: u64, cfg: &SystemConfig) -> RunSummary {
    let k = res.decisions.p_ap.len().max(1);
    RunSummary {
        scheme: scheme.to_string(),
        seed,
        k_users: cfg.k_users,
        m_layers: cfg.m_layers,
        j_value: res.objective.j,
        sum_delay_s: res.objective.sum_delay_s,
        loss_term: res.objective.loss_term,
        t_dl_sum: res.objective.t_dl_sum,
        t_ul_sum: res.objective.t_ul_sum,
        t_comp_sum: res.objective.t_comp_sum,
        dt_fraction: last_dt_fraction(res),
        mean_p_ap_w: res.decisions.p_ap.iter().sum::<f64>() / k as f64,
        converged: res.converged,
        iterations: res.iterations,
        infeasible: res.infeasible,
        violations: last_violations(res),
        sdp: res.phase.as_ref().map(|p| SdpSummary {
            quad_value: p.quad_value,
            objective: p.sdp_objective,
            objective_upper: p.sdp_upper,
            iterations: p.sdp_iterations,
        }),
    }
}

/// Executes one scheme and writes `trace.csv`, `alpha.csv`, and
/// `summary.json` under `out_dir` (created if needed).
pub fn run_to_dir(
    cfg: &SystemConfig,
    scheme: Scheme,
    seed: u64,
    timings: bool,
    out_dir: &Path,
) -> Result<RunResult> {
    let inst = Instance::prepare(cfg, seed)?;
    let res = run_scheme_timed(&inst, scheme, timings)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("trace.csv"), trace_csv(&res.trace))?;
    std::fs::write(out_dir.join("alpha.csv"), alpha_csv(&res.decisions))?;
    let summary = summarize(&res, scheme, seed, cfg);
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    std::fs::write(out_dir.join("summary.json"), json)?;
    Ok(res)
}

fn run_scheme_timed(inst: &Instance, scheme: Scheme, timings: bool) -> Result<RunResult> {
    run_scheme(inst, scheme, timings)
}

/// Applies `key = value` on top of a config through the regular parse
/// path, so overrides validate exactly like file input.
pub fn apply_override(cfg: &SystemConfig, key: &str, value: f64) -> Result<SystemConfig> {
    let text = format!("{}\n{} = {}\n", cfg.to_kv_string(), key, value);
    parse_config(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub j_value: f64,
    pub final_delay_s: f64,
    pub mean_p_ap_w: f64,
    pub dt_fraction: f64,
    pub loss_term: f64,
    pub converged: bool,
    pub infeasible: bool,
}

/// Fans one config axis out over values, seeds, and schemes. Row order
/// is values outermost, then seeds, then schemes, so files are stable.
pub fn run_sweep(
    base: &SystemConfig,
    axis: &str,
    values: &[f64],
    schemes: &[Scheme],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len() * seeds.len() * schemes.len());
    for &value in values {
        let cfg = apply_override(base, axis, value)?;
        for &seed in seeds {
            let inst = Instance::prepare(&cfg, seed)?;
            for &scheme in schemes {
                let res = run_scheme(&inst, scheme, false)?;
                let k = res.decisions.p_ap.len().max(1);
                rows.push(SweepRow {
                    axis: axis.to_string(),
                    value,
                    scheme,
                    seed,
                    j_value: res.objective.j,
                    final_delay_s: res.objective.sum_delay_s,
                    mean_p_ap_w: res.decisions.p_ap.iter().sum::<f64>() / k as f64,
                    dt_fraction: last_dt_fraction(&res),
                    loss_term: res.objective.loss_term,
                    converged: res.converged,
                    infeasible: res.infeasible,
                });
            }
        }
    }
    Ok(rows)
}

pub const SWEEP_HEADER: &str =
    "axis,value,scheme,seed,j_value,final_delay_s,mean_p_ap_w,dt_fraction,loss_term,converged,infeasible";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{SWEEP_HEADER}");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            fmt_f(r.value),
            r.scheme,
            r.seed,
            fmt_f(r.j_value),
            fmt_f(r.final_delay_s),
            fmt_f(r.mean_p_ap_w),
            fmt_f(r.dt_fraction),
            fmt_f(r.loss_term),
            r.converged,
            r.infeasible,
        );
    }
    s
}

fn median(sorted: &mut Vec<f64>) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub const SWEEP_MEDIAN_HEADER: &str = "axis,value,scheme,n_seeds,j_value,final_delay_s,\
mean_p_ap_w,dt_fraction,loss_term,n_converged,n_infeasible";

/// Per-(value, scheme) medians across seeds, in first-seen cell order.
pub fn sweep_median_csv(rows: &[SweepRow]) -> String {
    let mut cells: Vec<(f64, Scheme)> = Vec::new();
    for r in rows {
        if !cells
            .iter()
            .any(|&(v, s)| v.to_bits() == r.value.to_bits() && s == r.scheme)
        {
            cells.push((r.value, r.scheme));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "{SWEEP_MEDIAN_HEADER}");
    for (value, scheme) in cells {
        let cell: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| r.value.to_bits() == value.to_bits() && r.scheme == scheme)
            .collect();
        let pick = |f: fn(&SweepRow) -> f64| -> f64 {
            let mut v: Vec<f64> = cell.iter().map(|r| f(r)).collect();
            median(&mut v)
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cell[0].axis,
            fmt_f(value),
            scheme,
            cell.len(),
            fmt_f(pick(|r| r.j_value)),
            fmt_f(pick(|r| r.final_delay_s)),
            fmt_f(pick(|r| r.mean_p_ap_w)),
            fmt_f(pick(|r| r.dt_fraction)),
            fmt_f(pick(|r| r.loss_term)),
            cell.iter().filter(|r| r.converged).count(),
            cell.iter().filter(|r| r.infeasible).count(),
        );
    }
    s
}

/// Runs a sweep and writes `sweep.csv` and `sweep_median.csv`.
pub fn sweep_to_dir(
    base: &SystemConfig,
    axis: &str,
    values: &[f64],
    schemes: &[Scheme],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<Vec<SweepRow>> {
    let rows = run_sweep(base, axis, values, schemes, seeds)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("sweep.csv"), sweep_csv(&rows))?;
    std::fs::write(out_dir.join("sweep_median.csv"), sweep_median_csv(&rows))?;
    Ok(rows)
}
