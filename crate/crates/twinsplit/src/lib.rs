//! Desk-scale simulator and optimizer for split learning over an
//! IRS-assisted multi-antenna uplink/downlink, with a digital-twin (DT)
//! compute backup at the server side.
//!
//! `K` user devices each run the first `m_k` layers of a shared model
//! locally and ship the cut-layer activation to an access point through a
//! reconfigurable reflecting surface. Devices that cannot meet a compute
//! deadline mirror their workload onto a server-hosted twin that runs at
//! the local clock plus an allocated frequency offset. The library
//! minimizes
//!
//! ```text
//! J = sum_k (T_dl,k + T_ul,k + T_comp,k) + lambda * Lbar(m)
//! ```
//!
//! by block-coordinate descent over five blocks per sweep: cut layers,
//! twin activation, frequency offsets, surface phases (semidefinite
//! relaxation plus randomization), and downlink transmit powers
//! (Lambert-W water-filling). Four reference schemes (all-local,
//! all-offload, a genetic search, and a consensus-ADMM relaxation) share
//! the same channel, delay, and resolution machinery.
//!
//! Entry points: [`config::SystemConfig`] for scenario description,
//! [`scenario::Scenario`] to materialize channels and device profiles,
//! [`orchestrator::run`] for the alternating optimizer,
//! [`exp::run_experiment`] / [`exp::run_sweep`] for the file-producing
//! drivers used by the `twinsplit` binary.

pub mod baselines;
pub mod channel;
pub mod config;
pub mod delay;
pub mod dt;
pub mod exp;
pub mod guide;
pub mod irs;
pub mod numerics;
pub mod orchestrator;
pub mod power;
pub mod scenario;
pub mod split;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("bisection bracket [{lo}, {hi}] does not change sign (f(lo)={flo}, f(hi)={fhi})")]
    Bracketing { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("bisection failed to converge after {iters} iterations; best x = {best}")]
    BisectionNoConvergence { iters: usize, best: f64 },

    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigendecomposition did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    EigNoConvergence { sweeps: usize, off: f64 },

    #[error("SDP solver did not converge in {iters} iterations (gap {gap:e}); best iterate attached")]
    SdpConvergence {
        iters: usize,
        gap: f64,
        best: Box<irs::SdpSolution>,
    },

    #[error("power allocation infeasible: sum of per-user lower bounds {min_sum} W exceeds budget {budget} W")]
    InfeasiblePower { min_sum: f64, budget: f64 },

    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("config validation failed:\n{}", .0.join("\n"))]
    ConfigValidation(Vec<String>),

    #[error("run aborted at iteration {iter}: {source}")]
    RunAborted {
        iter: usize,
        trace: Vec<orchestrator::IterationTrace>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
