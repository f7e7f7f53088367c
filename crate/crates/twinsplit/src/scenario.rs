//! Run assembly: materializing a seeded instance from a config,
//! dispatching the optimization schemes, and auditing decision tuples
//! against every hard constraint.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{self, AdmmParams, GaParams};
use crate::channel::{effective_uplink_gain, generate_channels, ChannelSet, Geometry};
use crate::config::SystemConfig;
use crate::delay::{compute_delay, draw_profiles, rate_bps, UserProfile};
use crate::orchestrator::{self, Decisions, RunResult};
use crate::split::LossProfile;
use crate::{Error, Result};

/// Everything random about one run, fixed up front: positions,
/// channels, and device compute draws.
#[derive(Debug, Clone)]
pub struct Instance {
    pub cfg: SystemConfig,
    pub geometry: Geometry,
    pub channels: ChannelSet,
    pub profiles: Vec<UserProfile>,
    pub loss: LossProfile,
    pub seed: u64,
}

impl Instance {
    /// Validates the config and draws the instance for `seed`.
    pub fn prepare(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let geometry = Geometry::materialize(cfg, seed);
        let channels = generate_channels(cfg, &geometry, seed);
        let profiles = draw_profiles(cfg, seed);
        Ok(Self {
            cfg: cfg.clone(),
            geometry,
            channels,
            profiles,
            loss: cfg.loss_profile(),
            seed,
        })
    }
}

/// Optimization schemes sharing the run interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Five-block alternating descent (the full design).
    Descent,
    /// Everything computed on-device, nothing transmitted.
    FullLocal,
    /// Raw inputs shipped up, the whole model runs at the server.
    FullOffload,
    /// Genetic search over cut layers, other blocks re-solved exactly.
    Ga,
    /// Consensus splitting on a continuous cut relaxation.
    Admm,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Descent,
        Scheme::FullLocal,
        Scheme::FullOffload,
        Scheme::Ga,
        Scheme::Admm,
    ];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::Descent => "descent",
            Scheme::FullLocal => "local",
            Scheme::FullOffload => "offload",
            Scheme::Ga => "ga",
            Scheme::Admm => "admm",
        };
        f.write_str(s)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "descent" => Ok(Scheme::Descent),
            "local" => Ok(Scheme::FullLocal),
            "offload" => Ok(Scheme::FullOffload),
            "ga" => Ok(Scheme::Ga),
            "admm" => Ok(Scheme::Admm),
            other => Err(Error::Domain {
                op: "scheme",
                msg: format!(
                    "unknown scheme '{other}' (expected descent, local, offload, ga, admm)"
                ),
            }),
        }
    }
}

/// Runs one scheme on a prepared instance.
pub fn run_scheme(inst: &Instance, scheme: Scheme, timings: bool) -> Result<RunResult> {
    match scheme {
        Scheme::Descent => {
            orchestrator::run_from(inst, orchestrator::initial_decisions(inst), timings)
        }
        Scheme::FullLocal => baselines::run_full_local(inst),
        Scheme::FullOffload => baselines::run_full_offload(inst),
        Scheme::Ga => {
            let cfg = &inst.cfg.ga;
            baselines::run_ga(
                inst,
                &GaParams {
                    population: cfg.population,
                    generations: cfg.generations,
                    crossover_rate: cfg.crossover_rate,
                    mutation_rate: cfg.mutation_rate,
                    tournament_size: cfg.tournament_size,
                    seed_chromosomes: Vec::new(),
                },
            )
        }
        Scheme::Admm => {
            let cfg = &inst.cfg.admm;
            baselines::run_admm(
                inst,
                &AdmmParams {
                    rho: cfg.rho,
                    max_iter: cfg.max_iter,
                    tol: cfg.tol,
                },
            )
        }
    }
}

/// Hard constraints a decision tuple can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    CutLayerRange,
    BinaryActivation,
    TotalPowerBudget,
    PerUserPowerBox,
    FrequencyOffsetBox,
    PhaseRange,
    UnitModulus,
    MinUplinkRate,
    ComputeDeadline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub user: Option<usize>,
    pub detail: String,
}

const REL_SLACK: f64 = 1e-9;

/// Checks a decision tuple against every hard constraint and returns
/// one entry per breach. The deadline check covers the compute term
/// only (communication is priced by the objective, not deadlined).
pub fn audit(inst: &Instance, d: &Decisions) -> Vec<Violation> {
    let cfg = &inst.cfg;
    let mut out = Vec::new();
    let mut push = |kind, user, detail: String| {
        out.push(Violation { kind, user, detail });
    };

    for (k, &mk) in d.m.iter().enumerate() {
        if mk < 1 || mk > cfg.m_layers {
            push(
                ConstraintKind::CutLayerRange,
                Some(k),
                format!("m = {mk} outside 1..={}", cfg.m_layers),
            );
        }
    }
    for (k, &a) in d.alpha.iter().enumerate() {
        if a != 0.0 && a != 1.0 {
            push(
                ConstraintKind::BinaryActivation,
                Some(k),
                format!("alpha = {a}"),
            );
        }
    }
    let p_sum: f64 = d.p_ap.iter().sum();
    if p_sum > cfg.radio.p_total_w * (1.0 + REL_SLACK) {
        push(
            ConstraintKind::TotalPowerBudget,
            None,
            format!("sum p = {p_sum} over budget {}", cfg.radio.p_total_w),
        );
    }
    for (k, &p) in d.p_ap.iter().enumerate() {
        if p < 0.0 || p > cfg.radio.p_max_w * (1.0 + REL_SLACK) {
            push(
                ConstraintKind::PerUserPowerBox,
                Some(k),
                format!("p = {p} outside [0, {}]", cfg.radio.p_max_w),
            );
        }
    }
    let df_sum: f64 = d.delta_f.iter().sum();
    if df_sum > cfg.delta_f_max_hz * (1.0 + REL_SLACK) {
        push(
            ConstraintKind::FrequencyOffsetBox,
            None,
            format!("sum delta_f = {df_sum} over budget {}", cfg.delta_f_max_hz),
        );
    }
    for (k, &df) in d.delta_f.iter().enumerate() {
        if df < 0.0 || df > cfg.delta_f_max_hz * (1.0 + REL_SLACK) {
            push(
                ConstraintKind::FrequencyOffsetBox,
                Some(k),
                format!("delta_f = {df}"),
            );
        }
    }
    for (i, z) in d.v.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            push(
                ConstraintKind::PhaseRange,
                None,
                format!("element {i} is not a finite phase"),
            );
        } else if (z.norm() - 1.0).abs() > 1e-9 {
            push(
                ConstraintKind::UnitModulus,
                None,
                format!("element {i} has modulus {}", z.norm()),
            );
        }
    }
    for k in 0..d.m.len().min(inst.profiles.len()) {
        let ul_gain = effective_uplink_gain(&inst.channels, k, &d.v);
        let r_ul = rate_bps(
            cfg.radio.bandwidth_hz,
            cfg.radio.p_ul_w,
            ul_gain,
            cfg.radio.noise_w,
        );
        if r_ul < cfg.radio.r_min_bps * (1.0 - REL_SLACK) {
            push(
                ConstraintKind::MinUplinkRate,
                Some(k),
                format!("uplink rate {r_ul} below floor {}", cfg.radio.r_min_bps),
            );
        }
        let prof = &inst.profiles[k];
        let mk = d.m[k].clamp(1, cfg.m_layers);
        let t_comp = compute_delay(prof.cum_cycles(mk), d.alpha[k], prof.f_loc_hz, d.delta_f[k]);
        if t_comp > cfg.t_max_s * (1.0 + REL_SLACK) {
            push(
                ConstraintKind::ComputeDeadline,
                Some(k),
                format!("compute delay {t_comp} exceeds {}", cfg.t_max_s),
            );
        }
    }
    out
}
