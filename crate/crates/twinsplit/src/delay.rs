//! Per-device delay terms and the scalar objective they roll up into.
//!
//! A device that cuts at layer `m` computes layers `1..=m` locally
//! (possibly backed by its twin's frequency boost), uploads the layer-m
//! activation, and receives a fixed-size downlink payload. The run
//! objective is
//!
//! `J = sum_k (t_dl_k + t_ul_k + t_comp_k) + lambda * mean_k loss(m_k)`.

use rand::Rng;

use crate::channel::{stream_rng, streams};
use crate::config::{PayloadParams, SystemConfig};
use crate::split::LossProfile;

/// One device's compute draw: per-layer cycle costs and local clock.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub layer_cycles: Vec<f64>,
    pub f_loc_hz: f64,
}

impl UserProfile {
    /// Cycles to execute layers `1..=m` locally.
    pub fn cum_cycles(&self, m: usize) -> f64 {
        self.layer_cycles[..m].iter().sum()
    }

    /// Total cycles of the whole model.
    pub fn total_cycles(&self) -> f64 {
        self.layer_cycles.iter().sum()
    }
}

/// Draws every device's layer loads and local clock (stream 1). Per
/// device: `m_layers` uniform loads, then the clock.
pub fn draw_profiles(cfg: &SystemConfig, seed: u64) -> Vec<UserProfile> {
    let mut rng = stream_rng(seed, streams::PROFILES);
    let (lo, hi) = cfg.load_range_cycles();
    (0..cfg.k_users)
        .map(|_| {
            let layer_cycles = (0..cfg.m_layers)
                .map(|_| rng.gen_range(lo..=hi))
                .collect();
            let f_loc_hz = rng.gen_range(cfg.compute.f_loc_min_hz..=cfg.compute.f_loc_max_hz);
            UserProfile {
                layer_cycles,
                f_loc_hz,
            }
        })
        .collect()
}

/// Activation size uploaded when cutting at layer `m`.
pub fn uplink_bits(payload: &PayloadParams, m: usize) -> f64 {
    payload.bits_per_element * payload.width0_elements * payload.width_decay.powi(m as i32)
}

/// Shannon rate `B log2(1 + p * gain / noise)` in bit/s.
pub fn rate_bps(bandwidth_hz: f64, p_w: f64, gain: f64, noise_w: f64) -> f64 {
    bandwidth_hz * (1.0 + p_w * gain / noise_w).log2()
}

/// Transfer time. Zero payload takes zero time even on a dead link; a
/// positive payload over a zero rate never completes.
pub fn comm_delay(bits: f64, rate_bps: f64) -> f64 {
    if bits == 0.0 {
        0.0
    } else if rate_bps == 0.0 {
        f64::INFINITY
    } else {
        bits / rate_bps
    }
}

/// Local execution time for `cycles` under activation `alpha`: the
/// device runs at its own clock when `alpha = 1`, and at the
/// twin-boosted clock `f + delta_f` when `alpha = 0`.
pub fn compute_delay(cycles: f64, alpha: f64, f_loc_hz: f64, delta_f_hz: f64) -> f64 {
    if cycles == 0.0 {
        return 0.0;
    }
    alpha * cycles / f_loc_hz + (1.0 - alpha) * cycles / (f_loc_hz + delta_f_hz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown {
    pub t_dl: f64,
    pub t_ul: f64,
    pub t_comp: f64,
}

impl DelayBreakdown {
    pub fn total(&self) -> f64 {
        self.t_dl + self.t_ul + self.t_comp
    }
}

/// All three delay terms for one device under a full decision tuple.
#[allow(clippy::too_many_arguments)]
pub fn user_delay(
    cfg: &SystemConfig,
    profile: &UserProfile,
    dl_gain: f64,
    ul_gain: f64,
    m: usize,
    alpha: f64,
    delta_f_hz: f64,
    p_ap_w: f64,
) -> DelayBreakdown {
    let b = cfg.radio.bandwidth_hz;
    let noise = cfg.radio.noise_w;
    let r_dl = rate_bps(b, p_ap_w, dl_gain, noise);
    let r_ul = rate_bps(b, cfg.radio.p_ul_w, ul_gain, noise);
    DelayBreakdown {
        t_dl: comm_delay(cfg.payload.d_dl_bits, r_dl),
        t_ul: comm_delay(uplink_bits(&cfg.payload, m), r_ul),
        t_comp: compute_delay(profile.cum_cycles(m), alpha, profile.f_loc_hz, delta_f_hz),
    }
}

/// Objective value decomposed into the pieces the run trace logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    pub j: f64,
    pub sum_delay_s: f64,
    pub loss_term: f64,
    pub t_dl_sum: f64,
    pub t_ul_sum: f64,
    pub t_comp_sum: f64,
}

/// Evaluates `J` for a full decision vector. Gains are per device under
/// the current phase vector; decisions are parallel slices.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_objective(
    cfg: &SystemConfig,
    profiles: &[UserProfile],
    loss: &LossProfile,
    dl_gains: &[f64],
    ul_gains: &[f64],
    m: &[usize],
    alpha: &[f64],
    delta_f: &[f64],
    p_ap: &[f64],
) -> ObjectiveParts {
    let k = profiles.len();
    let mut t_dl_sum = 0.0;
    let mut t_ul_sum = 0.0;
    let mut t_comp_sum = 0.0;
    let mut loss_sum = 0.0;
    for i in 0..k {
        let d = user_delay(
            cfg,
            &profiles[i],
            dl_gains[i],
            ul_gains[i],
            m[i],
            alpha[i],
            delta_f[i],
            p_ap[i],
        );
        t_dl_sum += d.t_dl;
        t_ul_sum += d.t_ul;
        t_comp_sum += d.t_comp;
        loss_sum += loss.loss(m[i]);
    }
    let sum_delay_s = t_dl_sum + t_ul_sum + t_comp_sum;
    let loss_term = cfg.lambda_weight * loss_sum / k as f64;
    ObjectiveParts {
        j: sum_delay_s + loss_term,
        sum_delay_s,
        loss_term,
        t_dl_sum,
        t_ul_sum,
        t_comp_sum,
    }
}
