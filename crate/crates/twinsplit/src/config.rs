//! Scenario configuration: a flat `section.key = value` text format,
//! fully-populated defaults, and aggregate validation.
//!
//! An empty file (or [`SystemConfig::default`]) describes the reference
//! scenario: 100 devices, a 12-layer model with per-layer loads drawn
//! uniformly from 0.5..1.5 GFLOPs, local clocks from 5..12 GHz, a
//! 32-antenna access point behind a 32-element reflecting surface, 3 W
//! downlink budget, 1e-11 W noise, 5 kbps uplink rate floor, and a 2 s
//! per-device compute deadline.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::PathLossParams;
use crate::split::LossProfile;
use crate::{Error, Result};

/// Antenna counts, bandwidth, noise, and power budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    pub n_ap: usize,
    pub n_irs: usize,
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub p_total_w: f64,
    pub p_max_w: f64,
    pub p_ul_w: f64,
    pub r_min_bps: f64,
}

/// Node placement. Device positions are either listed explicitly or
/// sampled uniformly from a square box per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub ap: (f64, f64),
    pub irs: (f64, f64),
    pub ud_center: (f64, f64),
    pub ud_box_m: f64,
    pub ud_positions: Option<Vec<(f64, f64)>>,
}

/// Payload model: a fixed downlink broadcast per device plus an uplink
/// activation whose element count decays geometrically with the cut
/// layer, `width(m) = width0 * decay^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayloadParams {
    pub d_dl_bits: f64,
    pub bits_per_element: f64,
    pub width0_elements: f64,
    pub width_decay: f64,
    /// Bits of one raw input sample (the all-offload scheme uploads
    /// this instead of an activation). Defaults to
    /// `bits_per_element * width0_elements`.
    pub raw_input_bits: Option<f64>,
}

impl PayloadParams {
    pub fn raw_bits(&self) -> f64 {
        self.raw_input_bits
            .unwrap_or(self.bits_per_element * self.width0_elements)
    }
}

/// Device compute draw ranges (loads in GFLOPs per layer at one cycle
/// per FLOP, clocks in Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeParams {
    pub load_min_gflops: f64,
    pub load_max_gflops: f64,
    pub f_loc_min_hz: f64,
    pub f_loc_max_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flags {
    /// Reuse the AP-to-surface matrix for the return direction.
    pub reciprocity: bool,
    /// Fold the (normally blocked) direct AP-device path into gains.
    pub direct_link: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub sdp_tol: f64,
    pub n_rand: usize,
    pub max_iter: usize,
    /// Early-exit threshold on the relative objective change per round.
    /// Zero keeps the loop going for the full `max_iter` rounds.
    pub eps_conv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    pub rho: f64,
    pub max_iter: usize,
    pub tol: f64,
}

/// Full scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub k_users: usize,
    pub m_layers: usize,
    /// Weight of the training-loss surrogate in the objective.
    pub lambda_weight: f64,
    /// Effective switched capacitance; parsed for completeness, the
    /// delay objective does not price energy.
    pub kappa: f64,
    /// Per-device compute deadline (s) driving twin activation.
    pub t_max_s: f64,
    /// Server clock used by the all-offload reference scheme.
    pub f_ap_hz: f64,
    pub radio: RadioParams,
    /// Total twin frequency-offset budget (Hz); also the per-device box.
    pub delta_f_max_hz: f64,
    pub pathloss: PathLossParams,
    pub geometry: GeometryConfig,
    pub payload: PayloadParams,
    pub compute: ComputeParams,
    /// Explicit loss table indexed by cut layer; `None` selects
    /// `0.5 * exp(-0.3 m)`.
    pub loss_table: Option<Vec<f64>>,
    pub flags: Flags,
    pub solver: SolverParams,
    pub ga: GaConfig,
    pub admm: AdmmConfig,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            k_users: 100,
            m_layers: 12,
            lambda_weight: 1.0,
            kappa: 1e-28,
            t_max_s: 2.0,
            f_ap_hz: 5e10,
            radio: RadioParams {
                n_ap: 32,
                n_irs: 32,
                bandwidth_hz: 2e8,
                noise_w: 1e-11,
                p_total_w: 3.0,
                p_max_w: 3.0,
                p_ul_w: 0.1,
                r_min_bps: 5e3,
            },
            delta_f_max_hz: 5e10,
            pathloss: PathLossParams::default(),
            geometry: GeometryConfig {
                ap: (0.0, 0.0),
                irs: (50.0, 10.0),
                ud_center: (60.0, 0.0),
                ud_box_m: 20.0,
                ud_positions: None,
            },
            payload: PayloadParams {
                d_dl_bits: 1e6,
                bits_per_element: 32.0,
                width0_elements: 1e6,
                width_decay: 0.8,
                raw_input_bits: None,
            },
            compute: ComputeParams {
                load_min_gflops: 0.5,
                load_max_gflops: 1.5,
                f_loc_min_hz: 5e9,
                f_loc_max_hz: 12e9,
            },
            loss_table: None,
            flags: Flags {
                reciprocity: true,
                direct_link: false,
            },
            solver: SolverParams {
                sdp_tol: 1e-7,
                n_rand: 100,
                max_iter: 25,
                eps_conv: 1e-4,
            },
            ga: GaConfig {
                population: 40,
                generations: 60,
                crossover_rate: 0.8,
                mutation_rate: 0.05,
                tournament_size: 3,
            },
            admm: AdmmConfig {
                rho: 1.0,
                max_iter: 100,
                tol: 1e-4,
            },
        }
    }
}

impl SystemConfig {
    /// Loss surrogate table for this scenario.
    pub fn loss_profile(&self) -> LossProfile {
        match &self.loss_table {
            Some(t) => LossProfile::from_table(t.clone()),
            None => LossProfile::exponential(self.m_layers, 0.5, 0.3),
        }
    }

    /// Per-layer load bounds in cycles (one cycle per FLOP).
    pub fn load_range_cycles(&self) -> (f64, f64) {
        (
            self.compute.load_min_gflops * 1e9,
            self.compute.load_max_gflops * 1e9,
        )
    }

    /// Checks every field, aggregating all problems by key name.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, key: &str, msg: &str| {
            if !ok {
                errs.push(format!("{key}: {msg}"));
            }
        };
        need(self.k_users >= 1, "system.k_users", "must be at least 1");
        need(self.m_layers >= 1, "system.m_layers", "must be at least 1");
        need(
            self.lambda_weight >= 0.0 && self.lambda_weight.is_finite(),
            "system.lambda_weight",
            "must be finite and nonnegative",
        );
        need(self.t_max_s > 0.0, "system.t_max_s", "must be positive");
        need(self.f_ap_hz > 0.0, "system.f_ap_hz", "must be positive");
        need(self.radio.n_ap >= 1, "radio.n_ap", "must be at least 1");
        need(self.radio.n_irs >= 1, "radio.n_irs", "must be at least 1");
        need(
            self.radio.bandwidth_hz > 0.0 && self.radio.bandwidth_hz.is_finite(),
            "radio.bandwidth_hz",
            "must be positive and finite",
        );
        need(
            self.radio.noise_w > 0.0 && self.radio.noise_w.is_finite(),
            "radio.noise_w",
            "must be positive and finite",
        );
        need(
            self.radio.p_total_w > 0.0 && self.radio.p_total_w.is_finite(),
            "radio.p_total_w",
            "must be positive and finite",
        );
        need(
            self.radio.p_max_w > 0.0 && self.radio.p_max_w.is_finite(),
            "radio.p_max_w",
            "must be positive and finite",
        );
        need(self.radio.p_ul_w > 0.0, "radio.p_ul_w", "must be positive");
        need(
            self.radio.r_min_bps >= 0.0,
            "radio.r_min_bps",
            "must be nonnegative",
        );
        need(
            self.delta_f_max_hz > 0.0,
            "dt.delta_f_max_hz",
            "must be positive",
        );
        need(self.pathloss.c0 > 0.0, "pathloss.c0", "must be positive");
        need(self.pathloss.d0_m > 0.0, "pathloss.d0_m", "must be positive");
        need(
            self.pathloss.alpha_ap_irs > 0.0,
            "pathloss.alpha_ap_irs",
            "must be positive",
        );
        need(
            self.pathloss.alpha_irs_ud > 0.0,
            "pathloss.alpha_irs_ud",
            "must be positive",
        );
        need(
            self.geometry.ud_box_m >= 0.0,
            "geometry.ud_box_m",
            "must be nonnegative",
        );
        if let Some(pos) = &self.geometry.ud_positions {
            need(
                pos.len() == self.k_users,
                "geometry.ud_positions",
                &format!("lists {} positions for {} devices", pos.len(), self.k_users),
            );
        }
        need(
            self.payload.d_dl_bits > 0.0,
            "payload.d_dl_bits",
            "must be positive",
        );
        need(
            self.payload.bits_per_element > 0.0,
            "payload.bits_per_element",
            "must be positive",
        );
        need(
            self.payload.width0_elements > 0.0,
            "payload.width0_elements",
            "must be positive",
        );
        need(
            self.payload.width_decay > 0.0 && self.payload.width_decay.is_finite(),
            "payload.width_decay",
            "must be positive and finite",
        );
        if let Some(raw) = self.payload.raw_input_bits {
            need(raw > 0.0, "payload.raw_input_bits", "must be positive");
        }
        need(
            self.compute.load_min_gflops > 0.0
                && self.compute.load_max_gflops >= self.compute.load_min_gflops,
            "compute.load_min_gflops",
            "requires 0 < min <= max",
        );
        need(
            self.compute.f_loc_min_hz > 0.0
                && self.compute.f_loc_max_hz >= self.compute.f_loc_min_hz,
            "compute.f_loc_min_hz",
            "requires 0 < min <= max",
        );
        if let Some(t) = &self.loss_table {
            need(
                t.len() == self.m_layers,
                "loss.profile",
                &format!("has {} entries for {} layers", t.len(), self.m_layers),
            );
            need(
                t.iter().all(|v| v.is_finite() && *v >= 0.0),
                "loss.profile",
                "entries must be finite and nonnegative",
            );
        }
        need(self.solver.sdp_tol > 0.0, "solver.sdp_tol", "must be positive");
        need(self.solver.n_rand >= 1, "solver.n_rand", "must be at least 1");
        need(
            self.solver.max_iter >= 1,
            "solver.max_iter",
            "must be at least 1",
        );
        need(
            self.solver.eps_conv >= 0.0,
            "solver.eps_conv",
            "must be nonnegative",
        );
        need(self.ga.population >= 2, "ga.population", "must be at least 2");
        need(
            self.ga.generations >= 1,
            "ga.generations",
            "must be at least 1",
        );
        need(
            (0.0..=1.0).contains(&self.ga.crossover_rate),
            "ga.crossover_rate",
            "must lie in [0, 1]",
        );
        need(
            (0.0..=1.0).contains(&self.ga.mutation_rate),
            "ga.mutation_rate",
            "must lie in [0, 1]",
        );
        need(
            self.ga.tournament_size >= 1,
            "ga.tournament_size",
            "must be at least 1",
        );
        need(self.admm.rho > 0.0, "admm.rho", "must be positive");
        need(self.admm.max_iter >= 1, "admm.max_iter", "must be at least 1");
        need(self.admm.tol > 0.0, "admm.tol", "must be positive");
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigValidation(errs))
        }
    }

    /// Renders the full key set in canonical order. Parsing the output
    /// reproduces the config exactly (floats use shortest round-trip
    /// formatting).
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "system.k_users = {}", self.k_users);
        let _ = writeln!(w, "system.m_layers = {}", self.m_layers);
        let _ = writeln!(w, "system.lambda_weight = {}", self.lambda_weight);
        let _ = writeln!(w, "system.kappa = {}", self.kappa);
        let _ = writeln!(w, "system.t_max_s = {}", self.t_max_s);
        let _ = writeln!(w, "system.f_ap_hz = {}", self.f_ap_hz);
        let _ = writeln!(w, "radio.n_ap = {}", self.radio.n_ap);
        let _ = writeln!(w, "radio.n_irs = {}", self.radio.n_irs);
        let _ = writeln!(w, "radio.bandwidth_hz = {}", self.radio.bandwidth_hz);
        let _ = writeln!(w, "radio.noise_w = {}", self.radio.noise_w);
        let _ = writeln!(w, "radio.p_total_w = {}", self.radio.p_total_w);
        let _ = writeln!(w, "radio.p_max_w = {}", self.radio.p_max_w);
        let _ = writeln!(w, "radio.p_ul_w = {}", self.radio.p_ul_w);
        let _ = writeln!(w, "radio.r_min_bps = {}", self.radio.r_min_bps);
        let _ = writeln!(w, "dt.delta_f_max_hz = {}", self.delta_f_max_hz);
        let _ = writeln!(w, "pathloss.c0 = {}", self.pathloss.c0);
        let _ = writeln!(w, "pathloss.d0_m = {}", self.pathloss.d0_m);
        let _ = writeln!(w, "pathloss.alpha_ap_irs = {}", self.pathloss.alpha_ap_irs);
        let _ = writeln!(w, "pathloss.alpha_irs_ud = {}", self.pathloss.alpha_irs_ud);
        let _ = writeln!(w, "geometry.ap = {},{}", self.geometry.ap.0, self.geometry.ap.1);
        let _ = writeln!(w, "geometry.irs = {},{}", self.geometry.irs.0, self.geometry.irs.1);
        let _ = writeln!(
            w,
            "geometry.ud_center = {},{}",
            self.geometry.ud_center.0, self.geometry.ud_center.1
        );
        let _ = writeln!(w, "geometry.ud_box_m = {}", self.geometry.ud_box_m);
        if let Some(pos) = &self.geometry.ud_positions {
            let parts: Vec<String> = pos.iter().map(|(x, y)| format!("{x},{y}")).collect();
            let _ = writeln!(w, "geometry.ud_positions = {}", parts.join("; "));
        }
        let _ = writeln!(w, "payload.d_dl_bits = {}", self.payload.d_dl_bits);
        let _ = writeln!(
            w,
            "payload.bits_per_element = {}",
            self.payload.bits_per_element
        );
        let _ = writeln!(
            w,
            "payload.width0_elements = {}",
            self.payload.width0_elements
        );
        let _ = writeln!(w, "payload.width_decay = {}", self.payload.width_decay);
        if let Some(raw) = self.payload.raw_input_bits {
            let _ = writeln!(w, "payload.raw_input_bits = {raw}");
        }
        let _ = writeln!(
            w,
            "compute.load_min_gflops = {}",
            self.compute.load_min_gflops
        );
        let _ = writeln!(
            w,
            "compute.load_max_gflops = {}",
            self.compute.load_max_gflops
        );
        let _ = writeln!(w, "compute.f_loc_min_hz = {}", self.compute.f_loc_min_hz);
        let _ = writeln!(w, "compute.f_loc_max_hz = {}", self.compute.f_loc_max_hz);
        if let Some(t) = &self.loss_table {
            let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(w, "loss.profile = {}", parts.join(","));
        }
        let _ = writeln!(w, "flags.reciprocity = {}", self.flags.reciprocity);
        let _ = writeln!(w, "flags.direct_link = {}", self.flags.direct_link);
        let _ = writeln!(w, "solver.sdp_tol = {}", self.solver.sdp_tol);
        let _ = writeln!(w, "solver.n_rand = {}", self.solver.n_rand);
        let _ = writeln!(w, "solver.max_iter = {}", self.solver.max_iter);
        let _ = writeln!(w, "solver.eps_conv = {}", self.solver.eps_conv);
        let _ = writeln!(w, "ga.population = {}", self.ga.population);
        let _ = writeln!(w, "ga.generations = {}", self.ga.generations);
        let _ = writeln!(w, "ga.crossover_rate = {}", self.ga.crossover_rate);
        let _ = writeln!(w, "ga.mutation_rate = {}", self.ga.mutation_rate);
        let _ = writeln!(w, "ga.tournament_size = {}", self.ga.tournament_size);
        let _ = writeln!(w, "admm.rho = {}", self.admm.rho);
        let _ = writeln!(w, "admm.max_iter = {}", self.admm.max_iter);
        let _ = writeln!(w, "admm.tol = {}", self.admm.tol);
        s
    }
}

fn parse_f64(key: &str, val: &str, line: usize) -> Result<f64> {
    val.parse::<f64>().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("{key}: expected a number, got '{val}'"),
    })
}

fn parse_usize(key: &str, val: &str, line: usize) -> Result<usize> {
    // Accept scientific notation for counts (e.g. 1e2) when integral.
    if let Ok(u) = val.parse::<usize>() {
        return Ok(u);
    }
    if let Ok(f) = val.parse::<f64>() {
        if f.fract() == 0.0 && f >= 0.0 && f <= usize::MAX as f64 {
            return Ok(f as usize);
        }
    }
    Err(Error::ConfigParse {
        line,
        msg: format!("{key}: expected an integer, got '{val}'"),
    })
}

fn parse_bool(key: &str, val: &str, line: usize) -> Result<bool> {
    match val {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::ConfigParse {
            line,
            msg: format!("{key}: expected true or false, got '{val}'"),
        }),
    }
}

fn parse_point(key: &str, val: &str, line: usize) -> Result<(f64, f64)> {
    let parts: Vec<&str> = val.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::ConfigParse {
            line,
            msg: format!("{key}: expected 'x,y', got '{val}'"),
        });
    }
    Ok((
        parse_f64(key, parts[0], line)?,
        parse_f64(key, parts[1], line)?,
    ))
}

/// Parses the flat key-value text format. Unknown keys are rejected by
/// name so typos cannot silently fall back to defaults. The parsed
/// config is validated before being returned.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let mut cfg = SystemConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content.split_once('=').ok_or_else(|| Error::ConfigParse {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let key = key.trim();
        let val = val.trim();
        match key {
            "system.k_users" => cfg.k_users = parse_usize(key, val, line)?,
            "system.m_layers" => cfg.m_layers = parse_usize(key, val, line)?,
            "system.lambda_weight" => cfg.lambda_weight = parse_f64(key, val, line)?,
            "system.kappa" => cfg.kappa = parse_f64(key, val, line)?,
            "system.t_max_s" => cfg.t_max_s = parse_f64(key, val, line)?,
            "system.f_ap_hz" => cfg.f_ap_hz = parse_f64(key, val, line)?,
            "radio.n_ap" => cfg.radio.n_ap = parse_usize(key, val, line)?,
            "radio.n_irs" => cfg.radio.n_irs = parse_usize(key, val, line)?,
            "radio.bandwidth_hz" => cfg.radio.bandwidth_hz = parse_f64(key, val, line)?,
            "radio.noise_w" => cfg.radio.noise_w = parse_f64(key, val, line)?,
            "radio.p_total_w" => cfg.radio.p_total_w = parse_f64(key, val, line)?,
            "radio.p_max_w" => cfg.radio.p_max_w = parse_f64(key, val, line)?,
            "radio.p_ul_w" => cfg.radio.p_ul_w = parse_f64(key, val, line)?,
            "radio.r_min_bps" => cfg.radio.r_min_bps = parse_f64(key, val, line)?,
            "dt.delta_f_max_hz" => cfg.delta_f_max_hz = parse_f64(key, val, line)?,
            "pathloss.c0" => cfg.pathloss.c0 = parse_f64(key, val, line)?,
            "pathloss.d0_m" => cfg.pathloss.d0_m = parse_f64(key, val, line)?,
            "pathloss.alpha_ap_irs" => cfg.pathloss.alpha_ap_irs = parse_f64(key, val, line)?,
            "pathloss.alpha_irs_ud" => cfg.pathloss.alpha_irs_ud = parse_f64(key, val, line)?,
            "geometry.ap" => cfg.geometry.ap = parse_point(key, val, line)?,
            "geometry.irs" => cfg.geometry.irs = parse_point(key, val, line)?,
            "geometry.ud_center" => cfg.geometry.ud_center = parse_point(key, val, line)?,
            "geometry.ud_box_m" => cfg.geometry.ud_box_m = parse_f64(key, val, line)?,
            "geometry.ud_positions" => {
                let mut pos = Vec::new();
                for part in val.split(';') {
                    let part = part.trim();
                    if !part.is_empty() {
                        pos.push(parse_point(key, part, line)?);
                    }
                }
                cfg.geometry.ud_positions = Some(pos);
            }
            "payload.d_dl_bits" => cfg.payload.d_dl_bits = parse_f64(key, val, line)?,
            "payload.bits_per_element" => {
                cfg.payload.bits_per_element = parse_f64(key, val, line)?
            }
            "payload.width0_elements" => {
                cfg.payload.width0_elements = parse_f64(key, val, line)?
            }
            "payload.width_decay" => cfg.payload.width_decay = parse_f64(key, val, line)?,
            "payload.raw_input_bits" => {
                cfg.payload.raw_input_bits = Some(parse_f64(key, val, line)?)
            }
            "compute.load_min_gflops" => {
                cfg.compute.load_min_gflops = parse_f64(key, val, line)?
            }
            "compute.load_max_gflops" => {
                cfg.compute.load_max_gflops = parse_f64(key, val, line)?
            }
            "compute.f_loc_min_hz" => cfg.compute.f_loc_min_hz = parse_f64(key, val, line)?,
            "compute.f_loc_max_hz" => cfg.compute.f_loc_max_hz = parse_f64(key, val, line)?,
            "loss.profile" => {
                let mut t = Vec::new();
                for part in val.split(',') {
                    t.push(parse_f64(key, part.trim(), line)?);
                }
                cfg.loss_table = Some(t);
            }
            "flags.reciprocity" => cfg.flags.reciprocity = parse_bool(key, val, line)?,
            "flags.direct_link" => cfg.flags.direct_link = parse_bool(key, val, line)?,
            "solver.sdp_tol" => cfg.solver.sdp_tol = parse_f64(key, val, line)?,
            "solver.n_rand" => cfg.solver.n_rand = parse_usize(key, val, line)?,
            "solver.max_iter" => cfg.solver.max_iter = parse_usize(key, val, line)?,
            "solver.eps_conv" => cfg.solver.eps_conv = parse_f64(key, val, line)?,
            "ga.population" => cfg.ga.population = parse_usize(key, val, line)?,
            "ga.generations" => cfg.ga.generations = parse_usize(key, val, line)?,
            "ga.crossover_rate" => cfg.ga.crossover_rate = parse_f64(key, val, line)?,
            "ga.mutation_rate" => cfg.ga.mutation_rate = parse_f64(key, val, line)?,
            "ga.tournament_size" => cfg.ga.tournament_size = parse_usize(key, val, line)?,
            "admm.rho" => cfg.admm.rho = parse_f64(key, val, line)?,
            "admm.max_iter" => cfg.admm.max_iter = parse_usize(key, val, line)?,
            "admm.tol" => cfg.admm.tol = parse_f64(key, val, line)?,
            _ => {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("unknown key '{key}'"),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a scenario file. A missing `=` or an unknown key is
/// reported with its line number; semantic problems are aggregated by
/// key name.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
