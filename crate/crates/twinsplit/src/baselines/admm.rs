//! Consensus-splitting baseline on a continuous cut relaxation.
//!
//! The integer cut `m_k` is relaxed to `x_k` in `[1, M]`. The delay
//! part (upload plus local compute, twin offsets held at zero so the
//! two compute branches coincide) and the loss surrogate are split into
//! separate proximal subproblems coupled by a per-device consensus
//! constraint `x_k = z_k` with scaled dual `u_k`. Both proximal steps
//! are solved by exact scans over one shared grid, so the two copies
//! can (and at convergence do) agree exactly. The final consensus value
//! is rounded to an integer cut and the remaining blocks are re-solved
//! exactly around it.

use crate::delay::comm_delay;
use crate::orchestrator::{IterationTrace, RunResult};
use crate::scenario::{audit, Instance};
use crate::Result;

use super::{design_radio_layer, resolve_cut};

const GRID: usize = 2001;

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmParams {
    /// Augmented-Lagrangian weight.
    pub rho: f64,
    pub max_iter: usize,
    /// Residual threshold on both `max|x - z|` and `rho * max|dz|`.
    pub tol: f64,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

/// Cut-layer axis sampled uniformly over `[1, M]`.
fn grid_points(m_layers: usize) -> Vec<f64> {
    let span = (m_layers - 1) as f64;
    (0..GRID)
        .map(|i| 1.0 + span * i as f64 / (GRID - 1) as f64)
        .collect()
}

/// Piecewise-linear bridge between integer anchors `f(1..=M)`.
fn lerp_anchors(anchors: &[f64], x: f64) -> f64 {
    let m = anchors.len();
    let t = x.clamp(1.0, m as f64) - 1.0;
    let i = (t.floor() as usize).min(m.saturating_sub(2));
    if m == 1 {
        return anchors[0];
    }
    let frac = t - i as f64;
    anchors[i] + frac * (anchors[i + 1] - anchors[i])
}

pub fn run_admm(inst: &Instance, params: &AdmmParams) -> Result<RunResult> {
    let cfg = &inst.cfg;
    let k = cfg.k_users;
    let m_max = cfg.m_layers;
    let rho = params.rho;
    let layer = design_radio_layer(inst, &vec![0.0; k])?;
    let xs = grid_points(m_max);

    // Delay term per device on the grid: upload of the (continuously
    // extended) activation plus local compute through interpolated
    // cumulative cycles.
    let mut fvals: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let prof = &inst.profiles[i];
        let cum: Vec<f64> = (1..=m_max).map(|m| prof.cum_cycles(m)).collect();
        let r_ul = crate::delay::rate_bps(
            cfg.radio.bandwidth_hz,
            cfg.radio.p_ul_w,
            layer.ul_gains[i],
            cfg.radio.noise_w,
        );
        let row = xs
            .iter()
            .map(|&x| {
                let bits = cfg.payload.bits_per_element
                    * cfg.payload.width0_elements
                    * cfg.payload.width_decay.powf(x);
                comm_delay(bits, r_ul) + lerp_anchors(&cum, x) / prof.f_loc_hz
            })
            .collect();
        fvals.push(row);
    }
    // Loss term on the grid, shared by all devices.
    let loss_anchors: Vec<f64> = (1..=m_max).map(|m| inst.loss.loss(m)).collect();
    let lam = cfg.lambda_weight / k as f64;
    let gvals: Vec<f64> = xs
        .iter()
        .map(|&x| lam * lerp_anchors(&loss_anchors, x))
        .collect();

    let mid = xs[GRID / 2];
    let mut x = vec![mid; k];
    let mut z = vec![mid; k];
    let mut u = vec![0.0; k];

    let round_m = |vals: &[f64]| -> Vec<usize> {
        vals.iter()
            .map(|&v| (v.round() as usize).clamp(1, m_max))
            .collect()
    };
    let mut trace: Vec<IterationTrace> = Vec::new();
    let log_iter = |trace: &mut Vec<IterationTrace>, iter: usize, x: &[f64]| -> Result<()> {
        let (d, parts) = resolve_cut(
            inst,
            &layer.dl_gains,
            &layer.ul_gains,
            round_m(x),
            &layer.v,
            &layer.p_ap,
        )?;
        trace.push(IterationTrace {
            iter,
            j_value: parts.j,
            sum_delay_s: parts.sum_delay_s,
            loss_term: parts.loss_term,
            t_dl_sum: parts.t_dl_sum,
            t_ul_sum: parts.t_ul_sum,
            t_comp_sum: parts.t_comp_sum,
            dt_fraction: d.alpha.iter().map(|a| 1.0 - a).sum::<f64>() / k as f64,
            violations: audit(inst, &d).len(),
            step_ms: [0.0; 5],
        });
        Ok(())
    };
    log_iter(&mut trace, 0, &x)?;

    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=params.max_iter {
        // x-update: prox of the delay term toward z - u.
        for i in 0..k {
            let t = z[i] - u[i];
            let mut best = 0;
            let mut best_val = f64::INFINITY;
            for (g, &xg) in xs.iter().enumerate() {
                let val = fvals[i][g] + 0.5 * rho * (xg - t) * (xg - t);
                if val < best_val {
                    best_val = val;
                    best = g;
                }
            }
            x[i] = xs[best];
        }
        // z-update: prox of the loss term toward x + u.
        let mut dz_max = 0.0f64;
        for i in 0..k {
            let s = x[i] + u[i];
            let mut best = 0;
            let mut best_val = f64::INFINITY;
            for (g, &xg) in xs.iter().enumerate() {
                let val = gvals[g] + 0.5 * rho * (s - xg) * (s - xg);
                if val < best_val {
                    best_val = val;
                    best = g;
                }
            }
            let znew = xs[best];
            dz_max = dz_max.max((znew - z[i]).abs());
            z[i] = znew;
        }
        let mut r_max = 0.0f64;
        for i in 0..k {
            u[i] += x[i] - z[i];
            r_max = r_max.max((x[i] - z[i]).abs());
        }

        log_iter(&mut trace, iter, &x)?;
        iterations = iter;
        if r_max <= params.tol && rho * dz_max <= params.tol {
            converged = true;
            break;
        }
    }

    let (decisions, objective) = resolve_cut(
        inst,
        &layer.dl_gains,
        &layer.ul_gains,
        round_m(&z),
        &layer.v,
        &layer.p_ap,
    )?;
    Ok(RunResult {
        decisions,
        objective,
        trace,
        converged,
        iterations,
        infeasible: false,
        phase: Some(layer.phase),
    })
}
