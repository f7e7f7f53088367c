//! Downlink transmit power allocation at the access point.
//!
//! Minimizes `sum_k c / ln(1 + a_k p_k)` (total downlink transfer
//! time, `c = d_dl * ln 2 / bandwidth`, `a_k = gain_k / noise`) over a
//! total budget with per-device boxes. The interior stationarity
//! condition `c a / ((1 + a p) ln^2(1 + a p)) = nu` inverts in closed
//! form through the Lambert function: `ln(1 + a p) = 2 W(z)` with
//! `z = sqrt(c a / nu) / 2`, so `p = expm1(2 W(z)) / a`. A scalar
//! bisection on the water level `nu` meets the budget; boxes are
//! handled by clipping, which preserves monotonicity in `nu`.

use crate::numerics::{bisect, lambert_w0, BisectionSpec};
use crate::{Error, Result};

/// Marginal delay reduction per watt at power `p` for coefficient `a`:
/// `phi(p) = c a / ((1 + a p) ln^2(1 + a p))`, strictly decreasing.
fn phi(c: f64, a: f64, p: f64) -> f64 {
    let u = (a * p).ln_1p();
    c * a / ((1.0 + a * p) * u * u)
}

/// Interior optimum at water level `nu`, before clipping.
fn interior_p(c: f64, a: f64, nu: f64) -> f64 {
    let z = 0.5 * (c * a / nu).sqrt();
    match lambert_w0(z) {
        Ok(w) => (2.0 * w).exp_m1() / a,
        Err(_) => f64::INFINITY,
    }
}

/// Per-device downlink powers. `dl_gains` are channel power gains under
/// the current phases; `p_min` is a per-device rate-floor translation
/// (zeros when no floor applies). Devices with zero gain receive zero
/// power (no finite power helps them).
///
/// Errors with [`Error::InfeasiblePower`] when the floors alone exceed
/// the budget.
pub fn allocate_downlink(
    d_dl_bits: f64,
    bandwidth_hz: f64,
    noise_w: f64,
    p_total_w: f64,
    p_max_w: f64,
    dl_gains: &[f64],
    p_min: &[f64],
) -> Result<Vec<f64>> {
    let k = dl_gains.len();
    assert_eq!(p_min.len(), k);
    let c = d_dl_bits * std::f64::consts::LN_2 / bandwidth_hz;
    let a: Vec<f64> = dl_gains.iter().map(|g| g / noise_w).collect();
    let active: Vec<usize> = (0..k).filter(|&i| a[i] > 0.0).collect();

    let mut out = vec![0.0; k];
    if active.is_empty() {
        return Ok(out);
    }
    let floor_sum: f64 = active.iter().map(|&i| p_min[i]).sum();
    if floor_sum > p_total_w * (1.0 + 1e-12) {
        return Err(Error::InfeasiblePower {
            min_sum: floor_sum,
            budget: p_total_w,
        });
    }
    let cap_sum = p_max_w * active.len() as f64;
    let target = p_total_w.min(cap_sum);
    if cap_sum <= p_total_w {
        for &i in &active {
            out[i] = p_max_w;
        }
        return Ok(out);
    }

    let clipped_sum = |nu: f64| -> f64 {
        active
            .iter()
            .map(|&i| interior_p(c, a[i], nu).clamp(p_min[i], p_max_w))
            .sum()
    };

    // nu_lo: every device is pushed to its cap. nu_hi: interior powers
    // collapse toward zero, leaving only the floors.
    let nu_lo = active
        .iter()
        .map(|&i| phi(c, a[i], p_max_w))
        .fold(f64::INFINITY, f64::min);
    let p_tiny = 1e-12 * p_total_w;
    let nu_hi = active
        .iter()
        .map(|&i| phi(c, a[i], p_tiny))
        .fold(0.0f64, f64::max);
    if clipped_sum(nu_hi) >= target {
        // Floors (plus vanishing interiors) already meet the budget.
        for &i in &active {
            out[i] = p_min[i].max(p_tiny).min(p_max_w);
        }
        return Ok(out);
    }

    let mut spec = BisectionSpec::new(nu_lo, nu_hi);
    spec.tol_abs = 0.0;
    spec.tol_rel = f64::EPSILON;
    let nu = bisect(|nu| clipped_sum(nu) - target, &spec)?;

    // Land on the side of the final bracket that respects the budget.
    let nu = if clipped_sum(nu) <= target * (1.0 + 1e-12) {
        nu
    } else {
        let mut hi = nu;
        for _ in 0..200 {
            hi *= 1.0 + 4.0 * f64::EPSILON;
            if clipped_sum(hi) <= target * (1.0 + 1e-12) {
                break;
            }
        }
        hi
    };
    for &i in &active {
        out[i] = interior_p(c, a[i], nu).clamp(p_min[i], p_max_w);
    }
    Ok(out)
}

/// Downlink power needed to carry `r_min_bps`: `(2^(r/B) - 1) / a`.
/// Used by the all-offload scheme as a per-device floor.
pub fn rate_floor_power(r_min_bps: f64, bandwidth_hz: f64, gain: f64, noise_w: f64) -> f64 {
    if r_min_bps <= 0.0 {
        return 0.0;
    }
    let a = gain / noise_w;
    if a <= 0.0 {
        return f64::INFINITY;
    }
    ((r_min_bps / bandwidth_hz).exp2() - 1.0) / a
}
