//! Twin activation and the compute frequency-offset allocation.
//!
//! Each device either meets its compute deadline on its own clock
//! (`alpha = 1`, twin idle) or leans on its twin (`alpha = 0`), in
//! which case the twin grants a frequency offset `delta_f` from a
//! shared budget. The offset split is the exact water-filling solution
//! of minimizing `sum cycles_k / (f_k + delta_f_k)` subject to the
//! budget, which equalizes the marginal gain `cycles / (f + delta_f)^2`
//! across funded devices.

use crate::delay::UserProfile;
use crate::numerics::{bisect, BisectionSpec};
use crate::Result;

/// `alpha_k = 1` exactly when the device finishes layers `1..=m_k` by
/// the deadline on its own clock (`f >= cycles / t_max`, boundary
/// counts as capable).
pub fn activate(profiles: &[UserProfile], m: &[usize], t_max_s: f64) -> Vec<f64> {
    profiles
        .iter()
        .zip(m)
        .map(|(prof, &mk)| {
            if prof.f_loc_hz >= prof.cum_cycles(mk) / t_max_s {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Splits the offset budget across twin-backed devices (`alpha = 0`).
/// Returns one offset per device; unassisted devices get zero. The
/// budget is fully spent whenever at least one device is funded, since
/// every extra hertz strictly lowers delay.
pub fn allocate_offsets(
    profiles: &[UserProfile],
    m: &[usize],
    alpha: &[f64],
    delta_f_max_hz: f64,
) -> Result<Vec<f64>> {
    let k = profiles.len();
    let mut out = vec![0.0; k];
    // (index, cycles, clock) of devices sharing the budget
    let funded: Vec<(usize, f64, f64)> = (0..k)
        .filter(|&i| alpha[i] == 0.0 && profiles[i].cum_cycles(m[i]) > 0.0)
        .map(|i| (i, profiles[i].cum_cycles(m[i]), profiles[i].f_loc_hz))
        .collect();
    if funded.is_empty() {
        return Ok(out);
    }
    if funded.len() == 1 {
        out[funded[0].0] = delta_f_max_hz;
        return Ok(out);
    }

    // Water level nu solves sum_k max(sqrt(c_k / nu) - f_k, 0) = budget.
    let lo = funded
        .iter()
        .map(|&(_, c, f)| c / (f + delta_f_max_hz).powi(2))
        .fold(f64::INFINITY, f64::min);
    let hi = funded
        .iter()
        .map(|&(_, c, f)| c / (f * f))
        .fold(0.0f64, f64::max);
    let spend = |nu: f64| -> f64 {
        funded
            .iter()
            .map(|&(_, c, f)| ((c / nu).sqrt() - f).max(0.0))
            .sum()
    };
    let mut spec = BisectionSpec::new(lo, hi);
    spec.tol_abs = 0.0;
    spec.tol_rel = f64::EPSILON;
    let nu = bisect(|nu| spend(nu) - delta_f_max_hz, &spec)?;

    let mut total = 0.0;
    for &(i, c, f) in &funded {
        let d = ((c / nu).sqrt() - f).max(0.0);
        out[i] = d;
        total += d;
    }
    // Snap the budget exactly: scaling positive offsets keeps
    // feasibility and only sharpens the (strictly decreasing) objective
    // when the bisected sum fell a hair short.
    if total > 0.0 {
        let scale = delta_f_max_hz / total;
        for &(i, _, _) in &funded {
            out[i] *= scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prof(cycles_per_layer: f64, f: f64) -> UserProfile {
        UserProfile {
            layer_cycles: vec![cycles_per_layer; 4],
            f_loc_hz: f,
        }
    }

    #[test]
    fn activation_boundary_counts_as_capable() {
        // cycles(2) = 2e9, t_max = 2 -> threshold clock exactly 1e9
        let profiles = vec![prof(1e9, 1e9), prof(1e9, 0.999e9), prof(1e9, 2e9)];
        let alpha = activate(&profiles, &[2, 2, 2], 2.0);
        assert_eq!(alpha, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn deeper_cut_can_flip_activation() {
        let profiles = vec![prof(1e9, 1e9)];
        assert_eq!(activate(&profiles, &[2], 2.0), vec![1.0]);
        assert_eq!(activate(&profiles, &[4], 2.0), vec![0.0]);
    }

    #[test]
    fn no_funded_devices_means_zero_offsets() {
        let profiles = vec![prof(1e9, 1e9), prof(1e9, 1e9)];
        let df = allocate_offsets(&profiles, &[2, 2], &[1.0, 1.0], 5e9).unwrap();
        assert_eq!(df, vec![0.0, 0.0]);
    }

    #[test]
    fn single_funded_device_takes_whole_budget() {
        let profiles = vec![prof(1e9, 1e9), prof(1e9, 1e9)];
        let df = allocate_offsets(&profiles, &[4, 2], &[0.0, 1.0], 5e9).unwrap();
        assert_eq!(df, vec![5e9, 0.0]);
    }

    #[test]
    fn two_device_split_matches_closed_form() {
        // c1 = 4e18, c2 = 1e18, f1 = f2 = 1e9, budget 4e9:
        // sqrt(c1/nu) + sqrt(c2/nu) = 6e9 -> offsets 3e9 and 1e9.
        let profiles = vec![
            UserProfile {
                layer_cycles: vec![4e18],
                f_loc_hz: 1e9,
            },
            UserProfile {
                layer_cycles: vec![1e18],
                f_loc_hz: 1e9,
            },
        ];
        let df = allocate_offsets(&profiles, &[1, 1], &[0.0, 0.0], 4e9).unwrap();
        assert!((df[0] - 3e9).abs() < 1.0, "df0 = {}", df[0]);
        assert!((df[1] - 1e9).abs() < 1.0, "df1 = {}", df[1]);
    }

    #[test]
    fn budget_saturates_and_marginals_equalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let profiles: Vec<UserProfile> = (0..8)
            .map(|_| UserProfile {
                layer_cycles: vec![rng.gen_range(0.5e9..1.5e9); 12],
                f_loc_hz: rng.gen_range(1e9..3e9),
            })
            .collect();
        let m = vec![12; 8];
        let alpha = vec![0.0; 8];
        let budget = 2e10;
        let df = allocate_offsets(&profiles, &m, &alpha, budget).unwrap();
        let total: f64 = df.iter().sum();
        assert!((total - budget).abs() < 1e-9 * budget);
        let marginals: Vec<f64> = (0..8)
            .filter(|&i| df[i] > 0.0)
            .map(|i| profiles[i].cum_cycles(12) / (profiles[i].f_loc_hz + df[i]).powi(2))
            .collect();
        assert!(marginals.len() >= 2);
        let m0 = marginals[0];
        for mk in &marginals {
            assert!(
                (mk / m0 - 1.0).abs() < 1e-6,
                "marginals differ: {mk:e} vs {m0:e}"
            );
        }
    }

    #[test]
    fn allocation_beats_random_feasible_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let profiles: Vec<UserProfile> = (0..5)
            .map(|_| UserProfile {
                layer_cycles: vec![rng.gen_range(0.5e9..1.5e9); 6],
                f_loc_hz: rng.gen_range(1e9..4e9),
            })
            .collect();
        let m = vec![6; 5];
        let alpha = vec![0.0; 5];
        let budget = 1e10;
        let df = allocate_offsets(&profiles, &m, &alpha, budget).unwrap();
        let cost = |d: &[f64]| -> f64 {
            (0..5)
                .map(|i| profiles[i].cum_cycles(6) / (profiles[i].f_loc_hz + d[i]))
                .sum()
        };
        let best = cost(&df);
        for _ in 0..200 {
            let raw: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let trial: Vec<f64> = raw.iter().map(|r| r / s * budget).collect();
            assert!(cost(&trial) >= best - 1e-9 * best);
        }
    }

    #[test]
    fn mixed_activation_only_funds_backed_devices() {
        let profiles = vec![prof(1e9, 1e9), prof(1e9, 1e9), prof(2e9, 1e9)];
        let alpha = vec![1.0, 0.0, 0.0];
        let df = allocate_offsets(&profiles, &[4, 4, 4], &alpha, 6e9).unwrap();
        assert_eq!(df[0], 0.0);
        assert!(df[1] > 0.0 && df[2] > 0.0);
        assert!((df[1] + df[2] - 6e9).abs() < 1e-3);
        // heavier load draws the larger offset
        assert!(df[2] > df[1]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn offsets_feasible_on_random_instances(
            seed in 0u64..500,
            k in 2usize..9,
            budget in 1e8f64..1e11,
        ) {
            use proptest::prelude::prop_assert;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let profiles: Vec<UserProfile> = (0..k)
                .map(|_| UserProfile {
                    layer_cycles: vec![rng.gen_range(1e8..2e9); 6],
                    f_loc_hz: rng.gen_range(5e8..1e10),
                })
                .collect();
            let m: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
            let alpha: Vec<f64> = (0..k)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
                .collect();
            let df = allocate_offsets(&profiles, &m, &alpha, budget).unwrap();

            let mut funded_total = 0.0;
            let mut any_funded = false;
            for i in 0..k {
                prop_assert!(df[i] >= 0.0);
                if alpha[i] == 1.0 {
                    prop_assert!(df[i] == 0.0);
                } else {
                    any_funded = true;
                    funded_total += df[i];
                }
            }
            if any_funded {
                prop_assert!((funded_total - budget).abs() <= 1e-9 * budget);
            }
        }
    }
}
