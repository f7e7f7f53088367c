//! Geometry, distance-based path loss, Rayleigh fading draws, and the
//! quadratic forms that express combined link gain as a function of the
//! reflecting surface's phase vector.
//!
//! Conventions: `g` maps the access point's transmit vector to the
//! surface (shape `[n_irs, n_ap]`), `h[k]` is the surface-to-device
//! vector for device `k` (length `n_irs`). With phases `v` (unit
//! modulus, length `n_irs`):
//!
//! * downlink gain  = |h^H diag(v) g  (+ h_direct^H)|^2  (row norm over AP antennas)
//! * uplink gain    = |g_rev^H diag(v) h (+ h_direct)|^2
//!
//! where `g_rev` is the return-direction matrix (equal to `g` under
//! reciprocity). Both are exact quadratic forms in `v`, captured by
//! [`build_qk`] (blocked direct path) or [`build_qk_extended`]
//! (homogenized, one auxiliary coordinate).

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::numerics::hermitize;

/// RNG stream labels; every random draw in the crate hangs off one
/// seed through these so runs are reproducible draw-for-draw.
pub mod streams {
    pub const CHANNELS: u64 = 0;
    pub const PROFILES: u64 = 1;
    pub const GEOMETRY: u64 = 2;
    pub const INIT_SPLIT: u64 = 3;
    pub const RANDOMIZATION: u64 = 4;
    pub const GA: u64 = 5;
}

/// Returns the stream-`label` generator for `seed`.
pub fn stream_rng(seed: u64, label: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label);
    rng
}

/// Distance-power-law attenuation, `c0 * (d / d0)^(-alpha)` with
/// separate exponents for the two hops. The direct access-point to
/// device path (when enabled) reuses the device-side exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossParams {
    pub c0: f64,
    pub d0_m: f64,
    pub alpha_ap_irs: f64,
    pub alpha_irs_ud: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            c0: 1e-3,
            d0_m: 1.0,
            alpha_ap_irs: 2.2,
            alpha_irs_ud: 2.8,
        }
    }
}

/// Average power attenuation over distance `d` meters.
pub fn path_loss(c0: f64, d0_m: f64, alpha: f64, d: f64) -> f64 {
    c0 * (d / d0_m).powf(-alpha)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Concrete node placement for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub ap: (f64, f64),
    pub irs: (f64, f64),
    pub ud: Vec<(f64, f64)>,
}

impl Geometry {
    /// Resolves device positions: the explicit list when given,
    /// otherwise uniform draws from the configured box (stream 2).
    pub fn materialize(cfg: &SystemConfig, seed: u64) -> Self {
        let ud = match &cfg.geometry.ud_positions {
            Some(pos) => pos.clone(),
            None => {
                let mut rng = stream_rng(seed, streams::GEOMETRY);
                let (cx, cy) = cfg.geometry.ud_center;
                let half = cfg.geometry.ud_box_m / 2.0;
                (0..cfg.k_users)
                    .map(|_| {
                        let x = cx + rng.gen_range(-1.0..=1.0) * half;
                        let y = cy + rng.gen_range(-1.0..=1.0) * half;
                        (x, y)
                    })
                    .collect()
            }
        };
        Self {
            ap: cfg.geometry.ap,
            irs: cfg.geometry.irs,
            ud,
        }
    }
}

/// One realization of every fading link.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// Access point to surface, `[n_irs, n_ap]`.
    pub g: Array2<Complex64>,
    /// Surface to access point (return direction), `[n_irs, n_ap]`.
    /// Equals `g` when generated under reciprocity.
    pub g_rev: Array2<Complex64>,
    /// Surface to device, one length-`n_irs` vector per device.
    pub h: Vec<Array1<Complex64>>,
    /// Direct access-point to device vectors, length `n_ap`. Always
    /// drawn (so toggling the flag never shifts other draws), only
    /// folded into gains when `direct_link` is set.
    pub h_direct: Vec<Array1<Complex64>>,
    pub direct_link: bool,
}

fn cn01(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rayleigh_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, pl: f64) -> Array2<Complex64> {
    let amp = pl.sqrt();
    Array2::from_shape_fn((rows, cols), |_| cn01(rng) * amp)
}

fn rayleigh_vector(rng: &mut ChaCha8Rng, len: usize, pl: f64) -> Array1<Complex64> {
    let amp = pl.sqrt();
    Array1::from_shape_fn(len, |_| cn01(rng) * amp)
}

/// Draws every link for one run (stream 0). Draw order is fixed: `g`,
/// then the return matrix when reciprocity is off, then per device its
/// surface vector followed by its direct vector.
pub fn generate_channels(cfg: &SystemConfig, geom: &Geometry, seed: u64) -> ChannelSet {
    let mut rng = stream_rng(seed, streams::CHANNELS);
    let pl = &cfg.pathloss;
    let n_ap = cfg.radio.n_ap;
    let n_irs = cfg.radio.n_irs;

    let pl_ap_irs = path_loss(pl.c0, pl.d0_m, pl.alpha_ap_irs, dist(geom.ap, geom.irs));
    let g = rayleigh_matrix(&mut rng, n_irs, n_ap, pl_ap_irs);
    let g_rev = if cfg.flags.reciprocity {
        g.clone()
    } else {
        rayleigh_matrix(&mut rng, n_irs, n_ap, pl_ap_irs)
    };

    let mut h = Vec::with_capacity(geom.ud.len());
    let mut h_direct = Vec::with_capacity(geom.ud.len());
    for pos in &geom.ud {
        let pl_irs_ud = path_loss(pl.c0, pl.d0_m, pl.alpha_irs_ud, dist(geom.irs, *pos));
        h.push(rayleigh_vector(&mut rng, n_irs, pl_irs_ud));
        let pl_ap_ud = path_loss(pl.c0, pl.d0_m, pl.alpha_irs_ud, dist(geom.ap, *pos));
        h_direct.push(rayleigh_vector(&mut rng, n_ap, pl_ap_ud));
    }

    ChannelSet {
        g,
        g_rev,
        h,
        h_direct,
        direct_link: cfg.flags.direct_link,
    }
}

impl ChannelSet {
    pub fn n_users(&self) -> usize {
        self.h.len()
    }

    pub fn n_irs(&self) -> usize {
        self.g.nrows()
    }
}

/// Combined downlink power gain for device `k` under phases `v`:
/// squared norm of the cascaded row `h^H diag(v) g`, plus the direct
/// row when enabled.
pub fn effective_downlink_gain(ch: &ChannelSet, k: usize, v: &Array1<Complex64>) -> f64 {
    let h = &ch.h[k];
    let n_ap = ch.g.ncols();
    let mut row = Array1::<Complex64>::zeros(n_ap);
    for i in 0..ch.g.nrows() {
        let w = h[i].conj() * v[i];
        for j in 0..n_ap {
            row[j] += w * ch.g[(i, j)];
        }
    }
    if ch.direct_link {
        for j in 0..n_ap {
            row[j] += ch.h_direct[k][j].conj();
        }
    }
    row.iter().map(|z| z.norm_sqr()).sum()
}

/// Combined uplink power gain for device `k` under phases `v`:
/// squared norm of `g_rev^H diag(v) h`, plus the direct vector when
/// enabled.
pub fn effective_uplink_gain(ch: &ChannelSet, k: usize, v: &Array1<Complex64>) -> f64 {
    let h = &ch.h[k];
    let n_ap = ch.g_rev.ncols();
    let mut col = Array1::<Complex64>::zeros(n_ap);
    for i in 0..ch.g_rev.nrows() {
        let w = v[i] * h[i];
        for j in 0..n_ap {
            col[j] += ch.g_rev[(i, j)].conj() * w;
        }
    }
    if ch.direct_link {
        for j in 0..n_ap {
            col[j] += ch.h_direct[k][j];
        }
    }
    col.iter().map(|z| z.norm_sqr()).sum()
}

/// `diag(conj(h)) * (x x^H summed over columns) * diag(h)`, the
/// uplink-form kernel. The downlink form is its entrywise conjugate
/// built from `g` instead of `g_rev`.
fn q_form(x: &Array2<Complex64>, h: &Array1<Complex64>) -> Array2<Complex64> {
    let n = h.len();
    // x x^H, [n_irs, n_irs]
    let mut xxh = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..x.ncols() {
                acc += x[(i, c)] * x[(j, c)].conj();
            }
            xxh[(i, j)] = acc;
        }
    }
    let mut q = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = h[i].conj() * xxh[(i, j)] * h[j];
        }
    }
    q
}

/// Hermitian matrix with `v^H Q v` equal to the device's downlink plus
/// uplink gain for unit-modulus `v`, with the direct path blocked.
/// Under reciprocity this reduces to twice the real part of the uplink
/// form, a real symmetric matrix.
pub fn build_qk(ch: &ChannelSet, k: usize) -> Array2<Complex64> {
    let h = &ch.h[k];
    let q_ul = q_form(&ch.g_rev, h);
    let q_dl = q_form(&ch.g, h).mapv(|z| z.conj());
    hermitize(&(q_ul + q_dl))
}

/// Homogenized `(n_irs + 1)` form covering the direct path: for any
/// unit-modulus `v` and `w = [v; 1]`, `w^H Q w` equals the device's
/// downlink plus uplink gain including the direct terms. The corner
/// entry carries the phase-independent direct power.
pub fn build_qk_extended(ch: &ChannelSet, k: usize) -> Array2<Complex64> {
    let n = ch.n_irs();
    let core = build_qk(ch, k);
    let h = &ch.h[k];
    let hd = &ch.h_direct[k];
    let n_ap = ch.g.ncols();

    // Uplink cross term: Re(v^H diag(conj(h)) g_rev h_direct) * 2.
    let mut b_ul = Array1::<Complex64>::zeros(n);
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n_ap {
            acc += ch.g_rev[(i, j)] * hd[j];
        }
        b_ul[i] = h[i].conj() * acc;
    }
    // Downlink: the row is (g^T diag(conj(h))) v + conj(h_direct), so
    // the linear coefficient is conj(diag(conj(h)) g h_direct).
    let mut b_dl = Array1::<Complex64>::zeros(n);
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n_ap {
            acc += ch.g[(i, j)] * hd[j];
        }
        b_dl[i] = (h[i].conj() * acc).conj();
    }

    let hd_pow: f64 = hd.iter().map(|z| z.norm_sqr()).sum();
    let mut q = Array2::<Complex64>::zeros((n + 1, n + 1));
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = core[(i, j)];
        }
        let b = b_ul[i] + b_dl[i];
        q[(i, n)] = b;
        q[(n, i)] = b.conj();
    }
    q[(n, n)] = Complex64::new(2.0 * hd_pow, 0.0);
    hermitize(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;

    fn small_cfg() -> SystemConfig {
        let mut cfg = SystemConfig::default();
        cfg.k_users = 3;
        cfg.radio.n_ap = 4;
        cfg.radio.n_irs = 5;
        cfg
    }

    fn unit_v(n: usize, seed: u64) -> Array1<Complex64> {
        let mut rng = stream_rng(seed, 99);
        Array1::from_shape_fn(n, |_| {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(1.0, th)
        })
    }

    #[test]
    fn path_loss_reference_values() {
        // c0 (d/d0)^-alpha at c0=1e-3, d0=1: d=10, alpha=2 -> 1e-5.
        assert!((path_loss(1e-3, 1.0, 2.0, 10.0) - 1e-5).abs() < 1e-18);
        // alpha=2.2, d=50 -> 1e-3 * 50^-2.2
        let expect = 1e-3 * 50f64.powf(-2.2);
        assert!((path_loss(1e-3, 1.0, 2.2, 50.0) - expect).abs() < 1e-20);
    }

    #[test]
    fn geometry_respects_explicit_positions() {
        let mut cfg = small_cfg();
        cfg.geometry.ud_positions = Some(vec![(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]);
        let geom = Geometry::materialize(&cfg, 7);
        assert_eq!(geom.ud, vec![(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]);
    }

    #[test]
    fn geometry_draws_stay_in_box_and_are_seeded() {
        let cfg = small_cfg();
        let a = Geometry::materialize(&cfg, 7);
        let b = Geometry::materialize(&cfg, 7);
        let c = Geometry::materialize(&cfg, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for (x, y) in &a.ud {
            assert!((x - 60.0).abs() <= 10.0 + 1e-12);
            assert!(y.abs() <= 10.0 + 1e-12);
        }
    }

    #[test]
    fn channels_deterministic_per_seed() {
        let cfg = small_cfg();
        let geom = Geometry::materialize(&cfg, 3);
        let a = generate_channels(&cfg, &geom, 3);
        let b = generate_channels(&cfg, &geom, 3);
        let c = generate_channels(&cfg, &geom, 4);
        assert_eq!(a.g, b.g);
        assert_eq!(a.h[2], b.h[2]);
        assert_ne!(a.g, c.g);
    }

    #[test]
    fn reciprocity_flag_controls_return_matrix() {
        let mut cfg = small_cfg();
        let geom = Geometry::materialize(&cfg, 3);
        let rec = generate_channels(&cfg, &geom, 3);
        assert_eq!(rec.g, rec.g_rev);
        cfg.flags.reciprocity = false;
        let ind = generate_channels(&cfg, &geom, 3);
        assert_ne!(ind.g, ind.g_rev);
        // Forward draw is unchanged by the flag.
        assert_eq!(rec.g, ind.g);
    }

    #[test]
    fn fading_second_moment_matches_path_loss() {
        let mut cfg = small_cfg();
        cfg.radio.n_ap = 48;
        cfg.radio.n_irs = 48;
        let geom = Geometry::materialize(&cfg, 11);
        let ch = generate_channels(&cfg, &geom, 11);
        let pl = path_loss(1e-3, 1.0, 2.2, dist(geom.ap, geom.irs));
        let mean_sq: f64 =
            ch.g.iter().map(|z| z.norm_sqr()).sum::<f64>() / (48.0 * 48.0);
        // 2304 samples of a unit-mean exponential: ~2% standard error.
        assert!(
            (mean_sq / pl - 1.0).abs() < 0.1,
            "mean |g|^2 = {mean_sq:e}, path loss = {pl:e}"
        );
    }

    #[test]
    fn quadratic_form_matches_gain_sum() {
        let cfg = small_cfg();
        let geom = Geometry::materialize(&cfg, 5);
        let ch = generate_channels(&cfg, &geom, 5);
        for k in 0..3 {
            let q = build_qk(&ch, k);
            for vs in 0..4 {
                let v = unit_v(5, vs);
                let mut form = Complex64::new(0.0, 0.0);
                for i in 0..5 {
                    for j in 0..5 {
                        form += v[i].conj() * q[(i, j)] * v[j];
                    }
                }
                let gains = effective_downlink_gain(&ch, k, &v)
                    + effective_uplink_gain(&ch, k, &v);
                assert!(form.im.abs() < 1e-12 * gains);
                assert!(
                    (form.re - gains).abs() <= 1e-10 * gains,
                    "k={k} vs={vs}: form={} gains={gains}",
                    form.re
                );
            }
        }
    }

    #[test]
    fn qk_real_symmetric_under_reciprocity() {
        let cfg = small_cfg();
        let geom = Geometry::materialize(&cfg, 5);
        let ch = generate_channels(&cfg, &geom, 5);
        let q = build_qk(&ch, 0);
        for i in 0..5 {
            for j in 0..5 {
                assert!(q[(i, j)].im.abs() < 1e-15 * q[(0, 0)].re.abs());
                assert!((q[(i, j)] - q[(j, i)].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn extended_form_covers_direct_path() {
        let mut cfg = small_cfg();
        cfg.flags.direct_link = true;
        let geom = Geometry::materialize(&cfg, 9);
        let ch = generate_channels(&cfg, &geom, 9);
        assert!(ch.direct_link);
        for k in 0..3 {
            let q = build_qk_extended(&ch, k);
            let v = unit_v(5, k as u64);
            let mut w = Array1::<Complex64>::zeros(6);
            for i in 0..5 {
                w[i] = v[i];
            }
            w[5] = Complex64::new(1.0, 0.0);
            let mut form = Complex64::new(0.0, 0.0);
            for i in 0..6 {
                for j in 0..6 {
                    form += w[i].conj() * q[(i, j)] * w[j];
                }
            }
            let gains =
                effective_downlink_gain(&ch, k, &v) + effective_uplink_gain(&ch, k, &v);
            assert!(
                (form.re - gains).abs() <= 1e-10 * gains,
                "k={k}: form={} gains={gains}",
                form.re
            );
        }
    }

    #[test]
    fn direct_flag_changes_gain_but_not_draws() {
        let mut cfg = small_cfg();
        let geom = Geometry::materialize(&cfg, 2);
        let off = generate_channels(&cfg, &geom, 2);
        cfg.flags.direct_link = true;
        let on = generate_channels(&cfg, &geom, 2);
        assert_eq!(off.g, on.g);
        assert_eq!(off.h_direct[0], on.h_direct[0]);
        let v = unit_v(5, 0);
        let g_off = effective_downlink_gain(&off, 0, &v);
        let g_on = effective_downlink_gain(&on, 0, &v);
        assert_ne!(g_off, g_on);
    }
}
