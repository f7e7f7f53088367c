//! Reflecting-surface phase design.
//!
//! The sum of every device's uplink and downlink gain is a Hermitian
//! quadratic form in the unit-modulus phase vector. Design proceeds in
//! two stages: solve the semidefinite relaxation of the form (drop the
//! rank constraint, keep unit diagonal), then round the relaxed matrix
//! back to phases by Gaussian randomization, keeping the best of
//! `n_rand` samples. With a blocked direct path the form is exact; with
//! the direct path enabled the same machinery runs on a homogenized
//! matrix one coordinate wider.

pub mod sdp;

pub use sdp::{solve_max_quadratic, SdpSolution};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    build_qk, build_qk_extended, stream_rng, streams, ChannelSet,
};
use crate::numerics::{hermitian_eig, hermitize};
use crate::Result;

/// Outcome of one phase design pass.
#[derive(Debug, Clone)]
pub struct PhaseSolution {
    /// Unit-modulus phases, one per surface element.
    pub v: Array1<Complex64>,
    /// Total gain achieved by `v` (the rounded value, not the
    /// relaxation's).
    pub quad_value: f64,
    /// Relaxation objective at the solver's iterate.
    pub sdp_objective: f64,
    /// Certified cap on what any phase vector could achieve.
    pub sdp_upper: f64,
    pub sdp_iterations: usize,
}

/// Sum of all device forms. Shape is `n_irs` with the direct path
/// blocked, `n_irs + 1` (homogenized) when it is enabled.
pub fn total_quadratic(ch: &ChannelSet) -> Array2<Complex64> {
    let n = if ch.direct_link {
        ch.n_irs() + 1
    } else {
        ch.n_irs()
    };
    let mut q = Array2::<Complex64>::zeros((n, n));
    for k in 0..ch.n_users() {
        let qk = if ch.direct_link {
            build_qk_extended(ch, k)
        } else {
            build_qk(ch, k)
        };
        q += &qk;
    }
    hermitize(&q)
}

fn quad_form(q: &Array2<Complex64>, v: &Array1<Complex64>) -> f64 {
    let n = v.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += v[i].conj() * q[(i, j)] * v[j];
        }
    }
    acc.re
}

fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r < 1e-15 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Gaussian rounding: factor the relaxed matrix as `A A^H` (negative
/// eigenvalues clipped), draw `n_rand` complex Gaussian vectors, push
/// each through `A`, snap entries to unit modulus, and keep the sample
/// with the largest form value.
pub fn randomize_phases(
    x: &Array2<Complex64>,
    q: &Array2<Complex64>,
    n_rand: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Array1<Complex64>, f64)> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let n = x.nrows();
    let eig = hermitian_eig(x)?;
    let mut a = Array2::<Complex64>::zeros((n, n));
    for c in 0..n {
        let s = eig.values[c].max(0.0).sqrt();
        for r in 0..n {
            a[(r, c)] = eig.vectors[(r, c)] * s;
        }
    }
    let mut best_v = Array1::from_elem(n, Complex64::new(1.0, 0.0));
    let mut best_val = f64::NEG_INFINITY;
    for _ in 0..n_rand {
        let z = Array1::from_shape_fn(n, |_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let mut v = Array1::<Complex64>::zeros(n);
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += a[(i, j)] * z[j];
            }
            v[i] = unit(acc);
        }
        let val = quad_form(q, &v);
        if val > best_val {
            best_val = val;
            best_v = v;
        }
    }
    Ok((best_v, best_val))
}

/// Full design pass for one channel realization: relax, round, and (in
/// the homogenized case) peel the auxiliary coordinate back off. The
/// result is deterministic in `(channels, sdp_tol, n_rand, seed)`.
pub fn optimize_phases(
    ch: &ChannelSet,
    sdp_tol: f64,
    n_rand: usize,
    seed: u64,
) -> Result<PhaseSolution> {
    let q = total_quadratic(ch);
    let sol = solve_max_quadratic(&q, sdp_tol)?;
    let mut rng = stream_rng(seed, streams::RANDOMIZATION);
    let (w, val) = randomize_phases(&sol.x, &q, n_rand, &mut rng)?;
    let v = if ch.direct_link {
        let n = ch.n_irs();
        let pivot = w[n].conj();
        Array1::from_shape_fn(n, |i| unit(w[i] * pivot))
    } else {
        w
    };
    Ok(PhaseSolution {
        v,
        quad_value: val,
        sdp_objective: sol.objective,
        sdp_upper: sol.objective_upper,
        sdp_iterations: sol.iterations,
    })
}
