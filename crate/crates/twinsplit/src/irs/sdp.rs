//! Dense interior-point solver for the phase-design relaxation:
//!
//! maximize `tr(Q X)` over Hermitian `X` with unit diagonal and
//! `X >= 0` (positive semidefinite).
//!
//! The implementation is a primal-dual path-following method in
//! Nesterov-Todd scaling with a Mehrotra-style adaptive centering
//! weight. The diagonal constraint makes the Schur complement a plain
//! real positive-definite matrix (`M_ij = |W_ij|^2`), so each iteration
//! reduces to a handful of dense factorizations. Problem sizes here are
//! tiny (one row per surface element), which keeps the solver well
//! inside dense-linear-algebra territory.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::numerics::{
    adjoint, cholesky, frobenius, hermitian_eig, hermitize, solve_lower, solve_lower_adjoint,
    trace_product,
};
use crate::{Error, Result};

const MAX_ITER: usize = 200;
const STEP_FRACTION: f64 = 0.98;

/// Relaxation output: the optimizer `X`, its objective, and a
/// certified upper bound on the true optimum from the dual iterate.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Optimal PSD matrix with unit diagonal.
    pub x: Array2<Complex64>,
    /// `tr(Q X)` at the returned iterate.
    pub objective: f64,
    /// Dual bound: no unit-diagonal PSD matrix (hence no unit-modulus
    /// phase vector) can exceed this.
    pub objective_upper: f64,
    pub iterations: usize,
    /// Final complementarity gap `tr(X S)`.
    pub gap: f64,
}

fn identity(n: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn sub_diag(a: &mut Array2<Complex64>, d: &Array1<f64>) {
    for i in 0..d.len() {
        a[(i, i)] -= Complex64::new(d[i], 0.0);
    }
}

/// Inverse through an existing Cholesky factor.
fn inv_from_chol(l: &Array2<Complex64>) -> Array2<Complex64> {
    let n = l.nrows();
    let z = solve_lower(l, &identity(n));
    hermitize(&solve_lower_adjoint(l, &z))
}

/// Nesterov-Todd scaling point: Hermitian `W` with `W S W = X`.
fn nt_scaling(
    l_x: &Array2<Complex64>,
    s: &Array2<Complex64>,
) -> Result<Array2<Complex64>> {
    // G^H G = L_x^H S L_x; W = L_x (G^H G)^{-1/2} L_x^H.
    let h = hermitize(&adjoint(l_x).dot(s).dot(l_x));
    let eig = hermitian_eig(&h)?;
    let n = h.nrows();
    let mut inv_sqrt = Array2::<Complex64>::zeros((n, n));
    for a in 0..n {
        let lam = eig.values[a].max(1e-300);
        let w = 1.0 / lam.sqrt();
        for i in 0..n {
            for j in 0..n {
                inv_sqrt[(i, j)] += eig.vectors[(i, a)] * w * eig.vectors[(j, a)].conj();
            }
        }
    }
    Ok(hermitize(&l_x.dot(&inv_sqrt).dot(&adjoint(l_x))))
}

/// Largest step in `[0, 1]` keeping `m + alpha dm` positive definite,
/// located by bisecting on Cholesky feasibility.
fn max_step(m: &Array2<Complex64>, dm: &Array2<Complex64>) -> f64 {
    let feasible = |alpha: f64| cholesky(&(m + &(dm * Complex64::new(alpha, 0.0)))).is_some();
    if feasible(1.0) {
        return 1.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

struct Direction {
    dx: Array2<Complex64>,
    dy: Array1<f64>,
    ds: Array2<Complex64>,
}

/// Solves the scaled Newton system for a given centering target
/// `k_mat = sigma mu S^{-1} - X`.
fn solve_direction(
    w: &Array2<Complex64>,
    m_chol: &Array2<Complex64>,
    r_p: &Array1<f64>,
    r_d: &Array2<Complex64>,
    k_mat: &Array2<Complex64>,
) -> Direction {
    let n = w.nrows();
    let wrw = hermitize(&w.dot(r_d).dot(w));
    // M dy = r_p - diag(K) + diag(W R_d W)
    let rhs_vec = Array1::from_shape_fn(n, |i| r_p[i] - k_mat[(i, i)].re + wrw[(i, i)].re);
    let rhs = Array2::from_shape_fn((n, 1), |(i, _)| Complex64::new(rhs_vec[i], 0.0));
    let z = solve_lower(m_chol, &rhs);
    let dy_c = solve_lower_adjoint(m_chol, &z);
    let dy = Array1::from_shape_fn(n, |i| dy_c[(i, 0)].re);

    let mut ds = r_d.clone();
    sub_diag(&mut ds, &dy);
    let ds = hermitize(&ds);
    let dx = hermitize(&(k_mat - &w.dot(&ds).dot(w)));
    Direction { dx, dy, ds }
}

/// Maximizes `tr(Q X)` subject to unit diagonal and positive
/// semidefiniteness. `tol` controls both the complementarity gap and
/// the dual residual, relative to the problem scale.
///
/// On iteration exhaustion the best iterate travels inside
/// [`Error::SdpConvergence`] so callers can still inspect it.
pub fn solve_max_quadratic(q: &Array2<Complex64>, tol: f64) -> Result<Box<SdpSolution>> {
    if q.nrows() != q.ncols() {
        return Err(Error::NotSquare {
            rows: q.nrows(),
            cols: q.ncols(),
        });
    }
    // Channel gains are many orders of magnitude below one; solve at
    // unit Frobenius norm so the stopping rules mean what they say,
    // then scale the values back.
    let scale = frobenius(q);
    if scale <= 0.0 {
        return Ok(Box::new(SdpSolution {
            x: identity(q.nrows()),
            objective: 0.0,
            objective_upper: 0.0,
            iterations: 0,
            gap: 0.0,
        }));
    }
    let qn = q.mapv(|z| z / scale);
    let rescale = |sol: &mut SdpSolution| {
        sol.objective *= scale;
        sol.objective_upper *= scale;
        sol.gap *= scale;
    };
    match solve_unit_scale(&qn, tol) {
        Ok(mut sol) => {
            rescale(&mut sol);
            Ok(sol)
        }
        Err(Error::SdpConvergence {
            iters,
            gap,
            mut best,
        }) => {
            rescale(&mut best);
            Err(Error::SdpConvergence {
                iters,
                gap: gap * scale,
                best,
            })
        }
        Err(e) => Err(e),
    }
}

fn solve_unit_scale(q: &Array2<Complex64>, tol: f64) -> Result<Box<SdpSolution>> {
    let n = q.nrows();
    let c = hermitize(&q.mapv(|z| -z)); // minimize <C, X>
    let c_norm = frobenius(&c);

    // Strictly feasible start: X = I; y_i = -(Gershgorin radius + 1)
    // makes S = C - Diag(y) diagonally dominant positive definite.
    let mut x = identity(n);
    let rho = (0..n)
        .map(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| c[(i, j)].norm())
                .sum();
            off - c[(i, i)].re
        })
        .fold(0.0f64, f64::max)
        + 1.0;
    let mut y = Array1::from_elem(n, -rho);
    let mut s = c.clone();
    for i in 0..n {
        s[(i, i)] += Complex64::new(rho, 0.0);
    }

    let mut iterations = 0;
    let mut gap = trace_product(&x, &s);
    for iter in 0..MAX_ITER {
        iterations = iter;
        gap = trace_product(&x, &s);
        let p_obj = trace_product(&c, &x);
        let mut r_d = c.clone();
        sub_diag(&mut r_d, &y);
        let r_d = hermitize(&(&r_d - &s));
        let r_p = Array1::from_shape_fn(n, |i| 1.0 - x[(i, i)].re);
        let r_p_norm = r_p.iter().map(|v| v * v).sum::<f64>().sqrt();

        if gap.abs() <= tol * (1.0 + p_obj.abs())
            && frobenius(&r_d) <= tol * (1.0 + c_norm)
            && r_p_norm <= tol * (n as f64).sqrt()
        {
            return Ok(Box::new(finish(q, &x, &y, iterations, gap)?));
        }

        let (l_x, l_s) = match (cholesky(&x), cholesky(&s)) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let w = nt_scaling(&l_x, &s)?;
        let s_inv = inv_from_chol(&l_s);
        // Schur matrix M_ij = |W_ij|^2, real PD by the Schur product
        // theorem; factor it once per iteration.
        let m_mat = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new(w[(i, j)].norm_sqr(), 0.0)
        });
        let m_chol = match cholesky(&m_mat) {
            Some(l) => l,
            None => break,
        };

        let mu = gap / n as f64;

        // Predictor: pure complementarity reduction.
        let k_aff = x.mapv(|z| -z);
        let aff = solve_direction(&w, &m_chol, &r_p, &r_d, &k_aff);
        let ap_aff = max_step(&x, &aff.dx);
        let ad_aff = max_step(&s, &aff.ds);
        let x_aff = &x + &(&aff.dx * Complex64::new(ap_aff, 0.0));
        let s_aff = &s + &(&aff.ds * Complex64::new(ad_aff, 0.0));
        let mu_aff = (trace_product(&x_aff, &s_aff) / n as f64).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: recentered solve at sigma mu.
        let k_mat = hermitize(&(&s_inv.mapv(|z| z * (sigma * mu)) - &x));
        let dir = solve_direction(&w, &m_chol, &r_p, &r_d, &k_mat);
        let alpha_p = (STEP_FRACTION * max_step(&x, &dir.dx)).min(1.0);
        let alpha_d = (STEP_FRACTION * max_step(&s, &dir.ds)).min(1.0);
        if alpha_p < 1e-12 && alpha_d < 1e-12 {
            break;
        }

        x = hermitize(&(&x + &(&dir.dx * Complex64::new(alpha_p, 0.0))));
        for i in 0..n {
            y[i] += alpha_d * dir.dy[i];
        }
        s = hermitize(&(&s + &(&dir.ds * Complex64::new(alpha_d, 0.0))));
    }

    let best = finish(q, &x, &y, iterations, gap)?;
    Err(Error::SdpConvergence {
        iters: iterations,
        gap,
        best: Box::new(best),
    })
}

/// Packages an iterate with a rigorous dual bound. The raw dual value
/// is `-sum(y)`; when the dual slack `C - Diag(y)` dips slightly
/// indefinite, shifting `y` by its most negative eigenvalue restores
/// feasibility and the bound pays for the shift explicitly.
fn finish(
    q: &Array2<Complex64>,
    x: &Array2<Complex64>,
    y: &Array1<f64>,
    iterations: usize,
    gap: f64,
) -> Result<SdpSolution> {
    let n = q.nrows();
    let mut slack = hermitize(&q.mapv(|z| -z));
    sub_diag(&mut slack, y);
    let lam_min = hermitian_eig(&slack)?
        .values
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let upper = -(y.sum() + n as f64 * lam_min.min(0.0));
    Ok(SdpSolution {
        x: x.clone(),
        objective: trace_product(q, x),
        objective_upper: upper,
        iterations,
        gap,
    })
}
