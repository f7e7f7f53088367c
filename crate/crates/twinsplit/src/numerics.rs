//! Scalar and small-matrix numerics: principal Lambert W, guarded
//! bisection, and a cyclic-Jacobi eigendecomposition for Hermitian
//! matrices (dimensions here stay at or below a few dozen, so O(n^3)
//! sweeps beat any sparse cleverness).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::{Error, Result};

const W_MAX_ITER: usize = 80;

/// Principal branch `W_0` of the Lambert W function for `z >= 0`, i.e.
/// the unique `w >= 0` with `w * exp(w) = z`.
///
/// Halley's iteration seeded by `ln(1 + z)` for `z >= e` and by
/// `z / (1 + z)` below. The iteration is stopped once the residual
/// `w e^w - z` drops under `1e-13 * max(z, tiny)`, which leaves
/// comfortable margin against the documented `1e-12` relative bound.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain {
            op: "lambert_w0",
            msg: format!("argument {z} outside [0, inf)"),
        });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let mut w = if z >= std::f64::consts::E {
        z.ln_1p()
    } else {
        z / (1.0 + z)
    };
    let tol = 1e-13 * z.max(f64::MIN_POSITIVE);
    for _ in 0..W_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        if f.abs() <= tol {
            return Ok(w);
        }
        // Halley: w <- w - f / (e^w (w+1) - (w+2) f / (2w+2))
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let step = f / denom;
        w -= step;
        if !w.is_finite() {
            break;
        }
    }
    // Converged in well under W_MAX_ITER for every representable z >= 0;
    // reaching this means the argument produced a non-finite iterate.
    Err(Error::Domain {
        op: "lambert_w0",
        msg: format!("iteration diverged for z = {z}"),
    })
}

/// Bracketed-bisection control knobs.
#[derive(Debug, Clone, Copy)]
pub struct BisectionSpec {
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance on the residual |f(x)|.
    pub tol_abs: f64,
    /// Relative tolerance on the interval width (scaled by |x|).
    pub tol_rel: f64,
    pub max_iter: usize,
}

impl BisectionSpec {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            tol_abs: 1e-12,
            tol_rel: 4.0 * f64::EPSILON,
            max_iter: 200,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo >= self.hi {
            return Err(Error::Domain {
                op: "bisect",
                msg: format!("invalid bracket [{}, {}]", self.lo, self.hi),
            });
        }
        if self.tol_abs < 0.0 || self.tol_rel < 0.0 || self.max_iter == 0 {
            return Err(Error::Domain {
                op: "bisect",
                msg: "tolerances must be nonnegative and max_iter positive".into(),
            });
        }
        Ok(())
    }
}

/// Bisection for a sign-changing continuous `f` on `[lo, hi]`.
///
/// Returns `x` with `|f(x)| <= tol_abs` or with the bracket width at or
/// below `tol_abs + tol_rel * |x|`. The bracket must straddle a sign
/// change; endpoints that are exact roots are returned immediately.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, spec: &BisectionSpec) -> Result<f64> {
    spec.validate()?;
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracketing { lo, hi, flo, fhi });
    }
    let neg_on_lo = flo < 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..spec.max_iter {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket exhausted at floating-point resolution.
            return Ok(mid);
        }
        let fm = f(mid);
        if fm.abs() <= spec.tol_abs {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_on_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= spec.tol_abs + spec.tol_rel * mid.abs() {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::BisectionNoConvergence {
        iters: spec.max_iter,
        best: mid,
    })
}

// ---------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic complex Jacobi)
// ---------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix: eigenvalues in descending
/// order and the matching unitary column basis.
#[derive(Debug, Clone)]
pub struct EigH {
    pub values: Array1<f64>,
    pub vectors: Array2<Complex64>,
}

/// `(A + A^H) / 2` — used both as input hygiene and to scrub rounding
/// drift off iterates that are Hermitian by construction.
pub fn hermitize(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let mut h = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)].conj());
        }
    }
    h
}

pub fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi sweeps. Input is symmetrized internally; a
/// non-square input is rejected. `tol` bounds the final off-diagonal
/// Frobenius mass relative to `||A||_F`.
pub fn hermitian_eig_tol(a: &Array2<Complex64>, tol: f64) -> Result<EigH> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut m = hermitize(a);
    let mut u: Array2<Complex64> = Array2::eye(n);
    if n <= 1 {
        let values = Array1::from_iter((0..n).map(|i| m[(i, i)].re));
        return Ok(EigH { values, vectors: u });
    }
    let scale = frobenius(&m).max(f64::MIN_POSITIVE);
    let target = tol * scale;
    const MAX_SWEEPS: usize = 60;
    let mut off = off_diagonal_norm(&m);
    let mut sweeps = 0;
    while off > target && sweeps < MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / abs; // e^{i phi}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, q);
                // kills the (p, q) entry of R^H M R.
                let rpq = phase * s;
                let rqp = -phase.conj() * s;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c + mkq * rqp;
                    m[(k, q)] = mkp * rpq + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c + mqk * rqp.conj();
                    m[(q, k)] = mpk * rpq.conj() + mqk * c;
                }
                for k in 0..n {
                    let ukp = u[(k, p)];
                    let ukq = u[(k, q)];
                    u[(k, p)] = ukp * c + ukq * rqp;
                    u[(k, q)] = ukp * rpq + ukq * c;
                }
            }
        }
        off = off_diagonal_norm(&m);
        sweeps += 1;
    }
    if off > target {
        return Err(Error::EigNoConvergence { sweeps, off });
    }
    // Descending sort with the column permutation applied to U.
    let mut idx: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    idx.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let values = Array1::from_iter(idx.iter().map(|&i| diag[i]));
    let mut vectors = Array2::zeros((n, n));
    for (new, &old) in idx.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new)] = u[(r, old)];
        }
    }
    Ok(EigH { values, vectors })
}

/// [`hermitian_eig_tol`] at the default tolerance (1e-13 relative
/// off-diagonal mass), tight enough for reconstruction to 1e-8.
pub fn hermitian_eig(a: &Array2<Complex64>) -> Result<EigH> {
    hermitian_eig_tol(a, 1e-13)
}

// ---------------------------------------------------------------------
// Dense complex helpers shared by the SDP solver
// ---------------------------------------------------------------------

/// Conjugate transpose.
pub fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    let (r, c) = (a.nrows(), a.ncols());
    let mut out = Array2::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite
/// matrix, or `None` when a pivot is not strictly positive.
pub fn cholesky(a: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    let n = a.nrows();
    let mut l: Array2<Complex64> = Array2::zeros((n, n));
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = Complex64::new(dj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(l)
}

/// Solves `L X = B` for lower-triangular `L` (forward substitution).
pub fn solve_lower(l: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Solves `L^H X = B` for lower-triangular `L` (backward substitution).
pub fn solve_lower_adjoint(l: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)].conj();
        }
    }
    x
}

/// `real(tr(A B))` for Hermitian `A`, `B`.
pub fn trace_product(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lambert_at_zero() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
    }

    #[test]
    fn lambert_at_e_is_one() {
        let w = lambert_w0(std::f64::consts::E).unwrap();
        assert!((w - 1.0).abs() < 1e-12, "W(e) = {w}");
    }

    #[test]
    fn lambert_at_one() {
        // Omega constant; cross-checked below against the defining identity.
        let w = lambert_w0(1.0).unwrap();
        assert!((w - 0.567_143_290_409_783_8).abs() < 1e-12);
        assert!((w * w.exp() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn lambert_identity_on_log_grid() {
        for i in 0..=600 {
            let z = 10f64.powf(-6.0 + 12.0 * i as f64 / 600.0);
            let w = lambert_w0(z).unwrap();
            let resid = (w * w.exp() - z).abs();
            assert!(resid <= 1e-12 * z.max(1e-300), "z={z} resid={resid:e}");
        }
    }

    #[test]
    fn lambert_rejects_negatives() {
        assert!(matches!(lambert_w0(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(lambert_w0(f64::NAN), Err(Error::Domain { .. })));
    }

    #[test]
    fn bisect_linear_root() {
        let spec = BisectionSpec {
            tol_abs: 1e-9,
            ..BisectionSpec::new(0.0, 10.0)
        };
        let x = bisect(|x| x - 2.0, &spec).unwrap();
        assert!((x - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn bisect_sqrt2() {
        let x = bisect(|x| x * x - 2.0, &BisectionSpec::new(0.0, 2.0)).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bisect_rejects_equal_sign_bracket() {
        let err = bisect(|x| x * x + 1.0, &BisectionSpec::new(-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Bracketing { .. }));
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        let err = bisect(|x| x, &BisectionSpec::new(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn bisect_returns_exact_endpoint_roots() {
        let x = bisect(|x| x, &BisectionSpec::new(0.0, 1.0)).unwrap();
        assert_eq!(x, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bisect_monotone_cubic(root in -5.0f64..5.0) {
            let spec = BisectionSpec { tol_abs: 1e-10, ..BisectionSpec::new(-8.0, 8.0) };
            let x = bisect(|x| (x - root).powi(3) + (x - root), &spec).unwrap();
            prop_assert!((x - root).abs() < 1e-6);
        }

        #[test]
        fn lambert_identity_random(z in 0.0f64..1e6) {
            let w = lambert_w0(z).unwrap();
            prop_assert!((w * w.exp() - z).abs() <= 1e-12 * z.max(1.0));
        }
    }

    fn random_hermitian(n: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        hermitize(&a)
    }

    #[test]
    fn eig_identity() {
        let a: Array2<Complex64> = Array2::eye(4);
        let e = hermitian_eig(&a).unwrap();
        for v in e.values.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_diag_sorted_descending() {
        let a = array![
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)]
        ];
        let e = hermitian_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_2x2_complex_known() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let a = array![
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)],
            [Complex64::new(0.0, -1.0), Complex64::new(2.0, 0.0)]
        ];
        let e = hermitian_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_and_unitarity() {
        for (n, seed) in [(3usize, 1u64), (8, 2), (16, 3), (33, 4)] {
            let a = random_hermitian(n, seed);
            let e = hermitian_eig(&a).unwrap();
            let uh = adjoint(&e.vectors);
            // U^H U = I
            let gram = uh.dot(&e.vectors);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (gram[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10,
                        "gram ({i},{j}) off at n={n}"
                    );
                }
            }
            // U diag(w) U^H = A
            let mut lam: Array2<Complex64> = Array2::zeros((n, n));
            for i in 0..n {
                lam[(i, i)] = Complex64::new(e.values[i], 0.0);
            }
            let rec = e.vectors.dot(&lam).dot(&uh);
            let mut err: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    err = err.max((rec[(i, j)] - a[(i, j)]).norm());
                }
            }
            let scale = frobenius(&a);
            assert!(err <= 1e-8 * scale.max(1.0), "n={n} err={err:e}");
        }
    }

    #[test]
    fn eig_rejects_non_square() {
        let a: Array2<Complex64> = Array2::zeros((2, 3));
        assert!(matches!(
            hermitian_eig(&a),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn eig_symmetrizes_input() {
        // Slightly non-Hermitian input: result matches the symmetrized matrix.
        let a = array![
            [Complex64::new(1.0, 0.0), Complex64::new(0.5, 1e-12)],
            [Complex64::new(0.5, 1e-12), Complex64::new(1.0, 0.0)]
        ];
        let e = hermitian_eig(&a).unwrap();
        assert!((e.values[0] - 1.5).abs() < 1e-10);
        assert!((e.values[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn cholesky_round_trip() {
        let a = random_hermitian(6, 9);
        // Shift to positive definite.
        let mut hpd = a.clone();
        for i in 0..6 {
            hpd[(i, i)] += Complex64::new(8.0, 0.0);
        }
        let l = cholesky(&hpd).expect("pd");
        let rec = l.dot(&adjoint(&l));
        for i in 0..6 {
            for j in 0..6 {
                assert!((rec[(i, j)] - hpd[(i, j)]).norm() < 1e-10);
            }
        }
        // Triangular solve consistency: L L^H x = b
        let b = Array2::from_shape_fn((6, 1), |(i, _)| Complex64::new(i as f64 + 1.0, -0.5));
        let y = solve_lower(&l, &b);
        let x = solve_lower_adjoint(&l, &y);
        let back = hpd.dot(&x);
        for i in 0..6 {
            assert!((back[(i, 0)] - b[(i, 0)]).norm() < 1e-9);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![
            [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]
        ];
        assert!(cholesky(&a).is_none());
    }
}
