//! Small dense linear-algebra helpers shared by every module.
//!
//! Everything here works on `nalgebra` dynamic matrices. Dimensions in this
//! crate stay tiny (2n ≤ 8 for phase space), so nothing is tuned for speed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn cidentity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn symmetrize(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

pub fn csymmetrize(m: &CMat) -> CMat {
    (m + m.transpose()) * c(0.5, 0.0)
}

/// Largest entry of `a - b` in absolute value.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &RMat, b: &RMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn cinverse(m: &CMat, what: &'static str) -> Result<CMat> {
    m.clone().try_inverse().ok_or(Error::Singular(what))
}

pub fn rinverse(m: &RMat, what: &'static str) -> Result<RMat> {
    m.clone().try_inverse().ok_or(Error::Singular(what))
}

/// Applies `f` to the eigenvalues of a real symmetric matrix.
pub fn sym_fn(m: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = RMat::from_diagonal(&eig.eigenvalues.map(f));
    let q = &eig.eigenvectors;
    symmetrize(&(q * d * q.transpose()))
}

/// Principal square root of a symmetric positive-definite matrix.
pub fn spd_sqrt(m: &RMat) -> RMat {
    sym_fn(m, f64::sqrt)
}

pub fn spd_inv_sqrt(m: &RMat) -> RMat {
    sym_fn(m, |x| 1.0 / x.sqrt())
}

pub fn min_eigenvalue(m: &RMat) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Pivots of the unpivoted LDLᵀ factorization of a complex symmetric matrix.
///
/// For matrices whose real part is positive definite every leading block and
/// every Schur complement keeps a positive-definite real part, so all pivots
/// lie in the open right half-plane and the factorization never breaks down.
pub fn ldlt_pivots(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let d = a[(k, k)];
        if d.norm() < 1e-300 {
            return Err(Error::Singular("LDLt pivot"));
        }
        pivots.push(d);
        for i in k + 1..n {
            let lik = a[(i, k)] / d;
            for j in k + 1..n {
                let akj = a[(k, j)];
                a[(i, j)] -= lik * akj;
            }
        }
    }
    Ok(pivots)
}

/// `ln det(m)^{1/2}` for a complex symmetric `m` with positive-definite real
/// part, on the branch continuous from real positive-definite matrices.
pub fn log_sqrt_det_accretive(m: &CMat) -> Result<Complex64> {
    let hermitian_part = real_part(&csymmetrize(m));
    if m.nrows() > 0 && min_eigenvalue(&hermitian_part) <= 0.0 {
        return Err(Error::NotIntegrable);
    }
    let pivots = ldlt_pivots(m)?;
    Ok(pivots.iter().map(|d| d.sqrt().ln()).sum())
}

pub fn sqrt_det_accretive(m: &CMat) -> Result<Complex64> {
    Ok(log_sqrt_det_accretive(m)?.exp())
}

pub fn cdet(m: &CMat) -> Complex64 {
    if m.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().determinant()
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// The square root of `value` closest in argument to `previous`, together
/// with the argument jump.
pub fn nearest_sqrt(previous: Complex64, value: Complex64) -> (Complex64, f64) {
    let r = value.sqrt();
    let jump = wrap_angle(r.arg() - previous.arg());
    if jump.abs() <= PI / 2.0 {
        (r, jump)
    } else {
        (-r, wrap_angle(jump + PI))
    }
}

/// Continues a square root of `f(s)` from `s = 0` (where its value is
/// `start`) to `s = 1`.
///
/// Each accepted step moves the argument of the root by less than π/4 and
/// steps are bisected until that holds; a jump that survives `MAX_DEPTH`
/// bisections (or a zero of `f`) is reported as a discontinuity.
pub fn continue_sqrt(f: impl Fn(f64) -> Complex64, start: Complex64) -> Result<Complex64> {
    const COARSE_STEPS: usize = 16;
    const MAX_DEPTH: u32 = 24;

    fn advance(
        f: &dyn Fn(f64) -> Complex64,
        s0: f64,
        s1: f64,
        root: Complex64,
        depth: u32,
    ) -> Result<Complex64> {
        let value = f(s1);
        if value.norm() == 0.0 || !value.is_finite() {
            return Err(Error::BranchDiscontinuity(PI));
        }
        let (next, jump) = nearest_sqrt(root, value);
        if jump.abs() < FRAC_PI_4 {
            return Ok(next);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::BranchDiscontinuity(jump.abs()));
        }
        let mid = 0.5 * (s0 + s1);
        let half = advance(f, s0, mid, root, depth + 1)?;
        advance(f, mid, s1, half, depth + 1)
    }

    let mut root = start;
    for k in 0..COARSE_STEPS {
        let s0 = k as f64 / COARSE_STEPS as f64;
        let s1 = (k + 1) as f64 / COARSE_STEPS as f64;
        root = advance(&f, s0, s1, root, 0)?;
    }
    Ok(root)
}

/// Real 2n×2n matrix of the symplectic form, ω(u, v) = uᵀ·J·v.
pub fn omega_matrix(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Stacks four blocks into one matrix.
pub fn block2<T: nalgebra::ComplexField>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    d: &DMatrix<T>,
) -> DMatrix<T> {
    let (n, m) = a.shape();
    let mut out = DMatrix::<T>::zeros(n + c.nrows(), m + b.ncols());
    out.view_mut((0, 0), (n, m)).copy_from(a);
    out.view_mut((0, m), (n, b.ncols())).copy_from(b);
    out.view_mut((n, 0), (c.nrows(), m)).copy_from(c);
    out.view_mut((n, m), (d.nrows(), d.ncols())).copy_from(d);
    out
}

/// Row-major nested vectors, the JSON shape used for matrices.
pub fn to_rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<RMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    Ok(RMat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_crows(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn from_crows(rows: &[Vec<Complex64>]) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| rows[i][j]))
}

/// Polynomial helpers in a single variable; coefficients are stored lowest
/// degree first.
pub mod poly {
    use num_complex::Complex64;

    pub fn trim(mut p: Vec<Complex64>) -> Vec<Complex64> {
        while p.len() > 1 && p.last().map(|z| z.norm() == 0.0).unwrap_or(false) {
            p.pop();
        }
        if p.is_empty() {
            p.push(Complex64::new(0.0, 0.0));
        }
        p
    }

    pub fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
            .collect()
    }

    pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
        a.iter().map(|x| x * s).collect()
    }

    pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn eval(p: &[Complex64], x: Complex64) -> Complex64 {
        p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    /// Polynomials `H_k(h)` with generating function
    /// `exp(βh + ½aβ²) = Σ βᵏ/k! · H_k(h)`, each expressed in the variable
    /// `w` through `h = h0 + h1·w`.
    pub fn hermite_family(
        kmax: usize,
        h0: Complex64,
        h1: Complex64,
        a: Complex64,
    ) -> Vec<Vec<Complex64>> {
        let h = vec![h0, h1];
        let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
        if kmax >= 1 {
            out.push(h.clone());
        }
        for k in 1..kmax {
            let next = add(
                &mul(&h, &out[k]),
                &scale(&out[k - 1], a * k as f64),
            );
            out.push(next);
        }
        out
    }

    /// Substitutes `x = x0 + x1·w` into `p(x)`.
    pub fn compose_affine(p: &[Complex64], x0: Complex64, x1: Complex64) -> Vec<Complex64> {
        let lin = vec![x0, x1];
        let mut out = vec![Complex64::new(0.0, 0.0)];
        for coeff in p.iter().rev() {
            out = add(&mul(&out, &lin), &[*coeff]);
        }
        trim(out)
    }
}
