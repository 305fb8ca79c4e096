//! Closed-form Gaussian integrals.
//!
//! A [`QuadExp`] is `exp(½ xᵀQx + pᵀx + s)` with complex coefficients. Its
//! leading variables are real integration variables; the trailing ones may be
//! formal complex parameters that survive integration. Integrals use the
//! measure `dv/(2π)^{d/2}` over the `d` leading variables, so that
//! `∫ exp(−½|v|²) = 1`.
//!
//! A [`FockPoly`] multiplies a form by `Σ fₖ xᵏ/√k!` with `x = ℓᵀ(variables)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, cinverse, csymmetrize, log_sqrt_det_accretive, CMat, CVec};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadExp {
    pub q: CMat,
    pub p: CVec,
    pub s: Complex64,
}

/// `Σ coeffs[k] (ℓᵀx)ᵏ / √k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockPoly {
    pub l: CVec,
    pub coeffs: Vec<Complex64>,
}

impl FockPoly {
    pub fn constant(dim: usize, value: Complex64) -> Self {
        FockPoly {
            l: CVec::zeros(dim),
            coeffs: vec![value],
        }
    }

    pub fn eval(&self, x: &CVec) -> Complex64 {
        let y = self.l.dot(x);
        eval_normalized(&self.coeffs, y)
    }

    pub fn conj(&self) -> Self {
        FockPoly {
            l: self.l.map(|z| z.conj()),
            coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
        }
    }
}

/// `Σ cₖ yᵏ/√k!` by Horner-like accumulation on the normalized basis.
pub fn eval_normalized(coeffs: &[Complex64], y: Complex64) -> Complex64 {
    let mut term = c(1.0, 0.0);
    let mut total = c(0.0, 0.0);
    for (k, ck) in coeffs.iter().enumerate() {
        if k > 0 {
            term *= y / (k as f64).sqrt();
        }
        total += ck * term;
    }
    total
}

/// Normalized Hermite polynomials `Ĥₖ(v₀ + y; a) = Hₖ/√k!` from
/// `exp(β(v₀+y) + ½aβ²) = Σ βᵏ/k! · Hₖ`, each returned in the basis
/// `yʲ/√j!`.
pub fn normalized_hermite(kmax: usize, v0: Complex64, a: Complex64) -> Vec<Vec<Complex64>> {
    let shift = |p: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); p.len() + 1];
        for (j, x) in p.iter().enumerate() {
            out[j + 1] += x * ((j + 1) as f64).sqrt();
        }
        out
    };
    let mut out: Vec<Vec<Complex64>> = vec![vec![c(1.0, 0.0)]];
    for k in 0..kmax {
        let prev = &out[k];
        let mut next = shift(prev);
        for (j, x) in prev.iter().enumerate() {
            next[j] += x * v0;
        }
        if k > 0 {
            for (j, x) in out[k - 1].iter().enumerate() {
                next[j] += x * a * (k as f64).sqrt();
            }
        }
        let norm = ((k + 1) as f64).sqrt();
        out.push(next.into_iter().map(|x| x / norm).collect());
    }
    out
}

impl QuadExp {
    pub fn new(q: CMat, p: CVec, s: Complex64) -> Self {
        QuadExp {
            q: csymmetrize(&q),
            p,
            s,
        }
    }

    pub fn zero_form(dim: usize) -> Self {
        QuadExp {
            q: CMat::zeros(dim, dim),
            p: CVec::zeros(dim),
            s: c(0.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn log_eval(&self, x: &CVec) -> Complex64 {
        (x.transpose() * &self.q * x)[(0, 0)] * 0.5 + self.p.dot(x) + self.s
    }

    pub fn eval(&self, x: &CVec) -> Complex64 {
        self.log_eval(x).exp()
    }

    /// Complex conjugate of the function, valid on real arguments.
    pub fn conj(&self) -> Self {
        QuadExp {
            q: self.q.map(|z| z.conj()),
            p: self.p.map(|z| z.conj()),
            s: self.s.conj(),
        }
    }

    /// Pointwise product of two forms on the same variables.
    pub fn mul(&self, other: &QuadExp) -> Self {
        QuadExp {
            q: &self.q + &other.q,
            p: &self.p + &other.p,
            s: self.s + other.s,
        }
    }

    pub fn scale_log(&self, log_factor: Complex64) -> Self {
        QuadExp {
            q: self.q.clone(),
            p: self.p.clone(),
            s: self.s + log_factor,
        }
    }

    /// Substitutes `x = T y + t₀`.
    pub fn pullback(&self, t: &CMat, t0: &CVec) -> Self {
        let qt0 = &self.q * t0;
        QuadExp::new(
            t.transpose() * &self.q * t,
            t.transpose() * (&qt0 + &self.p),
            self.s + t0.dot(&qt0) * 0.5 + self.p.dot(t0),
        )
    }

    fn split(&self, d: usize) -> Result<(CMat, CMat, CMat, CVec, CVec)> {
        let m = self.dim();
        if d > m {
            return Err(Error::DimensionMismatch { expected: m, found: d });
        }
        let r = m - d;
        let a = -self.q.view((0, 0), (d, d)).into_owned();
        let qwv = self.q.view((d, 0), (r, d)).into_owned();
        let qww = self.q.view((d, d), (r, r)).into_owned();
        let pv = self.p.rows(0, d).into_owned();
        let pw = self.p.rows(d, r).into_owned();
        Ok((a, qwv, qww, pv, pw))
    }

    /// Integrates out the `d` leading variables.
    ///
    /// Fails with `NotIntegrable` unless `−Q_vv` has positive-definite real
    /// part; `det^{1/2}` is taken on the branch continuous from real
    /// positive-definite matrices.
    pub fn integrate_leading(&self, d: usize) -> Result<QuadExp> {
        self.integrate_leading_inner(d).map(|(f, _)| f)
    }

    fn integrate_leading_inner(&self, d: usize) -> Result<(QuadExp, Option<CMat>)> {
        let (a, qwv, qww, pv, pw) = self.split(d)?;
        if d == 0 {
            return Ok((self.clone(), None));
        }
        let log_sqrt_det = log_sqrt_det_accretive(&a)?;
        let ainv = cinverse(&a, "Gaussian integration")?;
        let ainv_pv = &ainv * &pv;
        let q = &qww + &qwv * &ainv * qwv.transpose();
        let p = &pw + &qwv * &ainv_pv;
        let s = self.s + pv.dot(&ainv_pv) * 0.5 - log_sqrt_det;
        Ok((QuadExp::new(q, p, s), Some(ainv)))
    }

    /// Integrates the leading `d` variables of `form · poly`.
    ///
    /// With `h = uᵀw + v₀` and `a = ℓ_vᵀA⁻¹ℓ_v` the monomial `(ℓᵀx)ᵏ`
    /// becomes `Hₖ(h; a)`; the result is re-expanded in the variable `uᵀw`.
    pub fn integrate_leading_poly(&self, d: usize, poly: &FockPoly) -> Result<(QuadExp, FockPoly)> {
        let m = self.dim();
        if poly.l.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: poly.l.len() });
        }
        let (form, ainv) = self.integrate_leading_inner(d)?;
        let r = m - d;
        let lv = poly.l.rows(0, d).into_owned();
        let lw = poly.l.rows(d, r).into_owned();
        let (u, v0, a) = match ainv {
            None => (lw, c(0.0, 0.0), c(0.0, 0.0)),
            Some(ainv) => {
                let qwv = self.q.view((d, 0), (r, d)).into_owned();
                let pv = self.p.rows(0, d).into_owned();
                let ainv_l = &ainv * &lv;
                (&lw + qwv * &ainv_l, ainv_l.dot(&pv), ainv_l.dot(&lv))
            }
        };
        let kmax = poly.coeffs.len().saturating_sub(1);
        let family = normalized_hermite(kmax, v0, a);
        let mut coeffs = vec![c(0.0, 0.0); kmax + 1];
        for (fk, hk) in poly.coeffs.iter().zip(&family) {
            for (j, x) in hk.iter().enumerate() {
                coeffs[j] += fk * x;
            }
        }
        Ok((form, FockPoly { l: u, coeffs }))
    }

    /// `∫ form` over all variables, as a logarithm.
    pub fn integrate_all_log(&self) -> Result<Complex64> {
        Ok(self.integrate_leading(self.dim())?.s)
    }

    pub fn integrate_all(&self) -> Result<Complex64> {
        Ok(self.integrate_all_log()?.exp())
    }

    /// `∫ form · P₁ · P₂` over all variables.
    ///
    /// Uses the two-parameter generating function
    /// `∫ form·exp(β₁ℓ₁ᵀx + β₂ℓ₂ᵀx) = I₀·exp(uᵀβ + ½βᵀSβ)` and the Taylor
    /// coefficients of the right side in the normalized basis.
    pub fn integrate_all_poly2(&self, p1: &FockPoly, p2: &FockPoly) -> Result<Complex64> {
        let a = -&self.q;
        let log_i0 = self.integrate_all_log()?;
        let ainv = cinverse(&a, "Gaussian integration")?;
        let x1 = &ainv * &p1.l;
        let x2 = &ainv * &p2.l;
        let u1 = x1.dot(&self.p);
        let u2 = x2.dot(&self.p);
        let s11 = x1.dot(&p1.l);
        let s22 = x2.dot(&p2.l);
        let s12 = x1.dot(&p2.l);
        let jn = p1.coeffs.len();
        let kn = p2.coeffs.len();
        if jn == 0 || kn == 0 {
            return Ok(c(0.0, 0.0));
        }
        let mut d = vec![vec![c(0.0, 0.0); kn]; jn];
        d[0][0] = c(1.0, 0.0);
        for k in 0..kn - 1 {
            let mut v = u2 * d[0][k];
            if k > 0 {
                v += s22 * (k as f64).sqrt() * d[0][k - 1];
            }
            d[0][k + 1] = v / ((k + 1) as f64).sqrt();
        }
        for j in 0..jn - 1 {
            for k in 0..kn {
                let mut v = u1 * d[j][k];
                if j > 0 {
                    v += s11 * (j as f64).sqrt() * d[j - 1][k];
                }
                if k > 0 {
                    v += s12 * (k as f64).sqrt() * d[j][k - 1];
                }
                d[j + 1][k] = v / ((j + 1) as f64).sqrt();
            }
        }
        let mut total = c(0.0, 0.0);
        for (j, fj) in p1.coeffs.iter().enumerate() {
            for (k, gk) in p2.coeffs.iter().enumerate() {
                total += fj * gk * d[j][k];
            }
        }
        Ok(total * log_i0.exp())
    }
}
