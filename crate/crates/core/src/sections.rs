//! Polarized sections `φ(z_Ω) e^{−|z_Ω|²/2}` with Gaussian (and, for a single
//! linear direction, polynomial-times-Gaussian) `φ`, their inner products,
//! the Bergman projection, and half-form frames with their pairings.
//!
//! Everything is reduced to functions on `V = ℝ²ⁿ` in `(x, y)` coordinates
//! ([`VFunc`]) and integrated against `ε = dv/(2π)ⁿ`, which gives the vacuum
//! unit norm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{eval_normalized, FockPoly, QuadExp};
use crate::linalg::{
    c, cdet, complexify, continue_sqrt, csymmetrize, from_crows, max_abs_diff, spd_inv_sqrt,
    spectral_norm, sqrt_det_accretive, to_crows, CMat, CVec, RMat, RVec, I,
};
use crate::siegel::{transverse_pair_map, LagrangianFrame, SiegelPoint};
use crate::sympl::{xi_matrix, MetaplecticElement};

/// Margin below 1 required of `‖M‖`.
pub const NORM_MARGIN: f64 = 1e-9;
/// Tolerance used when deciding whether two frames coincide.
pub const FRAME_TOL: f64 = 1e-12;
/// Default Fock truncation.
pub const DEFAULT_TRUNCATION: usize = 32;

/// A Gaussian, optionally times a polynomial in one linear functional, as a
/// function of `v = (x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VFunc {
    pub form: QuadExp,
    pub poly: Option<FockPoly>,
}

impl VFunc {
    pub fn gaussian(form: QuadExp) -> Self {
        VFunc { form, poly: None }
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn eval(&self, v: &RVec) -> Complex64 {
        let x = complexify(&RMat::from_column_slice(v.len(), 1, v.as_slice())).column(0).into_owned();
        let mut val = self.form.eval(&x);
        if let Some(p) = &self.poly {
            val *= p.eval(&x);
        }
        val
    }

    pub fn conj(&self) -> Self {
        VFunc {
            form: self.form.conj(),
            poly: self.poly.as_ref().map(|p| p.conj()),
        }
    }

    pub fn scale_log(&self, log_factor: Complex64) -> Self {
        VFunc {
            form: self.form.scale_log(log_factor),
            poly: self.poly.clone(),
        }
    }

    /// Substitutes `v = T u` for a real square `T`.
    pub fn pullback(&self, t: &RMat) -> Self {
        let tc = complexify(t);
        let zero = CVec::zeros(t.nrows());
        VFunc {
            form: self.form.pullback(&tc, &zero),
            poly: self.poly.as_ref().map(|p| FockPoly {
                l: tc.transpose() * &p.l,
                coeffs: p.coeffs.clone(),
            }),
        }
    }
}

/// `∫ conj(f₁) f₂ ε` over `V`.
pub fn vfunc_inner(f1: &VFunc, f2: &VFunc) -> Result<Complex64> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch { expected: f1.dim(), found: f2.dim() });
    }
    let d = f1.dim();
    let g1 = f1.conj();
    let form = g1.form.mul(&f2.form);
    match (&g1.poly, &f2.poly) {
        (None, None) => form.integrate_all(),
        (p1, p2) => {
            let one = FockPoly::constant(d, c(1.0, 0.0));
            form.integrate_all_poly2(p1.as_ref().unwrap_or(&one), p2.as_ref().unwrap_or(&one))
        }
    }
}

/// `ψ(z) = exp(½ zᵀMz + bᵀz + c) e^{−|z|²/2}` in the coordinates `z_Ω` of `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr", into = "GaussianRepr")]
pub struct GaussianSection {
    pub frame: SiegelPoint,
    pub m: CMat,
    pub b: CVec,
    pub c: Complex64,
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr {
    frame: SiegelPoint,
    #[serde(rename = "M")]
    m: Vec<Vec<Complex64>>,
    b: Vec<Complex64>,
    c: Complex64,
}

impl TryFrom<GaussianRepr> for GaussianSection {
    type Error = Error;
    fn try_from(r: GaussianRepr) -> Result<Self> {
        let n = r.b.len();
        GaussianSection::new(r.frame, from_crows(&r.m)?, CVec::from_vec(r.b), r.c).and_then(|s| {
            if s.m.nrows() != n {
                Err(Error::DimensionMismatch { expected: n, found: s.m.nrows() })
            } else {
                Ok(s)
            }
        })
    }
}

impl From<GaussianSection> for GaussianRepr {
    fn from(s: GaussianSection) -> Self {
        GaussianRepr {
            frame: s.frame,
            m: to_crows(&s.m),
            b: s.b.iter().copied().collect(),
            c: s.c,
        }
    }
}

impl GaussianSection {
    pub fn new(frame: SiegelPoint, m: CMat, b: CVec, c: Complex64) -> Result<Self> {
        let n = frame.dim();
        if m.nrows() != n || m.ncols() != n || b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len().max(m.nrows()) });
        }
        let asym = max_abs_diff(&m, &m.transpose());
        if asym > 1e-12 * 1.0f64.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
            return Err(Error::InvalidInput(format!("M not symmetric (residual {asym:.3e})")));
        }
        if spectral_norm(&m) >= 1.0 - NORM_MARGIN {
            return Err(Error::NotIntegrable);
        }
        Ok(GaussianSection {
            frame,
            m: csymmetrize(&m),
            b,
            c,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn vacuum(frame: &SiegelPoint) -> Self {
        let n = frame.dim();
        GaussianSection {
            frame: frame.clone(),
            m: CMat::zeros(n, n),
            b: CVec::zeros(n),
            c: c(0.0, 0.0),
        }
    }

    /// Holomorphic part evaluated at `z`.
    pub fn phi(&self, z: &CVec) -> Complex64 {
        ((z.transpose() * &self.m * z)[(0, 0)] * 0.5 + self.b.dot(z) + self.c).exp()
    }

    /// Direct pointwise evaluation at `v = (x, y)`.
    pub fn eval_at(&self, v: &RVec) -> Complex64 {
        let z = self.frame.z_coords(v);
        self.phi(&z) * (-0.5 * z.norm_squared()).exp()
    }

    /// The section as a function on `V`: `Q = KᵀMK − G`, `p = Kᵀb`, `s = c`.
    pub fn to_vfunc(&self) -> VFunc {
        let k = self.frame.z_matrix();
        let g = complexify(&self.frame.z_metric());
        VFunc::gaussian(QuadExp::new(
            k.transpose() * &self.m * &k - g,
            k.transpose() * &self.b,
            self.c,
        ))
    }

    /// Evaluator on raw `(x, y)` slices that allocates nothing per call.
    pub fn pointwise(&self) -> impl Fn(&[f64]) -> Complex64 + Sync + '_ {
        let n = self.dim();
        let k = self.frame.z_matrix();
        move |v: &[f64]| {
            let mut z = [c(0.0, 0.0); 8];
            for i in 0..n {
                z[i] = (0..2 * n).map(|j| k[(i, j)] * v[j]).sum();
            }
            let mut e = self.c;
            for i in 0..n {
                e += self.b[i] * z[i] - 0.5 * z[i].norm_sqr();
                for j in 0..n {
                    e += 0.5 * self.m[(i, j)] * z[i] * z[j];
                }
            }
            e.exp()
        }
    }

    pub fn scale_log(&self, log_factor: Complex64) -> Self {
        GaussianSection {
            c: self.c + log_factor,
            ..self.clone()
        }
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(inner_product(self, self)?.re.max(0.0).sqrt())
    }

    pub fn same_frame(&self, other: &GaussianSection) -> bool {
        self.frame.approx_eq(&other.frame, FRAME_TOL)
    }

    pub fn approx_eq(&self, other: &GaussianSection, tol: f64) -> bool {
        self.frame.approx_eq(&other.frame, tol)
            && max_abs_diff(&self.m, &other.m) <= tol
            && (&self.b - &other.b).iter().all(|z| z.norm() <= tol)
            && (self.c - other.c).norm() <= tol
    }
}

/// `c_α(z) = exp(ᾱᵀz − ½|z|²)` in the frame `omega`.
pub fn coherent_state(alpha: &CVec, omega: &SiegelPoint) -> GaussianSection {
    GaussianSection {
        b: alpha.map(|z| z.conj()),
        ..GaussianSection::vacuum(omega)
    }
}

/// `⟨ψ₁, ψ₂⟩ = ∫ ψ̄₁ψ₂ ε` for sections in the same frame.
pub fn inner_product(psi1: &GaussianSection, psi2: &GaussianSection) -> Result<Complex64> {
    if !psi1.same_frame(psi2) {
        return Err(Error::FrameMismatch);
    }
    vfunc_inner(&psi1.to_vfunc(), &psi2.to_vfunc())
}

/// Inner product of sections expressed in different frames.
pub fn inner_product_cross_frame(psi1: &GaussianSection, psi2: &GaussianSection) -> Result<Complex64> {
    vfunc_inner(&psi1.to_vfunc(), &psi2.to_vfunc())
}

/// `φ(z) = exp(½zᵀMz + bᵀz + c) · Σ fₖ (dᵀz)ᵏ/√k!`.
///
/// For n = 1 the direction is normalized to `d = 1`, so `fₖ` are the
/// amplitudes on `zᵏ/√k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFockSection {
    pub base: GaussianSection,
    pub dir: CVec,
    pub coeffs: Vec<Complex64>,
}

impl PolyFockSection {
    pub fn new(base: GaussianSection, dir: CVec, coeffs: Vec<Complex64>) -> Result<Self> {
        if dir.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), found: dir.len() });
        }
        let mut s = PolyFockSection { base, dir, coeffs };
        if s.coeffs.is_empty() {
            s.coeffs.push(c(0.0, 0.0));
        }
        if s.base.dim() == 1 && s.dir[0] != c(1.0, 0.0) {
            let d = s.dir[0];
            let mut pow = c(1.0, 0.0);
            for f in s.coeffs.iter_mut() {
                *f *= pow;
                pow *= d;
            }
            s.dir[0] = c(1.0, 0.0);
        }
        Ok(s)
    }

    pub fn from_gaussian(g: GaussianSection) -> Self {
        let mut dir = CVec::zeros(g.dim());
        dir[0] = c(1.0, 0.0);
        PolyFockSection { base: g, dir, coeffs: vec![c(1.0, 0.0)] }
    }

    pub fn frame(&self) -> &SiegelPoint {
        &self.base.frame
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval_at(&self, v: &RVec) -> Complex64 {
        let z = self.base.frame.z_coords(v);
        self.base.eval_at(v) * eval_normalized(&self.coeffs, self.dir.dot(&z))
    }

    pub fn pointwise(&self) -> impl Fn(&[f64]) -> Complex64 + Sync + '_ {
        let n = self.base.dim();
        let k = self.base.frame.z_matrix();
        let l = k.transpose() * &self.dir;
        let g = self.base.pointwise();
        move |v: &[f64]| {
            let y: Complex64 = (0..2 * n).map(|j| l[j] * v[j]).sum();
            g(v) * eval_normalized(&self.coeffs, y)
        }
    }

    pub fn to_vfunc(&self) -> VFunc {
        let k = self.base.frame.z_matrix();
        VFunc {
            form: self.base.to_vfunc().form,
            poly: Some(FockPoly {
                l: k.transpose() * &self.dir,
                coeffs: self.coeffs.clone(),
            }),
        }
    }

    /// Drops the polynomial when it is constant.
    pub fn into_gaussian(self) -> Option<GaussianSection> {
        let nontrivial = self.coeffs.iter().skip(1).any(|z| z.norm() > 0.0);
        if nontrivial || self.coeffs[0].norm() == 0.0 {
            return None;
        }
        Some(self.base.scale_log(self.coeffs[0].ln()))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        PolyFockSection {
            coeffs: self.coeffs.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }
}

pub fn poly_inner_product(p1: &PolyFockSection, p2: &PolyFockSection) -> Result<Complex64> {
    vfunc_inner(&p1.to_vfunc(), &p2.to_vfunc())
}

/// `|k⟩ = zᵏ/√k! · e^{−|z|²/2}` (n = 1).
pub fn fock_state(k: usize, omega: &SiegelPoint) -> Result<PolyFockSection> {
    if omega.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: omega.dim() });
    }
    let mut coeffs = vec![c(0.0, 0.0); k + 1];
    coeffs[k] = c(1.0, 0.0);
    PolyFockSection::new(GaussianSection::vacuum(omega), CVec::from_element(1, c(1.0, 0.0)), coeffs)
}

/// Amplitudes `⟨k|ψ⟩` of the Gaussian part, `k < n_trunc`, in its own frame
/// (n = 1): `Qₖ₊₁ = (bQₖ + √k·M·Qₖ₋₁)/√(k+1)` times `e^c`.
pub fn gaussian_fock_coefficients(m: Complex64, b: Complex64, log_c: Complex64, n_trunc: usize) -> Vec<Complex64> {
    let mut q = vec![c(0.0, 0.0); n_trunc];
    if n_trunc == 0 {
        return q;
    }
    q[0] = c(1.0, 0.0);
    for k in 0..n_trunc - 1 {
        let mut v = b * q[k];
        if k > 0 {
            v += m * (k as f64).sqrt() * q[k - 1];
        }
        q[k + 1] = v / ((k + 1) as f64).sqrt();
    }
    let scale = log_c.exp();
    q.into_iter().map(|x| x * scale).collect()
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// Fock amplitudes of a section in its own frame (n = 1).
pub fn fock_coefficients(psi: &PolyFockSection, n_trunc: usize) -> Result<Vec<Complex64>> {
    if psi.base.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: psi.base.dim() });
    }
    let g = gaussian_fock_coefficients(psi.base.m[(0, 0)], psi.base.b[0], psi.base.c, n_trunc);
    let lnf: Vec<f64> = (0..n_trunc.max(psi.coeffs.len())).map(ln_factorial).collect();
    let mut out = vec![c(0.0, 0.0); n_trunc];
    for (k, slot) in out.iter_mut().enumerate() {
        for (j, f) in psi.coeffs.iter().enumerate().take(k + 1) {
            let binom = (0.5 * (lnf[k] - lnf[j] - lnf[k - j])).exp();
            *slot += f * g[k - j] * binom;
        }
    }
    Ok(out)
}

/// Orthogonal projection onto the polarized sections of `target`.
///
/// `P f(z') = e^{−|z'|²/2} ∫ exp(z'ᵀ·conj(K'v) − ½|K'v|²) f(v) ε`, computed
/// by integrating out `v` with `z'` kept as a formal variable.
pub fn bergman_project(f: &VFunc, target: &SiegelPoint) -> Result<PolyFockSection> {
    let n = target.dim();
    let d = 2 * n;
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
    }
    let kbar = target.z_matrix().map(|z| z.conj());
    let g = complexify(&target.z_metric());
    let mut q = CMat::zeros(d + n, d + n);
    q.view_mut((0, 0), (d, d)).copy_from(&(&f.form.q - g));
    q.view_mut((d, 0), (n, d)).copy_from(&kbar);
    q.view_mut((0, d), (d, n)).copy_from(&kbar.transpose());
    let mut p = CVec::zeros(d + n);
    p.rows_mut(0, d).copy_from(&f.form.p);
    let joint = QuadExp::new(q, p, f.form.s);
    let (out, dir, coeffs) = match &f.poly {
        None => {
            let out = joint.integrate_leading(d)?;
            let mut dir = CVec::zeros(n);
            dir[0] = c(1.0, 0.0);
            (out, dir, vec![c(1.0, 0.0)])
        }
        Some(poly) => {
            let mut l = CVec::zeros(d + n);
            l.rows_mut(0, d).copy_from(&poly.l);
            let (out, fp) = joint.integrate_leading_poly(d, &FockPoly { l, coeffs: poly.coeffs.clone() })?;
            if fp.l.norm() == 0.0 {
                let mut dir = CVec::zeros(n);
                dir[0] = c(1.0, 0.0);
                (out, dir, vec![fp.coeffs[0]])
            } else {
                (out, fp.l, fp.coeffs)
            }
        }
    };
    let base = GaussianSection::new(target.clone(), out.q, out.p, out.s)?;
    PolyFockSection::new(base, dir, coeffs)
}

/// Bergman projection of a Gaussian input with Gaussian output.
pub fn bergman_project_gaussian(f: &VFunc, target: &SiegelPoint) -> Result<GaussianSection> {
    bergman_project(f, target)?
        .into_gaussian()
        .ok_or_else(|| Error::InvalidInput("projection is not a pure Gaussian".into()))
}

/// A real polarization with a chosen square root of its volume form, fixed
/// by the pairing `reference = ⟨√dⁿz_{iI}, √dⁿu⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealHalfForm {
    pub frame: LagrangianFrame,
    pub reference: Complex64,
}

fn real_rows(frame: &LagrangianFrame) -> CMat {
    let n = frame.dim();
    complexify(&frame.chart.inverse().to_matrix().view((0, 0), (n, 2 * n)).into_owned())
}

/// `det[K̄_Ω; R]/iⁿ`, the square of `⟨√dⁿz_Ω, √dⁿu⟩`.
fn kahler_real_squared(omega_m: &CMat, rows: &CMat) -> Complex64 {
    let n = omega_m.nrows();
    let s = complexify(&spd_inv_sqrt(&omega_m.map(|z| 2.0 * z.im)));
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&s);
    m.view_mut((0, n), (n, n)).copy_from(&(-&s * omega_m));
    m.view_mut((n, 0), (n, 2 * n)).copy_from(rows);
    cdet(&m) / I.powu(n as u32)
}

impl RealHalfForm {
    /// `√dⁿx` on `L₋`, with `⟨√dⁿz_{iI}, √dⁿx⟩ = 2^{−n/4}`.
    pub fn dx(n: usize) -> Self {
        RealHalfForm {
            frame: LagrangianFrame::minus(n),
            reference: c(2f64.powf(-(n as f64) / 4.0), 0.0),
        }
    }

    /// `√dⁿy` on `L₊`, with `⟨√dⁿz_{iI}, √dⁿy⟩ = 2^{−n/4} i^{−n/2}`.
    pub fn dy(n: usize) -> Self {
        let phase = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4 * n as f64);
        RealHalfForm {
            frame: LagrangianFrame::plus(n),
            reference: phase * 2f64.powf(-(n as f64) / 4.0),
        }
    }

    /// Principal root at `iI` for an arbitrary chart.
    pub fn principal(frame: LagrangianFrame) -> Self {
        let n = frame.dim();
        let sq = kahler_real_squared(&(CMat::identity(n, n) * I), &real_rows(&frame));
        RealHalfForm { frame, reference: sq.sqrt() }
    }

    /// `m · √dⁿx` on `g·L₋`.
    pub fn from_metaplectic(m: &MetaplecticElement) -> Result<Self> {
        let g = m.symplectic();
        let n = g.dim();
        let inv = m.inverse()?;
        let i_n = SiegelPoint::i_identity(n);
        let back = g.inverse().act_on_siegel(&i_n)?;
        let mu = inv.phase_at(&i_n)?;
        let base = kahler_real_pairing(&back, &RealHalfForm::dx(n))?;
        Ok(RealHalfForm {
            frame: LagrangianFrame::from_chart(g.clone()),
            reference: mu.conj() * base,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }
}

/// `⟨√dⁿz_Ω, √dⁿu⟩`, continued from `iI` along the straight segment.
pub fn kahler_real_pairing(omega: &SiegelPoint, real: &RealHalfForm) -> Result<Complex64> {
    let n = omega.dim();
    let rows = real_rows(&real.frame);
    let start = CMat::identity(n, n) * I;
    let end = omega.as_complex();
    continue_sqrt(
        |s| kahler_real_squared(&(&start * c(1.0 - s, 0.0) + &end * c(s, 0.0)), &rows),
        real.reference,
    )
}

/// `⟨√dⁿz_{Ω'}, √dⁿz_Ω⟩ = (det Ξ_{Ω'Ω})^{1/2} / ((det Ω₂)^{1/4}(det Ω'₂)^{1/4})`.
pub fn kahler_pairing(omega_p: &SiegelPoint, omega: &SiegelPoint) -> Result<Complex64> {
    let root = sqrt_det_accretive(&xi_matrix(omega_p, omega))?;
    let d = omega.im().determinant() * omega_p.im().determinant();
    Ok(root / d.powf(0.25))
}

/// `⟨√ν', √ν⟩` for transverse real polarizations.
///
/// With `h` sending `L₋, L₊` to `L, L'` and `Ω = h·iI`, the pairing equals
/// `2^{n/2} · conj⟨√dⁿz_Ω, √ν'⟩ · ⟨√dⁿz_Ω, √ν⟩`.
pub fn real_pairing(nu_p: &RealHalfForm, nu: &RealHalfForm) -> Result<Complex64> {
    let n = nu.dim();
    let h = transverse_pair_map(&nu.frame, &nu_p.frame)?;
    let omega = h.act_on_siegel(&SiegelPoint::i_identity(n))?;
    let a = kahler_real_pairing(&omega, nu_p)?;
    let b = kahler_real_pairing(&omega, nu)?;
    Ok(a.conj() * b * 2f64.powf(n as f64 / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HalfFormBase {
    Kahler(SiegelPoint),
    Real(RealHalfForm),
}

/// `phase · √dⁿz_Ω` or `phase · √ν` for a real polarization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfFormFrame {
    pub base: HalfFormBase,
    pub phase: Complex64,
}

impl HalfFormFrame {
    pub fn kahler(omega: &SiegelPoint) -> Self {
        HalfFormFrame {
            base: HalfFormBase::Kahler(omega.clone()),
            phase: c(1.0, 0.0),
        }
    }

    pub fn real(nu: RealHalfForm) -> Self {
        HalfFormFrame {
            base: HalfFormBase::Real(nu),
            phase: c(1.0, 0.0),
        }
    }

    pub fn with_phase(mut self, phase: Complex64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("half-form phase has modulus {}", phase.norm())));
        }
        self.phase *= phase;
        Ok(self)
    }
}

/// Hermitian pairing of half-form frames, conjugate-linear in the first slot.
pub fn pair_halfforms(h1: &HalfFormFrame, h2: &HalfFormFrame) -> Result<Complex64> {
    let base = match (&h1.base, &h2.base) {
        (HalfFormBase::Kahler(a), HalfFormBase::Kahler(b)) => kahler_pairing(a, b)?,
        (HalfFormBase::Kahler(a), HalfFormBase::Real(r)) => kahler_real_pairing(a, r)?,
        (HalfFormBase::Real(r), HalfFormBase::Kahler(a)) => kahler_real_pairing(a, r)?.conj(),
        (HalfFormBase::Real(r1), HalfFormBase::Real(r2)) => {
            if r1.frame.same_subspace(&r2.frame) {
                if (r1.reference - r2.reference).norm() < 1e-12 {
                    c(1.0, 0.0)
                } else {
                    return Err(Error::NonTransverse(0.0));
                }
            } else {
                real_pairing(r1, r2)?
            }
        }
    };
    Ok(h1.phase.conj() * h2.phase * base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympl::{random, SymplecticMap};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_has_unit_norm() {
        for n in 1..=3 {
            let v = GaussianSection::vacuum(&SiegelPoint::i_identity(n));
            assert!((inner_product(&v, &v).unwrap() - c(1.0, 0.0)).norm() < 1e-13);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let om = random::siegel_point(2, &mut rng);
        let v = GaussianSection::vacuum(&om);
        assert!((v.norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_state_overlaps() {
        // ⟨c_α, c_β⟩ = exp(αᵀβ̄)
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let om = random::siegel_point(2, &mut rng);
        let a = random::complex_vector(2, 1.0, &mut rng);
        let b = random::complex_vector(2, 1.0, &mut rng);
        let v = inner_product(&coherent_state(&a, &om), &coherent_state(&b, &om)).unwrap();
        let expect = a.dot(&b.map(|z| z.conj())).exp();
        assert!((v - expect).norm() < 1e-12 * expect.norm());
        let alpha = CVec::from_element(1, c(0.5, 0.5));
        let s = coherent_state(&alpha, &SiegelPoint::i_identity(1));
        assert!((s.norm().unwrap().powi(2) - 0.5f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn frame_mismatch_is_rejected() {
        let a = GaussianSection::vacuum(&SiegelPoint::i_identity(1));
        let b = GaussianSection::vacuum(&SiegelPoint::scalar_point(c(0.3, 2.0)));
        assert_eq!(inner_product(&a, &b), Err(Error::FrameMismatch));
        let x = inner_product_cross_frame(&a, &b).unwrap();
        let y = inner_product_cross_frame(&b, &a).unwrap();
        assert!((x - y.conj()).norm() < 1e-14);
    }

    #[test]
    fn cross_frame_vacuum_overlap() {
        // Separable integral in x and y: ⟨vac_{ie^{2t}}, vac_i⟩ = 2/√(2 + 2cosh 2t) = sech t
        for t in [0.25, 1.0, 2.0] {
            let a = GaussianSection::vacuum(&SiegelPoint::i_identity(1));
            let b = GaussianSection::vacuum(&SiegelPoint::from_rates(&[1.0], t));
            let x = inner_product_cross_frame(&b, &a).unwrap();
            assert!((x - c(1.0 / t.cosh(), 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_integrable_m() {
        let e = GaussianSection::new(
            SiegelPoint::i_identity(1),
            CMat::from_element(1, 1, c(1.0, 0.0)),
            CVec::zeros(1),
            c(0.0, 0.0),
        );
        assert_eq!(e, Err(Error::NotIntegrable));
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let om = random::siegel_point(2, &mut rng);
        let s = coherent_state(&random::complex_vector(2, 1.0, &mut rng), &om);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"M\""));
        let back: GaussianSection = serde_json::from_str(&text).unwrap();
        assert!(back.approx_eq(&s, 1e-15));
    }

    #[test]
    fn fock_states_are_orthonormal() {
        let om = SiegelPoint::scalar_point(c(0.4, 1.3));
        for j in 0..8 {
            for k in 0..8 {
                let v = poly_inner_product(&fock_state(j, &om).unwrap(), &fock_state(k, &om).unwrap())
                    .unwrap();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((v - c(expect, 0.0)).norm() < 1e-12, "{j},{k}: {v}");
            }
        }
    }

    #[test]
    fn fock_overlap_with_coherent_state() {
        // ⟨k|c_α⟩ = ᾱᵏ/√k!
        let om = SiegelPoint::i_identity(1);
        let alpha = c(0.7, -0.4);
        let coh = PolyFockSection::from_gaussian(coherent_state(&CVec::from_element(1, alpha), &om));
        let mut expect = c(1.0, 0.0);
        for k in 0..10 {
            if k > 0 {
                expect *= alpha.conj() / (k as f64).sqrt();
            }
            let v = poly_inner_product(&fock_state(k, &om).unwrap(), &coh).unwrap();
            assert!((v - expect).norm() < 1e-13);
        }
        let amps = fock_coefficients(&coh, 10).unwrap();
        assert!((amps[3] - alpha.conj().powu(3) / 6f64.sqrt()).norm() < 1e-14);
    }

    #[test]
    fn fock_coefficients_of_polynomial_sections() {
        let om = SiegelPoint::i_identity(1);
        let base = GaussianSection::new(
            om.clone(),
            CMat::from_element(1, 1, c(0.2, 0.1)),
            CVec::from_element(1, c(0.3, 0.0)),
            c(0.0, 0.0),
        )
        .unwrap();
        let p = PolyFockSection::new(base, CVec::from_element(1, c(1.0, 0.0)), vec![c(0.5, 0.0), c(0.0, 1.0), c(0.3, 0.0)])
            .unwrap();
        let amps = fock_coefficients(&p, 24).unwrap();
        for k in 0..5 {
            let v = poly_inner_product(&fock_state(k, &om).unwrap(), &p).unwrap();
            assert!((v - amps[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_reproduces_holomorphic_sections() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for n in 1..=2 {
            let om = random::siegel_point(n, &mut rng);
            let s = coherent_state(&random::complex_vector(n, 1.0, &mut rng), &om);
            let p = bergman_project_gaussian(&s.to_vfunc(), &om).unwrap();
            assert!(p.approx_eq(&s, 1e-11));
        }
    }

    #[test]
    fn projected_vacuum_matches_closed_form() {
        // vacuum of i projected into ie²: M' = −tanh 1, |norm|² = sech 1
        let v = GaussianSection::vacuum(&SiegelPoint::i_identity(1));
        let target = SiegelPoint::from_rates(&[1.0], 1.0);
        let p = bergman_project_gaussian(&v.to_vfunc(), &target).unwrap();
        assert!((p.m[(0, 0)] + c(1f64.tanh(), 0.0)).norm() < 1e-13);
        assert!(p.b[0].norm() < 1e-13);
        let n2 = p.norm().unwrap().powi(2);
        assert!((n2 - 1.0 / 1f64.cosh()).abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let a = random::siegel_point(2, &mut rng);
        let b = random::siegel_point(2, &mut rng);
        let s = coherent_state(&random::complex_vector(2, 1.0, &mut rng), &a);
        let p1 = bergman_project_gaussian(&s.to_vfunc(), &b).unwrap();
        let p2 = bergman_project_gaussian(&p1.to_vfunc(), &b).unwrap();
        assert!(p1.approx_eq(&p2, 1e-10));
        assert!(p1.norm().unwrap() <= s.norm().unwrap() + 1e-12);
    }

    #[test]
    fn poly_projection_matches_fock_expansion() {
        // Project |2⟩ of one frame into another and compare amplitudes with
        // inner products against that frame's Fock states.
        let a = SiegelPoint::scalar_point(c(0.2, 0.8));
        let b = SiegelPoint::scalar_point(c(-0.3, 1.7));
        let src = fock_state(2, &a).unwrap();
        let proj = bergman_project(&src.to_vfunc(), &b).unwrap();
        let amps = fock_coefficients(&proj, 8).unwrap();
        for k in 0..8 {
            let direct = vfunc_inner(&fock_state(k, &b).unwrap().to_vfunc(), &src.to_vfunc()).unwrap();
            assert!((direct - amps[k]).norm() < 1e-12, "{k}: {direct} vs {}", amps[k]);
        }
    }

    #[test]
    fn halfform_pairings() {
        let i1 = SiegelPoint::i_identity(1);
        let h = HalfFormFrame::kahler(&i1);
        assert!((pair_halfforms(&h, &h).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let e2 = SiegelPoint::from_rates(&[1.0], 1.0);
        let v = pair_halfforms(&HalfFormFrame::kahler(&e2), &h).unwrap();
        let expect = (((2f64).exp() + 1.0) / 2.0).sqrt() / 1f64.exp().sqrt();
        assert!((v - c(expect, 0.0)).norm() < 1e-14);
        for n in 1..=3 {
            let dx = HalfFormFrame::real(RealHalfForm::dx(n));
            let dy = HalfFormFrame::real(RealHalfForm::dy(n));
            let v = pair_halfforms(&dy, &dx).unwrap();
            let expect = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * n as f64);
            assert!((v - expect).norm() < 1e-13, "n={n}: {v}");
            let w = pair_halfforms(&dx, &dy).unwrap();
            assert!((w - v.conj()).norm() < 1e-13);
            assert!((pair_halfforms(&dx, &dx).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn kahler_real_reference_values() {
        // ⟨√dz_Ω, √dx⟩ = (det 2Ω₂)^{-1/4} (det Ω/i)^{1/2}
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let om = random::siegel_point(2, &mut rng);
        let v = kahler_real_pairing(&om, &RealHalfForm::dx(2)).unwrap();
        let sq = cdet(&(om.as_complex() * (-I))) / (om.im() * 2.0).determinant().sqrt();
        assert!((v * v - sq).norm() < 1e-12);
        let at_i = kahler_real_pairing(&SiegelPoint::i_identity(1), &RealHalfForm::dx(1)).unwrap();
        assert!((at_i - c(2f64.powf(-0.25), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn real_halfform_from_identity_lift_is_dx() {
        let m = MetaplecticElement::identity(2);
        let r = RealHalfForm::from_metaplectic(&m).unwrap();
        assert!((r.reference - RealHalfForm::dx(2).reference).norm() < 1e-14);
        let q = MetaplecticElement::lift(SymplecticMap::rotation_quarter(1));
        let r = RealHalfForm::from_metaplectic(&q).unwrap();
        let dy = RealHalfForm::dy(1);
        assert!(r.frame.same_subspace(&dy.frame));
        assert!((r.reference.norm() - dy.reference.norm()).abs() < 1e-14);
    }

    #[test]
    fn non_transverse_real_pairing_fails() {
        let a = RealHalfForm::dx(1);
        let mut b = RealHalfForm::dx(1);
        b.reference = -b.reference;
        let e = pair_halfforms(&HalfFormFrame::real(a), &HalfFormFrame::real(b));
        assert!(matches!(e, Err(Error::NonTransverse(_))));
    }
}
