//! Real polarizations on the boundary of 𝔥ₙ: sections covariantly constant
//! along a Lagrangian `L`, the Segal–Bargmann and Fourier transforms between
//! them, and the boundary limits of parallel transport.
//!
//! A section on `L = h·L₋` is stored through the chart `h`: with
//! `(u, w) = h⁻¹v` it reads `φ(u) e^{(i/2)uᵀw}`. For `L₊` with the quarter
//! turn chart this is `φ(y) e^{−(i/2)xᵀy}`.
//!
//! Every operator here has the same shape: the half-form pairing between
//! source and target times the projection onto the target polarization.
//! The explicit kernels on `L₋, L₊` are kept as separate closed forms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{FockPoly, QuadExp};
use crate::linalg::{c, complexify, sqrt_det_accretive, spd_sqrt, CMat, CVec, RMat, RVec, I};
use crate::quadrature::{quadrature_integrate, QuadratureSpec};
use crate::sections::{
    bergman_project, kahler_pairing, kahler_real_pairing, pair_halfforms, vfunc_inner, HalfFormBase,
    HalfFormFrame, PolyFockSection, RealHalfForm, VFunc,
};
use crate::siegel::{geodesic_boundary_limits, GeodesicSpec, LagrangianFrame, SiegelPoint};
use crate::sympl::{MetaplecticElement, SymplecticMap};
use crate::transport::{transport_halfform_phase, transport_polyfock};

/// Default nodes per dimension for difference norms.
pub const DISTANCE_NODES: usize = 48;

fn integrable(q: &CMat) -> bool {
    let re = q.map(|z| -z.re);
    let re = (&re + re.transpose()) * 0.5;
    re.cholesky().is_some()
}

/// `φ(u) e^{(i/2)uᵀw}` with `(u, w) = chart⁻¹ v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSection {
    pub frame: LagrangianFrame,
    /// Gaussian-polynomial profile on `V/L ≅ ℝⁿ`.
    pub profile: VFunc,
}

impl LagrangianSection {
    pub fn new(frame: LagrangianFrame, profile: VFunc) -> Result<Self> {
        let n = frame.dim();
        if profile.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: profile.dim() });
        }
        if !integrable(&profile.form.q) {
            return Err(Error::NotIntegrable);
        }
        Ok(LagrangianSection { frame, profile })
    }

    /// `exp(½uᵀQu + pᵀu + s)`.
    pub fn gaussian(frame: LagrangianFrame, q: CMat, p: CVec, s: Complex64) -> Result<Self> {
        LagrangianSection::new(frame, VFunc::gaussian(QuadExp::new(q, p, s)))
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn eval_at(&self, v: &RVec) -> Complex64 {
        let n = self.dim();
        let uw = self.frame.chart.inverse().apply(v);
        let u = uw.rows(0, n).into_owned();
        let w = uw.rows(n, n);
        self.profile.eval(&u) * (I * 0.5 * u.dot(&w)).exp()
    }

    /// The section as a function on `V`.
    pub fn to_vfunc(&self) -> VFunc {
        let n = self.dim();
        let f = &self.profile;
        let mut q = CMat::zeros(2 * n, 2 * n);
        q.view_mut((0, 0), (n, n)).copy_from(&f.form.q);
        for k in 0..n {
            q[(k, n + k)] = I * 0.5;
            q[(n + k, k)] = I * 0.5;
        }
        let mut p = CVec::zeros(2 * n);
        p.rows_mut(0, n).copy_from(&f.form.p);
        let poly = f.poly.as_ref().map(|pl| {
            let mut l = CVec::zeros(2 * n);
            l.rows_mut(0, n).copy_from(&pl.l);
            FockPoly { l, coeffs: pl.coeffs.clone() }
        });
        VFunc { form: QuadExp::new(q, p, f.form.s), poly }.pullback(&self.frame.chart.inverse().to_matrix())
    }
}

/// A boundary section tensored with a half-form on the same Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedBoundarySection {
    pub section: LagrangianSection,
    pub halfform: HalfFormFrame,
}

impl CorrectedBoundarySection {
    pub fn new(section: LagrangianSection, halfform: HalfFormFrame) -> Result<Self> {
        match &halfform.base {
            HalfFormBase::Real(nu) if nu.frame.same_subspace(&section.frame) => {}
            _ => return Err(Error::PolarizationMismatch),
        }
        Ok(CorrectedBoundarySection { section, halfform })
    }

    /// Section on `frame` tensored with the principal `√dⁿu` of its chart.
    pub fn principal(section: LagrangianSection) -> Self {
        let nu = RealHalfForm::principal(section.frame.clone());
        CorrectedBoundarySection { section, halfform: HalfFormFrame::real(nu) }
    }

    pub fn dim(&self) -> usize {
        self.section.dim()
    }

    fn real_halfform(&self) -> &RealHalfForm {
        match &self.halfform.base {
            HalfFormBase::Real(nu) => nu,
            HalfFormBase::Kahler(_) => unreachable!("checked on construction"),
        }
    }

    /// Profile in the coordinates of `chart` (same subspace), against the
    /// principal `√dⁿu` of that chart.
    pub fn profile_in(&self, chart: &SymplecticMap) -> Result<VFunc> {
        let target = LagrangianFrame::from_chart(chart.clone());
        if !target.same_subspace(&self.section.frame) {
            return Err(Error::PolarizationMismatch);
        }
        let n = self.dim();
        // (u₁, w₁) = (A u₂, C u₂ + D w₂)
        let m = self.section.frame.chart.inverse().compose(chart)?.to_matrix();
        let a = m.view((0, 0), (n, n)).into_owned();
        let cm = m.view((n, 0), (n, n)).into_owned();
        let moved = self.section.profile.pullback(&a);
        let extra = complexify(&(a.transpose() * cm)) * I;
        let extra = (&extra + extra.transpose()) * c(0.5, 0.0);
        let form = QuadExp::new(&moved.form.q + extra, moved.form.p.clone(), moved.form.s);
        let principal = RealHalfForm::principal(target);
        let kappa = self.halfform.phase * self.real_halfform().reference / principal.reference;
        Ok(VFunc { form, poly: moved.poly }.scale_log(kappa.ln()))
    }

    pub fn eval_at(&self, v: &RVec) -> Complex64 {
        self.section.eval_at(v)
    }
}

/// Kähler section with its half-form.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedSection {
    pub section: PolyFockSection,
    pub halfform: HalfFormFrame,
}

impl CorrectedSection {
    pub fn new(section: PolyFockSection, halfform: HalfFormFrame) -> Result<Self> {
        match &halfform.base {
            HalfFormBase::Kahler(om) if om.approx_eq(section.frame(), 1e-12) => {}
            _ => return Err(Error::FrameMismatch),
        }
        Ok(CorrectedSection { section, halfform })
    }

    /// Section with the phase folded in, against `√dⁿz_Ω`.
    pub fn folded(&self) -> PolyFockSection {
        self.section.scale(self.halfform.phase)
    }

    pub fn frame(&self) -> &SiegelPoint {
        self.section.frame()
    }
}

/// `∫_{V/L} ψ̄₁ψ₂ |ν|/(2π)^{n/2}`.
pub fn boundary_inner_product(a: &CorrectedBoundarySection, b: &CorrectedBoundarySection) -> Result<Complex64> {
    if !a.section.frame.same_subspace(&b.section.frame) {
        return Err(Error::PolarizationMismatch);
    }
    let chart = &a.section.frame.chart;
    vfunc_inner(&a.profile_in(chart)?, &b.profile_in(chart)?)
}

/// `‖a − b‖` on the boundary by quadrature over `V/L`.
pub fn boundary_distance(a: &CorrectedBoundarySection, b: &CorrectedBoundarySection, nodes: usize) -> Result<f64> {
    if !a.section.frame.same_subspace(&b.section.frame) {
        return Err(Error::PolarizationMismatch);
    }
    let chart = &a.section.frame.chart;
    vfunc_distance(&a.profile_in(chart)?, &b.profile_in(chart)?, nodes)
}

/// `‖a − b‖` of two Kähler sections on the same frame, phases folded in.
pub fn corrected_distance(a: &CorrectedSection, b: &CorrectedSection, nodes: usize) -> Result<f64> {
    if !a.frame().approx_eq(b.frame(), 1e-10) {
        return Err(Error::FrameMismatch);
    }
    vfunc_distance(&a.folded().to_vfunc(), &b.folded().to_vfunc(), nodes)
}

/// `(∫ |f − g|² ε)^{1/2}`, with the grid fitted to the decay of `f`.
pub fn vfunc_distance(f: &VFunc, g: &VFunc, nodes: usize) -> Result<f64> {
    let width = f.form.q.map(|z| -2.0 * z.re);
    let width = (&width + width.transpose()) * 0.5;
    let spec = QuadratureSpec { nodes, tolerance: 1.0, check_refinement: false };
    let v = quadrature_integrate(
        |v: &[f64]| {
            let x = RVec::from_column_slice(v);
            c((f.eval(&x) - g.eval(&x)).norm_sqr(), 0.0)
        },
        &width,
        &spec,
    )?;
    Ok(v.re.max(0.0).sqrt())
}

pub fn boundary_norm(a: &CorrectedBoundarySection) -> Result<f64> {
    Ok(boundary_inner_product(a, a)?.re.max(0.0).sqrt())
}

/// `η(u) = ∫ f(h(u, w)) e^{−(i/2)uᵀw} dw/(2π)^{n/2}`: the component of `f`
/// seen by sections covariantly constant along `h·L₋`.
fn real_project(f: &VFunc, chart: &SymplecticMap) -> Result<VFunc> {
    let n = chart.dim();
    let mut swap = RMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        swap[(k, n + k)] = 1.0;
        swap[(n + k, k)] = 1.0;
    }
    // variables ordered [w; u]
    let g = f.pullback(&(chart.to_matrix() * swap));
    let mut q = g.form.q.clone();
    for k in 0..n {
        q[(k, n + k)] -= I * 0.5;
        q[(n + k, k)] -= I * 0.5;
    }
    let joint = QuadExp::new(q, g.form.p.clone(), g.form.s);
    match &g.poly {
        None => Ok(VFunc::gaussian(joint.integrate_leading(n)?)),
        Some(poly) => {
            let (form, fp) = joint.integrate_leading_poly(n, poly)?;
            Ok(VFunc { form, poly: Some(fp) })
        }
    }
}

/// `|ref/ref_principal|²`, the density of `|ν|` against `|dⁿu|`.
fn density(nu: &RealHalfForm) -> f64 {
    (nu.reference / RealHalfForm::principal(nu.frame.clone()).reference).norm_sqr()
}

/// `B̂_{ΩL}` through the pairing: `⟨√dⁿz_Ω, √ν⟩ · P_Ω ψ`.
pub fn segal_bargmann_general(psi: &CorrectedBoundarySection, omega: &SiegelPoint) -> Result<CorrectedSection> {
    let coef = pair_halfforms(&HalfFormFrame::kahler(omega), &psi.halfform)?;
    let section = bergman_project(&psi.section.to_vfunc(), omega)?.scale(coef);
    CorrectedSection::new(section, HalfFormFrame::kahler(omega))
}

/// `B̂⁻¹_{ΩL}` as the adjoint of the pairing, landing on `√ν`.
pub fn segal_bargmann_inverse_general(psi: &CorrectedSection, nu: &RealHalfForm) -> Result<CorrectedBoundarySection> {
    let target = HalfFormFrame::real(nu.clone());
    let coef = pair_halfforms(&target, &psi.halfform)? / density(nu);
    let profile = real_project(&psi.section.to_vfunc(), &nu.frame.chart)?.scale_log(coef.ln());
    CorrectedBoundarySection::new(LagrangianSection::new(nu.frame.clone(), profile)?, target)
}

/// `F̂_{L'L}` from the pairing between transverse real polarizations.
pub fn fourier_general(psi: &CorrectedBoundarySection, nu_p: &RealHalfForm) -> Result<CorrectedBoundarySection> {
    psi.section.frame.check_transverse(&nu_p.frame)?;
    let target = HalfFormFrame::real(nu_p.clone());
    let coef = pair_halfforms(&target, &psi.halfform)? / density(nu_p);
    let profile = real_project(&psi.section.to_vfunc(), &nu_p.frame.chart)?.scale_log(coef.ln());
    CorrectedBoundarySection::new(LagrangianSection::new(nu_p.frame.clone(), profile)?, target)
}

/// `F̂_{L'L} = B̂⁻¹_{ΩL'} ∘ B̂_{ΩL}`.
pub fn fourier_via_kahler(
    psi: &CorrectedBoundarySection,
    omega: &SiegelPoint,
    nu_p: &RealHalfForm,
) -> Result<CorrectedBoundarySection> {
    psi.section.frame.check_transverse(&nu_p.frame)?;
    segal_bargmann_inverse_general(&segal_bargmann_general(psi, omega)?, nu_p)
}

fn profile_on_minus(psi: &CorrectedBoundarySection) -> Result<VFunc> {
    let n = psi.dim();
    if !psi.section.frame.same_subspace(&LagrangianFrame::minus(n)) {
        return Err(Error::PolarizationMismatch);
    }
    psi.profile_in(&SymplecticMap::identity(n))
}

/// Blocks `(I − S W S, S W, −W)` of the Bargmann kernels, `S = (2Ω₂)^{1/2}`.
fn bargmann_blocks(omega: &SiegelPoint, w: &CMat) -> (CMat, CMat, CMat) {
    let n = omega.dim();
    let s = complexify(&spd_sqrt(&(omega.im() * 2.0)));
    (CMat::identity(n, n) - &s * w * &s, &s * w, -w)
}

/// `log((det 2Ω₂)^{1/4})` and `(det Ω/i)^{1/2}` on the principal branch.
fn bargmann_prefactor(omega: &SiegelPoint) -> Result<(f64, Complex64)> {
    let d = (omega.im() * 2.0).determinant().ln() * 0.25;
    let root = sqrt_det_accretive(&(omega.as_complex() * (-I)))?;
    Ok((d, root))
}

/// Closed-form `B̂_{ΩL₋}`:
/// `φ(x)e^{(i/2)xᵀy}⊗√dⁿx ↦ (det 2Ω₂)^{1/4}/conj(det Ω/i)^{1/2} e^{−|z'|²/2}
/// ∫ φ(x) exp(½(z', x)ᵀ(I − SW̄S, SW̄; W̄S, −W̄)(z', x)) |dⁿx|/(2π)^{n/2} ⊗ √dⁿz'`
/// with `W̄ = conj(Ω/i)⁻¹`.
pub fn segal_bargmann(psi: &CorrectedBoundarySection, omega: &SiegelPoint) -> Result<CorrectedSection> {
    let n = psi.dim();
    let phi = profile_on_minus(psi)?;
    let w = crate::linalg::cinverse(&(omega.as_complex() * (-I)).map(|z| z.conj()), "Ω/i")?;
    let (b11, b12, b22) = bargmann_blocks(omega, &w);
    let (log_d, root) = bargmann_prefactor(omega)?;
    // variables [x; z']
    let mut q = CMat::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(&(&phi.form.q + b22));
    q.view_mut((n, 0), (n, n)).copy_from(&b12);
    q.view_mut((0, n), (n, n)).copy_from(&b12.transpose());
    q.view_mut((n, n), (n, n)).copy_from(&b11);
    let mut p = CVec::zeros(2 * n);
    p.rows_mut(0, n).copy_from(&phi.form.p);
    let joint = QuadExp::new(q, p, phi.form.s + log_d - root.conj().ln());
    kahler_output(joint, phi.poly.as_ref(), n, omega)
}

fn kahler_output(joint: QuadExp, poly: Option<&FockPoly>, d: usize, omega: &SiegelPoint) -> Result<CorrectedSection> {
    let n = omega.dim();
    let (out, dir, coeffs) = match poly {
        None => (joint.integrate_leading(d)?, unit(n), vec![c(1.0, 0.0)]),
        Some(poly) => {
            let mut l = CVec::zeros(joint.dim());
            l.rows_mut(0, poly.l.len()).copy_from(&poly.l);
            let (out, fp) = joint.integrate_leading_poly(d, &FockPoly { l, coeffs: poly.coeffs.clone() })?;
            if fp.l.norm() == 0.0 {
                (out, unit(n), vec![fp.coeffs[0]])
            } else {
                (out, fp.l, fp.coeffs)
            }
        }
    };
    let base = crate::sections::GaussianSection::new(omega.clone(), out.q, out.p, out.s)?;
    CorrectedSection::new(PolyFockSection::new(base, dir, coeffs)?, HalfFormFrame::kahler(omega))
}

fn unit(n: usize) -> CVec {
    let mut d = CVec::zeros(n);
    d[0] = c(1.0, 0.0);
    d
}

/// Closed-form `B̂⁻¹_{ΩL₋}`:
/// `φ(z)e^{−|z|²/2}⊗√dⁿz ↦ (det 2Ω₂)^{1/4}/(det Ω/i)^{1/2} e^{(i/2)x'ᵀy'}
/// ∫ φ(z) e^{−|z|²} exp(½(z̄, x')ᵀ(I − SWS, SW; WS, −W)(z̄, x')) ε ⊗ √dⁿx'`
/// with `W = (Ω/i)⁻¹`.
pub fn segal_bargmann_inverse(psi: &CorrectedSection) -> Result<CorrectedBoundarySection> {
    let omega = psi.frame().clone();
    let n = omega.dim();
    let d = 2 * n;
    let f = psi.folded().to_vfunc();
    let w = crate::linalg::cinverse(&(omega.as_complex() * (-I)), "Ω/i")?;
    let (b11, b12, b22) = bargmann_blocks(&omega, &w);
    let (log_d, root) = bargmann_prefactor(&omega)?;
    let kbar = omega.z_matrix().map(|z| z.conj());
    let g = complexify(&omega.z_metric());
    // variables [v; x']
    let mut q = CMat::zeros(d + n, d + n);
    q.view_mut((0, 0), (d, d)).copy_from(&(&f.form.q - g + kbar.transpose() * &b11 * &kbar));
    let cross = b12.transpose() * &kbar;
    q.view_mut((d, 0), (n, d)).copy_from(&cross);
    q.view_mut((0, d), (d, n)).copy_from(&cross.transpose());
    q.view_mut((d, d), (n, n)).copy_from(&b22);
    let mut p = CVec::zeros(d + n);
    p.rows_mut(0, d).copy_from(&f.form.p);
    let joint = QuadExp::new(q, p, f.form.s + log_d - root.ln());
    let profile = match &f.poly {
        None => VFunc::gaussian(joint.integrate_leading(d)?),
        Some(poly) => {
            let mut l = CVec::zeros(d + n);
            l.rows_mut(0, d).copy_from(&poly.l);
            let (form, fp) = joint.integrate_leading_poly(d, &FockPoly { l, coeffs: poly.coeffs.clone() })?;
            VFunc { form, poly: Some(fp) }
        }
    };
    let section = LagrangianSection::new(LagrangianFrame::minus(n), profile)?;
    CorrectedBoundarySection::new(section, HalfFormFrame::real(RealHalfForm::dx(n)))
}

/// Closed-form `F̂_{L₊L₋}`:
/// `φ(x)e^{(i/2)xᵀy}⊗√dⁿx ↦ i^{n/2} φ̃(y') e^{−(i/2)x'ᵀy'}⊗√dⁿy'` with
/// `φ̃(y') = ∫ φ(x) e^{ixᵀy'} |dⁿx|/(2π)^{n/2}`.
pub fn fourier(psi: &CorrectedBoundarySection) -> Result<CorrectedBoundarySection> {
    let n = psi.dim();
    let phi = profile_on_minus(psi)?;
    let mut q = CMat::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(&phi.form.q);
    for k in 0..n {
        q[(k, n + k)] = I;
        q[(n + k, k)] = I;
    }
    let mut p = CVec::zeros(2 * n);
    p.rows_mut(0, n).copy_from(&phi.form.p);
    let log_phase = I * std::f64::consts::FRAC_PI_4 * n as f64;
    let joint = QuadExp::new(q, p, phi.form.s + log_phase);
    let profile = match &phi.poly {
        None => VFunc::gaussian(joint.integrate_leading(n)?),
        Some(poly) => {
            let mut l = CVec::zeros(2 * n);
            l.rows_mut(0, n).copy_from(&poly.l);
            let (form, fp) = joint.integrate_leading_poly(n, &FockPoly { l, coeffs: poly.coeffs.clone() })?;
            VFunc { form, poly: Some(fp) }
        }
    };
    let section = LagrangianSection::new(LagrangianFrame::plus(n), profile)?;
    CorrectedBoundarySection::new(section, HalfFormFrame::real(RealHalfForm::dy(n)))
}

/// `m·√ν` on `g·L`.
pub fn act_on_real_halfform(m: &MetaplecticElement, nu: &RealHalfForm) -> Result<RealHalfForm> {
    let g = m.symplectic();
    let n = g.dim();
    let i_n = SiegelPoint::i_identity(n);
    let back = g.inverse().act_on_siegel(&i_n)?;
    let mu = m.inverse()?.phase_at(&i_n)?;
    Ok(RealHalfForm {
        frame: nu.frame.transformed_by(g)?,
        reference: mu.conj() * kahler_real_pairing(&back, nu)?,
    })
}

/// `m·(ψ⊗√ν) = (ψ∘g⁻¹)⊗m·√ν`.
pub fn act_on_boundary(m: &MetaplecticElement, psi: &CorrectedBoundarySection) -> Result<CorrectedBoundarySection> {
    let g = m.symplectic();
    let section = LagrangianSection::new(psi.section.frame.transformed_by(g)?, psi.section.profile.clone())?;
    let nu = act_on_real_halfform(m, psi.real_halfform())?;
    let halfform = HalfFormFrame::real(nu).with_phase(psi.halfform.phase)?;
    CorrectedBoundarySection::new(section, halfform)
}

/// `Û_{Ω'Ω}` on a corrected Kähler section.
pub fn transport_corrected_section(psi: &CorrectedSection, omega_p: &SiegelPoint) -> Result<CorrectedSection> {
    let section = transport_polyfock(&psi.section, omega_p)?;
    let phase = transport_halfform_phase(psi.frame(), omega_p)?;
    let halfform = HalfFormFrame::kahler(omega_p).with_phase(psi.halfform.phase * phase)?;
    CorrectedSection::new(section, halfform)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 41, half_width: 3.0 }
    }
}

impl GridSpec {
    /// Points `(x₁, y₁)` of the square grid, other coordinates zero.
    pub fn points_in(&self, n: usize) -> Vec<RVec> {
        let step = 2.0 * self.half_width / (self.points - 1) as f64;
        let mut out = Vec::with_capacity(self.points * self.points);
        for i in 0..self.points {
            for j in 0..self.points {
                let mut v = RVec::zeros(2 * n);
                v[0] = -self.half_width + step * i as f64;
                v[n] = -self.half_width + step * j as f64;
                out.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Minus,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub t: f64,
    pub sup_error: f64,
    /// `(det √2 e^{∓Λt})^{1/2}`, the scalar carried off by `√dⁿz'_t`.
    pub absorbed_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub side: BoundarySide,
    pub rows: Vec<LimitRow>,
    pub grid_spec: GridSpec,
    /// Least-squares slope of `ln sup_error` against `t`.
    pub slope: f64,
    /// `±2 min Λ` from the heat-kernel width `e^{2Λt}`.
    pub predicted_slope: f64,
    /// Errors shrink as `|t|` grows.
    pub monotone: bool,
}

impl LimitReport {
    pub fn slope_within(&self, rel: f64) -> bool {
        (self.slope - self.predicted_slope).abs() <= rel * self.predicted_slope.abs()
    }

    pub fn error_at(&self, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.t == t).map(|r| r.sup_error)
    }
}

fn fit_slope(rows: &[LimitRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.sup_error > 0.0).map(|r| (r.t, r.sup_error.ln())).collect();
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let me = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - me)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    num / den
}

fn limit_report(
    psi: &CorrectedSection,
    gamma: &GeodesicSpec,
    t_list: &[f64],
    side: BoundarySide,
    grid: GridSpec,
) -> Result<LimitReport> {
    let omega = psi.frame();
    if !gamma.start.approx_eq(omega, 1e-9) {
        return Err(Error::FrameMismatch);
    }
    let (minus, plus) = geodesic_boundary_limits(gamma);
    let (Some(l), Some(l_p)) = (minus, plus) else {
        return Err(Error::NoBoundaryLimit);
    };
    let nu = RealHalfForm::principal(l);
    let limit = segal_bargmann_inverse_general(psi, &nu)?;
    let (target, nu_t) = match side {
        BoundarySide::Minus => (limit, nu),
        BoundarySide::Plus => {
            let nu_p = RealHalfForm::principal(l_p);
            (fourier_general(&limit, &nu_p)?, nu_p)
        }
    };
    let n = omega.dim();
    let pts = grid.points_in(n);
    let expect: Vec<Complex64> = pts.iter().map(|v| target.eval_at(v)).collect();
    let anchor = kahler_real_pairing(omega, &nu_t)?;
    let sign = match side {
        BoundarySide::Minus => 1.0,
        BoundarySide::Plus => -1.0,
    };
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let om_t = gamma.eval(t)?;
        let moved = transport_corrected_section(psi, &om_t)?;
        // √dⁿz'_t ≈ κ_t √ν near the boundary
        let kappa = kahler_pairing(omega, &om_t)? / anchor;
        let sec = moved.folded();
        let f = sec.pointwise();
        let sup = pts
            .iter()
            .zip(&expect)
            .map(|(v, e)| (f(v.as_slice()) * kappa - e).norm())
            .fold(0.0, f64::max);
        let absorbed = gamma.rates.iter().map(|l| (2f64.sqrt() * (sign * l * t).exp()).sqrt()).product();
        rows.push(LimitRow { t, sup_error: sup, absorbed_factor: absorbed });
    }
    let mut by_t: Vec<&LimitRow> = rows.iter().collect();
    by_t.sort_by(|a, b| a.t.abs().total_cmp(&b.t.abs()));
    let monotone = by_t.windows(2).all(|w| w[1].sup_error <= w[0].sup_error);
    let lmin = gamma.rates.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LimitReport {
        side,
        slope: fit_slope(&rows),
        predicted_slope: sign * 2.0 * lmin,
        rows,
        grid_spec: grid,
        monotone,
    })
}

/// Sup-grid deviation of `Û_{γ(t)Ω}ψ̂` from `B̂⁻¹_{ΩL}ψ̂`, `L = γ(−∞)`.
pub fn limit_transport_to_bargmann(
    psi: &CorrectedSection,
    gamma: &GeodesicSpec,
    t_list: &[f64],
    grid: GridSpec,
) -> Result<LimitReport> {
    limit_report(psi, gamma, t_list, BoundarySide::Minus, grid)
}

/// Sup-grid deviation of `Û_{γ(t)Ω}ψ̂` from `F̂_{L'L}B̂⁻¹_{ΩL}ψ̂`, `L' = γ(+∞)`.
pub fn limit_transport_to_fourier(
    psi: &CorrectedSection,
    gamma: &GeodesicSpec,
    t_list: &[f64],
    grid: GridSpec,
) -> Result<LimitReport> {
    limit_report(psi, gamma, t_list, BoundarySide::Plus, grid)
}

/// Five Gaussian-polynomial sections on `frame`, principal half-form.
pub fn test_family(frame: &LagrangianFrame) -> Result<Vec<CorrectedBoundarySection>> {
    let n = frame.dim();
    let q = CMat::identity(n, n) * c(-1.0, 0.3);
    let mut p = CVec::zeros(n);
    p[0] = c(0.2, 0.1);
    (0..5)
        .map(|k| {
            let mut coeffs = vec![c(0.0, 0.0); k + 1];
            coeffs[k] = c(1.0, 0.0);
            let profile = VFunc {
                form: QuadExp::new(q.clone(), p.clone(), c(0.0, 0.0)),
                poly: Some(FockPoly { l: unit(n), coeffs }),
            };
            Ok(CorrectedBoundarySection::principal(LagrangianSection::new(frame.clone(), profile)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `B̂_{J'L} = Û_{J'J}∘B̂_{JL}`.
    pub bargmann_transport: f64,
    /// `F̂_{L'L} = B̂⁻¹_{JL'}∘B̂_{JL}`.
    pub fourier_via_kahler: f64,
    /// `F̂_{L''L} = F̂_{L''L'}∘F̂_{L'L}`.
    pub fourier_composition: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.bargmann_transport.max(self.fourier_via_kahler).max(self.fourier_composition)
    }
}

/// Largest relative residual of each identity over the test family on `L`.
pub fn composition_identities_check(
    j: &SiegelPoint,
    j_p: &SiegelPoint,
    l: &LagrangianFrame,
    l_p: &LagrangianFrame,
    l_pp: &LagrangianFrame,
) -> Result<IdentityReport> {
    l.check_transverse(l_p)?;
    l.check_transverse(l_pp)?;
    l_p.check_transverse(l_pp)?;
    let nu_p = RealHalfForm::principal(l_p.clone());
    let nu_pp = RealHalfForm::principal(l_pp.clone());
    let mut report = IdentityReport { bargmann_transport: 0.0, fourier_via_kahler: 0.0, fourier_composition: 0.0 };
    for psi in test_family(l)? {
        let norm = boundary_norm(&psi)?;
        let a = segal_bargmann_general(&psi, j_p)?;
        let b = transport_corrected_section(&segal_bargmann_general(&psi, j)?, j_p)?;
        report.bargmann_transport = report.bargmann_transport.max(corrected_distance(&a, &b, DISTANCE_NODES)? / norm);
        let a = fourier_general(&psi, &nu_p)?;
        let b = fourier_via_kahler(&psi, j, &nu_p)?;
        report.fourier_via_kahler = report.fourier_via_kahler.max(boundary_distance(&a, &b, DISTANCE_NODES)? / norm);
        let direct = fourier_general(&psi, &nu_pp)?;
        let twice = fourier_general(&a, &nu_pp)?;
        report.fourier_composition =
            report.fourier_composition.max(boundary_distance(&direct, &twice, DISTANCE_NODES)? / norm);
    }
    Ok(report)
}
