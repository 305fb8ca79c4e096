//! Parallel transport in the quantum bundle over 𝔥ₙ, with and without the
//! half-form correction.
//!
//! Three independent routes are provided:
//! the closed-form transport of coherent states, the Bogoliubov form
//! `α(J,J')·P_{J'J}` built on the Bergman projection, and numerical
//! integration of the transport equation in a moving Fock basis (n = 1).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{normalized_hermite, FockPoly, QuadExp};
use crate::linalg::{c, cinverse, complexify, sqrt_det_accretive, CMat, CVec, RMat, I};
use crate::quadrature::{quadrature_integrate, QuadratureSpec};
use crate::sections::{
    bergman_project, gaussian_fock_coefficients, kahler_pairing, GaussianSection, HalfFormFrame,
    PolyFockSection, VFunc,
};
use crate::siegel::{complex_structure_of, SiegelPoint};
use crate::sympl::{transform_z_coords, xi_matrix, MetaplecticElement, SymplecticMap};

/// Top fraction of the working basis watched for leakage.
pub const OVERFLOW_FRACTION: f64 = 0.1;
/// Amplitude norm tolerated in that top fraction.
pub const OVERFLOW_TOL: f64 = 1e-6;

/// `(det sech Λt)^{1/2} exp[½(ᾱ,z)ᵀ(tanh Λt, sech Λt; sech Λt, −tanh Λt)(ᾱ,z) − ½|z|²]`
/// in the frame `i e^{2Λt}`.
pub fn transport_coherent_standard(alpha: &CVec, rates: &[f64], t: f64) -> Result<GaussianSection> {
    let n = rates.len();
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.len() });
    }
    let tanh: Vec<f64> = rates.iter().map(|l| (l * t).tanh()).collect();
    let sech: Vec<f64> = rates.iter().map(|l| 1.0 / (l * t).cosh()).collect();
    let abar = alpha.map(|z| z.conj());
    let m = CMat::from_diagonal(&CVec::from_iterator(n, tanh.iter().map(|x| c(-x, 0.0))));
    let b = CVec::from_fn(n, |i, _| abar[i] * sech[i]);
    let log_c: Complex64 = (0..n)
        .map(|i| 0.5 * sech[i].ln() + 0.5 * tanh[i] * abar[i] * abar[i])
        .sum();
    GaussianSection::new(SiegelPoint::from_rates(rates, t), m, b, log_c)
}

/// Blocks of the transported coherent state,
/// `U c_α(z') = exp(½ᾱᵀB₁₁ᾱ + ᾱᵀB₁₂z' + ½z'ᵀB₂₂z' + log_pref − ½|z'|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentKernel {
    pub b11: CMat,
    pub b12: CMat,
    pub b22: CMat,
    pub log_pref: f64,
}

/// With `Ξ = Ξ_{ΩΩ'}`: `B₁₁ = I − Ω₂^{1/2}Ξ⁻¹Ω₂^{1/2}`, `B₁₂ = Ω₂^{1/2}Ξ⁻¹Ω'₂^{1/2}`,
/// `B₂₂ = I − Ω'₂^{1/2}Ξ⁻¹Ω'₂^{1/2}` and prefactor
/// `(det Ω₂)^{1/4}(det Ω'₂)^{1/4}/|det Ξ|^{1/2}`.
pub fn coherent_kernel(omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<CoherentKernel> {
    let n = omega.dim();
    if omega_p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: omega_p.dim() });
    }
    let xi = xi_matrix(omega, omega_p);
    let xinv = cinverse(&xi, "Ξ")?;
    let s = complexify(&omega.im_sqrt());
    let sp = complexify(&omega_p.im_sqrt());
    let id = CMat::identity(n, n);
    let det_xi = xi.clone().determinant();
    let log_pref = 0.25 * omega.im().determinant().ln() + 0.25 * omega_p.im().determinant().ln()
        - 0.5 * det_xi.norm().ln();
    Ok(CoherentKernel {
        b11: &id - &s * &xinv * &s,
        b12: &s * &xinv * &sp,
        b22: &id - &sp * &xinv * &sp,
        log_pref,
    })
}

/// Closed-form parallel transport of `c_α(z_Ω)` to the frame `Ω'`.
pub fn transport_coherent(alpha: &CVec, omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<GaussianSection> {
    let k = coherent_kernel(omega, omega_p)?;
    let abar = alpha.map(|z| z.conj());
    let b = k.b12.transpose() * &abar;
    let log_c = abar.dot(&(&k.b11 * &abar)) * 0.5 + k.log_pref;
    GaussianSection::new(omega_p.clone(), k.b22, b, log_c)
}

/// `α(J,J') = |det Ξ_{Ω'Ω}|^{1/2} / ((det Ω₂)^{1/4}(det Ω'₂)^{1/4})`.
pub fn bogoliubov_scale(omega: &SiegelPoint, omega_p: &SiegelPoint) -> f64 {
    let d = xi_matrix(omega_p, omega).determinant().norm();
    d.sqrt() / (omega.im().determinant() * omega_p.im().determinant()).powf(0.25)
}

/// `det((J + J')/2)^{1/4}`, the same scale from the complex structures.
pub fn bogoliubov_scale_from_j(omega: &SiegelPoint, omega_p: &SiegelPoint) -> f64 {
    let j = complex_structure_of(omega);
    let jp = complex_structure_of(omega_p);
    ((j + jp) * 0.5).determinant().powf(0.25)
}

/// Phase `(det Ξ_{Ω'Ω})^{1/2}/|det Ξ_{Ω'Ω}|^{1/2}` carried by `√dⁿz_{Ω'}`.
///
/// `Ξ_{Ω'Ω}` has positive-definite real part along the whole geodesic, so
/// the principal root on that set is the continued one.
pub fn transport_halfform_phase(omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<Complex64> {
    let root = sqrt_det_accretive(&xi_matrix(omega_p, omega))?;
    Ok(root / root.norm())
}

pub fn transport_halfform(omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<HalfFormFrame> {
    HalfFormFrame::kahler(omega_p).with_phase(transport_halfform_phase(omega, omega_p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `α(J,J')·P_{Ω'}`.
    Bergman,
    /// Coherent-state transport kernel integrated against the input.
    Holomorphic,
}

/// Applies the transport `U_{Ω'Ω}` to a section of `H_Ω` given as a
/// function on `V`.
pub fn transport_kernel_apply(
    f: &VFunc,
    omega: &SiegelPoint,
    omega_p: &SiegelPoint,
    kernel: Kernel,
) -> Result<PolyFockSection> {
    match kernel {
        Kernel::Bergman => {
            let p = bergman_project(f, omega_p)?;
            Ok(p.scale(c(bogoliubov_scale(omega, omega_p), 0.0)))
        }
        Kernel::Holomorphic => holomorphic_kernel_apply(f, omega, omega_p),
    }
}

/// `∫ U c_{z}(z')|_{ᾱ = z̄} · ψ(v) e^{−|z|²/2} ε(v)` with `z = z_Ω(v)`.
fn holomorphic_kernel_apply(f: &VFunc, omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<PolyFockSection> {
    let n = omega.dim();
    let d = 2 * n;
    let k = coherent_kernel(omega, omega_p)?;
    let kbar = omega.z_matrix().map(|z| z.conj());
    let g = complexify(&omega.z_metric());
    let mut q = CMat::zeros(d + n, d + n);
    let qvv = &f.form.q - g + kbar.transpose() * &k.b11 * &kbar;
    q.view_mut((0, 0), (d, d)).copy_from(&qvv);
    let qwv = k.b12.transpose() * &kbar;
    q.view_mut((d, 0), (n, d)).copy_from(&qwv);
    q.view_mut((0, d), (d, n)).copy_from(&qwv.transpose());
    q.view_mut((d, d), (n, n)).copy_from(&k.b22);
    let mut p = CVec::zeros(d + n);
    p.rows_mut(0, d).copy_from(&f.form.p);
    let joint = QuadExp::new(q, p, f.form.s + k.log_pref);
    let (out, dir, coeffs) = match &f.poly {
        None => {
            let mut dir = CVec::zeros(n);
            dir[0] = c(1.0, 0.0);
            (joint.integrate_leading(d)?, dir, vec![c(1.0, 0.0)])
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
    let base = GaussianSection::new(omega_p.clone(), out.q, out.p, out.s)?;
    PolyFockSection::new(base, dir, coeffs)
}

/// Parallel transport of a Gaussian section from its frame to `omega_p`.
pub fn transport_section(psi: &GaussianSection, omega_p: &SiegelPoint) -> Result<GaussianSection> {
    holomorphic_kernel_apply(&psi.to_vfunc(), &psi.frame, omega_p)?
        .into_gaussian()
        .ok_or_else(|| Error::InvalidInput("transported section is not a pure Gaussian".into()))
}

pub fn transport_polyfock(psi: &PolyFockSection, omega_p: &SiegelPoint) -> Result<PolyFockSection> {
    holomorphic_kernel_apply(&psi.to_vfunc(), psi.frame(), omega_p)
}

/// Transport of `Σ fₖ|k⟩` (n = 1) by expanding the transported coherent
/// state in `ᾱ`: `U|k⟩ = √k!·[ᾱᵏ] U c_α = pref·e^{½B₂₂z'²}·Ĥₖ(B₁₂z'; B₁₁)·e^{−|z'|²/2}`.
pub fn transport_fock_generating(
    amplitudes: &[Complex64],
    omega: &SiegelPoint,
    omega_p: &SiegelPoint,
) -> Result<PolyFockSection> {
    if omega.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: omega.dim() });
    }
    let k = coherent_kernel(omega, omega_p)?;
    let kmax = amplitudes.len().saturating_sub(1);
    let family = normalized_hermite(kmax, c(0.0, 0.0), k.b11[(0, 0)]);
    let mut coeffs = vec![c(0.0, 0.0); kmax + 1];
    for (fk, hk) in amplitudes.iter().zip(&family) {
        for (j, x) in hk.iter().enumerate() {
            coeffs[j] += fk * x;
        }
    }
    let base = GaussianSection::new(omega_p.clone(), k.b22, CVec::zeros(1), c(k.log_pref, 0.0))?;
    PolyFockSection::new(base, CVec::from_element(1, k.b12[(0, 0)]), coeffs)
}

/// Result of a half-form corrected transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub section: GaussianSection,
    pub halfform: HalfFormFrame,
    /// `α(J,J')`.
    pub scale_used: f64,
    /// Phase added to the half-form by this transport.
    pub phase_used: Complex64,
    /// Largest parameter difference between `U ψ ⊗ phase` and `⟨√dz', √dz⟩ P ψ`.
    pub consistency: f64,
}

impl TransportResult {
    /// The section with the half-form phase folded in, on the unit frame.
    pub fn folded(&self) -> GaussianSection {
        self.section.scale_log(self.halfform.phase.ln())
    }
}

fn parameter_distance(a: &GaussianSection, b: &GaussianSection) -> f64 {
    let dm = (&a.m - &b.m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let db = (&a.b - &b.b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dc = (a.c - b.c).exp_m1_norm();
    dm.max(db).max(dc)
}

trait ExpM1Norm {
    fn exp_m1_norm(self) -> f64;
}

impl ExpM1Norm for Complex64 {
    /// `|e^z − 1|`, so that constants are compared modulo `2πi`.
    fn exp_m1_norm(self) -> f64 {
        let re = self.re.exp_m1();
        let (s, co) = self.im.sin_cos();
        let real = re * co - 2.0 * (self.im / 2.0).sin().powi(2);
        let imag = (re + 1.0) * s;
        real.hypot(imag)
    }
}

/// `Û_{Ω'Ω}(ψ ⊗ phase·√dⁿz_Ω)`, computed as closed-form transport tensored
/// with the transported half-form and cross-checked against
/// `⟨√dⁿz_{Ω'}, √dⁿz_Ω⟩ · P_{Ω'}ψ`.
pub fn transport_corrected(
    psi: &GaussianSection,
    input_phase: Complex64,
    omega_p: &SiegelPoint,
) -> Result<TransportResult> {
    let omega = &psi.frame;
    let section = transport_section(psi, omega_p)?;
    let phase = transport_halfform_phase(omega, omega_p)?;
    let halfform = HalfFormFrame::kahler(omega_p).with_phase(input_phase * phase)?;
    let pairing = kahler_pairing(omega_p, omega)?;
    let projected = bergman_project(&psi.to_vfunc(), omega_p)?
        .scale(pairing * input_phase)
        .into_gaussian()
        .ok_or_else(|| Error::InvalidInput("projection is not a pure Gaussian".into()))?;
    let consistency = parameter_distance(&section.scale_log((input_phase * phase).ln()), &projected);
    Ok(TransportResult {
        section,
        halfform,
        scale_used: bogoliubov_scale(omega, omega_p),
        phase_used: phase,
        consistency,
    })
}

/// Transport around the triangle `Ω → Ω_b → Ω_c → Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Holonomy {
    /// Returned section divided by the input.
    pub scalar: Complex64,
    /// Largest change in `M` and `b`; zero when the holonomy is a scalar.
    pub shape_residual: f64,
}

pub fn triangle_holonomy(
    psi: &GaussianSection,
    omega_b: &SiegelPoint,
    omega_c: &SiegelPoint,
    corrected: bool,
) -> Result<Holonomy> {
    let omega = &psi.frame;
    let mut cur = psi.clone();
    let mut phase = c(1.0, 0.0);
    for next in [omega_b, omega_c, omega] {
        if corrected {
            phase *= transport_halfform_phase(&cur.frame, next)?;
        }
        cur = transport_section(&cur, next)?;
    }
    let dm = (&cur.m - &psi.m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let db = (&cur.b - &psi.b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Holonomy { scalar: (cur.c - psi.c).exp() * phase, shape_residual: dm.max(db) })
}

/// `(g·ψ)(v) = ψ(g⁻¹v)`, re-expressed in the frame `g·Ω`.
pub fn act_on_section(g: &SymplecticMap, psi: &GaussianSection) -> Result<GaussianSection> {
    let t = transform_z_coords(g, &psi.frame)?;
    let frame = g.act_on_siegel(&psi.frame)?;
    GaussianSection::new(frame, t.transpose() * &psi.m * &t, t.transpose() * &psi.b, psi.c)
}

/// `m·(ψ ⊗ phase·√dⁿz_Ω) = g·ψ ⊗ phase·μ_m(Ω)·√dⁿz_{gΩ}`.
pub fn act_on_corrected(
    m: &MetaplecticElement,
    psi: &GaussianSection,
    phase: Complex64,
) -> Result<(GaussianSection, Complex64)> {
    let mu = m.phase_at(&psi.frame)?;
    Ok((act_on_section(m.symplectic(), psi)?, phase * mu))
}

/// `‖a − b‖` by quadrature of the pointwise difference, which avoids the
/// cancellation in `‖a‖² + ‖b‖² − 2 Re⟨a, b⟩`.
pub fn section_distance(a: &GaussianSection, b: &GaussianSection, nodes: usize) -> Result<f64> {
    let fa = a.pointwise();
    let fb = b.pointwise();
    let qa = a.to_vfunc().form.q;
    let width = -(qa.map(|z| z.re)) * 2.0;
    let width = (&width + width.transpose()) * 0.5;
    let spec = QuadratureSpec { nodes, tolerance: 1.0, check_refinement: false };
    let v = quadrature_integrate(|v: &[f64]| c((fa(v) - fb(v)).norm_sqr(), 0.0), &width, &spec)?;
    Ok(v.re.max(0.0).sqrt())
}

/// `‖U c_α − α(J,J')·P c_α‖ / ‖c_α‖`.
pub fn transport_equals_scaled_projection_check(
    alpha: &CVec,
    omega: &SiegelPoint,
    omega_p: &SiegelPoint,
    nodes: usize,
) -> Result<f64> {
    let coh = crate::sections::coherent_state(alpha, omega);
    let u = transport_coherent(alpha, omega, omega_p)?;
    let p = transport_kernel_apply(&coh.to_vfunc(), omega, omega_p, Kernel::Bergman)?
        .into_gaussian()
        .ok_or_else(|| Error::InvalidInput("projection is not a pure Gaussian".into()))?;
    Ok(section_distance(&u, &p, nodes)? / coh.norm()?)
}

/// `A^H = A_τ dτ + A_τ̄ dτ̄` on the truncated Fock basis (n = 1):
/// `A_{kl} = (i/4τ₂)[(kδ_{kl} − √(k(k−1))δ_{k,l+2})dτ + (lδ_{kl} − √(l(l−1))δ_{k+2,l})dτ̄]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockConnection {
    pub dtau: CMat,
    pub dtaubar: CMat,
}

impl FockConnection {
    /// `A(δ) = A_τ δ + A_τ̄ δ̄`.
    pub fn along(&self, delta: Complex64) -> CMat {
        &self.dtau * delta + &self.dtaubar * delta.conj()
    }
}

pub fn fock_connection_matrix(tau: Complex64, n_trunc: usize) -> Result<FockConnection> {
    if tau.im <= 0.0 {
        return Err(Error::InvalidSiegelPoint(format!("Im τ = {} is not positive", tau.im)));
    }
    let pre = I / (4.0 * tau.im);
    let mut dtau = CMat::zeros(n_trunc, n_trunc);
    let mut dtaubar = CMat::zeros(n_trunc, n_trunc);
    for k in 0..n_trunc {
        dtau[(k, k)] = pre * k as f64;
        dtaubar[(k, k)] = pre * k as f64;
        if k >= 2 {
            let s = ((k * (k - 1)) as f64).sqrt();
            dtau[(k, k - 2)] = -pre * s;
            dtaubar[(k - 2, k)] = -pre * s;
        }
    }
    Ok(FockConnection { dtau, dtaubar })
}

/// The connection at a base point. Along `δΩ` the covariant derivative is
/// `δ + ᵀ∇_z C ∇_z` with `C = −(i/4) Ω₂^{−1/2} δΩ̄ Ω₂^{−1/2}`, normalized so
/// that along `i e^{2Λt}` parallel transport is `∂_t ψ = ½ ᵀ∇ Λ ∇ ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionForm {
    pub base: SiegelPoint,
}

impl ConnectionForm {
    pub fn new(base: SiegelPoint) -> Self {
        ConnectionForm { base }
    }

    /// `C(δΩ)`, symmetric since `δΩ` is.
    pub fn coefficient(&self, delta: &CMat) -> Result<CMat> {
        let n = self.base.dim();
        if delta.nrows() != n || delta.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: delta.nrows() });
        }
        let s = complexify(&self.base.im_inv_sqrt());
        Ok(&s * delta.conjugate() * &s * (-I * 0.25))
    }

    /// `A^H(δτ)` on the first `n_trunc` Fock states (n = 1).
    pub fn fock_matrix(&self, delta: Complex64, n_trunc: usize) -> Result<CMat> {
        if self.base.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.base.dim() });
        }
        Ok(fock_connection_matrix(self.base.scalar(), n_trunc)?.along(delta))
    }

    /// `max |A + A†|` of the Fock matrix; zero for a unitary connection.
    pub fn skew_residual(&self, delta: Complex64, n_trunc: usize) -> Result<f64> {
        let a = self.fock_matrix(delta, n_trunc)?;
        Ok((&a + a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// The `dτ∧dτ̄` coefficient of `δA + A∧A`, with finite differences of step
/// `h` in `τ₁` and `τ₂`.
pub fn fock_curvature_fd(tau: Complex64, n_trunc: usize, h: f64) -> Result<CMat> {
    let at = |z: Complex64| fock_connection_matrix(z, n_trunc);
    let a = at(tau)?;
    let d1 = |f: &dyn Fn(&FockConnection) -> CMat| -> Result<(CMat, CMat)> {
        // five-point stencil, error O(h⁴)
        let diff = |dir: Complex64| -> Result<CMat> {
            let p1 = f(&at(tau + dir * h)?);
            let m1 = f(&at(tau - dir * h)?);
            let p2 = f(&at(tau + dir * (2.0 * h))?);
            let m2 = f(&at(tau - dir * (2.0 * h))?);
            Ok(((p1 - m1) * c(8.0, 0.0) - (p2 - m2)) / c(12.0 * h, 0.0))
        };
        Ok((diff(c(1.0, 0.0))?, diff(c(0.0, 1.0))?))
    };
    // ∂_τ = ½(∂₁ − i∂₂), ∂_τ̄ = ½(∂₁ + i∂₂)
    let (bx, by) = d1(&|a: &FockConnection| a.dtaubar.clone())?;
    let d_tau_of_bar = (bx - by * I) * c(0.5, 0.0);
    let (ax, ay) = d1(&|a: &FockConnection| a.dtau.clone())?;
    let d_bar_of_tau = (ax + ay * I) * c(0.5, 0.0);
    let comm = &a.dtau * &a.dtaubar - &a.dtaubar * &a.dtau;
    Ok(d_tau_of_bar - d_bar_of_tau + comm)
}

/// `ȧ = −A(τ̇) a`, applied without forming the matrix.
fn connection_rhs(tau: Complex64, dtau: Complex64, a: &[Complex64], out: &mut [Complex64]) {
    let n = a.len();
    let pre = I / (4.0 * tau.im);
    let u = dtau;
    let ub = dtau.conj();
    for k in 0..n {
        let kf = k as f64;
        let mut v = a[k] * kf * (u + ub);
        if k >= 2 {
            v -= a[k - 2] * ((k * (k - 1)) as f64).sqrt() * u;
        }
        if k + 2 < n {
            v -= a[k + 2] * (((k + 1) * (k + 2)) as f64).sqrt() * ub;
        }
        out[k] = -pre * v;
    }
}

/// Classical RK4 for the transport equation in the moving Fock basis along
/// a path `t ↦ (τ(t), τ̇(t))`, with the connection re-evaluated at every stage.
///
/// `progress(step, steps)` is called after each step. Fails with
/// `TruncationOverflow` if the amplitude in the top tenth of the basis
/// exceeds `OVERFLOW_TOL` at any step.
pub fn transport_ode_path(
    a0: &[Complex64],
    path: impl Fn(f64) -> (Complex64, Complex64),
    t0: f64,
    t1: f64,
    steps: usize,
    mut progress: impl FnMut(usize, usize),
) -> Result<Vec<Complex64>> {
    let n = a0.len();
    let top = ((n as f64) * (1.0 - OVERFLOW_FRACTION)).floor() as usize;
    let h = (t1 - t0) / steps as f64;
    let mut a = a0.to_vec();
    let mut k1 = vec![c(0.0, 0.0); n];
    let mut k2 = vec![c(0.0, 0.0); n];
    let mut k3 = vec![c(0.0, 0.0); n];
    let mut k4 = vec![c(0.0, 0.0); n];
    let mut tmp = vec![c(0.0, 0.0); n];
    for step in 0..steps {
        let t = t0 + h * step as f64;
        let (p0, d0) = path(t);
        let (pm, dm) = path(t + 0.5 * h);
        let (p1, d1) = path(t + h);
        connection_rhs(p0, d0, &a, &mut k1);
        for i in 0..n {
            tmp[i] = a[i] + k1[i] * (0.5 * h);
        }
        connection_rhs(pm, dm, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = a[i] + k2[i] * (0.5 * h);
        }
        connection_rhs(pm, dm, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = a[i] + k3[i] * h;
        }
        connection_rhs(p1, d1, &tmp, &mut k4);
        for i in 0..n {
            a[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        let leak: f64 = a[top..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if leak > OVERFLOW_TOL {
            return Err(Error::TruncationOverflow(leak));
        }
        progress(step + 1, steps);
    }
    Ok(a)
}

/// Transport along `γ_λ(t) = i e^{2λt}` from `t = 0` to `t_end` of a state
/// given by Fock amplitudes at `τ = i`, returning amplitudes in the frame
/// `γ_λ(t_end)`.
pub fn transport_ode(
    a0: &[Complex64],
    rate: f64,
    t_end: f64,
    steps: usize,
    progress: impl FnMut(usize, usize),
) -> Result<Vec<Complex64>> {
    let path = |t: f64| {
        let e = (2.0 * rate * t).exp();
        (c(0.0, e), c(0.0, 2.0 * rate * e))
    };
    transport_ode_path(a0, path, 0.0, t_end, steps, progress)
}

/// `transport_ode` on a section at `iI` (n = 1): returns the section at
/// `i e^{2λ t_end}` as a polynomial in `z` times the vacuum, truncated to the
/// first `n_work` Fock states.
pub fn transport_ode_section(
    psi0: &PolyFockSection,
    rate: f64,
    t_end: f64,
    steps: usize,
    n_work: usize,
) -> Result<PolyFockSection> {
    if !psi0.frame().approx_eq(&SiegelPoint::i_identity(1), 1e-12) {
        return Err(Error::InvalidInput("the ODE starts from the frame i".into()));
    }
    let a0 = section_amplitudes(psi0, n_work)?;
    let a = transport_ode(&a0, rate, t_end, steps, |_, _| {})?;
    let frame = SiegelPoint::from_rates(&[rate], t_end);
    PolyFockSection::new(GaussianSection::vacuum(&frame), CVec::from_element(1, c(1.0, 0.0)), a)
}

/// Fock amplitudes of a section in its own frame, padded to `n_work`.
pub fn section_amplitudes(psi: &PolyFockSection, n_work: usize) -> Result<Vec<Complex64>> {
    crate::sections::fock_coefficients(psi, n_work)
}

/// Amplitudes of a Gaussian section in its own frame (n = 1).
pub fn gaussian_amplitudes(psi: &GaussianSection, n_work: usize) -> Vec<Complex64> {
    gaussian_fock_coefficients(psi.m[(0, 0)], psi.b[0], psi.c, n_work)
}

/// Relative truncated-norm error over the first `n_trunc` amplitudes.
pub fn truncated_relative_error(approx: &[Complex64], exact: &[Complex64], n_trunc: usize) -> f64 {
    let num: f64 = (0..n_trunc).map(|k| (approx[k] - exact[k]).norm_sqr()).sum();
    let den: f64 = (0..n_trunc).map(|k| exact[k].norm_sqr()).sum();
    (num / den).sqrt()
}

/// Coefficients `(cosh t, sinh t; sinh t, cosh t)` expressing the transported
/// `a₀, a₀†` through `a_t, a_t†`.
pub fn bogoliubov_operator_deformation(t: f64) -> RMat {
    RMat::from_row_slice(2, 2, &[t.cosh(), t.sinh(), t.sinh(), t.cosh()])
}

/// Truncated annihilation operator, `a|k⟩ = √k|k−1⟩`.
pub fn annihilation_matrix(n_trunc: usize) -> CMat {
    let mut a = CMat::zeros(n_trunc, n_trunc);
    for k in 1..n_trunc {
        a[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
    }
    a
}
