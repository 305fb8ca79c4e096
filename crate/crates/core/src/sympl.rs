//! The real symplectic group Sp(2n, ℝ), its action on the Siegel upper
//! half-space and on holomorphic coordinates, and branch bookkeeping for the
//! metaplectic double cover.
//!
//! Phase-space vectors are ordered `(x, y)` and the symplectic form is
//! `ω = dxᵀ ∧ dy`. A group element is stored in block form `(A, B; C, D)`.

use nalgebra::QR;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    block2, c, cdet, cinverse, complexify, continue_sqrt, from_rows, max_abs_diff,
    max_abs_diff_real, omega_matrix, spd_inv_sqrt, spd_sqrt, to_rows, CMat, RMat, RVec, I,
};
use crate::siegel::SiegelPoint;

/// Residual above which a product is no longer accepted as symplectic.
pub const SP_RELATION_TOL: f64 = 1e-9;
/// Unitarity residual tolerated for the holomorphic coordinate change.
pub const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymplecticRepr", into = "SymplecticRepr")]
pub struct SymplecticMap {
    a: RMat,
    b: RMat,
    c: RMat,
    d: RMat,
}

#[derive(Serialize, Deserialize)]
struct SymplecticRepr {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

impl TryFrom<SymplecticRepr> for SymplecticMap {
    type Error = Error;
    fn try_from(r: SymplecticRepr) -> Result<Self> {
        SymplecticMap::new(from_rows(&r.a)?, from_rows(&r.b)?, from_rows(&r.c)?, from_rows(&r.d)?)
    }
}

impl From<SymplecticMap> for SymplecticRepr {
    fn from(g: SymplecticMap) -> Self {
        SymplecticRepr {
            a: to_rows(&g.a),
            b: to_rows(&g.b),
            c: to_rows(&g.c),
            d: to_rows(&g.d),
        }
    }
}

impl SymplecticMap {
    pub fn new(a: RMat, b: RMat, c: RMat, d: RMat) -> Result<Self> {
        let n = a.nrows();
        for m in [&a, &b, &c, &d] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        let g = SymplecticMap { a, b, c, d };
        let r = g.relation_residual();
        if r > SP_RELATION_TOL {
            return Err(Error::SpRelationViolated(r));
        }
        Ok(g)
    }

    pub fn from_matrix(m: &RMat) -> Result<Self> {
        let n2 = m.nrows();
        if n2 % 2 != 0 || m.ncols() != n2 {
            return Err(Error::InvalidInput("symplectic matrix must be 2n×2n".into()));
        }
        let n = n2 / 2;
        Self::new(
            m.view((0, 0), (n, n)).into_owned(),
            m.view((0, n), (n, n)).into_owned(),
            m.view((n, 0), (n, n)).into_owned(),
            m.view((n, n), (n, n)).into_owned(),
        )
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMap {
            a: RMat::identity(n, n),
            b: RMat::zeros(n, n),
            c: RMat::zeros(n, n),
            d: RMat::identity(n, n),
        }
    }

    /// `(0, -I; I, 0)`: fixes `iI` and swaps the polarizations `{x=0}` and `{y=0}`.
    pub fn rotation_quarter(n: usize) -> Self {
        SymplecticMap {
            a: RMat::zeros(n, n),
            b: -RMat::identity(n, n),
            c: RMat::identity(n, n),
            d: RMat::zeros(n, n),
        }
    }

    /// `diag(e^s, e^{-s})` acting on `(x, y)`.
    pub fn squeeze(s: &[f64]) -> Self {
        let n = s.len();
        let e = RVec::from_iterator(n, s.iter().map(|x| x.exp()));
        SymplecticMap {
            a: RMat::from_diagonal(&e),
            b: RMat::zeros(n, n),
            c: RMat::zeros(n, n),
            d: RMat::from_diagonal(&e.map(|x| 1.0 / x)),
        }
    }

    /// `(I, S; 0, I)` for symmetric `S`: translation `Ω ↦ Ω + S`.
    pub fn shear_upper(s: &RMat) -> Result<Self> {
        let n = s.nrows();
        Self::new(RMat::identity(n, n), s.clone(), RMat::zeros(n, n), RMat::identity(n, n))
    }

    /// `(I, 0; S, I)` for symmetric `S`: fixes `{x=0}` pointwise.
    pub fn shear_lower(s: &RMat) -> Result<Self> {
        let n = s.nrows();
        Self::new(RMat::identity(n, n), RMat::zeros(n, n), s.clone(), RMat::identity(n, n))
    }

    /// Orthogonal-symplectic element `(X, -Y; Y, X)` built from a unitary
    /// `U = X - iY`; it fixes `iI` and acts on the Cayley disk by
    /// `W ↦ U W Uᵀ`.
    pub fn from_unitary(u: &CMat) -> Result<Self> {
        let x = u.map(|z| z.re);
        let y = u.map(|z| -z.im);
        Self::new(x.clone(), -&y, y, x)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &RMat {
        &self.a
    }
    pub fn b(&self) -> &RMat {
        &self.b
    }
    pub fn c(&self) -> &RMat {
        &self.c
    }
    pub fn d(&self) -> &RMat {
        &self.d
    }

    pub fn to_matrix(&self) -> RMat {
        block2(&self.a, &self.b, &self.c, &self.d)
    }

    /// Largest violation of `AᵀC = CᵀA`, `BᵀD = DᵀB`, `AᵀD − CᵀB = I`.
    pub fn relation_residual(&self) -> f64 {
        let n = self.dim();
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let r1 = max_abs_diff_real(&(a.transpose() * c), &(c.transpose() * a));
        let r2 = max_abs_diff_real(&(b.transpose() * d), &(d.transpose() * b));
        let r3 = max_abs_diff_real(
            &(a.transpose() * d - c.transpose() * b),
            &RMat::identity(n, n),
        );
        r1.max(r2).max(r3)
    }

    /// Matrix product `self ∘ other`, re-validated.
    pub fn compose(&self, other: &SymplecticMap) -> Result<SymplecticMap> {
        SymplecticMap::from_matrix(&(self.to_matrix() * other.to_matrix()))
    }

    /// Exact inverse `(Dᵀ, −Bᵀ; −Cᵀ, Aᵀ)`.
    pub fn inverse(&self) -> SymplecticMap {
        SymplecticMap {
            a: self.d.transpose(),
            b: -self.b.transpose(),
            c: -self.c.transpose(),
            d: self.a.transpose(),
        }
    }

    pub fn apply(&self, v: &RVec) -> RVec {
        self.to_matrix() * v
    }

    /// `CΩ + D`.
    pub fn automorphy_factor(&self, omega: &SiegelPoint) -> CMat {
        complexify(&self.c) * omega.as_complex() + complexify(&self.d)
    }

    /// Fractional linear action `(AΩ + B)(CΩ + D)⁻¹`.
    pub fn act_on_siegel(&self, omega: &SiegelPoint) -> Result<SiegelPoint> {
        let num = complexify(&self.a) * omega.as_complex() + complexify(&self.b);
        let den = cinverse(&self.automorphy_factor(omega), "CΩ+D")?;
        SiegelPoint::from_complex(&(num * den))
    }

    /// `det conj(CΩ+D) / |det(CΩ+D)|`, the squared half-form phase.
    pub fn halfform_phase_squared(&self, omega: &SiegelPoint) -> Complex64 {
        let det = cdet(&self.automorphy_factor(omega));
        det.conj() / det.norm()
    }
}

/// `Ξ_{ΩΩ'} = (Ω − Ω̄')/(2i)`.
pub fn xi_matrix(omega: &SiegelPoint, omega_p: &SiegelPoint) -> CMat {
    (omega.as_complex() - omega_p.as_complex().map(|z| z.conj())) * (-0.5 * I)
}

/// Residuals of the transformation identities for `Ω = g·Ω₀`, `Ω' = g·Ω'₀`,
/// each relative to the size of its sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiIdentityResiduals {
    /// `Ω − Ω̄' = conj(CΩ'₀+D)⁻ᵀ(Ω₀ − Ω̄'₀)(CΩ₀+D)⁻¹`.
    pub difference: f64,
    /// `Im Ω = conj(CΩ₀+D)⁻ᵀ Im Ω₀ (CΩ₀+D)⁻¹`.
    pub imaginary: f64,
    /// `(Ω₂⁻¹ − Ξ⁻¹)Ω₂ = (Ω−Ω̄')⁻¹(Ω̄−Ω̄') = (CΩ₀+D)(Ω₀−Ω̄'₀)⁻¹(Ω̄₀−Ω̄'₀)conj(CΩ₀+D)⁻¹`.
    pub left: f64,
    /// `Ω'₂(Ω'₂⁻¹ − Ξ⁻¹) = (Ω−Ω')(Ω−Ω̄')⁻¹ = (CΩ'₀+D)⁻ᵀ(Ω₀−Ω'₀)(Ω₀−Ω̄'₀)⁻¹conj(CΩ'₀+D)ᵀ`.
    pub right: f64,
}

impl XiIdentityResiduals {
    pub fn max(&self) -> f64 {
        self.difference.max(self.imaginary).max(self.left).max(self.right)
    }
}

fn relative(sides: &[&CMat]) -> f64 {
    let scale = sides.iter().map(|m| crate::linalg::max_abs(m)).fold(1e-300, f64::max);
    sides.windows(2).map(|w| max_abs_diff(w[0], w[1])).fold(0.0, f64::max) / scale
}

pub fn xi_identity_residuals(
    g: &SymplecticMap,
    omega0: &SiegelPoint,
    omega0_p: &SiegelPoint,
) -> Result<XiIdentityResiduals> {
    let om = g.act_on_siegel(omega0)?.as_complex();
    let omp = g.act_on_siegel(omega0_p)?.as_complex();
    let o0 = omega0.as_complex();
    let o0p = omega0_p.as_complex();
    let conj = |m: &CMat| m.map(|z| z.conj());
    let f = g.automorphy_factor(omega0);
    let fp = g.automorphy_factor(omega0_p);
    let finv = cinverse(&f, "CΩ₀+D")?;
    let fp_inv_t = cinverse(&fp, "CΩ'₀+D")?.transpose();

    let diff = &om - conj(&omp);
    let diff0 = &o0 - conj(&o0p);
    let rhs = conj(&fp_inv_t) * &diff0 * &finv;
    let difference = relative(&[&diff, &rhs]);

    let im = om.map(|z| c(z.im, 0.0));
    let im0 = o0.map(|z| c(z.im, 0.0));
    let rhs = conj(&cinverse(&f, "CΩ₀+D")?.transpose()) * im0 * &finv;
    let imaginary = relative(&[&im, &rhs]);

    let om2 = om.map(|z| c(z.im, 0.0));
    let omp2 = omp.map(|z| c(z.im, 0.0));
    let xi_inv = cinverse(&(&diff * (-0.5 * I)), "Ξ")?;
    let diff_inv = cinverse(&diff, "Ω−Ω̄'")?;
    let a = (cinverse(&om2, "Ω₂")? - &xi_inv) * &om2;
    let b = &diff_inv * (conj(&om) - conj(&omp));
    let cc = &f * cinverse(&diff0, "Ω₀−Ω̄'₀")? * (conj(&o0) - conj(&o0p)) * cinverse(&conj(&f), "conj(CΩ₀+D)")?;
    let left = relative(&[&a, &b, &cc]);

    let a = &omp2 * (cinverse(&omp2, "Ω'₂")? - &xi_inv);
    let b = (&om - &omp) * &diff_inv;
    let cc = &fp_inv_t * (&o0 - &o0p) * cinverse(&diff0, "Ω₀−Ω̄'₀")? * conj(&fp).transpose();
    let right = relative(&[&a, &b, &cc]);
    Ok(XiIdentityResiduals { difference, imaginary, left, right })
}

/// Matrix `T` with `z_Ω ∘ g⁻¹ = T · z_{g·Ω}`.
///
/// Both closed forms of the coordinate change are evaluated; they must agree
/// and `T` must be unitary.
pub fn transform_z_coords(g: &SymplecticMap, omega: &SiegelPoint) -> Result<CMat> {
    let image = g.act_on_siegel(omega)?;
    let factor = g.automorphy_factor(omega);
    let im0 = omega.im();
    let im1 = image.im();
    let via_conj = complexify(&spd_inv_sqrt(im0))
        * factor.transpose().map(|z| z.conj())
        * complexify(&spd_sqrt(im1));
    let via_inv = complexify(&spd_sqrt(im0))
        * cinverse(&factor, "CΩ+D")?
        * complexify(&spd_inv_sqrt(im1));
    let n = omega.dim();
    let unitarity = max_abs_diff(&(&via_conj * via_conj.adjoint()), &CMat::identity(n, n));
    let agreement = max_abs_diff(&via_conj, &via_inv);
    let residual = unitarity.max(agreement);
    if residual > UNITARITY_TOL {
        return Err(Error::NonUnitary(residual));
    }
    Ok(via_conj)
}

/// An element of Mp(2n, ℝ): a symplectic map plus the chosen value of
/// `det conj(CΩ+D)^{1/2} / |det(CΩ+D)|^{1/2}` at a reference point. The value
/// anywhere else follows by continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaplecticElement {
    g: SymplecticMap,
    reference: SiegelPoint,
    branch: Complex64,
}

impl MetaplecticElement {
    pub fn identity(n: usize) -> Self {
        MetaplecticElement {
            g: SymplecticMap::identity(n),
            reference: SiegelPoint::i_identity(n),
            branch: c(1.0, 0.0),
        }
    }

    /// Lift with the principal root at `iI`.
    pub fn lift(g: SymplecticMap) -> Self {
        let reference = SiegelPoint::i_identity(g.dim());
        Self::lift_at(g, reference)
    }

    pub fn lift_at(g: SymplecticMap, reference: SiegelPoint) -> Self {
        let branch = g.halfform_phase_squared(&reference).sqrt();
        MetaplecticElement { g, reference, branch }
    }

    /// The other preimage of the same symplectic map.
    pub fn other_lift(&self) -> Self {
        MetaplecticElement {
            g: self.g.clone(),
            reference: self.reference.clone(),
            branch: -self.branch,
        }
    }

    pub fn symplectic(&self) -> &SymplecticMap {
        &self.g
    }

    pub fn reference(&self) -> &SiegelPoint {
        &self.reference
    }

    pub fn branch(&self) -> Complex64 {
        self.branch
    }

    /// Half-form phase of this lift at `omega`, continued along the straight
    /// segment from the reference point (which stays inside 𝔥ₙ).
    pub fn phase_at(&self, omega: &SiegelPoint) -> Result<Complex64> {
        let start = self.reference.as_complex();
        let end = omega.as_complex();
        let g = &self.g;
        let cm = complexify(g.c());
        let dm = complexify(g.d());
        continue_sqrt(
            |s| {
                let p = &start * c(1.0 - s, 0.0) + &end * c(s, 0.0);
                let det = cdet(&(&cm * p + &dm));
                det.conj() / det.norm()
            },
            self.branch,
        )
    }

    /// `self ∘ other`, using the cocycle `μ_{g₁g₂}(Ω) = μ_{g₁}(g₂Ω)·μ_{g₂}(Ω)`.
    pub fn compose(&self, other: &MetaplecticElement) -> Result<MetaplecticElement> {
        let g = self.g.compose(&other.g)?;
        let moved = other.g.act_on_siegel(&other.reference)?;
        let branch = self.phase_at(&moved)? * other.branch;
        Ok(MetaplecticElement {
            g,
            reference: other.reference.clone(),
            branch,
        })
    }

    pub fn inverse(&self) -> Result<MetaplecticElement> {
        Ok(MetaplecticElement {
            g: self.g.inverse(),
            reference: self.g.act_on_siegel(&self.reference)?,
            branch: self.branch.conj(),
        })
    }
}

/// Half-form phase of a lifted element at `omega`.
pub fn halfform_phase_of_g(mp: &MetaplecticElement, omega: &SiegelPoint) -> Result<Complex64> {
    mp.phase_at(omega)
}

/// Random elements of Sp(2n, ℝ) for property tests and verification suites.
///
/// Each draw multiplies exactly symplectic factors: orthogonal-symplectic
/// rotations, positive squeezes and symmetric shears.
pub mod random {
    use super::*;

    pub fn symmetric(n: usize, scale: f64, rng: &mut impl Rng) -> RMat {
        let m = RMat::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
        (&m + m.transpose()) * 0.5
    }

    pub fn unitary(n: usize, rng: &mut impl Rng) -> CMat {
        let m = CMat::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        QR::new(m).q()
    }

    pub fn symplectic(n: usize, rng: &mut impl Rng) -> SymplecticMap {
        let k1 = SymplecticMap::from_unitary(&unitary(n, rng)).expect("unitary factor");
        let k2 = SymplecticMap::from_unitary(&unitary(n, rng)).expect("unitary factor");
        let squeeze: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8)).collect();
        let s = SymplecticMap::squeeze(&squeeze);
        let shear = SymplecticMap::shear_upper(&symmetric(n, 0.8, rng)).expect("shear");
        shear
            .compose(&k1)
            .and_then(|g| g.compose(&s))
            .and_then(|g| g.compose(&k2))
            .expect("product of symplectic factors")
    }

    /// A random point of 𝔥ₙ with imaginary part comfortably positive.
    pub fn siegel_point(n: usize, rng: &mut impl Rng) -> SiegelPoint {
        let re = symmetric(n, 1.0, rng);
        let m = RMat::from_fn(n, n, |_, _| rng.random_range(-0.6..0.6));
        let im = &m * m.transpose() + RMat::identity(n, n) * rng.random_range(0.4..1.5);
        SiegelPoint::new(re, im).expect("random Siegel point")
    }

    pub fn complex_vector(n: usize, scale: f64, rng: &mut impl Rng) -> crate::linalg::CVec {
        crate::linalg::CVec::from_fn(n, |_, _| {
            c(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
        })
    }
}

/// Convenience: the 2n×2n matrix of ω.
pub fn omega_form(n: usize) -> RMat {
    omega_matrix(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_composition() {
        let id = SymplecticMap::identity(2);
        assert_eq!(id.compose(&id).unwrap(), id);
    }

    #[test]
    fn inverse_is_group_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            let g = random::symplectic(n, &mut rng);
            let prod = g.compose(&g.inverse()).unwrap();
            assert!(max_abs_diff_real(&prod.to_matrix(), &RMat::identity(2 * n, 2 * n)) < 1e-12);
        }
    }

    #[test]
    fn random_products_stay_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g1 = random::symplectic(1, &mut rng);
        let g2 = random::symplectic(1, &mut rng);
        let p = g1.compose(&g2).unwrap();
        assert!(p.relation_residual() < 1e-12);
        let m = p.to_matrix();
        let j = omega_matrix(1);
        assert!(max_abs_diff_real(&(m.transpose() * &j * &m), &j) < 1e-12);
    }

    #[test]
    fn non_symplectic_rejected() {
        let e = SymplecticMap::new(
            RMat::identity(1, 1) * 2.0,
            RMat::zeros(1, 1),
            RMat::zeros(1, 1),
            RMat::identity(1, 1),
        );
        assert!(matches!(e, Err(Error::SpRelationViolated(_))));
    }

    #[test]
    fn action_examples() {
        let i = SiegelPoint::i_identity(1);
        let rot = SymplecticMap::rotation_quarter(1);
        let r = rot.act_on_siegel(&i).unwrap();
        assert!((r.scalar() - I).norm() < 1e-14);
        let lam = 0.7;
        let sq = SymplecticMap::squeeze(&[lam]);
        let r = sq.act_on_siegel(&i).unwrap();
        assert!((r.scalar() - I * (2.0 * lam).exp()).norm() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let om = random::siegel_point(2, &mut rng);
        let same = SymplecticMap::identity(2).act_on_siegel(&om).unwrap();
        assert!(max_abs_diff(&same.as_complex(), &om.as_complex()) < 1e-15);
    }

    #[test]
    fn xi_examples() {
        let i2 = SiegelPoint::i_identity(2);
        assert!(max_abs_diff(&xi_matrix(&i2, &i2), &CMat::identity(2, 2)) < 1e-15);
        let e2 = 1f64.exp().powi(2);
        let a = SiegelPoint::scalar_point(I);
        let b = SiegelPoint::scalar_point(I * e2);
        let xi = xi_matrix(&a, &b)[(0, 0)];
        assert!((xi - c((e2 + 1.0) / 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn xi_identities_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            for _ in 0..10 {
                let g = random::symplectic(n, &mut rng);
                let a = random::siegel_point(n, &mut rng);
                let b = random::siegel_point(n, &mut rng);
                let r = xi_identity_residuals(&g, &a, &b).unwrap();
                assert!(r.max() < 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn z_transformation_identity_and_pullback() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=2 {
            let om = random::siegel_point(n, &mut rng);
            let t = transform_z_coords(&SymplecticMap::identity(n), &om).unwrap();
            assert!(max_abs_diff(&t, &CMat::identity(n, n)) < 1e-12);
            let g = random::symplectic(n, &mut rng);
            let t = transform_z_coords(&g, &om).unwrap();
            // pointwise: z_Ω(g⁻¹ v) = T z_{gΩ}(v)
            let image = g.act_on_siegel(&om).unwrap();
            let v = RVec::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0));
            let lhs = om.z_coords(&g.inverse().apply(&v));
            let rhs = &t * image.z_coords(&v);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn lifts_differ_by_sign_and_square_correctly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = MetaplecticElement::identity(2);
        let om = random::siegel_point(2, &mut rng);
        assert!((id.phase_at(&om).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        let g = random::symplectic(2, &mut rng);
        let m = MetaplecticElement::lift(g.clone());
        let p1 = m.phase_at(&om).unwrap();
        let p2 = m.other_lift().phase_at(&om).unwrap();
        assert!((p1 + p2).norm() < 1e-13);
        assert!((p1 * p1 - g.halfform_phase_squared(&om)).norm() < 1e-12);
        assert!((p1.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lift_composition_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..=2 {
            let m1 = MetaplecticElement::lift(random::symplectic(n, &mut rng));
            let m2 = MetaplecticElement::lift(random::symplectic(n, &mut rng));
            let m12 = m1.compose(&m2).unwrap();
            let om = random::siegel_point(n, &mut rng);
            let lhs = m12.phase_at(&om).unwrap();
            let moved = m2.symplectic().act_on_siegel(&om).unwrap();
            let rhs = m1.phase_at(&moved).unwrap() * m2.phase_at(&om).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "n={n}: {lhs} vs {rhs}");
            let inv = m1.inverse().unwrap().compose(&m1).unwrap();
            assert!((inv.phase_at(&om).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        }
    }
}
