//! The Siegel upper half-space 𝔥ₙ of compatible complex structures, its
//! geodesics in normal form `γ(t) = g·(i e^{2Λt})`, and the real Lagrangian
//! subspaces reached at the ends of a geodesic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, cinverse, complexify, csymmetrize, from_rows, max_abs_diff_real, min_eigenvalue,
    omega_matrix, real_part, imag_part, spd_inv_sqrt, spd_sqrt, to_rows, CMat, CVec, RMat, RVec,
    I,
};
use crate::sympl::SymplecticMap;

/// Symmetry residual accepted at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Rates below this count as zero.
pub const RATE_TOL: f64 = 1e-10;
/// Minimal `|det|` of the ω-pairing between orthonormal bases of transverse subspaces.
pub const TRANSVERSE_TOL: f64 = 1e-8;

/// `Ω = Ω₁ + iΩ₂` with `Ω₁` symmetric and `Ω₂` symmetric positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiegelRepr", into = "SiegelRepr")]
pub struct SiegelPoint {
    re: RMat,
    im: RMat,
}

#[derive(Serialize, Deserialize)]
struct SiegelRepr {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<SiegelRepr> for SiegelPoint {
    type Error = Error;
    fn try_from(r: SiegelRepr) -> Result<Self> {
        SiegelPoint::new(from_rows(&r.re)?, from_rows(&r.im)?)
    }
}

impl From<SiegelPoint> for SiegelRepr {
    fn from(p: SiegelPoint) -> Self {
        SiegelRepr {
            re: to_rows(&p.re),
            im: to_rows(&p.im),
        }
    }
}

fn symmetry_residual(m: &RMat) -> f64 {
    max_abs_diff_real(m, &m.transpose())
}

impl SiegelPoint {
    pub fn new(re: RMat, im: RMat) -> Result<Self> {
        let n = re.nrows();
        if re.ncols() != n || im.nrows() != n || im.ncols() != n {
            return Err(Error::InvalidSiegelPoint("blocks must be square of equal size".into()));
        }
        if n == 0 {
            return Err(Error::InvalidSiegelPoint("dimension must be positive".into()));
        }
        let scale = 1.0f64.max(re.amax()).max(im.amax());
        let r = symmetry_residual(&re).max(symmetry_residual(&im));
        if r > SYMMETRY_TOL * scale {
            return Err(Error::InvalidSiegelPoint(format!("symmetry residual {r:.3e}")));
        }
        let re = (&re + re.transpose()) * 0.5;
        let im = (&im + im.transpose()) * 0.5;
        let lo = min_eigenvalue(&im);
        if lo.is_nan() || lo <= 0.0 {
            return Err(Error::InvalidSiegelPoint(format!(
                "imaginary part not positive definite (smallest eigenvalue {lo:.3e})"
            )));
        }
        Ok(SiegelPoint { re, im })
    }

    /// Accepts a matrix produced by arithmetic, symmetrizing away round-off.
    pub fn from_complex(m: &CMat) -> Result<Self> {
        let scale = 1.0f64.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let asym = m
            .iter()
            .zip(m.transpose().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if asym > 1e-8 * scale {
            return Err(Error::InvalidSiegelPoint(format!("symmetry residual {asym:.3e}")));
        }
        let s = csymmetrize(m);
        SiegelPoint::new(real_part(&s), imag_part(&s))
    }

    pub fn i_identity(n: usize) -> Self {
        SiegelPoint {
            re: RMat::zeros(n, n),
            im: RMat::identity(n, n),
        }
    }

    /// `i·diag(e^{2λⱼ})`.
    pub fn from_rates(rates: &[f64], t: f64) -> Self {
        let n = rates.len();
        let d = RVec::from_iterator(n, rates.iter().map(|l| (2.0 * l * t).exp()));
        SiegelPoint {
            re: RMat::zeros(n, n),
            im: RMat::from_diagonal(&d),
        }
    }

    /// A point of the upper half-plane (n = 1).
    pub fn scalar_point(tau: Complex64) -> Self {
        SiegelPoint::new(RMat::from_element(1, 1, tau.re), RMat::from_element(1, 1, tau.im))
            .expect("upper half-plane point")
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &RMat {
        &self.re
    }

    pub fn im(&self) -> &RMat {
        &self.im
    }

    /// The single entry when n = 1.
    pub fn scalar(&self) -> Complex64 {
        c(self.re[(0, 0)], self.im[(0, 0)])
    }

    pub fn as_complex(&self) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, j| c(self.re[(i, j)], self.im[(i, j)]))
    }

    pub fn im_sqrt(&self) -> RMat {
        spd_sqrt(&self.im)
    }

    pub fn im_inv_sqrt(&self) -> RMat {
        spd_inv_sqrt(&self.im)
    }

    /// `K = (2Ω₂)^{-1/2} [I, −Ω̄]`, so that `z_Ω = K v` for `v = (x, y)`.
    pub fn z_matrix(&self) -> CMat {
        let n = self.dim();
        let s = complexify(&spd_inv_sqrt(&(&self.im * 2.0)));
        let mut k = CMat::zeros(n, 2 * n);
        k.view_mut((0, 0), (n, n)).copy_from(&s);
        let right = -&s * self.as_complex().map(|z| z.conj());
        k.view_mut((0, n), (n, n)).copy_from(&right);
        k
    }

    pub fn z_coords(&self, v: &RVec) -> CVec {
        self.z_matrix() * complexify(&RMat::from_column_slice(v.len(), 1, v.as_slice())).column(0)
    }

    /// Real quadratic form with `|z_Ω|² = vᵀ G v`.
    pub fn z_metric(&self) -> RMat {
        let k = self.z_matrix();
        real_part(&(k.adjoint() * k))
    }

    pub fn approx_eq(&self, other: &SiegelPoint, tol: f64) -> bool {
        self.dim() == other.dim()
            && max_abs_diff_real(&self.re, &other.re) <= tol
            && max_abs_diff_real(&self.im, &other.im) <= tol
    }
}

/// The compatible complex structure `J` on `(x, y)` coordinates whose
/// holomorphic coordinates are `z_Ω`.
pub fn complex_structure_of(omega: &SiegelPoint) -> RMat {
    let n = omega.dim();
    let inv = spd_inv_sqrt(omega.im());
    let inv = &inv * &inv;
    let o1 = omega.re();
    let o2 = omega.im();
    let a = o1 * &inv;
    let b = -(o2 + o1 * &inv * o1);
    let c_ = inv.clone();
    let d = -(&inv * o1);
    let mut j = RMat::zeros(2 * n, 2 * n);
    j.view_mut((0, 0), (n, n)).copy_from(&a);
    j.view_mut((0, n), (n, n)).copy_from(&b);
    j.view_mut((n, 0), (n, n)).copy_from(&c_);
    j.view_mut((n, n), (n, n)).copy_from(&d);
    j
}

/// Takagi factorization `W = U Σ Uᵀ` of a complex symmetric matrix, with
/// singular values sorted descending.
///
/// Uses the real symmetric embedding `[[A, B], [B, −A]]` of `W = A + iB`:
/// an eigenvector `(x, y)` for eigenvalue `σ` gives `u = x + iy` with
/// `W ū = σ u`.
pub fn takagi(w: &CMat) -> (CMat, Vec<f64>) {
    let n = w.nrows();
    let a = real_part(w);
    let b = imag_part(w);
    let mut s = RMat::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&a);
    s.view_mut((0, n), (n, n)).copy_from(&b);
    s.view_mut((n, 0), (n, n)).copy_from(&b);
    s.view_mut((n, n), (n, n)).copy_from(&(-&a));
    let eig = nalgebra::SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let scale = 1.0f64.max(eig.eigenvalues.amax());
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    let mut sig = Vec::with_capacity(n);
    for &k in &order {
        let ev = eig.eigenvalues[k];
        if ev <= 1e-13 * scale || cols.len() == n {
            break;
        }
        let v = eig.eigenvectors.column(k);
        let u = CVec::from_fn(n, |i, _| c(v[i], v[n + i]));
        let u = &u / c(u.norm(), 0.0);
        cols.push(u);
        sig.push(ev);
    }
    // Kernel directions: any orthonormal completion satisfies W ū = 0.
    while cols.len() < n {
        let mut best: Option<CVec> = None;
        for e in 0..n {
            let mut r = CVec::zeros(n);
            r[e] = c(1.0, 0.0);
            for q in &cols {
                let p = q.dotc(&r);
                r -= q * p;
            }
            if best.as_ref().is_none_or(|b| r.norm() > b.norm()) {
                best = Some(r);
            }
        }
        let r = best.expect("nonempty basis");
        cols.push(&r / c(r.norm(), 0.0));
        sig.push(0.0);
    }
    let mut u = CMat::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        u.set_column(j, col);
    }
    (u, sig)
}

/// Sp element sending `iI` to `Ω`: `(Ω₂^{1/2}, Ω₁Ω₂^{-1/2}; 0, Ω₂^{-1/2})`.
pub fn translation_to(omega: &SiegelPoint) -> SymplecticMap {
    let s = omega.im_sqrt();
    let si = omega.im_inv_sqrt();
    let n = omega.dim();
    SymplecticMap::new(s, omega.re() * &si, RMat::zeros(n, n), si)
        .expect("translation to a Siegel point is symplectic")
}

/// A geodesic `γ(t) = g·(i e^{2Λt})` with `γ(0) = start`, `γ(1) = end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSpec {
    pub g: SymplecticMap,
    /// Diagonal of Λ, sorted descending.
    pub rates: Vec<f64>,
    pub start: SiegelPoint,
    pub end: SiegelPoint,
    /// Set when the endpoints coincide and Λ = 0.
    pub degenerate: bool,
}

impl GeodesicSpec {
    /// The normal form `γ_Λ` itself, from `iI`.
    pub fn standard(rates: &[f64]) -> Self {
        let n = rates.len();
        GeodesicSpec {
            g: SymplecticMap::identity(n),
            rates: rates.to_vec(),
            start: SiegelPoint::i_identity(n),
            end: SiegelPoint::from_rates(rates, 1.0),
            degenerate: rates.iter().all(|l| l.abs() <= RATE_TOL),
        }
    }

    pub fn dim(&self) -> usize {
        self.rates.len()
    }

    pub fn eval(&self, t: f64) -> Result<SiegelPoint> {
        geodesic_eval(self, t)
    }

    /// Distance between `γ(0)` and `γ(1)`.
    pub fn length(&self) -> f64 {
        2.0 * self.rates.iter().map(|l| l * l).sum::<f64>().sqrt()
    }
}

/// Normal form of the geodesic from `omega` to `omega_p`.
///
/// When the points coincide the result is flagged `degenerate` with Λ = 0
/// and `g` mapping `iI` to `omega`.
pub fn geodesic_between(omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<GeodesicSpec> {
    let n = omega.dim();
    if omega_p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: omega_p.dim() });
    }
    let g1 = translation_to(omega);
    let moved = g1.inverse().act_on_siegel(omega_p)?;
    let m = moved.as_complex();
    let id = CMat::identity(n, n) * I;
    let w = csymmetrize(&((&m - &id) * cinverse(&(&m + &id), "Cayley transform")?));
    let (u, sigma) = takagi(&w);
    let rates: Vec<f64> = sigma
        .iter()
        .map(|&s| {
            if s >= 1.0 {
                Err(Error::InvalidSiegelPoint("Cayley image outside the unit disk".into()))
            } else {
                Ok(s.atanh())
            }
        })
        .collect::<Result<_>>()?;
    let g2 = SymplecticMap::from_unitary(&u)?;
    let g = g1.compose(&g2)?;
    let degenerate = rates.iter().all(|&l| l <= RATE_TOL);
    Ok(GeodesicSpec {
        g,
        rates,
        start: omega.clone(),
        end: omega_p.clone(),
        degenerate,
    })
}

pub fn geodesic_eval(spec: &GeodesicSpec, t: f64) -> Result<SiegelPoint> {
    spec.g.act_on_siegel(&SiegelPoint::from_rates(&spec.rates, t))
}

/// Riemannian distance for `ds² = Tr(Ω₂⁻¹ dΩ Ω₂⁻¹ dΩ̄)`.
///
/// Along `i e^{2λt}` this metric gives `ds = 2|λ| dt`, so the distance is
/// `2 (Σ λⱼ²)^{1/2}`.
pub fn metric_distance(omega: &SiegelPoint, omega_p: &SiegelPoint) -> Result<f64> {
    Ok(geodesic_between(omega, omega_p)?.length())
}

/// Limits `(γ(−∞), γ(+∞)) = (g·L₋, g·L₊)`, present only when every rate is
/// strictly positive.
pub fn geodesic_boundary_limits(
    spec: &GeodesicSpec,
) -> (Option<LagrangianFrame>, Option<LagrangianFrame>) {
    if spec.rates.iter().any(|&l| l <= RATE_TOL) {
        return (None, None);
    }
    let n = spec.dim();
    let minus = LagrangianFrame::from_chart(spec.g.clone());
    let plus = LagrangianFrame::from_chart(
        spec.g
            .compose(&SymplecticMap::rotation_quarter(n))
            .expect("product with the quarter rotation"),
    );
    (Some(minus), Some(plus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagrangianTag {
    /// `{x = 0}`; profiles are functions of `x`.
    Minus,
    /// `{y = 0}`; profiles are functions of `y`.
    Plus,
    Transformed,
}

/// A real Lagrangian subspace `L = g·L₋`, stored with the chart `g`.
///
/// The chart also fixes the profile coordinate `u = [I, 0] g⁻¹ v` on `V/L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianFrame {
    pub tag: LagrangianTag,
    pub chart: SymplecticMap,
}

impl LagrangianFrame {
    pub fn minus(n: usize) -> Self {
        LagrangianFrame {
            tag: LagrangianTag::Minus,
            chart: SymplecticMap::identity(n),
        }
    }

    pub fn plus(n: usize) -> Self {
        LagrangianFrame {
            tag: LagrangianTag::Plus,
            chart: SymplecticMap::rotation_quarter(n),
        }
    }

    pub fn from_chart(chart: SymplecticMap) -> Self {
        let n = chart.dim();
        let mut frame = LagrangianFrame {
            tag: LagrangianTag::Transformed,
            chart,
        };
        if frame.same_subspace(&LagrangianFrame::minus(n)) {
            frame.tag = LagrangianTag::Minus;
        } else if frame.same_subspace(&LagrangianFrame::plus(n)) {
            frame.tag = LagrangianTag::Plus;
        }
        frame
    }

    /// `g·L` with chart `g ∘ chart`.
    pub fn transformed_by(&self, g: &SymplecticMap) -> Result<Self> {
        Ok(LagrangianFrame::from_chart(g.compose(&self.chart)?))
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Spanning columns `g [0; I]`.
    pub fn basis(&self) -> RMat {
        let n = self.dim();
        let m = self.chart.to_matrix();
        m.view((0, n), (2 * n, n)).into_owned()
    }

    fn orthonormal_basis(&self) -> RMat {
        nalgebra::QR::new(self.basis()).q()
    }

    /// `max |ω(u, v)|` over the spanning columns.
    pub fn lagrangian_residual(&self) -> f64 {
        let b = self.basis();
        (b.transpose() * omega_matrix(self.dim()) * &b).amax()
    }

    /// `|det|` of the ω-pairing between orthonormal bases; 1 for `L₋, L₊`.
    pub fn transversality(&self, other: &LagrangianFrame) -> f64 {
        let p = self.orthonormal_basis();
        let q = other.orthonormal_basis();
        (p.transpose() * omega_matrix(self.dim()) * q).determinant().abs()
    }

    pub fn same_subspace(&self, other: &LagrangianFrame) -> bool {
        let p = self.orthonormal_basis();
        let q = other.orthonormal_basis();
        (&q - &p * (p.transpose() * &q)).amax() < 1e-9
    }

    pub fn check_transverse(&self, other: &LagrangianFrame) -> Result<()> {
        let t = self.transversality(other);
        if t <= TRANSVERSE_TOL {
            return Err(Error::NonTransverse(t));
        }
        Ok(())
    }

    /// Profile coordinate `u = [I, 0] g⁻¹ v`.
    pub fn profile_coordinate(&self, v: &RVec) -> RVec {
        let n = self.dim();
        self.chart.inverse().apply(v).rows(0, n).into_owned()
    }
}

/// `h ∈ Sp` with `h·L₋ = l` and `h·L₊ = l_p`.
pub fn transverse_pair_map(l: &LagrangianFrame, l_p: &LagrangianFrame) -> Result<SymplecticMap> {
    l.check_transverse(l_p)?;
    let n = l.dim();
    let a = l_p.basis();
    let b = l.basis();
    let pairing = a.transpose() * omega_matrix(n) * &b;
    let inv = pairing
        .try_inverse()
        .ok_or(Error::Singular("ω-pairing of transverse bases"))?;
    let b = b * inv;
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (2 * n, n)).copy_from(&a);
    m.view_mut((0, n), (2 * n, n)).copy_from(&b);
    SymplecticMap::from_matrix(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympl::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_invalid_points() {
        let e = SiegelPoint::new(RMat::zeros(1, 1), RMat::from_element(1, 1, -1.0));
        assert!(matches!(e, Err(Error::InvalidSiegelPoint(_))));
        let asym = RMat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = SiegelPoint::new(asym, RMat::identity(2, 2));
        assert!(matches!(e, Err(Error::InvalidSiegelPoint(_))));
    }

    #[test]
    fn complex_structure_standard_and_squeezed() {
        let j = complex_structure_of(&SiegelPoint::i_identity(2));
        let expect = SymplecticMap::rotation_quarter(2).to_matrix();
        assert!(max_abs_diff_real(&j, &expect) < 1e-15);
        let t = 0.3f64;
        let j = complex_structure_of(&SiegelPoint::scalar_point(I * (2.0 * t).exp()));
        let expect = RMat::from_row_slice(2, 2, &[0.0, -(2.0 * t).exp(), (-2.0 * t).exp(), 0.0]);
        assert!(max_abs_diff_real(&j, &expect) < 1e-14);
    }

    #[test]
    fn complex_structure_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let om = random::siegel_point(n, &mut rng);
            let j = complex_structure_of(&om);
            let w = omega_matrix(n);
            let id = RMat::identity(2 * n, 2 * n);
            assert!(max_abs_diff_real(&(&j * &j), &(-&id)) < 1e-10);
            assert!(max_abs_diff_real(&(j.transpose() * &w * &j), &w) < 1e-10);
            let g = &w * &j;
            assert!(min_eigenvalue(&((&g + g.transpose()) * 0.5)) > 0.0);
            // z_Ω is complex-linear for J: z(Jv) = i z(v)
            let v = RVec::from_fn(2 * n, |i, _| (i as f64 + 0.5).sin());
            let lhs = om.z_coords(&(&j * &v));
            let rhs = om.z_coords(&v) * I;
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn takagi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=4 {
            let m = CMat::from_fn(n, n, |_, _| {
                use rand::Rng;
                c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
            });
            let w = csymmetrize(&m);
            let (u, s) = takagi(&w);
            let sig = CMat::from_diagonal(&CVec::from_iterator(n, s.iter().map(|&x| c(x, 0.0))));
            let rec = &u * sig * u.transpose();
            assert!(crate::linalg::max_abs_diff(&rec, &w) < 1e-12);
            assert!(crate::linalg::max_abs_diff(&(u.adjoint() * &u), &CMat::identity(n, n)) < 1e-12);
            assert!(s.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn takagi_rank_deficient() {
        let u = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let w = &u * u.transpose() * c(0.5, 0.0);
        let (q, s) = takagi(&w);
        assert!((s[0] - 0.5).abs() < 1e-14 && s[1].abs() < 1e-14);
        let sig = CMat::from_diagonal(&CVec::from_iterator(2, s.iter().map(|&x| c(x, 0.0))));
        assert!(crate::linalg::max_abs_diff(&(&q * sig * q.transpose()), &w) < 1e-14);
        let (_, s) = takagi(&CMat::zeros(3, 3));
        assert_eq!(s, vec![0.0; 3]);
    }

    #[test]
    fn standard_geodesic_recovered() {
        let end = SiegelPoint::from_rates(&[0.4, 1.1], 1.0);
        let spec = geodesic_between(&SiegelPoint::i_identity(2), &end).unwrap();
        assert!((spec.rates[0] - 1.1).abs() < 1e-12);
        assert!((spec.rates[1] - 0.4).abs() < 1e-12);
        for t in [0.0, 0.3, 1.0] {
            let direct = SiegelPoint::from_rates(&[0.4, 1.1], t);
            assert!(spec.eval(t).unwrap().approx_eq(&direct, 1e-12));
        }
    }

    #[test]
    fn midpoint_of_vertical_geodesic() {
        let spec = geodesic_between(
            &SiegelPoint::scalar_point(I),
            &SiegelPoint::scalar_point(I * 4f64.exp()),
        )
        .unwrap();
        let mid = spec.eval(0.5).unwrap().scalar();
        assert!((mid - I * 2f64.exp()).norm() < 1e-12);
        assert!((spec.length() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let om = random::siegel_point(2, &mut rng);
        let spec = geodesic_between(&om, &om).unwrap();
        assert!(spec.degenerate);
        assert!(spec.rates.iter().all(|&l| l.abs() < 1e-12));
        assert!(spec.eval(0.7).unwrap().approx_eq(&om, 1e-12));
        assert_eq!(geodesic_boundary_limits(&spec), (None, None));
        assert!(metric_distance(&om, &om).unwrap() < 1e-12);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in 1..=3 {
            for _ in 0..20 {
                let a = random::siegel_point(n, &mut rng);
                let b = random::siegel_point(n, &mut rng);
                let spec = geodesic_between(&a, &b).unwrap();
                assert!(spec.eval(0.0).unwrap().approx_eq(&a, 1e-8));
                assert!(spec.eval(1.0).unwrap().approx_eq(&b, 1e-8));
            }
        }
    }

    #[test]
    fn distance_is_invariant_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for n in 1..=2 {
            let a = random::siegel_point(n, &mut rng);
            let b = random::siegel_point(n, &mut rng);
            let g = random::symplectic(n, &mut rng);
            let d = metric_distance(&a, &b).unwrap();
            let d_rev = metric_distance(&b, &a).unwrap();
            let d_g = metric_distance(&g.act_on_siegel(&a).unwrap(), &g.act_on_siegel(&b).unwrap())
                .unwrap();
            assert!((d - d_rev).abs() < 1e-9);
            assert!((d - d_g).abs() < 1e-9);
        }
    }

    #[test]
    fn distance_matches_integrated_metric() {
        // Integrate ds = sqrt(Tr(Ω₂⁻¹ Ω̇ Ω₂⁻¹ conj Ω̇)) dt along the geodesic.
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let a = random::siegel_point(2, &mut rng);
        let b = random::siegel_point(2, &mut rng);
        let spec = geodesic_between(&a, &b).unwrap();
        let steps = 400;
        let h = 1e-5;
        let mut total = 0.0;
        for k in 0..steps {
            let t = (k as f64 + 0.5) / steps as f64;
            let p = spec.eval(t).unwrap();
            let dot = (spec.eval(t + h).unwrap().as_complex() - spec.eval(t - h).unwrap().as_complex())
                / c(2.0 * h, 0.0);
            let inv = complexify(&p.im().clone().try_inverse().unwrap());
            let ds2 = (&inv * &dot * &inv * dot.map(|z| z.conj())).trace();
            total += ds2.re.sqrt() / steps as f64;
        }
        assert!((total - spec.length()).abs() < 1e-6, "{total} vs {}", spec.length());
    }

    #[test]
    fn boundary_limits() {
        let spec = GeodesicSpec::standard(&[1.0]);
        let (lm, lp) = geodesic_boundary_limits(&spec);
        assert_eq!(lm.unwrap().tag, LagrangianTag::Minus);
        assert_eq!(lp.unwrap().tag, LagrangianTag::Plus);
        assert_eq!(geodesic_boundary_limits(&GeodesicSpec::standard(&[1.0, 0.0])), (None, None));
        assert_eq!(geodesic_boundary_limits(&GeodesicSpec::standard(&[0.0])), (None, None));
    }

    #[test]
    fn transverse_pair_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=2 {
            let g = random::symplectic(n, &mut rng);
            let l = LagrangianFrame::from_chart(g.clone());
            let lp = LagrangianFrame::plus(n).transformed_by(&g).unwrap();
            assert!(l.lagrangian_residual() < 1e-12);
            let h = transverse_pair_map(&l, &lp).unwrap();
            let spec = geodesic_between(
                &h.act_on_siegel(&SiegelPoint::i_identity(n)).unwrap(),
                &h.act_on_siegel(&SiegelPoint::from_rates(&vec![1.0; n], 1.0)).unwrap(),
            )
            .unwrap();
            let (a, b) = geodesic_boundary_limits(&spec);
            assert!(a.unwrap().same_subspace(&l));
            assert!(b.unwrap().same_subspace(&lp));
            let e = transverse_pair_map(&l, &l);
            assert!(matches!(e, Err(Error::NonTransverse(_))));
        }
    }
}
