//! The `verify` suites. Random configurations come from ChaCha8 seeded with
//! `--seed`, so a report is reproducible from its config.

use anyhow::Result;
use clap::ValueEnum;
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use siegel_quant::linalg::{c, CMat, I};
use siegel_quant::quadrature::{oracle_inner, width_for_pair, QuadratureSpec};
use siegel_quant::sections::{coherent_state, inner_product, HalfFormFrame, PolyFockSection, RealHalfForm};
use siegel_quant::sections::GaussianSection;
use siegel_quant::siegel::{GeodesicSpec, LagrangianFrame, SiegelPoint};
use siegel_quant::sympl::{random, xi_identity_residuals};
use siegel_quant::transforms::{
    boundary_distance, composition_identities_check, fourier, fourier_via_kahler, limit_transport_to_bargmann,
    limit_transport_to_fourier, CorrectedBoundarySection, CorrectedSection, GridSpec, LagrangianSection,
};
use siegel_quant::transport::{
    bogoliubov_scale, fock_curvature_fd, transport_corrected, transport_equals_scaled_projection_check,
    transport_section, triangle_holonomy,
};

use crate::report::{Report, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma21,
    Unitarity,
    Bogoliubov,
    Flatness,
    Curvature,
    Limits,
    Identities,
}

pub fn run(suite: Suite, config: RunConfig) -> Result<Report> {
    let name = serde_json::to_value(suite)?.as_str().unwrap_or_default().to_string();
    let mut report = Report::new(&format!("verify {name}"), config);
    let mut rng = ChaCha8Rng::seed_from_u64(report.config.seed);
    match suite {
        Suite::Lemma21 => xi_identities(&mut report, &mut rng)?,
        Suite::Unitarity => unitarity(&mut report, &mut rng)?,
        Suite::Bogoliubov => bogoliubov(&mut report, &mut rng)?,
        Suite::Flatness => flatness(&mut report, &mut rng)?,
        Suite::Curvature => curvature(&mut report)?,
        Suite::Limits => limits(&mut report)?,
        Suite::Identities => identities(&mut report, &mut rng)?,
    }
    Ok(report)
}

/// Dimension for the k-th random case: the configured n, or cycling 1..=max.
fn dim_for(config: &RunConfig, k: usize, max: usize) -> usize {
    config.n.unwrap_or(1 + k % max)
}

fn xi_identities(report: &mut Report, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut worst: f64 = 0.0;
    let cases = 200;
    for k in 0..cases {
        let n = dim_for(&report.config, k, 3);
        let g = random::symplectic(n, rng);
        let a = random::siegel_point(n, rng);
        let b = random::siegel_point(n, rng);
        worst = worst.max(xi_identity_residuals(&g, &a, &b)?.max());
    }
    report.output("cases", cases);
    report.check("xi_identities", worst, report.config.tol_or(1e-9));
    Ok(())
}

fn oracle_nodes(config: &RunConfig, n: usize) -> usize {
    if n == 1 {
        config.nodes
    } else {
        config.nodes.min(24)
    }
}

fn unitarity(report: &mut Report, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut closed: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let cases = 20;
    for k in 0..cases {
        let n = dim_for(&report.config, k, 2);
        let a = random::siegel_point(n, rng);
        let b = random::siegel_point(n, rng);
        let s1 = coherent_state(&random::complex_vector(n, 1.0, rng), &a);
        let s2 = coherent_state(&random::complex_vector(n, 1.0, rng), &a);
        let before = inner_product(&s1, &s2)?;
        let u1 = transport_section(&s1, &b)?;
        let u2 = transport_section(&s2, &b)?;
        closed = closed.max((inner_product(&u1, &u2)? - before).norm() / before.norm());
        let phase = Complex64::from_polar(1.0, 0.3);
        let r1 = transport_corrected(&s1, phase, &b)?;
        let r2 = transport_corrected(&s2, phase, &b)?;
        let after = inner_product(&r1.folded(), &r2.folded())? * phase.conj() * phase;
        closed = closed.max((after - before).norm() / before.norm());
        if k < 4 {
            let spec = QuadratureSpec { nodes: oracle_nodes(&report.config, n), tolerance: 1e-6, check_refinement: n == 1 };
            let width = width_for_pair(&u1.to_vfunc().form.q, &u2.to_vfunc().form.q);
            let q = oracle_inner(u1.pointwise(), u2.pointwise(), &width, &spec)?;
            oracle = oracle.max((q - before).norm() / before.norm());
        }
    }
    report.output("cases", cases);
    report.check("closed_form", closed, report.config.tol_or(1e-8));
    report.check("quadrature_oracle", oracle, 1e-5);
    Ok(())
}

fn distance_nodes(n: usize) -> usize {
    if n == 1 {
        32
    } else {
        14
    }
}

fn bogoliubov(report: &mut Report, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut worst: f64 = 0.0;
    let cases = 100;
    for k in 0..cases {
        let n = dim_for(&report.config, k, 2);
        let a = random::siegel_point(n, rng);
        let b = random::siegel_point(n, rng);
        let alpha = random::complex_vector(n, 1.0, rng);
        worst = worst.max(transport_equals_scaled_projection_check(&alpha, &a, &b, distance_nodes(n))?);
    }
    let mut rows = Vec::new();
    let mut scale: f64 = 0.0;
    for t in [0.1, 0.5, 1.0, 2.0, 3.5] {
        let s = bogoliubov_scale(&SiegelPoint::i_identity(1), &SiegelPoint::from_rates(&[1.0], t));
        scale = scale.max((s - t.cosh().sqrt()).abs());
        rows.push((t, s));
    }
    report.output("cases", cases);
    report.output("scale_along_standard_geodesic", rows);
    report.check("transport_minus_scaled_projection", worst, report.config.tol_or(1e-8));
    report.check("scale_vs_sqrt_cosh", scale, 1e-12);
    Ok(())
}

fn flatness(report: &mut Report, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut corrected: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    let mut spread: f64 = 0.0;
    let cases = 50;
    for k in 0..cases {
        let n = dim_for(&report.config, k, 2);
        let a = random::siegel_point(n, rng);
        let b = random::siegel_point(n, rng);
        let cc = random::siegel_point(n, rng);
        let mut scalars = Vec::new();
        for _ in 0..3 {
            let s = coherent_state(&random::complex_vector(n, 1.0, rng), &a);
            let h = triangle_holonomy(&s, &b, &cc, true)?;
            corrected = corrected.max((h.scalar - c(1.0, 0.0)).norm()).max(h.shape_residual);
            let u = triangle_holonomy(&s, &b, &cc, false)?;
            modulus = modulus.max((u.scalar.norm() - 1.0).abs());
            spread = spread.max(u.shape_residual);
            scalars.push(u.scalar);
        }
        spread = spread.max((scalars[0] - scalars[1]).norm()).max((scalars[0] - scalars[2]).norm());
    }
    let tol = report.config.tol_or(1e-8);
    report.output("triangles", cases);
    report.check("corrected_holonomy", corrected, tol);
    report.check("uncorrected_modulus", modulus, tol);
    report.check("uncorrected_state_dependence", spread, tol);
    Ok(())
}

fn curvature(report: &mut Report) -> Result<()> {
    let trunc = report.config.trunc;
    let tau = I;
    let f = fock_curvature_fd(tau, trunc, 1e-3)?;
    let expect = 1.0 / (8.0 * tau.im * tau.im);
    let interior = trunc / 2;
    let mut worst: f64 = 0.0;
    for k in 0..interior {
        for l in 0..interior {
            let e = if k == l { expect } else { 0.0 };
            worst = worst.max((f[(k, l)] - c(e, 0.0)).norm());
        }
    }
    report.output("tau", tau);
    report.output("step", 1e-3);
    report.output("interior", interior);
    report.output("expected_diagonal", expect);
    report.check("curvature_deviation", worst, report.config.tol_or(1e-5));
    Ok(())
}

fn limits(report: &mut Report) -> Result<()> {
    let n = report.config.n.unwrap_or(1);
    let om = SiegelPoint::i_identity(n);
    let vac = CorrectedSection::new(
        PolyFockSection::from_gaussian(GaussianSection::vacuum(&om)),
        HalfFormFrame::kahler(&om),
    )?;
    let gamma = GeodesicSpec::standard(&vec![1.0; n]);
    let minus_t = [-2.0, -3.0, -4.0, -5.0, -6.0, -7.0, -8.0];
    let plus_t: Vec<f64> = minus_t.iter().map(|t| -t).collect();
    let lo = limit_transport_to_bargmann(&vac, &gamma, &minus_t, GridSpec::default())?;
    let hi = limit_transport_to_fourier(&vac, &gamma, &plus_t, GridSpec::default())?;
    let tol = report.config.tol_or(1e-3);
    report.check("bargmann_error_at_minus_8", lo.error_at(-8.0).unwrap_or(f64::NAN), tol);
    report.check("fourier_error_at_plus_8", hi.error_at(8.0).unwrap_or(f64::NAN), tol);
    report.check("bargmann_slope_rel_error", relative_slope_error(lo.slope, lo.predicted_slope), 0.2);
    report.check("fourier_slope_rel_error", relative_slope_error(hi.slope, hi.predicted_slope), 0.2);
    report.flag("bargmann_monotone", lo.monotone);
    report.flag("fourier_monotone", hi.monotone);
    report.output("bargmann", &lo);
    report.output("fourier", &hi);
    Ok(())
}

fn relative_slope_error(slope: f64, predicted: f64) -> f64 {
    (slope - predicted).abs() / predicted.abs()
}

fn random_transverse(rng: &mut ChaCha8Rng, n: usize) -> (LagrangianFrame, LagrangianFrame, LagrangianFrame) {
    loop {
        let l = LagrangianFrame::from_chart(random::symplectic(n, rng));
        let lp = LagrangianFrame::from_chart(random::symplectic(n, rng));
        let lpp = LagrangianFrame::from_chart(random::symplectic(n, rng));
        if l.transversality(&lp) > 0.05 && l.transversality(&lpp) > 0.05 && lp.transversality(&lpp) > 0.05 {
            return (l, lp, lpp);
        }
    }
}

fn identities(report: &mut Report, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = report.config.n.unwrap_or(1);
    let cases = if n == 1 { 50 } else { 4 };
    let mut worst = [0.0f64; 3];
    for _ in 0..cases {
        let j = random::siegel_point(n, rng);
        let jp = random::siegel_point(n, rng);
        let (l, lp, lpp) = random_transverse(rng, n);
        let r = composition_identities_check(&j, &jp, &l, &lp, &lpp)?;
        worst[0] = worst[0].max(r.bargmann_transport);
        worst[1] = worst[1].max(r.fourier_via_kahler);
        worst[2] = worst[2].max(r.fourier_composition);
    }
    let q = -CMat::identity(n, n) * c(1.0, -0.2);
    let p = random::complex_vector(n, 0.5, rng);
    let s = LagrangianSection::gaussian(LagrangianFrame::minus(n), q, p, c(0.0, 0.0))?;
    let psi = CorrectedBoundarySection::new(s, HalfFormFrame::real(RealHalfForm::dx(n)))?;
    let j = random::siegel_point(n, rng);
    let direct = boundary_distance(
        &fourier(&psi)?,
        &fourier_via_kahler(&psi, &j, &RealHalfForm::dy(n))?,
        if n == 1 { 48 } else { 24 },
    )?;
    let tol = report.config.tol_or(1e-8);
    report.output("configurations", cases);
    report.check("bargmann_then_transport", worst[0], tol);
    report.check("fourier_via_kahler", worst[1], tol);
    report.check("fourier_composition", worst[2], tol);
    report.check("explicit_fourier_kernel", direct, tol);
    Ok(())
}
