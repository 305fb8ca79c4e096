use anyhow::{bail, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use siegel_quant::linalg::{c, max_abs_diff, to_rows, CVec};
use siegel_quant::sections::{coherent_state, GaussianSection};
use siegel_quant::siegel::{geodesic_boundary_limits, geodesic_between, GeodesicSpec, SiegelPoint};
use siegel_quant::transport::{
    bogoliubov_scale, gaussian_amplitudes, section_distance, transport_corrected, transport_kernel_apply,
    transport_ode_path, transport_section, triangle_holonomy, truncated_relative_error, Kernel,
};

use crate::report::{Report, RunConfig};

/// Input for `geodesic`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GeodesicInput {
    pub from: SiegelPoint,
    pub to: SiegelPoint,
}

fn point_gap(a: &SiegelPoint, b: &SiegelPoint) -> f64 {
    max_abs_diff(&a.as_complex(), &b.as_complex())
}

pub fn geodesic(input: GeodesicInput, config: RunConfig) -> Result<Report> {
    let mut report = Report::new("geodesic", config);
    report.inputs = serde_json::to_value(&input)?;
    let geo = geodesic_between(&input.from, &input.to)?;
    let samples = (0..=4)
        .map(|k| {
            let t = k as f64 / 4.0;
            Ok(Sample { t, omega: geo.eval(t)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let residual = point_gap(&geo.eval(0.0)?, &input.from)
        .max(point_gap(&geo.eval(1.0)?, &input.to))
        .max(geo.g.relation_residual());
    let (minus, plus) = geodesic_boundary_limits(&geo);
    report.output("g", &geo.g);
    report.output("rates", &geo.rates);
    report.output("degenerate", geo.degenerate);
    report.output("length", geo.length());
    report.output("samples", &samples);
    report.output("boundary_minus", minus.map(|l| to_rows(&l.basis())));
    report.output("boundary_plus", plus.map(|l| to_rows(&l.basis())));
    report.check("round_trip", residual, report.config.tol_or(1e-10));
    Ok(report)
}

#[derive(Debug, Serialize)]
struct Sample {
    t: f64,
    omega: SiegelPoint,
}

/// The state to transport: a coherent state `c_α` on `from`, the vacuum, or
/// an explicit Gaussian section (whose frame must be `from`).
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Vacuum,
    Coherent(Vec<Complex64>),
    Section(GaussianSection),
}

/// Input for `transport`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TransportInput {
    pub state: StateSpec,
    pub from: SiegelPoint,
    pub to: SiegelPoint,
    /// Third corner for the triangle holonomy check.
    #[serde(default)]
    pub via: Option<SiegelPoint>,
    /// Input half-form phase for corrected transport.
    #[serde(default)]
    pub phase: Option<Complex64>,
}

pub struct TransportFlags {
    pub corrected: bool,
    pub kernel: Option<Kernel>,
    pub ode_check: bool,
    pub ode_steps: usize,
}

fn build_state(input: &TransportInput) -> Result<GaussianSection> {
    let n = input.from.dim();
    if input.to.dim() != n {
        bail!("`from` has dimension {n} but `to` has dimension {}", input.to.dim());
    }
    match &input.state {
        StateSpec::Vacuum => Ok(GaussianSection::vacuum(&input.from)),
        StateSpec::Coherent(alpha) => {
            if alpha.len() != n {
                bail!("coherent amplitude has {} entries, expected {n}", alpha.len());
            }
            Ok(coherent_state(&CVec::from_vec(alpha.clone()), &input.from))
        }
        StateSpec::Section(s) => {
            if !s.frame.approx_eq(&input.from, 1e-12) {
                bail!("section frame differs from `from`");
            }
            Ok(s.clone())
        }
    }
}

/// `τ(t)` and `τ̇(t)` along `g·(i e^{2λt})` for n = 1.
fn scalar_geodesic_path(geo: &GeodesicSpec) -> impl Fn(f64) -> (Complex64, Complex64) {
    let (a, b, cc, d) = (geo.g.a()[(0, 0)], geo.g.b()[(0, 0)], geo.g.c()[(0, 0)], geo.g.d()[(0, 0)]);
    let lambda = geo.rates[0];
    move |t: f64| {
        let w = c(0.0, (2.0 * lambda * t).exp());
        let den = w * cc + d;
        let tau = (w * a + b) / den;
        let wdot = w * (2.0 * lambda);
        (tau, wdot / (den * den))
    }
}

pub fn transport(input: TransportInput, flags: TransportFlags, config: RunConfig) -> Result<Report> {
    let mut report = Report::new("transport", config);
    report.inputs = serde_json::to_value(&input)?;
    let psi = build_state(&input)?;
    let n = psi.dim();
    let tol = report.config.tol_or(1e-8);
    let nodes = report.config.nodes;

    let out = transport_section(&psi, &input.to)?;
    let scale = bogoliubov_scale(&input.from, &input.to);
    report.output("section", &out);
    report.output("scale", scale);

    if flags.corrected {
        let phase = input.phase.unwrap_or(c(1.0, 0.0));
        let r = transport_corrected(&psi, phase, &input.to)?;
        report.output("halfform_phase", r.halfform.phase);
        report.output("transport_phase", r.phase_used);
        report.check("corrected_vs_projection", r.consistency, tol);
    }

    if let Some(kernel) = flags.kernel {
        let via = transport_kernel_apply(&psi.to_vfunc(), &psi.frame, &input.to, kernel)?
            .into_gaussian()
            .ok_or_else(|| anyhow::anyhow!("kernel output is not a pure Gaussian"))?;
        let d = section_distance(&via, &out, nodes)? / psi.norm()?;
        report.output("kernel", kernel);
        report.check("kernel_vs_closed_form", d, tol);
    }

    if flags.ode_check {
        if n != 1 {
            bail!("--ode-check needs n = 1, got n = {n}");
        }
        let geo = geodesic_between(&input.from, &input.to)?;
        let work = 8 * report.config.trunc;
        let a0 = gaussian_amplitudes(&psi, work);
        let a1 = transport_ode_path(&a0, scalar_geodesic_path(&geo), 0.0, 1.0, flags.ode_steps, |_, _| {})?;
        let exact = gaussian_amplitudes(&out, work);
        let err = truncated_relative_error(&a1, &exact, report.config.trunc);
        report.output("ode_steps", flags.ode_steps);
        report.output("ode_working_modes", work);
        report.check("ode_vs_closed_form", err, report.config.tol_or(1e-6));
    }

    if let Some(via) = &input.via {
        if via.dim() != n {
            bail!("`via` has dimension {}, expected {n}", via.dim());
        }
        let corrected = triangle_holonomy(&psi, &input.to, via, true)?;
        let plain = triangle_holonomy(&psi, &input.to, via, false)?;
        report.output("holonomy_corrected", corrected.scalar);
        report.output("holonomy_uncorrected", plain.scalar);
        report.check("corrected_holonomy_minus_one", (corrected.scalar - c(1.0, 0.0)).norm(), tol);
        report.check("uncorrected_holonomy_modulus", (plain.scalar.norm() - 1.0).abs(), tol);
        report.check("holonomy_shape", corrected.shape_residual.max(plain.shape_residual), tol);
    }
    Ok(report)
}
