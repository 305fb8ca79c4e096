//! Tensor-product Gauss–Hermite quadrature over `V = ℝᵈ`, used as an
//! independent check on every closed-form Gaussian integral.
//!
//! The grid is rescaled to a caller-supplied Gaussian width: with
//! `v = C t`, `C = (A/2)^{-1/2}`, an integrand decaying like `exp(−½vᵀAv)`
//! becomes `e^{−|t|²}` times a smooth factor.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, spd_inv_sqrt, CMat, RMat};

pub const DEFAULT_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per dimension.
    pub nodes: usize,
    /// Relative change tolerated between `nodes` and `nodes/2`.
    pub tolerance: f64,
    pub check_refinement: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: DEFAULT_NODES,
            tolerance: 1e-6,
            check_refinement: true,
        }
    }
}

/// Nodes `tᵢ` and scaled weights `wᵢ e^{tᵢ²}` for `∫ f(t) e^{−t²} dt`.
///
/// Nodes come from the Jacobi matrix (Golub–Welsch); the scaled weights are
/// `1/Σₖ hₖ(tᵢ)²` over orthonormal Hermite functions, which stays accurate in
/// the tails where the raw weights underflow.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = RMat::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let weights = nodes
        .iter()
        .map(|&t| {
            let mut h_prev = 0.0;
            let mut h = std::f64::consts::PI.powf(-0.25) * (-0.5 * t * t).exp();
            let mut sum = h * h;
            for k in 0..n - 1 {
                let next = (2.0 / (k + 1) as f64).sqrt() * t * h - (k as f64 / (k + 1) as f64).sqrt() * h_prev;
                h_prev = h;
                h = next;
                sum += h * h;
            }
            1.0 / sum
        })
        .collect();
    (nodes, weights)
}

fn tensor_sum<F>(f: &F, width: &RMat, nodes: usize) -> Complex64
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let d = width.nrows();
    let scale = spd_inv_sqrt(&(width * 0.5));
    let jac = scale.determinant() / (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0);
    let (t, w) = gauss_hermite(nodes);
    let total = nodes.pow(d as u32);
    let outer = nodes;
    let inner = total / outer;
    // One block per leading node, each summed sequentially, then combined in
    // index order: the result does not depend on thread scheduling.
    let partial: Vec<Complex64> = (0..outer)
        .into_par_iter()
        .map(|i0| {
            let mut acc = c(0.0, 0.0);
            let mut idx = vec![0usize; d];
            let mut tv = vec![0.0; d];
            let mut v = vec![0.0; d];
            for rest in 0..inner {
                idx[0] = i0;
                let mut r = rest;
                for slot in idx.iter_mut().skip(1) {
                    *slot = r % nodes;
                    r /= nodes;
                }
                let mut weight = 1.0;
                for k in 0..d {
                    tv[k] = t[idx[k]];
                    weight *= w[idx[k]];
                }
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi = (0..d).map(|k| scale[(i, k)] * tv[k]).sum();
                }
                acc += f(&v) * weight;
            }
            acc
        })
        .collect();
    partial.into_iter().fold(c(0.0, 0.0), |a, b| a + b) * jac
}

/// `∫_V f ε` with `ε = dv/(2π)^{d/2}`, where `width` is a positive-definite
/// `A` describing the decay `exp(−½vᵀAv)` of `f`.
///
/// With refinement checking on, the grid with half the nodes is also
/// evaluated and `GridTooCoarse` is returned if the two disagree by more
/// than `tolerance` relative to the result.
pub fn quadrature_integrate<F>(f: F, width: &RMat, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    if spec.nodes < 2 {
        return Err(Error::InvalidInput("quadrature needs at least two nodes".into()));
    }
    let fine = tensor_sum(&f, width, spec.nodes);
    if spec.check_refinement {
        let coarse = tensor_sum(&f, width, spec.nodes / 2);
        let change = (fine - coarse).norm() / fine.norm().max(1e-300);
        if change > spec.tolerance {
            return Err(Error::GridTooCoarse { change, tolerance: spec.tolerance });
        }
    }
    Ok(fine)
}

/// Grid width for `∫ f₁̄ f₂` read off the decay of the two quadratic forms.
pub fn width_for_pair(q1: &CMat, q2: &CMat) -> RMat {
    let m = -(q1.map(|z| z.re) + q2.map(|z| z.re));
    (&m + m.transpose()) * 0.5
}

/// `∫ conj(f₁) f₂ ε` by quadrature from pointwise evaluators.
pub fn oracle_inner<F1, F2>(f1: F1, f2: F2, width: &RMat, spec: &QuadratureSpec) -> Result<Complex64>
where
    F1: Fn(&[f64]) -> Complex64 + Sync,
    F2: Fn(&[f64]) -> Complex64 + Sync,
{
    quadrature_integrate(|v: &[f64]| f1(v).conj() * f2(v), width, spec)
}
