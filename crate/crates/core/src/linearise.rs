//! Mean-curvature linearisation on warped backgrounds, verified against an
//! exact finite-difference oracle.
//!
//! For a one-parameter family of metrics g + lambda h on [-T,T] x T^3 the
//! mean curvature of the slice {s0} x T^3 is computed two ways: exactly,
//! from the perturbed Christoffel symbols and unit normal, and to first
//! order from the closed-form linearisation
//!
//!   grad^i h_{i0} - (1/2) d/ds tr_gamma(h^T) - h^{ij} k_ij + (1/2) tr_gamma(k) h_00 ,
//!
//! whose last term drops on flat slices but is essential on warped ones.
//! Richardson extrapolation of the difference quotients pins the comparison.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::geometry::GeometrySpec;
use crate::tensor_ops::sym_index;

/// Value of a scalar field at the evaluation point together with its first
/// s- and spatial derivatives.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarJet {
    pub value: f64,
    pub d_s: f64,
    pub d_x: [f64; 3],
}

impl ScalarJet {
    pub fn constant(value: f64) -> Self {
        ScalarJet { value, d_s: 0.0, d_x: [0.0; 3] }
    }
}

/// A symmetric metric perturbation h at one point, given as jets.
///
/// Components follow the background block convention: `h00` is h(ds, ds),
/// `h0i` the mixed parts and `hij` the six tangential entries in the fixed
/// symmetric order (11, 22, 33, 12, 13, 23).
#[derive(Clone, Debug, Default)]
pub struct Perturbation {
    pub h00: ScalarJet,
    pub h0i: [ScalarJet; 3],
    pub hij: [ScalarJet; 6],
}

impl Perturbation {
    /// h = f ds (x) ds with constant f.
    pub fn normal_block(f: f64) -> Self {
        Perturbation { h00: ScalarJet::constant(f), ..Default::default() }
    }

    fn h_jet(&self, mu: usize, nu: usize) -> ScalarJet {
        match (mu.min(nu), mu.max(nu)) {
            (0, 0) => self.h00,
            (0, j) => self.h0i[j - 1],
            (i, j) => self.hij[sym_index(i - 1, j - 1)],
        }
    }
}

/// Report of one finite-difference linearisation check.
#[derive(Clone, Debug)]
pub struct LinearisationReport {
    /// Closed-form linearisation (with the h00 term included).
    pub formula_value: f64,
    /// (lambda, difference quotient) pairs, in the order supplied.
    pub fd_values: Vec<(f64, f64)>,
    /// Richardson (Neville) extrapolation of the quotients to lambda -> 0.
    pub richardson_limit: f64,
    /// |formula_value - richardson_limit|.
    pub discrepancy: f64,
    /// The (1/2) tr_gamma(k) h_00 contribution alone.
    pub dropped_term_value: f64,
}

struct Background {
    a: f64,
    da: f64,
    trace_k: f64,
}

fn background(geom: &GeometrySpec, s0: f64) -> Result<Background> {
    let slice = geom.slice_data(s0)?;
    let a = (geom.warp.a)(s0);
    let da = (geom.warp.da)(s0);
    Ok(Background { a, da, trace_k: slice.trace_k })
}

/// Exact mean curvature tr_{gamma-hat}(k-hat) of the slice {s0} x T^3 in the
/// metric g + lambda h.
///
/// The second fundamental form is built from the perturbed Christoffel
/// symbols and the perturbed unit normal, k-hat_ij = Gamma-hat^0_ij
/// (g-hat^00)^{-1/2}; all metric derivatives are supplied analytically.
pub fn mean_curvature_exact(
    geom: &GeometrySpec,
    pert: &Perturbation,
    lambda: f64,
    s0: f64,
) -> Result<f64> {
    let bg = background(geom, s0)?;
    let a2 = bg.a * bg.a;

    // perturbed metric at the point
    let mut g_hat = Matrix4::<f64>::zeros();
    g_hat[(0, 0)] = 1.0;
    for i in 1..4 {
        g_hat[(i, i)] = a2;
    }
    for mu in 0..4 {
        for nu in 0..4 {
            g_hat[(mu, nu)] += lambda * pert.h_jet(mu, nu).value;
        }
    }
    if nalgebra::Cholesky::new(g_hat).is_none() {
        return Err(Error::DegenerateMetric(format!(
            "g + lambda h is not positive definite at lambda = {lambda}"
        )));
    }
    let g_inv = g_hat
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric(format!("metric not invertible at lambda = {lambda}")))?;
    if g_inv[(0, 0)] <= 0.0 {
        return Err(Error::DegenerateMetric(format!("g-hat^00 <= 0 at lambda = {lambda}")));
    }

    // first derivatives of the perturbed metric: direction 0 is d/ds
    let dg = |dir: usize, mu: usize, nu: usize| -> f64 {
        let jet = pert.h_jet(mu, nu);
        let pert_part = lambda * if dir == 0 { jet.d_s } else { jet.d_x[dir - 1] };
        let bg_part = if dir == 0 && mu == nu && mu >= 1 { 2.0 * bg.a * bg.da } else { 0.0 };
        bg_part + pert_part
    };

    // Gamma-hat^0_ij = (1/2) g-hat^{0 mu} (d_i g_{mu j} + d_j g_{mu i} - d_mu g_{ij})
    let normal_norm = g_inv[(0, 0)].powf(-0.5);
    let mut trace = 0.0;
    for i in 1..4 {
        for j in 1..4 {
            let mut gamma0 = 0.0;
            for mu in 0..4 {
                gamma0 += 0.5 * g_inv[(0, mu)] * (dg(i, mu, j) + dg(j, mu, i) - dg(mu, i, j));
            }
            let k_hat = gamma0 * normal_norm;
            trace += g_inv[(i, j)] * k_hat;
        }
    }
    Ok(trace)
}

/// Closed-form first-order variation of the mean curvature.
///
/// Covariant derivatives use the analytic Christoffel symbols of the warped
/// background (Gamma^0_ij = k_ij, Gamma^i_0j = (a'/a) delta^i_j); the
/// `include_h00_term` flag controls the (1/2) tr_gamma(k) h_00 term whose
/// omission breaks gauge invariance off the flat background.
pub fn linearised_mean_curvature(
    geom: &GeometrySpec,
    pert: &Perturbation,
    s0: f64,
    include_h00_term: bool,
) -> Result<f64> {
    let bg = background(geom, s0)?;
    let inv_a2 = 1.0 / (bg.a * bg.a);
    let tr_h: f64 = (0..3).map(|i| inv_a2 * pert.hij[i].value).sum();

    // grad^i h_{i0} = gamma^{ij} d_j h_{i0} - tr(k) h_00 - (a'/a) tr_gamma(h^T)
    let mut div_h0: f64 = (0..3).map(|i| inv_a2 * pert.h0i[i].d_x[i]).sum();
    div_h0 += -bg.trace_k * pert.h00.value - (bg.da / bg.a) * tr_h;

    // d/ds (gamma^{ij} h_ij) with the s-dependence of gamma included
    let ds_tr: f64 =
        (0..3).map(|i| inv_a2 * pert.hij[i].d_s).sum::<f64>() - 2.0 * (bg.da / bg.a) * tr_h;

    // h^{ij} k_ij = -(a'/a) tr_gamma(h^T)
    let h_dot_k = -(bg.da / bg.a) * tr_h;

    let mut value = div_h0 - 0.5 * ds_tr - h_dot_k;
    if include_h00_term {
        value += 0.5 * bg.trace_k * pert.h00.value;
    }
    Ok(value)
}

/// The (1/2) tr_gamma(k) h_00 contribution on its own.
pub fn h00_term(geom: &GeometrySpec, pert: &Perturbation, s0: f64) -> Result<f64> {
    let bg = background(geom, s0)?;
    Ok(0.5 * bg.trace_k * pert.h00.value)
}

/// Neville polynomial extrapolation of (x_i, y_i) to x = 0.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut tab = ys.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            tab[i] = (xs[i + k] * tab[i] - xs[i] * tab[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    tab[0]
}

/// Compares the finite-difference quotients of the exact mean curvature
/// against the closed-form linearisation.
pub fn fd_linearisation_check(
    geom: &GeometrySpec,
    pert: &Perturbation,
    s0: f64,
    lambdas: &[f64],
) -> Result<LinearisationReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("need at least one lambda".into()));
    }
    for w in lambdas.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidParameter(format!(
                "lambdas must be strictly decreasing, got {} before {}",
                w[0], w[1]
            )));
        }
    }
    if *lambdas.last().unwrap() <= 0.0 {
        return Err(Error::InvalidParameter("lambdas must be positive".into()));
    }

    let base = mean_curvature_exact(geom, pert, 0.0, s0)?;
    let mut fd_values = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mc = mean_curvature_exact(geom, pert, lambda, s0).map_err(|e| match e {
            Error::DegenerateMetric(msg) => {
                Error::DegenerateMetric(format!("{msg} (offending lambda {lambda})"))
            }
            other => other,
        })?;
        fd_values.push((lambda, (mc - base) / lambda));
    }

    let xs: Vec<f64> = fd_values.iter().map(|&(l, _)| l).collect();
    let ys: Vec<f64> = fd_values.iter().map(|&(_, q)| q).collect();
    let richardson_limit = neville_at_zero(&xs, &ys);
    let formula_value = linearised_mean_curvature(geom, pert, s0, true)?;
    let dropped_term_value = h00_term(geom, pert, s0)?;

    Ok(LinearisationReport {
        formula_value,
        fd_values,
        richardson_limit,
        discrepancy: (formula_value - richardson_limit).abs(),
        dropped_term_value,
    })
}

/// Traceless projection h_ij - (1/3) tr_gamma(h) gamma_ij of a tangential
/// perturbation (the linearised fixed-conformal-class condition).
pub fn linearised_conformal_class(hij: &[f64; 6], geom: &GeometrySpec, s0: f64) -> Result<[f64; 6]> {
    let bg = background(geom, s0)?;
    let a2 = bg.a * bg.a;
    let tr: f64 = (0..3).map(|i| hij[i] / a2).sum();
    let mut out = *hij;
    for d in 0..3 {
        out[d] -= tr / 3.0 * a2;
    }
    Ok(out)
}
