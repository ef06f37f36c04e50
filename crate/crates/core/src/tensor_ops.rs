//! Per-mode symmetric tensor calculus on the flat product background.
//!
//! On the flat torus all bulk operators block-diagonalise over Fourier
//! modes: spatial derivatives become multiplication by i*xi and only the
//! Euclidean time s stays discretized. A symmetric (0,2)-tensor mode is ten
//! complex profiles of s in the fixed component order
//!
//!   ss, s1, s2, s3, 11, 22, 33, 12, 13, 23
//!
//! and every matrix in the spectral module indexes this order.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::GeometrySpec;
use crate::stencil::{self, MIN_POINTS};

/// Number of independent components of a symmetric (0,2)-tensor in 4d.
pub const NCOMP2: usize = 10;
/// Components of a (0,1)-tensor: s, 1, 2, 3.
pub const NCOMP1: usize = 4;
/// Index pairs of the six stored entries of a symmetric 3x3 block.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Position of the symmetric entry (i,j) within the six stored entries.
pub fn sym_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        (1, 2) => 5,
        _ => panic!("invalid symmetric index pair ({i},{j})"),
    }
}

/// One Fourier mode of the torus: integer triple n and xi_i = 2 pi n_i / L_i.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeIndex {
    pub n: [i32; 3],
    pub xi: [f64; 3],
}

impl ModeIndex {
    pub fn new(n: [i32; 3], geom: &GeometrySpec) -> Self {
        let mut xi = [0.0; 3];
        for i in 0..3 {
            xi[i] = 2.0 * std::f64::consts::PI * n[i] as f64 / geom.periods[i];
        }
        ModeIndex { n, xi }
    }

    /// A mode with a raw frequency vector (used by the half-space model).
    pub fn from_xi(xi: [f64; 3]) -> Self {
        ModeIndex { n: [0; 3], xi }
    }

    pub fn xi_norm_sq(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum()
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi_norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.xi_norm_sq() == 0.0
    }
}

/// Uniform grid on [-T, T].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    pub m: usize,
    pub h: f64,
    pub s: Vec<f64>,
    pub half_width: f64,
}

impl Grid1D {
    pub fn new(half_width: f64, m: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("half-width must be positive, got {half_width}")));
        }
        if m < MIN_POINTS {
            return Err(Error::InvalidParameter(format!("grid needs at least {MIN_POINTS} points, got {m}")));
        }
        let h = 2.0 * half_width / (m - 1) as f64;
        let mut s: Vec<f64> = (0..m).map(|i| -half_width + i as f64 * h).collect();
        // pin the endpoints exactly
        s[0] = -half_width;
        s[m - 1] = half_width;
        Ok(Grid1D { m, h, s, half_width })
    }

    /// Grid index of the boundary point at s = side * T.
    pub fn boundary_index(&self, upper: bool) -> usize {
        if upper {
            self.m - 1
        } else {
            0
        }
    }
}

/// One Fourier mode of a (0,1)-tensor: profiles (omega_s, omega_1, omega_2, omega_3).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTensor1 {
    comps: [Vec<C64>; NCOMP1],
}

impl ModeTensor1 {
    pub fn zeros(m: usize) -> Self {
        ModeTensor1 { comps: std::array::from_fn(|_| vec![C64::ZERO; m]) }
    }

    pub fn from_components(comps: [Vec<C64>; NCOMP1]) -> Self {
        let m = comps[0].len();
        assert!(comps.iter().all(|c| c.len() == m), "profile lengths differ");
        ModeTensor1 { comps }
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn omega_s(&self) -> &[C64] {
        &self.comps[0]
    }

    /// Spatial component i in 0..3.
    pub fn omega_sigma(&self, i: usize) -> &[C64] {
        &self.comps[1 + i]
    }

    pub fn comp(&self, c: usize) -> &[C64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.comps[c]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|p| p.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }
}

/// One Fourier mode of a symmetric (0,2)-tensor: ten profiles in the fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTensor2 {
    comps: [Vec<C64>; NCOMP2],
}

impl ModeTensor2 {
    pub fn zeros(m: usize) -> Self {
        ModeTensor2 { comps: std::array::from_fn(|_| vec![C64::ZERO; m]) }
    }

    pub fn from_components(comps: [Vec<C64>; NCOMP2]) -> Self {
        let m = comps[0].len();
        assert!(comps.iter().all(|c| c.len() == m), "profile lengths differ");
        ModeTensor2 { comps }
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn u_ss(&self) -> &[C64] {
        &self.comps[0]
    }

    /// Mixed component (s, i) with i in 0..3.
    pub fn u_s_sigma(&self, i: usize) -> &[C64] {
        &self.comps[1 + i]
    }

    /// Tangential component (i, j); symmetric lookup.
    pub fn u_sigma_sigma(&self, i: usize, j: usize) -> &[C64] {
        &self.comps[4 + sym_index(i, j)]
    }

    pub fn comp(&self, c: usize) -> &[C64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.comps[c]
    }

    /// Spatial trace tr_delta(u_SigmaSigma) at grid index `idx` (flat slice metric).
    pub fn trace_sigma_at(&self, idx: usize) -> C64 {
        self.comps[4][idx] + self.comps[5][idx] + self.comps[6][idx]
    }

    /// Full metric trace tr_g(u) = u_ss + tr_delta(u_SigmaSigma) at grid index `idx`.
    pub fn trace_g_at(&self, idx: usize) -> C64 {
        self.comps[0][idx] + self.trace_sigma_at(idx)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|p| p.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// Flatten to a vector of length 10*M, point-major: entry 10*j + c is
    /// component c at grid point j. The spectral module uses this layout so
    /// the assembled operator is banded.
    pub fn flatten(&self) -> Vec<C64> {
        let m = self.len();
        let mut out = vec![C64::ZERO; NCOMP2 * m];
        for c in 0..NCOMP2 {
            for j in 0..m {
                out[NCOMP2 * j + c] = self.comps[c][j];
            }
        }
        out
    }

    pub fn from_flat(flat: &[C64], m: usize) -> Self {
        assert_eq!(flat.len(), NCOMP2 * m);
        let mut t = Self::zeros(m);
        for c in 0..NCOMP2 {
            for j in 0..m {
                t.comps[c][j] = flat[NCOMP2 * j + c];
            }
        }
        t
    }
}

fn check_same_grid(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("profiles have {a} and {b} points")));
    }
    Ok(())
}

/// Trace reversal I u = u - (1/2) tr_g(u) g, applied pointwise in s.
///
/// On the flat background g has components (1, 0, 0, 0, 1, 1, 1, 0, 0, 0).
pub fn trace_reverse(u: &ModeTensor2) -> ModeTensor2 {
    let m = u.len();
    let mut out = u.clone();
    for j in 0..m {
        let half_tr = 0.5 * u.trace_g_at(j);
        out.comps[0][j] -= half_tr;
        for d in 4..7 {
            out.comps[d][j] -= half_tr;
        }
    }
    out
}

/// Divergence (delta u)_mu = -2 nabla^lambda u_{lambda mu} of a mode.
pub fn divergence(u: &ModeTensor2, mode: &ModeIndex, grid: &Grid1D) -> ModeTensor1 {
    let m = u.len();
    let mut out = ModeTensor1::zeros(m);
    let i_xi: [C64; 3] = std::array::from_fn(|k| C64::new(0.0, mode.xi[k]));

    let du_ss = stencil::deriv1(u.u_ss(), grid.h);
    for j in 0..m {
        let mut acc = du_ss[j];
        for k in 0..3 {
            acc += i_xi[k] * u.u_s_sigma(k)[j];
        }
        out.comps[0][j] = -2.0 * acc;
    }
    for i in 0..3 {
        let du_si = stencil::deriv1(u.u_s_sigma(i), grid.h);
        for j in 0..m {
            let mut acc = du_si[j];
            for k in 0..3 {
                acc += i_xi[k] * u.u_sigma_sigma(k, i)[j];
            }
            out.comps[1 + i][j] = -2.0 * acc;
        }
    }
    out
}

/// Symmetrised gradient (d omega)_{alpha beta} = (1/2)(nabla_a omega_b + nabla_b omega_a).
pub fn sym_gradient(omega: &ModeTensor1, mode: &ModeIndex, grid: &Grid1D) -> ModeTensor2 {
    let m = omega.len();
    let mut out = ModeTensor2::zeros(m);
    let i_xi: [C64; 3] = std::array::from_fn(|k| C64::new(0.0, mode.xi[k]));

    let dw_s = stencil::deriv1(omega.omega_s(), grid.h);
    let dw_sig: [Vec<C64>; 3] = std::array::from_fn(|i| stencil::deriv1(omega.omega_sigma(i), grid.h));
    for j in 0..m {
        out.comps[0][j] = dw_s[j];
        for i in 0..3 {
            out.comps[1 + i][j] = 0.5 * (dw_sig[i][j] + i_xi[i] * omega.omega_s()[j]);
        }
        for (p, &(i, k)) in SYM_PAIRS.iter().enumerate() {
            out.comps[4 + p][j] =
                0.5 * (i_xi[i] * omega.omega_sigma(k)[j] + i_xi[k] * omega.omega_sigma(i)[j]);
        }
    }
    out
}

/// Gauge potential K omega = I(d omega); gauge transformations act as u -> u + K omega.
pub fn gauge_potential(omega: &ModeTensor1, mode: &ModeIndex, grid: &Grid1D) -> ModeTensor2 {
    trace_reverse(&sym_gradient(omega, mode, grid))
}

/// D1 omega = (delta K) omega = -Delta_1 omega - Lambda omega; on the flat
/// background this is componentwise -d^2/ds^2 + |xi|^2 (with Lambda = 0).
pub fn apply_d1(omega: &ModeTensor1, mode: &ModeIndex, grid: &Grid1D, geom: &GeometrySpec) -> ModeTensor1 {
    assert!(geom.is_flat(), "per-mode bulk operators require the flat background");
    let m = omega.len();
    let xi2 = mode.xi_norm_sq();
    let mut out = ModeTensor1::zeros(m);
    for c in 0..NCOMP1 {
        let d2 = stencil::deriv2(omega.comp(c), grid.h);
        for j in 0..m {
            out.comps[c][j] = -d2[j] + (xi2 - geom.lambda) * omega.comp(c)[j];
        }
    }
    out
}

/// Curvature hook of D2: 2 Riem_gamma acting on the tangential block.
/// The flat torus has Riem = 0; curved extensions replace this one function.
fn riemann_term(_u: &ModeTensor2, _j: usize, _p: usize) -> C64 {
    C64::ZERO
}

/// D2 u = (-Delta_2 + 2 Riem_g) u; componentwise -d^2/ds^2 + |xi|^2 on the
/// flat background (Gauss-Codazzi block decomposition with k = 0).
pub fn apply_d2(u: &ModeTensor2, mode: &ModeIndex, grid: &Grid1D, geom: &GeometrySpec) -> ModeTensor2 {
    assert!(geom.is_flat(), "per-mode bulk operators require the flat background");
    let m = u.len();
    let xi2 = mode.xi_norm_sq();
    let mut out = ModeTensor2::zeros(m);
    for c in 0..NCOMP2 {
        let d2 = stencil::deriv2(u.comp(c), grid.h);
        for j in 0..m {
            out.comps[c][j] = -d2[j] + xi2 * u.comp(c)[j];
            if c >= 4 {
                out.comps[c][j] += 2.0 * riemann_term(u, j, c - 4);
            }
        }
    }
    out
}

/// Trapezoid weights of the grid.
fn trapezoid_weights(grid: &Grid1D) -> Vec<f64> {
    let mut w = vec![grid.h; grid.m];
    w[0] = 0.5 * grid.h;
    w[grid.m - 1] = 0.5 * grid.h;
    w
}

/// The V2 inner product of two modes,
///
///   (u,v) = 2 int ds int_Sigma ( conj(u_ss) v_ss + 2 delta^{-1}(u_sS, v_sS)
///           + (delta^{-1})^(x)2 (u_SS, v_SS) ) vol,
///
/// evaluated with trapezoid quadrature in s. Pairing a mode e^{i xi x}
/// against itself integrates to the torus volume L1 L2 L3 (Parseval), which
/// multiplies the s-integral.
///
/// Normalization: the global factor is 2 = k! for symmetric (0,k)-tensors
/// with k = 2, written out together with the block weights (1, 2, 1) of the
/// ss / sS / SS decomposition; rescaling it does not affect any symmetry or
/// orthogonality statement.
pub fn inner_product_v2(u: &ModeTensor2, v: &ModeTensor2, geom: &GeometrySpec, grid: &Grid1D) -> Result<C64> {
    check_same_grid(u.len(), v.len())?;
    check_same_grid(u.len(), grid.m)?;
    let w = trapezoid_weights(grid);
    let mut acc = C64::ZERO;
    for j in 0..grid.m {
        let mut point = u.u_ss()[j].conj() * v.u_ss()[j];
        for i in 0..3 {
            point += 2.0 * u.u_s_sigma(i)[j].conj() * v.u_s_sigma(i)[j];
        }
        for i in 0..3 {
            for k in 0..3 {
                point += u.u_sigma_sigma(i, k)[j].conj() * v.u_sigma_sigma(i, k)[j];
            }
        }
        acc += w[j] * point;
    }
    Ok(2.0 * geom.torus_volume() * acc)
}

/// The I-weighted pairing (u, I v)_{V2}; D2 with Anderson-type conditions is
/// symmetric with respect to this pairing rather than the plain one.
pub fn inner_product_i(u: &ModeTensor2, v: &ModeTensor2, geom: &GeometrySpec, grid: &Grid1D) -> Result<C64> {
    inner_product_v2(u, &trace_reverse(v), geom, grid)
}
