//! Boundary-condition families at s = +/-T and their discrete realisations.
//!
//! Three kinds are supported: Dirichlet (all ten components prescribed),
//! the linearised Anderson conditions, and the general conformal family
//!
//!   (a)  d/ds u_ss - div_S u_sS - tr(k) u_ss + <k, u_SS> = 0
//!   (b)  d/ds u_sS - (1/2) div_S u_SS - tr(k) u_sS = 0
//!   (c)  u_SS - (1/3) tr(u_SS) gamma = 0
//!   (d)  C1 (u_ss + tr(u_SS)/3)
//!        + C2 (d/ds tr(u_SS) - d/ds u_ss - (4/3) tr(u_SS) tr(k))
//!        + <V, grad_S (u_ss + tr(u_SS)/3)>
//!        + <S, d/ds u_SS - 2 sym-grad_S u_sS - gamma (d/ds u_ss + (2/3) tr(u_SS) tr(k))> = 0
//!
//! with per-side scalar coefficients C1, C2, a covector V and a symmetric
//! S not proportional to the slice metric whenever C2 vanishes. Anderson is
//! the special case C1 = 3 tr(k), C2 = 1, V = S = 0. All traces and index
//! raisings use the slice metric gamma_s, so warped backgrounds are
//! supported in residual evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::GeometrySpec;
use crate::stencil;
use crate::tensor_ops::{sym_index, Grid1D, ModeIndex, ModeTensor2, NCOMP2, SYM_PAIRS};

/// Which boundary component, s = -T or s = +T.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Lower, Side::Upper];

    pub fn sign(self) -> f64 {
        match self {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        }
    }

    pub fn grid_index(self, grid: &Grid1D) -> usize {
        grid.boundary_index(self == Side::Upper)
    }

    pub fn s_value(self, geom: &GeometrySpec) -> f64 {
        self.sign() * geom.half_width
    }
}

/// Coefficients of the scalar condition (d) on one boundary side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub v: [f64; 3],
    /// Symmetric matrix S in the fixed order (11, 22, 33, 12, 13, 23).
    pub s_matrix: [f64; 6],
}

impl GeneralCoefficients {
    pub fn new(c1: f64, c2: f64, v: [f64; 3], s_matrix: [f64; 6]) -> Self {
        GeneralCoefficients { c1, c2, v, s_matrix }
    }

    fn s_entry(&self, i: usize, j: usize) -> f64 {
        self.s_matrix[sym_index(i, j)]
    }

    /// Frobenius deviation of S from multiples of the slice metric,
    /// min over c of ||S - c gamma||_F. Since gamma is conformally flat this
    /// is the norm of the delta-traceless part of S.
    pub fn s_deviation(&self) -> f64 {
        let tr = self.s_matrix[0] + self.s_matrix[1] + self.s_matrix[2];
        let mut sq = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let p = self.s_entry(i, j) - if i == j { tr / 3.0 } else { 0.0 };
                sq += p * p;
            }
        }
        sq.sqrt()
    }
}

/// A boundary-condition family for the linearised Einstein operator.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryConditionSpec {
    /// All ten components of u prescribed (to zero). Not gauge invariant,
    /// but guarantees a spectral gap; kept as the comparison case.
    Dirichlet,
    /// Linearised Anderson conditions: (a)-(c) plus (d) with
    /// C1 = 3 tr(k), C2 = 1, V = S = 0.
    Anderson,
    /// Conditions (a)-(c) plus the general scalar condition (d), with
    /// independent coefficients on the two boundary components.
    GeneralConformal { lower: GeneralCoefficients, upper: GeneralCoefficients },
}

impl BoundaryConditionSpec {
    /// A general conformal spec with the same coefficients on both sides.
    pub fn general_shared(c: GeneralCoefficients) -> Self {
        BoundaryConditionSpec::GeneralConformal { lower: c, upper: c }
    }

    /// The (d)-coefficients on `side`, expanding Anderson in terms of the
    /// slice data; `None` for Dirichlet.
    pub fn coefficients(&self, geom: &GeometrySpec, side: Side) -> Result<Option<GeneralCoefficients>> {
        match self {
            BoundaryConditionSpec::Dirichlet => Ok(None),
            BoundaryConditionSpec::Anderson => {
                let slice = geom.slice_data(side.s_value(geom))?;
                Ok(Some(GeneralCoefficients::new(3.0 * slice.trace_k, 1.0, [0.0; 3], [0.0; 6])))
            }
            BoundaryConditionSpec::GeneralConformal { lower, upper } => Ok(Some(match side {
                Side::Lower => *lower,
                Side::Upper => *upper,
            })),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryConditionSpec::Dirichlet)
    }
}

/// Well-posedness diagnostics of a spec (see [`validate_spec`]).
#[derive(Clone, Debug)]
pub struct SpecDiagnostics {
    pub valid: bool,
    /// Per side: (C2, Frobenius deviation of S from span(gamma)), when the
    /// side carries a scalar condition (d).
    pub sides: Vec<(Side, f64, f64)>,
    pub message: String,
}

/// Checks the general-conformal invariant: whenever C2 = 0 on a side, S must
/// deviate from multiples of the slice metric.
pub fn validate_spec(spec: &BoundaryConditionSpec, geom: &GeometrySpec) -> SpecDiagnostics {
    let mut sides = Vec::new();
    let mut valid = true;
    let mut message = String::from("ok");
    for side in Side::BOTH {
        let coeff = match spec.coefficients(geom, side) {
            Ok(Some(c)) => c,
            _ => continue,
        };
        let dev = coeff.s_deviation();
        sides.push((side, coeff.c2, dev));
        if coeff.c2.abs() < 1e-14 && dev < 1e-12 {
            valid = false;
            message = format!(
                "condition (d) is degenerate at s = {:+}: C2 = 0 and S proportional to gamma (deviation {dev:.2e})",
                side.s_value(geom)
            );
        }
    }
    SpecDiagnostics { valid, sides, message }
}

/// Draws a random valid general conformal spec with O(1) coefficients,
/// shared across both sides; C2 = 0 is sampled with positive probability so
/// the S-driven branch of the family stays exercised. Used by the
/// gauge-invariance batches.
pub fn sample_valid_spec(rng: &mut impl rand::Rng) -> BoundaryConditionSpec {
    loop {
        let c2 = if rng.random_range(0..4) == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
        let coeff = GeneralCoefficients::new(
            rng.random_range(-1.0..1.0),
            c2,
            std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
            std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        );
        let spec = BoundaryConditionSpec::general_shared(coeff);
        // validity only depends on (C2, S), not on the background
        if coeff.c2.abs() >= 1e-14 || coeff.s_deviation() >= 1e-12 {
            return spec;
        }
    }
}

fn ensure_valid(spec: &BoundaryConditionSpec, geom: &GeometrySpec) -> Result<()> {
    let diag = validate_spec(spec, geom);
    if diag.valid {
        Ok(())
    } else {
        Err(Error::InvalidSpec(diag.message))
    }
}

/// Residuals of the boundary conditions at one side.
#[derive(Clone, Debug)]
pub enum BoundaryResidual {
    /// Dirichlet: the ten component values of u at the boundary point.
    Dirichlet { side: Side, values: [C64; NCOMP2] },
    /// Conformal-type: residuals of (a), (b), the five independent traceless
    /// entries of (c) in the order (11, 22, 12, 13, 23), and (d).
    Conformal { side: Side, res_a: C64, res_b: [C64; 3], res_c: [C64; 5], res_d: C64 },
}

impl BoundaryResidual {
    /// All ten residual values as a flat vector.
    pub fn as_vector(&self) -> Vec<C64> {
        match self {
            BoundaryResidual::Dirichlet { values, .. } => values.to_vec(),
            BoundaryResidual::Conformal { res_a, res_b, res_c, res_d, .. } => {
                let mut v = vec![*res_a];
                v.extend_from_slice(res_b);
                v.extend_from_slice(res_c);
                v.push(*res_d);
                v
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.as_vector().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Reconstructs the full traceless 3x3 matrix of condition (c) from its
    /// five stored entries (the 33 entry closes the gamma-trace).
    pub fn res_c_matrix(&self) -> Option<[[C64; 3]; 3]> {
        match self {
            BoundaryResidual::Conformal { res_c, .. } => {
                let mut m = [[C64::ZERO; 3]; 3];
                m[0][0] = res_c[0];
                m[1][1] = res_c[1];
                m[2][2] = -(res_c[0] + res_c[1]);
                m[0][1] = res_c[2];
                m[1][0] = res_c[2];
                m[0][2] = res_c[3];
                m[2][0] = res_c[3];
                m[1][2] = res_c[4];
                m[2][1] = res_c[4];
                Some(m)
            }
            _ => None,
        }
    }
}

/// Slice quantities used by the residual and row assembly.
struct SideData {
    b: usize,
    /// 1/a^2 at every grid point (for the s-derivative of the gamma-trace).
    inv_a2: Vec<f64>,
    trace_k: f64,
    /// a'(s)/a(s)^3 at the boundary; k^{ij} = -(a'/a^3) delta^{ij}.
    da_over_a3: f64,
    /// 1/a^2 at the boundary.
    inv_a2_b: f64,
    /// gamma_{ij} = a^2 delta_{ij} at the boundary.
    a2_b: f64,
}

fn side_data(geom: &GeometrySpec, grid: &Grid1D, side: Side) -> Result<SideData> {
    let b = side.grid_index(grid);
    let mut inv_a2 = Vec::with_capacity(grid.m);
    for j in 0..grid.m {
        let a = (geom.warp.a)(grid.s[j].clamp(-geom.half_width, geom.half_width));
        inv_a2.push(1.0 / (a * a));
    }
    let s_b = side.s_value(geom);
    let slice = geom.slice_data(s_b)?;
    let a = (geom.warp.a)(s_b);
    let da = (geom.warp.da)(s_b);
    Ok(SideData {
        b,
        inv_a2,
        trace_k: slice.trace_k,
        da_over_a3: da / (a * a * a),
        inv_a2_b: 1.0 / (a * a),
        a2_b: a * a,
    })
}

/// Evaluates the boundary residual of a mode tensor at one side.
pub fn boundary_residual(
    u: &ModeTensor2,
    spec: &BoundaryConditionSpec,
    geom: &GeometrySpec,
    mode: &ModeIndex,
    grid: &Grid1D,
    side: Side,
) -> Result<BoundaryResidual> {
    if u.len() != grid.m {
        return Err(Error::Shape(format!("tensor has {} points, grid has {}", u.len(), grid.m)));
    }
    ensure_valid(spec, geom)?;
    let sd = side_data(geom, grid, side)?;
    let b = sd.b;

    if spec.is_dirichlet() {
        let values: [C64; NCOMP2] = std::array::from_fn(|c| u.comp(c)[b]);
        return Ok(BoundaryResidual::Dirichlet { side, values });
    }
    let coeff = spec.coefficients(geom, side)?.expect("conformal-type spec");

    let h = grid.h;
    let i_xi: [C64; 3] = std::array::from_fn(|k| C64::new(0.0, mode.xi[k]));

    // gamma-trace profile tr_gamma(u_SS)(s) = a(s)^{-2} sum_i u_ii(s)
    let tr_profile: Vec<C64> = (0..grid.m)
        .map(|j| sd.inv_a2[j] * (u.comp(4)[j] + u.comp(5)[j] + u.comp(6)[j]))
        .collect();
    let tr_b = tr_profile[b];
    let dtr_b = stencil::deriv1_at(&tr_profile, h, b);
    let duss_b = stencil::deriv1_at(u.u_ss(), h, b);

    // (a): d/ds u_ss - div_S u_sS - tr(k) u_ss + <k, u_SS>
    let mut res_a = duss_b - sd.trace_k * u.u_ss()[b];
    for k in 0..3 {
        // -div_S u_sS = + i gamma^{jk} xi_j u_sk
        res_a += sd.inv_a2_b * i_xi[k] * u.u_s_sigma(k)[b];
    }
    // <k, u_SS> = k^{ij} u_ij = -(a'/a^3) tr_delta(u_SS)
    res_a += -sd.da_over_a3 * u.trace_sigma_at(b);

    // (b)_i: d/ds u_si - (1/2) div_S u_SS - tr(k) u_si
    let mut res_b = [C64::ZERO; 3];
    for i in 0..3 {
        let mut r = stencil::deriv1_at(u.u_s_sigma(i), h, b) - sd.trace_k * u.u_s_sigma(i)[b];
        for k in 0..3 {
            // -(1/2)(div_S u_SS)_i = + i gamma^{jk} xi_j u_ki
            r += sd.inv_a2_b * i_xi[k] * u.u_sigma_sigma(k, i)[b];
        }
        res_b[i] = r;
    }

    // (c): traceless projection, independent entries (11, 22, 12, 13, 23)
    let third_tr = tr_b / 3.0;
    let proj = |i: usize, j: usize| -> C64 {
        let g_ij = if i == j { sd.a2_b } else { 0.0 };
        u.u_sigma_sigma(i, j)[b] - third_tr * g_ij
    };
    let res_c = [proj(0, 0), proj(1, 1), proj(0, 1), proj(0, 2), proj(1, 2)];

    // (d): general scalar condition
    let scalar = u.u_ss()[b] + tr_b / 3.0;
    let mut res_d = coeff.c1 * scalar;
    res_d += coeff.c2 * (dtr_b - duss_b - (4.0 / 3.0) * tr_b * sd.trace_k);
    // <V, grad_S scalar> = i gamma^{jk} V_j xi_k * scalar
    let v_dot_xi: f64 = (0..3).map(|k| coeff.v[k] * mode.xi[k]).sum();
    res_d += sd.inv_a2_b * C64::new(0.0, v_dot_xi) * scalar;
    // <S, d/ds u_SS - 2 sym-grad_S u_sS - gamma (d/ds u_ss + (2/3) tr tr(k))>
    let mut s_term = C64::ZERO;
    for &(i, j) in SYM_PAIRS.iter() {
        let mult = if i == j { 1.0 } else { 2.0 };
        let s_up = sd.inv_a2_b * sd.inv_a2_b * coeff.s_entry(i, j);
        let mut y = stencil::deriv1_at(u.u_sigma_sigma(i, j), h, b);
        y -= i_xi[i] * u.u_s_sigma(j)[b] + i_xi[j] * u.u_s_sigma(i)[b];
        if i == j {
            y -= sd.a2_b * (duss_b + (2.0 / 3.0) * tr_b * sd.trace_k);
        }
        s_term += mult * s_up * y;
    }
    res_d += s_term;

    Ok(BoundaryResidual::Conformal { side, res_a, res_b, res_c, res_d })
}

/// A sparse row over the flattened (point-major) mode vector.
pub type Row = Vec<(usize, C64)>;

/// The ten discrete constraint rows of one boundary side, ordered
/// (a), (b)_1..3, (c)_{11,22,12,13,23}, (d) for conformal-type specs and as
/// plain component selectors for Dirichlet.
#[derive(Clone, Debug)]
pub struct SideRows {
    pub side: Side,
    pub rows: [Row; NCOMP2],
}

/// Applies a sparse row to a flattened mode vector.
pub fn apply_row(row: &Row, flat: &[C64]) -> C64 {
    row.iter().map(|&(c, w)| w * flat[c]).sum()
}

fn flat_index(point: usize, comp: usize) -> usize {
    NCOMP2 * point + comp
}

fn push(row: &mut Row, point: usize, comp: usize, w: C64) {
    if w != C64::ZERO {
        row.push((flat_index(point, comp), w));
    }
}

fn compress(mut row: Row) -> Row {
    row.sort_by_key(|&(c, _)| c);
    let mut out: Row = Vec::with_capacity(row.len());
    for (c, w) in row {
        match out.last_mut() {
            Some(&mut (lc, ref mut lw)) if lc == c => *lw += w,
            _ => out.push((c, w)),
        }
    }
    out.retain(|&(_, w)| w.norm() > 0.0);
    out
}

/// Assembles the ten constraint rows per side over the 10*M unknowns.
///
/// Each row applied to the flattened tensor reproduces [`boundary_residual`];
/// rank deficiency (rank < 10 on a side) is reported as a degenerate-spec
/// error. No validity pre-check is performed here: rank reveals degeneracy
/// directly, including for specs [`validate_spec`] would reject.
pub fn constraint_rows(
    spec: &BoundaryConditionSpec,
    geom: &GeometrySpec,
    mode: &ModeIndex,
    grid: &Grid1D,
) -> Result<[SideRows; 2]> {
    let lower = side_rows(spec, geom, mode, grid, Side::Lower)?;
    let upper = side_rows(spec, geom, mode, grid, Side::Upper)?;
    for sr in [&lower, &upper] {
        check_rank(sr, geom)?;
    }
    Ok([lower, upper])
}

fn side_rows(
    spec: &BoundaryConditionSpec,
    geom: &GeometrySpec,
    mode: &ModeIndex,
    grid: &Grid1D,
    side: Side,
) -> Result<SideRows> {
    let sd = side_data(geom, grid, side)?;
    let b = sd.b;

    if spec.is_dirichlet() {
        let rows: [Row; NCOMP2] = std::array::from_fn(|c| vec![(flat_index(b, c), C64::ONE)]);
        return Ok(SideRows { side, rows });
    }
    let coeff = spec.coefficients(geom, side)?.expect("conformal-type spec");

    let h = grid.h;
    let i_xi: [C64; 3] = std::array::from_fn(|k| C64::new(0.0, mode.xi[k]));
    let (d1_cols, d1_w) = stencil::d1_row(grid.m, b, h);

    // (a)
    let mut row_a: Row = Vec::new();
    for (p, w) in d1_cols.iter().zip(d1_w.iter()) {
        push(&mut row_a, *p, 0, C64::new(*w, 0.0));
    }
    push(&mut row_a, b, 0, C64::new(-sd.trace_k, 0.0));
    for k in 0..3 {
        push(&mut row_a, b, 1 + k, sd.inv_a2_b * i_xi[k]);
    }
    for d in 0..3 {
        push(&mut row_a, b, 4 + d, C64::new(-sd.da_over_a3, 0.0));
    }

    // (b)_i
    let mut rows_b: [Row; 3] = std::array::from_fn(|_| Vec::new());
    for (i, row) in rows_b.iter_mut().enumerate() {
        for (p, w) in d1_cols.iter().zip(d1_w.iter()) {
            push(row, *p, 1 + i, C64::new(*w, 0.0));
        }
        push(row, b, 1 + i, C64::new(-sd.trace_k, 0.0));
        for k in 0..3 {
            push(row, b, 4 + sym_index(k, i), sd.inv_a2_b * i_xi[k]);
        }
    }

    // (c): independent traceless entries (11, 22, 12, 13, 23)
    let mut rows_c: [Row; 5] = std::array::from_fn(|_| Vec::new());
    let c_pairs = [(0usize, 0usize), (1, 1), (0, 1), (0, 2), (1, 2)];
    for (r, &(i, j)) in c_pairs.iter().enumerate() {
        push(&mut rows_c[r], b, 4 + sym_index(i, j), C64::ONE);
        if i == j {
            // -(1/3) tr_gamma(u_SS) gamma_ij with gamma_ij = a^2: the trace
            // uses 1/a^2 at b, so the diagonal correction is -1/3 per u_dd.
            for d in 0..3 {
                push(&mut rows_c[r], b, 4 + d, C64::new(-1.0 / 3.0, 0.0));
            }
        }
    }

    // (d)
    let mut row_d: Row = Vec::new();
    let v_dot_xi: f64 = (0..3).map(|k| coeff.v[k] * mode.xi[k]).sum();
    let scalar_coeff = C64::new(coeff.c1, 0.0) + sd.inv_a2_b * C64::new(0.0, v_dot_xi);
    push(&mut row_d, b, 0, scalar_coeff);
    for d in 0..3 {
        push(&mut row_d, b, 4 + d, scalar_coeff * (sd.inv_a2_b / 3.0));
    }
    // C2 (d/ds tr_gamma(u_SS) - d/ds u_ss - (4/3) tr tr(k))
    for (p, w) in d1_cols.iter().zip(d1_w.iter()) {
        for d in 0..3 {
            push(&mut row_d, *p, 4 + d, C64::new(coeff.c2 * w * sd.inv_a2[*p], 0.0));
        }
        push(&mut row_d, *p, 0, C64::new(-coeff.c2 * w, 0.0));
    }
    for d in 0..3 {
        push(&mut row_d, b, 4 + d, C64::new(-coeff.c2 * (4.0 / 3.0) * sd.trace_k * sd.inv_a2_b, 0.0));
    }
    // <S, Y>
    let tr_s_up: f64 = (0..3).map(|i| sd.inv_a2_b * sd.inv_a2_b * coeff.s_entry(i, i)).sum();
    for &(i, j) in SYM_PAIRS.iter() {
        let mult = if i == j { 1.0 } else { 2.0 };
        let s_up = mult * sd.inv_a2_b * sd.inv_a2_b * coeff.s_entry(i, j);
        if s_up == 0.0 {
            continue;
        }
        for (p, w) in d1_cols.iter().zip(d1_w.iter()) {
            push(&mut row_d, *p, 4 + sym_index(i, j), C64::new(s_up * w, 0.0));
        }
        push(&mut row_d, b, 1 + j, C64::new(-s_up, 0.0) * i_xi[i]);
        push(&mut row_d, b, 1 + i, C64::new(-s_up, 0.0) * i_xi[j]);
    }
    if tr_s_up != 0.0 {
        for (p, w) in d1_cols.iter().zip(d1_w.iter()) {
            push(&mut row_d, *p, 0, C64::new(-tr_s_up * sd.a2_b * w, 0.0));
        }
        for d in 0..3 {
            push(
                &mut row_d,
                b,
                4 + d,
                C64::new(-tr_s_up * sd.a2_b * (2.0 / 3.0) * sd.trace_k * sd.inv_a2_b, 0.0),
            );
        }
    }

    let mut rows: Vec<Row> = Vec::with_capacity(NCOMP2);
    rows.push(row_a);
    rows.extend(rows_b);
    rows.extend(rows_c);
    rows.push(row_d);
    let rows: [Row; NCOMP2] = rows
        .into_iter()
        .map(compress)
        .collect::<Vec<_>>()
        .try_into()
        .expect("ten rows");
    Ok(SideRows { side, rows })
}

fn check_rank(sr: &SideRows, geom: &GeometrySpec) -> Result<()> {
    // Columns outside the union of supports contribute nothing to the rank.
    let mut cols: Vec<usize> = sr.rows.iter().flat_map(|r| r.iter().map(|&(c, _)| c)).collect();
    cols.sort_unstable();
    cols.dedup();
    if cols.is_empty() {
        return Err(Error::DegenerateSpec {
            side: sr.side.sign() * geom.half_width,
            detail: "all constraint rows vanish".into(),
        });
    }
    let col_pos: std::collections::HashMap<usize, usize> =
        cols.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    let mut m = DMatrix::<C64>::zeros(NCOMP2, cols.len());
    for (r, row) in sr.rows.iter().enumerate() {
        for &(c, w) in row {
            m[(r, col_pos[&c])] = w;
        }
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < NCOMP2 {
        return Err(Error::DegenerateSpec {
            side: sr.side.sign() * geom.half_width,
            detail: format!("constraint rows have rank {rank} < 10"),
        });
    }
    Ok(())
}
