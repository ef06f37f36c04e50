//! Gauge fields supported near the boundary and the residual checks behind
//! gauge invariance of the conformal boundary families.
//!
//! An admissible gauge field omega vanishes on the boundary and solves
//! D1 omega = 0 in a collar around it. Per mode this means
//! omega ~ sinh(|xi|(s -+ T)) near s = +/-T (linear for the zero mode); the
//! collar profiles here use the grid-adapted wavenumber mu with
//! cosh(mu h) = 1 + |xi|^2 h^2 / 2, which the interior stencil annihilates
//! exactly, and are blended into an arbitrary smooth interior profile by a
//! quintic-smoothstep cutoff that is identically 1 inside the collar.
//!
//! For every such field, u = K omega must satisfy every valid conformal
//! boundary spec; Dirichlet conditions fail this, and profiles that merely
//! vanish at the boundary without solving D1 omega = 0 nearby leave a
//! grid-independent residual.

use num_complex::Complex64 as C64;

use crate::boundary::{boundary_residual, BoundaryConditionSpec, BoundaryResidual, Side};
use crate::error::{Error, Result};
use crate::geometry::GeometrySpec;
use crate::stencil;
use crate::tensor_ops::{gauge_potential, Grid1D, ModeIndex, ModeTensor1, NCOMP1};

/// A gauge field vanishing at s = +/-T and solving D1 omega = 0 in collars
/// of width `collar_width` at both ends.
#[derive(Clone, Debug)]
pub struct CollarGaugeField {
    pub mode: ModeIndex,
    pub omega: ModeTensor1,
    pub collar_width: f64,
    /// Profile family and parameters, for reports.
    pub construction: String,
}

/// Quintic smoothstep: C^2, flat to second order at both ends.
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Grid-adapted decay rate: the discrete counterpart of |xi| for which
/// sinh(mu (s -+ T)) solves the central three-point scheme exactly.
fn discrete_mu(xi_norm: f64, h: f64) -> f64 {
    if xi_norm == 0.0 {
        0.0
    } else {
        (1.0 + 0.5 * xi_norm * xi_norm * h * h).acosh() / h
    }
}

/// Builds a collar gauge field with the given per-component amplitudes.
///
/// The profile is A (phi_L cut_L + phi_R cut_R + bump rho) where phi are the
/// exact collar solutions, the cutoffs are 1 on [T - 1.5 w, T] (mirrored)
/// and vanish past 2 w, and the bump carries a generic interior shape.
pub fn make_collar_gauge_field(
    mode: &ModeIndex,
    geom: &GeometrySpec,
    grid: &Grid1D,
    amplitudes: [C64; NCOMP1],
    collar_width: f64,
) -> Result<CollarGaugeField> {
    assert!(geom.is_flat(), "collar gauge fields are built on the flat background");
    let t = grid.half_width;
    let w = collar_width;
    if !(w > 0.0) || w >= t / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "collar width must lie in (0, T/2) = (0, {}), got {w}",
            t / 2.0
        )));
    }
    if grid.h > w / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {} too coarse for collar width {w}: the boundary stencils must fit inside the exact region",
            grid.h
        )));
    }
    let mu = discrete_mu(mode.xi_norm(), grid.h);
    let phi_right = |s: f64| if mu == 0.0 { s - t } else { (mu * (s - t)).sinh() };
    let phi_left = |s: f64| if mu == 0.0 { s + t } else { (mu * (s + t)).sinh() };
    let cut_right = |s: f64| smoothstep((s - (t - 2.0 * w)) / (0.5 * w));
    let cut_left = |s: f64| smoothstep(((-t + 2.0 * w) - s) / (0.5 * w));
    let bump = |s: f64| {
        smoothstep((s - (-t + 2.0 * w)) / (0.5 * w)) * smoothstep(((t - 2.0 * w) - s) / (0.5 * w))
    };
    let rho = |s: f64| (std::f64::consts::PI * s / (2.0 * t)).cos();

    let mut omega = ModeTensor1::zeros(grid.m);
    for c in 0..NCOMP1 {
        if amplitudes[c] == C64::ZERO {
            continue;
        }
        for j in 0..grid.m {
            let s = grid.s[j];
            let profile =
                phi_left(s) * cut_left(s) + phi_right(s) * cut_right(s) + bump(s) * rho(s);
            omega.comp_mut(c)[j] = amplitudes[c] * profile;
        }
    }
    Ok(CollarGaugeField {
        mode: *mode,
        omega,
        collar_width: w,
        construction: format!("collar(sinh, mu={mu:.6}, w={w}), amplitudes {amplitudes:?}"),
    })
}

/// Draws a collar field with a random small mode and random amplitudes.
///
/// Modes are restricted to |n|_1 <= 2 so the collar decay rate stays mild;
/// amplitudes are complex with modulus below one.
pub fn sample_collar_field(
    geom: &GeometrySpec,
    grid: &Grid1D,
    collar_width: f64,
    rng: &mut impl rand::Rng,
) -> Result<CollarGaugeField> {
    sample_collar_field_in_modes(geom, grid, collar_width, 1, rng)
}

/// [`sample_collar_field`] with an explicit mode cutoff |n_i| <= n_max
/// (the 1-norm stays capped at max(2, n_max)).
pub fn sample_collar_field_in_modes(
    geom: &GeometrySpec,
    grid: &Grid1D,
    collar_width: f64,
    n_max: i32,
    rng: &mut impl rand::Rng,
) -> Result<CollarGaugeField> {
    let cap = n_max.max(2);
    let n: [i32; 3] = loop {
        let n: [i32; 3] = std::array::from_fn(|_| rng.random_range(-n_max..=n_max));
        if n.iter().map(|k| k.abs()).sum::<i32>() <= cap {
            break n;
        }
    };
    let mode = ModeIndex::new(n, geom);
    let amplitudes: [C64; NCOMP1] = std::array::from_fn(|_| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.4
    });
    make_collar_gauge_field(&mode, geom, grid, amplitudes, collar_width)
}

/// Max boundary residual of u = K omega for an arbitrary gauge profile.
pub fn gauge_residual_of(
    omega: &ModeTensor1,
    mode: &ModeIndex,
    spec: &BoundaryConditionSpec,
    geom: &GeometrySpec,
    grid: &Grid1D,
) -> Result<f64> {
    let u = gauge_potential(omega, mode, grid);
    let mut max = 0.0f64;
    for side in Side::BOTH {
        let r = boundary_residual(&u, spec, geom, mode, grid, side)?;
        max = max.max(r.max_abs());
    }
    Ok(max)
}

/// Max over both sides of the sup-norm of the boundary residual of
/// u = K omega; for admissible fields and valid specs this is pure
/// discretization error, O(h^2).
pub fn gauge_invariance_residual(
    field: &CollarGaugeField,
    spec: &BoundaryConditionSpec,
    geom: &GeometrySpec,
    grid: &Grid1D,
) -> Result<f64> {
    gauge_residual_of(&field.omega, &field.mode, spec, geom, grid)
}

/// Left/right comparison of one boundary relation between u = K omega and
/// the omega-side expression.
#[derive(Clone, Debug)]
pub struct RelationEntry {
    pub name: &'static str,
    pub lhs: C64,
    pub rhs: C64,
}

impl RelationEntry {
    pub fn diff(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

/// All eight boundary relations evaluated on one side.
#[derive(Clone, Debug)]
pub struct SideRelations {
    pub side: Side,
    pub entries: Vec<RelationEntry>,
}

impl SideRelations {
    pub fn max_diff(&self) -> f64 {
        self.entries.iter().map(RelationEntry::diff).fold(0.0, f64::max)
    }
}

/// Report of [`relations_check`].
#[derive(Clone, Debug)]
pub struct RelationsReport {
    pub sides: Vec<SideRelations>,
}

impl RelationsReport {
    pub fn max_diff(&self) -> f64 {
        self.sides.iter().map(SideRelations::max_diff).fold(0.0, f64::max)
    }
}

/// Verifies the boundary relations connecting u = K omega with omega:
/// the values u_ss, u_sS, u_SS and the spatial trace, and the s-derivatives
/// of all four, each against its closed form in omega (flat background,
/// k = 0). The u-side uses the assembled gauge potential and independent
/// differencing, so agreement is O(h^2), not an identity.
pub fn relations_check(
    field: &CollarGaugeField,
    geom: &GeometrySpec,
    grid: &Grid1D,
) -> RelationsReport {
    assert!(geom.is_flat(), "the boundary relations are evaluated on the flat background");
    let mode = &field.mode;
    let omega = &field.omega;
    let u = gauge_potential(omega, mode, grid);
    let h = grid.h;
    let i_xi: [C64; 3] = std::array::from_fn(|k| C64::new(0.0, mode.xi[k]));

    let mut sides = Vec::new();
    for side in Side::BOTH {
        let b = side.grid_index(grid);
        let dw_s = stencil::deriv1_at(omega.omega_s(), h, b);
        let dw_sig: [C64; 3] = std::array::from_fn(|i| stencil::deriv1_at(omega.omega_sigma(i), h, b));
        let d2w_s = stencil::deriv2_at(omega.omega_s(), h, b);
        let d2w_sig: [C64; 3] = std::array::from_fn(|i| stencil::deriv2_at(omega.omega_sigma(i), h, b));
        // d/ds of div_S omega_S and of grad_S omega_s at the boundary
        let ds_div: C64 = -(0..3).map(|k| i_xi[k] * dw_sig[k]).sum::<C64>();

        let mut entries = Vec::new();
        entries.push(RelationEntry { name: "u_ss", lhs: u.u_ss()[b], rhs: 0.5 * dw_s });
        for i in 0..3 {
            entries.push(RelationEntry {
                name: "u_sS",
                lhs: u.u_s_sigma(i)[b],
                rhs: 0.5 * dw_sig[i],
            });
        }
        for i in 0..3 {
            for j in i..3 {
                let rhs = if i == j { -0.5 * dw_s } else { C64::ZERO };
                entries.push(RelationEntry { name: "u_SS", lhs: u.u_sigma_sigma(i, j)[b], rhs });
            }
        }
        entries.push(RelationEntry {
            name: "tr u_SS",
            lhs: u.trace_sigma_at(b),
            rhs: -1.5 * dw_s,
        });
        entries.push(RelationEntry {
            name: "d/ds u_ss",
            lhs: stencil::deriv1_at(u.u_ss(), h, b),
            rhs: 0.5 * (d2w_s + ds_div),
        });
        for i in 0..3 {
            entries.push(RelationEntry {
                name: "d/ds u_sS",
                lhs: stencil::deriv1_at(u.u_s_sigma(i), h, b),
                rhs: 0.5 * (d2w_sig[i] + i_xi[i] * dw_s),
            });
        }
        for i in 0..3 {
            for j in i..3 {
                let mut rhs = 0.5 * (i_xi[i] * dw_sig[j] + i_xi[j] * dw_sig[i]);
                if i == j {
                    rhs -= 0.5 * (d2w_s - ds_div);
                }
                entries.push(RelationEntry {
                    name: "d/ds u_SS",
                    lhs: stencil::deriv1_at(u.u_sigma_sigma(i, j), h, b),
                    rhs,
                });
            }
        }
        let tr_profile: Vec<C64> = (0..grid.m).map(|j| u.trace_sigma_at(j)).collect();
        entries.push(RelationEntry {
            name: "d/ds tr u_SS",
            lhs: stencil::deriv1_at(&tr_profile, h, b),
            rhs: -1.5 * d2w_s + 0.5 * ds_div,
        });
        sides.push(SideRelations { side, entries });
    }
    RelationsReport { sides }
}

/// The (a), (b) residuals of u = K omega on one side next to the boundary
/// values of D1 omega they encode.
#[derive(Clone, Debug)]
pub struct SideEq2 {
    pub side: Side,
    pub res_a: C64,
    pub res_b: [C64; 3],
    /// (1/2) d^2/ds^2 omega at the boundary: what (a), (b) reduce to on a
    /// gauge potential when the interior equation holds (flat background).
    pub eq2_a: C64,
    pub eq2_b: [C64; 3],
}

impl SideEq2 {
    pub fn max_diff(&self) -> f64 {
        let mut d = (self.res_a - self.eq2_a).norm();
        for i in 0..3 {
            d = d.max((self.res_b[i] - self.eq2_b[i]).norm());
        }
        d
    }
}

/// Report of [`eq2_check`].
#[derive(Clone, Debug)]
pub struct Eq2Report {
    pub sides: Vec<SideEq2>,
}

impl Eq2Report {
    pub fn max_diff(&self) -> f64 {
        self.sides.iter().map(SideEq2::max_diff).fold(0.0, f64::max)
    }
}

/// Confirms that the (a), (b) residuals of K omega equal (1/2) d^2/ds^2 of
/// omega at the boundary, i.e. the boundary trace of the interior equation
/// D1 omega = 0; admissible fields drive both to zero.
pub fn eq2_check(field: &CollarGaugeField, geom: &GeometrySpec, grid: &Grid1D) -> Result<Eq2Report> {
    eq2_check_profile(&field.omega, &field.mode, geom, grid)
}

/// [`eq2_check`] for a raw profile (used to probe non-admissible fields).
pub fn eq2_check_profile(
    omega: &ModeTensor1,
    mode: &ModeIndex,
    geom: &GeometrySpec,
    grid: &Grid1D,
) -> Result<Eq2Report> {
    assert!(geom.is_flat(), "eq2 reduction assumes the flat background");
    let u = gauge_potential(omega, mode, grid);
    let mut sides = Vec::new();
    for side in Side::BOTH {
        let b = side.grid_index(grid);
        let r = boundary_residual(&u, &BoundaryConditionSpec::Anderson, geom, mode, grid, side)?;
        let (res_a, res_b) = match r {
            BoundaryResidual::Conformal { res_a, res_b, .. } => (res_a, res_b),
            _ => unreachable!("Anderson residual is conformal-type"),
        };
        let eq2_a = 0.5 * stencil::deriv2_at(omega.omega_s(), grid.h, b);
        let eq2_b: [C64; 3] =
            std::array::from_fn(|i| 0.5 * stencil::deriv2_at(omega.omega_sigma(i), grid.h, b));
        sides.push(SideEq2 { side, res_a, res_b, eq2_a, eq2_b });
    }
    Ok(Eq2Report { sides })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_ops::apply_d1;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn flat_geom() -> GeometrySpec {
        GeometrySpec::flat_torus_product(1.0, [TAU; 3]).unwrap()
    }

    use crate::boundary::sample_valid_spec;

    fn quartic_profile(grid: &Grid1D) -> ModeTensor1 {
        // vanishes at +/-T but does not solve D1 omega = 0 near the boundary
        let mut w = ModeTensor1::zeros(grid.m);
        for j in 0..grid.m {
            let s = grid.s[j];
            w.comp_mut(0)[j] = C64::new((s * s - 1.0).powi(2), 0.0);
        }
        w
    }

    #[test]
    fn zero_amplitudes_give_zero_field() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 101).unwrap();
        let mode = ModeIndex::new([1, 0, 0], &geom);
        let f = make_collar_gauge_field(&mode, &geom, &grid, [C64::ZERO; 4], 0.25).unwrap();
        assert_eq!(f.omega.max_abs(), 0.0);
        let r = gauge_invariance_residual(&f, &BoundaryConditionSpec::Anderson, &geom, &grid).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn collar_width_and_grid_are_validated() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 101).unwrap();
        let mode = ModeIndex::new([0, 0, 0], &geom);
        let amps = [C64::ONE; 4];
        assert!(make_collar_gauge_field(&mode, &geom, &grid, amps, 0.6).is_err());
        assert!(make_collar_gauge_field(&mode, &geom, &grid, amps, 0.0).is_err());
        // collar narrower than two grid spacings
        let coarse = Grid1D::new(1.0, 12).unwrap();
        assert!(make_collar_gauge_field(&mode, &geom, &coarse, amps, 0.05).is_err());
    }

    #[test]
    fn field_vanishes_at_boundary_and_solves_d1_in_collars() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 400).unwrap();
        let mode = ModeIndex::new([1, 0, 0], &geom);
        let mut amps = [C64::ZERO; 4];
        amps[0] = C64::ONE;
        let w = 0.25;
        let f = make_collar_gauge_field(&mode, &geom, &grid, amps, w).unwrap();

        for c in 0..NCOMP1 {
            assert!(f.omega.comp(c)[0].norm() < 1e-14);
            assert!(f.omega.comp(c)[grid.m - 1].norm() < 1e-14);
        }

        let resid = apply_d1(&f.omega, &mode, &grid, &geom);
        let mut max_inner_collar = 0.0f64;
        let mut max_collar = 0.0f64;
        for j in 0..grid.m {
            let s = grid.s[j];
            if s.abs() >= 1.0 - w {
                for c in 0..NCOMP1 {
                    let v = resid.comp(c)[j].norm();
                    max_collar = max_collar.max(v);
                    if j != 0 && j != grid.m - 1 {
                        max_inner_collar = max_inner_collar.max(v);
                    }
                }
            }
        }
        // interior collar rows are annihilated exactly by construction;
        // the one-sided closure rows at s = +/-T carry O(h^3)
        assert!(max_inner_collar < 1e-8, "inner collar residual {max_inner_collar}");
        assert!(max_collar < 1e-5, "collar residual {max_collar}");
    }

    #[test]
    fn zero_mode_collar_profile_is_linear_near_the_end() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 201).unwrap();
        let mode = ModeIndex::new([0, 0, 0], &geom);
        let mut amps = [C64::ZERO; 4];
        amps[0] = C64::ONE;
        let f = make_collar_gauge_field(&mode, &geom, &grid, amps, 0.25).unwrap();
        // near s = T the profile is exactly s - T
        for j in grid.m - 10..grid.m {
            let expect = C64::new(grid.s[j] - 1.0, 0.0);
            assert!((f.omega.omega_s()[j] - expect).norm() < 1e-13);
        }
        let resid = apply_d1(&f.omega, &mode, &grid, &geom);
        for j in 0..grid.m {
            if grid.s[j].abs() >= 0.75 {
                assert!(resid.omega_s()[j].norm() < 1e-10);
            }
        }
    }

    #[test]
    fn admissible_fields_pass_all_valid_specs() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 400).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..5 {
            let field = sample_collar_field(&geom, &grid, 0.25, &mut rng).unwrap();
            let anderson =
                gauge_invariance_residual(&field, &BoundaryConditionSpec::Anderson, &geom, &grid)
                    .unwrap();
            assert!(anderson < 1e-6, "anderson residual {anderson}");
            for _ in 0..50 {
                let spec = sample_valid_spec(&mut rng);
                let r = gauge_invariance_residual(&field, &spec, &geom, &grid).unwrap();
                assert!(r < 1e-6, "residual {r} for {spec:?}");
            }
        }
    }

    #[test]
    fn gauge_residual_converges_at_least_quadratically() {
        // The residual reduces to composed first-derivative stencils acting
        // on the collar solution, which superconverges (measured rate 3);
        // the contract is a floor at second order.
        let geom = flat_geom();
        let mut errs = Vec::new();
        for &m in &[100usize, 200, 400] {
            let grid = Grid1D::new(1.0, m).unwrap();
            let mode = ModeIndex::new([1, 0, 0], &geom);
            let amps = [
                C64::new(0.8, 0.1),
                C64::new(-0.3, 0.5),
                C64::new(0.2, -0.6),
                C64::new(0.4, 0.4),
            ];
            let field = make_collar_gauge_field(&mode, &geom, &grid, amps, 0.25).unwrap();
            let r = gauge_invariance_residual(&field, &BoundaryConditionSpec::Anderson, &geom, &grid)
                .unwrap();
            errs.push(r);
        }
        let rate = (errs[0] / errs[2]).log2() / 2.0;
        assert!(rate >= 1.8, "rate {rate}, errs {errs:?}");
        assert!(errs[2] < 1e-6);
    }

    #[test]
    fn dirichlet_is_not_gauge_invariant() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 200).unwrap();
        let mode = ModeIndex::new([0, 0, 0], &geom);
        let mut amps = [C64::ZERO; 4];
        amps[0] = C64::ONE;
        let field = make_collar_gauge_field(&mode, &geom, &grid, amps, 0.25).unwrap();
        let r = gauge_invariance_residual(&field, &BoundaryConditionSpec::Dirichlet, &geom, &grid)
            .unwrap();
        // K omega has u_ss = (1/2) d/ds omega_s = 1/2 at the boundary
        assert!(r > 0.4, "Dirichlet residual unexpectedly small: {r}");
    }

    #[test]
    fn non_admissible_quartic_leaves_fixed_residuals() {
        let geom = flat_geom();
        let mode = ModeIndex::new([0, 0, 0], &geom);
        for &m in &[100usize, 200, 400] {
            let grid = Grid1D::new(1.0, m).unwrap();
            let w = quartic_profile(&grid);
            let r = gauge_residual_of(&w, &mode, &BoundaryConditionSpec::Anderson, &geom, &grid)
                .unwrap();
            assert!((r - 16.0).abs() < 1e-8, "M={m}: residual {r}");
            // condition (a) alone carries 4 = (1/2) omega''(+/-1); the
            // eq2 side uses the second-derivative stencil, so it matches
            // to its O(h^2) truncation (2 h^2 on this quartic)
            let rep = eq2_check_profile(&w, &mode, &geom, &grid).unwrap();
            let h2 = grid.h * grid.h;
            for side in &rep.sides {
                assert!((side.res_a - C64::new(4.0, 0.0)).norm() < 1e-8);
                assert!((side.eq2_a - C64::new(4.0, 0.0)).norm() < 1.1 * h2 + 1e-9);
                assert!(side.max_diff() < 1.1 * h2 + 1e-9);
            }
        }
    }

    #[test]
    fn relations_hold_for_collar_fields() {
        let geom = flat_geom();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut errs = Vec::new();
        for &m in &[100usize, 200, 400] {
            let grid = Grid1D::new(1.0, m).unwrap();
            let mode = ModeIndex::new([1, 1, 0], &geom);
            let amps: [C64; 4] = std::array::from_fn(|_| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let field = make_collar_gauge_field(&mode, &geom, &grid, amps, 0.25).unwrap();
            let rep = relations_check(&field, &geom, &grid);
            errs.push(rep.max_diff());
        }
        assert!(errs[2] < 1e-5, "relations diff {errs:?}");
        let rate = (errs[0] / errs[2]).log2() / 2.0;
        assert!(rate > 1.5, "rate {rate}, errs {errs:?}");
    }

    #[test]
    fn relations_reproduce_hand_values_for_linear_profile() {
        // omega_s = (s - T) near s = T: u_ss(T) = 1/2.
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 201).unwrap();
        let mode = ModeIndex::new([0, 0, 0], &geom);
        let mut amps = [C64::ZERO; 4];
        amps[0] = C64::ONE;
        let field = make_collar_gauge_field(&mode, &geom, &grid, amps, 0.25).unwrap();
        let rep = relations_check(&field, &geom, &grid);
        let upper = rep.sides.iter().find(|s| s.side == Side::Upper).unwrap();
        let u_ss = upper.entries.iter().find(|e| e.name == "u_ss").unwrap();
        assert!((u_ss.lhs - C64::new(0.5, 0.0)).norm() < 1e-10, "u_ss = {}", u_ss.lhs);
        assert!(u_ss.diff() < 1e-10);

        // spatial-trace relation for a nonzero mode
        let mode = ModeIndex::new([1, 0, 0], &geom);
        let field = make_collar_gauge_field(&mode, &geom, &grid, amps, 0.25).unwrap();
        let rep = relations_check(&field, &geom, &grid);
        for side in &rep.sides {
            let tr = side.entries.iter().find(|e| e.name == "tr u_SS").unwrap();
            let dw = stencil::deriv1_at(
                field.omega.omega_s(),
                grid.h,
                side.side.grid_index(&grid),
            );
            assert!((tr.lhs - (-1.5) * dw).norm() < 1e-6);
        }
    }

    #[test]
    fn eq2_residuals_vanish_for_admissible_fields() {
        let geom = flat_geom();
        let grid = Grid1D::new(1.0, 400).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let field = sample_collar_field(&geom, &grid, 0.25, &mut rng).unwrap();
        let rep = eq2_check(&field, &geom, &grid).unwrap();
        for side in &rep.sides {
            assert!(side.res_a.norm() < 1e-6);
            assert!(side.eq2_a.norm() < 1e-6);
            for i in 0..3 {
                assert!(side.res_b[i].norm() < 1e-6);
            }
            assert!(side.max_diff() < 1e-6);
        }
    }
}
