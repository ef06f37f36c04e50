//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line with its runtime. Run with
//!
//!   cargo test -p einbc --test acceptance -- --nocapture
//!
//! The tests serialize on a global lock so the runtime budgets are
//! meaningful under the default parallel harness.

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use einbc::boundary::{
    boundary_residual, sample_valid_spec, BoundaryConditionSpec, BoundaryResidual,
    GeneralCoefficients, Side,
};
use einbc::ellipticity::{half_space_kernel, sl_check};
use einbc::gauge::{gauge_residual_of, make_collar_gauge_field, sample_collar_field};
use einbc::geometry::{GeometrySpec, WarpProfile};
use einbc::linearise::{fd_linearisation_check, linearised_mean_curvature, Perturbation};
use einbc::spectral::{
    anderson_analytic_kernel, assemble_mode_operator, kernel_report, kernel_subspace_gap,
    mode_spectrum, smooth_constrained_sample, symmetry_defect, KERNEL_TOL_FACTOR,
};
use einbc::tensor_ops::{
    apply_d1, apply_d2, divergence, gauge_potential, trace_reverse, Grid1D, ModeIndex,
    ModeTensor1, ModeTensor2, NCOMP1, NCOMP2,
};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn lock() -> MutexGuard<'static, ()> {
    static GATE: OnceLock<Mutex<()>> = OnceLock::new();
    GATE.get_or_init(|| Mutex::new(())).lock().unwrap_or_else(|p| p.into_inner())
}

fn flat_geom() -> GeometrySpec {
    GeometrySpec::flat_torus_product(1.0, [TAU; 3]).unwrap()
}

struct Criterion {
    name: &'static str,
    budget_secs: f64,
    start: Instant,
}

impl Criterion {
    fn begin(name: &'static str, budget_secs: f64) -> Self {
        Criterion { name, budget_secs, start: Instant::now() }
    }

    fn finish(self) {
        let elapsed = self.start.elapsed().as_secs_f64();
        println!("[acceptance] {}: PASS ({elapsed:.2} s)", self.name);
        assert!(
            elapsed < self.budget_secs,
            "{} exceeded its {} s budget: {elapsed:.2} s",
            self.name,
            self.budget_secs
        );
    }
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[test]
fn criterion_1_shapiro_lopatinskij_ellipticity() {
    let _gate = lock();
    let c = Criterion::begin("criterion 1 (SL ellipticity)", 5.0);

    let anderson = sl_check(1.0, &[0.0; 6]);
    assert!(anderson.elliptic);
    assert!((anderson.margin - 2.0).abs() < 1e-14);

    let degenerate = sl_check(0.0, &[0.0; 6]);
    assert!(!degenerate.elliptic);

    // interval test vs half-space oracle: zero disagreements allowed
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..1000 {
        let c2 = rng.random_range(-1.0..1.0);
        let s: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let verdict = sl_check(c2, &s);
        let spec = BoundaryConditionSpec::general_shared(GeneralCoefficients::new(
            rng.random_range(-1.0..1.0),
            c2,
            std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
            s,
        ));
        let mut kernel_seen = false;
        for _ in 0..50 {
            let dir = random_unit(&mut rng);
            let scale = rng.random_range(0.3..3.0);
            let xi = [scale * dir[0], scale * dir[1], scale * dir[2]];
            if half_space_kernel(&spec, xi).unwrap().dimension > 0 {
                kernel_seen = true;
                break;
            }
        }
        if verdict.elliptic {
            assert!(!kernel_seen, "trial {trial}: elliptic verdict contradicted by the oracle");
        } else {
            // at the witness the oracle must see the kernel
            let w = verdict.witness.expect("non-elliptic verdict carries a witness");
            let k = half_space_kernel(&spec, w).unwrap();
            assert!(k.dimension > 0, "trial {trial}: witness carries no kernel");
        }
    }
    c.finish();
}

#[test]
fn criterion_2_half_space_kernel() {
    let _gate = lock();
    let c = Criterion::begin("criterion 2 (half-space kernel)", 1.0);

    // (a)-(c) with the degenerate scalar condition: kernel dimension 1,
    // basis matching the trace family to 1e-10
    let degenerate =
        BoundaryConditionSpec::general_shared(GeneralCoefficients::new(0.0, 0.0, [0.0; 3], [0.0; 6]));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let dir = random_unit(&mut rng);
        let scale = rng.random_range(0.5..2.0);
        let xi = [scale * dir[0], scale * dir[1], scale * dir[2]];
        let norm = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        let k = half_space_kernel(&degenerate, xi).unwrap();
        assert_eq!(k.dimension, 1);
        let v = &k.basis[0];
        let t = v[4] + v[5] + v[6];
        assert!(t.norm() > 1e-6);
        let vn: Vec<C64> = v.iter().map(|z| z / t).collect();
        assert!((vn[0] - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-10);
        for j in 0..3 {
            assert!((vn[1 + j] - C64::new(0.0, xi[j] / (3.0 * norm))).norm() < 1e-10);
        }
        for d in 0..3 {
            assert!((vn[4 + d] - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-10);
        }
        for o in 7..10 {
            assert!(vn[o].norm() < 1e-10);
        }
        // Anderson: dimension 0 at the same frequencies
        assert_eq!(half_space_kernel(&BoundaryConditionSpec::Anderson, xi).unwrap().dimension, 0);
    }
    c.finish();
}

#[test]
fn criterion_3_main_theorem_on_the_torus() {
    let _gate = lock();
    let c = Criterion::begin("criterion 3 (Anderson kernel on the torus)", 120.0);

    let geom = flat_geom();
    let grid = Grid1D::new(1.0, 201).unwrap();
    let report =
        kernel_report(&geom, &BoundaryConditionSpec::Anderson, 2, &grid, KERNEL_TOL_FACTOR)
            .unwrap();
    assert_eq!(report.per_mode.len(), 125);
    assert_eq!(report.total_kernel_dim, 5, "total kernel dimension");
    for res in &report.per_mode {
        if res.mode.n == [0, 0, 0] {
            assert_eq!(res.kernel_dim, 5, "zero-mode kernel dimension");
        } else {
            assert_eq!(res.kernel_dim, 0, "unexpected kernel at {:?}", res.mode.n);
        }
    }
    let zero = report.zero_mode().expect("zero mode in range");
    let gap = kernel_subspace_gap(&zero.kernel_basis, &anderson_analytic_kernel(&grid));
    assert!(gap <= 1e-8, "kernel subspace angle {gap}");
    c.finish();
}

#[test]
fn criterion_4_dirichlet_gap_control() {
    let _gate = lock();
    let c = Criterion::begin("criterion 4 (Dirichlet spectral gap)", 120.0);

    let geom = flat_geom();
    let grid = Grid1D::new(1.0, 201).unwrap();
    let report =
        kernel_report(&geom, &BoundaryConditionSpec::Dirichlet, 2, &grid, KERNEL_TOL_FACTOR)
            .unwrap();
    assert_eq!(report.total_kernel_dim, 0, "Dirichlet must have no kernel");

    let lam = (std::f64::consts::PI / 2.0).powi(2);
    let mut errs = Vec::new();
    for &m in &[101usize, 201, 401] {
        let g = Grid1D::new(1.0, m).unwrap();
        let mode = ModeIndex::new([0, 0, 0], &geom);
        let op = assemble_mode_operator(&geom, &BoundaryConditionSpec::Dirichlet, &mode, &g)
            .unwrap();
        let res = mode_spectrum(&op, 1).unwrap();
        let smallest = res.eigenvalues[0];
        assert!(smallest.im.abs() < 1e-8 * lam);
        assert!(
            (smallest.re - lam).abs() < 0.01 * lam,
            "M={m}: smallest eigenvalue {smallest} vs {lam}"
        );
        errs.push((smallest.re - lam).abs());
    }
    let rate = (errs[0] / errs[2]).log2() / 2.0;
    assert!((rate - 2.0).abs() <= 0.2, "convergence rate {rate}, errors {errs:?}");
    c.finish();
}

#[test]
fn criterion_5_gauge_invariance() {
    let _gate = lock();
    let c = Criterion::begin("criterion 5 (gauge invariance)", 60.0);

    let geom = flat_geom();
    let grid = Grid1D::new(1.0, 400).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let fields: Vec<_> =
        (0..20).map(|_| sample_collar_field(&geom, &grid, 0.25, &mut rng).unwrap()).collect();
    let specs: Vec<_> = (0..200).map(|_| sample_valid_spec(&mut rng)).collect();
    let mut max_residual = 0.0f64;
    for field in &fields {
        let u = gauge_potential(&field.omega, &field.mode, &grid);
        for spec in &specs {
            for side in Side::BOTH {
                let r = boundary_residual(&u, spec, &geom, &field.mode, &grid, side).unwrap();
                max_residual = max_residual.max(r.max_abs());
            }
        }
    }
    assert!(max_residual <= 1e-6, "max gauge residual {max_residual}");

    // grid convergence of the admissible residual: second order is the
    // floor; the composed-stencil construction superconverges (rate ~3)
    let mut errs = Vec::new();
    for &m in &[100usize, 200, 400] {
        let g = Grid1D::new(1.0, m).unwrap();
        let mode = ModeIndex::new([1, 0, 0], &geom);
        let amps: [C64; NCOMP1] = [
            C64::new(0.8, 0.1),
            C64::new(-0.3, 0.5),
            C64::new(0.2, -0.6),
            C64::new(0.4, 0.4),
        ];
        let field = make_collar_gauge_field(&mode, &geom, &g, amps, 0.25).unwrap();
        let r = gauge_residual_of(&field.omega, &mode, &BoundaryConditionSpec::Anderson, &geom, &g)
            .unwrap();
        errs.push(r);
    }
    let rate = (errs[0] / errs[2]).log2() / 2.0;
    println!(
        "[acceptance]   gauge residual convergence rate {rate:.2} (>= 2 - 0.2 required; \
         the degree-4-exact boundary stencils superconverge past the nominal 2)"
    );
    assert!(rate >= 1.8, "measured rate {rate}, errors {errs:?}");

    // the non-admissible quartic leaves grid-independent residuals 4 and 16
    let mode0 = ModeIndex::new([0, 0, 0], &geom);
    for &m in &[101usize, 201, 401, 801] {
        let g = Grid1D::new(1.0, m).unwrap();
        let mut w = ModeTensor1::zeros(g.m);
        for j in 0..g.m {
            let s = g.s[j];
            w.comp_mut(0)[j] = C64::new((s * s - 1.0).powi(2), 0.0);
        }
        let u = gauge_potential(&w, &mode0, &g);
        for side in Side::BOTH {
            let r =
                boundary_residual(&u, &BoundaryConditionSpec::Anderson, &geom, &mode0, &g, side)
                    .unwrap();
            match r {
                BoundaryResidual::Conformal { res_a, res_d, .. } => {
                    assert!((res_a.norm() - 4.0).abs() <= 1e-6, "M={m}: res_a {res_a}");
                    assert!((res_d.norm() - 16.0).abs() <= 1e-6, "M={m}: res_d {res_d}");
                }
                _ => unreachable!(),
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_6_linearised_mean_curvature() {
    let _gate = lock();
    let c = Criterion::begin("criterion 6 (mean-curvature linearisation)", 1.0);

    let geom = GeometrySpec::warped_torus_product(2.0, [1.0; 3], WarpProfile::quad01()).unwrap();
    let pert = Perturbation::normal_block(1.0);
    let report = fd_linearisation_check(&geom, &pert, 1.0, &[1e-2, 1e-3, 1e-4]).unwrap();
    let target = 3.0 / 11.0;
    assert!(
        (report.richardson_limit - target).abs() < 1e-6,
        "richardson limit {}",
        report.richardson_limit
    );
    assert!(report.discrepancy < 1e-6, "discrepancy {}", report.discrepancy);

    // dropping the h00 term misses the limit by exactly 3/11
    let without = linearised_mean_curvature(&geom, &pert, 1.0, false).unwrap();
    let missing = (without - report.richardson_limit).abs();
    assert!((missing - target).abs() < 1e-4, "missing term {missing} vs {target}");
    c.finish();
}

#[test]
fn criterion_7_operator_identities() {
    let _gate = lock();
    let c = Criterion::begin("criterion 7 (operator identities)", 30.0);

    let geom = flat_geom();
    let mut rng = ChaCha8Rng::seed_from_u64(512);

    // delta K = D1 and K D1 = D2 K on 50 random modes/fields, with the
    // aggregate max error converging at second order
    let grids = [101usize, 201, 401];
    let mut err_dk = [0.0f64; 3];
    let mut err_kd = [0.0f64; 3];
    for _ in 0..50 {
        let n: [i32; 3] = std::array::from_fn(|_| rng.random_range(-2i32..=2));
        let mode = ModeIndex::new(n, &geom);
        let coeffs: Vec<(f64, f64, f64)> = (0..NCOMP1)
            .map(|_| {
                (
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.5..2.0),
                )
            })
            .collect();
        for (gi, &m) in grids.iter().enumerate() {
            let g = Grid1D::new(1.0, m).unwrap();
            let mut w = ModeTensor1::zeros(g.m);
            for cidx in 0..NCOMP1 {
                let (a, b, k) = coeffs[cidx];
                for j in 0..g.m {
                    let s = g.s[j];
                    w.comp_mut(cidx)[j] =
                        C64::new(a * (k * s).sin() + b * (2.0 * s).cos(), b * (k * s).cos());
                }
            }
            let lhs1 = divergence(&gauge_potential(&w, &mode, &g), &mode, &g);
            let rhs1 = apply_d1(&w, &mode, &g, &geom);
            for cidx in 0..NCOMP1 {
                for j in 0..g.m {
                    err_dk[gi] =
                        err_dk[gi].max((lhs1.comp(cidx)[j] - rhs1.comp(cidx)[j]).norm());
                }
            }
            let lhs2 = gauge_potential(&apply_d1(&w, &mode, &g, &geom), &mode, &g);
            let rhs2 = apply_d2(&gauge_potential(&w, &mode, &g), &mode, &g, &geom);
            for cidx in 0..NCOMP2 {
                for j in 0..g.m {
                    err_kd[gi] =
                        err_kd[gi].max((lhs2.comp(cidx)[j] - rhs2.comp(cidx)[j]).norm());
                }
            }
        }
    }
    let rate_dk = (err_dk[0] / err_dk[2]).log2() / 2.0;
    let rate_kd = (err_kd[0] / err_kd[2]).log2() / 2.0;
    assert!((rate_dk - 2.0).abs() <= 0.2, "delta K = D1 rate {rate_dk}, errors {err_dk:?}");
    assert!((rate_kd - 2.0).abs() <= 0.2, "K D1 = D2 K rate {rate_kd}, errors {err_kd:?}");

    // trace reversal is an exact involution
    let mut u = ModeTensor2::zeros(31);
    for cidx in 0..NCOMP2 {
        for j in 0..31 {
            u.comp_mut(cidx)[j] =
                C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        }
    }
    let uu = trace_reverse(&trace_reverse(&u));
    for cidx in 0..NCOMP2 {
        for j in 0..31 {
            assert!((uu.comp(cidx)[j] - u.comp(cidx)[j]).norm() < 1e-13);
        }
    }

    // I-weighted symmetry defect of the Anderson operator halves under
    // each grid doubling
    let mut defects = Vec::new();
    for &m in &[100usize, 200, 400] {
        let g = Grid1D::new(1.0, m).unwrap();
        let mode = ModeIndex::new([1, 0, 0], &geom);
        let op = assemble_mode_operator(&geom, &BoundaryConditionSpec::Anderson, &mode, &g)
            .unwrap();
        let mut srng = ChaCha8Rng::seed_from_u64(29);
        let samples: Vec<ModeTensor2> =
            (0..4).map(|_| smooth_constrained_sample(&op, &mut srng)).collect();
        defects.push(symmetry_defect(&op, &samples, &geom).unwrap());
    }
    for w in defects.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (1.7..2.4).contains(&ratio),
            "symmetry defect ratio {ratio}, defects {defects:?}"
        );
    }
    c.finish();
}
