//! Command-line front end: ellipticity checks and scans, per-mode spectra,
//! gauge-invariance batches, linearisation checks and the operator-identity
//! convergence run.
//!
//! Exit codes: 0 = pass, 1 = a checked property is violated, 2 = bad
//! configuration or arguments, 3 = degenerate boundary spec.

mod config;
mod output;
mod pool;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use einbc::boundary::{sample_valid_spec, BoundaryConditionSpec};
use einbc::ellipticity::{half_space_kernel, sl_check, sl_scan, SlScanGrid, SlVerdict};
use einbc::gauge::{gauge_invariance_residual, sample_collar_field_in_modes};
use einbc::geometry::{GeometrySpec, WarpProfile};
use einbc::linearise::{fd_linearisation_check, linearised_mean_curvature, Perturbation};
use einbc::spectral::{assemble_mode_operator, mode_spectrum_with_tol, SpectralResult};
use einbc::tensor_ops::{
    apply_d1, apply_d2, divergence, gauge_potential, Grid1D, ModeIndex, ModeTensor1, NCOMP1,
    NCOMP2,
};

use config::{boundary_from_flag, parse_floats, parse_s_matrix, ConfigError, IniFile, RunConfig};
use output::{fmt_c64, OutputDir};

const EXIT_VIOLATION: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_DEGENERATE: i32 = 3;

#[derive(Parser)]
#[command(name = "einbc", version, about = "Boundary-condition toolkit for the linearised Einstein operator on [-T,T] x T^3")]
struct Cli {
    /// INI configuration file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker pool size for mode/batch parallelism
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shapiro-Lopatinskij check of one (C2, S) pair
    SlCheck(SlCheckArgs),
    /// Sweep the SL verdict over a (C2, t) grid with S = t * S_base
    SlScan(SlScanArgs),
    /// Per-mode spectra, kernels and gaps of the constrained operator
    Spectrum(SpectrumArgs),
    /// Gauge-invariance residuals of collar fields against boundary specs
    GaugeCheck(GaugeArgs),
    /// Exact-vs-linearised mean curvature on a warped background
    LineariseCheck(LineariseArgs),
    /// Convergence rates of the operator identities delta K = D1, K D1 = D2 K
    IntertwineCheck(IntertwineArgs),
}

#[derive(Args)]
struct SlCheckArgs {
    /// Coefficient C2 of the scalar boundary condition
    #[arg(long)]
    c2: f64,
    /// S matrix: `zero` or six values s11,s22,s33,s12,s13,s23
    #[arg(long, default_value = "zero")]
    s: String,
    /// Cross-check the verdict against the half-space kernel oracle on
    /// this many random directions
    #[arg(long, default_value_t = 0)]
    oracle: usize,
}

#[derive(Args)]
struct SlScanArgs {
    #[arg(long, default_value_t = -1.0)]
    c2_min: f64,
    #[arg(long, default_value_t = 1.0)]
    c2_max: f64,
    #[arg(long, default_value_t = 21)]
    c2_steps: usize,
    /// Base S matrix scaled by t (same format as --s)
    #[arg(long, default_value = "1,1,-1,0,0,0")]
    s_base: String,
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value_t = 11)]
    t_steps: usize,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Boundary conditions: dirichlet, anderson or general:<ini-file>
    #[arg(long)]
    bc: Option<String>,
    /// Euclidean-time half-width T
    #[arg(long = "T")]
    t: Option<f64>,
    /// Torus periods L1,L2,L3
    #[arg(long = "L")]
    l: Option<String>,
    /// Mode cutoff: all |n_i| <= N
    #[arg(long)]
    modes: Option<i32>,
    /// Number of s-grid points
    #[arg(long)]
    grid: Option<usize>,
    /// Eigenvalues of smallest modulus per mode
    #[arg(long, default_value_t = 6)]
    count: usize,
}

#[derive(Args)]
struct GaugeArgs {
    /// Boundary conditions: dirichlet, anderson or general:<ini-file>
    #[arg(long, default_value = "anderson")]
    bc: String,
    /// INI file with a [boundary] section (same as --bc general:<file>)
    #[arg(long, conflicts_with = "bc")]
    spec_file: Option<PathBuf>,
    /// Number of collar gauge fields
    #[arg(long, default_value_t = 20)]
    batch: usize,
    /// Mode cutoff |n_i| <= N for the sampled collar fields
    #[arg(long, default_value_t = 1)]
    modes: i32,
    /// Additional random valid general conformal specs per field
    #[arg(long, default_value_t = 0)]
    random_specs: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Collar width (must be below T/2)
    #[arg(long, default_value_t = 0.25)]
    collar: f64,
    /// Residual tolerance for the pass/fail verdict
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct LineariseArgs {
    /// Warp preset: flat, exp or quad01
    #[arg(long, default_value = "quad01")]
    warp: String,
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    /// Decreasing lambda sequence for the difference quotients
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    lambda_seq: String,
    /// Drop the tr(k) h00 term from the closed-form linearisation
    #[arg(long, default_value_t = false)]
    drop_h00_term: bool,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct IntertwineArgs {
    /// Comma-separated grid sizes for the convergence measurement
    #[arg(long, default_value = "101,201,401")]
    grids: String,
    /// Number of random mode/field pairs
    #[arg(long, default_value_t = 50)]
    fields: usize,
    #[arg(long, default_value_t = 512)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let ini = match &cli.config {
        Some(path) => match IniFile::load(path) {
            Ok(ini) => ini,
            Err(e) => return config_failure(&e),
        },
        None => IniFile::default(),
    };
    let mut cfg = match RunConfig::from_ini(&ini) {
        Ok(cfg) => cfg,
        Err(e) => return config_failure(&e),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Err(e) = cfg.validate() {
        return config_failure(&e);
    }
    let out = match OutputDir::create(&cfg.out_dir) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: cannot create output directory: {e}");
            return EXIT_CONFIG;
        }
    };

    let result = match cli.command {
        Command::SlCheck(args) => cmd_sl_check(&args, &out),
        Command::SlScan(args) => cmd_sl_scan(&args, &out),
        Command::Spectrum(args) => cmd_spectrum(&args, &cfg, &out),
        Command::GaugeCheck(args) => cmd_gauge_check(&args, &cfg, &out),
        Command::LineariseCheck(args) => cmd_linearise(&args, &cfg, &out),
        Command::IntertwineCheck(args) => cmd_intertwine(&args, &cfg, &out),
    };
    match result {
        Ok(code) => code,
        Err(CmdError::Config(e)) => config_failure(&e),
        Err(CmdError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(CmdError::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                einbc::Error::DegenerateSpec { .. } | einbc::Error::InvalidSpec(_) => EXIT_DEGENERATE,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn config_failure(e: &ConfigError) -> i32 {
    eprintln!("error: {e}");
    EXIT_CONFIG
}

enum CmdError {
    Config(ConfigError),
    Core(einbc::Error),
    Io(std::io::Error),
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}

impl From<einbc::Error> for CmdError {
    fn from(e: einbc::Error) -> Self {
        CmdError::Core(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

type CmdResult = Result<i32, CmdError>;

fn verdict_row(c2: f64, s: &[f64; 6], v: &SlVerdict) -> String {
    let w = v.witness.unwrap_or([f64::NAN; 3]);
    format!(
        "{c2},{},{},{},{},{},{},{},{},{},{},{}",
        s[0], s[1], s[2], s[3], s[4], s[5], v.elliptic, v.margin, w[0], w[1], w[2]
    )
}

const SL_HEADER: &str = "c2,s11,s22,s33,s12,s13,s23,elliptic,margin,witness_x,witness_y,witness_z";

fn cmd_sl_check(args: &SlCheckArgs, out: &OutputDir) -> CmdResult {
    let s = parse_s_matrix(&args.s)?;
    let verdict = sl_check(args.c2, &s);
    println!(
        "SL check: C2 = {}, S = {:?}: {} (margin {:.6})",
        args.c2,
        s,
        if verdict.elliptic { "elliptic" } else { "NOT elliptic" },
        verdict.margin
    );
    if let Some(w) = verdict.witness {
        println!("failing direction: ({:.6}, {:.6}, {:.6})", w[0], w[1], w[2]);
    }
    if args.oracle > 0 {
        let spec = BoundaryConditionSpec::general_shared(einbc::boundary::GeneralCoefficients::new(
            0.0, args.c2, [0.0; 3], s,
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut kernel_seen = false;
        for _ in 0..args.oracle {
            let xi: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            if xi.iter().map(|x| x * x).sum::<f64>() < 1e-2 {
                continue;
            }
            if half_space_kernel(&spec, xi)?.dimension > 0 {
                kernel_seen = true;
                break;
            }
        }
        let witness_kernel = match verdict.witness {
            Some(w) => half_space_kernel(&spec, w)?.dimension > 0,
            None => false,
        };
        let agrees = verdict.elliptic == !(kernel_seen || witness_kernel);
        println!("half-space oracle agreement: {agrees}");
        if !agrees {
            return Ok(EXIT_VIOLATION);
        }
    }
    out.write_csv("sl_check.csv", SL_HEADER, [verdict_row(args.c2, &s, &verdict)])?;
    Ok(if verdict.elliptic { 0 } else { EXIT_VIOLATION })
}

fn cmd_sl_scan(args: &SlScanArgs, out: &OutputDir) -> CmdResult {
    let s_base = parse_s_matrix(&args.s_base)?;
    let grid = SlScanGrid {
        c2_min: args.c2_min,
        c2_max: args.c2_max,
        c2_steps: args.c2_steps,
        s_base,
        t_min: args.t_min,
        t_max: args.t_max,
        t_steps: args.t_steps,
    };
    let table = sl_scan(&grid);
    let elliptic = table.iter().filter(|e| e.verdict.elliptic).count();
    println!("SL scan: {} grid points, {} elliptic", table.len(), elliptic);
    out.write_csv(
        "sl_scan.csv",
        SL_HEADER,
        table.iter().map(|e| verdict_row(e.c2, &e.s_matrix, &e.verdict)),
    )?;
    Ok(0)
}

fn resolve_spectrum_config(args: &SpectrumArgs, cfg: &RunConfig) -> Result<(GeometrySpec, BoundaryConditionSpec, usize, i32), CmdError> {
    let t = args.t.unwrap_or(cfg.geometry.half_width);
    let periods = match &args.l {
        Some(text) => parse_floats::<3>(text)?,
        None => cfg.geometry.periods,
    };
    let geom = GeometrySpec::flat_torus_product(t, periods)?;
    let spec = match &args.bc {
        Some(flag) => boundary_from_flag(flag)?,
        None => cfg.boundary.clone(),
    };
    let m = args.grid.unwrap_or(cfg.grid_points);
    let n_max = args.modes.unwrap_or(cfg.mode_cutoff);
    if m > config::MAX_GRID || n_max > config::MAX_MODES || n_max < 0 {
        return Err(CmdError::Config(ConfigError(format!(
            "grid {m} / modes {n_max} outside the documented bounds"
        ))));
    }
    Ok((geom, spec, m, n_max))
}

fn cmd_spectrum(args: &SpectrumArgs, cfg: &RunConfig, out: &OutputDir) -> CmdResult {
    let (geom, spec, m, n_max) = resolve_spectrum_config(args, cfg)?;
    let grid = Grid1D::new(geom.half_width, m)?;

    let mut modes = Vec::new();
    for n1 in -n_max..=n_max {
        for n2 in -n_max..=n_max {
            for n3 in -n_max..=n_max {
                modes.push([n1, n2, n3]);
            }
        }
    }
    let results: Vec<Result<SpectralResult, einbc::Error>> =
        pool::run_ordered(&modes, cfg.jobs, |n| {
            let mode = ModeIndex::new(*n, &geom);
            let op = assemble_mode_operator(&geom, &spec, &mode, &grid)?;
            mode_spectrum_with_tol(&op, args.count, cfg.tolerance)
        });
    let mut per_mode = Vec::with_capacity(results.len());
    for r in results {
        per_mode.push(r?);
    }

    let total_kernel: usize = per_mode.iter().map(|r| r.kernel_dim).sum();
    let gap = if total_kernel > 0 {
        0.0
    } else {
        per_mode
            .iter()
            .filter_map(|r| r.eigenvalues.first())
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    };
    println!(
        "spectrum: {} modes, kernel_dim_total = {total_kernel}, gap = {gap:.6}",
        per_mode.len()
    );
    for r in per_mode.iter().filter(|r| r.kernel_dim > 0) {
        println!("  kernel at n = {:?}: dimension {}", r.mode.n, r.kernel_dim);
    }

    if cfg.write_csv {
        out.write_csv(
            "eigenvalues.csv",
            "n1,n2,n3,re,im",
            per_mode.iter().flat_map(|r| {
                r.eigenvalues.iter().map(move |z| {
                    format!("{},{},{},{:.16e},{:.16e}", r.mode.n[0], r.mode.n[1], r.mode.n[2], z.re, z.im)
                })
            }),
        )?;
        // kernel basis profiles in the fixed component order
        let comp_names = ["ss", "s1", "s2", "s3", "11", "22", "33", "12", "13", "23"];
        let mut header = String::from("s");
        for name in comp_names {
            header.push_str(&format!(",re_{name},im_{name}"));
        }
        for r in per_mode.iter().filter(|r| r.kernel_dim > 0) {
            for (k, vec) in r.kernel_basis.iter().enumerate() {
                let rows = (0..grid.m).map(|j| {
                    let mut row = format!("{:.16e}", grid.s[j]);
                    for c in 0..NCOMP2 {
                        row.push_str(&format!(",{}", fmt_c64(vec.comp(c)[j])));
                    }
                    row
                });
                out.write_csv(
                    &format!(
                        "kernel_n{}_{}_{}_vec{k}.csv",
                        r.mode.n[0], r.mode.n[1], r.mode.n[2]
                    ),
                    &header,
                    rows,
                )?;
            }
        }
    }
    if cfg.write_json {
        let summary = serde_json::json!({
            "timestamp": output::timestamp(),
            "bc": format!("{:?}", spec),
            "half_width": geom.half_width,
            "periods": geom.periods,
            "grid": m,
            "modes": n_max,
            "count": args.count,
            "kernel_dim_total": total_kernel,
            "gap": gap,
            "per_mode": per_mode.iter().map(|r| serde_json::json!({
                "n": r.mode.n,
                "xi_norm": r.mode.xi_norm(),
                "kernel_dim": r.kernel_dim,
                "smallest_singular": r.smallest_singular,
                "eigenvalues": r.eigenvalues.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        out.write_json("spectrum_summary.json", &summary)?;
    }
    if cfg.plot {
        out.write_plot_data(
            "plot_eigenvalues.dat",
            per_mode.iter().flat_map(|r| r.eigenvalues.iter().map(|z| (z.re, z.im))),
        )?;
        out.write_plot_data(
            "plot_gap_vs_xi.dat",
            per_mode.iter().filter_map(|r| {
                r.eigenvalues.first().map(|z| (r.mode.xi_norm(), z.norm()))
            }),
        )?;
        out.write_gnuplot(
            "plot.gp",
            "set terminal pngcairo size 900,600\n\
             set output 'eigenvalues.png'\n\
             set xlabel 'Re'\nset ylabel 'Im'\n\
             plot 'plot_eigenvalues.dat' using 1:2 with points title 'eigenvalues'\n\
             set output 'gap_vs_xi.png'\n\
             set xlabel '|xi|'\nset ylabel 'smallest |lambda|'\n\
             plot 'plot_gap_vs_xi.dat' using 1:2 with points title 'gap'\n",
        )?;
    }
    Ok(0)
}

fn cmd_gauge_check(args: &GaugeArgs, cfg: &RunConfig, out: &OutputDir) -> CmdResult {
    let (label, spec) = match &args.spec_file {
        Some(path) => (
            path.display().to_string(),
            boundary_from_flag(&format!("general:{}", path.display()))?,
        ),
        None => (args.bc.clone(), boundary_from_flag(&args.bc)?),
    };
    let geom = if cfg.geometry.is_flat() {
        cfg.geometry.clone()
    } else {
        return Err(CmdError::Config(ConfigError(
            "gauge-check runs on the flat background".into(),
        )));
    };
    if args.modes < 0 || args.modes > config::MAX_MODES {
        return Err(CmdError::Config(ConfigError(format!(
            "modes = {} outside [0, {}]",
            args.modes,
            config::MAX_MODES
        ))));
    }
    let m = args.grid.unwrap_or(400.min(config::MAX_GRID));
    let grid = Grid1D::new(geom.half_width, m)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let fields: Vec<_> = (0..args.batch)
        .map(|_| sample_collar_field_in_modes(&geom, &grid, args.collar, args.modes, &mut rng))
        .collect::<Result<_, _>>()?;
    let mut specs: Vec<(String, BoundaryConditionSpec)> = vec![(label, spec)];
    for k in 0..args.random_specs {
        specs.push((format!("random{k}"), sample_valid_spec(&mut rng)));
    }

    let pairs: Vec<(usize, usize)> = (0..fields.len())
        .flat_map(|f| (0..specs.len()).map(move |s| (f, s)))
        .collect();
    let residuals: Vec<Result<f64, einbc::Error>> = pool::run_ordered(&pairs, cfg.jobs, |&(f, s)| {
        gauge_invariance_residual(&fields[f], &specs[s].1, &geom, &grid)
    });

    let mut rows = Vec::with_capacity(pairs.len());
    let mut max_residual = 0.0f64;
    for (&(f, s), res) in pairs.iter().zip(residuals) {
        let r = res?;
        max_residual = max_residual.max(r);
        rows.push(format!(
            "{f},{},{},{},{},{:.16e}",
            specs[s].0, fields[f].mode.n[0], fields[f].mode.n[1], fields[f].mode.n[2], r
        ));
    }
    out.write_csv("gauge_residuals.csv", "field,spec,n1,n2,n3,residual", rows)?;

    let pass = max_residual <= args.tol;
    println!(
        "gauge-check: {} fields x {} specs at M = {m}: max residual {max_residual:.3e} ({})",
        fields.len(),
        specs.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    if cfg.write_json {
        let summary = serde_json::json!({
            "timestamp": output::timestamp(),
            "bc": specs[0].0,
            "batch": args.batch,
            "random_specs": args.random_specs,
            "grid": m,
            "seed": seed,
            "collar_width": args.collar,
            "tolerance": args.tol,
            "max_residual": max_residual,
            "pass": pass,
        });
        out.write_json("gauge_summary.json", &summary)?;
    }
    Ok(if pass { 0 } else { EXIT_VIOLATION })
}

fn cmd_linearise(args: &LineariseArgs, cfg: &RunConfig, out: &OutputDir) -> CmdResult {
    let warp = WarpProfile::preset(&args.warp)?;
    let geom = if args.warp == "flat" {
        GeometrySpec::flat_torus_product(cfg.geometry.half_width.max(args.s0.abs() + 0.5), cfg.geometry.periods)?
    } else {
        GeometrySpec::warped_torus_product(
            cfg.geometry.half_width.max(args.s0.abs() + 0.5),
            cfg.geometry.periods,
            warp,
        )?
    };
    let lambdas: Vec<f64> = args
        .lambda_seq
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| ConfigError(format!("bad lambda sequence `{}`", args.lambda_seq)))?;

    // the probe perturbation is the normal block h = ds (x) ds, the
    // detector of the tr(k) h00 term
    let pert = Perturbation::normal_block(1.0);
    let report = fd_linearisation_check(&geom, &pert, args.s0, &lambdas)?;
    let formula = if args.drop_h00_term {
        linearised_mean_curvature(&geom, &pert, args.s0, false)?
    } else {
        report.formula_value
    };
    let discrepancy = (formula - report.richardson_limit).abs();

    println!("linearise-check: warp {}, s0 = {}", args.warp, args.s0);
    println!("  lambda        fd-quotient       formula          discrepancy");
    for (lambda, fd) in &report.fd_values {
        println!("  {lambda:<12.3e}  {fd:<16.10}  {formula:<16.10}  {:.3e}", (formula - fd).abs());
    }
    println!("  richardson limit: {:.10}", report.richardson_limit);
    println!("  h00-term value:   {:.10}", report.dropped_term_value);
    println!("  discrepancy:      {discrepancy:.3e} (tolerance {:.1e})", args.tol);

    out.write_csv(
        "linearise_check.csv",
        "lambda,fd,formula,discrepancy",
        report
            .fd_values
            .iter()
            .map(|(l, fd)| format!("{l:.16e},{fd:.16e},{formula:.16e},{:.16e}", (formula - fd).abs())),
    )?;
    if cfg.write_json {
        let summary = serde_json::json!({
            "timestamp": output::timestamp(),
            "warp": args.warp,
            "s0": args.s0,
            "drop_h00_term": args.drop_h00_term,
            "richardson_limit": report.richardson_limit,
            "formula": formula,
            "dropped_term_value": report.dropped_term_value,
            "discrepancy": discrepancy,
            "pass": discrepancy <= args.tol,
        });
        out.write_json("linearise_summary.json", &summary)?;
    }
    Ok(if discrepancy <= args.tol { 0 } else { EXIT_VIOLATION })
}

fn cmd_intertwine(args: &IntertwineArgs, cfg: &RunConfig, out: &OutputDir) -> CmdResult {
    let grids: Vec<usize> = args
        .grids
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| ConfigError(format!("bad grid list `{}`", args.grids)))?;
    if grids.len() < 2 {
        return Err(CmdError::Config(ConfigError("need at least two grids".into())));
    }
    let geom = if cfg.geometry.is_flat() {
        cfg.geometry.clone()
    } else {
        return Err(CmdError::Config(ConfigError(
            "intertwine-check runs on the flat background".into(),
        )));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut err_dk = vec![0.0f64; grids.len()];
    let mut err_kd = vec![0.0f64; grids.len()];
    for _ in 0..args.fields {
        let n: [i32; 3] = std::array::from_fn(|_| rng.random_range(-2i32..=2));
        let mode = ModeIndex::new(n, &geom);
        let coeffs: Vec<(f64, f64, f64)> = (0..NCOMP1)
            .map(|_| {
                (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0))
            })
            .collect();
        for (gi, &m) in grids.iter().enumerate() {
            let grid = Grid1D::new(geom.half_width, m)?;
            let mut w = ModeTensor1::zeros(grid.m);
            for c in 0..NCOMP1 {
                let (a, b, k) = coeffs[c];
                for j in 0..grid.m {
                    let s = grid.s[j];
                    w.comp_mut(c)[j] =
                        C64::new(a * (k * s).sin() + b * (2.0 * s).cos(), b * (k * s).cos());
                }
            }
            let lhs1 = divergence(&gauge_potential(&w, &mode, &grid), &mode, &grid);
            let rhs1 = apply_d1(&w, &mode, &grid, &geom);
            for c in 0..NCOMP1 {
                for j in 0..grid.m {
                    err_dk[gi] = err_dk[gi].max((lhs1.comp(c)[j] - rhs1.comp(c)[j]).norm());
                }
            }
            let lhs2 = gauge_potential(&apply_d1(&w, &mode, &grid, &geom), &mode, &grid);
            let rhs2 = apply_d2(&gauge_potential(&w, &mode, &grid), &mode, &grid, &geom);
            for c in 0..NCOMP2 {
                for j in 0..grid.m {
                    err_kd[gi] = err_kd[gi].max((lhs2.comp(c)[j] - rhs2.comp(c)[j]).norm());
                }
            }
        }
    }
    let span = grids.len() - 1;
    let h_ratio = ((grids[span] - 1) as f64 / (grids[0] - 1) as f64).log2();
    let rate_dk = (err_dk[0] / err_dk[span]).log2() / h_ratio;
    let rate_kd = (err_kd[0] / err_kd[span]).log2() / h_ratio;
    println!("intertwine-check over grids {grids:?} with {} fields:", args.fields);
    println!("  delta K = D1 : errors {err_dk:?}, rate {rate_dk:.3}");
    println!("  K D1 = D2 K  : errors {err_kd:?}, rate {rate_kd:.3}");
    out.write_csv(
        "intertwine_check.csv",
        "grid,err_delta_k_d1,err_k_d1_d2_k",
        grids
            .iter()
            .zip(err_dk.iter().zip(err_kd.iter()))
            .map(|(m, (a, b))| format!("{m},{a:.16e},{b:.16e}")),
    )?;
    let pass = (rate_dk - 2.0).abs() <= 0.2 && (rate_kd - 2.0).abs() <= 0.2;
    println!("  verdict: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { EXIT_VIOLATION })
}
