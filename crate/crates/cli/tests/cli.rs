//! End-to-end checks of the binary: exit codes, file outputs and
//! determinism of the emitted data.

use std::path::Path;
use std::process::Command;

fn einbc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_einbc"))
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = einbc()
        .args(["--out", dir.to_str().unwrap()])
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn tempdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("einbc-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sl_check_exit_codes_follow_the_verdict() {
    let dir = tempdir("sl");
    let (code, stdout, _) = run_in(&dir, &["sl-check", "--c2", "1", "--s", "zero"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("elliptic"));

    let (code, _, _) = run_in(&dir, &["sl-check", "--c2", "0", "--s", "zero"]);
    assert_eq!(code, 1);

    let (code, stdout, _) = run_in(&dir, &["sl-check", "--c2", "0", "--s", "1,1,-1,0,0,0"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("failing direction"));
    let csv = std::fs::read_to_string(dir.join("sl_check.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("c2,s11"));
}

#[test]
fn spectrum_reports_the_anderson_kernel() {
    let dir = tempdir("spectrum");
    let (code, stdout, stderr) = run_in(
        &dir,
        &["spectrum", "--bc", "anderson", "--T", "1", "--modes", "1", "--grid", "61", "--count", "0"],
    );
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("spectrum_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["kernel_dim_total"], 5);
    assert_eq!(summary["gap"], 0.0);
    // kernel basis profiles are emitted in the fixed component order
    let kernel_csv = std::fs::read_to_string(dir.join("kernel_n0_0_0_vec0.csv")).unwrap();
    assert!(kernel_csv.lines().nth(1).unwrap().starts_with("s,re_ss,im_ss,re_s1"));
}

#[test]
fn spectrum_dirichlet_gap_and_degenerate_exit() {
    let dir = tempdir("spectrum-dirichlet");
    let (code, stdout, _) = run_in(
        &dir,
        &["spectrum", "--bc", "dirichlet", "--T", "1", "--modes", "0", "--grid", "101", "--count", "1"],
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("kernel_dim_total = 0"), "{stdout}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("spectrum_summary.json")).unwrap())
            .unwrap();
    let gap = summary["gap"].as_f64().unwrap();
    let lam = (std::f64::consts::PI / 2.0).powi(2);
    assert!((gap - lam).abs() < 0.02 * lam, "gap {gap}");

    // degenerate general spec: exit 3
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "[boundary]\nkind = general\nc1 = 0\nc2 = 0\nv = 0,0,0\ns_matrix = zero\n")
        .unwrap();
    let bc = format!("general:{}", bad.display());
    let (code, _, stderr) =
        run_in(&dir, &["spectrum", "--bc", &bc, "--modes", "0", "--grid", "61"]);
    assert_eq!(code, 3, "stderr: {stderr}");
}

#[test]
fn gauge_check_passes_anderson_and_fails_dirichlet() {
    let dir = tempdir("gauge");
    let (code, stdout, _) = run_in(
        &dir,
        &["gauge-check", "--bc", "anderson", "--batch", "6", "--seed", "7", "--random-specs", "10"],
    );
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS"));

    let (code, stdout, _) =
        run_in(&dir, &["gauge-check", "--bc", "dirichlet", "--batch", "3", "--seed", "7"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL"));
}

#[test]
fn linearise_check_detects_the_missing_term() {
    let dir = tempdir("linearise");
    let (code, stdout, _) = run_in(&dir, &["linearise-check", "--warp", "quad01", "--s0", "1"]);
    assert_eq!(code, 0, "{stdout}");

    let (code, stdout, _) =
        run_in(&dir, &["linearise-check", "--warp", "quad01", "--s0", "1", "--drop-h00-term"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("0.2727"), "{stdout}");
}

#[test]
fn bad_config_exits_with_code_two() {
    let dir = tempdir("badcfg");
    let cfg = dir.join("over.cfg");
    std::fs::write(&cfg, "[numerics]\ngrid = 99999\n").unwrap();
    let (code, _, stderr) = run_in(
        &dir,
        &["--config", cfg.to_str().unwrap(), "spectrum", "--bc", "anderson", "--modes", "0"],
    );
    assert_eq!(code, 2, "stderr: {stderr}");

    let (code, _, _) = run_in(&dir, &["spectrum", "--bc", "nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn outputs_are_deterministic_apart_from_the_timestamp() {
    let dir1 = tempdir("det1");
    let dir2 = tempdir("det2");
    let args =
        ["spectrum", "--bc", "anderson", "--modes", "1", "--grid", "61", "--count", "2", "--jobs", "2"];
    let (c1, _, _) = run_in(&dir1, &args);
    let (c2, _, _) = run_in(&dir2, &args);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    let strip = |p: &Path| -> String {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# generated"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&dir1.join("eigenvalues.csv")), strip(&dir2.join("eigenvalues.csv")));
    let strip_json = |p: &Path| -> String {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip_json(&dir1.join("spectrum_summary.json")),
        strip_json(&dir2.join("spectrum_summary.json"))
    );
}

#[test]
fn help_is_available_for_every_subcommand() {
    for sub in ["sl-check", "sl-scan", "spectrum", "gauge-check", "linearise-check", "intertwine-check"] {
        let out = einbc().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success(), "{sub} --help failed");
        assert!(!out.stdout.is_empty());
    }
}
