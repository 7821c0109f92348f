//! End-to-end tests of the `modlim` binary: exit codes, stdout contracts,
//! and the files each command writes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modlim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

const STEP_DOMAIN: &str =
    r#"{"kind": "step", "interval": [0.0, 2.0], "breakpoints": [1.0], "values": [1.0, 2.0]}"#;
const SQUARE_DOMAIN: &str =
    r#"{"kind": "step", "interval": [0.0, 1.0], "breakpoints": [], "values": [1.0]}"#;
const NON_LSC_DOMAIN: &str = r#"{"kind": "step", "interval": [0.0, 2.0], "breakpoints": [1.0],
    "values": [1.0, 2.0], "breakpoint_values": [1.5]}"#;
const TENT_DOMAIN: &str = r#"{"kind": "piecewise_linear", "interval": [0.0, 2.0],
    "breakpoints": [0.0, 1.0, 2.0], "values": [0.5, 1.5, 0.5]}"#;

// ---------------------------------------------------------------------------
// domain validate
// ---------------------------------------------------------------------------

#[test]
fn validate_reports_valid_step_domain() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "step.json", STEP_DOMAIN);
    let o = run(&["domain", "validate", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("kind: step"), "{out}");
    assert!(out.contains("area: 3.00000000000"), "{out}");
    assert!(out.contains("lsc: valid"), "{out}");
}

#[test]
fn validate_rejects_non_lsc_domain_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", NON_LSC_DOMAIN);
    let o = run(&["domain", "validate", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("not lower-semicontinuous"), "{err}");
    assert!(err.contains("x = 1"), "{err}");
}

#[test]
fn validate_missing_file_exits_1() {
    let o = run(&["domain", "validate", "/definitely/not/here.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn validate_unparsable_json_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "garbage.json", "{not json");
    let o = run(&["domain", "validate", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

// ---------------------------------------------------------------------------
// modulus
// ---------------------------------------------------------------------------

#[test]
fn modulus_vertical_prints_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "step.json", STEP_DOMAIN);
    let o = run(&["modulus", "--mode", "vertical", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("modulus: 1.50000000000"), "{}", stdout(&o));
}

#[test]
fn modulus_vertical_with_sub_arcs_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "step.json", STEP_DOMAIN);
    // Overlap (0.5, 1.5): ∫ 1/f = 0.5/1 + 0.5/2 = 0.75.
    let o = run(&[
        "modulus",
        "--mode",
        "vertical",
        p.to_str().unwrap(),
        "--quad",
        "0.5",
        "1.5",
        "2",
        "0.5",
        "--verify",
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("modulus: 0.750000000000"), "{out}");
    assert!(out.contains("extremality: verified"), "{out}");
}

#[test]
fn modulus_vertical_bad_prime_end_token_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "step.json", STEP_DOMAIN);
    let o = run(&[
        "modulus",
        "--mode",
        "vertical",
        p.to_str().unwrap(),
        "--quad",
        "0.5",
        "abc",
        "2",
        "0.5",
    ]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("not a number"), "{}", stderr(&o));
}

#[test]
fn modulus_analytic_quad_symmetric_triple_is_one() {
    let o = run(&["modulus", "--mode", "analytic-quad", "0", "1", "2"]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("modulus: 1.00000000000"), "{}", stdout(&o));
}

#[test]
fn modulus_analytic_quad_arity_and_order_are_usage_errors() {
    let o = run(&["modulus", "--mode", "analytic-quad", "0", "1"]);
    assert_eq!(code(&o), 64);
    let o = run(&["modulus", "--mode", "analytic-quad", "0", "2", "1"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn modulus_discrete_square_with_density_dump() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "square.json", SQUARE_DOMAIN);
    let out_dir = dir.path().join("out");
    let o = run(&[
        "modulus",
        "--mode",
        "discrete",
        p.to_str().unwrap(),
        "--h",
        "0.05",
        "--dump-density",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let out = stdout(&o);
    let value: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("value: "))
        .expect("value line")
        .parse()
        .unwrap();
    assert!((value - 1.0).abs() <= 0.02, "{out}");
    assert!(out.contains("converged: true"), "{out}");
    let density = std::fs::read_to_string(out_dir.join("density.csv")).unwrap();
    assert!(density.starts_with("x,y,rho\n"), "{density}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "modulus");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn modulus_discrete_too_coarse_grid_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "square.json", SQUARE_DOMAIN);
    let o = run(&["modulus", "--mode", "discrete", p.to_str().unwrap(), "--h", "2.0"]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("resolution too coarse"), "{}", stderr(&o));
}

// ---------------------------------------------------------------------------
// sweep eps
// ---------------------------------------------------------------------------

fn eps_config(domain: &str, extra: &str) -> String {
    format!(r#"{{"domain": {domain}, "eps_list": [0.5, 0.25, 0.125]{extra}}}"#)
}

#[test]
fn sweep_eps_step_domain_hits_target_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &eps_config(STEP_DOMAIN, r#", "rel_error_bound": 0.02"#),
    );
    let out_dir = dir.path().join("out");
    let o = run(&[
        "sweep",
        "eps",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("target (vertical modulus): 1.50000000000"), "{out}");
    assert!(out.contains("verdict: within bound"), "{out}");

    let csv = std::fs::read_to_string(out_dir.join("sweep_eps.csv")).unwrap();
    assert!(csv.starts_with("eps,h,raw_modulus,eps_times_modulus,lower_bound,gap\n"), "{csv}");
    assert_eq!(csv.lines().count(), 4);
    let svg = std::fs::read_to_string(out_dir.join("sweep_eps.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "{}", &svg[..60.min(svg.len())]);
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert_eq!(summary.trim_end(), out.trim_end());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "sweep eps");
    assert_eq!(
        manifest["outputs"],
        serde_json::json!(["sweep_eps.csv", "sweep_eps.svg", "summary.txt", "manifest.json"])
    );
}

#[test]
fn sweep_eps_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", &eps_config(STEP_DOMAIN, ""));
    let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&d1, &d2] {
        let o = run(&["sweep", "eps", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    }
    for name in ["sweep_eps.csv", "sweep_eps.svg", "summary.txt", "manifest.json"] {
        let a = std::fs::read(d1.join(name)).unwrap();
        let b = std::fs::read(d2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn sweep_eps_with_two_points_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"domain": {STEP_DOMAIN}, "eps_list": [0.5, 0.25]}}"#),
    );
    let o = run(&["sweep", "eps", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("extrapolation needs"), "{}", stderr(&o));
}

#[test]
fn sweep_eps_disjoint_quadruple_has_zero_target_and_decreasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"domain": {SQUARE_DOMAIN}, "quad": ["0", "0.3", "1", "0.7"],
                 "eps_list": [0.5, 0.25, 0.125], "rel_error_bound": 0.05}}"#
        ),
    );
    let out_dir = dir.path().join("out");
    let o = run(&[
        "sweep",
        "eps",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(
        stdout(&o).contains("target (vertical modulus): 0.00000000000"),
        "{}",
        stdout(&o)
    );
    let csv = std::fs::read_to_string(out_dir.join("sweep_eps.csv")).unwrap();
    let scaled: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(scaled.len(), 3);
    assert!(
        scaled.windows(2).all(|w| w[1] < w[0]),
        "scaled moduli not decreasing: {scaled:?}"
    );
}

#[test]
fn sweep_eps_domain_by_path_resolves_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "step.json", STEP_DOMAIN);
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"domain": "step.json", "eps_list": [0.5, 0.25, 0.125]}"#,
    );
    let out_dir = dir.path().join("out");
    let o = run(&[
        "sweep",
        "eps",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("target (vertical modulus): 1.50000000000"));
}

// ---------------------------------------------------------------------------
// sweep eta
// ---------------------------------------------------------------------------

#[test]
fn sweep_eta_square_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"domain": {SQUARE_DOMAIN}, "eta_list": [0.4, 0.2], "h": 0.04}}"#),
    );
    let out_dir = dir.path().join("out");
    let o = run(&[
        "sweep",
        "eta",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("nondecreasing in eta: true"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(out_dir.join("sweep_eta.csv")).unwrap();
    assert!(csv.starts_with("eta,restricted_modulus,gap\n"), "{csv}");
    assert!(out_dir.join("sweep_eta.svg").exists());
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn sweep_eta_below_cell_size_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"domain": {SQUARE_DOMAIN}, "eta_list": [0.01], "h": 0.04}}"#),
    );
    let o = run(&["sweep", "eta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("eta"), "{}", stderr(&o));
}

#[test]
fn sweep_eta_missing_h_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"domain": {SQUARE_DOMAIN}, "eta_list": [0.4, 0.2]}}"#),
    );
    let o = run(&["sweep", "eta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("config needs h"), "{}", stderr(&o));
}

// ---------------------------------------------------------------------------
// sandwich
// ---------------------------------------------------------------------------

#[test]
fn sandwich_square_holds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"domain": {SQUARE_DOMAIN}, "eps_list": [0.5, 0.25, 0.125],
                 "eta_list": [0.4, 0.2], "h": 0.04}}"#
        ),
    );
    let out_dir = dir.path().join("out");
    let o = run(&[
        "sandwich",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("verdict: sandwich holds"), "{}", stdout(&o));
    for name in ["sandwich_eps.csv", "sandwich_eta.csv", "sandwich.svg", "summary.txt", "manifest.json"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
}

// ---------------------------------------------------------------------------
// asymptotics
// ---------------------------------------------------------------------------

#[test]
fn asymptotics_defects_shrink_toward_degeneration() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let o = run(&[
        "asymptotics",
        "--w2",
        "0.9,0.99,0.999",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("defect decay: verified"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(out_dir.join("asymptotics.csv")).unwrap();
    assert!(csv.starts_with("w2,modulus,liouville_estimate,defect\n"), "{csv}");
}

#[test]
fn asymptotics_tolerates_non_asymptotic_rows() {
    // w2 = 0.5 sits outside the asymptotic regime: its large defect is
    // reported but not asserted on.
    let o = run(&["asymptotics", "--w2", "0.5,0.9,0.99,0.999"]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("asymptotic rows (w2 >= 0.9): 3"), "{}", stdout(&o));
}

#[test]
fn asymptotics_final_row_too_coarse_fails_decay_check() {
    // Ending the list at w2 = 0.9 leaves a final defect above 0.01.
    let o = run(&["asymptotics", "--w2", "0.9"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("not below 0.01"), "{}", stderr(&o));
}

#[test]
fn asymptotics_rejects_bad_lists() {
    let o = run(&["asymptotics", "--w2", "0.99,0.9"]);
    assert_eq!(code(&o), 64);
    let o = run(&["asymptotics", "--w2", "1.5"]);
    assert_eq!(code(&o), 64);
}

// ---------------------------------------------------------------------------
// lsc-approx
// ---------------------------------------------------------------------------

#[test]
fn lsc_approx_reports_decreasing_errors_and_writes_approximants() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "step.json", STEP_DOMAIN);
    let out_dir = dir.path().join("out");
    let o = run(&[
        "lsc-approx",
        p.to_str().unwrap(),
        "--n",
        "4,16",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("target integral: 1.50000000000"), "{out}");
    assert!(out.contains("errors decreasing: true"), "{out}");
    let csv = std::fs::read_to_string(out_dir.join("lsc.csv")).unwrap();
    assert!(csv.starts_with("n,integral,abs_diff\n"), "{csv}");
    for name in ["approximant_1.json", "approximant_2.json"] {
        let text = std::fs::read_to_string(out_dir.join(name)).unwrap();
        assert!(text.contains("piecewise_linear"), "{name}: {text}");
    }
}

#[test]
fn lsc_approx_non_step_profile_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "tent.json", TENT_DOMAIN);
    let o = run(&["lsc-approx", p.to_str().unwrap(), "--n", "4"]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("step"), "{}", stderr(&o));
}

// ---------------------------------------------------------------------------
// top-level usage
// ---------------------------------------------------------------------------

#[test]
fn unknown_subcommand_and_empty_invocation_are_usage_errors() {
    let o = run(&["frobnicate"]);
    assert_eq!(code(&o), 64);
    let o = run(&[]);
    assert_eq!(code(&o), 64);
}

#[test]
fn help_and_version_exit_zero() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("sandwich"), "{}", stdout(&o));
    let o = run(&["--version"]);
    assert_eq!(code(&o), 0);
}
