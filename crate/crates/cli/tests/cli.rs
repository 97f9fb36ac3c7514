use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use interconnect_cli::RunConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interconnect"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("INTERCONNECT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn config_arg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn summary(dir: &Path) -> toml::Table {
    toml::from_str(&fs::read_to_string(dir.join("summary.toml")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn regular_pipeline_reports() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "pipeline",
            "--config",
            &config_arg("regular.toml"),
            "--grid",
            "400",
        ],
        d.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(d.path());
    assert_eq!(s["classification"]["case"].as_str(), Some("Regular"));
    let direct = s["classification"]["direct"].as_float().unwrap();
    assert!((direct - 4.9348).abs() < 1e-4);
    assert_eq!(s["run"]["grid_intervals"].as_integer(), Some(400));

    let series = fs::read_to_string(d.path().join("series.csv")).unwrap();
    let mut lines = series.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,v,v_hat,U,u,terminal_mode_1,"));
    assert!(header.ends_with("terminal_mode_8"));
    assert_eq!(lines.count(), 401);
    let gamma = fs::read_to_string(d.path().join("gamma.csv")).unwrap();
    assert!(gamma.starts_with("n,gamma\n1,"));
}

#[test]
fn singular_pipeline_records_order() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "pipeline",
            "--config",
            &config_arg("singular.toml"),
            "--grid",
            "400",
        ],
        d.path(),
    );
    assert!(o.status.success());
    let s = summary(d.path());
    assert_eq!(s["classification"]["case"].as_str(), Some("Singular(1)"));
    assert_eq!(s["inversion"]["order"].as_integer(), Some(1));
    // no pointwise control in the singular case
    let series = fs::read_to_string(d.path().join("series.csv")).unwrap();
    let row: Vec<&str> = series.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4], "nan");
}

#[test]
fn config_echo_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "pipeline",
            "--config",
            &config_arg("regular.toml"),
            "--grid",
            "300",
            "--modes",
            "4",
        ],
        d.path(),
    );
    assert!(o.status.success());
    let echo = RunConfig::load(&d.path().join("config_echo.toml")).unwrap();
    let mut expected = RunConfig::load(&configs().join("regular.toml")).unwrap();
    expected.grid = 300;
    expected.modes = 4;
    assert_eq!(echo, expected);
}

#[test]
fn analyze_heat_family() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &["analyze", "--config", &config_arg("heat_family.toml")],
        d.path(),
    );
    assert!(o.status.success());
    let s = summary(d.path());
    assert_eq!(
        s["minimality"]["dirichlet"]["hypothesis_holds"].as_bool(),
        Some(true)
    );
    assert_eq!(s["minimality"]["gamma"].as_array().unwrap().len(), 13);
}

#[test]
fn degenerate_family_is_data_not_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &["analyze", "--config", &config_arg("degenerate_family.toml")],
        d.path(),
    );
    assert!(o.status.success());
    let s = summary(d.path());
    assert_eq!(s["minimality"]["verdict"].as_str(), Some("degenerate"));
    assert!(!s["diagnostics"]["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn validation_failures_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "pipeline",
            "--config",
            &config_arg("regular.toml"),
            "--grid",
            "1",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    let cfg = write_config(
        d.path(),
        "scenario = \"empty\"\n[functions]\nb1 = { kind = \"polynomial\", data = [] }\n",
    );
    assert_eq!(
        run(&["analyze", "--config", &cfg], d.path()).status.code(),
        Some(2)
    );
    let cfg = write_config(d.path(), "scenario = [1, 2]\n");
    assert_eq!(
        run(&["analyze", "--config", &cfg], d.path()).status.code(),
        Some(2)
    );
    let missing = d.path().join("missing.toml");
    let o = run(
        &["synthesize", "--config", missing.to_str().unwrap()],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gram_overflow_exits_3_with_usable_order() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "scenario = \"overflow\"\n[family]\nweights = [1.0, 1.0, 1.0]\nrates = [1.0, 4.0, 400.0]\n",
    );
    let o = run(&["analyze", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(3));
    let s = summary(d.path());
    assert_eq!(s["failure"]["largest_usable"].as_integer(), Some(2));
}

#[test]
fn uncontrollable_synthesis_exits_4_with_partial_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        r#"
scenario = "uncontrollable"
modes = 2
grid = 100
[functions]
b1 = { kind = "sine", data = [1.0] }
phi0 = { kind = "sine", data = [0.0, 1.0] }
"#,
    );
    let o = run(&["synthesize", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(
        summary(d.path())["failure"]["stage"].as_str(),
        Some("synthesis")
    );
}

#[test]
fn synthesize_writes_control() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "synthesize",
            "--config",
            &config_arg("regular.toml"),
            "--grid",
            "500",
        ],
        d.path(),
    );
    assert!(o.status.success());
    let s = summary(d.path());
    assert!(s["synthesis"]["scaled_residual"].as_float().unwrap() < 1e-8);
    let header = fs::read_to_string(d.path().join("series.csv")).unwrap();
    assert!(header.starts_with("t,v,u,terminal_mode_1"));
}

#[test]
fn selftest_exit_codes_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&["selftest", "--seed", "3"], a.path()).status.success());
    assert!(run(&["selftest", "--seed", "3"], b.path()).status.success());
    assert_eq!(
        fs::read(a.path().join("selftest.toml")).unwrap(),
        fs::read(b.path().join("selftest.toml")).unwrap()
    );
    let o = run(&["selftest", "--perturb-kernel", "0.1"], a.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL volterra-constant-kernel"));
}

#[test]
fn output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_interconnect"))
        .args(["analyze", "--config", &config_arg("heat_family.toml")])
        .env("INTERCONNECT_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.path().join("summary.toml").exists());
}
