use std::path::Path;
use std::process::{Command, Output};

const MINIMAL: &str = r#"
k_max = 30
[network]
kind = "chain"
nodes = 3
[objective]
kind = "quadratic"
dim = 2
seed = 3
[[algorithm]]
recipe = "section5_jacobi"
[[algorithm]]
recipe = "section5_gradient"
"#;

fn dal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dal")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    let out = dir.join("out");
    std::fs::write(&path, format!("output_dir = {:?}\n{body}", out.to_str().unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_traces_and_reports_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let o = dal(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("N=3 d=2"), "{text}");
    assert!(text.contains("alpha_ok=true xi_ok=true"), "{text}");
    let out = dir.path().join("out");
    for name in ["section5_jacobi", "section5_gradient"] {
        assert!(out.join(format!("{name}.csv")).exists(), "{name}");
        assert!(out.join(format!("{name}.certificate.toml")).exists(), "{name}");
    }
}

#[test]
fn certify_prints_one_line_per_algorithm_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let o = dal(&["certify", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(" r=")).count(), 2, "{text}");
    assert!(!dir.path().join("out").join("section5_jacobi.csv").exists());
}

#[test]
fn graph_then_spectrum_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    let g = graph.to_str().unwrap();
    let o = dal(&["graph", "--nodes", "8", "--radius", "0.6", "--seed", "2", "-o", g]);
    assert!(o.status.success(), "{}", stderr(&o));
    let generated = stdout(&o);
    let o = dal(&["spectrum", g]);
    assert!(o.status.success(), "{}", stderr(&o));
    let loaded = stdout(&o);
    assert_eq!(generated, loaded);
    assert!(loaded.starts_with("nodes: 8\n"), "{loaded}");
    let lambda2_line = loaded.lines().find(|l| l.starts_with("lambda2:")).unwrap();
    let lambda2: f64 = lambda2_line["lambda2:".len()..].trim().parse().unwrap();
    assert!(lambda2 > 0.0 && lambda2 < 1.0);
}

#[test]
fn plot_regenerates_figures_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    assert!(dal(&["run", &cfg]).status.success());
    let out = dir.path().join("out");
    let o = dal(&["plot", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let paths: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(paths.len(), 2);
    assert!(paths.iter().all(|p| Path::new(p).exists()));
}

#[test]
fn invalid_config_fails_naming_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MINIMAL.replace("section5_gradient", "no_such_recipe"));
    let o = dal(&["run", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `config`"), "{}", stderr(&o));

    let o = dal(&["spectrum", dir.path().join("missing.json").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `network`"), "{}", stderr(&o));
}

#[test]
fn output_dir_can_be_overridden_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let elsewhere = dir.path().join("elsewhere");
    let o = Command::new(env!("CARGO_BIN_EXE_dal"))
        .args(["run", &cfg])
        .env("DAL_OUTPUT_DIR", &elsewhere)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(elsewhere.join("section5_jacobi.csv").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bundled_minimal_config_certifies() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/minimal.toml");
    let o = dal(&["certify", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("section5_jacobi"));
}
