mod common;

use std::path::Path;
use std::time::Instant;

use approx::assert_abs_diff_eq;
use dal_core::harness::data::label_for;
use dal_core::harness::*;
use dal_core::objective::{NodeCost, ObjectiveStack, QuadraticCost};
use dal_core::Error;

use common::{dist, norm};

fn config_in(dir: &Path, body: &str) -> ExperimentConfig {
    let text = format!("output_dir = {:?}\n{body}", dir.to_str().unwrap());
    ExperimentConfig::from_toml_str(&text).unwrap()
}

const MINIMAL: &str = r#"
k_max = 50
[network]
kind = "chain"
nodes = 2
[objective]
kind = "quadratic"
dim = 1
seed = 3
[[algorithm]]
recipe = "section5_jacobi"
"#;

const SMALL_LOGISTIC: &str = r#"
k_max = 40
[network]
kind = "geometric"
nodes = 6
radius = 0.6
seed = 2
[objective]
kind = "logistic"
dim = 4
seed = 5
[[algorithm]]
recipe = "section5_jacobi"
[[algorithm]]
recipe = "section5_gradient"
[[algorithm]]
recipe = "section5_rand_gs"
seed = 3
[[algorithm]]
name = "jacobi_tau1"
recipe = "section5_jacobi"
tau = 1
"#;

#[test]
fn reference_matches_linear_solve() {
    let stack = generate_quadratic_data(6, 4, 9).unwrap();
    let r = reference_solve(&stack).unwrap();
    let oracle = common::quadratic_optimum(&stack);
    assert!(dist(&r.x_star, &oracle) <= 1e-12 * norm(&oracle).max(1.0));
}

#[test]
fn reference_meets_gradient_tolerance_on_logistic() {
    for seed in 0..5 {
        let stack = generate_logistic_data(10, 15, 1.0, seed).unwrap();
        let r = reference_solve(&stack).unwrap();
        let g0 = norm(&stack.grad_aggregate(&vec![0.0; 15]).unwrap());
        let g = norm(&stack.grad_aggregate(&r.x_star).unwrap());
        assert!(g <= 1e-12 * g0.max(1.0), "seed {seed}: {g:e}");
        assert_eq!(g, r.grad_norm_at_solution);
        assert!(r.cost_gap() > 0.0);
    }
}

#[test]
fn relative_cost_error_examples() {
    let stack = generate_logistic_data(5, 3, 1.0, 4).unwrap();
    let r = reference_solve(&stack).unwrap();
    let at_opt: Vec<f64> = (0..5).flat_map(|_| r.x_star.clone()).collect();
    assert_eq!(relative_cost_error(&stack, &r, &at_opt).unwrap(), 0.0);
    assert_abs_diff_eq!(relative_cost_error(&stack, &r, &[0.0; 15]).unwrap(), 1.0, epsilon = 1e-15);

    // Direct evaluation: f(x_i) = Σ_j f_j(x_i) for every node's copy.
    let x: Vec<f64> = (0..15).map(|k| (k as f64 * 0.8).sin()).collect();
    let mut oracle = 0.0;
    for i in 0..5 {
        let xi = &x[i * 3..(i + 1) * 3];
        let f: f64 = stack.costs().iter().map(|c| c.value(xi)).sum();
        oracle += (f - r.f_star) / (r.f_zero - r.f_star);
    }
    oracle /= 5.0;
    assert_abs_diff_eq!(relative_cost_error(&stack, &r, &x).unwrap(), oracle, epsilon = 1e-14 * oracle.abs().max(1.0));
    assert!(relative_cost_error(&stack, &r, &x[..3]).is_err());
}

#[test]
fn degenerate_reference_is_signalled() {
    // Minimizer at the origin makes f(0) = f*.
    let c = NodeCost::Quadratic(QuadraticCost::isotropic(&[0.0], 1.0).unwrap());
    let stack = ObjectiveStack::new(vec![c.clone(), c]).unwrap();
    let r = reference_solve(&stack).unwrap();
    assert!(matches!(relative_cost_error(&stack, &r, &[0.0, 0.0]), Err(Error::DegenerateReference { .. })));
}

#[test]
fn generator_is_deterministic_and_follows_sign_rule() {
    let a = LogisticDataset::generate(10, 15, 4).unwrap();
    assert_eq!(a, LogisticDataset::generate(10, 15, 4).unwrap());
    assert_ne!(a, LogisticDataset::generate(10, 15, 5).unwrap());
    for (f, &b) in a.features.iter().zip(&a.labels) {
        assert!(b == 1.0 || b == -1.0);
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let margin: f64 = a.true_vector[..14].iter().zip(f).map(|(t, v)| t * v).sum::<f64>();
        // Away from the noise level the label only depends on the margin sign.
        if (margin + a.true_vector[14]).abs() > 0.1 && (a.true_vector[14] - margin).abs() > 0.1 {
            assert_eq!(label_for(&a.true_vector, f, 0.0), b);
            assert_eq!(label_for(&a.true_vector, &neg, 0.0), (a.true_vector[14] - margin).signum());
        }
    }
}

#[test]
fn section_v_scale_condition_number() {
    let g = generate_logistic_data(10, 15, 1.0, 7).unwrap().condition_number();
    assert!((10.0..100.0).contains(&g), "γ = {g}");
}

#[test]
fn dataset_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = LogisticDataset::generate(7, 5, 1).unwrap();
    let p = dir.path().join("d.csv");
    a.save_csv(&p).unwrap();
    let b = LogisticDataset::load_csv(&p).unwrap();
    assert_eq!(a.features, b.features);
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.to_stack(1.0).unwrap(), b.to_stack(1.0).unwrap());
}

#[test]
fn minimal_config_is_fast_and_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), MINIMAL);
    let start = Instant::now();
    let out = run_experiment(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 1.0, "{secs} s");
    let last = out.runs[0].rows.last().unwrap();
    assert_eq!(last.k, 50);
    // The reported error metric is the relative cost error; it scales with the
    // square of the primal distance, which is still around 1e-8 here.
    assert!(last.rel_cost_error < 1e-10, "{:e}", last.rel_cost_error);
    assert!(last.rel_cost_error >= -64.0 * f64::EPSILON);
}

#[test]
fn experiment_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config_in(dir.path(), SMALL_LOGISTIC)).unwrap();
    for name in ["section5_jacobi", "section5_gradient", "section5_rand_gs", "jacobi_tau1"] {
        let rows = read_trace_csv(dir.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(rows.len(), 41);
        let report = CertificateReport::load(dir.path().join(format!("{name}.certificate.toml"))).unwrap();
        assert_eq!(report.name, name);
        assert!(report.outcome.is_some());
        assert!(!report.cost_bound_translation.is_empty());
    }
    for f in ["instance/graph.json", "instance/dataset.csv", "instance/reference.toml", "instance/config.toml", "timing.toml"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(out.plots.len(), 2);
    for p in &out.plots {
        let svg = std::fs::read_to_string(p).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
        assert!(svg.contains("jacobi_tau1"));
    }
}

#[test]
fn recipe_runs_stay_below_cost_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config_in(dir.path(), SMALL_LOGISTIC)).unwrap();
    for run in out.runs.iter().filter(|r| r.name.starts_with("section5_") && !r.config.variant.is_randomized()) {
        let o = run.report.outcome.as_ref().unwrap();
        let floor = 64.0 * f64::EPSILON;
        assert!(o.final_rel_cost_error >= -floor);
        assert!(o.final_rel_cost_error <= o.final_rel_cost_bound, "{}", run.name);
        assert!(o.final_max_node_error <= o.final_primal_bound, "{}", run.name);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&config_in(a.path(), SMALL_LOGISTIC)).unwrap();
    let mut seq = config_in(b.path(), SMALL_LOGISTIC);
    seq.parallel = false;
    run_experiment(&seq).unwrap();
    let mut compared = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if name.ends_with(".csv") || name.ends_with(".certificate.toml") || name.ends_with(".svg") {
            assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.path().join(&name)).unwrap(), "{name}");
            compared += 1;
        }
    }
    assert_eq!(compared, 10);
}

#[test]
fn plots_regenerate_from_csv_alone() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config_in(dir.path(), SMALL_LOGISTIC)).unwrap();
    let before: Vec<Vec<u8>> = out.plots.iter().map(|p| std::fs::read(p).unwrap()).collect();
    for p in &out.plots {
        std::fs::remove_file(p).unwrap();
    }
    // Only the CSVs remain as input.
    std::fs::remove_dir_all(dir.path().join("instance")).unwrap();
    let again = regenerate_plots(dir.path()).unwrap();
    assert_eq!(again, out.plots);
    for (p, b) in again.iter().zip(&before) {
        assert_eq!(&std::fs::read(p).unwrap(), b);
    }
}

#[test]
fn invalid_recipe_fails_before_computation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let text = format!("output_dir = {:?}\n{}", out.to_str().unwrap(), MINIMAL.replace("section5_jacobi", "section7_jacobi"));
    let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
    assert!(err.to_string().contains("section7_jacobi") || format!("{err:?}").contains("section7_jacobi"), "{err}");
    assert!(!out.exists());
}

#[test]
fn failing_stage_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), &MINIMAL.replace("kind = \"chain\"\nnodes = 2", "kind = \"file\"\npath = \"missing.json\""));
    let err = run_experiment(&cfg).unwrap_err();
    assert!(err.to_string().contains("network"), "{err}");
    let bad_radius = SMALL_LOGISTIC.replace("radius = 0.6", "radius = 0.01\nmax_attempts = 5");
    let err = run_experiment(&config_in(dir.path(), &bad_radius)).unwrap_err();
    assert!(err.to_string().contains("network"), "{err}");
}

#[test]
fn saved_graph_and_dataset_reproduce_the_instance() {
    let first = tempfile::tempdir().unwrap();
    let a = run_experiment(&config_in(first.path(), SMALL_LOGISTIC)).unwrap();
    let second = tempfile::tempdir().unwrap();
    let body = format!(
        r#"
k_max = 40
[network]
kind = "file"
path = {:?}
[objective]
kind = "dataset"
path = {:?}
[[algorithm]]
recipe = "section5_jacobi"
"#,
        first.path().join("instance/graph.json").to_str().unwrap(),
        first.path().join("instance/dataset.csv").to_str().unwrap()
    );
    let b = run_experiment(&config_in(second.path(), &body)).unwrap();
    assert_eq!(a.instance.reference.x_star, b.instance.reference.x_star);
    assert_eq!(a.instance.net.weights().matrix(), b.instance.net.weights().matrix());
    assert_eq!(
        std::fs::read(first.path().join("section5_jacobi.csv")).unwrap(),
        std::fs::read(second.path().join("section5_jacobi.csv")).unwrap()
    );
}

#[test]
fn relative_paths_resolve_against_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, format!("output_dir = \"results\"\n{MINIMAL}")).unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    if std::env::var_os(OUTPUT_DIR_ENV).is_none() {
        assert_eq!(cfg.resolved_output_dir(), dir.path().join("results"));
    }
}

#[test]
fn certify_reports_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let reports = certify(&config_in(dir.path(), SMALL_LOGISTIC)).unwrap();
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r.outcome.is_none()));
    assert!(reports[0].conditions_hold);
    assert!(!reports[3].conditions_hold, "τ = 1 should not be certified");
    assert!(!dir.path().join("section5_jacobi.csv").exists());
}

#[test]
fn trace_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![TraceRow {
        k: 3,
        transmissions_total: 30,
        grad_evals_total: 1234,
        rel_cost_error: 0.1 + 0.2,
        primal_error_norm: 1e-300,
        dual_sum_norm: 0.0,
        lyapunov_value: std::f64::consts::PI,
    }];
    let p = dir.path().join("t.csv");
    write_trace_csv(&p, &rows).unwrap();
    assert_eq!(read_trace_csv(&p).unwrap(), rows);
    let header = std::fs::read_to_string(&p).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, TRACE_HEADER.join(","));
}
