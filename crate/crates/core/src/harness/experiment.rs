//! End-to-end experiment pipeline: instance construction, reference solve,
//! parameter resolution, certificates, runs, CSV traces and plots.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::almethods::{run, AlgorithmConfig, RunOptions};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::dist;
use crate::network::{
    build_chain_graph, build_complete_graph, build_geometric_graph_with_limit, GraphFile, NetworkModel,
};
use crate::objective::ObjectiveStack;
use crate::theory::{evaluate_certificate, max_node_error, RateCertificate, Recipe, SaddlePoint};

use super::config::{ExperimentConfig, NetworkSpec, NetworkTopology, ObjectiveSpec};
use super::data::{generate_quadratic_data, LogisticDataset};
use super::metrics::{trace_rows, write_trace_csv, TraceRow};
use super::plot::regenerate_plots;
use super::reference::{reference_solve, ReferenceSolution};

/// Problem data shared by every run of an experiment.
#[derive(Clone, Debug)]
pub struct Instance {
    pub net: NetworkModel,
    pub stack: ObjectiveStack,
    pub reference: ReferenceSolution,
    pub saddle: SaddlePoint,
    /// Generated or loaded logistic samples, when the objective has them.
    pub dataset: Option<LogisticDataset>,
}

impl Instance {
    /// Common primal initialization (zero at every node).
    pub fn x0(&self) -> Vec<f64> {
        vec![0.0; self.stack.dim()]
    }
}

pub fn build_network(spec: &NetworkSpec, cfg: &ExperimentConfig) -> Result<NetworkModel> {
    let [a, b] = spec.scaling;
    let graph = match &spec.topology {
        NetworkTopology::Geometric { nodes, radius, seed, max_attempts } => {
            build_geometric_graph_with_limit(*nodes, *radius, *seed, *max_attempts)?
        }
        NetworkTopology::Chain { nodes } => build_chain_graph(*nodes)?,
        NetworkTopology::Complete { nodes } => build_complete_graph(*nodes)?,
        NetworkTopology::File { path } => return GraphFile::load(cfg.resolve_path(path))?.into_model(),
    };
    NetworkModel::with_scaled_metropolis(graph, a, b)
}

pub fn build_objective(
    spec: &ObjectiveSpec,
    nodes: usize,
    cfg: &ExperimentConfig,
) -> Result<(ObjectiveStack, Option<LogisticDataset>)> {
    match spec {
        ObjectiveSpec::Logistic { dim, regularization, seed } => {
            let ds = LogisticDataset::generate(nodes, *dim, *seed)?;
            Ok((ds.to_stack(*regularization)?, Some(ds)))
        }
        ObjectiveSpec::Quadratic { dim, seed } => Ok((generate_quadratic_data(nodes, *dim, *seed)?, None)),
        ObjectiveSpec::Dataset { path, regularization } => {
            let ds = LogisticDataset::load_csv(cfg.resolve_path(path))?;
            if ds.len() != nodes {
                return Err(Error::Config(format!(
                    "dataset has {} rows but the network has {nodes} nodes",
                    ds.len()
                )));
            }
            Ok((ds.to_stack(*regularization)?, Some(ds)))
        }
    }
}

/// Network, objective, reference solution and saddle point.
pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    cfg.validate().map_err(Error::at("config"))?;
    let net = build_network(&cfg.network, cfg).map_err(Error::at("network"))?;
    let (stack, dataset) =
        build_objective(&cfg.objective, net.node_count(), cfg).map_err(Error::at("objective"))?;
    let reference = reference_solve(&stack).map_err(Error::at("reference"))?;
    if !(reference.cost_gap() > 0.0) {
        return Err(Error::at("reference")(Error::DegenerateReference { gap: reference.cost_gap() }));
    }
    let saddle = SaddlePoint::from_solution(&stack, &reference.x_star).map_err(Error::at("reference"))?;
    Ok(Instance { net, stack, reference, saddle, dataset })
}

/// Concrete parameters for each configured algorithm, in config order.
pub fn resolve_algorithms(cfg: &ExperimentConfig, inst: &Instance) -> Result<Vec<(String, AlgorithmConfig)>> {
    cfg.algorithms
        .iter()
        .map(|a| {
            let c = a.resolve(inst.stack.h_min(), inst.stack.h_max(), inst.net.lambda2(), inst.net.node_count())?;
            c.validate(&inst.stack)?;
            Ok((a.display_name(), c))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(Error::at("config"))
}

pub const COST_BOUND_TRANSLATION: &str = "f(x_i) - f* <= (N h_max / 2) ||x_i - x*||^2 because the aggregate Hessian \
is bounded by N h_max; with ||x_i(k) - x*|| <= r^k B this gives relative cost error <= N h_max (r^k B)^2 / (2 (f(0) - f*))";

/// Observed end state of a run next to the a-priori bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub outer_iterations: usize,
    pub transmissions_total: u64,
    pub grad_evals_total: u64,
    pub final_rel_cost_error: f64,
    pub final_rel_cost_bound: f64,
    pub final_max_node_error: f64,
    pub final_primal_bound: f64,
}

/// Certificate report written next to each trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub name: String,
    pub recipe: Option<Recipe>,
    pub seed: u64,
    pub prox_epsilon: f64,
    pub dim: usize,
    pub f_star: f64,
    pub cost_gap: f64,
    pub conditions_hold: bool,
    /// Outer iterations the bound needs for relative primal error `1e−6`.
    pub iterations_for_1e_6: Option<f64>,
    pub cost_bound_translation: String,
    pub certificate: RateCertificate,
    pub outcome: Option<RunOutcome>,
}

impl CertificateReport {
    pub fn new(name: &str, recipe: Option<Recipe>, cfg: &AlgorithmConfig, inst: &Instance) -> Result<Self> {
        let x0 = inst.x0();
        let certificate = evaluate_certificate(cfg, &inst.stack, &inst.net, &inst.reference.x_star, &x0)?;
        let initial_error = dist(&crate::linalg::replicate(&x0, inst.net.node_count()), &inst.saddle.x_bullet);
        Ok(CertificateReport {
            name: name.to_string(),
            recipe,
            seed: cfg.seed,
            prox_epsilon: cfg.prox.epsilon,
            dim: inst.stack.dim(),
            f_star: inst.reference.f_star,
            cost_gap: inst.reference.cost_gap(),
            conditions_hold: certificate.conditions_hold(),
            iterations_for_1e_6: certificate.iterations_for(1e-6, initial_error),
            cost_bound_translation: COST_BOUND_TRANSLATION.to_string(),
            certificate,
            outcome: None,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, toml::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// One finished run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub name: String,
    pub config: AlgorithmConfig,
    pub report: CertificateReport,
    pub rows: Vec<TraceRow>,
    pub csv_path: PathBuf,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub instance: Instance,
    pub runs: Vec<RunSummary>,
    pub plots: Vec<PathBuf>,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn recipes(cfg: &ExperimentConfig) -> Vec<Option<Recipe>> {
    cfg.algorithms.iter().map(|a| a.recipe).collect()
}

/// Certificates only: writes `<name>.certificate.toml` for every algorithm.
pub fn certify(cfg: &ExperimentConfig) -> Result<Vec<CertificateReport>> {
    let inst = build_instance(cfg)?;
    let algs = resolve_algorithms(cfg, &inst)?;
    let dir = cfg.resolved_output_dir();
    prepare_dir(&dir).map_err(Error::at("output"))?;
    algs.iter()
        .zip(recipes(cfg))
        .map(|((name, c), recipe)| {
            let report = CertificateReport::new(name, recipe, c, &inst).map_err(Error::at("certificate"))?;
            report
                .save(dir.join(format!("{name}.certificate.toml")))
                .map_err(Error::at("output"))?;
            Ok(report)
        })
        .collect()
}

fn run_one(
    name: &str,
    recipe: Option<Recipe>,
    c: &AlgorithmConfig,
    inst: &Instance,
    k_max: usize,
    execution: Execution,
    dir: &Path,
) -> Result<RunSummary> {
    let mut report = CertificateReport::new(name, recipe, c, inst).map_err(Error::at("certificate"))?;
    let opts = RunOptions {
        initial: None,
        execution,
        check_xbar: false,
    };
    let trace = run(&inst.stack, &inst.net, c, k_max, &opts).map_err(Error::at("run"))?;
    let rows = trace_rows(&trace, &inst.stack, &inst.net, &inst.reference, &inst.saddle).map_err(Error::at("metrics"))?;
    let last_row = rows.last().expect("trace holds the initial record");
    let last = trace.last();
    let cert = &report.certificate;
    report.outcome = Some(RunOutcome {
        outer_iterations: last.k,
        transmissions_total: last.transmissions,
        grad_evals_total: last.grad_evals_total(),
        final_rel_cost_error: last_row.rel_cost_error,
        final_rel_cost_bound: cert.relative_cost_bound(last.k, inst.reference.cost_gap()),
        final_max_node_error: max_node_error(&last.x, &inst.reference.x_star),
        final_primal_bound: cert.primal_bound(last.k),
    });
    let csv_path = dir.join(format!("{name}.csv"));
    write_trace_csv(&csv_path, &rows).map_err(Error::at("output"))?;
    report
        .save(dir.join(format!("{name}.certificate.toml")))
        .map_err(Error::at("output"))?;
    Ok(RunSummary {
        name: name.to_string(),
        config: *c,
        report,
        rows,
        csv_path,
        wall_clock_secs: last.elapsed_secs,
    })
}

#[derive(Serialize)]
struct Timing<'a> {
    name: &'a str,
    wall_clock_secs: f64,
}

#[derive(Serialize)]
struct TimingFile<'a> {
    run: Vec<Timing<'a>>,
}

/// Run every configured algorithm and write traces, certificate reports,
/// instance files and both plots into the output directory.
///
/// Wall-clock times go to `timing.toml`, separate from the deterministic
/// trace CSVs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let inst = build_instance(cfg)?;
    let algs = resolve_algorithms(cfg, &inst)?;
    let dir = cfg.resolved_output_dir();
    let execution = if cfg.parallel { Execution::Parallel } else { Execution::Sequential };
    let write_instance = || -> Result<()> {
        prepare_dir(&dir)?;
        let idir = dir.join("instance");
        prepare_dir(&idir)?;
        inst.net.to_file().save(idir.join("graph.json"))?;
        if let Some(ds) = &inst.dataset {
            ds.save_csv(idir.join("dataset.csv"))?;
        }
        std::fs::write(idir.join("reference.toml"), toml::to_string(&inst.reference)?)?;
        std::fs::write(idir.join("config.toml"), cfg.to_toml_string()?)?;
        Ok(())
    };
    write_instance().map_err(Error::at("output"))?;
    let recipes = recipes(cfg);
    let runs = execution.try_map(algs.len(), |j| {
        let (name, c) = &algs[j];
        run_one(name, recipes[j], c, &inst, cfg.k_max, execution, &dir)
    })?;
    let timing = TimingFile {
        run: runs
            .iter()
            .map(|r| Timing { name: &r.name, wall_clock_secs: r.wall_clock_secs })
            .collect(),
    };
    let write_timing = || -> Result<()> {
        std::fs::write(dir.join("timing.toml"), toml::to_string(&timing)?)?;
        Ok(())
    };
    write_timing().map_err(Error::at("output"))?;
    let plots = regenerate_plots(&dir).map_err(Error::at("plot"))?;
    Ok(ExperimentOutcome { output_dir: dir, instance: inst, runs, plots })
}
