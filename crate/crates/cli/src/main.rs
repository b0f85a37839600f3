use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use dal_core::harness::{certify, regenerate_plots, run_experiment, CertificateReport, ExperimentConfig};
use dal_core::network::{build_geometric_graph_with_limit, GraphFile, NetworkModel, DEFAULT_GEOMETRIC_ATTEMPTS};

/// Distributed augmented Lagrangian experiments over networks.
#[derive(Parser)]
#[command(name = "dal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm in a config; writes CSV traces, certificates and plots.
    Run { config: PathBuf },
    /// Evaluate rate certificates only.
    Certify { config: PathBuf },
    /// Print the spectrum of a saved graph file.
    Spectrum { graph: PathBuf },
    /// Sample a connected random geometric graph and save it.
    Graph {
        #[arg(long, default_value_t = 10)]
        nodes: usize,
        #[arg(long, default_value_t = dal_core::network::DEFAULT_GEOMETRIC_RADIUS)]
        radius: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Redraw the plots of an output directory from its CSV traces.
    Plot { dir: PathBuf },
}

fn print_certificate(r: &CertificateReport) {
    let c = &r.certificate;
    println!(
        "{:<28} {:<18} tau={:<5} alpha={:<10.4e} rho={:<10.4e} xi={:<10.3e} r={:<8.6} alpha_ok={} xi_ok={} B={:.3e}",
        r.name, c.variant, c.tau, c.alpha, c.rho, c.xi, c.r, c.alpha_ok, c.xi_ok, c.bound_constant
    );
}

fn load(config: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::load(config).with_context(|| format!("stage `config` failed for {}", config.display()))
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let out = run_experiment(&cfg)?;
            let inst = &out.instance;
            println!(
                "N={} d={} h_min={:.4e} h_max={:.4e} gamma={:.4} lambda2={:.6} links={}",
                inst.net.node_count(),
                inst.stack.dim(),
                inst.stack.h_min(),
                inst.stack.h_max(),
                inst.stack.condition_number(),
                inst.net.lambda2(),
                inst.net.graph().link_count()
            );
            for run in &out.runs {
                print_certificate(&run.report);
                let last = run.rows.last().expect("non-empty trace");
                println!(
                    "    k={} transmissions={} grad_evals={} rel_cost_error={:.3e} wall={:.3}s",
                    last.k, last.transmissions_total, last.grad_evals_total, last.rel_cost_error, run.wall_clock_secs
                );
            }
            println!("output: {}", out.output_dir.display());
        }
        Command::Certify { config } => {
            let cfg = load(&config)?;
            for r in certify(&cfg)? {
                print_certificate(&r);
            }
        }
        Command::Spectrum { graph } => {
            let model = GraphFile::load(&graph)
                .and_then(GraphFile::into_model)
                .with_context(|| format!("stage `network` failed for {}", graph.display()))?;
            print_spectrum(&model);
        }
        Command::Graph { nodes, radius, seed, output } => {
            let g = build_geometric_graph_with_limit(nodes, radius, seed, DEFAULT_GEOMETRIC_ATTEMPTS)
                .context("stage `network` failed")?;
            let model = NetworkModel::with_scaled_metropolis(
                g,
                dal_core::network::DEFAULT_SCALING.0,
                dal_core::network::DEFAULT_SCALING.1,
            )
            .context("stage `network` failed")?;
            model.to_file().save(&output).context("stage `output` failed")?;
            print_spectrum(&model);
        }
        Command::Plot { dir } => {
            for p in regenerate_plots(&dir).context("stage `plot` failed")? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn print_spectrum(model: &NetworkModel) {
    let s = model.spectrum();
    println!("nodes: {}", model.node_count());
    println!("links: {}", model.graph().link_count());
    println!("lambda2: {:.12e}", s.lambda2());
    println!("lambda_max: {:.12e}", s.lambda_max());
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ");
    println!("laplacian eigenvalues: {}", fmt(&s.eigenvalues()));
    println!("weight eigenvalues: {}", fmt(&model.weights().eigenvalues()));
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
