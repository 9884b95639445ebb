use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gtv_core::dataset::read_valued_csv;
use gtv_core::metrics::{self, BayesClassifier, Facet, PowerRule};
use gtv_core::solver::{self, SolverConfig};
use gtv_core::{GroundTruthModel, KernelProfile, LabeledCloud, NeighborGraph, NodeFunction};
use gtv_cli::config::{load_model, SweepConfig};
use gtv_cli::error::{CliError, Result};
use gtv_cli::{plot, sweep, RegimeReport};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gtv", version, about = "Graph total variation classification on point clouds")]
struct Cli {
    /// Seed for sampling and Monte-Carlo estimates.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Pd,
    Mincut,
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a labeled cloud from a model.
    Gen {
        /// Preset name or model JSON path.
        #[arg(long, default_value = "quadrant")]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "data.csv")]
        out: PathBuf,
    },
    /// Minimize the regularized empirical risk on a dataset.
    Solve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value = "indicator")]
        kernel: String,
        #[arg(long, value_enum, default_value = "mincut")]
        method: SolveMethod,
        #[arg(long, default_value = "solution.json")]
        out: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Evaluate the overfitting certificate.
    Certify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value = "indicator")]
        kernel: String,
    },
    /// Run a regime sweep described by a JSON config.
    Sweep {
        #[arg(long, required_unless_present = "example")]
        config: Option<PathBuf>,
        /// Print an example config and exit.
        #[arg(long)]
        example: bool,
    },
    /// Exact TL1 distance between two equal-size valued clouds.
    Tl1 {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Score a solution against its model on fresh samples.
    Risk {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        test_m: usize,
    },
    /// Surface tension of a kernel.
    Sigma {
        #[arg(long, default_value = "indicator")]
        kernel: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Compare the graph total variation of the Bayes classifier with its continuum limit.
    GammaCheck {
        #[arg(long, default_value = "half-plane")]
        model: String,
        /// JSON list of facets; defaults to the built-in interface of the preset.
        #[arg(long)]
        interface: Option<PathBuf>,
        #[arg(long, default_value = "indicator")]
        kernel: String,
        #[arg(long, value_delimiter = ',', default_value = "1000,4000,16000")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        eps_c: f64,
        #[arg(long, default_value_t = 0.25)]
        eps_a: f64,
        /// Independent clouds per size.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Draw metric curves from a sweep report.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        regime: Option<String>,
    },
}

/// The JSON written by `solve`.
#[derive(Serialize, Deserialize)]
struct SolutionFile {
    method: String,
    n: usize,
    eps: f64,
    lambda: f64,
    kernel: String,
    energy_relaxed: f64,
    energy_binary: f64,
    iters: usize,
    gap: f64,
    converged: bool,
    certificate: solver::Certificate,
    empirical_risk: f64,
    components: usize,
    u: NodeFunction,
    u_binary: NodeFunction,
}

fn load_cloud(path: &Path) -> Result<LabeledCloud> {
    LabeledCloud::load_csv(path).map_err(|e| match e {
        gtv_core::Error::Io(io) => CliError::io(path, io),
        other => other.into(),
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn in_dir(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

/// The Bayes interface of the built-in presets.
fn preset_interface(model: &GroundTruthModel) -> Result<Vec<Facet>> {
    let seg = |a: [f64; 2], b: [f64; 2]| Facet::new(vec![a.to_vec(), b.to_vec()]);
    match model.id() {
        "half-plane" => Ok(vec![seg([0.5, 0.0], [0.5, 1.0])]),
        "quadrant" => Ok(vec![
            seg([0.5, 0.0], [0.5, 0.5]),
            seg([0.5, 0.5], [0.5, 1.0]),
            seg([0.0, 0.5], [0.5, 0.5]),
            seg([0.5, 0.5], [1.0, 0.5]),
        ]),
        other => Err(CliError::config(format!("no built-in interface for model `{other}`; pass --interface"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot configure {threads} threads: {e}")))?;
    }
    let out_dir = cli.out_dir.as_path();
    match cli.command {
        Command::Gen { model, n, out } => {
            let model = load_model(&model)?;
            let cloud = model.sample(n, cli.seed)?;
            let path = in_dir(out_dir, &out);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            cloud.save_csv(&path).map_err(|e| match e {
                gtv_core::Error::Io(io) => CliError::io(&path, io),
                other => other.into(),
            })?;
            print_json(&json!({ "path": path, "n": n, "seed": cli.seed, "model": model.id(), "ones_fraction": cloud.ones_fraction() }))
        }
        Command::Solve { data, eps, lambda, kernel, method, out, max_iters, tol } => {
            let cloud = load_cloud(&data)?;
            let profile: KernelProfile = kernel.parse()?;
            let graph = NeighborGraph::build(&cloud, eps, &profile)?;
            let labels = cloud.labels();
            let result = match method {
                SolveMethod::Mincut => solver::solve_mincut(&graph, labels, lambda)?,
                SolveMethod::Brute => solver::solve_brute_force(&graph, labels, lambda)?,
                SolveMethod::Pd => {
                    let config = SolverConfig { max_iters, tol, ..SolverConfig::new(lambda) };
                    solver::solve_primal_dual(&graph, labels, &config)?
                }
            };
            let file = SolutionFile {
                method: result.method.to_string(),
                n: cloud.len(),
                eps,
                lambda,
                kernel: profile.to_string(),
                energy_relaxed: result.energy_relaxed,
                energy_binary: result.energy_binary,
                iters: result.iters,
                gap: result.gap,
                converged: result.converged,
                certificate: solver::certify_overfit(&graph, lambda),
                empirical_risk: metrics::empirical_risk(&result.u_binary, labels)?,
                components: graph.components(),
                u: result.u,
                u_binary: result.u_binary,
            };
            let path = in_dir(out_dir, &out);
            write_file(&path, &serde_json::to_string_pretty(&file)?)?;
            print_json(&json!({
                "path": path,
                "method": file.method,
                "energy_binary": file.energy_binary,
                "empirical_risk": file.empirical_risk,
                "certificate": file.certificate,
                "converged": file.converged,
            }))
        }
        Command::Certify { data, eps, lambda, kernel } => {
            let cloud = load_cloud(&data)?;
            let graph = NeighborGraph::build(&cloud, eps, &kernel.parse()?)?;
            print_json(&solver::certify_overfit(&graph, lambda))
        }
        Command::Sweep { config, example } => {
            if example {
                return print_json(&SweepConfig::example());
            }
            let path = config.expect("clap enforces --config");
            let config = SweepConfig::load(&path)?;
            let written = sweep::execute(&config, out_dir)?;
            print_json(&json!({ "written": written }))
        }
        Command::Tl1 { a, b } => {
            let read = |p: &Path| -> Result<(usize, Vec<f64>, Vec<f64>)> {
                let file = std::fs::File::open(p).map_err(|e| CliError::io(p, e))?;
                Ok(read_valued_csv(std::io::BufReader::new(file))?)
            };
            let (da, pa, fa) = read(&a)?;
            let (db, pb, fb) = read(&b)?;
            if da != db {
                return Err(CliError::config(format!("dimensions differ ({da} and {db})")));
            }
            let plan = metrics::tl1_exact(da, &pa, &fa, &pb, &fb)?;
            print_json(&json!({
                "tl1": plan.cost,
                "sup_displacement": plan.sup_displacement,
                "n": fa.len(),
                "assignment": plan.assignment,
            }))
        }
        Command::Risk { data, model, solution, test_m } => {
            let cloud = load_cloud(&data)?;
            let model = load_model(&model)?;
            let file: SolutionFile = serde_json::from_str(&read_to_string(&solution)?)?;
            let classifier = metrics::voronoi_extend(&cloud, &file.u_binary)?;
            let risk = metrics::test_risk(&classifier, &model, test_m, cli.seed)?;
            let agreement = metrics::bayes_agreement(&classifier, &model, test_m, cli.seed.wrapping_add(1))?;
            let tl1 = metrics::tl1_proxy_1nn(&cloud, &file.u_binary, &model, &BayesClassifier(&model), test_m, cli.seed.wrapping_add(2))?;
            print_json(&json!({
                "test_risk": risk.estimate,
                "ci_halfwidth": risk.ci_halfwidth,
                "bayes_risk": model.bayes_risk(),
                "excess_risk": risk.estimate - model.bayes_risk(),
                "bayes_agreement": agreement,
                "tl1_proxy": tl1,
                "empirical_risk": metrics::empirical_risk(&file.u_binary, cloud.labels())?,
            }))
        }
        Command::Sigma { kernel, dim } => {
            let profile: KernelProfile = kernel.parse()?;
            print_json(&json!({
                "kernel": profile.to_string(),
                "dim": dim,
                "sigma": profile.surface_tension(dim)?,
                "sigma_quadrature": profile.surface_tension_quadrature(dim),
            }))
        }
        Command::GammaCheck { model, interface, kernel, n_list, eps_c, eps_a, repeats } => {
            let model = load_model(&model)?;
            let facets = match interface {
                Some(p) => serde_json::from_str(&read_to_string(&p)?)?,
                None => preset_interface(&model)?,
            };
            let profile: KernelProfile = kernel.parse()?;
            let seeds: Vec<u64> = (0..repeats as u64).map(|k| cli.seed.wrapping_add(k)).collect();
            let rows = metrics::gamma_check_repeated(&model, &facets, &profile, &n_list, PowerRule::new(eps_c, eps_a), &seeds)?;
            print_json(&rows)
        }
        Command::Plot { report, regime } => {
            let report = RegimeReport::load_csv(&report)?;
            let written = plot::emit_plots(&report, regime.as_deref(), out_dir)?;
            print_json(&json!({ "written": written }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
