use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entroute::formats::{read_instance, read_json, to_json, write_text};
use entroute::{
    route_with_catalog, run_experiment, Algorithm, CatalogFile, Error, ExperimentConfig,
    InstanceFile, PlanFile, Result, Sweep, SweepParam,
};
use entroute_core::lp::build_step1_lp;
use entroute_core::{generate_topology, selective_paths, simulate_throughput};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "entroute", version, about = "Entanglement routing for quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Generate {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Route one instance with one algorithm and write the plan as JSON.
    Route {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the candidate path catalog of an instance, or its pair-maximization LP.
    Catalog {
        #[arg(long)]
        instance: PathBuf,
        /// Print the relaxation in LP text form instead of the catalog.
        #[arg(long)]
        lp: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded sweep and write the CSV table.
    Experiment {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_enum, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        #[arg(long)]
        mc_trials: Option<u64>,
        #[arg(long, value_enum)]
        sweep_param: Option<SweepParam>,
        #[arg(long, value_delimiter = ',', requires = "sweep_param")]
        sweep_values: Option<Vec<f64>>,
        #[arg(long)]
        record_runtime: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a plan against an instance and estimate its throughput by simulation.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Topology settings; flags override the config file, which overrides defaults.
#[derive(Args)]
struct TopologyArgs {
    /// TOML or JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    area_side: Option<f64>,
    #[arg(long)]
    num_switches: Option<u32>,
    #[arg(long)]
    num_pairs: Option<u32>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    qubits: Option<u32>,
    #[arg(long)]
    swap_prob: Option<f64>,
    #[arg(long)]
    target_prob: Option<f64>,
    #[arg(long)]
    cutoff_factor: Option<f64>,
    #[arg(long)]
    max_attempts: Option<u32>,
}

impl TopologyArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        let b = &mut c.base;
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { b.$field = v; })*
            };
        }
        set!(
            area_side => area_side,
            num_switches => num_switches,
            num_pairs => num_pairs,
            avg_degree => avg_degree,
            qubits => qubits_per_switch,
            swap_prob => swap_prob,
            target_prob => single_link_target_prob,
            cutoff_factor => cutoff_factor,
            max_attempts => max_attempts
        );
        Ok(c)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Config(format!("stdout: {e}"))),
    }
}

#[derive(Serialize)]
struct ValidationReport {
    served_pairs: usize,
    total_channels: u64,
    expected_throughput: f64,
    mc_trials: u64,
    mc_throughput: f64,
    mc_stderr: f64,
    /// (simulated - analytic) / std error
    z_score: Option<f64>,
    per_pair_mc: Vec<(usize, f64)>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            topology,
            seed,
            out,
        } => {
            let config = topology.load()?;
            let instance = generate_topology(&config.base.with_seed(seed))?;
            emit(out.as_deref(), &to_json(&InstanceFile::from_instance(&instance))?)
        }
        Command::Route {
            instance,
            algorithm,
            out,
        } => {
            let instance = read_instance(&instance)?;
            let catalog = selective_paths(&instance.graph, &instance.pairs)?;
            let outcome = route_with_catalog(&instance, &catalog, algorithm)?;
            let file = PlanFile::new(algorithm.name(), &outcome.plan, outcome.lp_optimum);
            emit(out.as_deref(), &to_json(&file)?)
        }
        Command::Catalog { instance, lp, out } => {
            let instance = read_instance(&instance)?;
            let catalog = selective_paths(&instance.graph, &instance.pairs)?;
            let text = if lp {
                build_step1_lp(&catalog, &instance.graph).problem.to_string()
            } else {
                to_json(&CatalogFile::from_catalog(&catalog))?
            };
            emit(out.as_deref(), &text)
        }
        Command::Experiment {
            topology,
            seeds,
            algorithms,
            mc_trials,
            sweep_param,
            sweep_values,
            record_runtime,
            out,
        } => {
            let mut config = topology.load()?;
            if let Some(s) = seeds {
                config.seeds = s;
            }
            if let Some(a) = algorithms {
                config.algorithms = a;
            }
            if let Some(t) = mc_trials {
                config.mc_trials = t;
            }
            if let Some(param) = sweep_param {
                let values = match (sweep_values, &config.sweep) {
                    (Some(v), _) => v,
                    (None, Some(existing)) => existing.values.clone(),
                    (None, None) => {
                        return Err(Error::Config("--sweep-param needs --sweep-values".into()))
                    }
                };
                config.sweep = Some(Sweep { param, values });
            }
            config.record_runtime |= record_runtime;
            let table = run_experiment(&config)?;
            emit(out.as_deref(), &table.to_csv()?)
        }
        Command::Validate {
            instance,
            plan,
            trials,
            seed,
        } => {
            let instance = read_instance(&instance)?;
            let file: PlanFile = read_json(&plan)?;
            let plan = file.to_plan(&instance.graph)?;
            plan.validate(&instance.graph, &instance.pairs)?;
            let mc = simulate_throughput(&instance.graph, &plan, trials, seed)?;
            let analytic = plan.expected_throughput();
            let report = ValidationReport {
                served_pairs: plan.served_pairs(),
                total_channels: plan.total_channels(),
                expected_throughput: analytic,
                mc_trials: mc.trials,
                mc_throughput: mc.mean_throughput,
                mc_stderr: mc.std_error,
                z_score: (mc.std_error > 0.0)
                    .then(|| (mc.mean_throughput - analytic) / mc.std_error),
                per_pair_mc: mc.per_pair_mean.into_iter().collect(),
            };
            emit(None, &to_json(&report)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
