//! Seeded experiment sweeps producing a CSV table.

use std::time::Instant;

use entroute_core::{generate_topology, selective_paths, simulate_throughput};
use rayon::prelude::*;

use crate::algorithm::{route_with_catalog, Algorithm};
use crate::config::{ExperimentConfig, SweepPoint};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "sweep_param",
    "sweep_value",
    "algorithm",
    "seed",
    "served_pairs",
    "throughput",
    "mc_throughput",
    "mc_stderr",
    "runtime_ms",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub served_pairs: f64,
    pub throughput: f64,
    pub mc: Option<(f64, f64)>,
    pub runtime_ms: Option<f64>,
}

/// One CSV row. `seed == None` marks the per-algorithm mean over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_param: &'static str,
    pub sweep_value: Option<f64>,
    pub algorithm: Algorithm,
    pub seed: Option<u64>,
    pub result: Option<Measurement>,
    pub error: String,
}

impl ResultRow {
    fn fields(&self) -> [String; 10] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let m = self.result.as_ref();
        [
            self.sweep_param.to_string(),
            opt(self.sweep_value),
            self.algorithm.to_string(),
            self.seed.map_or_else(|| "mean".to_string(), |s| s.to_string()),
            opt(m.map(|m| m.served_pairs)),
            opt(m.map(|m| m.throughput)),
            opt(m.and_then(|m| m.mc.map(|mc| mc.0))),
            opt(m.and_then(|m| m.mc.map(|mc| mc.1))),
            opt(m.and_then(|m| m.runtime_ms)),
            self.error.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentTable {
    pub rows: Vec<ResultRow>,
}

impl ExperimentTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            w.write_record(row.fields())?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("csv buffer", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
    }

    /// Mean rows only.
    pub fn means(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.seed.is_none())
    }

    pub fn mean_of(&self, value: Option<f64>, algorithm: Algorithm) -> Option<&Measurement> {
        self.means()
            .find(|r| r.algorithm == algorithm && r.sweep_value == value)
            .and_then(|r| r.result.as_ref())
    }
}

fn error_text(e: &crate::error::Error) -> String {
    format!("{}: {e}", e.kind())
}

/// Runs every requested algorithm on the instance for (`point`, `seed`).
fn run_instance(
    config: &ExperimentConfig,
    algorithms: &[Algorithm],
    point: &SweepPoint,
    seed: u64,
) -> Vec<ResultRow> {
    let row = |algorithm, result, error| ResultRow {
        sweep_param: point.param,
        sweep_value: point.value,
        algorithm,
        seed: Some(seed),
        result,
        error,
    };
    let prepared = generate_topology(&point.settings.with_seed(seed))
        .map_err(Into::into)
        .and_then(|inst| {
            let catalog = selective_paths(&inst.graph, &inst.pairs)?;
            Ok((inst, catalog))
        });
    let (instance, catalog) = match prepared {
        Ok(v) => v,
        Err(e) => {
            let msg = error_text(&e);
            return algorithms
                .iter()
                .map(|&a| row(a, None, msg.clone()))
                .collect();
        }
    };

    algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let outcome = route_with_catalog(&instance, &catalog, algorithm);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let measured = outcome.and_then(|out| {
                let mc = if config.mc_trials > 0 {
                    let r = simulate_throughput(&instance.graph, &out.plan, config.mc_trials, seed)?;
                    Some((r.mean_throughput, r.std_error))
                } else {
                    None
                };
                Ok(Measurement {
                    served_pairs: out.served_pairs as f64,
                    throughput: out.throughput,
                    mc,
                    runtime_ms: config.record_runtime.then_some(elapsed),
                })
            });
            match measured {
                Ok(m) => row(algorithm, Some(m), String::new()),
                Err(e) => row(algorithm, None, error_text(&e)),
            }
        })
        .collect()
}

fn mean_row(rows: &[&ResultRow]) -> ResultRow {
    let ok: Vec<&Measurement> = rows.iter().filter_map(|r| r.result.as_ref()).collect();
    let first = rows[0];
    let failed = rows.len() - ok.len();
    let n = ok.len() as f64;
    let mean = |f: &dyn Fn(&Measurement) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = ok.iter().filter_map(|m| f(m)).collect();
        (!vals.is_empty() && vals.len() == ok.len()).then(|| vals.iter().sum::<f64>() / n)
    };
    let result = (!ok.is_empty()).then(|| Measurement {
        served_pairs: ok.iter().map(|m| m.served_pairs).sum::<f64>() / n,
        throughput: ok.iter().map(|m| m.throughput).sum::<f64>() / n,
        mc: mean(&|m| m.mc.map(|x| x.0)).zip(mean(&|m| m.mc.map(|x| x.1))),
        runtime_ms: mean(&|m| m.runtime_ms),
    });
    ResultRow {
        sweep_param: first.sweep_param,
        sweep_value: first.sweep_value,
        algorithm: first.algorithm,
        seed: None,
        result,
        error: if failed == 0 {
            String::new()
        } else {
            format!("{failed} of {} seeds failed", rows.len())
        },
    }
}

/// Runs the whole sweep. Instances run in parallel; rows come out sorted by
/// sweep value, algorithm and seed, each algorithm followed by its mean row.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let points = config.points()?;
    let mut algorithms = config.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();

    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let per_job: Vec<Vec<ResultRow>> = jobs
        .par_iter()
        .map(|&(p, seed)| run_instance(config, &algorithms, &points[p], seed))
        .collect();

    let mut rows = Vec::with_capacity(per_job.len() * algorithms.len() + points.len() * algorithms.len());
    for (p, point) in points.iter().enumerate() {
        for (ai, _) in algorithms.iter().enumerate() {
            let group: Vec<&ResultRow> = jobs
                .iter()
                .zip(&per_job)
                .filter(|((jp, _), _)| *jp == p)
                .map(|(_, r)| &r[ai])
                .collect();
            debug_assert!(group.iter().all(|r| r.sweep_value == point.value));
            rows.extend(group.iter().map(|r| (*r).clone()));
            rows.push(mean_row(&group));
        }
    }
    Ok(ExperimentTable { rows })
}
