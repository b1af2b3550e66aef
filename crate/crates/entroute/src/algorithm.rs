use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use entroute_core::{
    combined_plan, greedy_route, selective_paths, solve_step1, solve_step2,
    solve_throughput_direct, CapacityLedger, NetworkInstance, PathMetric, PathSetCatalog,
    RoutingPlan,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Step I pair maximization followed by Step II throughput maximization.
    #[value(name = "multi_r")]
    MultiR,
    /// Throughput maximization alone, over all pairs on full capacity.
    #[value(name = "alg4_direct")]
    Alg4Direct,
    #[value(name = "fer")]
    Fer,
    #[value(name = "qpass")]
    Qpass,
    #[value(name = "b1")]
    B1,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::MultiR,
        Algorithm::Alg4Direct,
        Algorithm::Fer,
        Algorithm::Qpass,
        Algorithm::B1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MultiR => "multi_r",
            Algorithm::Alg4Direct => "alg4_direct",
            Algorithm::Fer => "fer",
            Algorithm::Qpass => "qpass",
            Algorithm::B1 => "b1",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub plan: RoutingPlan,
    pub served_pairs: usize,
    /// Analytic expected ebits per time slot.
    pub throughput: f64,
    pub lp_optimum: Option<f64>,
}

/// Runs `algorithm` on a prebuilt catalog and validates the resulting plan.
pub fn route_with_catalog(
    instance: &NetworkInstance,
    catalog: &PathSetCatalog,
    algorithm: Algorithm,
) -> Result<RouteOutcome> {
    let graph = &instance.graph;
    let greedy = |metric| {
        let plan = greedy_route(graph, catalog, metric);
        (plan, None)
    };
    let (plan, lp_optimum) = match algorithm {
        Algorithm::MultiR => {
            let mut ledger = CapacityLedger::new(graph);
            let step1 = solve_step1(graph, catalog, &mut ledger)?;
            let step2 = solve_step2(graph, catalog, &step1, &ledger)?;
            (combined_plan(catalog, &step1, &step2), Some(step1.lp_optimum))
        }
        Algorithm::Alg4Direct => {
            let step2 = solve_throughput_direct(graph, catalog)?;
            (step2.routing_plan(catalog), Some(step2.lp_optimum))
        }
        Algorithm::Fer => greedy(PathMetric::ExpectedThroughput),
        Algorithm::Qpass => greedy(PathMetric::SumInverseProb),
        Algorithm::B1 => greedy(PathMetric::HopCount),
    };
    plan.validate(graph, &instance.pairs)?;
    Ok(RouteOutcome {
        served_pairs: plan.served_pairs(),
        throughput: plan.expected_throughput(),
        plan,
        lp_optimum,
    })
}

/// Builds the catalog, then routes.
pub fn route_instance(instance: &NetworkInstance, algorithm: Algorithm) -> Result<RouteOutcome> {
    let catalog = selective_paths(&instance.graph, &instance.pairs)?;
    route_with_catalog(instance, &catalog, algorithm)
}
