//! Single-metric greedy routers used as comparison baselines.
//!
//! Every candidate path gets a fixed score. The router repeatedly hands one
//! channel to the best-scoring path that still fits until nothing fits.
//! Scores never change, so once a path is the best feasible one it stays the
//! best until it saturates. The loop is therefore run as one sorted pass that
//! fills each candidate to capacity.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::kpaths::PathSetCatalog;
use crate::model::{CapacityLedger, NetworkGraph, RoutePath};
use crate::plan::RoutingPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathMetric {
    /// Highest per-channel success probability first (FER).
    ExpectedThroughput,
    /// Lowest sum of inverse link probabilities first (Q-PASS).
    SumInverseProb,
    /// Fewest hops first.
    HopCount,
}

impl PathMetric {
    pub fn score(self, graph: &NetworkGraph, path: &RoutePath) -> f64 {
        match self {
            PathMetric::ExpectedThroughput => path.success_prob(),
            PathMetric::SumInverseProb => path
                .nodes()
                .windows(2)
                .map(|w| {
                    let link = graph
                        .link_between(w[0], w[1])
                        .expect("route paths only use existing links");
                    1.0 / link.success_prob
                })
                .sum(),
            PathMetric::HopCount => path.hop_count() as f64,
        }
    }

    /// `Less` when `a` is preferred.
    fn rank(self, a: f64, b: f64) -> Ordering {
        match self {
            PathMetric::ExpectedThroughput => b.total_cmp(&a),
            PathMetric::SumInverseProb | PathMetric::HopCount => a.total_cmp(&b),
        }
    }
}

/// Routes every pair greedily by `metric` over the catalog, on full capacity.
/// Ties go to the lower pair index, then the lower path index.
pub fn greedy_route(graph: &NetworkGraph, catalog: &PathSetCatalog, metric: PathMetric) -> RoutingPlan {
    let mut candidates: Vec<(f64, usize)> = catalog
        .iter()
        .map(|(global, _, path)| (metric.score(graph, path), global))
        .collect();
    candidates.sort_by(|a, b| metric.rank(a.0, b.0).then(a.1.cmp(&b.1)));

    let mut ledger = CapacityLedger::new(graph);
    let mut plan = RoutingPlan::new();
    for (_, global) in candidates {
        let (pair, path) = catalog.get(global);
        let channels = ledger.max_channels(path).unwrap_or(0);
        if channels > 0 {
            ledger.apply(path, channels);
            plan.add(pair, path, channels);
        }
    }
    plan
}
