//! Step I: serve as many user pairs as possible, one main path each.
//!
//! The LP relaxation over the path catalog is solved first. Paths the LP
//! fixes at 1 are committed outright. The remaining pairs are decided by a
//! recursive search that grows a path prefix from the source, and at every
//! divergence point explores only the two next hops carrying the most
//! fractional LP mass.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kpaths::PathSetCatalog;
use crate::lp::{build_step1_lp, solve_lp, FractionalSolution, Formulation, OPTIMALITY_TOL};
use crate::model::{CapacityLedger, NetworkGraph, NodeId};
use crate::plan::RoutingPlan;

/// LP values within this distance of 1 count as integral.
pub const INTEGRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Step1Plan {
    /// Global catalog index of each pair's main path, `None` if unserved.
    pub selection: Vec<Option<usize>>,
    pub served_count: usize,
    pub lp_optimum: f64,
    pub integral_value: usize,
    /// Search-tree nodes visited during integer recovery.
    pub search_nodes: u64,
}

impl Step1Plan {
    fn empty(pairs: usize) -> Self {
        Step1Plan {
            selection: alloc::vec![None; pairs],
            served_count: 0,
            lp_optimum: 0.0,
            integral_value: 0,
            search_nodes: 0,
        }
    }

    pub fn is_served(&self, pair: usize) -> bool {
        self.selection.get(pair).is_some_and(Option::is_some)
    }

    /// Served-pair mask, indexed by pair.
    pub fn served_mask(&self) -> Vec<bool> {
        self.selection.iter().map(Option::is_some).collect()
    }

    /// One channel on every main path.
    pub fn routing_plan(&self, catalog: &PathSetCatalog) -> RoutingPlan {
        let mut plan = RoutingPlan::new();
        for global in self.selection.iter().flatten() {
            let (pair, path) = catalog.get(*global);
            plan.add(pair, path, 1);
        }
        plan
    }
}

struct Search<'a> {
    catalog: &'a PathSetCatalog,
    x: &'a [f64],
    ledger: CapacityLedger,
    selection: Vec<Option<usize>>,
    marked: Vec<bool>,
    served: usize,
    best: Vec<Option<usize>>,
    best_served: usize,
    ceiling: usize,
    nodes: u64,
}

impl Search<'_> {
    fn fits(&self, global: usize) -> bool {
        self.ledger.fits(self.catalog.get(global).1, 1)
    }

    fn has_feasible_path(&self, pair: usize) -> bool {
        let start = self.catalog.offset(pair);
        (start..start + self.catalog.pair_paths(pair).len()).any(|g| self.fits(g))
    }

    /// Unmarked pair owning the largest LP value among still-feasible paths;
    /// ties go to the lowest pair, then the lowest path.
    fn next_pair(&self) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (global, pair, _) in self.catalog.iter() {
            if self.marked[pair] || !self.fits(global) {
                continue;
            }
            let v = self.x[global];
            if best.map_or(true, |(bv, _)| v > bv) {
                best = Some((v, pair));
            }
        }
        best.map(|(_, pair)| pair)
    }

    /// Upper bound on what the subtree below the current state can serve.
    fn optimistic(&self) -> usize {
        self.served
            + (0..self.catalog.pair_count())
                .filter(|&m| !self.marked[m] && self.has_feasible_path(m))
                .count()
    }

    fn record(&mut self) {
        if self.served > self.best_served {
            self.best_served = self.served;
            self.best.clone_from(&self.selection);
        }
    }

    fn commit(&mut self, pair: usize, global: usize) {
        self.ledger.apply(self.catalog.get(global).1, 1);
        self.selection[pair] = Some(global);
        self.served += 1;
    }

    fn uncommit(&mut self, pair: usize, global: usize) {
        self.ledger.release_path(self.catalog.get(global).1, 1);
        self.selection[pair] = None;
        self.served -= 1;
    }

    /// Decides `pair` among its catalog paths that extend `prefix`, then
    /// moves on to the next pair. Leaves the working state as it found it.
    ///
    /// Subtrees that cannot strictly beat the incumbent are skipped; since
    /// the incumbent only changes on strict improvement, that never changes
    /// the returned plan.
    fn branch_and_price(&mut self, prefix: &[NodeId], pair: usize) {
        self.nodes += 1;
        if self.best_served >= self.ceiling || self.optimistic() <= self.best_served {
            return;
        }
        let start = self.catalog.offset(pair);
        let candidates: Vec<usize> = (start..start + self.catalog.pair_paths(pair).len())
            .filter(|&g| self.catalog.get(g).1.starts_with(prefix) && self.fits(g))
            .collect();

        if candidates.len() <= 1 {
            self.marked[pair] = true;
            let chosen = candidates.first().copied();
            if let Some(g) = chosen {
                self.commit(pair, g);
            }
            self.record();
            if let Some(next) = self.next_pair() {
                self.branch_and_price(&[], next);
            }
            if let Some(g) = chosen {
                self.uncommit(pair, g);
            }
            self.marked[pair] = false;
            return;
        }

        let nodes_of = |g: usize| self.catalog.get(g).1.nodes();
        let first = nodes_of(candidates[0]);
        let split = candidates[1..]
            .iter()
            .map(|&g| {
                first
                    .iter()
                    .zip(nodes_of(g))
                    .take_while(|(a, b)| a == b)
                    .count()
            })
            .min()
            .unwrap_or(first.len());

        let mut mass: BTreeMap<NodeId, f64> = BTreeMap::new();
        for &g in &candidates {
            *mass.entry(nodes_of(g)[split]).or_insert(0.0) += self.x[g];
        }
        let mut ranked: Vec<(NodeId, f64)> = mass.into_iter().collect();
        // stable sort keeps ascending node id among equal masses
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

        let mut branch_prefix: Vec<NodeId> = first[..split].to_vec();
        for &(next_hop, _) in ranked.iter().take(2) {
            branch_prefix.truncate(split);
            branch_prefix.push(next_hop);
            self.branch_and_price(&branch_prefix, pair);
        }
    }
}

/// Turns a fractional Step-I solution into an integral, capacity-feasible one.
pub fn recover_integer_step1(
    fractional: &FractionalSolution,
    formulation: &Formulation,
    catalog: &PathSetCatalog,
    graph: &NetworkGraph,
) -> Result<Step1Plan> {
    if !fractional.is_optimal() {
        return Err(Error::InvalidArgument(format!(
            "fractional solution has status {:?}",
            fractional.status
        )));
    }
    if fractional.values.len() != formulation.paths.len()
        || formulation.paths.len() != catalog.len()
    {
        return Err(Error::InvalidArgument(
            "fractional solution does not match the catalog".into(),
        ));
    }
    let violation = formulation.problem.max_violation(&fractional.values);
    if violation > crate::lp::FEASIBILITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "fractional solution violates a constraint by {violation}"
        )));
    }
    let mut x = alloc::vec![0.0; catalog.len()];
    for (&global, &v) in formulation.paths.iter().zip(&fractional.values) {
        x[global] = v;
    }
    let lp_optimum = fractional.objective_value;
    let pairs = catalog.pair_count();
    let ceiling = libm::floor(lp_optimum + OPTIMALITY_TOL * lp_optimum.max(1.0)) as usize;

    let mut search = Search {
        catalog,
        x: &x,
        ledger: CapacityLedger::new(graph),
        selection: alloc::vec![None; pairs],
        marked: alloc::vec![false; pairs],
        served: 0,
        best: alloc::vec![None; pairs],
        best_served: 0,
        ceiling,
        nodes: 0,
    };

    // commit integral LP paths, largest value first
    let mut order: Vec<usize> = (0..catalog.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    for &global in &order {
        if x[global] < 1.0 - INTEGRAL_TOL {
            break;
        }
        let (pair, _) = catalog.get(global);
        if !search.marked[pair] && search.fits(global) {
            search.commit(pair, global);
            search.marked[pair] = true;
        }
    }
    search.best.clone_from(&search.selection);
    search.best_served = search.served;

    if let Some(first) = search.next_pair() {
        search.branch_and_price(&[], first);
    }

    let served_count = search.best_served;
    Ok(Step1Plan {
        selection: search.best,
        served_count,
        lp_optimum,
        integral_value: served_count,
        search_nodes: search.nodes,
    })
}

/// Full Step-I pipeline. Reserves one channel per selected main path in `ledger`.
pub fn solve_step1(
    graph: &NetworkGraph,
    catalog: &PathSetCatalog,
    ledger: &mut CapacityLedger,
) -> Result<Step1Plan> {
    if catalog.is_empty() {
        return Ok(Step1Plan::empty(catalog.pair_count()));
    }
    let formulation = build_step1_lp(catalog, graph);
    let fractional = solve_lp(&formulation.problem);
    if !fractional.is_optimal() {
        return Err(Error::LpFailure(format!(
            "step I relaxation ended with {:?}",
            fractional.status
        )));
    }
    let plan = recover_integer_step1(&fractional, &formulation, catalog, graph)?;
    for global in plan.selection.iter().flatten() {
        ledger.reserve_path(graph, catalog.get(*global).1, 1)?;
    }
    Ok(plan)
}
