//! Step II: spend the qubits left over after Step I on extra channels for the
//! served pairs, maximizing expected throughput.
//!
//! Integer recovery takes the floor of every LP value, then decides the leftover
//! fractional parts one extra channel at a time with an include/exclude search.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kpaths::PathSetCatalog;
use crate::lp::{build_step2_lp, solve_lp, FractionalSolution, Formulation, FEASIBILITY_TOL};
use crate::model::{CapacityLedger, NetworkGraph, RoutePath};
use crate::plan::RoutingPlan;
use crate::step1::Step1Plan;

/// More fractional residues than this and the include/exclude search refuses to run.
pub const MAX_RESIDUES: usize = 64;
/// Distance below an integer still treated as that integer when flooring.
pub const FLOOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Step2Plan {
    /// Extra channels per global catalog index; zero entries are omitted.
    pub channels: BTreeMap<usize, u32>,
    pub additional_throughput: f64,
    /// `additional_throughput` plus one channel on every Step-I main path.
    pub total_throughput: f64,
    pub lp_optimum: f64,
    pub residues: usize,
    pub search_nodes: u64,
}

impl Step2Plan {
    fn empty(base: f64) -> Self {
        Step2Plan {
            channels: BTreeMap::new(),
            additional_throughput: 0.0,
            total_throughput: base,
            lp_optimum: 0.0,
            residues: 0,
            search_nodes: 0,
        }
    }

    /// These channels alone.
    pub fn routing_plan(&self, catalog: &PathSetCatalog) -> RoutingPlan {
        let mut plan = RoutingPlan::new();
        for (&global, &ch) in &self.channels {
            let (pair, path) = catalog.get(global);
            plan.add(pair, path, ch);
        }
        plan
    }
}

/// Step-I main paths plus Step-II channels as one plan.
pub fn combined_plan(catalog: &PathSetCatalog, step1: &Step1Plan, step2: &Step2Plan) -> RoutingPlan {
    let mut plan = step1.routing_plan(catalog);
    for (&global, &ch) in &step2.channels {
        let (pair, path) = catalog.get(global);
        plan.add(pair, path, ch);
    }
    plan
}

struct Search<'a> {
    paths: Vec<&'a RoutePath>,
    residue: Vec<f64>,
    marked: Vec<bool>,
    extra: Vec<u32>,
    ledger: CapacityLedger,
    value: f64,
    best: Vec<u32>,
    best_value: f64,
    nodes: u64,
}

impl Search<'_> {
    /// Largest unmarked feasible residue (lowest variable on ties) and the
    /// optimistic value of the subtree.
    fn scan(&self) -> (Option<usize>, f64) {
        let mut bound = self.value;
        let mut pick: Option<usize> = None;
        for j in 0..self.paths.len() {
            if self.marked[j] || self.residue[j] <= 0.0 || !self.ledger.fits(self.paths[j], 1) {
                continue;
            }
            bound += self.paths[j].success_prob();
            if pick.map_or(true, |p| self.residue[j] > self.residue[p]) {
                pick = Some(j);
            }
        }
        (pick, bound)
    }

    fn branch_and_price(&mut self) {
        self.nodes += 1;
        let (pick, bound) = self.scan();
        let Some(j) = pick else {
            if self.value > self.best_value {
                self.best_value = self.value;
                self.best.clone_from(&self.extra);
            }
            return;
        };
        if bound <= self.best_value {
            return;
        }
        self.marked[j] = true;

        let before = self.value;
        self.ledger.apply(self.paths[j], 1);
        self.extra[j] += 1;
        self.value += self.paths[j].success_prob();
        self.branch_and_price();
        self.ledger.release_path(self.paths[j], 1);
        self.extra[j] -= 1;
        self.value = before;

        self.branch_and_price();
        self.marked[j] = false;
    }
}

/// Turns a fractional Step-II solution into integral channel counts that fit
/// the residual capacities in `ledger`.
pub fn recover_integer_step2(
    fractional: &FractionalSolution,
    formulation: &Formulation,
    catalog: &PathSetCatalog,
    ledger: &CapacityLedger,
) -> Result<Step2Plan> {
    if !fractional.is_optimal() {
        return Err(Error::InvalidArgument(format!(
            "fractional solution has status {:?}",
            fractional.status
        )));
    }
    let n = formulation.paths.len();
    if fractional.values.len() != n || formulation.paths.iter().any(|&g| g >= catalog.len()) {
        return Err(Error::InvalidArgument(
            "fractional solution does not match the catalog".into(),
        ));
    }
    let violation = formulation.problem.max_violation(&fractional.values);
    if violation > FEASIBILITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "fractional solution violates a constraint by {violation}"
        )));
    }
    let paths: Vec<&RoutePath> = formulation.paths.iter().map(|&g| catalog.get(g).1).collect();
    let q = &fractional.values;

    let mut ledger = ledger.clone();
    let mut floor = alloc::vec![0u32; n];
    let mut residue = alloc::vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
    for &j in &order {
        let units = libm::floor(q[j] + FLOOR_TOL).max(0.0) as u32;
        for _ in 0..units {
            if !ledger.fits(paths[j], 1) {
                break;
            }
            ledger.apply(paths[j], 1);
            floor[j] += 1;
        }
        let r = q[j] - f64::from(units);
        residue[j] = if r > FLOOR_TOL { r } else { 0.0 };
    }
    let residues = residue.iter().filter(|&&r| r > 0.0).count();
    if residues > MAX_RESIDUES {
        return Err(Error::LimitExceeded {
            residues,
            limit: MAX_RESIDUES,
        });
    }

    let floor_value: f64 = floor
        .iter()
        .zip(&paths)
        .map(|(&c, p)| f64::from(c) * p.success_prob())
        .sum();
    let mut search = Search {
        paths: paths.clone(),
        residue,
        marked: alloc::vec![false; n],
        extra: alloc::vec![0; n],
        ledger,
        value: floor_value,
        best: alloc::vec![0; n],
        best_value: floor_value,
        nodes: 0,
    };
    search.branch_and_price();

    let mut channels = BTreeMap::new();
    let mut additional = 0.0;
    for j in 0..n {
        let total = floor[j] + search.best[j];
        if total > 0 {
            channels.insert(formulation.paths[j], total);
            additional += f64::from(total) * paths[j].success_prob();
        }
    }
    Ok(Step2Plan {
        channels,
        additional_throughput: additional,
        total_throughput: additional,
        lp_optimum: fractional.objective_value,
        residues,
        search_nodes: search.nodes,
    })
}

fn solve_on(
    graph: &NetworkGraph,
    catalog: &PathSetCatalog,
    ledger: &CapacityLedger,
    include: &[bool],
    base: f64,
) -> Result<Step2Plan> {
    let formulation = build_step2_lp(catalog, graph, ledger, include);
    if formulation.paths.is_empty() {
        return Ok(Step2Plan::empty(base));
    }
    let fractional = solve_lp(&formulation.problem);
    if !fractional.is_optimal() {
        return Err(Error::LpFailure(format!(
            "throughput relaxation ended with {:?}",
            fractional.status
        )));
    }
    let mut plan = recover_integer_step2(&fractional, &formulation, catalog, ledger)?;
    plan.total_throughput = plan.additional_throughput + base;
    Ok(plan)
}

/// Step II over the pairs served in `step1`, on the capacity left in `ledger`.
pub fn solve_step2(
    graph: &NetworkGraph,
    catalog: &PathSetCatalog,
    step1: &Step1Plan,
    ledger: &CapacityLedger,
) -> Result<Step2Plan> {
    let base: f64 = step1
        .selection
        .iter()
        .flatten()
        .map(|&g| catalog.get(g).1.success_prob())
        .sum();
    solve_on(graph, catalog, ledger, &step1.served_mask(), base)
}

/// Throughput maximization alone, on full capacity and over every pair.
pub fn solve_throughput_direct(graph: &NetworkGraph, catalog: &PathSetCatalog) -> Result<Step2Plan> {
    let include = alloc::vec![true; catalog.pair_count()];
    solve_on(graph, catalog, &CapacityLedger::new(graph), &include, 0.0)
}
