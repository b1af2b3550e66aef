use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::LpProblem;
use crate::kpaths::PathSetCatalog;
use crate::model::{CapacityLedger, NetworkGraph};

/// An LP together with the catalog path behind each variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Formulation {
    pub problem: LpProblem,
    /// Global catalog index of variable `j`.
    pub paths: Vec<usize>,
}

/// Per-switch capacity rows. Switches no variable touches give an all-zero
/// row and are left out.
fn capacity_rows(
    problem: &mut LpProblem,
    graph: &NetworkGraph,
    catalog: &PathSetCatalog,
    paths: &[usize],
    capacity_channels: impl Fn(usize) -> u32,
) {
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (var, &global) in paths.iter().enumerate() {
        let (_, path) = catalog.get(global);
        for &s in path.switch_indices() {
            let row = rows
                .entry(s)
                .or_insert_with(|| alloc::vec![0.0; paths.len()]);
            row[var] += 1.0;
        }
    }
    for (s, coeffs) in rows {
        let rhs = f64::from(capacity_channels(s));
        problem.add_row(format!("switch{}", graph.node_at(s).id), coeffs, rhs);
    }
}

/// Relaxed pair-maximization problem: one `[0, 1]` variable per catalog path,
/// at most one path per pair, and at most `Q_i / 2` selected paths through
/// each switch.
pub fn build_step1_lp(catalog: &PathSetCatalog, graph: &NetworkGraph) -> Formulation {
    let paths: Vec<usize> = (0..catalog.len()).collect();
    let mut problem = LpProblem::new(paths.len());
    problem.objective.iter_mut().for_each(|c| *c = 1.0);
    for m in 0..catalog.pair_count() {
        let count = catalog.pair_paths(m).len();
        if count == 0 {
            continue;
        }
        let mut coeffs = alloc::vec![0.0; paths.len()];
        let start = catalog.offset(m);
        coeffs[start..start + count].iter_mut().for_each(|c| *c = 1.0);
        problem.add_row(format!("pair{m}"), coeffs, 1.0);
    }
    capacity_rows(&mut problem, graph, catalog, &paths, |s| {
        graph.node_at(s).qubit_capacity().unwrap_or(0) / 2
    });
    Formulation { problem, paths }
}

/// Relaxed throughput-maximization problem on the residual capacities in
/// `ledger`, over the paths of the pairs flagged in `include`.
///
/// Variables count channels; each is bounded by the tightest residual switch
/// on its path and weighted by the path's per-channel success probability.
pub fn build_step2_lp(
    catalog: &PathSetCatalog,
    graph: &NetworkGraph,
    ledger: &CapacityLedger,
    include: &[bool],
) -> Formulation {
    let paths: Vec<usize> = catalog
        .iter()
        .filter(|&(_, m, _)| include.get(m).copied().unwrap_or(false))
        .map(|(g, _, _)| g)
        .collect();
    let mut problem = LpProblem::new(paths.len());
    for (var, &global) in paths.iter().enumerate() {
        let (_, path) = catalog.get(global);
        problem.objective[var] = path.success_prob();
        let cap = ledger.max_channels(path).unwrap_or(0);
        problem.bounds[var] = (0.0, f64::from(cap));
    }
    capacity_rows(&mut problem, graph, catalog, &paths, |s| {
        ledger.residual_channels(s).unwrap_or(0)
    });
    Formulation { problem, paths }
}
