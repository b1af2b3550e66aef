//! Exhaustive reference solvers for small instances.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kpaths::PathSetCatalog;
use crate::model::{CapacityLedger, NetworkGraph, RoutePath};

/// Largest search space either oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step1Optimum {
    pub served: usize,
    /// Local path index chosen for each pair; lexicographically first maximizer.
    pub selection: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step2Optimum {
    pub throughput: f64,
    /// Channels per input path; lexicographically first maximizer.
    pub channels: Vec<u32>,
}

fn checked_product(factors: impl Iterator<Item = u128>) -> Result<u128> {
    let mut size: u128 = 1;
    for f in factors {
        size = size.saturating_mul(f);
        if size > ENUMERATION_LIMIT {
            return Err(Error::InstanceTooLarge {
                size,
                limit: ENUMERATION_LIMIT,
            });
        }
    }
    Ok(size)
}

struct PairSearch<'a> {
    catalog: &'a PathSetCatalog,
    ledger: CapacityLedger,
    current: Vec<Option<usize>>,
    served: usize,
    best: Option<(usize, Vec<Option<usize>>)>,
}

impl PairSearch<'_> {
    fn run(&mut self, pair: usize) {
        if pair == self.catalog.pair_count() {
            if self.best.as_ref().map_or(true, |(b, _)| self.served > *b) {
                self.best = Some((self.served, self.current.clone()));
            }
            return;
        }
        self.run(pair + 1);
        for (local, path) in self.catalog.pair_paths(pair).iter().enumerate() {
            if !self.ledger.fits(path, 1) {
                continue;
            }
            self.ledger.apply(path, 1);
            self.current[pair] = Some(local);
            self.served += 1;
            self.run(pair + 1);
            self.served -= 1;
            self.current[pair] = None;
            self.ledger.release_path(path, 1);
        }
    }
}

/// Maximum number of pairs that can each get one channel on one catalog path.
pub fn brute_force_step1(catalog: &PathSetCatalog, graph: &NetworkGraph) -> Result<Step1Optimum> {
    checked_product((0..catalog.pair_count()).map(|m| catalog.pair_paths(m).len() as u128 + 1))?;
    let mut search = PairSearch {
        catalog,
        ledger: CapacityLedger::new(graph),
        current: alloc::vec![None; catalog.pair_count()],
        served: 0,
        best: None,
    };
    search.run(0);
    let (served, selection) = search.best.expect("the empty selection is always feasible");

    let mut check = CapacityLedger::new(graph);
    for (m, local) in selection.iter().enumerate() {
        if let Some(l) = local {
            check
                .reserve_path(graph, &catalog.pair_paths(m)[*l], 1)
                .expect("oracle witness must fit");
        }
    }
    Ok(Step1Optimum { served, selection })
}

struct ChannelSearch<'a> {
    paths: &'a [&'a RoutePath],
    ledger: CapacityLedger,
    current: Vec<u32>,
    best: Option<(f64, Vec<u32>)>,
}

impl ChannelSearch<'_> {
    fn run(&mut self, j: usize) {
        if j == self.paths.len() {
            let value: f64 = self
                .current
                .iter()
                .zip(self.paths)
                .map(|(&c, p)| f64::from(c) * p.success_prob())
                .sum();
            if self.best.as_ref().map_or(true, |(b, _)| value > *b) {
                self.best = Some((value, self.current.clone()));
            }
            return;
        }
        let path = self.paths[j];
        self.run(j + 1);
        let mut taken = 0;
        while self.ledger.fits(path, 1) {
            self.ledger.apply(path, 1);
            taken += 1;
            self.current[j] = taken;
            self.run(j + 1);
        }
        if taken > 0 {
            self.ledger.release_path(path, taken);
        }
        self.current[j] = 0;
    }
}

/// Best integer channel allocation over `paths` within the capacity left in `ledger`.
pub fn brute_force_step2(
    graph: &NetworkGraph,
    ledger: &CapacityLedger,
    paths: &[&RoutePath],
) -> Result<Step2Optimum> {
    checked_product(
        paths
            .iter()
            .map(|p| u128::from(ledger.max_channels(p).unwrap_or(0)) + 1),
    )?;
    let mut search = ChannelSearch {
        paths,
        ledger: ledger.clone(),
        current: alloc::vec![0; paths.len()],
        best: None,
    };
    search.run(0);
    let (throughput, channels) = search.best.expect("the empty allocation is always feasible");

    let mut check = ledger.clone();
    for (p, &c) in paths.iter().zip(&channels) {
        check.reserve_path(graph, p, c).expect("oracle witness must fit");
    }
    Ok(Step2Optimum { throughput, channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeId, Point};
    use alloc::vec;

    fn star(qubits: u32) -> (NetworkGraph, PathSetCatalog) {
        let g = NetworkGraph::builder(1.0, 1.0)
            .switch(10, Point::default(), qubits)
            .user(0, Point::default())
            .user(1, Point::default())
            .user(2, Point::default())
            .user(3, Point::default())
            .link_with_prob(0, 10, 0.5)
            .link_with_prob(1, 10, 0.5)
            .link_with_prob(2, 10, 0.8)
            .link_with_prob(3, 10, 0.8)
            .build()
            .unwrap();
        let a = g.route_path(vec![NodeId(0), NodeId(10), NodeId(1)]).unwrap();
        let b = g.route_path(vec![NodeId(2), NodeId(10), NodeId(3)]).unwrap();
        (g, PathSetCatalog::from_lists(vec![vec![a], vec![b]]))
    }

    #[test]
    fn step1_counts_and_witness() {
        let (g, cat) = star(2);
        let opt = brute_force_step1(&cat, &g).unwrap();
        assert_eq!(opt.served, 1);
        assert_eq!(opt.selection, vec![None, Some(0)]);
        let (g, cat) = star(4);
        assert_eq!(brute_force_step1(&cat, &g).unwrap().served, 2);
    }

    #[test]
    fn step2_prefers_stronger_path() {
        let (g, cat) = star(6);
        let paths: Vec<&RoutePath> = cat.iter().map(|(_, _, p)| p).collect();
        let opt = brute_force_step2(&g, &CapacityLedger::new(&g), &paths).unwrap();
        assert_eq!(opt.channels, vec![0, 3]);
        assert!((opt.throughput - 3.0 * 0.64).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_instances() {
        let (g, cat) = star(4_000_000);
        let paths: Vec<&RoutePath> = cat.iter().map(|(_, _, p)| p).collect();
        let err = brute_force_step2(&g, &CapacityLedger::new(&g), &paths).unwrap_err();
        assert!(matches!(err, Error::InstanceTooLarge { .. }));
    }
}
