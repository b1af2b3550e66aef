//! Seeded small instances for oracle comparisons.
#![allow(dead_code)]

use entroute_core::model::GraphBuilder;
use entroute_core::{
    yen_k_shortest, CapacityLedger, NetworkGraph, NetworkInstance, NodeId, PathSetCatalog, Point,
    RoutePath, RoutingPlan, UserPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_SWITCHES: u32 = 10;
pub const MAX_PAIRS: u32 = 4;
pub const MAX_CATALOG: usize = 12;

// alpha = 1, so a length of -ln p gives success probability p
fn link(b: &mut GraphBuilder, rng: &mut ChaCha8Rng, a: u32, c: u32) {
    let p: f64 = rng.gen_range(0.05..1.0);
    b.add_link(NodeId(a), NodeId(c), -p.ln());
}

pub struct Small {
    pub instance: NetworkInstance,
    pub catalog: PathSetCatalog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// 2..=10 switches, sparse extra edges, even mix of 2 and 4 qubits.
    Sparse,
    /// 3..=6 switches, dense edges, mostly 2 qubits, 2..=4 pairs; the LPs
    /// come out fractional far more often.
    Contended,
}

/// Up to 10 switches with 2 or 4 qubits each, up to 4 pairs, a random
/// spanning tree plus extra edges, and at most 12 catalog paths in total.
pub fn small_instance(seed: u64) -> Small {
    instance_with(Profile::Sparse, seed)
}

pub fn instance_with(profile: Profile, seed: u64) -> Small {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m, extra, four) = match profile {
        Profile::Sparse => (
            rng.gen_range(2..=MAX_SWITCHES),
            rng.gen_range(1..=MAX_PAIRS),
            rng.gen_range(0.0..0.5),
            0.5,
        ),
        Profile::Contended => (rng.gen_range(3..=6), rng.gen_range(2..=MAX_PAIRS), rng.gen_range(0.5..0.95), 0.2),
    };
    let q = if rng.gen_bool(0.3) { 1.0 } else { rng.gen_range(0.5..1.0) };
    let mut b = NetworkGraph::builder(1.0, q);
    for s in 0..n {
        let qubits = if rng.gen_bool(four) { 4 } else { 2 };
        b.add_switch(NodeId(s), Point::default(), qubits);
    }
    for s in 1..n {
        let parent = rng.gen_range(0..s);
        link(&mut b, &mut rng, s, parent);
    }
    for a in 0..n {
        for c in a + 1..n {
            if rng.gen_bool(extra) {
                link(&mut b, &mut rng, a, c);
            }
        }
    }
    let mut pairs = Vec::new();
    for k in 0..m {
        let (u, v) = (n + 2 * k, n + 2 * k + 1);
        for user in [u, v] {
            b.add_user(NodeId(user), Point::default());
            let at = rng.gen_range(0..n);
            link(&mut b, &mut rng, user, at);
        }
        pairs.push(UserPair {
            source: NodeId(u),
            destination: NodeId(v),
        });
    }
    let graph = b.build().expect("generated graph is valid");
    let per_pair = MAX_CATALOG / m as usize;
    let lists = pairs
        .iter()
        .map(|p| yen_k_shortest(&graph, p.source, p.destination, per_pair).unwrap())
        .collect();
    let catalog = PathSetCatalog::from_lists(lists);
    Small {
        instance: NetworkInstance::new(graph, pairs).unwrap(),
        catalog,
    }
}

/// Independent capacity check: recounts qubits per node straight from the
/// node sequences.
pub fn respects_capacity(graph: &NetworkGraph, plan: &RoutingPlan) -> bool {
    let mut used = std::collections::BTreeMap::new();
    for a in &plan.assignments {
        for id in a.path.nodes() {
            if graph.node(*id).unwrap().is_switch() {
                *used.entry(*id).or_insert(0u64) += 2 * u64::from(a.channels);
            }
        }
    }
    used.iter()
        .all(|(id, &q)| q <= u64::from(graph.node(*id).unwrap().qubit_capacity().unwrap()))
}

/// All catalog paths, flattened in global order.
pub fn all_paths(catalog: &PathSetCatalog) -> Vec<&RoutePath> {
    catalog.iter().map(|(_, _, p)| p).collect()
}

pub fn fresh(graph: &NetworkGraph) -> CapacityLedger {
    CapacityLedger::new(graph)
}
