//! Network model: switches, users, links, user pairs, routing paths and the
//! per-switch qubit ledger.
//!
//! A quantum channel along a path consumes two qubits at every switch it
//! visits and succeeds with probability `prod(p_link) * q^(hops - 1)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance for probability comparisons.
pub const PROB_TOL: f64 = 1e-12;

/// Qubits one channel holds at each switch it crosses.
pub const QUBITS_PER_CHANNEL: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Quantum switch holding an even number of qubits.
    Switch { qubits: u32 },
    /// Quantum user (source or destination). Users have unlimited qubits and
    /// never relay other pairs' entanglement.
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_switch(&self) -> bool {
        matches!(self.kind, NodeKind::Switch { .. })
    }

    pub fn qubit_capacity(&self) -> Option<u32> {
        match self.kind {
            NodeKind::Switch { qubits } => Some(qubits),
            NodeKind::User => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLink {
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
    pub success_prob: f64,
}

impl QuantumLink {
    pub fn other(&self, id: NodeId) -> NodeId {
        if self.a == id {
            self.b
        } else {
            self.a
        }
    }
}

/// Success probability of one entanglement attempt over a fibre of `length`.
pub fn link_success_prob(length: f64, alpha: f64) -> Result<f64> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "link length must be positive, got {length}"
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(libm::exp(-alpha * length))
}

/// Undirected switch/user graph.
///
/// Nodes are kept sorted by id, so dense indices follow id order and every
/// "smallest id first" tie-break can work on indices directly.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    index: BTreeMap<NodeId, usize>,
    links: Vec<QuantumLink>,
    // (neighbour index, link index), sorted by neighbour index
    adjacency: Vec<Vec<(usize, usize)>>,
    alpha: f64,
    swap_prob: f64,
}

impl NetworkGraph {
    pub fn builder(alpha: f64, swap_prob: f64) -> GraphBuilder {
        GraphBuilder::new(alpha, swap_prob)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn swap_prob(&self) -> f64 {
        self.swap_prob
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[QuantumLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn node_at(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn index_of(&self, id: NodeId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn switches(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.is_switch())
    }

    pub fn users(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| !n.is_switch())
    }

    pub fn is_switch_at(&self, idx: usize) -> bool {
        self.nodes[idx].is_switch()
    }

    /// Neighbours of the node at `idx` as `(neighbour index, link index)`.
    pub fn neighbors(&self, idx: usize) -> &[(usize, usize)] {
        &self.adjacency[idx]
    }

    pub fn link(&self, link_idx: usize) -> &QuantumLink {
        &self.links[link_idx]
    }

    pub fn link_index_between(&self, a: usize, b: usize) -> Option<usize> {
        let adj = &self.adjacency[a];
        adj.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|pos| adj[pos].1)
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<&QuantumLink> {
        let ia = *self.index.get(&a)?;
        let ib = *self.index.get(&b)?;
        self.link_index_between(ia, ib).map(|l| &self.links[l])
    }

    /// Mean number of switch-to-switch links per switch.
    pub fn mean_switch_degree(&self) -> f64 {
        let switches = self.switches().count();
        if switches == 0 {
            return 0.0;
        }
        let inner = self
            .links
            .iter()
            .filter(|l| {
                self.node(l.a).is_some_and(Node::is_switch)
                    && self.node(l.b).is_some_and(Node::is_switch)
            })
            .count();
        2.0 * inner as f64 / switches as f64
    }

    /// Whether the switch-only subgraph is connected.
    pub fn switches_connected(&self) -> bool {
        let Some(start) = self.nodes.iter().position(Node::is_switch) else {
            return true;
        };
        let mut seen = alloc::vec![false; self.nodes.len()];
        let mut stack = alloc::vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] && self.nodes[v].is_switch() {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, n)| !n.is_switch() || seen[i])
    }

    /// Builds a validated [`RoutePath`] from a node sequence.
    pub fn route_path(&self, nodes: Vec<NodeId>) -> Result<RoutePath> {
        RoutePath::new(self, nodes)
    }
}

/// Incremental constructor for [`NetworkGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    alpha: f64,
    swap_prob: f64,
    nodes: Vec<Node>,
    links: Vec<(NodeId, NodeId, f64)>,
}

impl GraphBuilder {
    pub fn new(alpha: f64, swap_prob: f64) -> Self {
        GraphBuilder {
            alpha,
            swap_prob,
            nodes: Vec::new(),
            links: Vec::new(),
        }
    }

    pub fn switch(mut self, id: u32, position: Point, qubits: u32) -> Self {
        self.add_switch(NodeId(id), position, qubits);
        self
    }

    pub fn user(mut self, id: u32, position: Point) -> Self {
        self.add_user(NodeId(id), position);
        self
    }

    pub fn link(mut self, a: u32, b: u32, length: f64) -> Self {
        self.add_link(NodeId(a), NodeId(b), length);
        self
    }

    /// Adds a link whose length is chosen so that its success probability is `p`.
    pub fn link_with_prob(mut self, a: u32, b: u32, p: f64) -> Self {
        let length = -libm::log(p) / self.alpha;
        self.add_link(NodeId(a), NodeId(b), length);
        self
    }

    pub fn add_switch(&mut self, id: NodeId, position: Point, qubits: u32) {
        self.nodes.push(Node {
            id,
            position,
            kind: NodeKind::Switch { qubits },
        });
    }

    pub fn add_user(&mut self, id: NodeId, position: Point) {
        self.nodes.push(Node {
            id,
            position,
            kind: NodeKind::User,
        });
    }

    /// Zero length is admitted (co-located nodes, `p = 1`).
    pub fn add_link(&mut self, a: NodeId, b: NodeId, length: f64) {
        self.links.push((a, b, length));
    }

    pub fn build(self) -> Result<NetworkGraph> {
        let GraphBuilder {
            alpha,
            swap_prob,
            mut nodes,
            links,
        } = self;
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&swap_prob) {
            return Err(Error::InvalidArgument(format!(
                "swap probability must lie in [0, 1], got {swap_prob}"
            )));
        }
        nodes.sort_by_key(|n| n.id);
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id {}", n.id)));
            }
            if let NodeKind::Switch { qubits } = n.kind {
                if qubits % 2 != 0 {
                    return Err(Error::InvalidGraph(format!(
                        "switch {} has an odd qubit count {qubits}",
                        n.id
                    )));
                }
            }
            if !n.position.x.is_finite() || !n.position.y.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "node {} has a non-finite position",
                    n.id
                )));
            }
        }

        let mut adjacency: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); nodes.len()];
        let mut out_links: Vec<QuantumLink> = Vec::with_capacity(links.len());
        for (a, b, length) in links {
            let ia = *index.get(&a).ok_or(Error::UnknownNode(a))?;
            let ib = *index.get(&b).ok_or(Error::UnknownNode(b))?;
            if ia == ib {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if !nodes[ia].is_switch() && !nodes[ib].is_switch() {
                return Err(Error::InvalidGraph(format!(
                    "users {a} and {b} cannot be linked directly"
                )));
            }
            if !(length >= 0.0) || !length.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "link {a}-{b} has invalid length {length}"
                )));
            }
            let success_prob = libm::exp(-alpha * length);
            // parallel cables collapse into the best one
            if let Some(&(_, existing)) = adjacency[ia].iter().find(|&&(n, _)| n == ib) {
                let link: &mut QuantumLink = &mut out_links[existing];
                if length < link.length {
                    link.length = length;
                    link.success_prob = success_prob;
                }
                continue;
            }
            let li = out_links.len();
            out_links.push(QuantumLink {
                a,
                b,
                length,
                success_prob,
            });
            adjacency[ia].push((ib, li));
            adjacency[ib].push((ia, li));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(NetworkGraph {
            nodes,
            index,
            links: out_links,
            adjacency,
            alpha,
            swap_prob,
        })
    }
}

/// A source/destination demand. The pair id is its position in the pair list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserPair {
    pub source: NodeId,
    pub destination: NodeId,
}

/// A graph together with the user pairs requesting entanglement.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub graph: NetworkGraph,
    pub pairs: Vec<UserPair>,
}

impl NetworkInstance {
    pub fn new(graph: NetworkGraph, pairs: Vec<UserPair>) -> Result<Self> {
        for (m, pair) in pairs.iter().enumerate() {
            if pair.source == pair.destination {
                return Err(Error::InvalidGraph(format!(
                    "pair {m} has identical source and destination"
                )));
            }
            for end in [pair.source, pair.destination] {
                let node = graph.node(end).ok_or(Error::UnknownNode(end))?;
                if node.is_switch() {
                    return Err(Error::InvalidGraph(format!(
                        "pair {m} endpoint {end} is a switch, not a user"
                    )));
                }
            }
        }
        Ok(NetworkInstance { graph, pairs })
    }
}

/// A loop-free walk through the graph with its cached metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePath {
    nodes: Vec<NodeId>,
    total_length: f64,
    success_prob: f64,
    // dense indices of the switches on the path, in path order
    switch_indices: Vec<usize>,
}

impl RoutePath {
    /// Validates `nodes` against `graph`.
    ///
    /// Every interior node must be a switch: users only ever terminate a path.
    pub fn new(graph: &NetworkGraph, nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "a path needs at least two nodes, got {}",
                nodes.len()
            )));
        }
        let mut indices = Vec::with_capacity(nodes.len());
        for &id in &nodes {
            let idx = graph.index_of(id)?;
            if indices.contains(&idx) {
                return Err(Error::InvalidPath(format!("node {id} repeats")));
            }
            indices.push(idx);
        }
        let mut total_length = 0.0;
        let mut link_prob = 1.0;
        for w in indices.windows(2) {
            let li = graph.link_index_between(w[0], w[1]).ok_or_else(|| {
                Error::InvalidPath(format!(
                    "no link between {} and {}",
                    graph.node_at(w[0]).id,
                    graph.node_at(w[1]).id
                ))
            })?;
            let link = graph.link(li);
            total_length += link.length;
            link_prob *= link.success_prob;
        }
        for &idx in &indices[1..indices.len() - 1] {
            if !graph.is_switch_at(idx) {
                return Err(Error::InvalidPath(format!(
                    "user {} cannot relay entanglement",
                    graph.node_at(idx).id
                )));
            }
        }
        let hops = nodes.len() - 1;
        let success_prob = link_prob * swap_factor(graph.swap_prob(), hops);
        let switch_indices = indices
            .into_iter()
            .filter(|&i| graph.is_switch_at(i))
            .collect();
        Ok(RoutePath {
            nodes,
            total_length,
            success_prob,
            switch_indices,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    /// Number of links on the path.
    pub fn hop_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Probability that one channel along this path is established.
    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    /// Dense graph indices of the switches this path visits.
    pub fn switch_indices(&self) -> &[usize] {
        &self.switch_indices
    }

    pub fn starts_with(&self, prefix: &[NodeId]) -> bool {
        self.nodes.starts_with(prefix)
    }

    pub fn reversed(&self, graph: &NetworkGraph) -> Result<RoutePath> {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        RoutePath::new(graph, nodes)
    }
}

fn swap_factor(q: f64, hops: usize) -> f64 {
    // hops - 1 swaps; a direct link has none
    libm::pow(q, hops.saturating_sub(1) as f64)
}

/// Success probability of one channel along `path_nodes`.
pub fn path_success_prob(path_nodes: &[NodeId], graph: &NetworkGraph) -> Result<f64> {
    RoutePath::new(graph, path_nodes.to_vec()).map(|p| p.success_prob())
}

/// Expected ebits per time slot when `assigned_qubits` qubits (so
/// `assigned_qubits / 2` parallel channels) are given to `path`.
pub fn expected_throughput(path: &RoutePath, assigned_qubits: u32) -> Result<f64> {
    if assigned_qubits % QUBITS_PER_CHANNEL != 0 {
        return Err(Error::InvalidArgument(format!(
            "assigned qubits must be even, got {assigned_qubits}"
        )));
    }
    Ok(f64::from(assigned_qubits / QUBITS_PER_CHANNEL) * path.success_prob())
}

/// Per-switch qubit reservations for one routing session.
///
/// The graph stays immutable; everything that changes while routing lives here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityLedger {
    capacity: Vec<Option<u32>>,
    reserved: Vec<u32>,
}

impl CapacityLedger {
    pub fn new(graph: &NetworkGraph) -> Self {
        let capacity: Vec<Option<u32>> = graph.nodes().iter().map(Node::qubit_capacity).collect();
        let reserved = alloc::vec![0; capacity.len()];
        CapacityLedger { capacity, reserved }
    }

    /// Qubits reserved at the node with dense index `idx`.
    pub fn reserved(&self, idx: usize) -> u32 {
        self.reserved[idx]
    }

    /// Free qubits at `idx`; `None` for users (unbounded).
    pub fn residual(&self, idx: usize) -> Option<u32> {
        self.capacity[idx].map(|c| c - self.reserved[idx])
    }

    /// Free channels at `idx` (`residual / 2`); `None` for users.
    pub fn residual_channels(&self, idx: usize) -> Option<u32> {
        self.residual(idx).map(|r| r / QUBITS_PER_CHANNEL)
    }

    /// Largest channel count `path` could still take on its own.
    pub fn max_channels(&self, path: &RoutePath) -> Option<u32> {
        path.switch_indices()
            .iter()
            .filter_map(|&i| self.residual_channels(i))
            .min()
    }

    pub fn fits(&self, path: &RoutePath, channels: u32) -> bool {
        let need = channels * QUBITS_PER_CHANNEL;
        path.switch_indices()
            .iter()
            .all(|&i| self.residual(i).map_or(true, |r| r >= need))
    }

    /// Reserves `channels` channels along `path`, or changes nothing and
    /// reports the first switch that lacks the qubits.
    pub fn reserve_path(
        &mut self,
        graph: &NetworkGraph,
        path: &RoutePath,
        channels: u32,
    ) -> Result<()> {
        let need = channels * QUBITS_PER_CHANNEL;
        for &i in path.switch_indices() {
            if let Some(free) = self.residual(i) {
                if free < need {
                    return Err(Error::CapacityExceeded {
                        switch: graph.node_at(i).id,
                        requested: need,
                        available: free,
                    });
                }
            }
        }
        self.apply(path, channels);
        Ok(())
    }

    /// Unchecked reservation for search code that has already called [`fits`](Self::fits).
    pub(crate) fn apply(&mut self, path: &RoutePath, channels: u32) {
        let need = channels * QUBITS_PER_CHANNEL;
        for &i in path.switch_indices() {
            if self.capacity[i].is_some() {
                self.reserved[i] += need;
            }
        }
    }

    pub fn release_path(&mut self, path: &RoutePath, channels: u32) {
        let need = channels * QUBITS_PER_CHANNEL;
        for &i in path.switch_indices() {
            if self.capacity[i].is_some() {
                debug_assert!(self.reserved[i] >= need);
                self.reserved[i] -= need;
            }
        }
    }
}
