//! JSON file formats for instances and plans.

use std::fs;
use std::path::Path;

use entroute_core::{
    NetworkGraph, NetworkInstance, NodeId, NodeKind, PathSetCatalog, Point, RoutePath,
    RoutingPlan, UserPair,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub qubits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub a: u32,
    pub b: u32,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub source: u32,
    pub destination: u32,
}

/// On-disk form of a [`NetworkInstance`]. Link probabilities are derived
/// from `alpha` and the lengths on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub alpha: f64,
    pub swap_prob: f64,
    pub switches: Vec<SwitchRecord>,
    pub users: Vec<UserRecord>,
    pub links: Vec<LinkRecord>,
    pub pairs: Vec<PairRecord>,
}

impl InstanceFile {
    pub fn from_instance(instance: &NetworkInstance) -> Self {
        let g = &instance.graph;
        let mut switches = Vec::new();
        let mut users = Vec::new();
        for node in g.nodes() {
            let (id, x, y) = (node.id.0, node.position.x, node.position.y);
            match node.kind {
                NodeKind::Switch { qubits } => switches.push(SwitchRecord { id, x, y, qubits }),
                NodeKind::User => users.push(UserRecord { id, x, y }),
            }
        }
        InstanceFile {
            alpha: g.alpha(),
            swap_prob: g.swap_prob(),
            switches,
            users,
            links: g
                .links()
                .iter()
                .map(|l| LinkRecord {
                    a: l.a.0,
                    b: l.b.0,
                    length: l.length,
                })
                .collect(),
            pairs: instance
                .pairs
                .iter()
                .map(|p| PairRecord {
                    source: p.source.0,
                    destination: p.destination.0,
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<NetworkInstance> {
        let mut b = NetworkGraph::builder(self.alpha, self.swap_prob);
        for s in &self.switches {
            b.add_switch(NodeId(s.id), Point::new(s.x, s.y), s.qubits);
        }
        for u in &self.users {
            b.add_user(NodeId(u.id), Point::new(u.x, u.y));
        }
        for l in &self.links {
            b.add_link(NodeId(l.a), NodeId(l.b), l.length);
        }
        let pairs = self
            .pairs
            .iter()
            .map(|p| UserPair {
                source: NodeId(p.source),
                destination: NodeId(p.destination),
            })
            .collect();
        Ok(NetworkInstance::new(b.build()?, pairs)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub pair: usize,
    pub path: Vec<u32>,
    pub channels: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub algorithm: String,
    pub served_pairs: usize,
    pub expected_throughput: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_optimum: Option<f64>,
    pub assignments: Vec<AssignmentRecord>,
}

impl PlanFile {
    pub fn new(algorithm: &str, plan: &RoutingPlan, lp_optimum: Option<f64>) -> Self {
        PlanFile {
            algorithm: algorithm.to_string(),
            served_pairs: plan.served_pairs(),
            expected_throughput: plan.expected_throughput(),
            lp_optimum,
            assignments: plan
                .assignments
                .iter()
                .map(|a| AssignmentRecord {
                    pair: a.pair,
                    path: a.path.nodes().iter().map(|n| n.0).collect(),
                    channels: a.channels,
                })
                .collect(),
        }
    }

    /// Rebuilds the plan on `graph`. Paths are checked for existence, not capacity.
    pub fn to_plan(&self, graph: &NetworkGraph) -> Result<RoutingPlan> {
        let mut plan = RoutingPlan::new();
        for a in &self.assignments {
            let path = RoutePath::new(graph, a.path.iter().map(|&n| NodeId(n)).collect())?;
            plan.add(a.pair, &path, a.channels);
        }
        Ok(plan)
    }
}

/// Candidate paths per pair, as node-id sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub pairs: Vec<Vec<Vec<u32>>>,
}

impl CatalogFile {
    pub fn from_catalog(catalog: &PathSetCatalog) -> Self {
        CatalogFile {
            pairs: (0..catalog.pair_count())
                .map(|m| {
                    catalog
                        .pair_paths(m)
                        .iter()
                        .map(|p| p.nodes().iter().map(|n| n.0).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_catalog(&self, graph: &NetworkGraph) -> Result<PathSetCatalog> {
        let mut lists = Vec::with_capacity(self.pairs.len());
        for paths in &self.pairs {
            let mut list = Vec::with_capacity(paths.len());
            for nodes in paths {
                list.push(RoutePath::new(graph, nodes.iter().map(|&n| NodeId(n)).collect())?);
            }
            lists.push(list);
        }
        Ok(PathSetCatalog::from_lists(lists))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_instance(path: &Path) -> Result<NetworkInstance> {
    read_json::<InstanceFile>(path)?.to_instance()
}
