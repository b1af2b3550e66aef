//! Algorithm-independent routing plans and the central capacity validator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{NetworkGraph, RoutePath, UserPair, QUBITS_PER_CHANNEL};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAssignment {
    pub pair: usize,
    pub path: RoutePath,
    pub channels: u32,
}

/// Channels assigned to paths, whatever algorithm produced them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutingPlan {
    pub assignments: Vec<ChannelAssignment>,
}

impl RoutingPlan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `channels` on `path` for `pair`, merging with an existing entry
    /// for the same pair and node sequence.
    pub fn add(&mut self, pair: usize, path: &RoutePath, channels: u32) {
        if channels == 0 {
            return;
        }
        if let Some(a) = self
            .assignments
            .iter_mut()
            .find(|a| a.pair == pair && a.path.nodes() == path.nodes())
        {
            a.channels += channels;
        } else {
            self.assignments.push(ChannelAssignment {
                pair,
                path: path.clone(),
                channels,
            });
        }
    }

    pub fn total_channels(&self) -> u64 {
        self.assignments.iter().map(|a| u64::from(a.channels)).sum()
    }

    /// Number of distinct pairs holding at least one channel.
    pub fn served_pairs(&self) -> usize {
        self.assignments
            .iter()
            .filter(|a| a.channels > 0)
            .map(|a| a.pair)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Expected ebits per time slot summed over every channel.
    pub fn expected_throughput(&self) -> f64 {
        self.assignments
            .iter()
            .map(|a| f64::from(a.channels) * a.path.success_prob())
            .sum()
    }

    /// Qubits each switch (by dense index) would hold under this plan.
    pub fn qubit_usage(&self) -> BTreeMap<usize, u32> {
        let mut usage = BTreeMap::new();
        for a in &self.assignments {
            for &s in a.path.switch_indices() {
                *usage.entry(s).or_insert(0) += a.channels * QUBITS_PER_CHANNEL;
            }
        }
        usage
    }

    /// Checks every path against the graph and pair list and every switch
    /// against its qubit capacity.
    pub fn validate(&self, graph: &NetworkGraph, pairs: &[UserPair]) -> Result<()> {
        for a in &self.assignments {
            let rebuilt = RoutePath::new(graph, a.path.nodes().to_vec())?;
            if rebuilt.switch_indices() != a.path.switch_indices() {
                return Err(Error::InvalidPath(format!(
                    "path for pair {} was built on a different graph",
                    a.pair
                )));
            }
            let pair = pairs.get(a.pair).ok_or_else(|| {
                Error::InvalidArgument(format!("plan references unknown pair {}", a.pair))
            })?;
            if a.path.source() != pair.source || a.path.destination() != pair.destination {
                return Err(Error::InvalidPath(format!(
                    "path for pair {} does not join {} and {}",
                    a.pair, pair.source, pair.destination
                )));
            }
        }
        for (s, used) in self.qubit_usage() {
            let node = graph.node_at(s);
            let cap = node.qubit_capacity().unwrap_or(u32::MAX);
            if used > cap {
                return Err(Error::CapacityExceeded {
                    switch: node.id,
                    requested: used,
                    available: cap,
                });
            }
        }
        Ok(())
    }
}
