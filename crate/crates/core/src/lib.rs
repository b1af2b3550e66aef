//! Entanglement routing for quantum networks.
//!
//! Routing happens in two steps. Step I picks at most one main path per user
//! pair so that as many pairs as possible get a channel. Step II spends the
//! remaining switch qubits on extra channels for the served pairs, maximizing
//! expected ebits per time slot. Both steps solve an LP relaxation over a
//! catalog of K-shortest paths and then recover an integral plan by search.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod baselines;
pub mod error;
pub mod kpaths;
pub mod lp;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod plan;
pub mod step1;
pub mod step2;
pub mod topology;

pub use baselines::{greedy_route, PathMetric};
pub use error::{Error, Result};
pub use kpaths::{selective_paths, yen_k_shortest, PathSetCatalog};
pub use model::{
    CapacityLedger, NetworkGraph, NetworkInstance, Node, NodeId, NodeKind, Point, QuantumLink,
    RoutePath, UserPair,
};
pub use montecarlo::{simulate_throughput, McResult};
pub use plan::{ChannelAssignment, RoutingPlan};
pub use step1::{solve_step1, Step1Plan};
pub use step2::{combined_plan, solve_step2, solve_throughput_direct, Step2Plan};
pub use topology::{calibrate_alpha, generate_topology, TopologyConfig};
