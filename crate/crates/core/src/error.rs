use alloc::string::String;
use core::fmt;

use crate::model::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside its documented domain.
    InvalidArgument(String),
    /// A node sequence is not a loop-free walk of the graph.
    InvalidPath(String),
    /// The graph description violates a structural invariant.
    InvalidGraph(String),
    UnknownNode(NodeId),
    /// Reserving `requested` qubits at `switch` would exceed what is left.
    CapacityExceeded {
        switch: NodeId,
        requested: u32,
        available: u32,
    },
    /// No connected topology was produced within the retry budget.
    GenerationFailed { seed: u64, attempts: u32 },
    /// An exhaustive enumeration would visit more than `limit` assignments.
    InstanceTooLarge { size: u128, limit: u128 },
    /// The Step-II search has more fractional residues than it is allowed to branch on.
    LimitExceeded { residues: usize, limit: usize },
    /// The LP relaxation could not be solved to optimality.
    LpFailure(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidPath(_) => "invalid-path",
            Error::InvalidGraph(_) => "invalid-graph",
            Error::UnknownNode(_) => "unknown-node",
            Error::CapacityExceeded { .. } => "capacity-exceeded",
            Error::GenerationFailed { .. } => "generation-failed",
            Error::InstanceTooLarge { .. } => "instance-too-large",
            Error::LimitExceeded { .. } => "limit-exceeded",
            Error::LpFailure(_) => "lp-failure",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidPath(msg) => write!(f, "invalid path: {msg}"),
            Error::InvalidGraph(msg) => write!(f, "invalid graph: {msg}"),
            Error::UnknownNode(id) => write!(f, "unknown node {id}"),
            Error::CapacityExceeded {
                switch,
                requested,
                available,
            } => write!(
                f,
                "switch {switch} has {available} free qubits, {requested} requested"
            ),
            Error::GenerationFailed { seed, attempts } => write!(
                f,
                "no connected topology after {attempts} attempts (seed {seed})"
            ),
            Error::InstanceTooLarge { size, limit } => {
                write!(f, "enumeration size {size} exceeds guard {limit}")
            }
            Error::LimitExceeded { residues, limit } => write!(
                f,
                "{residues} fractional residues exceed the search limit of {limit}"
            ),
            Error::LpFailure(msg) => write!(f, "lp relaxation failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
