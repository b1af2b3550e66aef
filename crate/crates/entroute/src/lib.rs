//! File formats, experiment sweeps and the command-line front end for
//! [`entroute_core`].

pub mod algorithm;
pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;

pub use algorithm::{route_instance, route_with_catalog, Algorithm, RouteOutcome};
pub use config::{ExperimentConfig, Sweep, SweepParam, TopologySettings};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentTable, ResultRow, CSV_HEADER};
pub use formats::{CatalogFile, InstanceFile, PlanFile};
