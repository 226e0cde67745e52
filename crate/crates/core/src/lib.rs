//! Wireless sensor network coverage with OPTICS-based node activation.
//!
//! Deployed sensors are clustered by density with OPTICS; inside every
//! cluster a selection tree of active sensors is grown by acceptance level
//! while overlapping, redundant sensors are skipped. Active sets rotate
//! round by round so that idle sensors take over while the previous set
//! sleeps.

pub mod config;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod network;
pub mod optics;
pub mod protocol;
pub mod spatial;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{Disc, Point2D};
pub use network::{Deployment, NeighborTable, NodeId, NodeState, SensorNode};
pub use optics::{ClusterAssignment, OpticsParams, OrderedPoint};
pub use protocol::{ProtocolConfig, RoundState, SelectionTree, Simulation};
pub mod cli;
