//! VertCoHiRF: fully decentralized clustering of vertically partitioned
//! data through identifier-level structural consensus.
//!
//! Agents holding complementary feature views of the same samples cluster
//! locally, broadcast only labels and ordinal medoid rankings, and retain
//! exactly the groupings no peer contradicts. Iterating the two phases
//! shrinks the active medoid set and records every fusion in a shared
//! Cluster Fusion Hierarchy.
//!
//! Module map:
//! - [`model`]: sample ids, active sets, parent pointers, the fusion tree.
//! - [`cluster`]: local base clustering methods and the repeated local step.
//! - [`consensus`]: code concatenation, medoid ranking, the agent state
//!   machine and the protocol driver.
//! - [`transport`]: wire codec, in-process and TCP transports, and
//!   information-bit accounting.
//! - [`adversary`]: Byzantine label and ranking attacks for robustness
//!   experiments.
//! - [`datagen`]: synthetic dataset generators, vertical feature
//!   partitioning, CSV ingestion.
//! - [`metrics`]: ARI, silhouette, run summaries.

pub mod adversary;
pub mod cluster;
pub mod consensus;
pub mod datagen;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod transport;

pub use cluster::{ClusteringStrategy, LocalStepConfig, StrategyKind};
pub use model::{ActiveSet, AgentId, CfhTree, ClusterCode, LabelVector, ParentMap, SampleId};
