//! Packing many pairwise-disjoint independent transversals in multipartite
//! graphs.
//!
//! The solver runs a two-level randomized nibble: rounds each grow a batch of
//! partial transversals in parallel over several iterations, and every batch
//! is completed with Moser–Tardos resampling. Around it sit a local-degree
//! reduction pipeline, exact brute-force oracles for small instances, and two
//! reductions (multipartite clique packing and disjoint list colorings).

pub mod apps;
pub mod bitset;
pub mod graph;
pub mod lll;
pub mod nibble;
pub mod oracle;
pub mod reduce;
pub mod rng;
pub mod schedule;

pub use graph::{GraphError, GraphStats, ListAssignment, MultipartiteGraph, VertexId};
pub use lll::{LllConfig, Transversal};
pub use nibble::{MonitorConfig, PackOutcome, SolvePolicy};
pub use oracle::{verify_packing, Packing, Violation};
pub use schedule::{NibbleSchedule, ScheduleMode};

/// Name and version of the pseudo-random generator behind every seeded
/// operation. Written into output metadata so runs can be reproduced.
pub const PRNG_NAME: &str = "chacha8/splitmix64-substreams/v1";
