//! Overlapping community detection by speaker-listener label propagation.
//!
//! Every node keeps a memory of the labels it has heard. In each sweep the
//! nodes take turns as listeners in a random order; each neighbor speaks one
//! label drawn from its memory in proportion to frequency, and the listener
//! records the most popular label it heard. Afterwards, labels a node heard
//! rarely (with probability below a threshold `r`) are discarded, and nodes
//! sharing a label form communities.
//!
//! ```
//! use slpa::{detect, EngineConfig, Graph, Threshold};
//!
//! let graph = Graph::with_node_count(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
//! let result = detect(&graph, &EngineConfig::slpa(50, 7), Threshold::new(0.2).unwrap()).unwrap();
//! assert!(result.cover.covers_all_nodes());
//! ```

pub mod benchgen;
pub mod cover;
pub mod engine;
pub mod graph;
pub mod metrics;
pub mod postprocess;
pub mod report;

pub use benchgen::{generate, BenchError, BenchSpec, Benchmark};
pub use cover::{parse_cover, Cover, CoverError, RawCover};
pub use engine::{run, run_lpa, EngineConfig, EngineError, Label, Memory, MemoryState, Mode};
pub use graph::{load_edge_list, parse_edge_list, Graph, GraphError};
pub use metrics::{cover_stats, extended_nmi, overlap_fscore, qov, CoverStats};
pub use postprocess::{detect, Detection, LabelDistribution, Threshold, ThresholdError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}
