//! Skeletal mechanism reduction by error-propagating directed relation
//! graphs, with interchangeable graph searches for the overall interaction
//! coefficients.
//!
//! The pipeline is: parse a mechanism ([`mechanism`]), load or synthesize
//! reaction rate samples ([`kinetics`]), build one weighted interaction
//! graph per sample ([`graph`]), search it from each target ([`search`],
//! over the queues in [`heaps`]), then scale, maximize and threshold the
//! results ([`reduction`]). [`bench`] times the searches and [`cli`] wires
//! everything into reproducible command-line runs.

pub mod bench;
pub mod cli;
pub mod exact;
pub mod graph;
pub mod heaps;
pub mod kinetics;
pub mod mechanism;
pub mod reduction;
pub mod search;

use thiserror::Error;

pub use graph::{build_graph, compute_dic, InteractionGraph};
pub use heaps::{MaxPriorityQueue, QueueKind};
pub use kinetics::{load_rate_samples, species_flux, RateSample, RateSampleSet};
pub use mechanism::{parse_mechanism, Mechanism};
pub use reduction::{overall_importance, reduce, ReductionConfig, ReductionReport};
pub use search::{brute_force_oic, run_search, Algorithm, AlgorithmKind, OicVector};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mechanism(#[from] mechanism::MechanismError),
    #[error(transparent)]
    Kinetics(#[from] kinetics::KineticsError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Heap(#[from] heaps::HeapError),
    #[error(transparent)]
    Search(#[from] search::SearchError),
    #[error(transparent)]
    Reduction(#[from] reduction::ReductionError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
}
