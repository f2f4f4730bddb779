//! Fluid Communities community detection, with a label propagation baseline,
//! partition metrics, an LFR-style benchmark generator, a multi-ground-truth
//! diversity analysis and an experiment harness.

pub mod diversity;
pub mod error;
pub mod fluidc;
pub mod gamma;
pub mod graph;
pub mod harness;
pub mod lfr;
pub mod lpa;
pub mod metrics;
pub mod partition;
pub mod seed;

pub use error::{Error, Result};
pub use fluidc::{
    best_k_by_modularity, init_communities, run_fluidc, run_fluidc_disconnected, BestK,
    BestKOptions, FluidResult, FluidState,
};
pub use graph::{connected_components, induced_subgraph, load_edge_list, ComponentLabeling, Graph};
pub use lpa::run_lpa;
pub use metrics::{contingency, entropy, modularity, nmi_geometric, ContingencyTable};
pub use partition::Partition;
