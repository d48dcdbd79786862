pub mod error;
pub mod graph;
pub mod rng;
pub mod vertex_set;
pub mod sequence;
pub mod search;
pub mod tiling;
pub mod bipartite;
pub mod drc;
pub mod cover;
pub mod hypergraph;
pub mod params;
pub mod absorption;
pub mod oracle;
pub mod pipeline;
