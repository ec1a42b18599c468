//! Dynamic hypergraph engine with incremental triad counting.
//!
//! The engine keeps two mirrored incidence views in flat block arenas: h2v
//! (vertex list per hyperedge) and v2h (hyperedge list per vertex). Each view
//! pairs a [`block_store::FlatArena`] with an array-backed search tree
//! ([`block_manager::ManagerTree`]) that maps owner IDs to block starts and
//! tracks freed entries for reuse. On top of the storage sit triad counters
//! (26 hyperedge classes, 3 vertex types, temporal windows) and a batch
//! update path that re-counts only the neighborhood affected by a change
//! batch instead of the whole hypergraph.
//!
//! Module map:
//! - [`block_store`]: slot arena, block sizing, chaining, in-block edits
//! - [`block_manager`]: complete-BST directory of owners, free-node reuse
//! - [`hypergraph`]: the dual-view dynamic hypergraph and its batch ops
//! - [`triads`]: pattern classification and full/scoped counting
//! - [`dynamic_update`]: affected-region computation and count maintenance
//! - [`oracle`]: brute-force reference implementation for verification
//! - [`gen`]: seeded random instances and change batches

pub mod block_manager;
pub mod block_store;
pub mod dynamic_update;
pub mod gen;
pub mod hypergraph;
pub mod oracle;
pub mod triads;
