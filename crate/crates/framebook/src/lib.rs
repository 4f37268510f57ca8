//! Book embeddings of k-framed graphs.
//!
//! A k-framed drawing is a simple biconnected plane skeleton whose faces have
//! degree at most k, plus crossing edges drawn inside skeleton faces. The
//! crate computes a vertex order and a page assignment using at most
//! `6 * ceil(k/2) + 5` pages.

pub mod generator;
pub mod graph_core;
pub mod io;
pub mod kframed;
pub mod mapgraph;
pub mod multi_level;
pub mod oracle;
pub mod peeling;
pub mod two_level;
