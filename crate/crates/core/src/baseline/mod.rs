//! Union-find baseline: batch decoding of a window and the forward
//! windowing method on top of it.

pub mod forward;
pub mod uf;

pub use forward::ForwardUf;
pub use uf::{peel, uf_decode, BatchWindow, UfClusterForest};
