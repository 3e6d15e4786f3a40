//! Emulator and benchmark harness for a local streaming decoder of
//! quantum error-correcting codes.
//!
//! * [`graph`] builds decoding-graph layer templates.
//! * [`noise`] samples per-round edge bitflips.
//! * [`snowflake`] emulates the local streaming decoder timestep by timestep.
//! * [`baseline`] is a batch union-find decoder run with the forward
//!   windowing method.
//! * [`accounting`] tracks the residual error and computes the metrics.
//! * [`harness`] runs Monte Carlo experiments and writes CSV output.

pub mod accounting;
pub mod baseline;
mod dsu;
pub mod error;
pub mod graph;
pub mod harness;
pub mod noise;
pub mod snowflake;
pub mod stream;

pub use error::{AccountingError, GraphError, HarnessError, NoiseError, SnowflakeError};
pub use graph::{build_template, Direction, EdgeRef, Family, LayerTemplate, NodeDescriptor, NodeRef};
pub use noise::{NoiseConfig, RoundSample, SyndromeStream};
pub use snowflake::Window;
