//! From-scratch graph attention operator kit.
//!
//! Three attention operators over graphs, each with an exact hand-derived
//! backward pass:
//!
//! - **GAO**: soft attention, every node attends to its full neighborhood;
//! - **hGAO**: hard attention, every node attends to its k highest-scoring
//!   neighbors under a trainable projection, with sigmoid gating;
//! - **cGAO**: channel-wise attention, channels attend to channels and the
//!   adjacency matrix is never touched.
//!
//! On top of the operators: a GCN layer, the GAM block (attention + GCN +
//! skip concatenation), the GANet assembler, a full-batch Adam trainer for
//! node classification, and an analytic multiply-add / memory cost profiler
//! with a wall-clock harness.

pub mod cli;
pub mod error;
pub mod graph;
pub mod net;
pub mod ops;
pub mod profile;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::{DenseMatrix, SeededRng};
