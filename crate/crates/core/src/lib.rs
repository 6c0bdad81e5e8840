//! Feature-group-aware stacking for binary tabular classification.
//!
//! Features are partitioned into groups, each group gets its own pool of base
//! learners trained under stratified K-fold out-of-fold prediction, and the
//! per-group logits are combined by an additive meta-learner.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, CSV ingestion
//! and the command-line driver live in the `strike` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cmi;
pub mod error;
pub mod exec;
pub mod grouping;
pub mod learners;
pub mod math;
pub mod matrix;
pub mod metrics;
pub mod stacking;
pub mod tabular;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use matrix::ColumnMatrix;
