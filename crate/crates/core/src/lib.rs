//! Refinement of speckled pixel pseudo-labels into connectivity-level
//! pseudo-labels.
//!
//! The pipeline has two stages. [`psa`] aggregates pseudo-labelled pixels
//! into regions by querying a promptable mask [`backend`]: "things" classes
//! through box and point prompts, "stuff" classes by majority vote inside
//! automatic proposals. [`scc`] then trains a small connectivity classifier
//! for a short warm-up, models the per-connectivity loss with a two-component
//! Gaussian mixture, and keeps, relabels or drops each region according to
//! its noise posterior.

pub mod augment;
pub mod backend;
pub mod components;
pub mod error;
pub mod eval;
pub mod io;
pub mod pipeline;
pub mod psa;
pub mod scc;
pub mod synth;

pub use error::{Error, Result};
