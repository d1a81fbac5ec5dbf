//! Planning, executing and analyzing data selection for finetuning under a
//! joint compute budget.
//!
//! Training examples are scored with lexicon, embedding, perplexity and
//! gradient utilities ([`selectors`]); selection and training are priced in
//! FLOPs ([`flops`]); the budget is turned into a concrete subset
//! ([`planner`]); and the compute/performance trade-off is modeled, fitted and
//! simulated ([`theory`], [`perf_model`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod flops;
pub mod perf_model;
pub mod planner;
pub mod selectors;
pub mod theory;

pub use error::{Error, Result};
