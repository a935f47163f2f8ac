//! Broker-level decomposition of order-flow statistics for limit order books.
//!
//! The crate classifies best-quote events into six types (market orders,
//! limit orders and cancellations, each price-changing or not), then measures
//! how prices and order signs respond to each type, split into the part due
//! to the broker who placed the conditioning order and the part due to
//! everyone else.
//!
//! Modules:
//! - [`event_model`]: taxonomy, sign convention, ingestion and CSV formats.
//! - [`estimators`]: response and sign-correlation functions with exact
//!   integer numerators.
//! - [`broker_stats`]: per-broker liquidity-provision ratios and activity
//!   concentration.
//! - [`stat_tests`]: block bootstrap, sign-reshuffle noise floor, t-test
//!   matrices and power-law fits.
//! - [`synthgen`]: a synthetic order-flow generator with known ground truth.
//! - [`cli_io`]: configuration, report bundles and the command surface.

pub mod broker_stats;
pub mod cli_io;
pub mod error;
pub mod estimators;
pub mod event_model;
pub mod stat_tests;
pub mod synthgen;

pub use error::{Error, Result};
