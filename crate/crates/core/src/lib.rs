//! Turns raw device position reports into per-region daily mobility
//! statistics.
//!
//! The stages are `ingest` (parse and filter shards), `collate` (bucket by
//! device, split into local days), `metrics` (per device-day mobility),
//! `geocode` (canonical point to region), `aggregate` (region-day medians
//! and baseline index) and `output`. `pipeline` wires them together.

pub mod aggregate;
pub mod collate;
pub mod error;
pub mod geo;
pub mod geocode;
pub mod ingest;
pub mod metrics;
pub mod output;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
pub use geo::GeoPoint;
