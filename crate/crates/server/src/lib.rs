//! The LAVA service: persistence, file adapters, the HTTP API and the
//! synthetic data generator around `lava-core`.

pub mod api;
pub mod auth;
pub mod eventlog;
pub mod files;
pub mod journal;
pub mod state;
pub mod synth;
