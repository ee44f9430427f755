//! IO side of the bike-share toolkit: parsers for trip logs, station
//! catalogs, candidate sites and GeoJSON features; writers for every output
//! file; run configuration; and the subcommands behind the `bss-opt` binary.
//!
//! All solving happens in [`bss_core`].

pub mod commands;
pub mod config;
pub mod emit;
pub mod ingest;

pub use bss_core;
