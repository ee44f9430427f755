//! Solvers for bike-share station placement and truck rebalancing.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Parsing, file
//! formats and the command-line front end live in `bss-opt`.
//!
//! * [`geo`]: coordinates, great-circle and Manhattan distances.
//! * [`demand`]: tract demand, hourly profiles, origin/destination classes,
//!   candidate-site values.
//! * [`placement`]: the station-placement program (exact and heuristic).
//! * [`rebalance`]: targets, transfer bounds, truck routes, zoning, passes.
//! * [`synth`]: seeded synthetic data.
#![no_std]

extern crate alloc;

pub mod demand;
pub mod error;
pub mod geo;
pub mod model;
pub mod placement;
pub mod rebalance;
pub mod synth;
pub mod time;

pub use error::{Error, Result};
pub use geo::{GeoPoint, Metric};
pub use model::{CandidateId, CandidateLocation, FeatureKind, FeatureSite, Station, StationId, Tract, TractId, TripRecord};
