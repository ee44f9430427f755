//! Truck rebalancing: station targets by class, transfer bounds, and a
//! minimum-distance route whose load stays within truck capacity.
//!
//! Routes are handled as visit orders rather than arcs, so the at-most-one
//! arrival and departure per station and the ban on self-loops hold by
//! construction. Plans are ranked lexicographically: more bikes moved toward
//! targets first, shorter Manhattan distance second.

mod exact;
mod heuristic;
mod instance;
mod plan;
mod schedule;
mod state;
mod zone;

pub use exact::{solve_route_exact, solve_route_exact_with, DEFAULT_ROUTE_EXACT_LIMIT};
pub use heuristic::solve_route_heuristic;
pub use instance::RebalanceInstance;
pub use plan::{validate_plan, PlanViolation, Stop, TruckPlan};
pub use schedule::{schedule_passes, Pass, PassKind};
pub use state::{set_targets, target_for, transfer_bounds, StationState, TargetRounding, TransferBounds};
pub use zone::{zone_partition, ZonePartition};
