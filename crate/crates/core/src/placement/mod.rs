//! Station placement: pick size tiers at candidate sites to maximize
//! tier-scaled site value under count caps and spacing rules.
//!
//! A placement is feasible when
//! * at most `n_max` sites are used, at most `m_max` medium and `l_max` large;
//! * each site holds at most one station;
//! * every pair of stations is at least `dm_m` apart;
//! * with the isolation constraint on and two or more stations placed, each
//!   station has another station within `dl_m`.

mod exact;
mod heuristic;
mod model;
mod neighbors;
mod sweep;
mod validate;

pub use exact::{solve_exact, solve_exact_with, DEFAULT_EXACT_LIMIT};
pub use heuristic::{solve_heuristic, solve_heuristic_from};
pub use model::PlacementModel;
pub use neighbors::NeighborIndex;
pub use sweep::{sweep_n, SweepPoint};
pub use validate::{validate_placement, Violation};

use alloc::collections::BTreeMap;

use crate::model::CandidateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Small,
    Medium,
    Large,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Small, Tier::Medium, Tier::Large];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Small => "small",
            Tier::Medium => "medium",
            Tier::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Proven optimal by the exact solver.
    Optimal,
    /// Local optimum from the heuristic.
    Heuristic,
    /// No station could be placed (no candidates); the empty placement.
    FeasibleEmpty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub assignment: BTreeMap<CandidateId, Tier>,
    pub objective: f64,
    pub status: SolveStatus,
}

impl Placement {
    pub fn empty() -> Self {
        Placement { assignment: BTreeMap::new(), objective: 0.0, status: SolveStatus::FeasibleEmpty }
    }

    pub fn count(&self, tier: Tier) -> usize {
        self.assignment.values().filter(|&&t| t == tier).count()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Relative tolerance used when comparing objectives for ties.
pub(crate) const OBJECTIVE_RTOL: f64 = 1e-9;

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= OBJECTIVE_RTOL * a.abs().max(b.abs())
}
