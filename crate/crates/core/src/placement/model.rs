use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::{Placement, SolveStatus, Tier};
use crate::error::{Error, Result};
use crate::geo::Metric;
use crate::model::{CandidateId, CandidateLocation};

/// The placement program: candidate sites with values plus caps, spacing
/// bounds and tier multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementModel {
    pub candidates: Vec<CandidateLocation>,
    /// Maximum number of stations.
    pub n_max: usize,
    /// Maximum number of medium stations.
    pub m_max: usize,
    /// Maximum number of large stations.
    pub l_max: usize,
    /// Minimum spacing between any two stations.
    pub dm_m: f64,
    /// Each station needs another within this distance (isolation bound).
    pub dl_m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub metric: Metric,
    pub isolation_constraint: bool,
}

impl PlacementModel {
    /// A model over `candidates` with the default parameters
    /// (N=400, M=L=50, dm=300 m, dl=1500 m, multipliers 1/1.5/2).
    pub fn new(candidates: Vec<CandidateLocation>) -> Self {
        PlacementModel {
            candidates,
            n_max: 400,
            m_max: 50,
            l_max: 50,
            dm_m: 300.0,
            dl_m: 1500.0,
            alpha: 1.0,
            beta: 1.5,
            gamma: 2.0,
            metric: Metric::GreatCircle,
            isolation_constraint: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidModel(msg));
        if self.n_max < 1 {
            return bad(format!("n_max must be at least 1, got {}", self.n_max));
        }
        if self.m_max > self.n_max || self.l_max > self.n_max {
            return bad(format!(
                "m_max ({}) and l_max ({}) must not exceed n_max ({})",
                self.m_max, self.l_max, self.n_max
            ));
        }
        if !(self.dm_m > 0.0 && self.dm_m < self.dl_m && self.dl_m.is_finite()) {
            return bad(format!("need 0 < dm_m < dl_m, got dm_m={} dl_m={}", self.dm_m, self.dl_m));
        }
        if !(self.alpha > 0.0 && self.alpha <= self.beta && self.beta <= self.gamma && self.gamma.is_finite()) {
            return bad(format!(
                "need 0 < alpha <= beta <= gamma, got {}/{}/{}",
                self.alpha, self.beta, self.gamma
            ));
        }
        let mut seen = BTreeSet::new();
        for c in &self.candidates {
            if !seen.insert(&c.id) {
                return bad(format!("duplicate candidate id {}", c.id));
            }
            if !(c.base_value >= 0.0 && c.base_value.is_finite()) {
                return bad(format!("candidate {} has invalid value {}", c.id, c.base_value));
            }
            if !c.location.is_valid() {
                return bad(format!("candidate {} has invalid coordinates", c.id));
            }
        }
        Ok(())
    }

    pub fn multiplier(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Small => self.alpha,
            Tier::Medium => self.beta,
            Tier::Large => self.gamma,
        }
    }

    /// Copy with a different station budget; tier caps are clamped to it.
    pub fn with_n_max(&self, n_max: usize) -> Self {
        PlacementModel {
            n_max,
            m_max: self.m_max.min(n_max),
            l_max: self.l_max.min(n_max),
            ..self.clone()
        }
    }

    /// Sum of value times multiplier over `assignment`, in id order.
    /// Unknown ids contribute nothing.
    pub fn objective_of(&self, assignment: &BTreeMap<CandidateId, Tier>) -> f64 {
        let value: BTreeMap<&CandidateId, f64> =
            self.candidates.iter().map(|c| (&c.id, c.base_value)).collect();
        assignment
            .iter()
            .map(|(id, &tier)| value.get(id).map_or(0.0, |v| v * self.multiplier(tier)))
            .sum()
    }

    /// Builds a [`Placement`] from per-candidate tiers (indexed like
    /// `self.candidates`).
    pub(crate) fn placement_from(&self, tiers: &[Option<Tier>], status: SolveStatus) -> Placement {
        let assignment: BTreeMap<CandidateId, Tier> = tiers
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (self.candidates[i].id.clone(), t)))
            .collect();
        let objective = self.objective_of(&assignment);
        let status = if assignment.is_empty() && self.candidates.is_empty() {
            SolveStatus::FeasibleEmpty
        } else {
            status
        };
        Placement { assignment, objective, status }
    }

    /// Candidate indices by descending value, ties by ascending id.
    pub(crate) fn value_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.candidates.len()).collect();
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&self.candidates[a], &self.candidates[b]);
            cb.base_value.total_cmp(&ca.base_value).then_with(|| ca.id.cmp(&cb.id))
        });
        order
    }
}
