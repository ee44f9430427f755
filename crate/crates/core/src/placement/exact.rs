//! Depth-first branch-and-bound over candidates in descending value order.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{approx_eq, NeighborIndex, Placement, PlacementModel, SolveStatus, Tier, OBJECTIVE_RTOL};
use crate::error::{Error, Result};

/// Largest candidate count the exact solver accepts by default.
pub const DEFAULT_EXACT_LIMIT: usize = 24;

/// Hard ceiling imposed by the bitmask representation.
const BITMASK_LIMIT: usize = 32;

/// Proven-optimal placement for models with at most
/// [`DEFAULT_EXACT_LIMIT`] candidates.
pub fn solve_exact(model: &PlacementModel) -> Result<Placement> {
    solve_exact_with(model, DEFAULT_EXACT_LIMIT)
}

/// Like [`solve_exact`] with a custom size guard (at most 32).
///
/// Among equal-objective optima the result has the lexicographically smallest
/// sorted id list, then the smallest tiers in id order.
pub fn solve_exact_with(model: &PlacementModel, size_limit: usize) -> Result<Placement> {
    model.validate()?;
    let n = model.candidates.len();
    let limit = size_limit.min(BITMASK_LIMIT);
    if n > limit {
        return Err(Error::ExactLimitExceeded { size: n, limit, hint: "solve_heuristic" });
    }
    if n == 0 {
        return Ok(Placement::empty());
    }

    let order = model.value_order();
    let index = NeighborIndex::build(&model.candidates, model.dm_m, model.dl_m, model.metric);
    // Re-express everything in search order.
    let mut rank = vec![0usize; n];
    for (k, &i) in order.iter().enumerate() {
        rank[i] = k;
    }
    let mask_of = |list: &[usize]| list.iter().fold(0u32, |m, &j| m | (1 << rank[j]));
    let conflict: Vec<u32> = order.iter().map(|&i| mask_of(&index.within_dm[i])).collect();
    let near: Vec<u32> = order.iter().map(|&i| mask_of(&index.within_dl[i])).collect();
    let values: Vec<f64> = order.iter().map(|&i| model.candidates[i].base_value).collect();
    let ids: Vec<&str> = order.iter().map(|&i| model.candidates[i].id.as_str()).collect();

    let mut search = Search {
        model,
        n,
        values: &values,
        ids: &ids,
        conflict: &conflict,
        near: &near,
        tiers: vec![None; n],
        best_tiers: vec![None; n],
        best_value: 0.0,
        assigned: 0,
        used: [0; 3],
    };
    search.dfs(0, 0.0);

    let mut tiers = vec![None; n];
    for (k, &i) in order.iter().enumerate() {
        tiers[i] = search.best_tiers[k];
    }
    Ok(model.placement_from(&tiers, SolveStatus::Optimal))
}

struct Search<'a> {
    model: &'a PlacementModel,
    n: usize,
    values: &'a [f64],
    ids: &'a [&'a str],
    conflict: &'a [u32],
    near: &'a [u32],
    tiers: Vec<Option<Tier>>,
    best_tiers: Vec<Option<Tier>>,
    best_value: f64,
    /// Bitmask of assigned positions.
    assigned: u32,
    /// Stations used per tier (small, medium, large).
    used: [usize; 3],
}

impl Search<'_> {
    fn count(&self) -> usize {
        self.assigned.count_ones() as usize
    }

    fn cap(&self, tier: Tier) -> usize {
        match tier {
            Tier::Small => usize::MAX,
            Tier::Medium => self.model.m_max,
            Tier::Large => self.model.l_max,
        }
    }

    /// Optimistic completion value ignoring spacing: the next values (already
    /// sorted descending) paired with the best remaining multipliers.
    fn bound(&self, k: usize, current: f64) -> f64 {
        let slots = (self.model.n_max - self.count()).min(self.n - k);
        let mut large = self.model.l_max - self.used[2];
        let mut medium = self.model.m_max - self.used[1];
        let mut total = current;
        for &v in &self.values[k..k + slots] {
            let mult = if large > 0 {
                large -= 1;
                self.model.gamma
            } else if medium > 0 {
                medium -= 1;
                self.model.beta
            } else {
                self.model.alpha
            };
            total += v * mult;
        }
        total
    }

    /// Some assigned station lacks a placed partner within dl and none of the
    /// undecided positions (>= k) can become one.
    fn stranded(&self, k: usize) -> bool {
        let undecided = if k >= 32 { 0 } else { u32::MAX << k };
        let mut rest = self.assigned;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.near[i] & self.assigned == 0 && self.near[i] & undecided == 0 {
                return true;
            }
        }
        false
    }

    fn isolation_ok(&self) -> bool {
        if !self.model.isolation_constraint || self.count() < 2 {
            return true;
        }
        let mut rest = self.assigned;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.near[i] & self.assigned == 0 {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self, k: usize, current: f64) {
        if k == self.n || self.count() == self.model.n_max {
            self.leaf(current);
            return;
        }
        if self.bound(k, current) < self.best_value * (1.0 - OBJECTIVE_RTOL) {
            return;
        }
        if self.model.isolation_constraint && self.count() >= 1 && self.stranded(k) {
            // Only completion that can still be feasible: stop here (a lone
            // station needs no partner).
            if self.count() == 1 {
                self.leaf(current);
            }
            return;
        }

        let value = self.values[k];
        let bit = 1u32 << k;
        if self.conflict[k] & self.assigned == 0 {
            // Zero-value sites only matter as isolation partners; a small
            // station is never worse for them.
            let tiers: &[Tier] = if value > 0.0 {
                &[Tier::Large, Tier::Medium, Tier::Small]
            } else {
                &[Tier::Small]
            };
            for &tier in tiers {
                let slot = tier as usize;
                if self.used[slot] >= self.cap(tier) {
                    continue;
                }
                self.assigned |= bit;
                self.used[slot] += 1;
                self.tiers[k] = Some(tier);
                self.dfs(k + 1, current + value * self.model.multiplier(tier));
                self.tiers[k] = None;
                self.used[slot] -= 1;
                self.assigned &= !bit;
            }
        }
        self.dfs(k + 1, current);
    }

    fn leaf(&mut self, current: f64) {
        if !self.isolation_ok() {
            return;
        }
        let better = if approx_eq(current, self.best_value) {
            self.tie_break() == Ordering::Less
        } else {
            current > self.best_value
        };
        if better {
            self.best_value = current;
            self.best_tiers.clone_from(&self.tiers);
        }
    }

    /// Compares the current assignment with the incumbent: sorted id lists
    /// first, then tiers in id order.
    fn tie_break(&self) -> Ordering {
        let key = |tiers: &[Option<Tier>]| {
            let mut key: Vec<(&str, Tier)> = tiers
                .iter()
                .enumerate()
                .filter_map(|(k, t)| t.map(|t| (self.ids[k], t)))
                .collect();
            key.sort_unstable();
            key
        };
        let (cur, inc) = (key(&self.tiers), key(&self.best_tiers));
        cur.iter()
            .map(|e| e.0)
            .cmp(inc.iter().map(|e| e.0))
            .then_with(|| cur.iter().map(|e| e.1).cmp(inc.iter().map(|e| e.1)))
    }
}
