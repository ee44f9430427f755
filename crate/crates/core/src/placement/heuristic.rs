//! Multi-start greedy construction followed by swap/add local search.
//!
//! For a fixed set of sites the best tiering is closed-form: the `l_max`
//! highest-value sites get large stations, the next `m_max` medium, the rest
//! small. The search therefore works on site sets and re-tiers after every
//! move, which subsumes explicit tier-change moves. Relocating a station is a
//! swap whose incoming site lies near the outgoing one.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{NeighborIndex, Placement, PlacementModel, SolveStatus, Tier};
use crate::error::{Error, Result};
use crate::model::CandidateId;

/// Greedy + local search placement, deterministic for a fixed `seed`.
pub fn solve_heuristic(model: &PlacementModel, seed: u64) -> Result<Placement> {
    solve_heuristic_from(model, seed, None)
}

/// Like [`solve_heuristic`], but starts from `initial` (which must be feasible
/// for `model`; tiers in it are ignored and re-derived).
pub fn solve_heuristic_from(
    model: &PlacementModel,
    seed: u64,
    initial: Option<&Placement>,
) -> Result<Placement> {
    model.validate()?;
    if model.candidates.is_empty() {
        return Ok(Placement::empty());
    }
    let index = NeighborIndex::build(&model.candidates, model.dm_m, model.dl_m, model.metric);
    let order = model.value_order();

    let warm: Option<Vec<usize>> = match initial {
        Some(init) => {
            let position: BTreeMap<&CandidateId, usize> =
                model.candidates.iter().enumerate().map(|(i, c)| (&c.id, i)).collect();
            let mut sites: Vec<usize> = Vec::with_capacity(init.assignment.len());
            for id in init.assignment.keys() {
                let &i = position.get(id).ok_or_else(|| {
                    Error::InvalidModel(alloc::format!("initial placement uses unknown candidate {id}"))
                })?;
                sites.push(i);
            }
            Some(sites)
        }
        None => None,
    };

    // Each start forces one high-value site first; the first start is plain
    // greedy (or the warm start).
    let n_starts = (MULTI_START_BUDGET / model.candidates.len()).clamp(MIN_STARTS, MAX_STARTS);
    let seeds: Vec<usize> = order.iter().copied().filter(|&i| model.candidates[i].base_value > 0.0).take(n_starts).collect();

    let pairs = if model.isolation_constraint { partner_pairs(model, &index) } else { Vec::new() };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Placement> = None;
    for start in 0..seeds.len().max(1) {
        let mut state = SiteSet::new(model, &index);
        match (&warm, start) {
            (Some(sites), 0) => state.load(sites)?,
            _ => {
                if let Some(&s) = seeds.get(start) {
                    state.add(s);
                }
            }
        }
        state.greedy(&order);
        state.local_search(&order, &pairs, &mut rng);
        let placement = model.placement_from(&state.tiers(&order), SolveStatus::Heuristic);
        if best.as_ref().is_none_or(|b| placement.objective > b.objective) {
            best = Some(placement);
        }
    }
    Ok(best.unwrap_or_else(Placement::empty))
}

/// Positive-valued site pairs that may both host stations and satisfy each
/// other's isolation bound, best combined value first.
fn partner_pairs(model: &PlacementModel, index: &NeighborIndex) -> Vec<(usize, usize)> {
    let v = |i: usize| model.candidates[i].base_value;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (j, near) in index.within_dl.iter().enumerate() {
        if v(j) <= 0.0 {
            continue;
        }
        for &k in near {
            if k > j && v(k) > 0.0 && !index.conflicts(j, k) {
                pairs.push((j, k));
            }
        }
    }
    pairs.sort_by(|a, b| (v(b.0) + v(b.1)).total_cmp(&(v(a.0) + v(a.1))).then(a.cmp(b)));
    pairs
}

/// Restarts scale down with instance size: roughly this many candidate
/// visits per restart round.
const MULTI_START_BUDGET: usize = 1024;
const MIN_STARTS: usize = 4;
const MAX_STARTS: usize = 8;

/// Incrementally maintained set of chosen sites.
struct SiteSet<'a> {
    model: &'a PlacementModel,
    index: &'a NeighborIndex,
    chosen: Vec<bool>,
    members: Vec<usize>,
    /// Chosen sites strictly closer than dm.
    blocked: Vec<u32>,
    /// Chosen sites within dl.
    near: Vec<u32>,
}

impl<'a> SiteSet<'a> {
    fn new(model: &'a PlacementModel, index: &'a NeighborIndex) -> Self {
        let n = model.candidates.len();
        SiteSet {
            model,
            index,
            chosen: vec![false; n],
            members: Vec::new(),
            blocked: vec![0; n],
            near: vec![0; n],
        }
    }

    fn value(&self, i: usize) -> f64 {
        self.model.candidates[i].base_value
    }

    fn isolation(&self) -> bool {
        self.model.isolation_constraint
    }

    /// Adds a known-feasible set. Components may be disconnected, so the
    /// isolation rule is checked on the whole set instead of per insertion.
    fn load(&mut self, sites: &[usize]) -> Result<()> {
        for &i in sites {
            if self.chosen[i] || self.blocked[i] != 0 || self.members.len() >= self.model.n_max {
                return Err(Error::InvalidModel("initial placement is infeasible for this model".into()));
            }
            self.add(i);
        }
        if self.isolation() && self.members.len() >= 2 && self.members.iter().any(|&i| self.near[i] == 0) {
            return Err(Error::InvalidModel("initial placement leaves a station isolated".into()));
        }
        Ok(())
    }

    fn can_add(&self, j: usize) -> bool {
        !self.chosen[j]
            && self.members.len() < self.model.n_max
            && self.blocked[j] == 0
            && (!self.isolation() || self.members.is_empty() || self.near[j] > 0)
    }

    fn add(&mut self, j: usize) {
        self.chosen[j] = true;
        self.members.push(j);
        for &k in &self.index.within_dm[j] {
            self.blocked[k] += 1;
        }
        for &k in &self.index.within_dl[j] {
            self.near[k] += 1;
        }
    }

    fn remove(&mut self, i: usize) {
        self.chosen[i] = false;
        self.members.retain(|&m| m != i);
        for &k in &self.index.within_dm[i] {
            self.blocked[k] -= 1;
        }
        for &k in &self.index.within_dl[i] {
            self.near[k] -= 1;
        }
    }

    /// Whether replacing chosen `i` by unchosen `j` stays feasible.
    fn can_swap(&self, i: usize, j: usize) -> bool {
        if self.chosen[j] {
            return false;
        }
        let i_blocks_j = self.index.conflicts(i, j);
        if self.blocked[j] - u32::from(i_blocks_j) != 0 {
            return false;
        }
        if !self.isolation() || self.members.len() < 2 {
            return true;
        }
        let i_near_j = self.index.near(i, j);
        if self.near[j] - u32::from(i_near_j) == 0 {
            return false;
        }
        // Sites whose only partner was i must be near j.
        self.index.within_dl[i]
            .iter()
            .all(|&k| !self.chosen[k] || self.near[k] > 1 || self.index.near(k, j))
    }

    /// Adds the highest-value addable site until the budget is spent or no
    /// addable site has positive value.
    fn greedy(&mut self, order: &[usize]) {
        while self.members.len() < self.model.n_max {
            match order.iter().copied().find(|&j| self.can_add(j)) {
                Some(j) if self.value(j) > 0.0 => self.add(j),
                _ => break,
            }
        }
    }

    /// First-improvement search over add and swap moves until no move helps.
    /// A swap improves exactly when the incoming site is worth more than the
    /// outgoing one, because optimal tiering is monotone in member values.
    /// When single moves stall, pair moves may open a new cluster.
    fn local_search(&mut self, order: &[usize], pairs: &[(usize, usize)], rng: &mut ChaCha8Rng) {
        let mut scan: Vec<usize> = order.to_vec();
        loop {
            let mut improved = false;
            scan.shuffle(rng);

            for &j in &scan {
                if self.value(j) > 0.0 && self.can_add(j) {
                    self.add(j);
                    improved = true;
                }
            }

            let mut outgoing = self.members.clone();
            outgoing.shuffle(rng);
            for i in outgoing {
                let vi = self.value(i);
                let upgrade = order.iter().copied().take_while(|&j| self.value(j) > vi).find(|&j| self.can_swap(i, j));
                if let Some(j) = upgrade {
                    self.remove(i);
                    self.add(j);
                    improved = true;
                }
            }

            if !improved && !pairs.is_empty() {
                improved = self.pair_moves(pairs, rng);
            }
            if !improved {
                break;
            }
        }
    }

    /// Best pair whose sites are both free and unblocked.
    fn free_pair(&self, pairs: &[(usize, usize)]) -> Option<(usize, usize)> {
        pairs.iter().copied().find(|&(j, k)| {
            !self.chosen[j] && !self.chosen[k] && self.blocked[j] == 0 && self.blocked[k] == 0
        })
    }

    fn feasible(&self) -> bool {
        !self.isolation() || self.members.len() < 2 || self.members.iter().all(|&i| self.near[i] > 0)
    }

    /// Objective of the current members under optimal tiering.
    fn objective(&self) -> f64 {
        let mut values: Vec<f64> = self.members.iter().map(|&i| self.value(i)).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        let (l, m) = (self.model.l_max, self.model.m_max);
        values
            .iter()
            .enumerate()
            .map(|(rank, v)| {
                v * if rank < l {
                    self.model.gamma
                } else if rank < l + m {
                    self.model.beta
                } else {
                    self.model.alpha
                }
            })
            .sum()
    }

    /// Tries: add a free pair; replace one member by a pair; replace a member
    /// and one of its partners by a pair. Applies the first improving move.
    fn pair_moves(&mut self, pairs: &[(usize, usize)], rng: &mut ChaCha8Rng) -> bool {
        let n_max = self.model.n_max;
        let best_free = self.free_pair(pairs);
        if self.members.len() + 2 <= n_max {
            if let Some((j, k)) = best_free {
                self.add(j);
                self.add(k);
                if self.feasible() {
                    return true;
                }
                self.remove(j);
                self.remove(k);
            }
        }
        let current = self.objective();
        let better = |new: f64| new > current + 1e-12 * current.abs().max(1.0);

        let mut outgoing = self.members.clone();
        outgoing.shuffle(rng);
        for &i in &outgoing {
            if self.members.len() < n_max && self.try_replace(&[i], best_free, better) {
                return true;
            }
            let partners: Vec<usize> =
                self.index.within_dl[i].iter().copied().filter(|&k| k > i && self.chosen[k]).collect();
            for k in partners {
                if self.try_replace(&[i, k], best_free, better) {
                    return true;
                }
            }
        }
        false
    }

    fn pair_value(&self, p: (usize, usize)) -> f64 {
        self.value(p.0) + self.value(p.1)
    }

    fn is_free(&self, j: usize) -> bool {
        !self.chosen[j] && self.blocked[j] == 0 && self.value(j) > 0.0
    }

    /// Removes `out`, adds the best free pair, keeps the result if it is
    /// feasible and `accept`s the new objective; otherwise restores.
    ///
    /// Removal only frees `out` and sites it blocked, so the best pair is
    /// either `best_free` (free before the removal) or touches a freed site.
    fn try_replace(&mut self, out: &[usize], best_free: Option<(usize, usize)>, accept: impl Fn(f64) -> bool) -> bool {
        for &i in out {
            self.remove(i);
        }
        let mut best = best_free;
        for &i in out {
            for &f in core::iter::once(&i).chain(&self.index.within_dm[i]) {
                if !self.is_free(f) {
                    continue;
                }
                for &g in &self.index.within_dl[f] {
                    if self.is_free(g) && !self.index.conflicts(f, g) {
                        let p = (f.min(g), f.max(g));
                        if best.is_none_or(|b| self.pair_value(p) > self.pair_value(b)) {
                            best = Some(p);
                        }
                    }
                }
            }
        }
        if let Some((j, k)) = best {
            self.add(j);
            self.add(k);
            if self.feasible() && accept(self.objective()) {
                return true;
            }
            self.remove(j);
            self.remove(k);
        }
        for &i in out {
            self.add(i);
        }
        false
    }

    /// Optimal tiers for the current members, indexed by candidate.
    fn tiers(&self, order: &[usize]) -> Vec<Option<Tier>> {
        let mut tiers = vec![None; self.chosen.len()];
        let (mut large, mut medium) = (self.model.l_max, self.model.m_max);
        for &i in order.iter().filter(|&&i| self.chosen[i]) {
            tiers[i] = Some(if large > 0 {
                large -= 1;
                Tier::Large
            } else if medium > 0 {
                medium -= 1;
                Tier::Medium
            } else {
                Tier::Small
            });
        }
        tiers
    }
}
