//! Subset dynamic program over (visited set, last station, truck load).
//!
//! With the transfer rule fixed, everything after a partial route depends
//! only on which stations were visited, where the truck is and what it
//! carries. The lexicographic (moved, distance) objective is additive, so
//! keeping the best partial route per state is exact.

use alloc::vec;
use alloc::vec::Vec;

use super::{RebalanceInstance, TruckPlan};
use crate::error::{Error, Result};

/// Largest number of off-target stations the exact solver accepts by default.
pub const DEFAULT_ROUTE_EXACT_LIMIT: usize = 11;

const HARD_LIMIT: usize = 20;

pub fn solve_route_exact(instance: &RebalanceInstance) -> Result<TruckPlan> {
    solve_route_exact_with(instance, DEFAULT_ROUTE_EXACT_LIMIT)
}

#[derive(Clone, Copy)]
struct Entry {
    load: u32,
    moved: u64,
    dist: f64,
    /// Previous (last position, load); `u8::MAX` marks a route start.
    prev_last: u8,
    prev_load: u32,
}

impl Entry {
    fn beats(&self, moved: u64, dist: f64) -> bool {
        self.moved > moved || (self.moved == moved && self.dist < dist)
    }
}

/// Optimal plan for instances with at most `limit` (capped at 20) stations
/// off target.
pub fn solve_route_exact_with(instance: &RebalanceInstance, limit: usize) -> Result<TruckPlan> {
    let active = instance.active();
    let k = active.len();
    let limit = limit.min(HARD_LIMIT);
    if k > limit {
        return Err(Error::ExactLimitExceeded { size: k, limit, hint: "solve_route_heuristic" });
    }
    if k == 0 {
        return Ok(TruckPlan::simulate(instance, &[]));
    }

    // states[mask * k + last] holds one entry per distinct load.
    let mut states: Vec<Vec<Entry>> = vec![Vec::new(); (1usize << k) * k];
    let start = instance.truck_start_load;
    for (a, &i) in active.iter().enumerate() {
        let t = instance.transfer_at(i, start);
        if t != 0 {
            let load = (i64::from(start) + t) as u32;
            states[(1 << a) * k + a].push(Entry {
                load,
                moved: t.unsigned_abs(),
                dist: instance.depot_leg(i),
                prev_last: u8::MAX,
                prev_load: start,
            });
        }
    }

    for mask in 1usize..(1 << k) {
        for last in 0..k {
            if mask & (1 << last) == 0 {
                continue;
            }
            let current = core::mem::take(&mut states[mask * k + last]);
            for e in &current {
                for (next, &j) in active.iter().enumerate() {
                    if mask & (1 << next) != 0 {
                        continue;
                    }
                    let t = instance.transfer_at(j, e.load);
                    if t == 0 {
                        continue;
                    }
                    let cand = Entry {
                        load: (i64::from(e.load) + t) as u32,
                        moved: e.moved + t.unsigned_abs(),
                        dist: e.dist + instance.distance(active[last], j),
                        prev_last: last as u8,
                        prev_load: e.load,
                    };
                    let slot = &mut states[(mask | (1 << next)) * k + next];
                    match slot.iter_mut().find(|x| x.load == cand.load) {
                        Some(x) => {
                            if cand.beats(x.moved, x.dist) {
                                *x = cand;
                            }
                        }
                        None => slot.push(cand),
                    }
                }
            }
            states[mask * k + last] = current;
        }
    }

    // Best terminal state, closing the route at the depot when there is one.
    let mut best: Option<(usize, usize, u32, u64, f64)> = None;
    for mask in 1usize..(1 << k) {
        for last in 0..k {
            for e in &states[mask * k + last] {
                let total = e.dist + instance.depot_leg(active[last]);
                let better = match best {
                    None => true,
                    Some((_, _, _, moved, dist)) => e.moved > moved || (e.moved == moved && total < dist),
                };
                if better {
                    best = Some((mask, last, e.load, e.moved, total));
                }
            }
        }
    }

    let Some((mut mask, mut last, mut load, _, _)) = best else {
        return Ok(TruckPlan::simulate(instance, &[]));
    };
    let mut route = Vec::new();
    loop {
        route.push(active[last]);
        let e = states[mask * k + last]
            .iter()
            .find(|x| x.load == load)
            .copied()
            .expect("parent state recorded");
        if e.prev_last == u8::MAX {
            break;
        }
        mask &= !(1 << last);
        last = e.prev_last as usize;
        load = e.prev_load;
    }
    route.reverse();
    Ok(TruckPlan::simulate(instance, &route))
}
