//! Nearest-neighbor construction with load repair, then 2-opt and insertion
//! improvement under the lexicographic (moved, distance) objective.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{RebalanceInstance, TruckPlan};
use crate::error::Result;

pub fn solve_route_heuristic(instance: &RebalanceInstance, seed: u64) -> Result<TruckPlan> {
    let active = instance.active();
    if active.is_empty() {
        return Ok(TruckPlan::simulate(instance, &[]));
    }
    let mut route = construct(instance, &active);
    let mut best = TruckPlan::simulate(instance, &route);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    loop {
        let mut improved = false;
        if let Some((r, p)) = two_opt(instance, &route, &best, &mut rng) {
            route = r;
            best = p;
            improved = true;
        }
        if let Some((r, p)) = insert_missing(instance, &active, &route, &best) {
            route = r;
            best = p;
            improved = true;
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

fn nearest(instance: &RebalanceInstance, from: Option<usize>, pool: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in pool {
        let d = match from {
            Some(i) => instance.distance(i, j),
            None => instance.depot_leg(j),
        };
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

/// Nearest-neighbor tour over stations where something can be moved.
fn construct(instance: &RebalanceInstance, active: &[usize]) -> Vec<usize> {
    let mut remaining: Vec<usize> = active.to_vec();
    let mut load = instance.truck_start_load;
    let mut route = Vec::with_capacity(active.len());
    let mut position: Option<usize> = None;

    if !instance.has_depot() {
        // Start at the largest surplus (or, with nothing to pick up, the
        // largest deficit the initial load can serve).
        let start = remaining
            .iter()
            .copied()
            .filter(|&i| instance.transfer_at(i, load) != 0)
            .max_by_key(|&i| (instance.stations[i].surplus(), core::cmp::Reverse(i)))
            .or_else(|| remaining.iter().copied().find(|&i| instance.transfer_at(i, load) != 0));
        let Some(first) = start else { return route };
        load = (i64::from(load) + instance.transfer_at(first, load)) as u32;
        route.push(first);
        remaining.retain(|&i| i != first);
        position = Some(first);
    }

    while let Some(candidate) = nearest(instance, position, remaining.iter().copied()) {
        let next = if instance.transfer_at(candidate, load) != 0 {
            Some(candidate)
        } else {
            // Repair: a drop with an empty truck needs a pickup first; a
            // pickup with a full truck needs a drop first.
            let want_surplus = instance.stations[candidate].surplus() < 0;
            nearest(
                instance,
                position,
                remaining.iter().copied().filter(|&j| {
                    (instance.stations[j].surplus() > 0) == want_surplus && instance.transfer_at(j, load) != 0
                }),
            )
        };
        let Some(j) = next else {
            // Nothing reachable helps the nearest station; try any station
            // that can still be served.
            match nearest(instance, position, remaining.iter().copied().filter(|&j| instance.transfer_at(j, load) != 0)) {
                Some(j) => {
                    load = (i64::from(load) + instance.transfer_at(j, load)) as u32;
                    route.push(j);
                    remaining.retain(|&x| x != j);
                    position = Some(j);
                    continue;
                }
                None => break,
            }
        };
        load = (i64::from(load) + instance.transfer_at(j, load)) as u32;
        route.push(j);
        remaining.retain(|&x| x != j);
        position = Some(j);
    }
    route
}

/// First improving segment reversal, scanning start points in a seeded order.
fn two_opt(
    instance: &RebalanceInstance,
    route: &[usize],
    best: &TruckPlan,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<usize>, TruckPlan)> {
    let n = route.len();
    if n < 2 {
        return None;
    }
    let mut starts: Vec<usize> = (0..n - 1).collect();
    starts.shuffle(rng);
    for i in starts {
        for j in i + 1..n {
            let mut cand = route.to_vec();
            cand[i..=j].reverse();
            let plan = TruckPlan::simulate(instance, &cand);
            if plan.better_than(best) {
                let kept = kept_route(instance, &cand);
                return Some((kept, plan));
            }
        }
    }
    None
}

/// Best single insertion of a station not on the route, if it helps.
fn insert_missing(
    instance: &RebalanceInstance,
    active: &[usize],
    route: &[usize],
    best: &TruckPlan,
) -> Option<(Vec<usize>, TruckPlan)> {
    let mut found: Option<(Vec<usize>, TruckPlan)> = None;
    for &s in active.iter().filter(|s| !route.contains(s)) {
        for pos in 0..=route.len() {
            let mut cand = route.to_vec();
            cand.insert(pos, s);
            let plan = TruckPlan::simulate(instance, &cand);
            let incumbent = found.as_ref().map_or(best, |f| &f.1);
            if plan.better_than(incumbent) {
                found = Some((kept_route(instance, &cand), plan));
            }
        }
    }
    found
}

/// Route with the stops that move nothing removed.
fn kept_route(instance: &RebalanceInstance, route: &[usize]) -> Vec<usize> {
    let mut load = instance.truck_start_load;
    route
        .iter()
        .copied()
        .filter(|&i| {
            let t = instance.transfer_at(i, load);
            load = (i64::from(load) + t) as u32;
            t != 0
        })
        .collect()
}
