use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{transfer_bounds, RebalanceInstance};
use crate::model::StationId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stop {
    pub station_id: StationId,
    /// Bikes picked up (positive) or dropped (negative).
    pub transfer: i64,
    pub load_before: u32,
    pub load_after: u32,
}

/// An ordered truck itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct TruckPlan {
    pub stops: Vec<Stop>,
    /// Truck load before each stop, then the final load (`stops.len() + 1`
    /// entries).
    pub load_trace: Vec<u32>,
    pub total_distance_m: f64,
    /// Stations left off target: target minus final bikes (positive means
    /// bikes still missing, negative means surplus left behind).
    pub unmet: BTreeMap<StationId, i64>,
    /// Stations that were already at target (listed with transfer 0).
    pub skipped: Vec<StationId>,
}

impl TruckPlan {
    /// Bikes moved toward targets.
    pub fn moved(&self) -> u64 {
        self.stops.iter().map(|s| s.transfer.unsigned_abs()).sum()
    }

    /// Simulates `route` with [`RebalanceInstance::transfer_at`] quantities.
    /// Stops where nothing can be moved are dropped from the route.
    pub fn simulate(instance: &RebalanceInstance, route: &[usize]) -> TruckPlan {
        let mut load = instance.truck_start_load;
        let mut kept = Vec::with_capacity(route.len());
        let mut stops = Vec::with_capacity(route.len());
        let mut trace = alloc::vec![load];
        let mut final_bikes: Vec<i64> = instance.stations.iter().map(|s| i64::from(s.bikes)).collect();
        for &i in route {
            let transfer = instance.transfer_at(i, load);
            if transfer == 0 {
                continue;
            }
            let after = (i64::from(load) + transfer) as u32;
            stops.push(Stop {
                station_id: instance.stations[i].station_id.clone(),
                transfer,
                load_before: load,
                load_after: after,
            });
            final_bikes[i] -= transfer;
            load = after;
            trace.push(load);
            kept.push(i);
        }
        let unmet = instance
            .stations
            .iter()
            .zip(&final_bikes)
            .filter(|(s, &b)| b != i64::from(s.target))
            .map(|(s, &b)| (s.station_id.clone(), i64::from(s.target) - b))
            .collect();
        let skipped = instance
            .stations
            .iter()
            .filter(|s| s.is_balanced())
            .map(|s| s.station_id.clone())
            .collect();
        TruckPlan {
            stops,
            load_trace: trace,
            total_distance_m: instance.route_distance(&kept),
            unmet,
            skipped,
        }
    }

    /// Lexicographic comparison key: more bikes moved, then shorter distance.
    pub(crate) fn better_than(&self, other: &TruckPlan) -> bool {
        let (a, b) = (self.moved(), other.moved());
        a > b || (a == b && self.total_distance_m < other.total_distance_m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanViolation {
    UnknownStation(StationId),
    RevisitedStation(StationId),
    ZeroTransferStop(StationId),
    TraceLength { expected: usize, found: usize },
    StartLoadMismatch { expected: u32, found: u32 },
    /// `load_after != load_before + transfer` or trace disagrees with stops.
    LoadRecurrence { stop: usize },
    LoadOutOfRange { stop: usize, load: i64 },
    /// Picked up at a station without surplus, dropped at one without
    /// deficit, or overshot the target.
    WrongDirection(StationId),
    /// Outside the `p`/`q` bounds although the station is reported as met.
    OutOfBounds(StationId),
    Conservation { picked: i64, dropped: i64, start: u32, end: u32 },
    PostState(StationId),
    UnmetMismatch(StationId),
    SkippedMismatch,
    DistanceMismatch { reported: f64, recomputed: f64 },
}

/// Rechecks every plan invariant against the instance.
pub fn validate_plan(instance: &RebalanceInstance, plan: &TruckPlan) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    let position: BTreeMap<&StationId, usize> =
        instance.stations.iter().enumerate().map(|(i, s)| (&s.station_id, i)).collect();
    let capacity = i64::from(instance.truck_capacity);

    if plan.load_trace.len() != plan.stops.len() + 1 {
        out.push(PlanViolation::TraceLength { expected: plan.stops.len() + 1, found: plan.load_trace.len() });
        return out;
    }
    if plan.load_trace[0] != instance.truck_start_load {
        out.push(PlanViolation::StartLoadMismatch { expected: instance.truck_start_load, found: plan.load_trace[0] });
    }

    let mut seen = BTreeSet::new();
    let mut route = Vec::with_capacity(plan.stops.len());
    let mut final_bikes: Vec<i64> = instance.stations.iter().map(|s| i64::from(s.bikes)).collect();
    let (mut picked, mut dropped) = (0i64, 0i64);
    let mut load = i64::from(instance.truck_start_load);
    for (k, stop) in plan.stops.iter().enumerate() {
        let Some(&i) = position.get(&stop.station_id) else {
            out.push(PlanViolation::UnknownStation(stop.station_id.clone()));
            continue;
        };
        if !seen.insert(i) {
            out.push(PlanViolation::RevisitedStation(stop.station_id.clone()));
        }
        route.push(i);
        if stop.transfer == 0 {
            out.push(PlanViolation::ZeroTransferStop(stop.station_id.clone()));
        }
        let before = i64::from(stop.load_before);
        let after = i64::from(stop.load_after);
        if before != load
            || after != before + stop.transfer
            || i64::from(plan.load_trace[k]) != before
            || i64::from(plan.load_trace[k + 1]) != after
        {
            out.push(PlanViolation::LoadRecurrence { stop: k });
        }
        let next = load + stop.transfer;
        if !(0..=capacity).contains(&next) {
            out.push(PlanViolation::LoadOutOfRange { stop: k, load: next });
        }
        load = next;

        let s = &instance.stations[i];
        let surplus = s.surplus();
        let ok_direction = if stop.transfer > 0 {
            picked += stop.transfer;
            surplus > 0 && stop.transfer <= surplus
        } else {
            dropped -= stop.transfer;
            surplus < 0 && -stop.transfer <= -surplus
        };
        if !ok_direction {
            out.push(PlanViolation::WrongDirection(s.station_id.clone()));
        }
        final_bikes[i] -= stop.transfer;
        let met = final_bikes[i] == i64::from(s.target);
        let bounds = transfer_bounds(s);
        let within = if stop.transfer > 0 {
            (i64::from(bounds.p_min)..=i64::from(bounds.p_max)).contains(&stop.transfer)
        } else {
            (i64::from(bounds.q_min)..=i64::from(bounds.q_max)).contains(&-stop.transfer)
        };
        if met && !within {
            out.push(PlanViolation::OutOfBounds(s.station_id.clone()));
        }
    }

    let end = *plan.load_trace.last().unwrap_or(&0);
    if picked - dropped != i64::from(end) - i64::from(instance.truck_start_load) {
        out.push(PlanViolation::Conservation { picked, dropped, start: instance.truck_start_load, end });
    }

    for (s, &b) in instance.stations.iter().zip(&final_bikes) {
        if !(0..=i64::from(s.capacity)).contains(&b) {
            out.push(PlanViolation::PostState(s.station_id.clone()));
        }
        let residual = i64::from(s.target) - b;
        let reported = plan.unmet.get(&s.station_id).copied().unwrap_or(0);
        if residual != reported {
            out.push(PlanViolation::UnmetMismatch(s.station_id.clone()));
        }
    }
    if plan.unmet.keys().any(|id| !position.contains_key(id)) {
        out.push(PlanViolation::SkippedMismatch);
    }
    let balanced: Vec<&StationId> =
        instance.stations.iter().filter(|s| s.is_balanced()).map(|s| &s.station_id).collect();
    if plan.skipped.iter().collect::<Vec<_>>() != balanced {
        out.push(PlanViolation::SkippedMismatch);
    }

    let recomputed = instance.route_distance(&route);
    if (recomputed - plan.total_distance_m).abs() > 1e-6 * recomputed.max(1.0) {
        out.push(PlanViolation::DistanceMismatch { reported: plan.total_distance_m, recomputed });
    }
    out
}
