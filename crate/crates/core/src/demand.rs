//! Trip aggregation: tract demand, hourly profiles, origin/destination
//! classification and candidate-site values.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::geo::{great_circle_m, GeoPoint};
use crate::model::{CandidateLocation, FeatureSite, Station, StationId, Tract, TractId, TripRecord};
use crate::time::TimeWindow;

/// Fills empty `tract_id`s with the id of the nearest tract centroid.
pub fn assign_tracts(stations: &mut [Station], tracts: &[Tract]) {
    for station in stations.iter_mut().filter(|s| s.tract_id.as_str().is_empty()) {
        if let Some(t) = nearest_tract(station.location, tracts) {
            station.tract_id = t.id.clone();
        }
    }
}

/// Nearest tract by great-circle distance to its centroid; ties go to the
/// earlier tract.
pub fn nearest_tract(point: GeoPoint, tracts: &[Tract]) -> Option<&Tract> {
    let mut best: Option<(&Tract, f64)> = None;
    for t in tracts {
        let d = great_circle_m(point, t.centroid);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((t, d));
        }
    }
    best.map(|(t, _)| t)
}

/// Pick-ups plus drop-offs summed over each tract's stations and all days.
///
/// Every tract in `tracts` gets an entry. Trip endpoints at stations missing
/// from the catalog contribute nothing.
pub fn tract_demand(
    trips: &[TripRecord],
    stations: &[Station],
    tracts: &[Tract],
) -> BTreeMap<TractId, u64> {
    let tract_of: BTreeMap<&StationId, &TractId> =
        stations.iter().map(|s| (&s.id, &s.tract_id)).collect();
    let mut demand: BTreeMap<TractId, u64> =
        tracts.iter().map(|t| (t.id.clone(), 0)).collect();
    for trip in trips {
        for endpoint in [&trip.start_station_id, &trip.end_station_id] {
            if let Some(tract) = tract_of.get(endpoint) {
                *demand.entry((*tract).clone()).or_default() += 1;
            }
        }
    }
    demand
}

/// Copies `tracts`, replacing each demand with the matching aggregate.
pub fn with_demand(tracts: &[Tract], demand: &BTreeMap<TractId, u64>) -> Vec<Tract> {
    tracts
        .iter()
        .map(|t| Tract { demand: demand.get(&t.id).copied().unwrap_or(0) as f64, ..t.clone() })
        .collect()
}

/// Number of distinct calendar days on which trips started, at least 1.
pub fn days_observed(trips: &[TripRecord]) -> u32 {
    let days: BTreeSet<i64> = trips.iter().map(|t| t.started_at.day()).collect();
    (days.len() as u32).max(1)
}

/// Hour-binned departures and arrivals of one station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationFlow {
    pub station_id: StationId,
    pub departures_by_hour: [u64; 24],
    pub arrivals_by_hour: [u64; 24],
    pub days_observed: u32,
}

impl StationFlow {
    pub fn new(station_id: StationId, days_observed: u32) -> Self {
        StationFlow {
            station_id,
            departures_by_hour: [0; 24],
            arrivals_by_hour: [0; 24],
            days_observed: days_observed.max(1),
        }
    }

    pub fn departures_in(&self, window: TimeWindow) -> u64 {
        window.hours().map(|h| self.departures_by_hour[h]).sum()
    }

    pub fn arrivals_in(&self, window: TimeWindow) -> u64 {
        window.hours().map(|h| self.arrivals_by_hour[h]).sum()
    }

    /// Adds another partial count of the same station.
    pub fn merge(&mut self, other: &StationFlow) {
        for h in 0..24 {
            self.departures_by_hour[h] += other.departures_by_hour[h];
            self.arrivals_by_hour[h] += other.arrivals_by_hour[h];
        }
        self.days_observed = self.days_observed.max(other.days_observed);
    }
}

/// Per-station flows for every cataloged station (stations without trips get
/// all-zero bins). Departures bin by start hour, arrivals by end hour.
pub fn station_flows(trips: &[TripRecord], stations: &[Station]) -> BTreeMap<StationId, StationFlow> {
    let days = days_observed(trips);
    let mut flows: BTreeMap<StationId, StationFlow> =
        stations.iter().map(|s| (s.id.clone(), StationFlow::new(s.id.clone(), days))).collect();
    for trip in trips {
        if let Some(f) = flows.get_mut(&trip.start_station_id) {
            f.departures_by_hour[trip.started_at.hour()] += 1;
        }
        if let Some(f) = flows.get_mut(&trip.end_station_id) {
            f.arrivals_by_hour[trip.ended_at.hour()] += 1;
        }
    }
    flows
}

/// System-wide average trips per hour of day.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyProfile {
    pub avg_departures: [f64; 24],
    pub avg_arrivals: [f64; 24],
    pub days_observed: u32,
}

pub fn hourly_profile(trips: &[TripRecord]) -> HourlyProfile {
    let days = days_observed(trips);
    let mut dep = [0u64; 24];
    let mut arr = [0u64; 24];
    for trip in trips {
        dep[trip.started_at.hour()] += 1;
        arr[trip.ended_at.hour()] += 1;
    }
    HourlyProfile {
        avg_departures: dep.map(|c| c as f64 / days as f64),
        avg_arrivals: arr.map(|c| c as f64 / days as f64),
        days_observed: days,
    }
}

/// Supply (origin) or demand (destination) role of a station in a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowClass {
    Origin,
    Destination,
}

impl FlowClass {
    pub fn name(self) -> &'static str {
        match self {
            FlowClass::Origin => "origin",
            FlowClass::Destination => "destination",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "origin" | "o" | "supply" => Some(FlowClass::Origin),
            "destination" | "d" | "demand" => Some(FlowClass::Destination),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationClassification {
    pub station_id: StationId,
    pub class: FlowClass,
    pub window: TimeWindow,
    pub departures: u64,
    pub arrivals: u64,
    /// No trips touched the station in the window; class defaulted.
    pub zero_flow: bool,
}

/// Origin iff departures strictly exceed arrivals inside `window`; ties and
/// silent stations are Destinations.
pub fn classify_stations<'a>(
    flows: impl IntoIterator<Item = &'a StationFlow>,
    window: TimeWindow,
) -> Vec<StationClassification> {
    flows
        .into_iter()
        .map(|f| {
            let departures = f.departures_in(window);
            let arrivals = f.arrivals_in(window);
            StationClassification {
                station_id: f.station_id.clone(),
                class: if departures > arrivals { FlowClass::Origin } else { FlowClass::Destination },
                window,
                departures,
                arrivals,
                zero_flow: departures == 0 && arrivals == 0,
            }
        })
        .collect()
}

/// Weights for turning features and demand into candidate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueConfig {
    /// Multiplier applied to min-max normalized tract demand.
    pub w_demand: f64,
}

impl Default for ValueConfig {
    fn default() -> Self {
        ValueConfig { w_demand: 10.0 }
    }
}

/// Min-max normalizes tract demand into [0, 1]. When every tract has the same
/// demand the result is 1 for positive demand and 0 otherwise.
pub fn normalized_demand(tracts: &[Tract]) -> BTreeMap<TractId, f64> {
    let min = tracts.iter().map(|t| t.demand).fold(f64::INFINITY, f64::min);
    let max = tracts.iter().map(|t| t.demand).fold(f64::NEG_INFINITY, f64::max);
    tracts
        .iter()
        .map(|t| {
            let v = if max > min {
                (t.demand - min) / (max - min)
            } else if t.demand > 0.0 {
                1.0
            } else {
                0.0
            };
            (t.id.clone(), v)
        })
        .collect()
}

/// Feature term of one site: sum of feature values whose influence radius
/// reaches it.
pub fn feature_value(location: GeoPoint, features: &[FeatureSite]) -> f64 {
    features
        .iter()
        .filter(|f| great_circle_m(location, f.location) <= f.influence_radius_m)
        .map(|f| f.value)
        .sum()
}

/// Returns `candidates` with `base_value` = feature term + `w_demand` times
/// the normalized demand of the nearest tract.
pub fn candidate_values(
    candidates: &[CandidateLocation],
    features: &[FeatureSite],
    tracts: &[Tract],
    config: ValueConfig,
) -> Vec<CandidateLocation> {
    let norm = normalized_demand(tracts);
    candidates
        .iter()
        .map(|c| {
            let demand_term = nearest_tract(c.location, tracts)
                .and_then(|t| norm.get(&t.id))
                .map_or(0.0, |v| v * config.w_demand);
            CandidateLocation {
                base_value: feature_value(c.location, features) + demand_term,
                ..c.clone()
            }
        })
        .collect()
}
