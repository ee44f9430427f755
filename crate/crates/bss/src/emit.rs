//! Output artifacts. Every writer is deterministic: same input, same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use bss_core::demand::{HourlyProfile, StationClassification};
use bss_core::placement::{Placement, PlacementModel, SolveStatus, SweepPoint};
use bss_core::rebalance::{RebalanceInstance, TruckPlan};
use bss_core::{GeoPoint, Station, StationId, TractId};
use serde_json::{json, Map, Value};

fn point(p: GeoPoint) -> Value {
    json!({ "type": "Point", "coordinates": [p.lon, p.lat] })
}

fn collection(features: Vec<Value>) -> Value {
    json!({ "type": "FeatureCollection", "features": features })
}

fn feature(geometry: Value, properties: Value) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn tract_demand_csv(demand: &BTreeMap<TractId, u64>) -> String {
    let mut out = String::from("tract_id,demand\n");
    for (id, d) in demand {
        writeln!(out, "{},{d}", csv_field(id.as_str())).unwrap();
    }
    out
}

pub fn hourly_profile_csv(profile: &HourlyProfile) -> String {
    let mut out = String::from("hour,avg_departures,avg_arrivals\n");
    for h in 0..24 {
        writeln!(out, "{h},{},{}", profile.avg_departures[h], profile.avg_arrivals[h]).unwrap();
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One point per classified station, property `class` in
/// {origin, destination}.
pub fn classification_geojson(classes: &[StationClassification], stations: &[Station]) -> Value {
    let location: BTreeMap<&StationId, GeoPoint> = stations.iter().map(|s| (&s.id, s.location)).collect();
    let features = classes
        .iter()
        .map(|c| {
            feature(
                location.get(&c.station_id).map_or(Value::Null, |p| point(*p)),
                json!({
                    "station_id": c.station_id.as_str(),
                    "class": c.class.name(),
                    "window": c.window.name(),
                    "departures": c.departures,
                    "arrivals": c.arrivals,
                    "zero_flow": c.zero_flow,
                }),
            )
        })
        .collect();
    collection(features)
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Heuristic => "heuristic",
        SolveStatus::FeasibleEmpty => "feasible_empty",
    }
}

/// Placed stations as points with a `tier` property.
pub fn placement_geojson(model: &PlacementModel, placement: &Placement) -> Value {
    let features = model
        .candidates
        .iter()
        .filter_map(|c| {
            let tier = placement.assignment.get(&c.id)?;
            Some(feature(
                point(c.location),
                json!({
                    "candidate_id": c.id.as_str(),
                    "tier": tier.name(),
                    "base_value": c.base_value,
                    "value": c.base_value * model.multiplier(*tier),
                }),
            ))
        })
        .collect();
    collection(features)
}

pub fn placement_summary(model: &PlacementModel, placement: &Placement, solver: &str) -> Value {
    use bss_core::placement::Tier;
    json!({
        "objective": placement.objective,
        "status": status_name(placement.status),
        "solver": solver,
        "counts": {
            "total": placement.len(),
            "small": placement.count(Tier::Small),
            "medium": placement.count(Tier::Medium),
            "large": placement.count(Tier::Large),
        },
        "params": {
            "candidates": model.candidates.len(),
            "n_max": model.n_max,
            "m_max": model.m_max,
            "l_max": model.l_max,
            "dm_m": model.dm_m,
            "dl_m": model.dl_m,
            "alpha": model.alpha,
            "beta": model.beta,
            "gamma": model.gamma,
            "metric": model.metric.name(),
            "isolation_constraint": model.isolation_constraint,
        },
    })
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("n,objective,stations\n");
    for p in points {
        writeln!(out, "{},{},{}", p.n, p.objective, p.stations).unwrap();
    }
    out
}

/// One truck's solved zone.
#[derive(Debug, Clone)]
pub struct ZonePlan {
    pub zone: usize,
    pub solver: &'static str,
    pub instance: RebalanceInstance,
    pub plan: TruckPlan,
}

fn unmet_json(unmet: &BTreeMap<StationId, i64>) -> Value {
    Value::Object(unmet.iter().map(|(id, v)| (id.0.clone(), json!(v))).collect::<Map<_, _>>())
}

/// Itinerary listing: ordered stops, stations at target with transfer 0,
/// distances and shortfalls per zone and overall.
pub fn plan_json(pass: &str, window: &str, zones: &[ZonePlan], has_empty_zones: bool) -> Value {
    let mut total = 0.0;
    let mut moved = 0;
    let mut unmet = BTreeMap::new();
    let zone_values: Vec<Value> = zones
        .iter()
        .map(|z| {
            total += z.plan.total_distance_m;
            moved += z.plan.moved();
            unmet.extend(z.plan.unmet.iter().map(|(k, v)| (k.clone(), *v)));
            let stops: Vec<Value> = z
                .plan
                .stops
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    json!({
                        "order": i + 1,
                        "station_id": s.station_id.as_str(),
                        "transfer": s.transfer,
                        "load_after": s.load_after,
                    })
                })
                .collect();
            let skipped: Vec<Value> = z
                .plan
                .skipped
                .iter()
                .map(|id| json!({ "station_id": id.as_str(), "transfer": 0 }))
                .collect();
            json!({
                "zone": z.zone,
                "solver": z.solver,
                "stations": z.instance.stations.len(),
                "stops": stops,
                "skipped": skipped,
                "moved": z.plan.moved(),
                "total_distance_m": z.plan.total_distance_m,
                "unmet": unmet_json(&z.plan.unmet),
            })
        })
        .collect();
    json!({
        "pass": pass,
        "window": window,
        "zones": zone_values,
        "has_empty_zones": has_empty_zones,
        "moved": moved,
        "total_distance_m": total,
        "unmet": unmet_json(&unmet),
    })
}

/// Route lines (depot legs included) and annotated station points.
pub fn route_geojson(zones: &[ZonePlan]) -> Value {
    let mut features = Vec::new();
    for z in zones {
        let location: BTreeMap<&StationId, GeoPoint> =
            z.instance.stations.iter().map(|s| (&s.station_id, s.location)).collect();
        let mut line: Vec<Value> = Vec::new();
        let pos = |p: GeoPoint| json!([p.lon, p.lat]);
        if let Some(d) = z.instance.depot.filter(|_| !z.plan.stops.is_empty()) {
            line.push(pos(d));
        }
        line.extend(z.plan.stops.iter().map(|s| pos(location[&s.station_id])));
        if let Some(d) = z.instance.depot.filter(|_| !z.plan.stops.is_empty()) {
            line.push(pos(d));
        }
        if line.len() >= 2 {
            features.push(feature(
                json!({ "type": "LineString", "coordinates": line }),
                json!({ "zone": z.zone, "role": "route", "total_distance_m": z.plan.total_distance_m }),
            ));
        }
        for (i, s) in z.plan.stops.iter().enumerate() {
            features.push(feature(
                point(location[&s.station_id]),
                json!({
                    "zone": z.zone,
                    "role": "stop",
                    "order": i + 1,
                    "station_id": s.station_id.as_str(),
                    "transfer": s.transfer,
                    "load_after": s.load_after,
                }),
            ));
        }
        for id in &z.plan.skipped {
            features.push(feature(
                point(location[id]),
                json!({ "zone": z.zone, "role": "skipped", "station_id": id.as_str(), "transfer": 0 }),
            ));
        }
        if let Some(d) = z.instance.depot {
            features.push(feature(point(d), json!({ "zone": z.zone, "role": "depot" })));
        }
    }
    collection(features)
}
