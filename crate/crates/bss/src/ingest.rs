//! Parsers and writers for the input data sets.
//!
//! Row-level problems never abort a parse: the row is rejected and recorded
//! in an [`IngestReport`]. Only unreadable files, missing header columns,
//! malformed GeoJSON documents and duplicate catalog ids are fatal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use bss_core::demand::FlowClass;
use bss_core::geo::great_circle_m;
use bss_core::time::Timestamp;
use bss_core::{CandidateLocation, FeatureKind, FeatureSite, GeoPoint, Station, StationId, Tract, TripRecord};
use chrono::{DateTime, NaiveDateTime};
use serde_json::{json, Value};

/// Spacing used to turn lane geometries into feature points.
pub const LINE_SAMPLE_SPACING_M: f64 = 50.0;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("input file not found: {}", .0.display())]
    Missing(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: missing required column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{}: unreadable header: {reason}", path.display())]
    BadHeader { path: PathBuf, reason: String },
    #[error("{}: duplicate {kind} id `{id}`", path.display())]
    DuplicateId { path: PathBuf, kind: &'static str, id: String },
    #[error("{}: invalid GeoJSON: {reason}", path.display())]
    GeoJson { path: PathBuf, reason: String },
}

impl IngestError {
    fn at(self, path: &Path) -> Self {
        let path = path.to_path_buf();
        match self {
            IngestError::MissingColumn { column, .. } => IngestError::MissingColumn { path, column },
            IngestError::BadHeader { reason, .. } => IngestError::BadHeader { path, reason },
            IngestError::DuplicateId { kind, id, .. } => IngestError::DuplicateId { path, kind, id },
            IngestError::GeoJson { reason, .. } => IngestError::GeoJson { path, reason },
            IngestError::Io { source, .. } => IngestError::Io { path, source },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based record number (header excluded) or feature index.
    pub record: u64,
    pub reason: String,
}

/// Outcome of one parse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    /// Distinct station ids referenced by accepted records.
    pub distinct_stations: usize,
}

impl IngestReport {
    fn reject(&mut self, record: u64, reason: impl Into<String>) {
        self.rejected.push(Rejection { record, reason: reason.into() });
    }

    /// Rejection counts grouped by reason prefix (text before `:`).
    pub fn reasons(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rejected {
            let key = r.reason.split(':').next().unwrap_or("").to_string();
            *out.entry(key).or_default() += 1;
        }
        out
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "accepted {}, rejected {}", self.accepted, self.rejected.len())?;
        if self.distinct_stations > 0 {
            write!(f, ", {} distinct stations", self.distinct_stations)?;
        }
        for (reason, n) in self.reasons() {
            write!(f, "\n  {n} x {reason}")?;
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => IngestError::Missing(path.to_path_buf()),
        _ => IngestError::Io { path: path.to_path_buf(), source: e },
    })
}

fn placeholder() -> PathBuf {
    PathBuf::from("<input>")
}

/// Parses ISO-8601 style timestamps (with or without `T`, seconds,
/// fractional seconds or a UTC offset) and `M/D/YYYY H:MM` exports.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(Timestamp(dt.timestamp()));
    }
    const FORMATS: [&str; 6] = [
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
        "%m/%d/%Y %H:%M:%S",
        "%m/%d/%Y %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| Timestamp(dt.and_utc().timestamp()))
}

pub fn format_timestamp(t: Timestamp) -> String {
    DateTime::from_timestamp(t.0, 0)
        .map(|dt| dt.naive_utc().format("%Y-%m-%d %H:%M:%S").to_string())
        .unwrap_or_else(|| t.0.to_string())
}

/// Column lookup over a normalized header (lowercase, `_` for spaces).
struct Columns(Vec<String>);

impl Columns {
    fn read<R: Read>(reader: &mut csv::Reader<R>) -> Result<Self> {
        let header = reader
            .byte_headers()
            .map_err(|e| IngestError::BadHeader { path: placeholder(), reason: e.to_string() })?;
        let names = header
            .iter()
            .map(|h| {
                String::from_utf8_lossy(h)
                    .trim()
                    .trim_start_matches('\u{feff}')
                    .to_ascii_lowercase()
                    .replace([' ', '-'], "_")
            })
            .collect();
        Ok(Columns(names))
    }

    fn find(&self, aliases: &[&str]) -> Option<usize> {
        aliases.iter().find_map(|a| self.0.iter().position(|h| h == a))
    }

    fn require(&self, column: &'static str, aliases: &[&str]) -> Result<usize> {
        self.find(aliases).ok_or(IngestError::MissingColumn { path: placeholder(), column })
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader)
}

/// One CSV record with UTF-8 checked fields.
struct Row<'a> {
    record: &'a csv::ByteRecord,
}

impl Row<'_> {
    fn get(&self, col: usize) -> std::result::Result<&str, String> {
        let raw = self.record.get(col).ok_or_else(|| "missing field".to_string())?;
        std::str::from_utf8(raw).map_err(|_| "invalid utf-8".to_string())
    }

    fn opt(&self, col: Option<usize>) -> std::result::Result<Option<&str>, String> {
        match col {
            Some(c) => self.get(c).map(|s| Some(s).filter(|s| !s.is_empty())),
            None => Ok(None),
        }
    }

    fn non_empty(&self, col: usize, what: &str) -> std::result::Result<&str, String> {
        let v = self.get(col)?;
        if v.is_empty() {
            Err(format!("missing {what}"))
        } else {
            Ok(v)
        }
    }

    fn number<T: std::str::FromStr>(&self, col: usize, what: &str) -> std::result::Result<T, String> {
        let v = self.get(col)?;
        v.parse().map_err(|_| format!("bad number: {what} `{v}`"))
    }

    fn point(&self, lat: usize, lon: usize) -> std::result::Result<GeoPoint, String> {
        let (la, lo): (f64, f64) = (self.number(lat, "lat")?, self.number(lon, "lon")?);
        GeoPoint::new(la, lo).map_err(|_| format!("invalid coordinate: {la},{lo}"))
    }
}

/// Iterates records, turning read errors into rejections.
fn for_each_row<R: Read>(
    reader: &mut csv::Reader<R>,
    report: &mut IngestReport,
    mut f: impl FnMut(u64, Row<'_>) -> std::result::Result<(), String>,
) {
    let mut record = csv::ByteRecord::new();
    let mut n = 0u64;
    loop {
        n += 1;
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                if let Err(reason) = f(n, Row { record: &record }) {
                    report.reject(n, reason);
                }
            }
            Err(e) => {
                report.reject(n, format!("malformed row: {e}"));
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    break;
                }
            }
        }
    }
}

/// Parses a trip log. With `catalog`, trips naming unknown stations are
/// rejected.
pub fn parse_trips(path: &Path, catalog: Option<&[Station]>) -> Result<(Vec<TripRecord>, IngestReport)> {
    parse_trips_reader(open(path)?, catalog).map_err(|e| e.at(path))
}

pub fn parse_trips_reader<R: Read>(reader: R, catalog: Option<&[Station]>) -> Result<(Vec<TripRecord>, IngestReport)> {
    let known: Option<BTreeSet<&str>> = catalog.map(|c| c.iter().map(|s| s.id.as_str()).collect());
    let mut rdr = csv_reader(reader);
    let cols = Columns::read(&mut rdr)?;
    let id_col = cols.find(&["ride_id", "trip_id", "id"]);
    let start_col = cols.require("started_at", &["started_at", "start_date", "start_time", "starttime"])?;
    let end_col = cols.require("ended_at", &["ended_at", "end_date", "end_time", "stoptime"])?;
    let from_col = cols.require("start_station_id", &["start_station_id", "start_station_number"])?;
    let to_col = cols.require("end_station_id", &["end_station_id", "end_station_number"])?;

    let mut trips = Vec::new();
    let mut report = IngestReport::default();
    for_each_row(&mut rdr, &mut report, |n, row| {
        let trip_id = match row.opt(id_col)? {
            Some(id) => id.to_string(),
            None => format!("row-{n}"),
        };
        let started_at = parse_timestamp(row.get(start_col)?).ok_or("bad timestamp")?;
        let ended_at = parse_timestamp(row.get(end_col)?).ok_or("bad timestamp")?;
        if ended_at < started_at {
            return Err("ends before start".into());
        }
        let from = row.non_empty(from_col, "start station id")?;
        let to = row.non_empty(to_col, "end station id")?;
        if let Some(known) = &known {
            for id in [from, to] {
                if !known.contains(id) {
                    return Err(format!("unknown station: {id}"));
                }
            }
        }
        trips.push(TripRecord {
            trip_id,
            started_at,
            ended_at,
            start_station_id: from.into(),
            end_station_id: to.into(),
        });
        Ok(())
    });
    report.accepted = trips.len();
    report.distinct_stations = trips
        .iter()
        .flat_map(|t| [&t.start_station_id, &t.end_station_id])
        .collect::<BTreeSet<_>>()
        .len();
    Ok((trips, report))
}

pub fn write_trips<W: Write>(out: W, trips: &[TripRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ride_id", "started_at", "ended_at", "start_station_id", "end_station_id"])?;
    for t in trips {
        w.write_record([
            t.trip_id.as_str(),
            &format_timestamp(t.started_at),
            &format_timestamp(t.ended_at),
            t.start_station_id.as_str(),
            t.end_station_id.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a station catalog `(id, name, lat, lon, capacity, tract_id)`.
/// A repeated id is fatal.
pub fn parse_stations(path: &Path) -> Result<(Vec<Station>, IngestReport)> {
    parse_stations_reader(open(path)?).map_err(|e| e.at(path))
}

pub fn parse_stations_reader<R: Read>(reader: R) -> Result<(Vec<Station>, IngestReport)> {
    let mut rdr = csv_reader(reader);
    let cols = Columns::read(&mut rdr)?;
    let id_col = cols.require("id", &["id", "station_id"])?;
    let name_col = cols.find(&["name", "station_name"]);
    let lat_col = cols.require("lat", &["lat", "latitude"])?;
    let lon_col = cols.require("lon", &["lon", "lng", "longitude"])?;
    let cap_col = cols.require("capacity", &["capacity", "docks"])?;
    let tract_col = cols.find(&["tract_id", "tract"]);

    let mut stations: Vec<Station> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut duplicate: Option<String> = None;
    let mut report = IngestReport::default();
    for_each_row(&mut rdr, &mut report, |_, row| {
        let id = row.non_empty(id_col, "id")?;
        let location = row.point(lat_col, lon_col)?;
        let capacity: u32 = row.number(cap_col, "capacity")?;
        if capacity < 1 {
            return Err("capacity must be at least 1".into());
        }
        if !seen.insert(id.to_string()) {
            duplicate.get_or_insert_with(|| id.to_string());
            return Ok(());
        }
        stations.push(Station {
            id: id.into(),
            name: row.opt(name_col)?.unwrap_or("").to_string(),
            location,
            capacity,
            tract_id: row.opt(tract_col)?.unwrap_or("").into(),
        });
        Ok(())
    });
    if let Some(id) = duplicate {
        return Err(IngestError::DuplicateId { path: placeholder(), kind: "station", id });
    }
    report.accepted = stations.len();
    report.distinct_stations = stations.len();
    Ok((stations, report))
}

pub fn write_stations<W: Write>(out: W, stations: &[Station]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "name", "lat", "lon", "capacity", "tract_id"])?;
    for s in stations {
        w.write_record([
            s.id.as_str(),
            &s.name,
            &s.location.lat.to_string(),
            &s.location.lon.to_string(),
            &s.capacity.to_string(),
            s.tract_id.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses candidate sites `(id, lat, lon[, base_value])`. A repeated id is
/// fatal.
pub fn parse_candidates(path: &Path) -> Result<(Vec<CandidateLocation>, IngestReport)> {
    parse_candidates_reader(open(path)?).map_err(|e| e.at(path))
}

pub fn parse_candidates_reader<R: Read>(reader: R) -> Result<(Vec<CandidateLocation>, IngestReport)> {
    let mut rdr = csv_reader(reader);
    let cols = Columns::read(&mut rdr)?;
    let id_col = cols.require("id", &["id", "candidate_id"])?;
    let lat_col = cols.require("lat", &["lat", "latitude"])?;
    let lon_col = cols.require("lon", &["lon", "lng", "longitude"])?;
    let value_col = cols.find(&["base_value", "value"]);

    let mut out: Vec<CandidateLocation> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut duplicate = None;
    let mut report = IngestReport::default();
    for_each_row(&mut rdr, &mut report, |_, row| {
        let id = row.non_empty(id_col, "id")?;
        let location = row.point(lat_col, lon_col)?;
        let base_value = match row.opt(value_col)? {
            Some(v) => v.parse::<f64>().ok().filter(|v| *v >= 0.0 && v.is_finite()).ok_or("bad number: base_value")?,
            None => 0.0,
        };
        if !seen.insert(id.to_string()) {
            duplicate.get_or_insert_with(|| id.to_string());
            return Ok(());
        }
        out.push(CandidateLocation { id: id.into(), location, base_value });
        Ok(())
    });
    if let Some(id) = duplicate {
        return Err(IngestError::DuplicateId { path: placeholder(), kind: "candidate", id });
    }
    report.accepted = out.len();
    Ok((out, report))
}

pub fn write_candidates<W: Write>(out: W, candidates: &[CandidateLocation]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "lat", "lon", "base_value"])?;
    for c in candidates {
        w.write_record([
            c.id.as_str(),
            &c.location.lat.to_string(),
            &c.location.lon.to_string(),
            &c.base_value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Live station state `(id, lat, lon, bikes, capacity[, class])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationStateRow {
    pub id: StationId,
    pub location: GeoPoint,
    pub bikes: u32,
    pub capacity: u32,
    pub class: Option<FlowClass>,
}

pub fn parse_station_states(path: &Path) -> Result<(Vec<StationStateRow>, IngestReport)> {
    parse_station_states_reader(open(path)?).map_err(|e| e.at(path))
}

pub fn parse_station_states_reader<R: Read>(reader: R) -> Result<(Vec<StationStateRow>, IngestReport)> {
    let mut rdr = csv_reader(reader);
    let cols = Columns::read(&mut rdr)?;
    let id_col = cols.require("id", &["id", "station_id"])?;
    let lat_col = cols.require("lat", &["lat", "latitude"])?;
    let lon_col = cols.require("lon", &["lon", "lng", "longitude"])?;
    let bikes_col = cols.require("bikes", &["bikes", "num_bikes_available"])?;
    let cap_col = cols.require("capacity", &["capacity", "docks"])?;
    let class_col = cols.find(&["class"]);

    let mut out: Vec<StationStateRow> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut duplicate = None;
    let mut report = IngestReport::default();
    for_each_row(&mut rdr, &mut report, |_, row| {
        let id = row.non_empty(id_col, "id")?;
        let location = row.point(lat_col, lon_col)?;
        let bikes: u32 = row.number(bikes_col, "bikes")?;
        let capacity: u32 = row.number(cap_col, "capacity")?;
        if capacity < 1 || bikes > capacity {
            return Err(format!("bikes {bikes} outside 0..={capacity}"));
        }
        let class = match row.opt(class_col)? {
            Some(c) => Some(FlowClass::parse(c).ok_or_else(|| format!("unknown class: {c}"))?),
            None => None,
        };
        if !seen.insert(id.to_string()) {
            duplicate.get_or_insert_with(|| id.to_string());
            return Ok(());
        }
        out.push(StationStateRow { id: id.into(), location, bikes, capacity, class });
        Ok(())
    });
    if let Some(id) = duplicate {
        return Err(IngestError::DuplicateId { path: placeholder(), kind: "station", id });
    }
    report.accepted = out.len();
    report.distinct_stations = out.len();
    Ok((out, report))
}

pub fn write_station_states<W: Write>(out: W, rows: &[StationStateRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "lat", "lon", "bikes", "capacity", "class"])?;
    for r in rows {
        w.write_record([
            r.id.as_str(),
            &r.location.lat.to_string(),
            &r.location.lon.to_string(),
            &r.bikes.to_string(),
            &r.capacity.to_string(),
            r.class.map_or("", FlowClass::name),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_json(path: &Path) -> Result<Value> {
    let mut text = String::new();
    let mut file = open(path)?;
    file.read_to_string(&mut text).map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
    parse_json(&text).map_err(|e| e.at(path))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| IngestError::GeoJson { path: placeholder(), reason: e.to_string() })
}

fn feature_list(doc: &Value) -> Result<&Vec<Value>> {
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(IngestError::GeoJson { path: placeholder(), reason: "expected a FeatureCollection".into() });
    }
    doc.get("features")
        .and_then(Value::as_array)
        .ok_or(IngestError::GeoJson { path: placeholder(), reason: "missing `features` array".into() })
}

fn position(v: &Value) -> std::result::Result<GeoPoint, String> {
    let arr = v.as_array().filter(|a| a.len() >= 2).ok_or("bad position")?;
    let (lon, lat) = (arr[0].as_f64().ok_or("bad position")?, arr[1].as_f64().ok_or("bad position")?);
    GeoPoint::new(lat, lon).map_err(|_| format!("invalid coordinate: {lat},{lon}"))
}

/// Points along a polyline, one every `spacing_m`, vertices included.
pub fn sample_line(vertices: &[GeoPoint], spacing_m: f64) -> Vec<GeoPoint> {
    let mut out: Vec<GeoPoint> = Vec::new();
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steps = (great_circle_m(a, b) / spacing_m).ceil().max(1.0) as usize;
        for s in 0..steps {
            let f = s as f64 / steps as f64;
            out.push(GeoPoint { lat: a.lat + (b.lat - a.lat) * f, lon: a.lon + (b.lon - a.lon) * f });
        }
    }
    if let Some(&last) = vertices.last() {
        out.push(last);
    }
    out.dedup();
    out
}

/// Point positions of a geometry; lines are sampled every
/// [`LINE_SAMPLE_SPACING_M`].
fn geometry_points(geometry: &Value) -> std::result::Result<Vec<GeoPoint>, String> {
    let kind = geometry.get("type").and_then(Value::as_str).ok_or("missing geometry type")?;
    let coords = geometry.get("coordinates").ok_or("missing coordinates")?;
    let list = |v: &Value| -> std::result::Result<Vec<GeoPoint>, String> {
        v.as_array().ok_or("bad coordinates")?.iter().map(position).collect()
    };
    match kind {
        "Point" => Ok(vec![position(coords)?]),
        "MultiPoint" => list(coords),
        "LineString" => Ok(sample_line(&list(coords)?, LINE_SAMPLE_SPACING_M)),
        "MultiLineString" => {
            let mut out = Vec::new();
            for line in coords.as_array().ok_or("bad coordinates")? {
                out.extend(sample_line(&list(line)?, LINE_SAMPLE_SPACING_M));
            }
            Ok(out)
        }
        other => Err(format!("unsupported geometry: {other}")),
    }
}

fn non_negative(props: &Value, keys: &[&str]) -> std::result::Result<Option<f64>, String> {
    for k in keys {
        if let Some(v) = props.get(*k) {
            let x = v.as_f64().ok_or_else(|| format!("bad number: {k}"))?;
            if !(x >= 0.0 && x.is_finite()) {
                return Err(format!("bad number: {k} must be non-negative"));
            }
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Parses value-adding features: a FeatureCollection whose features carry
/// `{kind, value, radius_m}`. Line geometries become sampled points.
pub fn parse_features(path: &Path) -> Result<(Vec<FeatureSite>, IngestReport)> {
    features_from_json(&read_json(path)?).map_err(|e| e.at(path))
}

pub fn parse_features_str(text: &str) -> Result<(Vec<FeatureSite>, IngestReport)> {
    features_from_json(&parse_json(text)?)
}

fn features_from_json(doc: &Value) -> Result<(Vec<FeatureSite>, IngestReport)> {
    let mut out = Vec::new();
    let mut report = IngestReport::default();
    for (n, feature) in feature_list(doc)?.iter().enumerate() {
        let parsed = (|| -> std::result::Result<Vec<FeatureSite>, String> {
            let props = feature.get("properties").filter(|p| p.is_object()).ok_or("missing properties")?;
            let kind_name = props.get("kind").and_then(Value::as_str).ok_or("missing kind")?;
            let kind = FeatureKind::parse(kind_name).ok_or_else(|| format!("unknown kind: {kind_name}"))?;
            let value = non_negative(props, &["value"])?.ok_or("missing value")?;
            let radius = non_negative(props, &["radius_m", "radius"])?.ok_or("missing radius_m")?;
            if radius <= 0.0 {
                return Err("bad number: radius_m must be positive".into());
            }
            let geometry = feature.get("geometry").filter(|g| !g.is_null()).ok_or("missing geometry")?;
            Ok(geometry_points(geometry)?
                .into_iter()
                .map(|location| FeatureSite { kind, location, value, influence_radius_m: radius })
                .collect())
        })();
        match parsed {
            Ok(sites) => {
                report.accepted += 1;
                out.extend(sites);
            }
            Err(reason) => report.reject(n as u64 + 1, reason),
        }
    }
    Ok((out, report))
}

pub fn features_geojson(features: &[FeatureSite]) -> Value {
    let list: Vec<Value> = features
        .iter()
        .map(|f| {
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [f.location.lon, f.location.lat] },
                "properties": { "kind": f.kind.name(), "value": f.value, "radius_m": f.influence_radius_m },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": list })
}

/// Parses tracts: point features (the centroid) with an `id` property and an
/// optional `demand` (or `value`). A repeated id is fatal.
pub fn parse_tracts(path: &Path) -> Result<(Vec<Tract>, IngestReport)> {
    tracts_from_json(&read_json(path)?).map_err(|e| e.at(path))
}

pub fn parse_tracts_str(text: &str) -> Result<(Vec<Tract>, IngestReport)> {
    tracts_from_json(&parse_json(text)?)
}

fn tracts_from_json(doc: &Value) -> Result<(Vec<Tract>, IngestReport)> {
    let mut out: Vec<Tract> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut report = IngestReport::default();
    for (n, feature) in feature_list(doc)?.iter().enumerate() {
        let parsed = (|| -> std::result::Result<Tract, String> {
            let props = feature.get("properties").filter(|p| p.is_object()).ok_or("missing properties")?;
            let id = match props.get("id").or_else(|| props.get("tract_id")) {
                Some(Value::String(s)) if !s.is_empty() => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err("missing id".into()),
            };
            let demand = non_negative(props, &["demand", "value"])?.unwrap_or(0.0);
            let geometry = feature.get("geometry").filter(|g| !g.is_null()).ok_or("missing geometry")?;
            let points = geometry_points(geometry)?;
            let centroid = match points.as_slice() {
                [p] => *p,
                [] => return Err("empty geometry".into()),
                many => GeoPoint {
                    lat: many.iter().map(|p| p.lat).sum::<f64>() / many.len() as f64,
                    lon: many.iter().map(|p| p.lon).sum::<f64>() / many.len() as f64,
                },
            };
            Ok(Tract { id: id.into(), centroid, demand })
        })();
        match parsed {
            Ok(t) => {
                if !seen.insert(t.id.clone()) {
                    return Err(IngestError::DuplicateId { path: placeholder(), kind: "tract", id: t.id.0 });
                }
                report.accepted += 1;
                out.push(t);
            }
            Err(reason) => report.reject(n as u64 + 1, reason),
        }
    }
    Ok((out, report))
}

pub fn tracts_geojson(tracts: &[Tract]) -> Value {
    let list: Vec<Value> = tracts
        .iter()
        .map(|t| {
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [t.centroid.lon, t.centroid.lat] },
                "properties": { "id": t.id.as_str(), "kind": "tract", "demand": t.demand },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": list })
}

/// Reads station classes from a classification GeoJSON (as written by the
/// `demand` command) or a `(station_id, class)` CSV.
pub fn parse_classification(path: &Path) -> Result<(BTreeMap<StationId, FlowClass>, IngestReport)> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| IngestError::Io { path: path.to_path_buf(), source: e })?;
    parse_classification_str(&text).map_err(|e| e.at(path))
}

pub fn parse_classification_str(text: &str) -> Result<(BTreeMap<StationId, FlowClass>, IngestReport)> {
    let mut out = BTreeMap::new();
    let mut report = IngestReport::default();
    if text.trim_start().starts_with('{') {
        let doc = parse_json(text)?;
        for (n, feature) in feature_list(&doc)?.iter().enumerate() {
            let props = feature.get("properties");
            let id = props.and_then(|p| p.get("station_id")).and_then(Value::as_str);
            let class = props.and_then(|p| p.get("class")).and_then(Value::as_str).and_then(FlowClass::parse);
            match (id, class) {
                (Some(id), Some(class)) => {
                    out.insert(StationId::from(id), class);
                }
                _ => report.reject(n as u64 + 1, "missing station_id or class"),
            }
        }
    } else {
        let mut rdr = csv_reader(text.as_bytes());
        let cols = Columns::read(&mut rdr)?;
        let id_col = cols.require("station_id", &["station_id", "id"])?;
        let class_col = cols.require("class", &["class"])?;
        for_each_row(&mut rdr, &mut report, |_, row| {
            let id = row.non_empty(id_col, "station id")?;
            let c = row.get(class_col)?;
            let class = FlowClass::parse(c).ok_or_else(|| format!("unknown class: {c}"))?;
            out.insert(StationId::from(id), class);
            Ok(())
        });
    }
    report.accepted = out.len();
    report.distinct_stations = out.len();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        let a = parse_timestamp("2021-06-01 08:15:00").unwrap();
        assert_eq!(a.hour(), 8);
        assert_eq!(parse_timestamp("2021-06-01T08:15:00"), Some(a));
        assert_eq!(parse_timestamp("2021-06-01T08:15:00Z"), Some(a));
        assert_eq!(parse_timestamp("2021-06-01T10:15:00+02:00"), Some(a));
        assert_eq!(parse_timestamp("6/1/2021 8:15"), Some(a));
        assert_eq!(parse_timestamp("yesterday"), None);
        assert_eq!(format_timestamp(a), "2021-06-01 08:15:00");
    }

    #[test]
    fn header_only_trip_file() {
        let (trips, report) = parse_trips_reader("ride_id,started_at,ended_at,start_station_id,end_station_id\n".as_bytes(), None).unwrap();
        assert!(trips.is_empty());
        assert_eq!(report.accepted, 0);
    }

    #[test]
    fn single_trip_round_trip() {
        let text = "ride_id,rideable_type,started_at,ended_at,start_station_id,end_station_id,member_casual\n\
                    abc,classic_bike,2021-06-01 08:00:00,2021-06-01 08:20:00,31000,31001,member\n";
        let (trips, report) = parse_trips_reader(text.as_bytes(), None).unwrap();
        assert_eq!(report.accepted, 1);
        assert_eq!(report.distinct_stations, 2);
        assert_eq!(trips[0].trip_id, "abc");
        assert_eq!(trips[0].ended_at.0 - trips[0].started_at.0, 1200);
        let mut buf = Vec::new();
        write_trips(&mut buf, &trips).unwrap();
        assert_eq!(parse_trips_reader(buf.as_slice(), None).unwrap().0, trips);
    }

    #[test]
    fn missing_column_is_fatal() {
        let err = parse_trips_reader("ride_id,started_at\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn { column: "ended_at", .. }));
    }

    #[test]
    fn trip_rejections() {
        let stations = [Station {
            id: "a".into(),
            name: String::new(),
            location: GeoPoint { lat: 38.9, lon: -77.0 },
            capacity: 5,
            tract_id: "".into(),
        }];
        let text = "ride_id,started_at,ended_at,start_station_id,end_station_id\n\
                    1,2021-06-01 09:00:00,2021-06-01 08:00:00,a,a\n\
                    2,2021-06-01 08:00:00,2021-06-01 09:00:00,a,zz\n\
                    3,2021-06-01 08:00:00,2021-06-01 09:00:00,,a\n\
                    4,2021-06-01 08:00:00\n\
                    5,2021-06-01 08:00:00,2021-06-01 09:00:00,a,a\n";
        let (trips, report) = parse_trips_reader(text.as_bytes(), Some(&stations)).unwrap();
        assert_eq!(trips.len(), 1);
        let reasons: Vec<&str> = report.rejected.iter().map(|r| r.reason.as_str()).collect();
        assert_eq!(reasons, ["ends before start", "unknown station: zz", "missing start station id", "missing field"]);
    }

    #[test]
    fn duplicate_station_is_fatal() {
        let text = "id,name,lat,lon,capacity,tract_id\nS1,a,38.9,-77,10,t\nS2,b,38.9,-77,10,t\nS1,c,38.9,-77,10,t\n";
        match parse_stations_reader(text.as_bytes()) {
            Err(IngestError::DuplicateId { id, .. }) => assert_eq!(id, "S1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn station_rows_rejected_not_fatal() {
        let text = "id,name,lat,lon,capacity,tract_id\nS1,a,38.9,-77,10,t\nS2,b,95,-77,10,t\nS3,c,38.9,-77,0,t\nS4,d,x,-77,3,t\n";
        let (stations, report) = parse_stations_reader(text.as_bytes()).unwrap();
        assert_eq!(stations.len(), 1);
        assert_eq!(report.rejected.len(), 3);
    }

    #[test]
    fn empty_feature_collection() {
        let (f, r) = parse_features_str(r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        assert!(f.is_empty());
        assert_eq!(r.accepted, 0);
    }

    #[test]
    fn single_metro_point() {
        let text = r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "geometry":{"type":"Point","coordinates":[-77.05,38.9]},
            "properties":{"kind":"metro_station","value":5,"radius":300}}]}"#;
        let (f, _) = parse_features_str(text).unwrap();
        assert_eq!(
            f,
            [FeatureSite {
                kind: FeatureKind::MetroStation,
                location: GeoPoint { lat: 38.9, lon: -77.05 },
                value: 5.0,
                influence_radius_m: 300.0
            }]
        );
        let (back, _) = parse_features_str(&features_geojson(&f).to_string()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn lane_is_sampled_every_50m() {
        // ~1 km due north.
        let text = r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "geometry":{"type":"LineString","coordinates":[[-77.0,38.9],[-77.0,38.909]]},
            "properties":{"kind":"bike_lane","value":2,"radius_m":100}}]}"#;
        let (f, r) = parse_features_str(text).unwrap();
        assert_eq!(r.accepted, 1);
        assert_eq!(f.len(), 22);
        for w in f.windows(2) {
            assert!(great_circle_m(w[0].location, w[1].location) <= 50.0 + 1e-6);
        }
    }

    #[test]
    fn bad_features_are_reported() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[-77,38.9]},"properties":{"kind":"volcano","value":1,"radius_m":5}},
            {"type":"Feature","geometry":{"type":"Point","coordinates":[-77,38.9]},"properties":{"kind":"attraction","value":-1,"radius_m":5}},
            {"type":"Feature","geometry":null,"properties":{"kind":"attraction","value":1,"radius_m":5}}]}"#;
        let (f, r) = parse_features_str(text).unwrap();
        assert!(f.is_empty());
        assert_eq!(r.rejected.len(), 3);
        assert!(parse_features_str("[1,2]").is_err());
    }

    #[test]
    fn tracts_parse() {
        let t = [Tract { id: "t1".into(), centroid: GeoPoint { lat: 38.9, lon: -77.0 }, demand: 4.0 }];
        let (back, _) = parse_tracts_str(&tracts_geojson(&t).to_string()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn classification_csv_and_geojson() {
        let (c, _) = parse_classification_str("station_id,class\na,origin\nb,destination\n").unwrap();
        assert_eq!(c[&StationId::from("a")], FlowClass::Origin);
        let gj = r#"{"type":"FeatureCollection","features":[{"type":"Feature","geometry":null,"properties":{"station_id":"x","class":"destination"}}]}"#;
        let (c, _) = parse_classification_str(gj).unwrap();
        assert_eq!(c[&StationId::from("x")], FlowClass::Destination);
    }
}
