//! Seeded synthetic city: stations, tracts, candidate sites, features and a
//! trip log with planted origin-heavy stations.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::nearest_tract;
use crate::geo::{GeoPoint, METERS_PER_DEGREE};
use crate::model::{CandidateLocation, FeatureKind, FeatureSite, Station, StationId, Tract, TripRecord};
use crate::time::{days_from_civil, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Roughly the District of Columbia.
    pub const DC: BoundingBox = BoundingBox { min_lat: 38.80, max_lat: 38.99, min_lon: -77.12, max_lon: -76.91 };

    /// A box of `width_m` x `height_m` whose south-west corner is `corner`.
    pub fn from_corner(corner: GeoPoint, width_m: f64, height_m: f64) -> Self {
        let dlat = height_m / METERS_PER_DEGREE;
        let dlon = width_m / (METERS_PER_DEGREE * libm::cos((corner.lat + dlat / 2.0).to_radians()));
        BoundingBox { min_lat: corner.lat, max_lat: corner.lat + dlat, min_lon: corner.lon, max_lon: corner.lon + dlon }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> GeoPoint {
        GeoPoint {
            lat: rng.gen_range(self.min_lat..=self.max_lat),
            lon: rng.gen_range(self.min_lon..=self.max_lon),
        }
    }

    fn clamp(&self, p: GeoPoint) -> GeoPoint {
        GeoPoint { lat: p.lat.clamp(self.min_lat, self.max_lat), lon: p.lon.clamp(self.min_lon, self.max_lon) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub bbox: BoundingBox,
    pub stations: usize,
    pub candidates: usize,
    pub features: usize,
    pub tracts: usize,
    pub trips: usize,
    pub days: u32,
    /// Day index of the first simulated day.
    pub start_day: i64,
    /// Share of stations planted as origin-heavy.
    pub origin_fraction: f64,
    /// Departure-to-arrival ratio of an origin-heavy station.
    pub origin_ratio: f64,
    /// Trip start times cluster around these hours.
    pub peak_hours: [u8; 2],
    /// Feature clusters that make some areas more valuable.
    pub hotspots: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            bbox: BoundingBox::DC,
            stations: 60,
            candidates: 400,
            features: 150,
            tracts: 25,
            trips: 5_000,
            days: 7,
            start_day: days_from_civil(2021, 6, 1),
            origin_fraction: 0.3,
            origin_ratio: 3.0,
            peak_hours: [8, 17],
            hotspots: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub stations: Vec<Station>,
    pub candidates: Vec<CandidateLocation>,
    pub features: Vec<FeatureSite>,
    pub tracts: Vec<Tract>,
    pub trips: Vec<TripRecord>,
    /// Stations generated with `origin_ratio` more departures than arrivals.
    pub origin_heavy: Vec<StationId>,
}

/// Builds a full synthetic data set; identical output for identical inputs.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = config.bbox;

    let tracts = tract_grid(&bbox, config.tracts, &mut rng);

    let stations: Vec<Station> = (0..config.stations)
        .map(|i| {
            let location = bbox.sample(&mut rng);
            Station {
                id: StationId(format!("S{i:04}")),
                name: format!("Station {i}"),
                location,
                capacity: rng.gen_range(8..=24),
                tract_id: nearest_tract(location, &tracts).map(|t| t.id.clone()).unwrap_or_default(),
            }
        })
        .collect();

    let candidates = (0..config.candidates)
        .map(|i| CandidateLocation { id: format!("C{i:05}").into(), location: bbox.sample(&mut rng), base_value: 0.0 })
        .collect();

    let hotspots: Vec<GeoPoint> = (0..config.hotspots.max(1)).map(|_| bbox.sample(&mut rng)).collect();
    let features = (0..config.features)
        .map(|_| {
            let kind = *[
                FeatureKind::MetroStation,
                FeatureKind::Attraction,
                FeatureKind::ProtectedBikeLane,
                FeatureKind::BikeLane,
                FeatureKind::BikeLane,
                FeatureKind::BikeTrail,
                FeatureKind::SharedLane,
            ]
            .choose(&mut rng)
            .expect("non-empty");
            let (value, influence_radius_m) = default_feature_weight(kind);
            let location = if rng.gen_bool(0.7) {
                let h = hotspots[rng.gen_range(0..hotspots.len())];
                // ~1 km spread around the hotspot.
                let spread = 1_000.0 / METERS_PER_DEGREE;
                bbox.clamp(GeoPoint {
                    lat: h.lat + spread * (rng.gen::<f64>() + rng.gen::<f64>() - 1.0),
                    lon: h.lon + spread * (rng.gen::<f64>() + rng.gen::<f64>() - 1.0),
                })
            } else {
                bbox.sample(&mut rng)
            };
            FeatureSite { kind, location, value, influence_radius_m }
        })
        .collect();

    let (trips, origin_heavy) = synth_trips(config, &stations, &mut rng);

    SyntheticData { stations, candidates, features, tracts, trips, origin_heavy }
}

/// Value and influence radius used for generated features of each kind.
pub fn default_feature_weight(kind: FeatureKind) -> (f64, f64) {
    match kind {
        FeatureKind::MetroStation => (5.0, 300.0),
        FeatureKind::Attraction => (4.0, 400.0),
        FeatureKind::ProtectedBikeLane => (3.0, 150.0),
        FeatureKind::BikeLane => (2.0, 100.0),
        FeatureKind::BikeTrail => (2.0, 150.0),
        FeatureKind::SharedLane => (1.0, 100.0),
        FeatureKind::DemandTract => (1.0, 500.0),
    }
}

fn tract_grid(bbox: &BoundingBox, count: usize, rng: &mut ChaCha8Rng) -> Vec<Tract> {
    if count == 0 {
        return Vec::new();
    }
    let side = libm::ceil(libm::sqrt(count as f64)) as usize;
    let (dlat, dlon) = ((bbox.max_lat - bbox.min_lat) / side as f64, (bbox.max_lon - bbox.min_lon) / side as f64);
    (0..count)
        .map(|i| {
            let (r, c) = (i / side, i % side);
            Tract {
                id: format!("tract-{i:03}").into(),
                centroid: GeoPoint {
                    lat: bbox.min_lat + dlat * (r as f64 + rng.gen_range(0.3..0.7)),
                    lon: bbox.min_lon + dlon * (c as f64 + rng.gen_range(0.3..0.7)),
                },
                demand: 0.0,
            }
        })
        .collect()
}

fn weighted_pick(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().expect("non-empty");
    let r = rng.gen_range(0.0..total);
    cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn synth_trips(config: &SynthConfig, stations: &[Station], rng: &mut ChaCha8Rng) -> (Vec<TripRecord>, Vec<StationId>) {
    let n = stations.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_origin = libm::round(config.origin_fraction.clamp(0.0, 1.0) * n as f64) as usize;
    let mut is_origin = alloc::vec![false; n];
    for &i in &order[..n_origin] {
        is_origin[i] = true;
    }

    // Popularity scales both directions; the arrival weight of the other
    // stations balances total departures against total arrivals, which makes
    // each origin-heavy station's expected ratio exactly `origin_ratio`.
    let popularity: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let w_origin: f64 = (0..n).filter(|&i| is_origin[i]).map(|i| popularity[i]).sum();
    let w_other: f64 = (0..n).filter(|&i| !is_origin[i]).map(|i| popularity[i]).sum();
    let ratio = config.origin_ratio.max(1.0);
    let other_arrival = if w_other > 0.0 { 1.0 + (ratio - 1.0) * w_origin / w_other } else { 1.0 };
    let dep: Vec<f64> = (0..n).map(|i| popularity[i] * if is_origin[i] { ratio } else { 1.0 }).collect();
    let arr: Vec<f64> = (0..n).map(|i| popularity[i] * if is_origin[i] { 1.0 } else { other_arrival }).collect();
    let (dep_cum, arr_cum) = (cumulative(&dep), cumulative(&arr));

    let days = i64::from(config.days.max(1));
    let trips = (0..config.trips)
        .map(|t| {
            let s = weighted_pick(&dep_cum, rng);
            let e = weighted_pick(&arr_cum, rng);
            let day = config.start_day + rng.gen_range(0..days);
            let minute_of_day = sample_minute(config.peak_hours, rng);
            let start = Timestamp::from_day_and_seconds(day, minute_of_day * 60 + rng.gen_range(0..60));
            let duration = rng.gen_range(5 * 60..45 * 60);
            TripRecord {
                trip_id: format!("R{t:07}"),
                started_at: start,
                ended_at: Timestamp(start.0 + duration),
                start_station_id: stations[s].id.clone(),
                end_station_id: stations[e].id.clone(),
            }
        })
        .collect();

    let mut origin_heavy: Vec<StationId> = (0..n).filter(|&i| is_origin[i]).map(|i| stations[i].id.clone()).collect();
    origin_heavy.sort();
    (trips, origin_heavy)
}

/// Minute of day: 40% around each peak (triangular, +/- 90 min), 20% uniform
/// over 06:00-23:00.
fn sample_minute(peaks: [u8; 2], rng: &mut ChaCha8Rng) -> i64 {
    let u: f64 = rng.gen();
    let minute = if u < 0.8 {
        let peak = f64::from(peaks[usize::from(u >= 0.4)]) * 60.0 + 30.0;
        peak + 90.0 * (rng.gen::<f64>() + rng.gen::<f64>() - 1.0)
    } else {
        rng.gen_range(360.0..1380.0)
    };
    (minute as i64).clamp(0, 1439)
}

/// Uniform random bike counts in `0..=capacity` for each station.
pub fn synthetic_bikes(stations: &[Station], seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    stations.iter().map(|s| rng.gen_range(0..=s.capacity)).collect()
}

/// Candidate sites on a regular grid with `spacing_m` between rows/columns.
pub fn grid_candidates(bbox: &BoundingBox, spacing_m: f64) -> Vec<CandidateLocation> {
    let mid_lat = (bbox.min_lat + bbox.max_lat) / 2.0;
    let dlat = spacing_m / METERS_PER_DEGREE;
    let dlon = spacing_m / (METERS_PER_DEGREE * libm::cos(mid_lat.to_radians()));
    let rows = libm::floor((bbox.max_lat - bbox.min_lat) / dlat + 1e-9) as usize + 1;
    let cols = libm::floor((bbox.max_lon - bbox.min_lon) / dlon + 1e-9) as usize + 1;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(CandidateLocation {
                id: format!("G{r:03}-{c:03}").into(),
                location: GeoPoint { lat: bbox.min_lat + dlat * r as f64, lon: bbox.min_lon + dlon * c as f64 },
                base_value: 0.0,
            });
        }
    }
    out
}
