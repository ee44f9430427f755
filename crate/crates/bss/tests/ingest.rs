use std::path::{Path, PathBuf};

use bss_opt::ingest::{
    parse_candidates_reader, parse_features_str, parse_stations, parse_station_states_reader, parse_trips,
    parse_trips_reader, parse_tracts_str, write_candidates, write_station_states, write_stations, write_trips,
    features_geojson, tracts_geojson, IngestError, StationStateRow,
};
use bss_opt::bss_core::synth::{generate_synthetic, SynthConfig};
use bss_opt::bss_core::{demand::FlowClass, GeoPoint};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn hundred_rows_three_bad_timestamps() {
    let (trips, report) = parse_trips(&fixture("trips_100.csv"), None).unwrap();
    assert_eq!(trips.len(), 97);
    assert_eq!(report.accepted, 97);
    assert_eq!(report.rejected.len(), 3);
    assert!(report.rejected.iter().all(|r| r.reason == "bad timestamp"));
    let records: Vec<u64> = report.rejected.iter().map(|r| r.record).collect();
    assert_eq!(records, [18, 55, 89]);
}

#[test]
fn catalog_filters_unknown_stations() {
    let (stations, _) = parse_stations(&fixture("stations.csv")).unwrap();
    assert_eq!(stations.len(), 5);
    assert_eq!(stations[3].name, "D, corner");
    let (trips, report) = parse_trips(&fixture("trips_100.csv"), Some(&stations[..4])).unwrap();
    let unknown = report.rejected.iter().filter(|r| r.reason == "unknown station: 31004").count();
    assert_eq!(trips.len() + unknown, 97);
    assert!(unknown > 0);
}

#[test]
fn duplicate_station_names_the_id() {
    let err = parse_stations(&fixture("stations_dup.csv")).unwrap_err();
    assert!(matches!(&err, IngestError::DuplicateId { id, .. } if id == "31001"));
    let msg = err.to_string();
    assert!(msg.contains("31001") && msg.contains("stations_dup.csv"), "{msg}");
}

#[test]
fn missing_file_is_fatal() {
    let path = fixture("nope.csv");
    match parse_trips(&path, None) {
        Err(IngestError::Missing(p)) => assert_eq!(p, path),
        other => panic!("{other:?}"),
    }
}

#[test]
fn header_only_file() {
    let (trips, report) =
        parse_trips_reader("ride_id,started_at,ended_at,start_station_id,end_station_id\n".as_bytes(), None).unwrap();
    assert!(trips.is_empty());
    assert_eq!((report.accepted, report.rejected.len()), (0, 0));
}

#[test]
fn synthetic_catalogs_round_trip() {
    let data = generate_synthetic(&SynthConfig { trips: 300, ..SynthConfig::default() }, 3);

    let mut buf = Vec::new();
    write_stations(&mut buf, &data.stations).unwrap();
    let (stations, _) = bss_opt::ingest::parse_stations_reader(buf.as_slice()).unwrap();
    assert_eq!(stations, data.stations);

    let mut buf = Vec::new();
    write_candidates(&mut buf, &data.candidates).unwrap();
    assert_eq!(parse_candidates_reader(buf.as_slice()).unwrap().0, data.candidates);

    let mut buf = Vec::new();
    write_trips(&mut buf, &data.trips).unwrap();
    let (trips, report) = parse_trips_reader(buf.as_slice(), Some(&data.stations)).unwrap();
    assert!(report.rejected.is_empty());
    assert_eq!(trips, data.trips);

    let (features, _) = parse_features_str(&features_geojson(&data.features).to_string()).unwrap();
    assert_eq!(features, data.features);
    let (tracts, _) = parse_tracts_str(&tracts_geojson(&data.tracts).to_string()).unwrap();
    assert_eq!(tracts, data.tracts);
}

fn id_strategy() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,\"_-]{1,12}".prop_filter("non-blank after trim", |s| !s.trim().is_empty() && s.trim() == s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..2048)) {
        let mut body = b"ride_id,started_at,ended_at,start_station_id,end_station_id\n".to_vec();
        body.extend_from_slice(&bytes);
        let _ = parse_trips_reader(body.as_slice(), None);
        let _ = parse_trips_reader(bytes.as_slice(), None);
        let _ = bss_opt::ingest::parse_stations_reader(bytes.as_slice());
        let _ = parse_candidates_reader(bytes.as_slice());
        let _ = parse_station_states_reader(bytes.as_slice());
        if let Ok(text) = std::str::from_utf8(&bytes) {
            let _ = parse_features_str(text);
            let _ = parse_tracts_str(text);
            let _ = bss_opt::ingest::parse_classification_str(text);
        }
    }

    #[test]
    fn every_trip_row_is_accepted_or_reported(rows in proptest::collection::vec("[0-9:, -]{0,40}", 0..40)) {
        let mut text = String::from("ride_id,started_at,ended_at,start_station_id,end_station_id\n");
        for r in &rows {
            text.push_str(r);
            text.push('\n');
        }
        let (trips, report) = parse_trips_reader(text.as_bytes(), None).unwrap();
        // Blank lines are skipped by the CSV reader; everything else is counted.
        let non_blank = rows.iter().filter(|r| !r.is_empty()).count();
        prop_assert_eq!(trips.len() + report.rejected.len(), non_blank);
    }

    #[test]
    fn station_state_round_trip(
        rows in proptest::collection::btree_map(id_strategy(), (38.8f64..39.0, -77.1f64..-76.9, 1u32..40, 0u32..40, any::<Option<bool>>()), 0..20)
    ) {
        let rows: Vec<StationStateRow> = rows
            .into_iter()
            .map(|(id, (lat, lon, cap, b, class))| StationStateRow {
                id: id.into(),
                location: GeoPoint { lat, lon },
                bikes: b.min(cap),
                capacity: cap,
                class: class.map(|o| if o { FlowClass::Origin } else { FlowClass::Destination }),
            })
            .collect();
        let mut buf = Vec::new();
        write_station_states(&mut buf, &rows).unwrap();
        let (back, report) = parse_station_states_reader(buf.as_slice()).unwrap();
        prop_assert!(report.rejected.is_empty());
        prop_assert_eq!(back, rows);
    }
}
