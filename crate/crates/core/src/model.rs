//! Domain records shared by every solver.

use alloc::string::String;
use core::fmt;

use crate::geo::GeoPoint;
use crate::time::Timestamp;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(String::from(s))
            }
        }
    };
}

string_id!(
    /// Identifier of a live docking station.
    StationId
);
string_id!(
    /// Identifier of a census tract.
    TractId
);
string_id!(
    /// Identifier of a candidate station site.
    CandidateId
);

/// One bike trip.
#[derive(Debug, Clone, PartialEq)]
pub struct TripRecord {
    pub trip_id: String,
    pub started_at: Timestamp,
    pub ended_at: Timestamp,
    pub start_station_id: StationId,
    pub end_station_id: StationId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: StationId,
    pub name: String,
    pub location: GeoPoint,
    /// Dock count.
    pub capacity: u32,
    /// Empty when unknown; see [`crate::demand::assign_tracts`].
    pub tract_id: TractId,
}

/// A potential station site.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateLocation {
    pub id: CandidateId,
    pub location: GeoPoint,
    pub base_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    DemandTract,
    BikeLane,
    ProtectedBikeLane,
    BikeTrail,
    SharedLane,
    MetroStation,
    Attraction,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 7] = [
        FeatureKind::DemandTract,
        FeatureKind::BikeLane,
        FeatureKind::ProtectedBikeLane,
        FeatureKind::BikeTrail,
        FeatureKind::SharedLane,
        FeatureKind::MetroStation,
        FeatureKind::Attraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::DemandTract => "demand_tract",
            FeatureKind::BikeLane => "bike_lane",
            FeatureKind::ProtectedBikeLane => "protected_bike_lane",
            FeatureKind::BikeTrail => "bike_trail",
            FeatureKind::SharedLane => "shared_lane",
            FeatureKind::MetroStation => "metro_station",
            FeatureKind::Attraction => "attraction",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        FeatureKind::ALL.into_iter().find(|k| k.name() == norm).or(match norm.as_str() {
            "metro" | "subway" => Some(FeatureKind::MetroStation),
            "tract" | "demand" => Some(FeatureKind::DemandTract),
            "trail" => Some(FeatureKind::BikeTrail),
            _ => None,
        })
    }
}

/// A value-adding feature near which station sites are worth more.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSite {
    pub kind: FeatureKind,
    pub location: GeoPoint,
    pub value: f64,
    pub influence_radius_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tract {
    pub id: TractId,
    pub centroid: GeoPoint,
    /// Total pick-ups plus drop-offs of the tract's stations.
    pub demand: f64,
}
