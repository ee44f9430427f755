use alloc::vec::Vec;

use crate::demand::FlowClass;
use crate::geo::GeoPoint;
use crate::model::StationId;

/// A live station before the truck arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct StationState {
    pub station_id: StationId,
    pub location: GeoPoint,
    pub bikes: u32,
    pub capacity: u32,
    pub class: FlowClass,
    /// Bikes wanted after rebalancing.
    pub target: u32,
}

impl StationState {
    /// Positive when bikes must be removed, negative when bikes are missing.
    pub fn surplus(&self) -> i64 {
        i64::from(self.bikes) - i64::from(self.target)
    }

    pub fn is_balanced(&self) -> bool {
        self.bikes == self.target
    }
}

/// How a destination station's half-capacity target is rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetRounding {
    #[default]
    Ceil,
    Floor,
}

/// Origins are kept full, destinations half full.
pub fn target_for(class: FlowClass, capacity: u32, rounding: TargetRounding) -> u32 {
    match (class, rounding) {
        (FlowClass::Origin, _) => capacity,
        (FlowClass::Destination, TargetRounding::Ceil) => capacity.div_ceil(2),
        (FlowClass::Destination, TargetRounding::Floor) => capacity / 2,
    }
}

pub fn set_targets(stations: &[StationState], rounding: TargetRounding) -> Vec<StationState> {
    stations
        .iter()
        .map(|s| StationState { target: target_for(s.class, s.capacity, rounding), ..s.clone() })
        .collect()
}

/// Admissible pick-up (`p`) and drop (`q`) quantities at one station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransferBounds {
    pub p_min: u32,
    pub p_max: u32,
    pub q_min: u32,
    pub q_max: u32,
}

/// `p` in `[max(0, b-o), b]`, `q` in `[max(0, o-b), c-b]`.
pub fn transfer_bounds(station: &StationState) -> TransferBounds {
    let (b, o, c) = (station.bikes, station.target, station.capacity);
    TransferBounds {
        p_min: b.saturating_sub(o),
        p_max: b,
        q_min: o.saturating_sub(b),
        q_max: c.saturating_sub(b),
    }
}
