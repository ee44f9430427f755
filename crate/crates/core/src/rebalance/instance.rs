use alloc::format;
use alloc::vec::Vec;

use super::StationState;
use crate::error::{Error, Result};
use crate::geo::{manhattan_m, GeoPoint};

/// Stations, truck parameters and the travel-distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RebalanceInstance {
    pub stations: Vec<StationState>,
    pub truck_capacity: u32,
    pub truck_start_load: u32,
    pub depot: Option<GeoPoint>,
    /// Row-major `n x n` Manhattan meters.
    distances: Vec<f64>,
    /// Depot-to-station meters; empty without a depot.
    depot_legs: Vec<f64>,
}

impl RebalanceInstance {
    /// Builds an instance with Manhattan distances from station coordinates.
    pub fn new(
        stations: Vec<StationState>,
        truck_capacity: u32,
        truck_start_load: u32,
        depot: Option<GeoPoint>,
    ) -> Result<Self> {
        let n = stations.len();
        let mut distances = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = manhattan_m(stations[i].location, stations[j].location);
                distances[i * n + j] = d;
                distances[j * n + i] = d;
            }
        }
        let depot_legs = depot
            .map(|d| stations.iter().map(|s| manhattan_m(d, s.location)).collect())
            .unwrap_or_default();
        let inst = RebalanceInstance { stations, truck_capacity, truck_start_load, depot, distances, depot_legs };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance from an explicit station matrix and, optionally,
    /// depot legs (one per station).
    pub fn with_distances(
        stations: Vec<StationState>,
        truck_capacity: u32,
        truck_start_load: u32,
        matrix: &[Vec<f64>],
        depot_legs: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = stations.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInstance(format!("distance matrix must be {n}x{n}")));
        }
        if depot_legs.as_ref().is_some_and(|d| d.len() != n) {
            return Err(Error::InvalidInstance("one depot leg per station required".into()));
        }
        let inst = RebalanceInstance {
            stations,
            truck_capacity,
            truck_start_load,
            depot: None,
            distances: matrix.iter().flatten().copied().collect(),
            depot_legs: depot_legs.unwrap_or_default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidInstance(m));
        if self.truck_start_load > self.truck_capacity {
            return bad(format!(
                "start load {} exceeds truck capacity {}",
                self.truck_start_load, self.truck_capacity
            ));
        }
        let mut ids = alloc::collections::BTreeSet::new();
        for s in &self.stations {
            if !ids.insert(&s.station_id) {
                return bad(format!("duplicate station {}", s.station_id));
            }
            if s.bikes > s.capacity || s.target > s.capacity {
                return bad(format!(
                    "station {}: bikes {} / target {} exceed capacity {}",
                    s.station_id, s.bikes, s.target, s.capacity
                ));
            }
        }
        let n = self.stations.len();
        for i in 0..n {
            if self.distance(i, i) != 0.0 {
                return bad(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let d = self.distance(i, j);
                if !(d >= 0.0 && d.is_finite()) || d != self.distance(j, i) {
                    return bad(format!("distance matrix not symmetric/non-negative at ({i},{j})"));
                }
            }
        }
        if self.depot_legs.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return bad("depot legs must be non-negative".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.stations.len() + j]
    }

    pub fn has_depot(&self) -> bool {
        !self.depot_legs.is_empty()
    }

    /// Depot-to-station distance, zero without a depot.
    pub fn depot_leg(&self, i: usize) -> f64 {
        self.depot_legs.get(i).copied().unwrap_or(0.0)
    }

    /// Indices of stations off target.
    pub fn active(&self) -> Vec<usize> {
        (0..self.stations.len()).filter(|&i| !self.stations[i].is_balanced()).collect()
    }

    /// Bikes moved at station `i` arriving with `load`: fully corrects the
    /// station when the truck allows it, otherwise the largest partial amount.
    /// Positive picks up, negative drops, zero means nothing can be done.
    pub fn transfer_at(&self, i: usize, load: u32) -> i64 {
        let s = &self.stations[i];
        let surplus = s.surplus();
        if surplus > 0 {
            surplus.min(i64::from(self.truck_capacity - load))
        } else {
            -(-surplus).min(i64::from(load))
        }
    }

    /// Total route length including depot legs (out and back) when a depot
    /// is set; zero for an empty route.
    pub fn route_distance(&self, route: &[usize]) -> f64 {
        let (Some(&first), Some(&last)) = (route.first(), route.last()) else {
            return 0.0;
        };
        let mut total = self.depot_leg(first);
        for pair in route.windows(2) {
            total += self.distance(pair[0], pair[1]);
        }
        total + self.depot_leg(last)
    }
}
