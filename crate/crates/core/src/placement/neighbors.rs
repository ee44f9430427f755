use alloc::vec;
use alloc::vec::Vec;

use crate::geo::{Metric, EARTH_RADIUS_M, METERS_PER_DEGREE};
use crate::model::CandidateLocation;

/// Proximity lists for every candidate.
///
/// `within_dm[i]` holds candidates strictly closer than `dm_m` to `i` (they
/// cannot both host a station); `within_dl[i]` holds candidates at most
/// `dl_m` away. Lists are sorted, exclude `i` itself, and are symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborIndex {
    pub within_dm: Vec<Vec<usize>>,
    pub within_dl: Vec<Vec<usize>>,
}

impl NeighborIndex {
    pub fn build(candidates: &[CandidateLocation], dm_m: f64, dl_m: f64, metric: Metric) -> Self {
        let n = candidates.len();
        let mut within_dm = vec![Vec::new(); n];
        let mut within_dl = vec![Vec::new(); n];
        // Both metrics are bounded below by the north-south separation.
        let min_m_per_deg = METERS_PER_DEGREE.min(EARTH_RADIUS_M * core::f64::consts::PI / 180.0);
        let reach = dm_m.max(dl_m);
        let mut by_lat: Vec<usize> = (0..n).collect();
        by_lat.sort_by(|&a, &b| candidates[a].location.lat.total_cmp(&candidates[b].location.lat));
        for (pos, &i) in by_lat.iter().enumerate() {
            let pi = candidates[i].location;
            for &j in &by_lat[pos + 1..] {
                let pj = candidates[j].location;
                if (pj.lat - pi.lat) * min_m_per_deg > reach {
                    break;
                }
                let d = metric.distance_m(pi, pj);
                if d < dm_m {
                    within_dm[i].push(j);
                    within_dm[j].push(i);
                }
                if d <= dl_m {
                    within_dl[i].push(j);
                    within_dl[j].push(i);
                }
            }
        }
        for list in within_dm.iter_mut().chain(within_dl.iter_mut()) {
            list.sort_unstable();
        }
        NeighborIndex { within_dm, within_dl }
    }

    pub fn len(&self) -> usize {
        self.within_dm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.within_dm.is_empty()
    }

    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        self.within_dm[i].binary_search(&j).is_ok()
    }

    pub fn near(&self, i: usize, j: usize) -> bool {
        self.within_dl[i].binary_search(&j).is_ok()
    }
}
