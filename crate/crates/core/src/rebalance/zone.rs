//! k-means zoning of stations, one zone per truck.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, LocalProjection};

const MAX_ITERATIONS: usize = 100;
const RESTARTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZonePartition {
    /// Indices into the input, each zone sorted; zones ordered by their first
    /// member. Trailing zones may be empty when `k` exceeds the input size.
    pub zones: Vec<Vec<usize>>,
    /// `k` was larger than the number of stations.
    pub has_empty_zones: bool,
}

/// Splits `points` into `k` disjoint zones by k-means on projected meters
/// (k-means++ seeding, best of a few seeded restarts).
pub fn zone_partition(points: &[GeoPoint], k: usize, seed: u64) -> Result<ZonePartition> {
    if k == 0 {
        return Err(Error::InvalidInstance("zone count must be at least 1".into()));
    }
    let n = points.len();
    if k >= n {
        let mut zones: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        zones.resize(k, Vec::new());
        return Ok(ZonePartition { zones, has_empty_zones: k > n });
    }
    if k == 1 {
        return Ok(ZonePartition { zones: vec![(0..n).collect()], has_empty_zones: false });
    }

    let proj = LocalProjection::centered_on(points.iter().copied());
    let xy: Vec<[f64; 2]> = points.iter().map(|&p| proj.project(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..RESTARTS {
        let (inertia, labels) = lloyd(&xy, k, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    let labels = best.expect("at least one restart").1;

    let mut zones: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        zones[l].push(i);
    }
    zones.sort_by_key(|z| z.first().copied().unwrap_or(usize::MAX));
    Ok(ZonePartition { zones, has_empty_zones: false })
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn nearest_center(p: [f64; 2], centers: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, &center) in centers.iter().enumerate() {
        let d = dist2(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(xy: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut centers = vec![xy[rng.gen_range(0..xy.len())]];
    let mut d2: Vec<f64> = xy.iter().map(|&p| dist2(p, centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen_range(0.0..total);
            let mut chosen = xy.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            chosen
        } else {
            rng.gen_range(0..xy.len())
        };
        centers.push(xy[pick]);
        for (i, &p) in xy.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, xy[pick]));
        }
    }
    centers
}

/// One seeded k-means run; returns (inertia, labels) with every label used.
fn lloyd(xy: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let mut centers = plus_plus_init(xy, k, rng);
    let mut labels = vec![usize::MAX; xy.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, &p) in xy.iter().enumerate() {
            let (c, _) = nearest_center(p, &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            sums[l][0] += xy[i][0];
            sums[l][1] += xy[i][1];
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            } else {
                // Re-seed an empty zone at the point farthest from its center.
                let far = (0..xy.len())
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| {
                        dist2(xy[a], centers[labels[a]]).total_cmp(&dist2(xy[b], centers[labels[b]]))
                    })
                    .expect("k < n leaves a zone with two members");
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                centers[c] = xy[far];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = xy.iter().zip(&labels).map(|(&p, &l)| dist2(p, centers[l])).sum();
    (inertia, labels)
}
