use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{approx_eq, Placement, PlacementModel, Tier};
use crate::model::{CandidateId, CandidateLocation};

/// A broken placement rule, as found by [`validate_placement`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownCandidate(CandidateId),
    TooManyStations { count: usize, cap: usize },
    TooManyMedium { count: usize, cap: usize },
    TooManyLarge { count: usize, cap: usize },
    TooClose { a: CandidateId, b: CandidateId, distance_m: f64 },
    Isolated(CandidateId),
    ObjectiveMismatch { reported: f64, recomputed: f64 },
}

/// Rechecks every placement rule from raw coordinates, without the neighbor
/// index the solvers use.
pub fn validate_placement(model: &PlacementModel, placement: &Placement) -> Vec<Violation> {
    let mut out = Vec::new();
    let by_id: BTreeMap<&CandidateId, &CandidateLocation> =
        model.candidates.iter().map(|c| (&c.id, c)).collect();

    let mut sites: Vec<(&CandidateLocation, Tier)> = Vec::new();
    for (id, &tier) in &placement.assignment {
        match by_id.get(id) {
            Some(c) => sites.push((c, tier)),
            None => out.push(Violation::UnknownCandidate(id.clone())),
        }
    }

    let count = placement.assignment.len();
    if count > model.n_max {
        out.push(Violation::TooManyStations { count, cap: model.n_max });
    }
    let medium = placement.count(Tier::Medium);
    if medium > model.m_max {
        out.push(Violation::TooManyMedium { count: medium, cap: model.m_max });
    }
    let large = placement.count(Tier::Large);
    if large > model.l_max {
        out.push(Violation::TooManyLarge { count: large, cap: model.l_max });
    }

    let mut has_partner = alloc::vec![false; sites.len()];
    for a in 0..sites.len() {
        for b in a + 1..sites.len() {
            let d = model.metric.distance_m(sites[a].0.location, sites[b].0.location);
            if d < model.dm_m {
                out.push(Violation::TooClose { a: sites[a].0.id.clone(), b: sites[b].0.id.clone(), distance_m: d });
            }
            if d <= model.dl_m {
                has_partner[a] = true;
                has_partner[b] = true;
            }
        }
    }
    if model.isolation_constraint && sites.len() >= 2 {
        for (site, partnered) in sites.iter().zip(&has_partner) {
            if !partnered {
                out.push(Violation::Isolated(site.0.id.clone()));
            }
        }
    }

    let recomputed: f64 = sites.iter().map(|(c, t)| c.base_value * model.multiplier(*t)).sum();
    if !approx_eq(recomputed, placement.objective) {
        out.push(Violation::ObjectiveMismatch { reported: placement.objective, recomputed });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::placement::SolveStatus;

    fn cand(id: &str, lat: f64, v: f64) -> CandidateLocation {
        CandidateLocation { id: id.into(), location: GeoPoint { lat, lon: -77.0 }, base_value: v }
    }

    #[test]
    fn flags_every_rule() {
        let model = PlacementModel {
            n_max: 2,
            m_max: 0,
            l_max: 0,
            ..PlacementModel::new(alloc::vec![cand("a", 38.9, 1.0), cand("b", 38.9001, 1.0), cand("c", 39.5, 1.0)])
        };
        let assignment = [("a", Tier::Medium), ("b", Tier::Large), ("c", Tier::Small), ("x", Tier::Small)]
            .into_iter()
            .map(|(id, t)| (CandidateId::from(id), t))
            .collect();
        let p = Placement { assignment, objective: 99.0, status: SolveStatus::Heuristic };
        let v = validate_placement(&model, &p);
        assert!(v.contains(&Violation::UnknownCandidate("x".into())));
        assert!(v.contains(&Violation::TooManyStations { count: 4, cap: 2 }));
        assert!(v.contains(&Violation::TooManyMedium { count: 1, cap: 0 }));
        assert!(v.contains(&Violation::TooManyLarge { count: 1, cap: 0 }));
        assert!(v.iter().any(|x| matches!(x, Violation::TooClose { .. })));
        assert!(v.contains(&Violation::Isolated("c".into())));
        assert!(v.iter().any(|x| matches!(x, Violation::ObjectiveMismatch { .. })));
    }
}
