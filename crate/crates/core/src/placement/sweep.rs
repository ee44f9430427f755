use alloc::vec::Vec;

use super::{solve_heuristic_from, Placement, PlacementModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub objective: f64,
    pub stations: usize,
}

/// Solves the model for each budget in `n_values` (ascending).
///
/// Each solve starts from the previous budget's placement, which stays
/// feasible under a larger budget, so objectives never decrease. Tier caps
/// are clamped to each budget.
pub fn sweep_n(model: &PlacementModel, n_values: &[usize], seed: u64) -> Result<Vec<SweepPoint>> {
    if n_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidModel("n_values must be sorted ascending".into()));
    }
    let mut points = Vec::with_capacity(n_values.len());
    let mut previous: Option<Placement> = None;
    for &n in n_values {
        if n == 0 {
            points.push(SweepPoint { n, objective: 0.0, stations: 0 });
            continue;
        }
        let placement = solve_heuristic_from(&model.with_n_max(n), seed, previous.as_ref())?;
        points.push(SweepPoint { n, objective: placement.objective, stations: placement.len() });
        previous = Some(placement);
    }
    Ok(points)
}
