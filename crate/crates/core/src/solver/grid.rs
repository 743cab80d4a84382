//! Exhaustive grid search over the power box, for desk-scale instances.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{inverse_ee, siee_objective, sum_rate, PowerAllocation, SystemParams};

use super::{SolveReport, SolveStatus};

/// Largest instance the grid search accepts.
pub const MAX_GRID_USERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridObjective {
    /// Minimize the sum inverse energy efficiency.
    Siee,
    /// Maximize the sum rate.
    SumRate,
}

/// Evaluates `objective` on a uniform grid of `resolution` points per axis
/// and returns the best point with its objective value.
///
/// For [`GridObjective::Siee`] each axis spans `[Pmax_i / resolution, Pmax_i]`
/// so no rate is zero; for [`GridObjective::SumRate`] it spans `[0, Pmax_i]`.
pub fn grid_oracle(
    params: &SystemParams,
    resolution: usize,
    objective: GridObjective,
) -> Result<(PowerAllocation, f64)> {
    let n = params.n();
    if n > MAX_GRID_USERS {
        return Err(Error::InstanceTooLarge { n, max: MAX_GRID_USERS });
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let axes: Vec<Vec<f64>> = params
        .p_max()
        .iter()
        .map(|&cap| {
            let floor = match objective {
                GridObjective::Siee => cap / resolution as f64,
                GridObjective::SumRate => 0.0,
            };
            (0..resolution).map(|k| floor + (cap - floor) * k as f64 / (resolution - 1) as f64).collect()
        })
        .collect();
    let total = resolution.pow(n as u32);

    let point = |idx: usize| -> Vec<f64> {
        let mut rest = idx;
        axes.iter()
            .map(|axis| {
                let k = rest % resolution;
                rest /= resolution;
                axis[k]
            })
            .collect()
    };
    // Scores are oriented so that smaller is better; ties keep the lowest index.
    let score = |idx: usize| -> (f64, usize) {
        let p = point(idx);
        let v = match objective {
            GridObjective::Siee => siee_objective(params, &p).unwrap_or(f64::INFINITY),
            GridObjective::SumRate => -sum_rate(params, &p).unwrap_or(f64::NEG_INFINITY),
        };
        (v, idx)
    };
    let (best, idx) = (0..total)
        .into_par_iter()
        .map(score)
        .reduce(|| (f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    if idx == usize::MAX {
        return Err(Error::InvalidConfig("grid search found no finite objective value".into()));
    }
    let p = point(idx);
    let value = match objective {
        GridObjective::Siee => best,
        GridObjective::SumRate => -best,
    };
    Ok((PowerAllocation::new(params, p)?, value))
}

/// Sum-rate maximization baseline, reported in the same shape as
/// [`super::solve_siee`] so the two can be compared directly.
pub fn sum_rate_max_baseline(params: &SystemParams, resolution: usize) -> Result<SolveReport> {
    let (p, _) = grid_oracle(params, resolution, GridObjective::SumRate)?;
    let per_user_iee = inverse_ee(params, p.as_slice())?;
    let objective: f64 = per_user_iee.iter().sum();
    Ok(SolveReport {
        p_star: p,
        objective,
        objective_trajectory: vec![objective],
        per_user_iee,
        inner_iterations: Vec::new(),
        newton_iterations: Vec::new(),
        residual_trace: Vec::new(),
        penalty_ratio: f64::NAN,
        theta: f64::NAN,
        power_unit: 1.0,
        status: SolveStatus::Converged,
    })
}
