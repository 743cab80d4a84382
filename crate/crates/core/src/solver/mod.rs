//! Alternate convex search for sum inverse energy efficiency minimization,
//! plus the comparison baselines.
//!
//! The outer loop refreshes the fraction-transform auxiliaries `t`; the inner
//! loop runs scaled ADMM on the fixed-`t` subproblem and refreshes the
//! quadratic-transform auxiliaries `y` after every `q` step. Each outer
//! iteration minimizes an upper bound of the objective that is tight at the
//! current point, so the objective never increases.

mod grid;
mod scalar;

pub use grid::{grid_oracle, sum_rate_max_baseline, GridObjective, MAX_GRID_USERS};
pub use scalar::{
    dinkelbach_min_scalar, golden_section_min, transform_min_scalar, ScalarIterate, ScalarSolution, INNER_TOL,
    MAX_SCALAR_ITER,
};

use crate::admm::{p_update, primal_residual, q_update, u_update, AdmmState, NewtonConfig, QSubproblem};
use crate::error::{check_len, Error, Result};
use crate::model::{inverse_ee, power_consumption, siee_objective, surrogate_rate, PowerAllocation, SystemParams};
use crate::transform::{surrogate_objective_f3, update_t, update_y, TransformState};

/// How the ADMM penalty is chosen for each inner loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaPolicy {
    /// Constant penalty in normalized units.
    Fixed(f64),
    /// `scale * sum_i t_i phi_i^2`, matched to the curvature of the
    /// power-consumption part; recomputed whenever `t` changes.
    CurvatureScaled(f64),
}

impl ThetaPolicy {
    pub fn theta(&self, t: &[f64], phi: &[f64]) -> f64 {
        match *self {
            ThetaPolicy::Fixed(theta) => theta,
            ThetaPolicy::CurvatureScaled(scale) => scale * t.iter().zip(phi).map(|(t, f)| t * f * f).sum::<f64>(),
        }
    }
}

impl Default for ThetaPolicy {
    fn default() -> Self {
        ThetaPolicy::CurvatureScaled(DEFAULT_THETA_SCALE)
    }
}

/// Default multiplier of the curvature-scaled penalty.
pub const DEFAULT_THETA_SCALE: f64 = 150.0;

/// Where the quadratic-transform auxiliaries are refreshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YUpdate {
    /// After every `q` step, from the new `q`.
    #[default]
    Inner,
    /// Once per outer iteration, from the ADMM output `p`.
    Outer,
}

/// Solver settings. Power-valued tolerances are expressed in units of the
/// largest power cap of the instance, because the solve runs on the
/// normalized instance (see [`SystemParams::normalized`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Inner stop: primal residual `|p - q|_2` and dual residual
    /// `theta |q_l - q_{l-1}|_2` both below `delta1 * sqrt(I)`.
    pub delta1: f64,
    /// Outer stop: `|t_n - t_{n-1}|_2 < delta2`.
    pub delta2: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub theta: ThetaPolicy,
    pub y_update: YUpdate,
    pub newton: NewtonConfig,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta1: 1e-4,
            delta2: 1e-5,
            max_outer: 200,
            max_inner: 5000,
            theta: ThetaPolicy::default(),
            y_update: YUpdate::default(),
            newton: NewtonConfig::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let theta_ok = match self.theta {
            ThetaPolicy::Fixed(v) | ThetaPolicy::CurvatureScaled(v) => v > 0.0 && v.is_finite(),
        };
        if !(self.delta1 > 0.0 && self.delta2 > 0.0 && self.max_outer >= 1 && self.max_inner >= 1 && theta_ok) {
            return Err(Error::InvalidConfig(format!("solver config out of range: {self:?}")));
        }
        self.newton.validate()
    }

    /// Inner stop threshold for an instance with `n` users.
    pub fn inner_tolerance(&self, n: usize) -> f64 {
        self.delta1 * (n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterationCap,
}

/// Outcome of a solve. Powers and objective values are in physical units
/// (watts, watts per bit/s/Hz); ADMM diagnostics are in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub p_star: PowerAllocation,
    pub objective: f64,
    /// Objective at the initial point followed by its value after each
    /// outer iteration.
    pub objective_trajectory: Vec<f64>,
    /// `B_i / A_i` at `p_star`.
    pub per_user_iee: Vec<f64>,
    /// ADMM iterations spent in each outer iteration.
    pub inner_iterations: Vec<usize>,
    /// Newton iterations of every `q` step, in order.
    pub newton_iterations: Vec<usize>,
    /// `|p - q|_2` after every ADMM iteration, in normalized units.
    pub residual_trace: Vec<f64>,
    /// Transformed objective over the augmented-Lagrangian penalty
    /// `theta/2 |p - q + u|^2` at termination.
    pub penalty_ratio: f64,
    /// Final penalty, in normalized units.
    pub theta: f64,
    /// Watts per normalized power unit.
    pub power_unit: f64,
    pub status: SolveStatus,
}

fn consumption(params: &SystemParams, p: &[f64]) -> Result<Vec<f64>> {
    (0..params.n()).map(|i| power_consumption(params, p, i)).collect()
}

/// `t_i = 1/(2 Ahat_i(p, y_i) B_i(p))`.
fn refresh_t(params: &SystemParams, p: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let ahat: Vec<f64> = (0..params.n())
        .map(|i| {
            let s = surrogate_rate(params, p, y[i], i)?;
            if s.value > 0.0 {
                Ok(s.value)
            } else {
                Err(Error::SurrogateDomain { user: i, g: s.g })
            }
        })
        .collect::<Result<_>>()?;
    update_t(&ahat, &consumption(params, p)?)
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Minimizes the sum inverse energy efficiency from the strictly feasible
/// starting point `p_init`.
pub fn solve_siee(params: &SystemParams, cfg: &SolverConfig, p_init: &PowerAllocation) -> Result<SolveReport> {
    cfg.validate()?;
    let n = params.n();
    check_len(n, p_init.as_slice().len())?;
    if let Some((user, &value)) = p_init.as_slice().iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
        return Err(Error::Infeasible { user, value });
    }

    let (norm, unit) = params.normalized();
    let p0: Vec<f64> = p_init.as_slice().iter().map(|p| p / unit).collect();
    let delta1 = cfg.inner_tolerance(n);

    let mut y = update_y(&norm, &p0)?;
    let mut t = refresh_t(&norm, &p0, &y)?;
    let mut admm = AdmmState::new(p0.clone(), cfg.theta.theta(&t, norm.phi()))?;

    let mut objective_trajectory = vec![siee_objective(params, p_init.as_slice())?];
    let mut inner_iterations = Vec::new();
    let mut newton_iterations = Vec::new();
    let mut status = SolveStatus::IterationCap;

    for _ in 0..cfg.max_outer {
        admm.set_theta(cfg.theta.theta(&t, norm.phi()));
        let mut inner = 0;
        while inner < cfg.max_inner {
            inner += 1;
            admm.p = p_update(&norm, &t, &admm.q, &admm.u, admm.theta)?.into_inner();
            let sub = QSubproblem::new(&norm, &y, &t, admm.theta, &admm.p, &admm.u)?;
            let newton = q_update(&sub, &cfg.newton, &admm.q)?;
            newton_iterations.push(newton.iterations);
            let dual = admm.theta * primal_residual(&newton.q, &admm.q)?;
            admm.q = newton.q;
            if cfg.y_update == YUpdate::Inner {
                y = update_y(&norm, &admm.q)?;
            }
            admm.u = u_update(&admm.u, &admm.p, &admm.q)?;
            admm.iter += 1;
            let r = primal_residual(&admm.p, &admm.q)?;
            admm.primal_residual_history.push(r);
            if r < delta1 && dual < delta1 {
                break;
            }
        }
        inner_iterations.push(inner);

        if cfg.y_update == YUpdate::Outer {
            y = update_y(&norm, &admm.p)?;
        }
        let t_next = refresh_t(&norm, &admm.p, &y)?;
        let p_watts: Vec<f64> = admm.p.iter().map(|p| p * unit).collect();
        objective_trajectory.push(siee_objective(params, &p_watts)?);
        let t_change = l2_distance(&t_next, &t);
        t = t_next;
        if t_change < cfg.delta2 {
            status = SolveStatus::Converged;
            break;
        }
    }

    let state = TransformState::new(t, y)?;
    let f3 = surrogate_objective_f3(&norm, &admm.p, &admm.q, &state)?;
    let penalty_ratio = f3 / admm.penalty();

    let p_star =
        PowerAllocation::new(params, admm.p.iter().zip(params.p_max()).map(|(p, cap)| (p * unit).min(*cap)).collect())?;
    let per_user_iee = inverse_ee(params, p_star.as_slice())?;
    Ok(SolveReport {
        objective: per_user_iee.iter().sum(),
        p_star,
        objective_trajectory,
        per_user_iee,
        inner_iterations,
        newton_iterations,
        residual_trace: admm.primal_residual_history,
        penalty_ratio,
        theta: admm.theta,
        power_unit: unit,
        status,
    })
}

/// Default starting point: every BS at half its cap.
pub fn default_start(params: &SystemParams) -> PowerAllocation {
    PowerAllocation::scaled_cap(params, 0.5).expect("half the cap is feasible")
}
