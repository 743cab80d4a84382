//! Scaled-form ADMM for the fixed-`(t, y)` power subproblem.
//!
//! The transformed objective separates into a power-consumption part in the
//! box-constrained copy `p` and a rate part in the unconstrained copy `q`:
//!
//! ```text
//! p <- argmin_{p in box} sum_i t_i B_i(p)^2            + theta/2 |p - q + u|^2
//! q <- argmin_q          sum_i 1/(4 t_i Ahat_i(q)^2)   + theta/2 |p - q + u|^2
//! u <- u + p - q
//! ```
//!
//! The `p` step has a per-BS closed form. The `q` step is solved by Newton's
//! method on its stationarity system `c(q) = 0`, where `c` is the negated
//! gradient of the `q` objective.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::model::{surrogate_arg, PowerAllocation, SystemParams};

const LN_4: f64 = 2.0 * LN_2;
const LN_16: f64 = 4.0 * LN_2;

/// Safeguards for the Newton solve of the `q` step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Convergence threshold on `max_i |c_i(q)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Backtracking factor applied to a rejected step.
    pub damping_shrink: f64,
    /// Lower bound on every accepted `q_i`.
    pub domain_eps: f64,
    /// Lower bound on `g_i - 1` at every accepted iterate, keeping each
    /// surrogate rate strictly positive.
    pub g_floor: f64,
    /// Maximum number of step halvings per iteration.
    pub max_backtracks: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 50, damping_shrink: 0.5, domain_eps: 1e-12, g_floor: 1e-9, max_backtracks: 60 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.max_iter >= 1
            && self.damping_shrink > 0.0
            && self.damping_shrink < 1.0
            && self.domain_eps > 0.0
            && self.g_floor > 0.0
            && self.max_backtracks >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("newton config out of range: {self:?}")))
        }
    }
}

/// Consensus triple plus penalty for one inner ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Scaled dual variable.
    pub u: Vec<f64>,
    pub theta: f64,
    pub iter: usize,
    pub primal_residual_history: Vec<f64>,
}

impl AdmmState {
    /// Starts from `q = p` and a zero dual.
    pub fn new(p: Vec<f64>, theta: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::InvalidConfig(format!("penalty must be positive, got {theta}")));
        }
        let n = p.len();
        Ok(Self { q: p.clone(), p, u: vec![0.0; n], theta, iter: 0, primal_residual_history: Vec::new() })
    }

    /// Changes the penalty, rescaling the scaled dual so the unscaled
    /// multiplier `theta * u` is preserved.
    pub fn set_theta(&mut self, theta: f64) {
        let ratio = self.theta / theta;
        self.u.iter_mut().for_each(|u| *u *= ratio);
        self.theta = theta;
    }

    /// Augmented-Lagrangian penalty `theta/2 |p - q + u|^2`.
    pub fn penalty(&self) -> f64 {
        let s: f64 = self.p.iter().zip(&self.q).zip(&self.u).map(|((p, q), u)| (p - q + u).powi(2)).sum();
        0.5 * self.theta * s
    }
}

/// Closed-form minimizer of
/// `t_i (phi_i p_i + Q_i)^2 + theta/2 (p_i - q_i + u_i)^2` over `[0, Pmax_i]`.
pub fn p_update(params: &SystemParams, t: &[f64], q: &[f64], u: &[f64], theta: f64) -> Result<PowerAllocation> {
    let n = params.n();
    check_len(n, t.len())?;
    check_len(n, q.len())?;
    check_len(n, u.len())?;
    let p = (0..n)
        .map(|i| {
            let phi = params.phi()[i];
            let num = theta * (q[i] - u[i]) - 2.0 * t[i] * phi * params.circuit_power()[i];
            let den = 2.0 * t[i] * phi * phi + theta;
            (num / den).clamp(0.0, params.p_max()[i])
        })
        .collect();
    Ok(PowerAllocation::from_clamped(p))
}

/// `u + p - q`.
pub fn u_update(u: &[f64], p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    check_len(u.len(), p.len())?;
    check_len(u.len(), q.len())?;
    Ok(u.iter().zip(p).zip(q).map(|((u, p), q)| u + p - q).collect())
}

/// Euclidean norm of `p - q`.
pub fn primal_residual(p: &[f64], q: &[f64]) -> Result<f64> {
    check_len(p.len(), q.len())?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

/// Data of one `q` step: everything except `q` itself is held fixed.
#[derive(Debug, Clone, Copy)]
pub struct QSubproblem<'a> {
    pub params: &'a SystemParams,
    pub y: &'a [f64],
    pub t: &'a [f64],
    pub theta: f64,
    pub p: &'a [f64],
    pub u: &'a [f64],
}

/// Per-user surrogate quantities at a point of the domain.
struct SurrogateEval {
    g: Vec<f64>,
    ahat: Vec<f64>,
}

impl<'a> QSubproblem<'a> {
    pub fn new(
        params: &'a SystemParams,
        y: &'a [f64],
        t: &'a [f64],
        theta: f64,
        p: &'a [f64],
        u: &'a [f64],
    ) -> Result<Self> {
        let n = params.n();
        for len in [y.len(), t.len(), p.len(), u.len()] {
            check_len(n, len)?;
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidConfig(format!("penalty must be positive, got {theta}")));
        }
        Ok(Self { params, y, t, theta, p, u })
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    fn eval(&self, q: &[f64]) -> Result<SurrogateEval> {
        let n = self.n();
        check_len(n, q.len())?;
        let mut g = Vec::with_capacity(n);
        let mut ahat = Vec::with_capacity(n);
        for i in 0..n {
            if !(q[i] > 0.0) {
                return Err(Error::InvalidOperatingPoint { user: i, value: q[i] });
            }
            let gi = surrogate_arg(self.params, q, self.y[i], i);
            if !(gi > 1.0) {
                return Err(Error::SurrogateDomain { user: i, g: gi });
            }
            g.push(gi);
            ahat.push(gi.log2());
        }
        Ok(SurrogateEval { g, ahat })
    }

    /// Whether `q` satisfies the Newton safeguards.
    pub fn in_domain(&self, q: &[f64], cfg: &NewtonConfig) -> bool {
        q.len() == self.n()
            && q.iter().all(|&x| x.is_finite() && x >= cfg.domain_eps)
            && (0..self.n()).all(|i| surrogate_arg(self.params, q, self.y[i], i) - 1.0 >= cfg.g_floor)
    }

    /// `sum_i 1/(4 t_i Ahat_i(q)^2) + theta/2 |p - q + u|^2`.
    pub fn objective(&self, q: &[f64]) -> Result<f64> {
        let s = self.eval(q)?;
        let rate_part: f64 = s.ahat.iter().zip(self.t).map(|(a, t)| 0.25 / (t * a * a)).sum();
        Ok(rate_part + self.theta * self.penalty_sq(q) * 0.5)
    }

    /// Rate part of the objective alone.
    pub fn rate_part(&self, q: &[f64]) -> Result<f64> {
        let s = self.eval(q)?;
        Ok(s.ahat.iter().zip(self.t).map(|(a, t)| 0.25 / (t * a * a)).sum())
    }

    fn penalty_sq(&self, q: &[f64]) -> f64 {
        (0..self.n()).map(|i| (self.p[i] - q[i] + self.u[i]).powi(2)).sum()
    }

    /// Stationarity residual `c(q)`, the negated gradient of [`Self::objective`]:
    ///
    /// ```text
    /// c_i = y_i sqrt(h_ii/q_i) / (ln4 t_i Ahat_i^3 g_i)
    ///     - sum_{j != i} y_j^2 h_ij / (ln4 t_j Ahat_j^3 g_j)
    ///     + theta (p_i - q_i + u_i)
    /// ```
    pub fn residual(&self, q: &[f64]) -> Result<Vec<f64>> {
        let s = self.eval(q)?;
        let n = self.n();
        let h = self.params;
        let w: Vec<f64> = (0..n).map(|j| 1.0 / (LN_4 * self.t[j] * s.ahat[j].powi(3) * s.g[j])).collect();
        Ok((0..n)
            .map(|i| {
                let own = w[i] * self.y[i] * (h.gain(i, i) / q[i]).sqrt();
                let cross: f64 = (0..n).filter(|&j| j != i).map(|j| w[j] * self.y[j] * self.y[j] * h.gain(i, j)).sum();
                own - cross + self.theta * (self.p[i] - q[i] + self.u[i])
            })
            .collect())
    }

    /// Jacobian `J[(i, m)] = d c_i / d q_m` in closed form, with
    ///
    /// ```text
    /// D_i = 3 / (ln2 Ahat_i^4 g_i^2) + 1 / (Ahat_i^3 g_i^2)
    /// ```
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let s = self.eval(q)?;
        let n = self.n();
        let h = self.params;
        let (y, t) = (self.y, self.t);
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let (a, g) = (s.ahat[i], s.g[i]);
                3.0 / (LN_2 * a.powi(4) * g * g) + 1.0 / (a.powi(3) * g * g)
            })
            .collect();
        // y_j^4 D_j / (ln4 t_j), shared by every cross-interference sum
        let cross_w: Vec<f64> = (0..n).map(|j| y[j].powi(4) * d[j] / (LN_4 * t[j])).collect();

        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            let hii = h.gain(i, i);
            let sqrt_ratio = (hii / q[i]).sqrt();
            for m in 0..n {
                jac[(i, m)] = if m == i {
                    let cross: f64 = (0..n).filter(|&j| j != i).map(|j| cross_w[j] * h.gain(i, j).powi(2)).sum();
                    -y[i] * y[i] * hii * d[i] / (LN_4 * t[i] * q[i])
                        - y[i] * (hii / q[i].powi(3)).sqrt() / (LN_16 * t[i] * s.ahat[i].powi(3) * s.g[i])
                        - cross
                        - self.theta
                } else {
                    let cross: f64 =
                        (0..n).filter(|&j| j != i && j != m).map(|j| cross_w[j] * h.gain(m, j) * h.gain(i, j)).sum();
                    y[i].powi(3) * h.gain(m, i) * sqrt_ratio * d[i] / (LN_4 * t[i]) - cross
                        + y[m].powi(3) * h.gain(i, m) * (h.gain(m, m) / q[m]).sqrt() * d[m] / (LN_4 * t[m])
                };
            }
        }
        Ok(jac)
    }
}

/// Diagnostics of one Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub q: Vec<f64>,
    pub iterations: usize,
    /// Iterations whose full Newton step was shortened.
    pub damped_steps: usize,
    /// Iterations that fell back to a gradient step.
    pub gradient_steps: usize,
    /// `max_i |c_i|` at the start and after every iteration.
    pub residual_trace: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the `q` step by safeguarded Newton iteration from `q_init`.
///
/// Each full step is shortened by `damping_shrink` until the trial point is
/// inside the safeguarded domain and `|c|_2` decreases. When the Jacobian is
/// singular or no shortened Newton step is acceptable, a backtracked gradient
/// step on the objective is taken instead.
pub fn q_update(sub: &QSubproblem<'_>, cfg: &NewtonConfig, q_init: &[f64]) -> Result<NewtonOutcome> {
    cfg.validate()?;
    check_len(sub.n(), q_init.len())?;
    if !sub.in_domain(q_init, cfg) {
        sub.eval(q_init)?;
        let user = (0..sub.n())
            .find(|&i| q_init[i] < cfg.domain_eps || surrogate_arg(sub.params, q_init, sub.y[i], i) - 1.0 < cfg.g_floor)
            .unwrap_or(0);
        return Err(Error::InvalidOperatingPoint { user, value: q_init[user] });
    }
    let mut q = q_init.to_vec();
    let mut c = sub.residual(&q)?;
    let mut out = NewtonOutcome {
        q: Vec::new(),
        iterations: 0,
        damped_steps: 0,
        gradient_steps: 0,
        residual_trace: vec![inf_norm(&c)],
    };

    for iter in 0..cfg.max_iter {
        if inf_norm(&c) <= cfg.tol {
            out.iterations = iter;
            out.q = q;
            return Ok(out);
        }
        let jac = sub.jacobian(&q)?;
        let rhs = -DVector::from_column_slice(&c);
        let step = jac.lu().solve(&rhs).filter(|s| s.iter().all(|x| x.is_finite()));

        let accepted = step.as_ref().and_then(|step| {
            let c_norm = two_norm(&c);
            let mut alpha = 1.0;
            for _ in 0..cfg.max_backtracks {
                let trial: Vec<f64> = q.iter().zip(step.iter()).map(|(q, d)| q + alpha * d).collect();
                if sub.in_domain(&trial, cfg) {
                    if let Ok(ct) = sub.residual(&trial) {
                        if two_norm(&ct) < (1.0 - 1e-4 * alpha) * c_norm {
                            return Some((trial, ct, alpha < 1.0));
                        }
                    }
                }
                alpha *= cfg.damping_shrink;
            }
            None
        });

        match accepted {
            Some((trial, ct, damped)) => {
                q = trial;
                c = ct;
                out.damped_steps += usize::from(damped);
            }
            None => match gradient_step(sub, cfg, &q, &c, &jac_scale(sub, &q)?) {
                Some((trial, ct)) => {
                    q = trial;
                    c = ct;
                    out.gradient_steps += 1;
                }
                None if step.is_none() => return Err(Error::SingularJacobian),
                None => {
                    return Err(Error::NewtonDiverged { iterations: iter + 1, residual: inf_norm(&c) });
                }
            },
        }
        out.residual_trace.push(inf_norm(&c));
    }

    if inf_norm(&c) <= cfg.tol {
        out.iterations = cfg.max_iter;
        out.q = q;
        Ok(out)
    } else {
        Err(Error::NewtonDiverged { iterations: cfg.max_iter, residual: inf_norm(&c) })
    }
}

/// Diagonal curvature estimate used to size the gradient fallback step.
fn jac_scale(sub: &QSubproblem<'_>, q: &[f64]) -> Result<Vec<f64>> {
    let jac = sub.jacobian(q)?;
    Ok((0..sub.n()).map(|i| jac[(i, i)].abs().max(sub.theta)).collect())
}

/// Diagonally scaled steepest descent with Armijo backtracking on the
/// objective. `c` is the negated gradient, so `q + alpha c / scale` descends.
fn gradient_step(
    sub: &QSubproblem<'_>,
    cfg: &NewtonConfig,
    q: &[f64],
    c: &[f64],
    scale: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let f0 = sub.objective(q).ok()?;
    let dir: Vec<f64> = c.iter().zip(scale).map(|(c, s)| c / s).collect();
    let slope: f64 = c.iter().zip(&dir).map(|(c, d)| c * d).sum();
    let mut alpha = 1.0;
    for _ in 0..cfg.max_backtracks {
        let trial: Vec<f64> = q.iter().zip(&dir).map(|(q, d)| q + alpha * d).collect();
        if sub.in_domain(&trial, cfg) {
            if let (Ok(f), Ok(ct)) = (sub.objective(&trial), sub.residual(&trial)) {
                if f <= f0 - 1e-4 * alpha * slope {
                    return Some((trial, ct));
                }
            }
        }
        alpha *= cfg.damping_shrink;
    }
    None
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::testutil::*;
    use crate::model::{power_consumption, rate, SystemParams};
    use crate::solver::golden_section_min;
    use crate::transform::{update_t, update_y};
    use approx::assert_relative_eq;
    use rand::Rng;

    /// Random `q` subproblem anchored at an interior point, with `t`, `y`
    /// tight there and a curvature-matched penalty.
    pub(crate) struct Fixture {
        pub params: SystemParams,
        pub anchor: Vec<f64>,
        pub y: Vec<f64>,
        pub t: Vec<f64>,
        pub theta: f64,
        pub p: Vec<f64>,
        pub u: Vec<f64>,
    }

    impl Fixture {
        pub fn random<R: Rng>(rng: &mut R, n: usize) -> Self {
            let params = random_params(rng, n);
            let anchor = random_interior(rng, &params);
            let a: Vec<f64> = (0..n).map(|i| rate(&params, &anchor, i).unwrap()).collect();
            let b: Vec<f64> = (0..n).map(|i| power_consumption(&params, &anchor, i).unwrap()).collect();
            let t = update_t(&a, &b).unwrap();
            let y = update_y(&params, &anchor).unwrap();
            let theta = rng.random_range(0.5..5.0) * t.iter().zip(params.phi()).map(|(t, f)| t * f * f).sum::<f64>();
            let p = random_interior(rng, &params);
            let u = (0..n).map(|_| rng.random_range(-0.2..0.2)).collect();
            Self { params, anchor, y, t, theta, p, u }
        }

        pub fn sub(&self) -> QSubproblem<'_> {
            QSubproblem::new(&self.params, &self.y, &self.t, self.theta, &self.p, &self.u).unwrap()
        }
    }

    /// Cyclic coordinate minimization with golden-section line searches;
    /// infeasible points evaluate to +inf.
    pub(crate) fn coordinate_descent_min(sub: &QSubproblem<'_>, start: &[f64]) -> Vec<f64> {
        let f = |q: &[f64]| sub.objective(q).unwrap_or(f64::INFINITY);
        let mut q = start.to_vec();
        let hi = 10.0 * sub.params.p_max().iter().cloned().fold(0.0, f64::max);
        for _ in 0..2000 {
            let before = q.clone();
            for k in 0..q.len() {
                let mut trial = q.clone();
                let (xk, _) = golden_section_min(
                    |x| {
                        trial[k] = x;
                        f(&trial)
                    },
                    1e-14,
                    hi,
                    1e-15,
                );
                q[k] = xk;
            }
            if before.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-14 * b.abs().max(1e-3)) {
                break;
            }
        }
        q
    }

    #[test]
    fn p_update_examples() {
        let params =
            SystemParams::new(DMatrix::from_element(1, 1, 1.0), vec![1.0], vec![1e-300], vec![10.0], 1.0).unwrap();
        let p = p_update(&params, &[0.5], &[1.0], &[0.0], 1.0).unwrap();
        assert_relative_eq!(p.as_slice()[0], 0.5, epsilon = 1e-15);
        let p = p_update(&params, &[0.5], &[0.0], &[1.0], 1.0).unwrap();
        assert_eq!(p.as_slice()[0], 0.0);
        let p = p_update(&params, &[0.5], &[100.0], &[0.0], 100.0).unwrap();
        assert_eq!(p.as_slice()[0], 10.0);
        assert!(p_update(&params, &[0.5, 0.5], &[1.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn p_update_matches_scalar_minimization() {
        let mut rng = rng(31);
        for _ in 0..300 {
            let params = random_params(&mut rng, 3);
            let t: Vec<f64> = (0..3).map(|_| rng.random_range(0.01..10.0)).collect();
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..3.0)).collect();
            let u: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let theta = rng.random_range(0.01..100.0);
            let p = p_update(&params, &t, &q, &u, theta).unwrap();
            for i in 0..3 {
                let (phi, qc) = (params.phi()[i], params.circuit_power()[i]);
                // |f'| is V-shaped around the minimizer and resolves it to
                // rounding precision, unlike f itself
                let slope = |x: f64| (2.0 * t[i] * phi * (phi * x + qc) + theta * (x - q[i] + u[i])).abs();
                let (x, _) = golden_section_min(slope, 0.0, params.p_max()[i], 1e-13);
                assert!((p.as_slice()[i] - x).abs() < 1e-8, "{} vs {x}", p.as_slice()[i]);
            }
        }
    }

    #[test]
    fn p_update_always_feasible() {
        let mut rng = rng(32);
        for _ in 0..500 {
            let params = random_params(&mut rng, 4);
            let big_q = SystemParams::new(
                params.gain_matrix().clone(),
                params.phi().to_vec(),
                params.circuit_power().iter().map(|x| x * 1e6).collect(),
                params.p_max().to_vec(),
                1.0,
            )
            .unwrap();
            let t: Vec<f64> = (0..4).map(|_| rng.random_range(1e-6..1e3)).collect();
            let q: Vec<f64> = (0..4).map(|_| rng.random_range(-1e3..1e3)).collect();
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1e3..1e3)).collect();
            for theta in [1e-300, 1e-12, 1.0, 1e12] {
                for ps in [&params, &big_q] {
                    let p = p_update(ps, &t, &q, &u, theta).unwrap();
                    assert!(PowerAllocation::new(ps, p.into_inner()).is_ok());
                }
            }
        }
    }

    #[test]
    fn u_update_and_residual_examples() {
        assert_eq!(u_update(&[0.0, 0.0], &[1.0, 2.0], &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(u_update(&[1.0], &[2.0], &[1.0]).unwrap(), vec![2.0]);
        assert_eq!(u_update(&[0.5, -4.0], &[5.0, 1.0], &[5.0, 1.0]).unwrap(), vec![0.5, -4.0]);
        assert!(u_update(&[0.0], &[1.0, 2.0], &[1.0]).is_err());

        assert_eq!(primal_residual(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(primal_residual(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        let q = [0.7, 0.2];
        let p = [0.7 + 3e-3, 0.2 + 4e-3];
        assert_relative_eq!(primal_residual(&p, &q).unwrap(), 5e-3, max_relative = 1e-9);
        assert!(primal_residual(&[1.0], &[]).is_err());
    }

    #[test]
    fn penalty_preserved_by_theta_rescale() {
        let mut s = AdmmState::new(vec![1.0, 2.0], 2.0).unwrap();
        s.u = vec![0.5, -0.25];
        let multiplier: Vec<f64> = s.u.iter().map(|u| u * s.theta).collect();
        s.set_theta(8.0);
        let after: Vec<f64> = s.u.iter().map(|u| u * s.theta).collect();
        assert_eq!(multiplier, after);
        assert!(AdmmState::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn residual_matches_finite_differences_of_objective() {
        let mut rng = rng(33);
        for _ in 0..100 {
            let n = rng.random_range(1..6);
            let fx = Fixture::random(&mut rng, n);
            let sub = fx.sub();
            let q = &fx.anchor;
            let c = sub.residual(q).unwrap();
            for i in 0..n {
                let h = 1e-6 * q[i];
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[i] += h;
                qm[i] -= h;
                let fd = -(sub.objective(&qp).unwrap() - sub.objective(&qm).unwrap()) / (2.0 * h);
                let scale = c[i].abs().max(1e-3 * inf_norm(&c)).max(1e-8);
                assert!((c[i] - fd).abs() / scale < 1e-5, "c={} fd={fd}", c[i]);
            }
        }
    }

    #[test]
    fn residual_single_bs_reduction() {
        let params = SystemParams::uniform(DMatrix::from_element(1, 1, 4.0), 1.0, 1.0, 2.0, 1.0).unwrap();
        let (y, t, theta, p, u, q) = (0.7, 0.3, 2.0, 1.1, 0.05, 0.9);
        let (ys, ts, ps, us) = ([y], [t], [p], [u]);
        let sub = QSubproblem::new(&params, &ys, &ts, theta, &ps, &us).unwrap();
        let g: f64 = 1.0 + 2.0 * y * (4.0f64 * q).sqrt() - y * y;
        let a = g.log2();
        let expected = y * (4.0 / q).sqrt() / (LN_4 * t * a.powi(3) * g) + theta * (p - q + u);
        assert_relative_eq!(sub.residual(&[q]).unwrap()[0], expected, max_relative = 1e-14);

        let d = 3.0 / (LN_2 * a.powi(4) * g * g) + 1.0 / (a.powi(3) * g * g);
        let jd =
            -y * y * 4.0 * d / (LN_4 * t * q) - y * (4.0 / (q * q * q)).sqrt() / (LN_16 * t * a.powi(3) * g) - theta;
        let jac = sub.jacobian(&[q]).unwrap();
        assert_eq!(jac.shape(), (1, 1));
        assert_relative_eq!(jac[(0, 0)], jd, max_relative = 1e-14);
    }

    #[test]
    fn residual_vanishes_at_numeric_minimizer() {
        let mut rng = rng(34);
        for _ in 0..10 {
            let fx = Fixture::random(&mut rng, 2);
            let sub = fx.sub();
            let q = coordinate_descent_min(&sub, &fx.anchor);
            let c = sub.residual(&q).unwrap();
            assert!(inf_norm(&c) < 1e-6, "|c| = {}", inf_norm(&c));
        }
    }

    /// Entrywise relative error against central differences of the residual.
    pub(crate) fn jacobian_fd_error(sub: &QSubproblem<'_>, q: &[f64]) -> f64 {
        let n = q.len();
        let jac = sub.jacobian(q).unwrap();
        let mut fd = DMatrix::zeros(n, n);
        for m in 0..n {
            let h = 1e-5 * q[m];
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[m] += h;
            qm[m] -= h;
            let cp = sub.residual(&qp).unwrap();
            let cm = sub.residual(&qm).unwrap();
            for i in 0..n {
                fd[(i, m)] = (cp[i] - cm[i]) / (2.0 * h);
            }
        }
        let floor = 1e-6 * fd.amax();
        jac.iter().zip(fd.iter()).map(|(a, b)| (a - b).abs() / b.abs().max(floor)).fold(0.0, f64::max)
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = rng(35);
        for _ in 0..100 {
            let n = rng.random_range(1..7);
            let fx = Fixture::random(&mut rng, n);
            let err = jacobian_fd_error(&fx.sub(), &fx.anchor);
            assert!(err < 1e-4, "n={n} err={err}");
        }
    }

    #[test]
    fn jacobian_symmetric_for_symmetric_instance() {
        let params =
            SystemParams::uniform(DMatrix::from_row_slice(2, 2, &[10.0, 0.5, 0.5, 10.0]), 2.0, 1.0, 1.0, 1.0).unwrap();
        let q = [0.4, 0.4];
        let y = update_y(&params, &q).unwrap();
        let sub = QSubproblem::new(&params, &y, &[0.3, 0.3], 1.5, &[0.5, 0.5], &[0.01, 0.01]).unwrap();
        let jac = sub.jacobian(&q).unwrap();
        assert_relative_eq!(jac[(0, 0)], jac[(1, 1)], max_relative = 1e-14);
        assert_relative_eq!(jac[(0, 1)], jac[(1, 0)], max_relative = 1e-14);
    }

    #[test]
    fn residual_rejects_out_of_domain() {
        let mut rng = rng(36);
        let fx = Fixture::random(&mut rng, 2);
        let sub = fx.sub();
        assert!(matches!(sub.residual(&[0.0, 1.0]), Err(Error::InvalidOperatingPoint { user: 0, .. })));
        assert!(matches!(sub.residual(&[1e-9, 1.0]), Err(Error::SurrogateDomain { .. })));
        assert!(sub.jacobian(&[1.0]).is_err());
    }

    #[test]
    fn q_update_fixed_point_returns_immediately() {
        let mut rng = rng(37);
        let fx = Fixture::random(&mut rng, 3);
        let sub = fx.sub();
        let cfg = NewtonConfig::default();
        let solved = q_update(&sub, &cfg, &fx.anchor).unwrap();
        let again = q_update(&sub, &cfg, &solved.q).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.damped_steps, 0);
        assert_eq!(again.q, solved.q);
    }

    #[test]
    fn q_update_matches_numeric_minimizer() {
        let mut rng = rng(38);
        for _ in 0..10 {
            let fx = Fixture::random(&mut rng, 2);
            let sub = fx.sub();
            let newton = q_update(&sub, &NewtonConfig::default(), &fx.anchor).unwrap();
            let oracle = coordinate_descent_min(&sub, &fx.anchor);
            let (fn_, fo) = (sub.objective(&newton.q).unwrap(), sub.objective(&oracle).unwrap());
            assert!((fn_ - fo).abs() <= 1e-6 * fo, "{fn_} vs {fo}");
        }
    }

    #[test]
    fn q_update_converges_quickly() {
        let mut rng = rng(39);
        let cfg = NewtonConfig::default();
        for n in [2, 4, 8] {
            for _ in 0..30 {
                let fx = Fixture::random(&mut rng, n);
                let sub = fx.sub();
                let out = q_update(&sub, &cfg, &fx.anchor).unwrap();
                assert!(out.iterations <= 20, "n={n}: {} iterations", out.iterations);
                assert!(inf_norm(&sub.residual(&out.q).unwrap()) <= cfg.tol);
                assert!(sub.in_domain(&out.q, &cfg));
            }
        }
    }

    #[test]
    fn q_update_rejects_start_outside_domain() {
        let mut rng = rng(40);
        let fx = Fixture::random(&mut rng, 2);
        assert!(q_update(&fx.sub(), &NewtonConfig::default(), &[1e-9, 1e-9]).is_err());
        let bad = NewtonConfig { damping_shrink: 1.0, ..NewtonConfig::default() };
        assert!(matches!(q_update(&fx.sub(), &bad, &fx.anchor), Err(Error::InvalidConfig(_))));
    }
}
