//! Fraction transform for sum-of-ratios minimization.
//!
//! A ratio `B/A` with positive `A, B` is replaced by `t B^2 + 1/(4 t A^2)`
//! with an auxiliary `t > 0`. The replacement equals
//! `(sqrt(t) B - 1/(2 sqrt(t) A))^2 + B/A`, so it upper-bounds the ratio and
//! touches it at `t = 1/(2 A B)`. Minimizing over `t` and the original
//! variables jointly therefore recovers the ratio minimizer.
//!
//! For the rate denominator the quadratic-transform auxiliary `y` further
//! replaces `A_i` by the surrogate `log2 g_i(q, y_i)`, which is concave in `q`.

use crate::error::{check_len, Error, Result};
use crate::model::{power_consumption, surrogate_arg, SystemParams};

/// Auxiliary vectors of the fraction (`t`) and quadratic (`y`) transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformState {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

impl TransformState {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_len(t.len(), y.len())?;
        check_positive(&t)?;
        check_positive(&y)?;
        Ok(Self { t, y })
    }
}

fn check_positive(v: &[f64]) -> Result<()> {
    match v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
        Some((index, &value)) => Err(Error::InvalidTransformOperand { index, value }),
        None => Ok(()),
    }
}

/// `t_i = 1 / (2 A_i B_i)`, the value that makes each transformed term tight.
pub fn update_t(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_len(a.len(), b.len())?;
    check_positive(a)?;
    check_positive(b)?;
    Ok(a.iter().zip(b).map(|(a, b)| 0.5 / (a * b)).collect())
}

/// One transformed term `t B^2 + 1/(4 t A^2)`.
#[inline]
pub fn fraction_term(t: f64, a: f64, b: f64) -> f64 {
    t * b * b + 0.25 / (t * a * a)
}

/// `y_i = sqrt(h_ii q_i) / (interference_i(q) + noise)`, the maximizer of
/// the surrogate argument `g_i` in `y_i`.
pub fn update_y(params: &SystemParams, q: &[f64]) -> Result<Vec<f64>> {
    check_len(params.n(), q.len())?;
    q.iter()
        .enumerate()
        .map(|(i, &qi)| {
            if !(qi.is_finite() && qi > 0.0) {
                return Err(Error::InvalidOperatingPoint { user: i, value: qi });
            }
            Ok((params.gain(i, i) * qi).sqrt() / params.interference_plus_noise(q, i))
        })
        .collect()
}

/// Transformed objective
/// `sum_i t_i B_i(p)^2 + sum_i 1 / (4 t_i Ahat_i(q, y_i)^2)`.
///
/// Pass `p == q` for the coupled form. Fails when a surrogate rate is not
/// strictly positive, where the second sum is undefined.
pub fn surrogate_objective_f3(params: &SystemParams, p: &[f64], q: &[f64], state: &TransformState) -> Result<f64> {
    let n = params.n();
    check_len(n, p.len())?;
    check_len(n, q.len())?;
    check_len(n, state.t.len())?;
    check_len(n, state.y.len())?;
    let mut total = 0.0;
    for i in 0..n {
        if !(q[i] >= 0.0) {
            return Err(Error::InvalidOperatingPoint { user: i, value: q[i] });
        }
        let g = surrogate_arg(params, q, state.y[i], i);
        if !(g > 1.0) {
            return Err(Error::SurrogateDomain { user: i, g });
        }
        let b = power_consumption(params, p, i)?;
        let t = state.t[i];
        total += t * b * b + 0.25 / (t * g.log2().powi(2));
    }
    Ok(total)
}
