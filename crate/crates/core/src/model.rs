//! Multi-cell downlink system model.
//!
//! `I` base stations each serve one user on a shared band. `gain[(i, j)]` is
//! the linear power gain from BS `i` to user `j`, so user `i` sees its own
//! signal through `gain[(i, i)]` and interference from every other BS `j`
//! through `gain[(j, i)]`. All powers are in watts; rates are in bits/s/Hz.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// One problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    gain: DMatrix<f64>,
    phi: Vec<f64>,
    circuit_power: Vec<f64>,
    p_max: Vec<f64>,
    noise: f64,
}

impl SystemParams {
    /// Builds an instance, checking that every dimension agrees and every
    /// entry is strictly positive.
    pub fn new(
        gain: DMatrix<f64>,
        phi: Vec<f64>,
        circuit_power: Vec<f64>,
        p_max: Vec<f64>,
        noise: f64,
    ) -> Result<Self> {
        let n = gain.nrows();
        if n == 0 {
            return Err(Error::InvalidParams("at least one BS/user pair is required".into()));
        }
        check_len(n, gain.ncols())?;
        check_len(n, phi.len())?;
        check_len(n, circuit_power.len())?;
        check_len(n, p_max.len())?;
        if let Some(g) = gain.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::InvalidParams(format!("channel gain must be positive, got {g}")));
        }
        for (name, v) in [("phi", &phi), ("circuit power", &circuit_power), ("power cap", &p_max)] {
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {x}")));
            }
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::InvalidParams(format!("noise power must be positive, got {noise}")));
        }
        Ok(Self { gain, phi, circuit_power, p_max, noise })
    }

    /// Instance with identical per-BS parameters.
    pub fn uniform(gain: DMatrix<f64>, phi: f64, circuit_power: f64, p_max: f64, noise: f64) -> Result<Self> {
        let n = gain.nrows();
        Self::new(gain, vec![phi; n], vec![circuit_power; n], vec![p_max; n], noise)
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    /// Gain from BS `from` to user `to`.
    #[inline]
    pub fn gain(&self, from: usize, to: usize) -> f64 {
        self.gain[(from, to)]
    }

    pub fn gain_matrix(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn circuit_power(&self) -> &[f64] {
        &self.circuit_power
    }

    pub fn p_max(&self) -> &[f64] {
        &self.p_max
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Rescales the instance to dimensionless units: powers are measured in
    /// multiples of the largest power cap and gains are divided by the noise
    /// power, so `noise() == 1` on the result. Returns the power unit in watts.
    ///
    /// SINR is unchanged by the rescaling, and every power-valued quantity
    /// (transmit power, consumption, objective) is divided by the unit.
    pub fn normalized(&self) -> (Self, f64) {
        let unit = self.p_max.iter().cloned().fold(0.0, f64::max);
        let scaled = Self {
            gain: &self.gain * (unit / self.noise),
            phi: self.phi.clone(),
            circuit_power: self.circuit_power.iter().map(|q| q / unit).collect(),
            p_max: self.p_max.iter().map(|p| p / unit).collect(),
            noise: 1.0,
        };
        (scaled, unit)
    }

    /// Interference plus noise seen by user `i`.
    #[inline]
    pub fn interference_plus_noise(&self, p: &[f64], i: usize) -> f64 {
        let mut acc = self.noise;
        for (j, pj) in p.iter().enumerate() {
            if j != i {
                acc += self.gain[(j, i)] * pj;
            }
        }
        acc
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n() })
        }
    }
}

/// Per-BS transmit powers in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation(Vec<f64>);

impl PowerAllocation {
    /// Validates membership in the box `0 <= p_i <= Pmax_i`.
    pub fn new(params: &SystemParams, p: Vec<f64>) -> Result<Self> {
        check_len(params.n(), p.len())?;
        for (user, (&v, &cap)) in p.iter().zip(params.p_max()).enumerate() {
            if !(v.is_finite() && (0.0..=cap).contains(&v)) {
                return Err(Error::Infeasible { user, value: v });
            }
        }
        Ok(Self(p))
    }

    /// Every BS at `fraction` of its cap.
    pub fn scaled_cap(params: &SystemParams, fraction: f64) -> Result<Self> {
        Self::new(params, params.p_max().iter().map(|c| c * fraction).collect())
    }

    /// Wraps a vector already known to lie in the box.
    pub(crate) fn from_clamped(p: Vec<f64>) -> Self {
        Self(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for PowerAllocation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn sinr(params: &SystemParams, p: &[f64], i: usize) -> Result<f64> {
    check_len(params.n(), p.len())?;
    params.check_index(i)?;
    Ok(params.gain(i, i) * p[i] / params.interference_plus_noise(p, i))
}

/// Achievable rate `log2(1 + SINR_i)` in bits/s/Hz.
pub fn rate(params: &SystemParams, p: &[f64], i: usize) -> Result<f64> {
    Ok(sinr(params, p, i)?.ln_1p() / std::f64::consts::LN_2)
}

/// Consumed power `phi_i p_i + Q_i` of BS `i`.
pub fn power_consumption(params: &SystemParams, p: &[f64], i: usize) -> Result<f64> {
    check_len(params.n(), p.len())?;
    params.check_index(i)?;
    Ok(params.phi[i] * p[i] + params.circuit_power[i])
}

/// Inverse energy efficiency of every user, `B_i / A_i`.
pub fn inverse_ee(params: &SystemParams, p: &[f64]) -> Result<Vec<f64>> {
    check_len(params.n(), p.len())?;
    (0..params.n())
        .map(|i| {
            let a = rate(params, p, i)?;
            if !(a > 0.0) {
                return Err(Error::ZeroRateUser { user: i });
            }
            Ok(power_consumption(params, p, i)? / a)
        })
        .collect()
}

/// Sum inverse energy efficiency `sum_i B_i(p) / A_i(p)`.
pub fn siee_objective(params: &SystemParams, p: &[f64]) -> Result<f64> {
    Ok(inverse_ee(params, p)?.iter().sum())
}

/// Sum rate, used by the rate-maximization baseline.
pub fn sum_rate(params: &SystemParams, p: &[f64]) -> Result<f64> {
    (0..params.n()).map(|i| rate(params, p, i)).sum()
}

/// Quadratic-transform surrogate of one user's rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateRate {
    /// Argument of the logarithm.
    pub g: f64,
    /// `log2(g)`.
    pub value: f64,
}

/// `g_i(q, y_i) = 1 + 2 y_i sqrt(h_ii q_i) - y_i^2 (interference + noise)`.
///
/// Concave in `y_i` with its maximum at [`crate::transform::update_y`], where
/// `log2(g)` equals the true rate.
pub fn surrogate_rate(params: &SystemParams, q: &[f64], y_i: f64, i: usize) -> Result<SurrogateRate> {
    check_len(params.n(), q.len())?;
    params.check_index(i)?;
    if !(q[i] >= 0.0) {
        return Err(Error::InvalidOperatingPoint { user: i, value: q[i] });
    }
    let g = surrogate_arg(params, q, y_i, i);
    if !(g > 0.0) {
        return Err(Error::SurrogateDomain { user: i, g });
    }
    Ok(SurrogateRate { g, value: g.log2() })
}

#[inline]
pub(crate) fn surrogate_arg(params: &SystemParams, q: &[f64], y_i: f64, i: usize) -> f64 {
    1.0 + 2.0 * y_i * (params.gain(i, i) * q[i]).sqrt() - y_i * y_i * params.interference_plus_noise(q, i)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::Rng;

    /// Random instance with O(1) quantities: strong direct links, weaker
    /// cross links, unit noise.
    pub fn random_params<R: Rng>(rng: &mut R, n: usize) -> SystemParams {
        let gain =
            DMatrix::from_fn(
                n,
                n,
                |i, j| {
                    if i == j {
                        rng.random_range(5.0..50.0)
                    } else {
                        rng.random_range(0.05..2.0)
                    }
                },
            );
        let phi = (0..n).map(|_| rng.random_range(1.0..4.0)).collect();
        let q = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let cap = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        SystemParams::new(gain, phi, q, cap, 1.0).unwrap()
    }

    pub fn random_interior<R: Rng>(rng: &mut R, params: &SystemParams) -> Vec<f64> {
        params.p_max().iter().map(|c| c * rng.random_range(0.05..1.0)).collect()
    }

    pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }
}
