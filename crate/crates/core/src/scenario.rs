//! Random multicell instances: one BS per cell on a line, one user per cell,
//! distance-based path loss.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Physical parameters of a generated instance. Powers are in watts; the
/// dB-valued fields are converted when the instance is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub n_bs: usize,
    pub cell_radius_m: f64,
    pub pathloss_exponent: f64,
    /// Combined antenna and path gain at 1 m.
    pub gain_at_1m_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub phi: f64,
    pub circuit_power_w: f64,
    pub p_max_w: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_bs: 3,
            cell_radius_m: 20.0,
            pathloss_exponent: 3.5,
            gain_at_1m_db: -70.0,
            noise_psd_dbm_hz: -170.0,
            noise_figure_db: 10.0,
            bandwidth_hz: 1e4,
            phi: 2.5,
            circuit_power_w: 0.5e-3,
            p_max_w: 0.3e-3,
            seed: 0,
        }
    }
}

/// Nearest distance a user may be from its BS.
pub const MIN_DISTANCE_M: f64 = 1.0;

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.pathloss_exponent, self.gain_at_1m_db, self.noise_psd_dbm_hz, self.noise_figure_db]
            .iter()
            .all(|v| v.is_finite());
        let positive = [self.cell_radius_m, self.bandwidth_hz, self.phi, self.circuit_power_w, self.p_max_w]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if self.n_bs == 0 || !finite || !positive || self.cell_radius_m < MIN_DISTANCE_M {
            return Err(Error::InvalidConfig(format!("scenario config out of range: {self:?}")));
        }
        Ok(())
    }

    /// Noise power over the band, in watts.
    pub fn noise_power_w(&self) -> f64 {
        10f64.powf((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz * 10f64.powf(self.noise_figure_db / 10.0)
    }

    /// Channel gain at distance `d` metres.
    pub fn path_gain(&self, d: f64) -> f64 {
        10f64.powf(self.gain_at_1m_db / 10.0) * d.powf(-self.pathloss_exponent)
    }

    fn bs_position(&self, i: usize) -> (f64, f64) {
        (2.0 * self.cell_radius_m * i as f64, 0.0)
    }

    /// Builds the instance with user `i` at polar offset `(r_i, angle_i)`
    /// from BS `i`.
    pub fn with_user_offsets(&self, offsets: &[(f64, f64)]) -> Result<SystemParams> {
        self.validate()?;
        crate::error::check_len(self.n_bs, offsets.len())?;
        let users: Vec<(f64, f64)> = offsets
            .iter()
            .enumerate()
            .map(|(i, &(r, a))| {
                let (x, y) = self.bs_position(i);
                (x + r * a.cos(), y + r * a.sin())
            })
            .collect();
        let gain = DMatrix::from_fn(self.n_bs, self.n_bs, |i, j| {
            let (bx, by) = self.bs_position(i);
            let (ux, uy) = users[j];
            self.path_gain((ux - bx).hypot(uy - by).max(MIN_DISTANCE_M))
        });
        SystemParams::uniform(gain, self.phi, self.circuit_power_w, self.p_max_w, self.noise_power_w())
    }

    /// Random instance drawn from the generator seeded with `self.seed`.
    pub fn generate(&self) -> Result<SystemParams> {
        gen_channels(self, &mut ChaCha8Rng::seed_from_u64(self.seed))
    }

    /// Instance where user `weak` sits at 0.9 of the cell radius facing a
    /// neighbouring BS and the others sit at 0.4 of the radius,
    /// perpendicular to the BS line.
    pub fn weak_user_instance(&self, weak: usize) -> Result<SystemParams> {
        if weak >= self.n_bs {
            return Err(Error::IndexOutOfRange { index: weak, n: self.n_bs });
        }
        let r = self.cell_radius_m;
        let toward_neighbour = if weak + 1 < self.n_bs { 0.0 } else { PI };
        let offsets: Vec<(f64, f64)> = (0..self.n_bs)
            .map(|i| if i == weak { (0.9 * r, toward_neighbour) } else { ((0.4 * r).max(MIN_DISTANCE_M), PI / 2.0) })
            .collect();
        self.with_user_offsets(&offsets)
    }
}

/// Drops user `i` uniformly over the annulus `[1 m, cell_radius]` around BS
/// `i` and builds the resulting instance.
pub fn gen_channels<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<SystemParams> {
    cfg.validate()?;
    let (r0, r1) = (MIN_DISTANCE_M, cfg.cell_radius_m);
    let offsets: Vec<(f64, f64)> = (0..cfg.n_bs)
        .map(|_| {
            let r = rng.random_range(r0 * r0..=r1 * r1).sqrt();
            (r, rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    cfg.with_user_offsets(&offsets)
}
