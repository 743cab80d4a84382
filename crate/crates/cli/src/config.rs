//! Plain-text `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment. Quantities may carry a unit
//! suffix separated by whitespace; powers accept `W`, `mW` or `dBm`, gains
//! and noise figures `dB`, the noise density `dBm/Hz`, the bandwidth `Hz`,
//! `kHz` or `MHz`, and the cell radius `m`. Everything is converted to
//! linear SI units on ingestion.
//!
//! | key               | default        |
//! |-------------------|----------------|
//! | `n_bs`            | 3              |
//! | `cell_radius`     | 20 m           |
//! | `pathloss_exponent` | 3.5          |
//! | `gain_at_1m`      | -70 dB         |
//! | `noise_psd`       | -170 dBm/Hz    |
//! | `noise_figure`    | 10 dB          |
//! | `bandwidth`       | 10 kHz         |
//! | `phi`             | 2.5            |
//! | `circuit_power`   | 0.5 mW         |
//! | `p_max`           | 0.3 mW         |
//! | `seed`            | 0              |
//! | `delta1`, `delta2`, `max_outer`, `max_inner` | solver defaults |
//! | `theta_scale`     | solver default |
//! | `y_update`        | `inner` or `outer` |
//! | `newton_tol`, `newton_max_iter` | Newton defaults |
//! | `resolution`      | 64             |
//! | `terms`           | 12             |
//! | `ranges`          | 5,10,50        |
//! | `trials`          | 10000          |
//! | `candidates`      | 64             |

use std::path::Path;

use siee_core::scenario::ScenarioConfig;
use siee_core::solver::{SolverConfig, ThetaPolicy, YUpdate};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub resolution: usize,
    pub terms: usize,
    pub ranges: Vec<f64>,
    pub trials: usize,
    pub candidates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            solver: SolverConfig::default(),
            resolution: 64,
            terms: 12,
            ranges: vec![5.0, 10.0, 50.0],
            trials: 10_000,
            candidates: 64,
        }
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn parse_number(key: &str, s: &str) -> Result<f64, CliError> {
    s.parse::<f64>().map_err(|_| CliError::Config(format!("{key}: cannot parse number {s:?}")))
}

fn parse_count(key: &str, s: &str) -> Result<usize, CliError> {
    s.parse::<usize>().map_err(|_| CliError::Config(format!("{key}: expected a non-negative integer, got {s:?}")))
}

/// Splits `"0.3 mW"` into the number and an optional unit.
fn split_quantity<'a>(key: &str, value: &'a str) -> Result<(f64, Option<&'a str>), CliError> {
    let mut parts = value.split_whitespace();
    let number = parts.next().ok_or_else(|| CliError::Config(format!("{key}: missing value")))?;
    let unit = parts.next();
    if parts.next().is_some() {
        return Err(CliError::Config(format!("{key}: trailing text in {value:?}")));
    }
    Ok((parse_number(key, number)?, unit))
}

fn unit_error(key: &str, unit: &str) -> CliError {
    CliError::Config(format!("{key}: unsupported unit {unit:?}"))
}

/// Power in watts from `W`, `mW` or `dBm`; bare numbers are watts.
pub fn parse_power(key: &str, value: &str) -> Result<f64, CliError> {
    match split_quantity(key, value)? {
        (v, None | Some("W")) => Ok(v),
        (v, Some("mW")) => Ok(v * 1e-3),
        (v, Some("dBm")) => Ok(db_to_linear(v - 30.0)),
        (_, Some(u)) => Err(unit_error(key, u)),
    }
}

/// Value in dB; bare numbers are dB.
fn parse_db(key: &str, value: &str) -> Result<f64, CliError> {
    match split_quantity(key, value)? {
        (v, None | Some("dB")) => Ok(v),
        (_, Some(u)) => Err(unit_error(key, u)),
    }
}

/// Noise density in dBm/Hz; `W/Hz` is converted.
fn parse_psd(key: &str, value: &str) -> Result<f64, CliError> {
    match split_quantity(key, value)? {
        (v, None | Some("dBm/Hz")) => Ok(v),
        (v, Some("W/Hz")) if v > 0.0 => Ok(10.0 * v.log10() + 30.0),
        (_, Some(u)) => Err(unit_error(key, u)),
    }
}

fn parse_frequency(key: &str, value: &str) -> Result<f64, CliError> {
    match split_quantity(key, value)? {
        (v, None | Some("Hz")) => Ok(v),
        (v, Some("kHz")) => Ok(v * 1e3),
        (v, Some("MHz")) => Ok(v * 1e6),
        (_, Some(u)) => Err(unit_error(key, u)),
    }
}

fn parse_length(key: &str, value: &str) -> Result<f64, CliError> {
    match split_quantity(key, value)? {
        (v, None | Some("m")) => Ok(v),
        (_, Some(u)) => Err(unit_error(key, u)),
    }
}

pub fn parse_ranges(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|s| parse_number(key, s.trim())).collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let sc = &mut self.scenario;
        let so = &mut self.solver;
        match key {
            "n_bs" => sc.n_bs = parse_count(key, value)?,
            "cell_radius" => sc.cell_radius_m = parse_length(key, value)?,
            "pathloss_exponent" => sc.pathloss_exponent = parse_number(key, value)?,
            "gain_at_1m" => sc.gain_at_1m_db = parse_db(key, value)?,
            "noise_psd" => sc.noise_psd_dbm_hz = parse_psd(key, value)?,
            "noise_figure" => sc.noise_figure_db = parse_db(key, value)?,
            "bandwidth" => sc.bandwidth_hz = parse_frequency(key, value)?,
            "phi" => sc.phi = parse_number(key, value)?,
            "circuit_power" => sc.circuit_power_w = parse_power(key, value)?,
            "p_max" => sc.p_max_w = parse_power(key, value)?,
            "seed" => {
                let seed = value.parse().map_err(|_| CliError::Config(format!("seed: invalid value {value:?}")))?;
                sc.seed = seed;
                so.seed = seed;
            }
            "delta1" => so.delta1 = parse_number(key, value)?,
            "delta2" => so.delta2 = parse_number(key, value)?,
            "max_outer" => so.max_outer = parse_count(key, value)?,
            "max_inner" => so.max_inner = parse_count(key, value)?,
            "theta_scale" => so.theta = ThetaPolicy::CurvatureScaled(parse_number(key, value)?),
            "theta" => so.theta = ThetaPolicy::Fixed(parse_number(key, value)?),
            "y_update" => {
                so.y_update = match value {
                    "inner" => YUpdate::Inner,
                    "outer" => YUpdate::Outer,
                    _ => return Err(CliError::Config(format!("y_update: expected inner or outer, got {value:?}"))),
                }
            }
            "newton_tol" => so.newton.tol = parse_number(key, value)?,
            "newton_max_iter" => so.newton.max_iter = parse_count(key, value)?,
            "resolution" => self.resolution = parse_count(key, value)?,
            "terms" => self.terms = parse_count(key, value)?,
            "ranges" => self.ranges = parse_ranges(key, value)?,
            "trials" => self.trials = parse_count(key, value)?,
            "candidates" => self.candidates = parse_count(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", n + 1, e.message())))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario.validate()?;
        self.solver.validate()?;
        if self.ranges.is_empty() {
            return Err(CliError::Config("ranges: at least one value required".into()));
        }
        Ok(())
    }

    /// Fully resolved settings as `(key, value)` pairs, in SI units.
    pub fn entries(&self) -> Vec<(String, String)> {
        let sc = &self.scenario;
        let so = &self.solver;
        let (theta_kind, theta_value) = match so.theta {
            ThetaPolicy::CurvatureScaled(v) => ("theta_scale", v),
            ThetaPolicy::Fixed(v) => ("theta", v),
        };
        let y_update = match so.y_update {
            YUpdate::Inner => "inner",
            YUpdate::Outer => "outer",
        };
        let ranges: Vec<String> = self.ranges.iter().map(f64::to_string).collect();
        [
            ("n_bs", sc.n_bs.to_string()),
            ("cell_radius_m", sc.cell_radius_m.to_string()),
            ("pathloss_exponent", sc.pathloss_exponent.to_string()),
            ("gain_at_1m_db", sc.gain_at_1m_db.to_string()),
            ("noise_psd_dbm_hz", sc.noise_psd_dbm_hz.to_string()),
            ("noise_figure_db", sc.noise_figure_db.to_string()),
            ("bandwidth_hz", sc.bandwidth_hz.to_string()),
            ("noise_power_w", sc.noise_power_w().to_string()),
            ("phi", sc.phi.to_string()),
            ("circuit_power_w", sc.circuit_power_w.to_string()),
            ("p_max_w", sc.p_max_w.to_string()),
            ("seed", sc.seed.to_string()),
            ("delta1", so.delta1.to_string()),
            ("delta2", so.delta2.to_string()),
            ("max_outer", so.max_outer.to_string()),
            ("max_inner", so.max_inner.to_string()),
            (theta_kind, theta_value.to_string()),
            ("y_update", y_update.to_string()),
            ("newton_tol", so.newton.tol.to_string()),
            ("newton_max_iter", so.newton.max_iter.to_string()),
            ("resolution", self.resolution.to_string()),
            ("terms", self.terms.to_string()),
            ("ranges", ranges.join(",")),
            ("trials", self.trials.to_string()),
            ("candidates", self.candidates.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}
