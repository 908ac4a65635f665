//! Run configuration: a strict TOML schema.
//!
//! Unknown keys are rejected rather than ignored so a typo cannot silently
//! fall back to a default. Scalar solver knobs sit at the top level and match
//! the field names below; `[params]`, `[grid]`, `[profile]`, `[output]` and
//! `[sweep]` are tables. Everything except `[params]` and `[profile]` has
//! defaults.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::equation::EquationParams;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initdata::ProfileSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_length: default_half_length(), n_points: default_n_points() }
    }
}

fn default_half_length() -> f64 {
    20.0 * std::f64::consts::PI
}

fn default_n_points() -> usize {
    1024
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Times at which x,u,m snapshots are written; each must lie in [0, t_end].
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Lambda,
    Alpha,
    Beta,
    Gamma,
    CapGamma,
    Amplitude,
}

impl SweepParam {
    pub fn column(&self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
            SweepParam::Gamma => "gamma",
            SweepParam::CapGamma => "cap_gamma",
            SweepParam::Amplitude => "amplitude",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
}

impl SweepConfig {
    /// Number of cells in the Cartesian product; zero when any axis is empty
    /// or no axes are given.
    pub fn cell_count(&self) -> usize {
        if self.axes.is_empty() {
            return 0;
        }
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Row-major coordinates of cell `index` (last axis fastest).
    pub fn cell_values(&self, index: usize) -> Vec<(SweepParam, f64)> {
        let mut out = Vec::with_capacity(self.axes.len());
        let mut rem = index;
        for axis in self.axes.iter().rev() {
            let len = axis.values.len();
            out.push((axis.param, axis.values[rem % len]));
            rem /= len;
        }
        out.reverse();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: EquationParams,
    #[serde(default)]
    pub grid: GridConfig,
    pub profile: ProfileSpec,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt_init")]
    pub dt_init: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_slope_floor")]
    pub slope_floor: f64,
    #[serde(default = "default_norm_cap")]
    pub norm_cap: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default = "default_dealias_fraction")]
    pub dealias_fraction: f64,
    /// Every `seed_stride`-th grid node launches a characteristic.
    #[serde(default = "default_seed_stride")]
    pub seed_stride: usize,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_t_end() -> f64 {
    5.0
}
fn default_dt_init() -> f64 {
    0.01
}
fn default_dt_min() -> f64 {
    1e-9
}
fn default_slope_floor() -> f64 {
    -1e4
}
fn default_norm_cap() -> f64 {
    1e6
}
fn default_sample_interval() -> f64 {
    0.05
}
fn default_dealias_fraction() -> f64 {
    0.4
}
fn default_seed_stride() -> usize {
    8
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        // Grid construction enforces its own invariants; surface them here.
        Grid::new(self.grid.half_length, self.grid.n_points)?;
        self.profile.validate()?;

        let positive = [
            ("t_end", self.t_end),
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("norm_cap", self.norm_cap),
            ("sample_interval", self.sample_interval),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.dt_min >= self.dt_init {
            return Err(Error::Config(format!(
                "dt_min ({}) must be smaller than dt_init ({})",
                self.dt_min, self.dt_init
            )));
        }
        if !(self.slope_floor.is_finite() && self.slope_floor < 0.0) {
            return Err(Error::Config(format!(
                "slope_floor must be negative, got {}",
                self.slope_floor
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        // Quartic products alias beyond 2/5 of the band; quadratic and cubic
        // ones beyond 1/2.
        if self.params.gamma != 0.0 && self.dealias_fraction > 0.4 {
            return Err(Error::Config(format!(
                "dealias_fraction must be <= 0.4 while gamma != 0, got {}",
                self.dealias_fraction
            )));
        }
        if self.params.gamma == 0.0 && self.dealias_fraction > 0.5 {
            return Err(Error::Config(format!(
                "dealias_fraction must be <= 0.5, got {}",
                self.dealias_fraction
            )));
        }
        if self.seed_stride == 0 || self.seed_stride >= self.grid.n_points {
            return Err(Error::Config(format!(
                "seed_stride must lie in [1, n_points), got {}",
                self.seed_stride
            )));
        }
        for &t in &self.output.snapshot_times {
            if !(t.is_finite() && (0.0..=self.t_end).contains(&t)) {
                return Err(Error::Config(format!(
                    "snapshot time {t} outside [0, t_end = {}]",
                    self.t_end
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            for axis in &sweep.axes {
                if axis.values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!(
                        "sweep axis {} contains a non-finite value",
                        axis.param.column()
                    )));
                }
            }
            let dup = sweep
                .axes
                .iter()
                .enumerate()
                .any(|(i, a)| sweep.axes[..i].iter().any(|b| b.param == a.param));
            if dup {
                return Err(Error::Config("sweep axes must name distinct parameters".into()));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Grid::new(self.grid.half_length, self.grid.n_points)
    }

    /// Snapshot times sorted and deduplicated for the runner.
    pub fn sorted_snapshot_times(&self) -> Vec<f64> {
        let mut ts = self.output.snapshot_times.clone();
        ts.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
        ts.dedup();
        ts
    }

    /// A copy with one swept parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> SimConfig {
        let mut c = self.clone();
        match param {
            SweepParam::Lambda => c.params.lambda = value,
            SweepParam::Alpha => c.params.alpha = value,
            SweepParam::Beta => c.params.beta = value,
            SweepParam::Gamma => c.params.gamma = value,
            SweepParam::CapGamma => c.params.cap_gamma = value,
            SweepParam::Amplitude => c.profile.amplitude = value,
        }
        c
    }
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let config: SimConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}
