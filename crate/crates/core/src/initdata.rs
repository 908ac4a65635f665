//! Initial-data profiles.
//!
//! Every profile is compactly supported in practice: realization fails if the
//! requested shape is not negligible (below 1e−12) on the outer 5% of the
//! grid, since the periodic box only stands in for the real line while the
//! solution stays away from the seam.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::spectral::SpectralWorkspace;

pub const BOUNDARY_NEGLIGIBLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// A e^{−((x−c)/w)²}
    Gaussian,
    /// A ((x−c)/w) e^{−((x−c)/w)²}: steep controllable slope at x = c.
    GaussianDerivative,
    /// A sech²((x−c)/w)
    SechSquared,
    /// `extra = [count, spacing]`: count Gaussian bumps, the first at c,
    /// subsequent ones spaced by `spacing`.
    BumpTrain,
    /// Momentum-first construction: m₀ = A ((x−c)/w) e^{−((x−c)/w)²}, an odd
    /// bump about c (≤ 0 left of c, ≥ 0 right of c), then u₀ = Λ⁻² m₀.
    MomentumSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    /// Kind-specific reals; only `BumpTrain` reads them.
    #[serde(default)]
    pub extra: Vec<f64>,
}

fn default_width() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn new(kind: ProfileKind, amplitude: f64, width: f64, center: f64) -> Self {
        Self { kind, amplitude, width, center, extra: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.width.is_finite() || !self.center.is_finite() {
            return Err(Error::Profile("amplitude, width and center must be finite".into()));
        }
        if self.width <= 0.0 {
            return Err(Error::Profile(format!("width must be positive, got {}", self.width)));
        }
        if self.kind == ProfileKind::BumpTrain {
            if self.extra.len() != 2 {
                return Err(Error::Profile(
                    "bump_train needs extra = [count, spacing]".into(),
                ));
            }
            let count = self.extra[0];
            if count < 1.0 || count.fract() != 0.0 || count > 64.0 {
                return Err(Error::Profile(format!(
                    "bump_train count must be an integer in [1, 64], got {count}"
                )));
            }
            if !(self.extra[1] > 0.0) {
                return Err(Error::Profile("bump_train spacing must be positive".into()));
            }
        } else if !self.extra.is_empty() {
            return Err(Error::Profile(format!(
                "extra values are only meaningful for bump_train, got {:?} for {:?}",
                self.extra, self.kind
            )));
        }
        Ok(())
    }

    /// Sample the profile on the workspace grid. For `MomentumSplit` the
    /// returned field is u₀ = Λ⁻² m₀; call `momentum_profile` for m₀ itself.
    pub fn realize(&self, ws: &SpectralWorkspace) -> Result<Field> {
        self.validate()?;
        let u0 = match self.kind {
            ProfileKind::MomentumSplit => {
                let m0 = self.momentum_profile(ws)?;
                ws.helmholtz_inverse(&m0)
            }
            _ => Field::from_fn(ws.grid().clone(), |x| self.shape(x)),
        };
        if !u0.is_finite() {
            return Err(Error::NonFinite { context: "realized initial data" });
        }
        let edge = u0.boundary_max_abs();
        if edge >= BOUNDARY_NEGLIGIBLE {
            return Err(Error::Profile(format!(
                "initial data not negligible near the seam: |u0| reaches {edge:.3e} \
                 on the outer 5% (limit {BOUNDARY_NEGLIGIBLE:.0e}); widen the box or \
                 narrow the profile"
            )));
        }
        Ok(u0)
    }

    /// The prescribed momentum m₀ for `MomentumSplit`.
    pub fn momentum_profile(&self, ws: &SpectralWorkspace) -> Result<Field> {
        if self.kind != ProfileKind::MomentumSplit {
            return Err(Error::Profile(
                "momentum_profile is only defined for momentum_split".into(),
            ));
        }
        let m0 = Field::from_fn(ws.grid().clone(), |x| {
            let z = (x - self.center) / self.width;
            self.amplitude * z * (-z * z).exp()
        });
        Ok(m0)
    }

    fn shape(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        match self.kind {
            ProfileKind::Gaussian => self.amplitude * (-z * z).exp(),
            ProfileKind::GaussianDerivative => self.amplitude * z * (-z * z).exp(),
            ProfileKind::SechSquared => {
                let s = 1.0 / z.cosh();
                self.amplitude * s * s
            }
            ProfileKind::BumpTrain => {
                let count = self.extra[0] as usize;
                let spacing = self.extra[1];
                (0..count)
                    .map(|i| {
                        let zi = (x - self.center - i as f64 * spacing) / self.width;
                        self.amplitude * (-zi * zi).exp()
                    })
                    .sum()
            }
            ProfileKind::MomentumSplit => unreachable!("realized through momentum_profile"),
        }
    }
}
