//! Scalar diagnostics sampled along a run, the exact decay laws they must
//! obey, pointwise differential identities for manufactured or computed
//! solutions, and the H¹-of-momentum growth monitor.
//!
//! The family conserves, exactly in time,
//!
//!   H₀(t) = ∫u dx = e^{−λt} H₀(0),
//!   H₁(t) = ½∫(u² + u_x²) dx = e^{−2λt} H₁(0),
//!   ∫m dx = ∫u dx (periodic), with the same e^{−λt} law,
//!
//! so deviation from these laws measures solver error directly.

use serde::Serialize;

use crate::equation::EquationParams;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::spectral::SpectralWorkspace;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// H₀ = ∫u dx.
    pub h0: f64,
    /// H₁ = ½∫(u² + u_x²) dx.
    pub h1: f64,
    /// ∫m dx with m = u − u_xx.
    pub m_integral: f64,
    /// ‖m‖_{H¹} (equivalently ‖u‖_{H³}).
    pub m_h1_norm: f64,
    /// min_x u_x and the leftmost grid point attaining it.
    pub slope_min: f64,
    pub slope_argmin: f64,
    pub sup_abs_u: f64,
}

pub fn record(ws: &SpectralWorkspace, u: &Field, t: f64) -> DiagnosticsRecord {
    let u_x = ws.derivative(u, 1).expect("order 1 is valid");
    let u_xx = ws.derivative(u, 2).expect("order 2 is valid");
    let m = u.add_scaled(-1.0, &u_xx).expect("same grid");
    let l2u = ws.l2_norm_physical(u);
    let l2ux = ws.l2_norm_physical(&u_x);
    let (slope_min, slope_argmin) = u_x.min_with_argmin();
    DiagnosticsRecord {
        t,
        h0: u.integral(),
        h1: 0.5 * (l2u * l2u + l2ux * l2ux),
        m_integral: m.integral(),
        m_h1_norm: ws.sobolev_norm(&m, 1.0),
        slope_min,
        slope_argmin,
        sup_abs_u: u.max_abs(),
    }
}

/// Time-ordered sequence of diagnostics records.
#[derive(Debug, Clone, Default)]
pub struct RunSeries {
    records: Vec<DiagnosticsRecord>,
}

impl RunSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rec: DiagnosticsRecord) {
        if let Some(last) = self.records.last() {
            assert!(rec.t > last.t, "samples must advance in time: {} then {}", last.t, rec.t);
        }
        self.records.push(rec);
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> Option<&DiagnosticsRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayReport {
    /// max over samples of |H₀(t) e^{λt} / H₀(0) − 1|, or the absolute
    /// deviation when H₀(0) is below 1e−10 in magnitude.
    pub h0_max_deviation: f64,
    pub h0_relative: bool,
    /// max over samples of |H₁(t) e^{2λt} / H₁(0) − 1| (absolute for tiny H₁(0)).
    pub h1_max_deviation: f64,
    pub h1_relative: bool,
    /// max over samples of |∫m(t) − e^{−λt} ∫m₀| / max(1, |∫m₀|).
    pub m_max_deviation: f64,
    /// max over samples of |∫m(t) − ∫u(t)| / max(1, |∫u(t)|).
    pub mass_identity_deviation: f64,
}

pub fn verify_decay(series: &RunSeries, lambda: f64) -> DecayReport {
    let recs = series.records();
    assert!(!recs.is_empty(), "decay verification needs at least one sample");
    let h0_0 = recs[0].h0;
    let h1_0 = recs[0].h1;
    let m_0 = recs[0].m_integral;
    let h0_relative = h0_0.abs() > 1e-10;
    let h1_relative = h1_0.abs() > 1e-10;

    let mut h0_dev = 0.0f64;
    let mut h1_dev = 0.0f64;
    let mut m_dev = 0.0f64;
    let mut mass_dev = 0.0f64;
    for r in recs {
        let h0_target = (-lambda * r.t).exp() * h0_0;
        h0_dev = h0_dev.max(if h0_relative {
            (r.h0 * (lambda * r.t).exp() / h0_0 - 1.0).abs()
        } else {
            (r.h0 - h0_target).abs()
        });
        let h1_target = (-2.0 * lambda * r.t).exp() * h1_0;
        h1_dev = h1_dev.max(if h1_relative {
            (r.h1 * (2.0 * lambda * r.t).exp() / h1_0 - 1.0).abs()
        } else {
            (r.h1 - h1_target).abs()
        });
        m_dev = m_dev.max((r.m_integral - (-lambda * r.t).exp() * m_0).abs() / m_0.abs().max(1.0));
        mass_dev = mass_dev
            .max((r.m_integral - r.h0).abs() / r.h0.abs().max(1.0));
    }
    DecayReport {
        h0_max_deviation: h0_dev,
        h0_relative,
        h1_max_deviation: h1_dev,
        h1_relative,
        m_max_deviation: m_dev,
        mass_identity_deviation: mass_dev,
    }
}

/// Which differential identity to check. All three hold pointwise for any
/// smooth field, solution or not, so their residuals isolate discretization
/// error in the derivatives rather than model error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// Momentum-flux form: E = λv + v_t + ∂_x(3/2 v² − v_tx − v v_xx − v_x²/2
    /// − αv − β/3 v³ − γ/4 v⁴ − Γ v_xx − λ v_x).
    Momentum,
    /// Energy-flux form: vE = λ(v² + v_x²) + ∂_t (v² + v_x²)/2 + ∂_x(v³ −
    /// v² v_xx − v v_tx + Γ/2 v_x² − Γ v v_xx − α/2 v² − β/4 v⁴ − γ/5 v⁵ − λ v v_x).
    Energy,
    /// Square-root-of-momentum form, valid when β = γ = 0 and Γ = −α with
    /// v − v_xx bounded away from zero:
    /// E / (2√m) = λ/2 √m + ∂_t √m + ∂_x((v − α)√m), m = v − v_xx.
    SqrtMomentum,
}

/// The operator whose kernel is the solution set:
/// E[v] = v_t − v_txx + λ(v − v_xx) − 2 v_x v_xx − v v_xxx
///        − (α + βv² + γv³ − 3v) v_x − Γ v_xxx.
fn equation_residual(
    ws: &SpectralWorkspace,
    p: &EquationParams,
    v: &Field,
    v_t: &Field,
) -> Field {
    let v_x = ws.derivative(v, 1).expect("order");
    let v_xx = ws.derivative(v, 2).expect("order");
    let v_xxx = ws.derivative(v, 3).expect("order");
    let v_txx = ws.derivative(v_t, 2).expect("order");
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (vi, vx, vxx, vxxx) = (v.values()[i], v_x.values()[i], v_xx.values()[i], v_xxx.values()[i]);
        out[i] = v_t.values()[i] - v_txx.values()[i] + p.lambda * (vi - vxx)
            - 2.0 * vx * vxx
            - vi * vxxx
            - (p.alpha + p.beta * vi * vi + p.gamma * vi.powi(3) - 3.0 * vi) * vx
            - p.cap_gamma * vxxx;
    }
    Field::from_values(v.grid().clone(), out).expect("length")
}

/// Fourth-order centered time derivative over five uniformly spaced slices.
fn time_derivative(slab: &[Field; 5], dt: f64) -> Field {
    let c = 1.0 / (12.0 * dt);
    slab[0]
        .zip_with(&slab[1], |f0, f1| f0 - 8.0 * f1)
        .and_then(|a| a.zip_with(&slab[3], |acc, f3| acc + 8.0 * f3))
        .and_then(|a| a.zip_with(&slab[4], |acc, f4| (acc - f4) * c))
        .expect("same grid")
}

/// Max-norm residual of the chosen identity at the center of a slab of five
/// fields at consecutive times spaced `dt` apart. Derivatives in x are
/// spectral; the time derivative is the 4th-order stencil, so residuals decay
/// like dt⁴ until round-off.
pub fn identity_residuals(
    ws: &SpectralWorkspace,
    p: &EquationParams,
    slab: &[Field; 5],
    dt: f64,
    which: Identity,
) -> Result<f64> {
    assert!(dt > 0.0, "slab spacing must be positive");
    let v = &slab[2];
    let v_t = time_derivative(slab, dt);
    let e = equation_residual(ws, p, v, &v_t);
    let v_x = ws.derivative(v, 1)?;
    let v_xx = ws.derivative(v, 2)?;
    let v_tx = ws.derivative(&v_t, 1)?;
    let n = v.len();

    let residual_field = match which {
        Identity::Momentum => {
            let mut flux = vec![0.0; n];
            for i in 0..n {
                let (vi, vx, vxx) = (v.values()[i], v_x.values()[i], v_xx.values()[i]);
                flux[i] = 1.5 * vi * vi - v_tx.values()[i] - vi * vxx - 0.5 * vx * vx
                    - p.alpha * vi
                    - p.beta / 3.0 * vi.powi(3)
                    - p.gamma / 4.0 * vi.powi(4)
                    - p.cap_gamma * vxx
                    - p.lambda * vx;
            }
            let flux = Field::from_values(v.grid().clone(), flux)?;
            let flux_x = ws.derivative(&flux, 1)?;
            let mut res = vec![0.0; n];
            for i in 0..n {
                let rhs = p.lambda * v.values()[i] + v_t.values()[i] + flux_x.values()[i];
                res[i] = e.values()[i] - rhs;
            }
            Field::from_values(v.grid().clone(), res)?
        }
        Identity::Energy => {
            // Energy density slab for the d/dt (v^2 + v_x^2)/2 term.
            let mut density = Vec::with_capacity(5);
            for f in slab {
                let fx = ws.derivative(f, 1)?;
                density.push(f.zip_with(&fx, |a, b| 0.5 * (a * a + b * b))?);
            }
            let density: [Field; 5] = density.try_into().expect("five slices");
            let e_t = time_derivative(&density, dt);
            let mut flux = vec![0.0; n];
            for i in 0..n {
                let (vi, vx, vxx) = (v.values()[i], v_x.values()[i], v_xx.values()[i]);
                flux[i] = vi.powi(3) - vi * vi * vxx - vi * v_tx.values()[i]
                    + 0.5 * p.cap_gamma * vx * vx
                    - p.cap_gamma * vi * vxx
                    - 0.5 * p.alpha * vi * vi
                    - 0.25 * p.beta * vi.powi(4)
                    - 0.2 * p.gamma * vi.powi(5)
                    - p.lambda * vi * vx;
            }
            let flux = Field::from_values(v.grid().clone(), flux)?;
            let flux_x = ws.derivative(&flux, 1)?;
            let mut res = vec![0.0; n];
            for i in 0..n {
                let (vi, vx) = (v.values()[i], v_x.values()[i]);
                let rhs = p.lambda * (vi * vi + vx * vx) + e_t.values()[i] + flux_x.values()[i];
                res[i] = vi * e.values()[i] - rhs;
            }
            Field::from_values(v.grid().clone(), res)?
        }
        Identity::SqrtMomentum => {
            if p.beta != 0.0 || p.gamma != 0.0 || p.alpha + p.cap_gamma != 0.0 {
                return Err(Error::DomainViolation(
                    "square-root identity needs beta = gamma = 0 and cap_gamma = -alpha".into(),
                ));
            }
            // sqrt(m) slab; every slice must keep m well away from zero.
            let mut roots = Vec::with_capacity(5);
            for f in slab {
                let fxx = ws.derivative(f, 2)?;
                let m = f.add_scaled(-1.0, &fxx)?;
                let min_m = m.values().iter().cloned().fold(f64::INFINITY, f64::min);
                if min_m <= 1e-6 {
                    return Err(Error::DomainViolation(format!(
                        "square-root identity needs v - v_xx > 1e-6 everywhere, found {min_m:.3e}"
                    )));
                }
                roots.push(m.map(f64::sqrt));
            }
            let roots: [Field; 5] = roots.try_into().expect("five slices");
            let z_t = time_derivative(&roots, dt);
            let z = &roots[2];
            let flux = v.zip_with(z, |vi, zi| (vi - p.alpha) * zi)?;
            let flux_x = ws.derivative(&flux, 1)?;
            let mut res = vec![0.0; n];
            for i in 0..n {
                let lhs = e.values()[i] / (2.0 * z.values()[i]);
                let rhs =
                    0.5 * p.lambda * z.values()[i] + z_t.values()[i] + flux_x.values()[i];
                res[i] = lhs - rhs;
            }
            Field::from_values(v.grid().clone(), res)?
        }
    };
    Ok(residual_field.max_abs())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonitorReport {
    /// True when ‖m(t)‖_{H¹} ≤ e^{(5k+c+2λ)t/2} ‖m₀‖_{H¹} at every sample
    /// within the armed window.
    pub holds: bool,
    /// Largest observed ‖m(t)‖_{H¹} / bound(t) while armed.
    pub max_ratio: f64,
    /// Last sample time at which the slope precondition u_x > −k still held.
    pub armed_until: f64,
    /// First sample time with min u_x ≤ −k, if any; the monitor disarms there
    /// and later samples are not judged.
    pub precondition_lost_at: Option<f64>,
}

/// Default growth constant for the nonlocal source term when no sharper value
/// is known: scales like the h-coefficient bound times the data size.
pub fn default_gronwall_c(params: &EquationParams, u0_h1: f64) -> f64 {
    3.0 * params.kappa() * u0_h1.powi(3).max(1.0)
}

/// Checks the a priori H¹-of-momentum growth bound
/// ‖m(t)‖_{H¹} ≤ e^{(5k + c + 2λ)t/2} ‖m₀‖_{H¹}, armed only while
/// min u_x > −k.
pub fn gronwall_monitor(series: &RunSeries, k: f64, c: f64, lambda: f64) -> MonitorReport {
    assert!(k > 0.0, "slope bound k must be positive");
    let recs = series.records();
    assert!(!recs.is_empty(), "monitor needs at least one sample");
    let m0 = recs[0].m_h1_norm;
    let rate = 0.5 * (5.0 * k + c + 2.0 * lambda);
    let mut max_ratio = 0.0f64;
    let mut armed_until = recs[0].t;
    let mut lost_at = None;
    for r in recs {
        if r.slope_min <= -k {
            lost_at = Some(r.t);
            break;
        }
        let bound = (rate * (r.t - recs[0].t)).exp() * m0;
        max_ratio = max_ratio.max(r.m_h1_norm / bound.max(f64::MIN_POSITIVE));
        armed_until = r.t;
    }
    MonitorReport {
        holds: max_ratio <= 1.0 + 1e-9,
        max_ratio,
        armed_until,
        precondition_lost_at: lost_at,
    }
}

/// Sobolev embedding margin: max over samples of sup|u| − ‖u‖_{H¹};
/// nonpositive (up to round-off) for every honest discretization.
pub fn embedding_excess(series: &RunSeries) -> f64 {
    series
        .records()
        .iter()
        .map(|r| r.sup_abs_u - (2.0 * r.h1).sqrt())
        .fold(f64::NEG_INFINITY, f64::max)
}
