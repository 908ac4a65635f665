//! Fourier-side operators on periodic fields.
//!
//! Conventions, fixed once and validated by the Parseval test: the forward
//! transform is the plain unnormalized DFT F_j = Σ_n f_n e^{−2πijn/N}, the
//! inverse carries the 1/N. Under this convention
//!
//!   ‖f‖_{H^s}² = (2L/N²) Σ_j (1 + k_j²)^s |F_j|²,
//!
//! which at s = 0 reproduces the physical quadrature dx·Σ f² exactly.
//! Differentiation multiplies by (i k_j)^order with the Nyquist bin zeroed for
//! odd orders; the Helmholtz solve divides by (1 + k_j²). Dealiasing keeps
//! exactly the bins with |k_j| ≤ fraction · k_max.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub struct SpectralWorkspace {
    grid: Arc<Grid>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    dealias_fraction: f64,
    keep: Vec<bool>,
}

impl SpectralWorkspace {
    pub fn new(grid: Arc<Grid>, dealias_fraction: f64) -> Result<Self> {
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "dealias_fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.len());
        let inv = planner.plan_fft_inverse(grid.len());
        let cutoff = dealias_fraction * grid.k_max();
        let keep = grid.wavenumbers().iter().map(|k| k.abs() <= cutoff).collect();
        Ok(Self { grid, fwd, inv, dealias_fraction, keep })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    pub fn spectrum(&self, f: &Field) -> Vec<Complex<f64>> {
        debug_assert!(f.grid().same_as(&self.grid));
        let mut buf: Vec<Complex<f64>> =
            f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform; takes ownership of the spectrum buffer.
    pub fn synthesize(&self, mut spec: Vec<Complex<f64>>) -> Field {
        self.inv.process(&mut spec);
        let n = self.grid.len() as f64;
        let values = spec.iter().map(|c| c.re / n).collect();
        Field::from_values(self.grid.clone(), values).expect("spectrum length matches grid")
    }

    /// Spectral d^order/dx^order for order in {1, 2, 3}. Odd orders zero the
    /// Nyquist bin, which carries no usable sign information for them.
    pub fn derivative(&self, f: &Field, order: u32) -> Result<Field> {
        if !(1..=3).contains(&order) {
            return Err(Error::DerivativeOrder(order));
        }
        let mut spec = self.spectrum(f);
        self.derivative_spectrum(&mut spec, order);
        Ok(self.synthesize(spec))
    }

    pub fn derivative_spectrum(&self, spec: &mut [Complex<f64>], order: u32) {
        let k = self.grid.wavenumbers();
        let n = self.grid.len();
        match order {
            1 => {
                for j in 0..n {
                    spec[j] *= Complex::new(0.0, k[j]);
                }
                spec[n / 2] = Complex::new(0.0, 0.0);
            }
            2 => {
                for j in 0..n {
                    spec[j] *= -k[j] * k[j];
                }
            }
            3 => {
                for j in 0..n {
                    spec[j] *= Complex::new(0.0, -k[j] * k[j] * k[j]);
                }
                spec[n / 2] = Complex::new(0.0, 0.0);
            }
            _ => unreachable!("order validated by caller"),
        }
    }

    /// Λ⁻² f = (1 − ∂_x²)⁻¹ f, the periodic Helmholtz solve.
    pub fn helmholtz_inverse(&self, f: &Field) -> Field {
        let mut spec = self.spectrum(f);
        for (c, k) in spec.iter_mut().zip(self.grid.wavenumbers()) {
            *c /= 1.0 + k * k;
        }
        self.synthesize(spec)
    }

    /// ∂_x Λ⁻² f fused into one multiplier pass (odd operator: Nyquist zeroed).
    pub fn dx_helmholtz_inverse(&self, f: &Field) -> Field {
        let mut spec = self.spectrum(f);
        let n = self.grid.len();
        for (c, k) in spec.iter_mut().zip(self.grid.wavenumbers()) {
            *c *= Complex::new(0.0, k / (1.0 + k * k));
        }
        spec[n / 2] = Complex::new(0.0, 0.0);
        self.synthesize(spec)
    }

    /// Dealias, then ∂_x Λ⁻², in a single spectrum pass. This is the shape of
    /// the nonlocal term in the evolution equation, where `f` is a pointwise
    /// product that must be projected back onto the retained band.
    pub fn dealias_dx_helmholtz_inverse(&self, f: &Field) -> Field {
        let mut spec = self.spectrum(f);
        self.dealias_spectrum(&mut spec);
        let n = self.grid.len();
        for (c, k) in spec.iter_mut().zip(self.grid.wavenumbers()) {
            *c *= Complex::new(0.0, k / (1.0 + k * k));
        }
        spec[n / 2] = Complex::new(0.0, 0.0);
        self.synthesize(spec)
    }

    /// ‖f‖_{H^s} with the (1 + k²)^s symbol; s must lie in [−2, 3].
    pub fn sobolev_norm(&self, f: &Field, s: f64) -> f64 {
        assert!(
            (-2.0..=3.0).contains(&s),
            "sobolev order {s} outside the supported band [-2, 3]"
        );
        let spec = self.spectrum(f);
        let weight = 2.0 * self.grid.half_length() / (self.grid.len() as f64).powi(2);
        let mut acc = 0.0;
        for (c, k) in spec.iter().zip(self.grid.wavenumbers()) {
            acc += (1.0 + k * k).powf(s) * c.norm_sqr();
        }
        (weight * acc).sqrt()
    }

    /// ‖f‖_{L²} by physical quadrature (dx · Σ f²)^{1/2}; agrees with
    /// `sobolev_norm(f, 0)` to round-off by Parseval.
    pub fn l2_norm_physical(&self, f: &Field) -> f64 {
        (self.grid.dx() * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn dealias_spectrum(&self, spec: &mut [Complex<f64>]) {
        for (c, &keep) in spec.iter_mut().zip(&self.keep) {
            if !keep {
                *c = Complex::new(0.0, 0.0);
            }
        }
    }

    /// Project onto the retained band |k| ≤ fraction·k_max.
    pub fn dealias(&self, f: &Field) -> Field {
        let mut spec = self.spectrum(f);
        self.dealias_spectrum(&mut spec);
        self.synthesize(spec)
    }

    /// Trigonometric interpolant of f, exact at the nodes, for off-grid
    /// evaluation along characteristics.
    pub fn interpolator(&self, f: &Field) -> TrigInterpolator {
        TrigInterpolator::from_spectrum(&self.grid, self.spectrum(f))
    }

    /// Interpolant of d^order f / dx^order.
    pub fn derivative_interpolator(&self, f: &Field, order: u32) -> Result<TrigInterpolator> {
        if !(1..=3).contains(&order) {
            return Err(Error::DerivativeOrder(order));
        }
        let mut spec = self.spectrum(f);
        self.derivative_spectrum(&mut spec, order);
        Ok(TrigInterpolator::from_spectrum(&self.grid, spec))
    }
}

/// Band-limited point evaluation: u(x) = (1/N)·Re Σ_j F_j e^{i k_j (x+L)},
/// with the Nyquist bin read as a pure cosine so real inputs stay real.
pub struct TrigInterpolator {
    n: usize,
    half_length: f64,
    dx: f64,
    /// Bins 0..=N/2 of the forward transform (real signal: the rest is conjugate).
    coeffs: Vec<Complex<f64>>,
}

impl TrigInterpolator {
    fn from_spectrum(grid: &Grid, spec: Vec<Complex<f64>>) -> Self {
        let n = grid.len();
        Self {
            n,
            half_length: grid.half_length(),
            dx: grid.dx(),
            coeffs: spec[..=n / 2].to_vec(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Fractional node coordinate in [0, N).
        let s = (x + self.half_length).rem_euclid(2.0 * self.half_length) / self.dx;
        let theta = 2.0 * std::f64::consts::PI * s / self.n as f64;
        let (sin_t, cos_t) = theta.sin_cos();
        let mut cos_j = 1.0; // cos(0)
        let mut sin_j = 0.0;
        let mut acc = 0.5 * self.coeffs[0].re;
        for j in 1..self.n / 2 {
            let (c_next, s_next) = (cos_j * cos_t - sin_j * sin_t, sin_j * cos_t + cos_j * sin_t);
            cos_j = c_next;
            sin_j = s_next;
            acc += self.coeffs[j].re * cos_j - self.coeffs[j].im * sin_j;
        }
        let nyquist = 0.5 * self.coeffs[self.n / 2].re * (std::f64::consts::PI * s).cos();
        (2.0 * acc + 2.0 * nyquist) / self.n as f64
    }
}
