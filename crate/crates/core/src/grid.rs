//! Periodic grid on [−L, L) and real scalar fields living on it.
//!
//! Nodes are x_i = −L + i·dx with dx = 2L/N, and the spectral wavenumbers are
//! k_j = (π/L)·j for j ∈ [−N/2, N/2), stored in FFT bin order. N is a power
//! of two so dx is exact in binary floating point.

use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct Grid {
    half_length: f64,
    n: usize,
    dx: f64,
    x: Vec<f64>,
    /// Wavenumbers in FFT bin order: 0, 1, ..., N/2−1, −N/2, ..., −1 times π/L.
    k: Vec<f64>,
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Arc<Self>> {
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(Error::Grid("half_length must be positive and finite".into()));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "n_points must be a power of two >= 16, got {n}"
            )));
        }
        let dx = 2.0 * half_length / n as f64;
        let x = (0..n).map(|i| -half_length + i as f64 * dx).collect();
        let base = std::f64::consts::PI / half_length;
        let k = (0..n)
            .map(|j| {
                let jj = if j < n / 2 { j as isize } else { j as isize - n as isize };
                base * jj as f64
            })
            .collect();
        Ok(Arc::new(Self { half_length, n, dx, x, k }))
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Wavenumbers in FFT bin order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Largest resolved |k| (the Nyquist wavenumber π N / (2L)).
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.half_length * (self.n as f64 / 2.0)
    }

    /// Indices of the outer 5% band on each side, where solutions must stay
    /// negligible for the periodic model to stand in for the real line.
    pub fn boundary_band(&self) -> impl Iterator<Item = usize> + '_ {
        let cut = 0.95 * self.half_length;
        (0..self.n).filter(move |&i| self.x[i].abs() >= cut)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

/// Real scalar samples over a `Grid`. Fields are value types: operators return
/// fresh fields and never mutate their inputs.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// dx · Σ f_i, the trapezoid rule on a periodic grid (exact for resolved
    /// trigonometric polynomials).
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Minimum value together with the leftmost grid point attaining it.
    pub fn min_with_argmin(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut arg = self.grid.x()[0];
        for (i, &v) in self.values.iter().enumerate() {
            if v < min {
                min = v;
                arg = self.grid.x()[i];
            }
        }
        (min, arg)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest |f| over the outer 5% band.
    pub fn boundary_max_abs(&self) -> f64 {
        self.grid
            .boundary_band()
            .map(|i| self.values[i].abs())
            .fold(0.0f64, f64::max)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field { grid: self.grid.clone(), values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// self + c * other.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + c * b)
    }
}
