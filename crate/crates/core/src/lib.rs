//! Numerical laboratory for a dissipative Camassa-Holm-type family
//!
//!   u_t + (u + Γ) u_x = Λ⁻² ∂_x h(u) − Λ⁻² ∂_x (u² + u_x²/2) − λ u,
//!   h(u) = (α + Γ) u + (β/3) u³ + (γ/4) u⁴,
//!
//! on a periodic box standing in for the real line. The crate integrates the
//! Cauchy problem pseudospectrally, tracks the exact decay laws the family
//! satisfies (e^{−λt} mass, e^{−2λt} energy), evaluates a checkable
//! wave-breaking certificate from the initial data alone, and follows
//! Lagrangian characteristics to test momentum transport and sign
//! preservation against the solver.

pub mod breaking;
pub mod characteristics;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod equation;
pub mod error;
pub mod grid;
pub mod initdata;
pub mod io;
pub mod spectral;

pub use config::SimConfig;
pub use equation::EquationParams;
pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use spectral::SpectralWorkspace;
