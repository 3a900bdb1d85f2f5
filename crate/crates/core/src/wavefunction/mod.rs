//! Multi-time N-particle Dirac wave functions built from positive-energy
//! plane-wave products: evaluation, Dirac residuals, current tensors, total
//! four-momentum and Poincaré transformation.

mod mode;
mod spinor;
mod state;

pub use mode::{dirac_spinor, PlaneWaveMode, Spin, MASS_SHELL_TOL};
pub use spinor::{CurrentTensor, MultiSpinor};
pub use state::{MultiTimeWaveFunction, ProductTerm, EXPANSION_TOL, REALITY_TOL};
