//! Minkowski geometry: four-vectors, restricted Poincaré transforms with their
//! spinor representation, Dirac gamma matrices and hypersurfaces.
//!
//! Signature is (+,−,−,−) with ħ = c = 1.

mod gamma;
mod lorentz;
mod surface;
mod vector;

pub use gamma::{bilinear, dirac_bar, max_abs, pauli, vector_bilinear, GammaSet, SpinMatrix, Spinor, GAMMA};
pub use lorentz::{random_unit, PoincareTransform};
pub use surface::{Hyperplane, Hypersurface};
pub use vector::{minkowski_dot, Causality, FourVector, METRIC};

/// Tolerance for algebraic identities (metric preservation, representation).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Zero tolerance when classifying time-like / space-like / light-like.
pub const CLASSIFY_TOL: f64 = 1e-10;

/// Boosts (1,0,0,0) onto `n` and returns the orthonormal frame
/// (n, e₁, e₂, e₃) with e_i the boosted spatial axes.
pub fn leaf_frame(n: &FourVector) -> crate::Result<[FourVector; 4]> {
    let b = PoincareTransform::boost_to(n)?;
    Ok(std::array::from_fn(|i| {
        let mut e = FourVector::ZERO;
        e[i] = 1.0;
        b.apply_vector(&e)
    }))
}
