use serde::{Deserialize, Serialize};

use super::lorentz::PoincareTransform;
use super::vector::FourVector;
use crate::error::{Error, Result};

/// A hypersurface given as the zero set of an implicit function.
pub trait Hypersurface {
    /// Implicit function f(x); the surface is {f = 0}.
    fn value(&self, x: &FourVector) -> f64;

    /// Contravariant gradient g^{μν}∂_ν f, future-directed where time-like.
    fn gradient(&self, x: &FourVector) -> FourVector;
}

/// The hyperplane {x : n·x = τ} with unit future time-like normal n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: FourVector,
    pub offset: f64,
}

impl Hyperplane {
    pub fn new(normal: FourVector, offset: f64) -> Result<Self> {
        if !(normal[0] > 0.0) || (normal.square() - 1.0).abs() > 1e-9 || !offset.is_finite() {
            return Err(Error::InvalidInput(format!(
                "hyperplane normal must be unit future time-like, got {normal}"
            )));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn through(normal: FourVector, x: &FourVector) -> Result<Self> {
        Self::new(normal, normal.dot(x))
    }

    /// The image hyperplane under g: {Λn·y = τ + Λn·a}.
    pub fn transformed(&self, g: &PoincareTransform) -> Hyperplane {
        let normal = g.apply_vector(&self.normal);
        Hyperplane {
            normal,
            offset: self.offset + normal.dot(&g.translation),
        }
    }

    /// The point on this hyperplane closest in the n-frame to the origin: τ·n.
    pub fn anchor(&self) -> FourVector {
        self.normal * self.offset
    }
}

impl Hypersurface for Hyperplane {
    fn value(&self, x: &FourVector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn gradient(&self, _x: &FourVector) -> FourVector {
        self.normal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_of_leaf_contains_image_points() {
        let n = FourVector::new(1.3, 0.2, -0.5, 0.6).normalized_timelike().unwrap();
        let x = FourVector::new(0.4, 1.0, -2.0, 3.0);
        let plane = Hyperplane::through(n, &x).unwrap();
        assert_eq!(plane.value(&x), 0.0);
        let g = PoincareTransform::translation(FourVector::new(1.0, 2.0, 0.0, -1.0))
            .compose(&PoincareTransform::boost([0.0, 1.0, 0.0], 0.8).unwrap());
        let moved = plane.transformed(&g);
        assert!(moved.value(&g.apply(&x)).abs() < 1e-12);
    }

    #[test]
    fn rejects_spacelike_normal() {
        assert!(Hyperplane::new(FourVector::new(0.0, 1.0, 0.0, 0.0), 0.0).is_err());
    }
}
