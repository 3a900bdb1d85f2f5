use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Minkowski metric diagonal, signature (+,-,-,-).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Causal character of a four-vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Causality {
    TimeLike,
    SpaceLike,
    LightLike,
}

/// A real space-time (or momentum) four-vector; index 0 is time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);
    pub const TIME: FourVector = FourVector([1.0, 0.0, 0.0, 0.0]);

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn from_spatial(t: f64, s: [f64; 3]) -> Self {
        FourVector([t, s[0], s[1], s[2]])
    }

    /// Minkowski inner product a⁰b⁰ − a·b.
    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    /// Index-lowered components g_{μν} a^ν.
    pub fn lower(&self) -> [f64; 4] {
        let a = self.0;
        [a[0], -a[1], -a[2], -a[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Plain Euclidean norm of the coordinate components.
    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn spatial_norm(&self) -> f64 {
        let s = self.spatial();
        (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
    }

    pub fn classify(&self, zero_tol: f64) -> Causality {
        let s = self.square();
        if s > zero_tol {
            Causality::TimeLike
        } else if s < -zero_tol {
            Causality::SpaceLike
        } else {
            Causality::LightLike
        }
    }

    pub fn is_future_timelike(&self, zero_tol: f64) -> bool {
        self.0[0] > 0.0 && self.classify(zero_tol) == Causality::TimeLike
    }

    /// Unit time-like vector along `self`, or `None` when not time-like.
    pub fn normalized_timelike(&self) -> Option<FourVector> {
        let s = self.square();
        if s > 0.0 && s.is_finite() {
            Some(*self * (1.0 / s.sqrt()))
        } else {
            None
        }
    }

    pub fn max_abs_diff(&self, other: &FourVector) -> f64 {
        (0..4).map(|i| (self.0[i] - other.0[i]).abs()).fold(0.0, f64::max)
    }
}

pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

impl fmt::Display for FourVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for FourVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl AddAssign for FourVector {
    fn add_assign(&mut self, o: FourVector) {
        for i in 0..4 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl SubAssign for FourVector {
    fn sub_assign(&mut self, o: FourVector) {
        for i in 0..4 {
            self.0[i] -= o.0[i];
        }
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}
