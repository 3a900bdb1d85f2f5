//! Foliations of space-time: the hyperplane foliation extracted from a state's
//! total four-momentum, curved test foliations, and analytic unit time-like
//! vector fields with their integrability measure.

mod field;

pub use field::{integrability_measure, FieldValue, Region, VectorFieldSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{FourVector, Hyperplane, Hypersurface, PoincareTransform, CLASSIFY_TOL};
use crate::wavefunction::MultiTimeWaveFunction;

/// Parallel hyperplanes n·x = τ with constant unit future time-like normal n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperplaneFoliation {
    normal: FourVector,
}

impl HyperplaneFoliation {
    pub fn new(normal: FourVector) -> Result<Self> {
        if !(normal[0] > 0.0) || (normal.square() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "foliation normal must be unit future time-like, got {normal} (n·n = {})",
                normal.square()
            )));
        }
        Ok(HyperplaneFoliation { normal })
    }

    /// Foliation orthogonal to a future time-like four-momentum.
    pub fn from_momentum(p: &FourVector) -> Result<Self> {
        if !p.is_finite() || p.euclidean_norm() == 0.0 {
            return Err(Error::Extraction("total four-momentum vanishes".into()));
        }
        if !p.is_future_timelike(CLASSIFY_TOL) {
            return Err(Error::Extraction(format!(
                "total four-momentum {p} is not future time-like (P·P = {:e}); \
                 light-like or space-like momenta define no space-like foliation",
                p.square()
            )));
        }
        let n = p.normalized_timelike().expect("time-like checked");
        Self::new(n)
    }

    pub fn normal(&self) -> FourVector {
        self.normal
    }

    pub fn transformed(&self, g: &PoincareTransform) -> Result<Self> {
        let n = g.apply_vector(&self.normal);
        // renormalize away roundoff so the unit invariant holds at 1e-12
        Self::new(n * (1.0 / n.square().sqrt()))
    }
}

/// Smooth time function T(x) = t + (ε/k) sin(k ê·x), optionally moved by a
/// Poincaré transform (T_g(x) = T(g⁻¹x)). Its level sets are space-like for |ε| < 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeFunction {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub direction: [f64; 3],
}

impl TimeFunction {
    pub fn validate(&self) -> Result<()> {
        let d = self.direction;
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if !(self.amplitude.abs() < 1.0) || !(self.wavenumber > 0.0) || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "time function needs |ε| < 1, k > 0 and a unit direction, got {self:?}"
            )));
        }
        Ok(())
    }

    fn phase(&self, x: &FourVector) -> f64 {
        let d = self.direction;
        self.wavenumber * (d[0] * x[1] + d[1] * x[2] + d[2] * x[3])
    }

    pub fn value(&self, x: &FourVector) -> f64 {
        x[0] + self.amplitude / self.wavenumber * self.phase(x).sin()
    }

    /// Contravariant gradient g^{μν}∂_νT.
    pub fn gradient(&self, x: &FourVector) -> FourVector {
        let c = self.amplitude * self.phase(x).cos();
        let d = self.direction;
        FourVector::new(1.0, -c * d[0], -c * d[1], -c * d[2])
    }

    /// ∂_κ (g^{νλ}∂_λT), indexed [κ][ν].
    pub fn gradient_jacobian(&self, x: &FourVector) -> [[f64; 4]; 4] {
        let s = self.amplitude * self.wavenumber * self.phase(x).sin();
        let d = self.direction;
        let mut j = [[0.0; 4]; 4];
        for a in 0..3 {
            for b in 0..3 {
                j[a + 1][b + 1] = s * d[a] * d[b];
            }
        }
        j
    }
}

/// Leaves T(x) = τ of a smooth time function, test scaffolding for
/// foliation dependence.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvedTestFoliation {
    profile: TimeFunction,
    frame: PoincareTransform,
    frame_inverse: PoincareTransform,
}

impl CurvedTestFoliation {
    pub fn new(profile: TimeFunction) -> Result<Self> {
        profile.validate()?;
        Ok(CurvedTestFoliation {
            profile,
            frame: PoincareTransform::identity(),
            frame_inverse: PoincareTransform::identity(),
        })
    }

    pub fn profile(&self) -> &TimeFunction {
        &self.profile
    }

    pub fn value(&self, x: &FourVector) -> f64 {
        self.profile.value(&self.frame_inverse.apply(x))
    }

    pub fn gradient(&self, x: &FourVector) -> FourVector {
        let g0 = self.profile.gradient(&self.frame_inverse.apply(x));
        self.frame.apply_vector(&g0)
    }

    pub fn transformed(&self, g: &PoincareTransform) -> Self {
        let frame = g.compose(&self.frame);
        CurvedTestFoliation {
            profile: self.profile.clone(),
            frame_inverse: frame.inverse(),
            frame,
        }
    }
}

/// A foliation of space-time into space-like leaves labelled by τ.
#[derive(Clone, Debug, PartialEq)]
pub enum Foliation {
    Hyperplanes(HyperplaneFoliation),
    Curved(CurvedTestFoliation),
}

impl From<HyperplaneFoliation> for Foliation {
    fn from(f: HyperplaneFoliation) -> Self {
        Foliation::Hyperplanes(f)
    }
}

impl From<CurvedTestFoliation> for Foliation {
    fn from(f: CurvedTestFoliation) -> Self {
        Foliation::Curved(f)
    }
}

impl Foliation {
    /// Leaf label τ(x).
    pub fn label(&self, x: &FourVector) -> f64 {
        match self {
            Foliation::Hyperplanes(h) => h.normal.dot(x),
            Foliation::Curved(c) => c.value(x),
        }
    }

    /// Contravariant gradient of the label; dτ along v is `label_gradient·v`.
    pub fn label_gradient(&self, x: &FourVector) -> FourVector {
        match self {
            Foliation::Hyperplanes(h) => h.normal,
            Foliation::Curved(c) => c.gradient(x),
        }
    }

    /// Unit future-directed normal n(x) to the leaf through x.
    pub fn normal(&self, x: &FourVector) -> FourVector {
        match self {
            Foliation::Hyperplanes(h) => h.normal,
            Foliation::Curved(c) => {
                let g = c.gradient(x);
                g * (1.0 / g.square().sqrt())
            }
        }
    }

    pub fn leaf(&self, tau: f64) -> Leaf {
        match self {
            Foliation::Hyperplanes(h) => Leaf::Plane(Hyperplane {
                normal: h.normal,
                offset: tau,
            }),
            Foliation::Curved(c) => Leaf::Level {
                foliation: c.clone(),
                level: tau,
            },
        }
    }

    /// The unique leaf containing x.
    pub fn leaf_through(&self, x: &FourVector) -> Leaf {
        self.leaf(self.label(x))
    }

    /// The point of leaf τ with the given lab-frame spatial coordinates.
    pub fn point_on_leaf(&self, tau: f64, spatial: [f64; 3]) -> Result<FourVector> {
        let mut x = FourVector::from_spatial(0.0, spatial);
        for _ in 0..100 {
            let r = tau - self.label(&x);
            if r.abs() <= 1e-13 * (1.0 + tau.abs()) {
                return Ok(x);
            }
            // ∂τ/∂t equals the time component of the raised gradient
            x[0] += r / self.label_gradient(&x)[0];
        }
        Err(Error::NoConvergence {
            iterations: 100,
            last_update: (tau - self.label(&x)).abs(),
        })
    }

    pub fn transformed(&self, g: &PoincareTransform) -> Result<Foliation> {
        Ok(match self {
            Foliation::Hyperplanes(h) => Foliation::Hyperplanes(h.transformed(g)?),
            Foliation::Curved(c) => Foliation::Curved(c.transformed(g)),
        })
    }

    pub fn as_hyperplanes(&self) -> Option<&HyperplaneFoliation> {
        match self {
            Foliation::Hyperplanes(h) => Some(h),
            Foliation::Curved(_) => None,
        }
    }
}

/// One leaf of a foliation.
#[derive(Clone, Debug, PartialEq)]
pub enum Leaf {
    Plane(Hyperplane),
    Level { foliation: CurvedTestFoliation, level: f64 },
}

impl Hypersurface for Leaf {
    fn value(&self, x: &FourVector) -> f64 {
        match self {
            Leaf::Plane(p) => p.value(x),
            Leaf::Level { foliation, level } => foliation.value(x) - level,
        }
    }

    fn gradient(&self, x: &FourVector) -> FourVector {
        match self {
            Leaf::Plane(p) => p.gradient(x),
            Leaf::Level { foliation, .. } => foliation.gradient(x),
        }
    }
}

/// The foliation by hyperplanes orthogonal to the state's total four-momentum.
pub fn extract_foliation(psi: &MultiTimeWaveFunction) -> Result<HyperplaneFoliation> {
    let p = psi.total_momentum().map_err(|e| Error::Extraction(e.to_string()))?;
    HyperplaneFoliation::from_momentum(&p)
}
