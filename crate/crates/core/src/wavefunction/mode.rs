use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{pauli, FourVector, Spinor};

/// Mass-shell tolerance |p·p − m²|.
pub const MASS_SHELL_TOL: f64 = 1e-10;

/// Spin label of a positive-energy mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn from_index(s: u8) -> Result<Spin> {
        match s {
            1 => Ok(Spin::Up),
            2 => Ok(Spin::Down),
            other => Err(Error::InvalidInput(format!("spin index must be 1 or 2, got {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Spin::Up => 1,
            Spin::Down => 2,
        }
    }

    fn pauli_spinor(self) -> Vector2<Complex64> {
        match self {
            Spin::Up => Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Spin::Down => Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        }
    }
}

/// A positive-energy plane-wave Dirac mode u_s(p) e^{−ip·x}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWaveMode {
    momentum: FourVector,
    spin: Spin,
    mass: f64,
}

impl PlaneWaveMode {
    /// Mode with on-shell energy p⁰ = √(|p|² + m²).
    pub fn new(mass: f64, momentum: [f64; 3], spin: Spin) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
        }
        if momentum.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite 3-momentum".into()));
        }
        let p2 = momentum.iter().map(|c| c * c).sum::<f64>();
        let energy = (p2 + mass * mass).sqrt();
        Ok(PlaneWaveMode {
            momentum: FourVector::from_spatial(energy, momentum),
            spin,
            mass,
        })
    }

    pub fn at_rest(mass: f64, spin: Spin) -> Result<Self> {
        Self::new(mass, [0.0; 3], spin)
    }

    /// A mode whose four-momentum is taken as given, with no mass-shell
    /// check. Off-shell modes do not solve the Dirac equation; this exists
    /// for fault-injection tests.
    pub fn new_unchecked(mass: f64, momentum: FourVector, spin: Spin) -> Self {
        PlaneWaveMode { momentum, spin, mass }
    }

    pub fn momentum(&self) -> FourVector {
        self.momentum
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn energy(&self) -> f64 {
        self.momentum[0]
    }

    pub fn mass_shell_defect(&self) -> f64 {
        (self.momentum.square() - self.mass * self.mass).abs()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.momentum[0] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mode energy must be positive, got {}",
                self.momentum[0]
            )));
        }
        let defect = self.mass_shell_defect();
        if defect > MASS_SHELL_TOL * (1.0 + self.momentum[0] * self.momentum[0]) {
            return Err(Error::InvalidInput(format!(
                "mode off mass shell: |p·p − m²| = {defect:e}"
            )));
        }
        Ok(())
    }

    /// The same spin label on the momentum `p`, with energy recomputed on shell.
    pub(crate) fn with_momentum(&self, spatial: [f64; 3], spin: Spin) -> PlaneWaveMode {
        PlaneWaveMode::new(self.mass, spatial, spin).expect("finite momentum and positive mass")
    }
}

/// u_s(p) = √(E+m) (χ_s ; σ·p χ_s /(E+m)), normalized to u†u = 2E, ūu = 2m.
pub fn dirac_spinor(mode: &PlaneWaveMode) -> Spinor {
    let e = mode.momentum[0];
    let m = mode.mass;
    let chi = mode.spin.pauli_spinor();
    let sigma = pauli();
    let p = mode.momentum.spatial();
    let sp = sigma[0] * Complex64::new(p[0], 0.0)
        + sigma[1] * Complex64::new(p[1], 0.0)
        + sigma[2] * Complex64::new(p[2], 0.0);
    let lower = sp * chi / Complex64::new(e + m, 0.0);
    let scale = Complex64::new((e + m).sqrt(), 0.0);
    Spinor::new(chi[0], chi[1], lower[0], lower[1]) * scale
}
