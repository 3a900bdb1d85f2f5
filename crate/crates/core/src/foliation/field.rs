use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TimeFunction;
use crate::error::{Error, Result};
use crate::spacetime::{FourVector, METRIC};

/// Axis-aligned coordinate box in space-time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub lo: FourVector,
    pub hi: FourVector,
}

impl Default for Region {
    fn default() -> Self {
        Region::cube(10.0)
    }
}

impl Region {
    /// The box [−half, half]⁴.
    pub fn cube(half: f64) -> Self {
        Region {
            lo: FourVector([-half; 4]),
            hi: FourVector([half; 4]),
        }
    }

    pub fn contains(&self, x: &FourVector) -> bool {
        (0..4).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FourVector {
        FourVector(std::array::from_fn(|i| rng.random_range(self.lo[i]..=self.hi[i])))
    }
}

/// A unit time-like vector n(x) together with its Jacobian ∂_κ n^ν, indexed [κ][ν].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldValue {
    pub n: FourVector,
    pub jacobian: [[f64; 4]; 4],
}

impl FieldValue {
    /// v^κ ∂_κ n^ν: the derivative of n along v.
    pub fn directional(&self, v: &FourVector) -> FourVector {
        FourVector(std::array::from_fn(|nu| {
            (0..4).map(|kappa| v[kappa] * self.jacobian[kappa][nu]).sum()
        }))
    }

    /// Max-norm of the fully antisymmetrized n_{[λ}∂_μ n_{ν]}.
    pub fn frobenius_obstruction(&self) -> f64 {
        let n_low = self.n.lower();
        // d[μ][ν] = ∂_μ n_ν
        let d: [[f64; 4]; 4] = std::array::from_fn(|mu| std::array::from_fn(|nu| METRIC[nu] * self.jacobian[mu][nu]));
        let term = |l: usize, m: usize, n: usize| n_low[l] * d[m][n];
        let mut worst: f64 = 0.0;
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    let a =
                        (term(l, m, n) + term(m, n, l) + term(n, l, m) - term(l, n, m) - term(n, m, l) - term(m, l, n))
                            / 6.0;
                    worst = worst.max(a.abs());
                }
            }
        }
        worst
    }
}

/// Analytic unit time-like vector fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorFieldSpec {
    /// n(x) = n₀ everywhere.
    Constant { normal: FourVector },
    /// n ∝ ∇T for a smooth time function T; integrable.
    Gradient { time_function: TimeFunction },
    /// n ∝ (1, ε sin(kz), 0, 0); not hypersurface-orthogonal for ε ≠ 0.
    Twisted { epsilon: f64, wavenumber: f64 },
}

impl VectorFieldSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            VectorFieldSpec::Constant { normal } => {
                if !(normal[0] > 0.0) || (normal.square() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "constant field must be unit future time-like, got {normal}"
                    )));
                }
            }
            VectorFieldSpec::Gradient { time_function } => time_function.validate()?,
            VectorFieldSpec::Twisted { epsilon, wavenumber } => {
                if !(epsilon.abs() < 1.0) || !(*wavenumber > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "twisted field needs |ε| < 1 and k > 0, got ε = {epsilon}, k = {wavenumber}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Unnormalized field m(x) and its Jacobian ∂_κ m^ν.
    fn raw(&self, x: &FourVector) -> (FourVector, [[f64; 4]; 4]) {
        match self {
            VectorFieldSpec::Constant { normal } => (*normal, [[0.0; 4]; 4]),
            VectorFieldSpec::Gradient { time_function } => {
                (time_function.gradient(x), time_function.gradient_jacobian(x))
            }
            VectorFieldSpec::Twisted { epsilon, wavenumber } => {
                let kz = wavenumber * x[3];
                let mut jac = [[0.0; 4]; 4];
                jac[3][1] = epsilon * wavenumber * kz.cos();
                (FourVector::new(1.0, epsilon * kz.sin(), 0.0, 0.0), jac)
            }
        }
    }

    /// n(x) = m/√(m·m) and ∂_κ n = (∂_κ m − n (n·∂_κ m))/√(m·m).
    pub fn at(&self, x: &FourVector) -> FieldValue {
        let (m, dm) = self.raw(x);
        let norm = m.square().sqrt();
        let n = m * (1.0 / norm);
        let mut jacobian = [[0.0; 4]; 4];
        for kappa in 0..4 {
            let dk = FourVector(dm[kappa]);
            let along = n.dot(&dk);
            for nu in 0..4 {
                jacobian[kappa][nu] = (dk[nu] - n[nu] * along) / norm;
            }
        }
        FieldValue { n, jacobian }
    }

    pub fn normal(&self, x: &FourVector) -> FourVector {
        self.at(x).n
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, VectorFieldSpec::Constant { .. })
    }
}

/// Max over `samples` seeded points in `region` of the Frobenius obstruction
/// |n ∧ dn|. Zero exactly for hypersurface-orthogonal fields.
pub fn integrability_measure(field: &VectorFieldSpec, region: &Region, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput(
            "integrability_measure needs at least one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f1e1d);
    Ok((0..samples)
        .map(|_| field.at(&region.sample(&mut rng)).frobenius_obstruction())
        .fold(0.0, f64::max))
}
