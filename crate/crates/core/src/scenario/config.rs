use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::SuiteConfig;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::foliation::{
    extract_foliation, CurvedTestFoliation, Foliation, HyperplaneFoliation, TimeFunction, VectorFieldSpec,
};
use crate::generalized::{GeneralizedConfig, SurfaceConfig};
use crate::spacetime::FourVector;
use crate::wavefunction::{MultiTimeWaveFunction, PlaneWaveMode, ProductTerm, Spin};

/// A complete scenario description. Every field is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scenario: Scenario,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub spin: Spin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// (re, im)
    pub coefficient: [f64; 2],
    pub modes: Vec<ModeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveFunctionSpec {
    pub terms: Vec<TermSpec>,
}

impl WaveFunctionSpec {
    pub fn build(&self) -> Result<MultiTimeWaveFunction> {
        let first = self
            .terms
            .first()
            .ok_or_else(|| Error::Config("wave function needs at least one term".into()))?;
        let masses: Vec<f64> = first.modes.iter().map(|m| m.mass).collect();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let modes = t
                    .modes
                    .iter()
                    .map(|m| PlaneWaveMode::new(m.mass, m.momentum, m.spin))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ProductTerm::new(
                    Complex64::new(t.coefficient[0], t.coefficient[1]),
                    modes,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiTimeWaveFunction::new(masses, terms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FoliationSpec {
    /// Hyperplanes orthogonal to the state's total momentum.
    Extracted,
    Hyperplanes {
        normal: FourVector,
    },
    CurvedTest {
        time_function: TimeFunction,
    },
}

impl FoliationSpec {
    pub fn build(&self, psi: &MultiTimeWaveFunction) -> Result<Foliation> {
        Ok(match self {
            FoliationSpec::Extracted => extract_foliation(psi)?.into(),
            FoliationSpec::Hyperplanes { normal } => HyperplaneFoliation::new(*normal)?.into(),
            FoliationSpec::CurvedTest { time_function } => CurvedTestFoliation::new(time_function.clone())?.into(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub cases: usize,
    pub max_rapidity: f64,
    pub max_translation: f64,
    pub points_per_case: usize,
    pub trajectory_length: f64,
    pub integrator: IntegratorConfig,
    pub algebraic_tol: f64,
    pub trajectory_tol_single: f64,
    pub trajectory_tol_pair: f64,
    /// Also run the suite with each injected fault and require it to fail.
    pub fault_injection: bool,
}

impl SuiteSpec {
    pub fn resolve(&self, seed: u64) -> SuiteConfig {
        SuiteConfig {
            cases: self.cases,
            seed,
            max_rapidity: self.max_rapidity,
            max_translation: self.max_translation,
            points_per_case: self.points_per_case,
            trajectory_length: self.trajectory_length,
            integrator: self.integrator,
            algebraic_tol: self.algebraic_tol,
            trajectory_tol_single: self.trajectory_tol_single,
            trajectory_tol_pair: self.trajectory_tol_pair,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceSpec {
    pub wavefunction: WaveFunctionSpec,
    pub box_side: f64,
    pub tau2: f64,
    pub quadrature: usize,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Points per spatial axis.
    pub points: usize,
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    Simulate {
        wavefunction: WaveFunctionSpec,
        foliation: FoliationSpec,
        /// Lab spatial coordinates of each particle on the leaf τ = tau_range[0].
        initial_positions: Vec<[f64; 3]>,
        tau_range: [f64; 2],
        integrator: IntegratorConfig,
    },
    SimulateGeneralized {
        wavefunction: WaveFunctionSpec,
        field: VectorFieldSpec,
        seed_point: FourVector,
        /// Chart coordinates of particles 2…N on Σ of the seed point.
        offsets: Vec<[f64; 3]>,
        length: f64,
        integrator: GeneralizedConfig,
    },
    Equilibrium {
        wavefunction: WaveFunctionSpec,
        foliation: FoliationSpec,
        box_center: FourVector,
        box_side: f64,
        scan: usize,
        tau1: f64,
        samples: usize,
        bins: usize,
        alpha: f64,
        integrator: IntegratorConfig,
    },
    Covariance {
        suite: SuiteSpec,
        hypersurface: HypersurfaceSpec,
    },
    Surface {
        field: VectorFieldSpec,
        seed_point: FourVector,
        directions: usize,
        radius: f64,
        surface: SurfaceConfig,
        transitivity_radius: f64,
    },
    ProbeNonlocality {
        wavefunction: WaveFunctionSpec,
        foliation: FoliationSpec,
        x1: FourVector,
        grid: GridSpec,
    },
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Simulate { .. } => "simulate",
            Scenario::SimulateGeneralized { .. } => "simulate-generalized",
            Scenario::Equilibrium { .. } => "equilibrium",
            Scenario::Covariance { .. } => "covariance",
            Scenario::Surface { .. } => "surface",
            Scenario::ProbeNonlocality { .. } => "probe-nonlocality",
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
