use super::ScenarioConfig;
use crate::error::{Error, Result};

/// A scenario config shipped with the crate.
#[derive(Clone, Copy, Debug)]
pub struct BundledScenario {
    pub name: &'static str,
    pub json: &'static str,
}

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(BundledScenario {
            name: $name,
            json: include_str!(concat!("../../scenarios/", $name, ".json")),
        }),*]
    };
}

const BUNDLED: &[BundledScenario] = bundle![
    "single-rest-particle",
    "two-mode-beat",
    "epr-pair-foliation",
    "curved-foliation-pair",
    "twisted-field-dynamics",
    "stationary-equilibrium",
    "beat-equilibrium",
    "epr-pair-equilibrium",
    "twisted-field-surfaces",
    "gradient-field-surfaces",
    "covariance-suite",
    "nonlocality-probe",
];

impl BundledScenario {
    pub fn config(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::from_json(self.json).map_err(|e| Error::Config(format!("bundled scenario {}: {e}", self.name)))
    }
}

pub fn bundled() -> &'static [BundledScenario] {
    BUNDLED
}

pub fn find_bundled(name: &str) -> Option<&'static BundledScenario> {
    BUNDLED.iter().find(|b| b.name == name)
}
