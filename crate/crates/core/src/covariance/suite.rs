use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CovarianceReport, FoliationSource, Harness};
use crate::dynamics::IntegratorConfig;
use crate::error::Result;
use crate::foliation::extract_foliation;
use crate::presets;
use crate::spacetime::{FourVector, PoincareTransform};
use crate::wavefunction::MultiTimeWaveFunction;

/// One (state, transform) pair with the initial data for its trajectory check.
#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub label: String,
    pub psi: MultiTimeWaveFunction,
    pub g: PoincareTransform,
    pub configurations: Vec<Vec<FourVector>>,
    pub initial: Vec<FourVector>,
    pub range: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub cases: usize,
    pub seed: u64,
    pub max_rapidity: f64,
    pub max_translation: f64,
    pub points_per_case: usize,
    pub trajectory_length: f64,
    pub integrator: IntegratorConfig,
    pub algebraic_tol: f64,
    pub trajectory_tol_single: f64,
    pub trajectory_tol_pair: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            cases: 20,
            seed: 2024,
            max_rapidity: 2.0,
            max_translation: 10.0,
            points_per_case: 20,
            trajectory_length: 2.0,
            integrator: IntegratorConfig::with_step(2.5e-3),
            algebraic_tol: 1e-10,
            trajectory_tol_single: 1e-6,
            trajectory_tol_pair: 1e-5,
        }
    }
}

fn random_point<R: Rng>(rng: &mut R, scale: f64) -> FourVector {
    FourVector(std::array::from_fn(|_| rng.random_range(-scale..scale)))
}

/// Pinned cases: even indices are single particles, odd indices entangled
/// pairs; transforms are bounded by the configured rapidity and translation.
pub fn pinned_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = Vec::with_capacity(cfg.cases);
    for i in 0..cfg.cases {
        let particles = 1 + i % 2;
        let psi = presets::random_state(&mut rng, particles, 2, 1.0);
        let g = PoincareTransform::random(&mut rng, cfg.max_rapidity, cfg.max_translation);
        let configurations = (0..cfg.points_per_case)
            .map(|_| (0..particles).map(|_| random_point(&mut rng, 5.0)).collect())
            .collect();
        let f = extract_foliation(&psi)?;
        let x0 = random_point(&mut rng, 1.0);
        let tau0 = f.normal().dot(&x0);
        let foliation: crate::foliation::Foliation = f.into();
        let mut initial = vec![x0];
        for _ in 1..particles {
            let s: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.5..1.5));
            initial.push(foliation.point_on_leaf(tau0, s)?);
        }
        cases.push(SuiteCase {
            label: format!("case-{i:02}-n{particles}"),
            psi,
            g,
            configurations,
            initial,
            range: (tau0, tau0 + cfg.trajectory_length),
        });
    }
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub cases: Vec<(String, Vec<CovarianceReport>)>,
    pub pass: bool,
    /// Largest deviation per check name.
    pub worst: Vec<(String, f64)>,
}

/// Runs current, momentum, foliation and trajectory checks on every case.
/// Cases run in parallel; results keep suite order.
pub fn run_suite(cases: &[SuiteCase], cfg: &SuiteConfig, harness: Harness) -> Result<SuiteReport> {
    let results: Vec<Result<(String, Vec<CovarianceReport>)>> = cases
        .par_iter()
        .map(|case| {
            let traj_tol = if case.psi.particle_count() == 1 {
                cfg.trajectory_tol_single
            } else {
                cfg.trajectory_tol_pair
            };
            let probes: Vec<FourVector> = case.configurations.iter().map(|c| c[0]).collect();
            let reports = vec![
                harness.current(&case.psi, &case.g, &case.configurations, cfg.algebraic_tol)?,
                harness.momentum(&case.psi, &case.g, cfg.algebraic_tol)?,
                harness.foliation(&case.psi, &case.g, &probes, cfg.algebraic_tol)?,
                harness.trajectory(
                    &case.psi,
                    &FoliationSource::Extracted,
                    &case.g,
                    &case.initial,
                    case.range,
                    &cfg.integrator,
                    traj_tol,
                )?,
            ];
            Ok((case.label.clone(), reports))
        })
        .collect();
    let cases = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut worst: Vec<(String, f64)> = Vec::new();
    for (_, reports) in &cases {
        for r in reports {
            let d = r.deviation.unwrap_or(f64::INFINITY);
            match worst.iter_mut().find(|(name, _)| *name == r.check) {
                Some((_, w)) => *w = w.max(d),
                None => worst.push((r.check.clone(), d)),
            }
        }
    }
    let pass = cases.iter().all(|(_, rs)| rs.iter().all(|r| r.pass));
    Ok(SuiteReport { cases, pass, worst })
}
