//! Batch scenarios: a JSON config in, CSV/JSON artifacts and a manifest out.
//!
//! Everything numerical is computed before the output directory is touched,
//! so a rejected config or a failed run leaves no files behind.

mod bundled;
mod config;
mod output;

pub use bundled::{bundled, find_bundled, BundledScenario};
pub use config::{
    FoliationSpec, GridSpec, HypersurfaceSpec, ModeSpec, Scenario, ScenarioConfig, SuiteSpec, TermSpec,
    WaveFunctionSpec,
};
pub use output::{FileRecord, RunManifest};

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::covariance::{check_momentum_hypersurface_independence, pinned_suite, run_suite, Fault, Harness};
use crate::dynamics::{integrate, SystemHistory};
use crate::equilibrium::{equivariance_test, nonlocality_probe, AxisTest, EquivarianceConfig, LeafBox, LeafSeries};
use crate::error::{Error, Result};
use crate::foliation::Foliation;
use crate::generalized::{
    fibonacci_directions, generate_surface, integrate_generalized, place_on_surface, transitivity_probe,
};
use crate::spacetime::FourVector;

use output::{csv_row, OutputSet};

/// Process exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Io = 1,
    Config = 2,
    Numerical = 3,
    CheckFailed = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) | Error::PointCount { .. } | Error::Extraction(_) => {
                ExitStatus::Config
            }
            Error::Io(_) | Error::Json(_) => ExitStatus::Io,
            _ => ExitStatus::Numerical,
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub manifest: RunManifest,
    /// False when a statistical test or covariance check failed.
    pub pass: bool,
    pub message: String,
}

impl RunOutcome {
    pub fn status(&self) -> ExitStatus {
        if self.pass {
            ExitStatus::Success
        } else {
            ExitStatus::CheckFailed
        }
    }
}

/// Applies overrides; the result is what the manifest records.
pub fn resolve(mut config: ScenarioConfig, opts: &RunOptions) -> ScenarioConfig {
    if let Some(dir) = &opts.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    config
}

/// Parses, resolves, runs and writes a scenario.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    run(ScenarioConfig::from_json(&text)?, opts)
}

pub fn run(config: ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let config = resolve(config, opts);
    let started = output::unix_time();
    let computed = compute(&config)?;
    let manifest = computed.outputs.write(&config, started)?;
    Ok(RunOutcome {
        output_dir: config.output_dir.clone(),
        manifest,
        pass: computed.pass,
        message: computed.message,
    })
}

struct Computed {
    outputs: OutputSet,
    pass: bool,
    message: String,
}

/// One run is sample 0; the ensemble tools reuse the same columns.
fn trajectory_csv(history: &SystemHistory) -> String {
    let mut s = String::from("sample_id,particle,tau,t,x,y,z\n");
    for (k, line) in history.lines().iter().enumerate() {
        for sample in line.samples() {
            s.push_str(&csv_row(&["0".to_string(), k.to_string()], &[sample.tau], &sample.x));
        }
    }
    s
}

fn histograms_csv(stages: &[(&str, &[AxisTest])], side: f64) -> String {
    let mut s = String::from("stage,test,bin,lower,upper,observed,expected\n");
    for (stage, tests) in stages {
        for t in *tests {
            let width = side / t.observed.len() as f64;
            for (b, (o, e)) in t.observed.iter().zip(&t.expected).enumerate() {
                s.push_str(&format!(
                    "{stage},{},{b},{:.16e},{:.16e},{o},{:.16e}\n",
                    t.label,
                    b as f64 * width,
                    (b + 1) as f64 * width,
                    e
                ));
            }
        }
    }
    s
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn grid_offsets(points: usize, half_width: f64) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
        .collect()
}

fn equilibrium_box(foliation: &Foliation, center: FourVector, side: f64, scan: usize) -> Result<LeafBox> {
    let h = foliation
        .as_hyperplanes()
        .ok_or_else(|| Error::Config("equilibrium scenarios need a hyperplane foliation".into()))?;
    let mut b = LeafBox::new(h.normal(), center, side)?;
    b.scan = scan;
    b.validate()?;
    Ok(b)
}

fn compute(config: &ScenarioConfig) -> Result<Computed> {
    let mut out = OutputSet::default();
    let seed = config.seed;
    let (pass, message) = match &config.scenario {
        Scenario::Simulate {
            wavefunction,
            foliation,
            initial_positions,
            tau_range,
            integrator,
        } => {
            let psi = wavefunction.build()?;
            let f = foliation.build(&psi)?;
            integrator.validate()?;
            let initial = initial_positions
                .iter()
                .map(|s| f.point_on_leaf(tau_range[0], *s))
                .collect::<Result<Vec<_>>>()?;
            let history = integrate(&psi, &f, &initial, (tau_range[0], tau_range[1]), integrator)?;
            out.add("trajectories.csv", trajectory_csv(&history).into_bytes());
            let summary = json!({
                "particles": history.particle_count(),
                "leaves": history.taus().len(),
                "diagnostics": history.diagnostics(),
                "final_configuration": history.final_configuration(),
            });
            out.add("summary.json", to_json(&summary)?);
            (true, format!("integrated {} leaves", history.taus().len()))
        }
        Scenario::SimulateGeneralized {
            wavefunction,
            field,
            seed_point,
            offsets,
            length,
            integrator,
        } => {
            let psi = wavefunction.build()?;
            field.validate()?;
            integrator.validate()?;
            let initial = place_on_surface(field, seed_point, offsets, integrator)?;
            let run = integrate_generalized(&psi, field, &initial, *length, integrator)?;
            out.add("trajectories.csv", trajectory_csv(&run.history).into_bytes());
            let summary = json!({
                "particles": run.history.particle_count(),
                "steps": run.diagnostics.steps,
                "diagnostics": run.diagnostics,
                "initial_configuration": initial,
                "final_configuration": run.history.final_configuration(),
            });
            out.add("summary.json", to_json(&summary)?);
            (true, format!("integrated {} steps", run.diagnostics.steps))
        }
        Scenario::Equilibrium {
            wavefunction,
            foliation,
            box_center,
            box_side,
            scan,
            tau1,
            samples,
            bins,
            alpha,
            integrator,
        } => {
            let psi = wavefunction.build()?;
            let f = foliation.build(&psi)?;
            let leaf_box = equilibrium_box(&f, *box_center, *box_side, *scan)?;
            integrator.validate()?;
            let normal = leaf_box.normal;
            if !LeafSeries::new(&psi, &normal, &leaf_box)?.is_commensurate() {
                return Err(Error::Config("momenta are not commensurate with the box".into()));
            }
            let cfg = EquivarianceConfig {
                samples: *samples,
                bins: *bins,
                seed,
                alpha: *alpha,
                integrator: *integrator,
            };
            let report = equivariance_test(&psi, &f, &leaf_box, *tau1, &cfg)?;
            out.add("statistics.json", to_json(&report)?);
            out.add(
                "histograms.csv",
                histograms_csv(
                    &[("initial", &report.initial), ("transported", &report.transported)],
                    leaf_box.side,
                )
                .into_bytes(),
            );
            (
                report.pass,
                format!(
                    "{} tests, min p = {:.4}, alpha = {}, failures = {}",
                    report.transported.len(),
                    report.min_p,
                    report.alpha,
                    report.failures
                ),
            )
        }
        Scenario::Covariance { suite, hypersurface } => {
            let cfg = suite.resolve(seed);
            cfg.integrator.validate()?;
            let h_psi = hypersurface.wavefunction.build()?;
            let h_box = LeafBox::new(FourVector::TIME, FourVector::ZERO, hypersurface.box_side)?;
            let cases = pinned_suite(&cfg)?;
            let report = run_suite(&cases, &cfg, Harness::SOUND)?;
            let independence = check_momentum_hypersurface_independence(
                &h_psi,
                &h_box,
                hypersurface.tau2,
                hypersurface.quadrature,
                hypersurface.tolerance,
            )?;
            let mut faults = Vec::new();
            if suite.fault_injection {
                for fault in [
                    Fault::FlippedSpinGenerator,
                    Fault::InverseFoliationAction,
                    Fault::UntransformedInitialData,
                ] {
                    let r = run_suite(&cases, &cfg, Harness::with_fault(fault))?;
                    faults.push(json!({ "fault": fault, "detected": !r.pass, "worst": r.worst }));
                }
            }
            let detected = faults.iter().all(|f| f["detected"] == true);
            let pass = report.pass && independence.pass && detected;
            out.add(
                "covariance.json",
                to_json(&json!({
                    "suite": report,
                    "hypersurface_independence": independence,
                    "fault_injection": faults,
                    "pass": pass,
                }))?,
            );
            let worst: Vec<String> = report.worst.iter().map(|(c, d)| format!("{c} {d:.2e}")).collect();
            (pass, format!("{} cases; worst: {}", cases.len(), worst.join(", ")))
        }
        Scenario::Surface {
            field,
            seed_point,
            directions,
            radius,
            surface,
            transitivity_radius,
        } => {
            field.validate()?;
            surface.validate()?;
            if *directions == 0 {
                return Err(Error::Config("direction count must be positive".into()));
            }
            let dirs = fibonacci_directions(*directions);
            let mesh = generate_surface(field, seed_point, &dirs, *radius, surface)?;
            let transitivity = transitivity_probe(field, seed_point, *transitivity_radius, surface)?;
            let mut csv = String::from("point,curve,sample,sigma,t,x,y,z\n");
            for (i, (p, o)) in mesh.points.iter().zip(&mesh.origin).enumerate() {
                let (curve, sample, sigma) = match o {
                    Some((c, s)) => (c.to_string(), s.to_string(), mesh.curves[*c].samples[*s].sigma),
                    None => ("-1".into(), "0".into(), 0.0),
                };
                csv.push_str(&csv_row(&[i.to_string(), curve, sample], &[sigma], p));
            }
            out.add("surface.csv", csv.into_bytes());
            let truncated = mesh.curves.iter().filter(|c| c.truncated).count();
            out.add(
                "surface.json",
                to_json(&json!({
                    "seed": mesh.seed,
                    "frame": mesh.frame,
                    "points": mesh.points.len(),
                    "curves": mesh.curves.len(),
                    "truncated_curves": truncated,
                    "failures": mesh.failures,
                    "max_constraint_drift": mesh.max_constraint_drift(),
                    "adjacency": mesh.adjacency,
                    "transitivity": transitivity,
                }))?,
            );
            (
                true,
                format!(
                    "{} points, drift {:.2e}, transitivity {:.3e}",
                    mesh.points.len(),
                    mesh.max_constraint_drift(),
                    transitivity.max_distance
                ),
            )
        }
        Scenario::ProbeNonlocality {
            wavefunction,
            foliation,
            x1,
            grid,
        } => {
            let psi = wavefunction.build()?;
            let f = foliation.build(&psi)?;
            if grid.points == 0 || !(grid.half_width >= 0.0) {
                return Err(Error::Config(format!("invalid grid {grid:?}")));
            }
            let tau = f.label(x1);
            let offsets = grid_offsets(grid.points, grid.half_width);
            let mut points = Vec::with_capacity(offsets.len().pow(3));
            for a in &offsets {
                for b in &offsets {
                    for c in &offsets {
                        points.push(f.point_on_leaf(tau, [x1[1] + a, x1[2] + b, x1[3] + c])?);
                    }
                }
            }
            let report = nonlocality_probe(&psi, &f, x1, &points)?;
            out.add("nonlocality.json", to_json(&report)?);
            (
                true,
                format!(
                    "max deviation {:.3e} over {} points",
                    report.max_deviation,
                    points.len()
                ),
            )
        }
    };
    Ok(Computed {
        outputs: out,
        pass,
        message,
    })
}
