//! Foliation-free dynamics driven by a unit time-like vector field n.
//!
//! Σ_x is swept out by the curves ẋ = v, v̇ = −n (v^ν v^κ ∂_κ n_ν) with
//! x(0) = x and v(0)·n(x) = 0. Particle k moves along the guidance vector
//! evaluated at the crossings of the other world lines with Σ_{X_k}.

mod surface;

pub use surface::{
    fibonacci_directions, generate_surface, surface_curve, CurveSample, SurfaceChart, SurfaceConfig, SurfaceCurve,
    SurfaceMesh, SEED_ORTHOGONALITY_TOL,
};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::dynamics::{contracted_velocity, SystemHistory, WorldLine, WorldLineSample};
use crate::error::{Error, Result};
use crate::foliation::VectorFieldSpec;
use crate::spacetime::FourVector;
use crate::wavefunction::MultiTimeWaveFunction;

/// Distance from x to Σ_y (Euclidean in coordinates).
pub fn symmetry_probe(field: &VectorFieldSpec, x: &FourVector, y: &FourVector, cfg: &SurfaceConfig) -> Result<f64> {
    field.validate()?;
    let chart = SurfaceChart::new(field, *y, cfg.chart_steps)?;
    Ok(chart.distance(x).0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    /// max over probed pairs of dist(z, Σ_x).
    pub max_distance: f64,
    pub y: FourVector,
    pub z: FourVector,
}

/// Takes y = X_x(R eᵢ) ∈ Σ_x and z = X_y(R eⱼ) ∈ Σ_y for all signed axis
/// pairs i ≠ j and reports the largest distance from z to Σ_x.
pub fn transitivity_probe(
    field: &VectorFieldSpec,
    x: &FourVector,
    radius: f64,
    cfg: &SurfaceConfig,
) -> Result<TransitivityReport> {
    field.validate()?;
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let chart_x = SurfaceChart::new(field, *x, cfg.chart_steps)?;
    let axis = |i: usize, sign: f64| {
        let mut w = [0.0; 3];
        w[i] = sign * radius;
        w
    };
    let mut report = TransitivityReport {
        max_distance: 0.0,
        y: *x,
        z: *x,
    };
    for i in 0..3 {
        for si in [1.0, -1.0] {
            let y = chart_x.point(&axis(i, si));
            let chart_y = SurfaceChart::new(field, y, cfg.chart_steps)?;
            for j in (0..3).filter(|&j| j != i) {
                for sj in [1.0, -1.0] {
                    let z = chart_y.point(&axis(j, sj));
                    let (d, _) = chart_x.distance(&z);
                    if d > report.max_distance {
                        report = TransitivityReport { max_distance: d, y, z };
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralizedConfig {
    /// Parameter step; each particle advances n·ΔX = Δλ per step.
    pub step: f64,
    pub max_steps: usize,
    /// Fixed-point iteration cap per step.
    pub max_iterations: usize,
    /// Convergence threshold on crossing and stage updates.
    pub fixed_point_tol: f64,
    /// RK4 steps for each surface-curve shot.
    pub chart_steps: usize,
    /// Allowed distance of the initial points from Σ_{X₁}.
    pub membership_tol: f64,
}

impl Default for GeneralizedConfig {
    fn default() -> Self {
        GeneralizedConfig {
            step: 1e-2,
            max_steps: 100_000,
            max_iterations: 50,
            fixed_point_tol: 1e-8,
            chart_steps: 64,
            membership_tol: 1e-8,
        }
    }
}

impl GeneralizedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0)
            || self.max_steps == 0
            || self.max_iterations == 0
            || !(self.fixed_point_tol > 0.0)
            || self.chart_steps == 0
            || !(self.membership_tol > 0.0)
        {
            return Err(Error::InvalidInput(format!("invalid generalized config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedDiagnostics {
    pub steps: usize,
    pub max_iterations_used: usize,
    /// Largest final fixed-point update over all steps.
    pub max_final_update: f64,
    /// Largest |X_chart(w) − W_j(s)| at accepted crossings.
    pub max_crossing_residual: f64,
    /// Crossings whose chord from the evaluating particle is time-like.
    pub timelike_chords: usize,
    /// Largest (Y − X)²/|Y − X|²_E over all chords; positive means time-like.
    pub max_chord_timelikeness: f64,
}

#[derive(Clone, Debug)]
pub struct GeneralizedHistory {
    pub history: SystemHistory,
    pub diagnostics: GeneralizedDiagnostics,
}

/// Points X_j = X_seed(w_j) on Σ_seed, with the seed itself first.
pub fn place_on_surface(
    field: &VectorFieldSpec,
    seed: &FourVector,
    offsets: &[[f64; 3]],
    cfg: &GeneralizedConfig,
) -> Result<Vec<FourVector>> {
    let chart = SurfaceChart::new(field, *seed, cfg.chart_steps)?;
    Ok(std::iter::once(*seed)
        .chain(offsets.iter().map(|w| chart.point(w)))
        .collect())
}

/// Warm start for one crossing: chart coordinates and the offset of the
/// line parameter from the last committed sample.
type Warm = Option<([f64; 3], f64)>;

struct Stepper<'a> {
    psi: &'a MultiTimeWaveFunction,
    field: &'a VectorFieldSpec,
    cfg: &'a GeneralizedConfig,
    n: usize,
    diagnostics: GeneralizedDiagnostics,
}

struct StageResult {
    slopes: Vec<FourVector>,
    crossings: Vec<Vec<FourVector>>,
}

enum StageFailure {
    Degenerate { particle: usize, reason: String },
    Fatal(Error),
}

impl From<Error> for StageFailure {
    fn from(e: Error) -> Self {
        StageFailure::Fatal(e)
    }
}

impl Stepper<'_> {
    /// Solves X_chart(w) = W(s) by Newton in (w, s).
    fn crossing(
        &mut self,
        chart: &SurfaceChart,
        line: &WorldLine,
        base: f64,
        warm: &mut Warm,
        guess: f64,
    ) -> Result<(FourVector, f64)> {
        let (mut w, mut s) = match warm {
            Some((w, rel)) => (*w, base + *rel),
            None => {
                let s = base + guess;
                (chart.project(&line.at_param(s).0), s)
            }
        };
        let mut last = f64::INFINITY;
        for _ in 0..40 {
            let (p, dp) = line.at_param(s);
            let r = chart.point(&w) - p;
            let jac = chart.jacobian(&w);
            let mut m = Matrix4::zeros();
            for row in 0..4 {
                for col in 0..3 {
                    m[(row, col)] = jac[col][row];
                }
                m[(row, 3)] = -dp[row];
            }
            let rhs = -Vector4::new(r[0], r[1], r[2], r[3]);
            let delta = m
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Inconsistent("singular crossing system".into()))?;
            for i in 0..3 {
                w[i] += delta[i];
            }
            s += delta[3];
            let moved = (dp * delta[3]).euclidean_norm();
            last = moved;
            if moved <= 1e-13 * (1.0 + p.euclidean_norm()) && r.euclidean_norm() <= 1e-10 {
                break;
            }
        }
        let (p, _) = line.at_param(s);
        let residual = (chart.point(&w) - p).euclidean_norm();
        if !(residual <= 1e-9) {
            return Err(Error::NoConvergence {
                iterations: 40,
                last_update: last.max(residual),
            });
        }
        self.diagnostics.max_crossing_residual = self.diagnostics.max_crossing_residual.max(residual);
        *warm = Some((w, s - base));
        Ok((p, s))
    }

    /// Normalized guidance vectors at stage positions, with crossings of
    /// the other (tentatively extended) world lines.
    fn stage(
        &mut self,
        positions: &[FourVector],
        lines: &[WorldLine],
        base: f64,
        c: f64,
        warm: &mut [Vec<Warm>],
    ) -> std::result::Result<StageResult, StageFailure> {
        let mut slopes = Vec::with_capacity(self.n);
        let mut crossings = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let mut points = vec![positions[k]; self.n];
            if self.n > 1 {
                let chart = SurfaceChart::new(self.field, positions[k], self.cfg.chart_steps)?;
                for j in (0..self.n).filter(|&j| j != k) {
                    let (y, _) = self.crossing(&chart, &lines[j], base, &mut warm[k][j], c)?;
                    let chord = y - positions[k];
                    let e2 = chord.euclidean_norm().powi(2);
                    if e2 > 0.0 {
                        let t = chord.square() / e2;
                        self.diagnostics.max_chord_timelikeness = self.diagnostics.max_chord_timelikeness.max(t);
                        if t > 1e-12 {
                            self.diagnostics.timelike_chords += 1;
                        }
                    }
                    points[j] = y;
                }
            }
            let normals: Vec<FourVector> = points.iter().map(|p| self.field.normal(p)).collect();
            let v = match contracted_velocity(self.psi, &points, &normals, k)? {
                Ok(v) => v,
                Err(d) => {
                    return Err(StageFailure::Degenerate {
                        particle: d.particle,
                        reason: d.reason,
                    })
                }
            };
            let rate = normals[k].dot(&v);
            if !(rate > 0.0) {
                return Err(StageFailure::Degenerate {
                    particle: k,
                    reason: format!("n·v = {rate:e}"),
                });
            }
            slopes.push(v * (1.0 / rate));
            crossings.push(points);
        }
        Ok(StageResult { slopes, crossings })
    }
}

fn max_change(a: &[Vec<FourVector>], b: &[Vec<FourVector>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (*x - *y).euclidean_norm()))
        .fold(0.0, f64::max)
}

/// Integrates the generalized law from `initial` (all on Σ_{X₁}) over
/// λ ∈ [0, length] with a 3-stage Lobatto IIIA step whose implicit
/// coupling through the crossings is resolved by fixed-point iteration.
pub fn integrate_generalized(
    psi: &MultiTimeWaveFunction,
    field: &VectorFieldSpec,
    initial: &[FourVector],
    length: f64,
    cfg: &GeneralizedConfig,
) -> Result<GeneralizedHistory> {
    field.validate()?;
    cfg.validate()?;
    let n = psi.particle_count();
    if initial.len() != n {
        return Err(Error::PointCount {
            expected: n,
            got: initial.len(),
        });
    }
    if !(length > 0.0) {
        return Err(Error::InvalidInput(format!(
            "integration length must be positive, got {length}"
        )));
    }
    let steps = (length / cfg.step).ceil() as usize;
    if steps > cfg.max_steps {
        return Err(Error::InvalidInput(format!(
            "length needs {steps} steps, above max_steps = {}",
            cfg.max_steps
        )));
    }
    let h = length / steps as f64;
    if n > 1 {
        let chart = SurfaceChart::new(field, initial[0], cfg.chart_steps)?;
        for (j, x) in initial.iter().enumerate().skip(1) {
            let (d, _) = chart.distance(x);
            if d > cfg.membership_tol {
                return Err(Error::InvalidInput(format!(
                    "initial point {j} is {d:e} away from the first particle's surface"
                )));
            }
        }
    }

    let mut stepper = Stepper {
        psi,
        field,
        cfg,
        n,
        diagnostics: GeneralizedDiagnostics::default(),
    };
    let mut warm: [Vec<Vec<Warm>>; 3] = std::array::from_fn(|_| vec![vec![None; n]; n]);
    let mut lines: Vec<WorldLine> = vec![WorldLine::new(); n];
    let mut taus = vec![0.0];

    let fail = |f: StageFailure, lines: &[WorldLine], taus: &[f64], tau: f64| match f {
        StageFailure::Fatal(e) => e,
        StageFailure::Degenerate { particle, reason } => Error::Degenerate {
            particle,
            tau,
            reason,
            partial: Some(Box::new(SystemHistory::from_lines(
                taus.to_vec(),
                lines.to_vec(),
                taus.len().saturating_sub(1),
            ))),
        },
    };

    // initial tangents: iterate the velocity with single-sample lines
    let mut tangents: Vec<FourVector> = initial.iter().map(|x| field.normal(x)).collect();
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        let trial: Vec<WorldLine> = (0..n)
            .map(|k| {
                WorldLine::from_samples(vec![WorldLineSample {
                    tau: 0.0,
                    x: initial[k],
                    tangent: tangents[k],
                }])
                .expect("single sample")
            })
            .collect();
        let r = stepper
            .stage(initial, &trial, 0.0, 0.0, &mut warm[0])
            .map_err(|f| fail(f, &[], &[], 0.0))?;
        let change = r
            .slopes
            .iter()
            .zip(&tangents)
            .map(|(a, b)| (*a - *b).euclidean_norm() * h)
            .fold(0.0, f64::max);
        tangents = r.slopes;
        if change < cfg.fixed_point_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: cfg.max_iterations,
            last_update: f64::NAN,
        });
    }
    for k in 0..n {
        lines[k].push(WorldLineSample {
            tau: 0.0,
            x: initial[k],
            tangent: tangents[k],
        });
    }

    let mut x0: Vec<FourVector> = initial.to_vec();
    for step in 1..=steps {
        let base = (step - 1) as f64;
        let tau = step as f64 * h;
        let mut k1 = tangents.clone();
        let mut k2 = tangents.clone();
        let mut k3 = tangents.clone();
        let mut last_crossings: Option<[Vec<Vec<FourVector>>; 3]> = None;
        let mut update = f64::INFINITY;
        let mut iterations = 0;
        while iterations < cfg.max_iterations {
            iterations += 1;
            let mid: Vec<FourVector> = (0..n)
                .map(|k| x0[k] + (k1[k] * (5.0 / 24.0) + k2[k] * (1.0 / 3.0) - k3[k] * (1.0 / 24.0)) * h)
                .collect();
            let end: Vec<FourVector> = (0..n)
                .map(|k| x0[k] + (k1[k] + k2[k] * 4.0 + k3[k]) * (h / 6.0))
                .collect();
            for k in 0..n {
                lines[k].push(WorldLineSample {
                    tau,
                    x: end[k],
                    tangent: k3[k],
                });
            }
            let results = [(&x0, 0.0), (&mid, 0.5), (&end, 1.0)]
                .into_iter()
                .enumerate()
                .map(|(i, (pos, c))| stepper.stage(pos, &lines, base, c, &mut warm[i]))
                .collect::<std::result::Result<Vec<_>, _>>();
            for line in lines.iter_mut() {
                line.truncate(step);
            }
            let results = results.map_err(|f| fail(f, &lines, &taus, tau - h))?;
            let [r1, r2, r3]: [StageResult; 3] = results.try_into().ok().expect("three stages");
            let slope_change = [(&r1.slopes, &k1), (&r2.slopes, &k2), (&r3.slopes, &k3)]
                .iter()
                .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(p, q)| (*p - *q).euclidean_norm() * h))
                .fold(0.0, f64::max);
            let crossings = [r1.crossings, r2.crossings, r3.crossings];
            let crossing_change = match &last_crossings {
                Some(prev) => (0..3).map(|i| max_change(&prev[i], &crossings[i])).fold(0.0, f64::max),
                None => f64::INFINITY,
            };
            update = if n > 1 {
                slope_change.max(crossing_change)
            } else {
                slope_change
            };
            k1 = r1.slopes;
            k2 = r2.slopes;
            k3 = r3.slopes;
            last_crossings = Some(crossings);
            if update < cfg.fixed_point_tol {
                break;
            }
        }
        if !(update < cfg.fixed_point_tol) {
            return Err(Error::NoConvergence {
                iterations,
                last_update: update,
            });
        }
        let d = &mut stepper.diagnostics;
        d.max_iterations_used = d.max_iterations_used.max(iterations);
        d.max_final_update = d.max_final_update.max(update);
        let end: Vec<FourVector> = (0..n)
            .map(|k| x0[k] + (k1[k] + k2[k] * 4.0 + k3[k]) * (h / 6.0))
            .collect();
        for k in 0..n {
            lines[k].push(WorldLineSample {
                tau,
                x: end[k],
                tangent: k3[k],
            });
        }
        taus.push(tau);
        // warm starts are stored relative to the last committed sample
        for stage in warm.iter_mut() {
            for row in stage.iter_mut() {
                for w in row.iter_mut().flatten() {
                    w.1 -= 1.0;
                }
            }
        }
        tangents = k3;
        x0 = end;
    }
    stepper.diagnostics.steps = steps;
    Ok(GeneralizedHistory {
        history: SystemHistory::from_lines(taus, lines, steps),
        diagnostics: stepper.diagnostics,
    })
}

#[cfg(test)]
mod tests;
