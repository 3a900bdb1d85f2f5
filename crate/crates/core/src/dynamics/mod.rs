//! Foliation-based guidance: velocity fields from the contracted current
//! tensor, leaf-to-leaf trajectory integration and crossing detection.

mod worldline;

pub use worldline::{curve_deviation_within, hausdorff, Crossing, WorldLine, WorldLineSample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::Foliation;
use crate::spacetime::{FourVector, Hypersurface, PoincareTransform};
use crate::wavefunction::MultiTimeWaveFunction;

/// Maximal label mismatch for points said to lie on one leaf.
pub const LEAF_TOL: f64 = 1e-9;

/// Relative size of Im(v) tolerated before the contraction is declared inconsistent.
const VELOCITY_REALITY_TOL: f64 = 1e-8;

/// |v| below this fraction of the state's current scale counts as a node.
const NODE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta.
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Leaf-label step Δτ.
    pub step: f64,
    pub max_steps: usize,
    /// Target accuracy: leaf projection tolerance and Richardson threshold.
    pub tolerance: f64,
    pub method: Method,
    /// Repeat the run at Δτ/2 and report the Richardson error estimate.
    pub richardson: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-2,
            max_steps: 1_000_000,
            tolerance: 1e-9,
            method: Method::Rk4,
            richardson: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        IntegratorConfig {
            step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidInput(format!("step must be positive, got {}", self.step)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationDiagnostics {
    pub steps: usize,
    /// Largest |τ(X_k) − τ| over all stored samples.
    pub max_leaf_residual: f64,
    /// max_k |X_k(Δτ) − X_k(Δτ/2)| / 15 at the final leaf, when requested.
    pub richardson_error: Option<f64>,
}

/// N world lines sampled on a common parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemHistory {
    taus: Vec<f64>,
    lines: Vec<WorldLine>,
    diagnostics: IntegrationDiagnostics,
}

impl SystemHistory {
    pub(crate) fn new(particles: usize) -> Self {
        SystemHistory {
            taus: Vec::new(),
            lines: vec![WorldLine::new(); particles],
            diagnostics: IntegrationDiagnostics::default(),
        }
    }

    pub(crate) fn push(&mut self, tau: f64, points: &[FourVector], tangents: &[FourVector]) {
        self.taus.push(tau);
        for ((line, x), t) in self.lines.iter_mut().zip(points).zip(tangents) {
            line.push(WorldLineSample {
                tau,
                x: *x,
                tangent: *t,
            });
        }
    }

    pub(crate) fn from_lines(taus: Vec<f64>, lines: Vec<WorldLine>, steps: usize) -> Self {
        SystemHistory {
            taus,
            lines,
            diagnostics: IntegrationDiagnostics {
                steps,
                ..IntegrationDiagnostics::default()
            },
        }
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn lines(&self) -> &[WorldLine] {
        &self.lines
    }

    pub fn line(&self, k: usize) -> &WorldLine {
        &self.lines[k]
    }

    pub fn particle_count(&self) -> usize {
        self.lines.len()
    }

    pub fn diagnostics(&self) -> &IntegrationDiagnostics {
        &self.diagnostics
    }

    /// The configuration (X₁, …, X_N) at grid index i.
    pub fn configuration(&self, i: usize) -> Vec<FourVector> {
        self.lines.iter().map(|l| l.samples()[i].x).collect()
    }

    pub fn final_configuration(&self) -> Vec<FourVector> {
        self.configuration(self.taus.len() - 1)
    }

    /// Crossings of every world line with `surface`.
    pub fn crossings<S: Hypersurface + ?Sized>(&self, surface: &S) -> Result<Vec<Crossing>> {
        self.lines.iter().map(|l| l.crossing(surface)).collect()
    }

    pub fn transformed(&self, g: &PoincareTransform) -> SystemHistory {
        SystemHistory {
            taus: self.taus.clone(),
            lines: self.lines.iter().map(|l| l.transformed(g)).collect(),
            diagnostics: self.diagnostics,
        }
    }
}

/// Degeneracy of one particle's velocity, before it is tied to a τ.
pub(crate) struct DegenerateVelocity {
    pub particle: usize,
    pub reason: String,
}

/// v_k = J contracted with `normals[j]` on every slot j ≠ k, without leaf checks.
pub(crate) fn contracted_velocity(
    psi: &MultiTimeWaveFunction,
    points: &[FourVector],
    normals: &[FourVector],
    k: usize,
) -> Result<std::result::Result<FourVector, DegenerateVelocity>> {
    let normal_scale = normals
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| v.euclidean_norm())
        .product::<f64>();
    let zero = NODE_TOL * psi.current_scale() * normal_scale;
    let c = psi.contraction(points, normals, Some(k))?;
    let v = FourVector(c.map(|z| z.re));
    let im = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = v.euclidean_norm();
    if !v.is_finite() || scale <= zero {
        return Ok(Err(DegenerateVelocity {
            particle: k,
            reason: "contracted current vanishes".into(),
        }));
    }
    if im > VELOCITY_REALITY_TOL * scale {
        return Err(Error::Inconsistent(format!(
            "velocity of particle {k} has imaginary part {im:e} (|v| = {scale:e})"
        )));
    }
    Ok(Ok(v))
}

pub(crate) fn contracted_velocities(
    psi: &MultiTimeWaveFunction,
    points: &[FourVector],
    normals: &[FourVector],
) -> Result<std::result::Result<Vec<FourVector>, DegenerateVelocity>> {
    let mut out = Vec::with_capacity(points.len());
    for k in 0..psi.particle_count() {
        match contracted_velocity(psi, points, normals, k)? {
            Ok(v) => out.push(v),
            Err(d) => return Ok(Err(d)),
        }
    }
    Ok(Ok(out))
}

/// Guidance vectors v_k (unnormalized) for a configuration on one leaf.
///
/// Each v_k is future-causal; a vector with non-positive normal component
/// is reported as a degeneracy of that particle.
pub fn velocity_field(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    points: &[FourVector],
) -> Result<Vec<FourVector>> {
    if points.len() != psi.particle_count() {
        return Err(Error::PointCount {
            expected: psi.particle_count(),
            got: points.len(),
        });
    }
    let tau = foliation.label(&points[0]);
    check_on_leaf(foliation, points, tau)?;
    let normals: Vec<FourVector> = points.iter().map(|x| foliation.normal(x)).collect();
    let v = contracted_velocities(psi, points, &normals)?.map_err(|d| Error::degenerate(d.particle, tau, d.reason))?;
    for (k, vk) in v.iter().enumerate() {
        let along = vk.dot(&normals[k]);
        if !(along > 0.0) {
            return Err(Error::degenerate(k, tau, format!("v·n = {along:e}")));
        }
    }
    Ok(v)
}

fn check_on_leaf(foliation: &Foliation, points: &[FourVector], tau: f64) -> Result<()> {
    for (k, x) in points.iter().enumerate() {
        let r = (foliation.label(x) - tau).abs();
        if r > LEAF_TOL {
            return Err(Error::InvalidInput(format!(
                "point {k} = {x} is off the leaf τ = {tau} by {r:e}"
            )));
        }
    }
    Ok(())
}

/// dX_k/dτ = v_k / (∇τ·v_k), so every particle advances one unit of leaf
/// label per unit τ.
fn slopes(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    points: &[FourVector],
) -> Result<std::result::Result<Vec<FourVector>, DegenerateVelocity>> {
    let normals: Vec<FourVector> = points.iter().map(|x| foliation.normal(x)).collect();
    let v = match contracted_velocities(psi, points, &normals)? {
        Ok(v) => v,
        Err(d) => return Ok(Err(d)),
    };
    let mut out = Vec::with_capacity(v.len());
    for (k, vk) in v.iter().enumerate() {
        let rate = foliation.label_gradient(&points[k]).dot(vk);
        if !(rate > 0.0) || !rate.is_finite() {
            return Ok(Err(DegenerateVelocity {
                particle: k,
                reason: format!("normal component of v is {rate:e}"),
            }));
        }
        out.push(*vk * (1.0 / rate));
    }
    Ok(Ok(out))
}

/// Moves x along `direction` until τ(x) = tau (Newton along a fixed line).
fn project_onto_leaf(
    foliation: &Foliation,
    x: FourVector,
    direction: &FourVector,
    tau: f64,
    tol: f64,
) -> Option<FourVector> {
    let mut x = x;
    for _ in 0..50 {
        let r = tau - foliation.label(&x);
        if r.abs() <= tol {
            return Some(x);
        }
        let rate = foliation.label_gradient(&x).dot(direction);
        if !(rate > 0.0) {
            return None;
        }
        x += *direction * (r / rate);
    }
    (tau - foliation.label(&x)).abs().le(&LEAF_TOL).then_some(x)
}

/// Integrates the guidance law from the leaf τ₀ to τ₁ on a uniform τ grid.
///
/// On a degenerate velocity the run halts and the error carries the
/// history up to the last accepted leaf.
pub fn integrate(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    initial: &[FourVector],
    range: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<SystemHistory> {
    cfg.validate()?;
    let mut history = integrate_once(psi, foliation, initial, range, cfg, cfg.step)?;
    if cfg.richardson {
        let fine = integrate_once(psi, foliation, initial, range, cfg, 0.5 * cfg.step)?;
        let est = history
            .final_configuration()
            .iter()
            .zip(fine.final_configuration())
            .map(|(a, b)| (*a - b).euclidean_norm() / 15.0)
            .fold(0.0, f64::max);
        history.diagnostics.richardson_error = Some(est);
    }
    Ok(history)
}

fn integrate_once(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    initial: &[FourVector],
    (tau0, tau1): (f64, f64),
    cfg: &IntegratorConfig,
    step: f64,
) -> Result<SystemHistory> {
    let n = psi.particle_count();
    if initial.len() != n {
        return Err(Error::PointCount {
            expected: n,
            got: initial.len(),
        });
    }
    if !(tau1 > tau0) {
        return Err(Error::InvalidInput(format!(
            "integration range must satisfy τ₁ > τ₀, got [{tau0}, {tau1}]"
        )));
    }
    check_on_leaf(foliation, initial, tau0)?;
    let steps = ((tau1 - tau0) / step).ceil().max(1.0) as usize;
    if steps > cfg.max_steps {
        return Err(Error::InvalidInput(format!(
            "range needs {steps} steps, above max_steps = {}",
            cfg.max_steps
        )));
    }
    let h = (tau1 - tau0) / steps as f64;
    let curved = foliation.as_hyperplanes().is_none();
    let projection_tol = cfg.tolerance.min(LEAF_TOL) * 1e-2;

    let mut history = SystemHistory::new(n);
    let halt = |history: SystemHistory, tau: f64, d: DegenerateVelocity| Error::Degenerate {
        particle: d.particle,
        tau,
        reason: d.reason,
        partial: Some(Box::new(history)),
    };

    let mut x: Vec<FourVector> = initial.to_vec();
    let mut k1 = match slopes(psi, foliation, &x)? {
        Ok(s) => s,
        Err(d) => return Err(halt(history, tau0, d)),
    };
    history.push(tau0, &x, &k1);
    let mut max_residual = initial
        .iter()
        .map(|p| (foliation.label(p) - tau0).abs())
        .fold(0.0, f64::max);

    let shifted = |x: &[FourVector], k: &[FourVector], f: f64| -> Vec<FourVector> {
        x.iter().zip(k).map(|(a, b)| *a + *b * f).collect()
    };

    for i in 1..=steps {
        let tau_prev = tau0 + (i - 1) as f64 * h;
        let tau = if i == steps { tau1 } else { tau0 + i as f64 * h };
        let stage = |pts: Vec<FourVector>| slopes(psi, foliation, &pts);
        let k2 = match stage(shifted(&x, &k1, 0.5 * h))? {
            Ok(s) => s,
            Err(d) => return Err(halt(history, tau_prev, d)),
        };
        let k3 = match stage(shifted(&x, &k2, 0.5 * h))? {
            Ok(s) => s,
            Err(d) => return Err(halt(history, tau_prev, d)),
        };
        let k4 = match stage(shifted(&x, &k3, h))? {
            Ok(s) => s,
            Err(d) => return Err(halt(history, tau_prev, d)),
        };
        let mut next: Vec<FourVector> = (0..n)
            .map(|k| x[k] + (k1[k] + k2[k] * 2.0 + k3[k] * 2.0 + k4[k]) * (h / 6.0))
            .collect();
        if curved {
            for k in 0..n {
                next[k] = project_onto_leaf(foliation, next[k], &k4[k], tau, projection_tol).ok_or_else(|| {
                    halt(
                        history.clone(),
                        tau,
                        DegenerateVelocity {
                            particle: k,
                            reason: "leaf projection failed".into(),
                        },
                    )
                })?;
            }
        }
        k1 = match slopes(psi, foliation, &next)? {
            Ok(s) => s,
            Err(d) => return Err(halt(history, tau, d)),
        };
        x = next;
        for p in &x {
            max_residual = max_residual.max((foliation.label(p) - tau).abs());
        }
        history.push(tau, &x, &k1);
    }
    history.diagnostics = IntegrationDiagnostics {
        steps,
        max_leaf_residual: max_residual,
        richardson_error: None,
    };
    if max_residual > LEAF_TOL {
        return Err(Error::Inconsistent(format!(
            "leaf residency violated by {max_residual:e}"
        )));
    }
    Ok(history)
}

#[cfg(test)]
mod tests;
