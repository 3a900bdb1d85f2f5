use nalgebra::{Matrix3, Vector3, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foliation::{Region, VectorFieldSpec};
use crate::spacetime::{leaf_frame, FourVector};

/// Tolerance on v₀·n(x) for a seed velocity, relative to |v₀|.
pub const SEED_ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// RK4 step in the curve parameter σ.
    pub step: f64,
    /// Spacing in σ between stored curve samples.
    pub sample_spacing: f64,
    /// Curves leaving this box are truncated.
    pub region: Region,
    /// Fixed RK4 step count used by surface charts (σ ∈ [0, 1]).
    pub chart_steps: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            step: 1e-3,
            sample_spacing: 1e-2,
            region: Region::default(),
            chart_steps: 256,
        }
    }
}

impl SurfaceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.sample_spacing >= self.step) || self.chart_steps == 0 {
            return Err(Error::InvalidInput(format!(
                "surface config needs 0 < step ≤ sample_spacing and chart_steps ≥ 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub sigma: f64,
    pub x: FourVector,
    pub v: FourVector,
}

/// A solution of ẋ = v, v̇ = −n (v·∂_v n) starting orthogonal to n.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceCurve {
    pub samples: Vec<CurveSample>,
    /// Set when the curve left the configured region before the end of the range.
    pub truncated: bool,
    /// max |v·n| / |v₀| over all integration steps.
    pub constraint_drift: f64,
}

/// Right-hand side of the curve equations: (ẋ, v̇).
fn curve_rhs(field: &VectorFieldSpec, x: &FourVector, v: &FourVector) -> (FourVector, FourVector) {
    let at = field.at(x);
    let dn = at.directional(v);
    (*v, at.n * (-v.dot(&dn)))
}

fn rk4_curve_step(field: &VectorFieldSpec, x: FourVector, v: FourVector, h: f64) -> (FourVector, FourVector) {
    let (a1, b1) = curve_rhs(field, &x, &v);
    let (a2, b2) = curve_rhs(field, &(x + a1 * (0.5 * h)), &(v + b1 * (0.5 * h)));
    let (a3, b3) = curve_rhs(field, &(x + a2 * (0.5 * h)), &(v + b2 * (0.5 * h)));
    let (a4, b4) = curve_rhs(field, &(x + a3 * h), &(v + b3 * h));
    (
        x + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0),
        v + (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0),
    )
}

fn check_seed(field: &VectorFieldSpec, x: &FourVector, v0: &FourVector) -> Result<()> {
    let scale = v0.euclidean_norm();
    if !(scale > 0.0) || !v0.is_finite() {
        return Err(Error::InvalidInput("seed velocity must be nonzero".into()));
    }
    let dot = v0.dot(&field.normal(x));
    if dot.abs() > SEED_ORTHOGONALITY_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "seed velocity violates v·n = 0 by {dot:e}"
        )));
    }
    Ok(())
}

/// Integrates the surface-generating curve from (x, v₀) over σ ∈ [0, sigma_max].
pub fn surface_curve(
    field: &VectorFieldSpec,
    x: &FourVector,
    v0: &FourVector,
    sigma_max: f64,
    cfg: &SurfaceConfig,
) -> Result<SurfaceCurve> {
    field.validate()?;
    cfg.validate()?;
    check_seed(field, x, v0)?;
    if !(sigma_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "curve range must be positive, got {sigma_max}"
        )));
    }
    let steps = (sigma_max / cfg.step).ceil() as usize;
    let h = sigma_max / steps as f64;
    let stride = ((cfg.sample_spacing / h).round() as usize).max(1);
    let scale = v0.euclidean_norm();
    let mut samples = vec![CurveSample {
        sigma: 0.0,
        x: *x,
        v: *v0,
    }];
    let (mut xc, mut vc) = (*x, *v0);
    let mut drift: f64 = 0.0;
    let mut truncated = false;
    let mut accepted = 0;
    for i in 1..=steps {
        let (xn, vn) = rk4_curve_step(field, xc, vc, h);
        if !cfg.region.contains(&xn) {
            truncated = true;
            break;
        }
        xc = xn;
        vc = vn;
        accepted = i;
        drift = drift.max(vc.dot(&field.normal(&xc)).abs() / scale);
        if i % stride == 0 || i == steps {
            samples.push(CurveSample {
                sigma: i as f64 * h,
                x: xc,
                v: vc,
            });
        }
    }
    if truncated && samples.last().is_some_and(|s| s.x != xc) {
        samples.push(CurveSample {
            sigma: accepted as f64 * h,
            x: xc,
            v: vc,
        });
    }
    Ok(SurfaceCurve {
        samples,
        truncated,
        constraint_drift: drift,
    })
}

/// Σ_x parametrized by the initial velocity: X(w) is the curve with
/// v₀ = Σ wᵢ eᵢ (eᵢ the spatial legs of the frame of n(x)) at σ = 1.
#[derive(Clone, Debug)]
pub struct SurfaceChart<'a> {
    field: &'a VectorFieldSpec,
    seed: FourVector,
    frame: [FourVector; 4],
    steps: usize,
}

impl<'a> SurfaceChart<'a> {
    pub fn new(field: &'a VectorFieldSpec, seed: FourVector, steps: usize) -> Result<Self> {
        let frame = leaf_frame(&field.normal(&seed))?;
        Ok(SurfaceChart {
            field,
            seed,
            frame,
            steps: steps.max(1),
        })
    }

    pub fn seed(&self) -> FourVector {
        self.seed
    }

    pub fn frame(&self) -> &[FourVector; 4] {
        &self.frame
    }

    pub fn velocity(&self, w: &[f64; 3]) -> FourVector {
        self.frame[1] * w[0] + self.frame[2] * w[1] + self.frame[3] * w[2]
    }

    /// Frame coordinates of the spatial part of y − seed.
    pub fn project(&self, y: &FourVector) -> [f64; 3] {
        let d = *y - self.seed;
        std::array::from_fn(|i| -d.dot(&self.frame[i + 1]))
    }

    /// End point and end velocity of the chart curve for w.
    pub fn curve_end(&self, w: &[f64; 3]) -> (FourVector, FourVector) {
        let (mut x, mut v) = (self.seed, self.velocity(w));
        if v == FourVector::ZERO {
            return (x, v);
        }
        let h = 1.0 / self.steps as f64;
        for _ in 0..self.steps {
            (x, v) = rk4_curve_step(self.field, x, v, h);
        }
        (x, v)
    }

    pub fn point(&self, w: &[f64; 3]) -> FourVector {
        self.curve_end(w).0
    }

    /// Central-difference ∂X/∂wᵢ as columns.
    pub fn jacobian(&self, w: &[f64; 3]) -> [FourVector; 3] {
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        let eps = 1e-6 * norm.max(1.0);
        std::array::from_fn(|i| {
            let mut wp = *w;
            let mut wm = *w;
            wp[i] += eps;
            wm[i] -= eps;
            (self.point(&wp) - self.point(&wm)) * (0.5 / eps)
        })
    }

    /// Euclidean coordinate distance from z to the surface, minimized over
    /// w by Levenberg–Marquardt from the frame projection of z.
    pub fn distance(&self, z: &FourVector) -> (f64, [f64; 3]) {
        self.distance_from(z, self.project(z))
    }

    pub fn distance_from(&self, z: &FourVector, start: [f64; 3]) -> (f64, [f64; 3]) {
        let mut w = start;
        let mut r = self.point(&w) - *z;
        let mut cost = r.euclidean_norm();
        let mut lambda = 1e-6;
        for _ in 0..100 {
            let jac = self.jacobian(&w);
            let jm = Matrix4x3::from_fn(|row, col| jac[col][row]);
            let rv = Vector4::new(r[0], r[1], r[2], r[3]);
            let jtj: Matrix3<f64> = jm.transpose() * jm;
            let g: Vector3<f64> = jm.transpose() * rv;
            let mut improved = false;
            for _ in 0..20 {
                let mut a = jtj;
                for i in 0..3 {
                    a[(i, i)] *= 1.0 + lambda;
                    a[(i, i)] += 1e-300;
                }
                let Some(delta) = a.lu().solve(&(-g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial = [w[0] + delta[0], w[1] + delta[1], w[2] + delta[2]];
                let rt = self.point(&trial) - *z;
                let ct = rt.euclidean_norm();
                if ct < cost {
                    let step = delta.norm();
                    w = trial;
                    r = rt;
                    let gain = cost - ct;
                    cost = ct;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    if step < 1e-13 * (1.0 + w.iter().map(|c| c.abs()).fold(0.0, f64::max)) || gain < 1e-15 {
                        return (cost, w);
                    }
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (cost, w)
    }
}

type Matrix4x3 = nalgebra::Matrix4x3<f64>;

/// Quasi-uniform unit vectors on S² (Fibonacci lattice).
pub fn fibonacci_directions(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Curves through a seed in a grid of initial directions, as a point cloud.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub seed: FourVector,
    /// (n(x), e₁, e₂, e₃) at the seed; directions are given in this frame.
    pub frame: [FourVector; 4],
    pub directions: Vec<[f64; 3]>,
    pub curves: Vec<SurfaceCurve>,
    /// Per-direction failures; failed directions hold an empty curve.
    pub failures: Vec<(usize, String)>,
    /// points[0] is the seed; then every stored sample with σ > 0, curve by curve.
    pub points: Vec<FourVector>,
    /// (curve index, sample index) of each point; the seed maps to None.
    pub origin: Vec<Option<(usize, usize)>>,
    pub adjacency: Vec<(usize, usize)>,
}

impl SurfaceMesh {
    pub fn max_constraint_drift(&self) -> f64 {
        self.curves.iter().map(|c| c.constraint_drift).fold(0.0, f64::max)
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty() && self.curves.iter().all(|c| !c.truncated)
    }

    /// Distance from z to the nearest stored mesh point.
    pub fn nearest_point_distance(&self, z: &FourVector) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (*p - *z).euclidean_norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("mesh contains the seed")
    }
}

/// Sweeps Σ_x by curves of geodesic-parameter length `radius` in each of
/// `directions` (unit 3-vectors in the frame of n(x)).
pub fn generate_surface(
    field: &VectorFieldSpec,
    x: &FourVector,
    directions: &[[f64; 3]],
    radius: f64,
    cfg: &SurfaceConfig,
) -> Result<SurfaceMesh> {
    field.validate()?;
    cfg.validate()?;
    if directions.is_empty() {
        return Err(Error::InvalidInput("direction grid is empty".into()));
    }
    for d in directions {
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("direction {d:?} is not a unit vector")));
        }
    }
    let frame = leaf_frame(&field.normal(x))?;
    let results: Vec<Result<SurfaceCurve>> = directions
        .par_iter()
        .map(|d| {
            let v0 = frame[1] * d[0] + frame[2] * d[1] + frame[3] * d[2];
            surface_curve(field, x, &v0, radius, cfg)
        })
        .collect();

    let mut curves = Vec::with_capacity(directions.len());
    let mut failures = Vec::new();
    let mut points = vec![*x];
    let mut origin = vec![None];
    let mut adjacency = Vec::new();
    // point index of (curve, sample), sample 0 being the seed
    let mut index_of: Vec<Vec<usize>> = Vec::with_capacity(directions.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => {
                let mut idx = vec![0];
                for (s, sample) in c.samples.iter().enumerate().skip(1) {
                    idx.push(points.len());
                    adjacency.push((*idx.get(s - 1).expect("previous sample"), points.len()));
                    points.push(sample.x);
                    origin.push(Some((curves.len(), s)));
                }
                index_of.push(idx);
                curves.push(c);
            }
            Err(e) => {
                failures.push((i, e.to_string()));
                index_of.push(vec![0]);
                curves.push(SurfaceCurve {
                    samples: Vec::new(),
                    truncated: true,
                    constraint_drift: 0.0,
                });
            }
        }
    }
    // connect each curve to its nearest neighbours on the direction sphere
    const NEIGHBOURS: usize = 4;
    for a in 0..directions.len() {
        let mut near: Vec<(usize, f64)> = (0..directions.len())
            .filter(|&b| b != a)
            .map(|b| {
                let d = directions[a]
                    .iter()
                    .zip(&directions[b])
                    .map(|(p, q)| p * q)
                    .sum::<f64>();
                (b, d)
            })
            .collect();
        near.sort_by(|p, q| q.1.total_cmp(&p.1));
        for &(b, _) in near.iter().take(NEIGHBOURS) {
            if b < a {
                continue;
            }
            let n = index_of[a].len().min(index_of[b].len());
            for s in 1..n {
                adjacency.push((index_of[a][s], index_of[b][s]));
            }
        }
    }
    Ok(SurfaceMesh {
        seed: *x,
        frame,
        directions: directions.to_vec(),
        curves,
        failures,
        points,
        origin,
        adjacency,
    })
}
