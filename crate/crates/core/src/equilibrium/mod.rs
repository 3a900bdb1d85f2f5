//! Equilibrium densities on hyperplane leaves: ρ = J^{μ₁…μ_N} n_{μ₁}…n_{μ_N},
//! seeded rejection sampling, equivariance tests with analytic marginals,
//! and nonlocality probes.
//!
//! Plane waves are not normalizable on a leaf, so densities are normalized
//! over a cube in leaf-frame coordinates. With momenta commensurate with the
//! cube the density and the velocity field are periodic, and trajectories
//! leaving the cube are wrapped back exactly.

mod series;
mod stats;

pub use series::{LeafSeries, Marginal};
pub use stats::{chi_square, ks_p_value, ks_statistic, AxisTest};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, velocity_field, IntegratorConfig, LEAF_TOL};
use crate::error::{Error, Result};
use crate::foliation::Foliation;
use crate::spacetime::{leaf_frame, FourVector, Hyperplane};
use crate::wavefunction::MultiTimeWaveFunction;

/// Densities below −NEGATIVE_TOL·scale signal an internal inconsistency.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// A proposal stops after this many rejections per sample.
const MAX_ATTEMPTS_PER_SAMPLE: u64 = 10_000_000;

/// Cube [−L/2, L/2]³ in the frame of a hyperplane leaf, centred at `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafBox {
    pub normal: FourVector,
    pub center: FourVector,
    pub side: f64,
    /// Grid points per axis for the envelope scan.
    pub scan: usize,
}

impl LeafBox {
    pub fn new(normal: FourVector, center: FourVector, side: f64) -> Result<Self> {
        let b = LeafBox {
            normal,
            center,
            side,
            scan: 64,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.side > 0.0) || !self.side.is_finite() {
            return Err(Error::InvalidInput(format!(
                "box side must be positive, got {}",
                self.side
            )));
        }
        if !(self.normal[0] > 0.0) || (self.normal.square() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "box normal must be unit future time-like, got {}",
                self.normal
            )));
        }
        if self.scan < 2 {
            return Err(Error::InvalidInput(
                "envelope scan needs at least 2 points per axis".into(),
            ));
        }
        Ok(())
    }

    /// (n, e₁, e₂, e₃) with eᵢ the leaf axes.
    pub fn frame(&self) -> Result<[FourVector; 4]> {
        leaf_frame(&self.normal)
    }

    pub fn tau(&self) -> f64 {
        self.normal.dot(&self.center)
    }

    pub fn hyperplane(&self) -> Hyperplane {
        Hyperplane {
            normal: self.normal,
            offset: self.tau(),
        }
    }

    /// The same cube moved along n to the leaf τ.
    pub fn at_leaf(&self, tau: f64) -> LeafBox {
        LeafBox {
            center: self.center + self.normal * (tau - self.tau()),
            ..*self
        }
    }

    pub fn point(&self, frame: &[FourVector; 4], u: &[f64; 3]) -> FourVector {
        self.center + frame[1] * u[0] + frame[2] * u[1] + frame[3] * u[2]
    }

    /// Leaf-frame coordinates of x relative to the centre.
    pub fn coordinates(&self, frame: &[FourVector; 4], x: &FourVector) -> [f64; 3] {
        let d = *x - self.center;
        std::array::from_fn(|i| -d.dot(&frame[i + 1]))
    }

    pub fn contains(&self, u: &[f64; 3]) -> bool {
        u.iter().all(|c| c.abs() <= 0.5 * self.side)
    }

    /// Periodic image of u in [−L/2, L/2)³.
    pub fn wrap(&self, u: &[f64; 3]) -> [f64; 3] {
        u.map(|c| c - self.side * (c / self.side + 0.5).floor())
    }
}

fn hyperplane_normal(foliation: &Foliation) -> Result<FourVector> {
    foliation
        .as_hyperplanes()
        .map(|h| h.normal())
        .ok_or_else(|| Error::InvalidInput("equilibrium analysis needs a hyperplane foliation".into()))
}

fn check_box_matches(foliation: &Foliation, leaf_box: &LeafBox) -> Result<FourVector> {
    leaf_box.validate()?;
    let n = hyperplane_normal(foliation)?;
    if n.max_abs_diff(&leaf_box.normal) > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "box normal {} differs from the foliation normal {n}",
            leaf_box.normal
        )));
    }
    Ok(n)
}

/// ρ(x₁…x_N) = J^{μ₁…μ_N} n_{μ₁}(x₁)…n_{μ_N}(x_N), un-normalized.
pub fn density_on_leaf(psi: &MultiTimeWaveFunction, foliation: &Foliation, points: &[FourVector]) -> Result<f64> {
    if points.len() != psi.particle_count() {
        return Err(Error::PointCount {
            expected: psi.particle_count(),
            got: points.len(),
        });
    }
    let tau = foliation.label(&points[0]);
    for (k, x) in points.iter().enumerate() {
        let r = (foliation.label(x) - tau).abs();
        if r > LEAF_TOL {
            return Err(Error::InvalidInput(format!(
                "point {k} is off the leaf τ = {tau} by {r:e}"
            )));
        }
    }
    let normals: Vec<FourVector> = points.iter().map(|x| foliation.normal(x)).collect();
    let c = psi.contraction(points, &normals, None)?[0];
    let scale = psi.current_scale() * normals.iter().map(|n| n.euclidean_norm()).product::<f64>();
    if c.im.abs() > 1e-10 * scale.max(c.re.abs()) {
        return Err(Error::Inconsistent(format!("density has imaginary part {:e}", c.im)));
    }
    if c.re < -NEGATIVE_TOL * scale {
        return Err(Error::Inconsistent(format!("density is negative: {:e}", c.re)));
    }
    Ok(c.re.max(0.0))
}

/// Configurations drawn from ρ restricted to box^N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    /// Leaf coordinates per sample and particle.
    pub coordinates: Vec<Vec<[f64; 3]>>,
    pub attempts: u64,
    pub acceptance_rate: f64,
    pub envelope: f64,
    /// Σ|Fourier coefficients|, a rigorous bound on ρ.
    pub fourier_bound: f64,
    /// Largest ρ found by the scan and its local refinement.
    pub scan_max: f64,
}

impl EnsembleSample {
    pub fn points(&self, leaf_box: &LeafBox) -> Result<Vec<Vec<FourVector>>> {
        let frame = leaf_box.frame()?;
        Ok(self
            .coordinates
            .iter()
            .map(|cfg| cfg.iter().map(|u| leaf_box.point(&frame, u)).collect())
            .collect())
    }
}

fn uniform_config<R: Rng + ?Sized>(rng: &mut R, particles: usize, side: f64) -> Vec<[f64; 3]> {
    (0..particles)
        .map(|_| std::array::from_fn(|_| (rng.random::<f64>() - 0.5) * side))
        .collect()
}

/// max of the series over box^N: grid or seeded scan, then pattern search.
fn scan_maximum(series: &LeafSeries, particles: usize, leaf_box: &LeafBox) -> f64 {
    let side = leaf_box.side;
    let mut candidates: Vec<(f64, Vec<[f64; 3]>)> = Vec::new();
    if particles == 1 {
        let g = leaf_box.scan;
        let h = side / g as f64;
        let coord = |j: usize| -0.5 * side + (j as f64 + 0.5) * h;
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    let u = vec![[coord(a), coord(b), coord(c)]];
                    candidates.push((series.eval(&u), u));
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca9);
        let count = leaf_box.scan.pow(3);
        for _ in 0..count {
            let u = uniform_config(&mut rng, particles, side);
            candidates.push((series.eval(&u), u));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(8);
    let mut best = candidates[0].0;
    for (mut value, mut u) in candidates {
        let mut step = side / leaf_box.scan as f64;
        while step > 1e-9 * side {
            let mut moved = false;
            for k in 0..particles {
                for i in 0..3 {
                    for dir in [1.0, -1.0] {
                        let mut trial = u.clone();
                        trial[k][i] = (trial[k][i] + dir * step).clamp(-0.5 * side, 0.5 * side);
                        let v = series.eval(&trial);
                        if v > value {
                            value = v;
                            u = trial;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(value);
    }
    best
}

/// Draws `count` configurations from ρ on box^N by rejection sampling.
///
/// Sample i uses its own ChaCha stream i of `seed`, so results do not depend
/// on scheduling.
pub fn sample_initial(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    leaf_box: &LeafBox,
    count: usize,
    seed: u64,
) -> Result<EnsembleSample> {
    let n = check_box_matches(foliation, leaf_box)?;
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let particles = psi.particle_count();
    let series = LeafSeries::new(psi, &n, leaf_box)?;
    let fourier_bound = series.l1_bound();
    let scan_max = scan_maximum(&series, particles, leaf_box);
    let envelope = fourier_bound.min(1.05 * scan_max);
    if !(envelope > 0.0) {
        return Err(Error::Inconsistent("density vanishes on the box".into()));
    }
    let side = leaf_box.side;
    let draws: Vec<Result<(Vec<[f64; 3]>, u64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut attempts = 0u64;
            loop {
                attempts += 1;
                if attempts > MAX_ATTEMPTS_PER_SAMPLE {
                    return Err(Error::LowAcceptance {
                        rate: 1.0 / attempts as f64,
                    });
                }
                let u = uniform_config(&mut rng, particles, side);
                let y = rng.random::<f64>() * envelope;
                let rho = series.eval(&u);
                if rho > envelope {
                    return Err(Error::Inconsistent(format!(
                        "density {rho:e} exceeds the envelope {envelope:e}"
                    )));
                }
                if y < rho {
                    return Ok((u, attempts));
                }
            }
        })
        .collect();
    let mut coordinates = Vec::with_capacity(count);
    let mut attempts = 0;
    for d in draws {
        let (u, a) = d?;
        coordinates.push(u);
        attempts += a;
    }
    let acceptance_rate = count as f64 / attempts as f64;
    if acceptance_rate < 1e-4 {
        return Err(Error::LowAcceptance { rate: acceptance_rate });
    }
    Ok(EnsembleSample {
        coordinates,
        attempts,
        acceptance_rate,
        envelope,
        fourier_bound,
        scan_max,
    })
}

const AXIS_NAMES: [&str; 3] = ["u1", "u2", "u3"];

/// Per-axis tests of configurations against the series marginals, plus
/// pairwise relative-coordinate tests for N ≥ 2 when the series is periodic.
pub fn axis_tests(series: &LeafSeries, configs: &[Vec<[f64; 3]>], bins: usize, side: f64) -> Result<Vec<AxisTest>> {
    let particles = configs.first().map_or(0, |c| c.len());
    let mut out = Vec::new();
    for k in 0..particles {
        for (i, axis) in AXIS_NAMES.iter().enumerate() {
            let values = configs.iter().map(|c| c[k][i]).collect();
            out.push(AxisTest::run(
                format!("p{}.{axis}", k + 1),
                values,
                &series.marginal(k, i)?,
                bins,
            ));
        }
    }
    if series.is_commensurate() {
        for k in 0..particles {
            for l in k + 1..particles {
                for (i, axis) in AXIS_NAMES.iter().enumerate() {
                    let values = configs
                        .iter()
                        .map(|c| {
                            let d = c[k][i] - c[l][i];
                            d - side * (d / side + 0.5).floor()
                        })
                        .collect();
                    out.push(AxisTest::run(
                        format!("p{}-p{}.{axis}", k + 1, l + 1),
                        values,
                        &series.relative_marginal(k, l, i)?,
                        bins,
                    ));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivarianceConfig {
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
    /// Significance level; every test must have p above it.
    pub alpha: f64,
    pub integrator: IntegratorConfig,
}

impl Default for EquivarianceConfig {
    fn default() -> Self {
        EquivarianceConfig {
            samples: 20_000,
            bins: 16,
            seed: 1,
            alpha: 0.01,
            integrator: IntegratorConfig::with_step(0.02),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    pub failures: usize,
    /// False when more than 1% of the integrations failed.
    pub valid: bool,
    pub tau0: f64,
    pub tau1: f64,
    pub acceptance_rate: f64,
    pub envelope: f64,
    pub alpha: f64,
    /// Sampled ensemble at τ₀ against ρ at τ₀.
    pub initial: Vec<AxisTest>,
    /// Transported ensemble at τ₁ against ρ at τ₁.
    pub transported: Vec<AxisTest>,
    pub min_p: f64,
    pub pass: bool,
    #[serde(skip)]
    pub final_coordinates: Vec<Vec<[f64; 3]>>,
}

/// Samples ρ on the leaf of `leaf_box`, moves every configuration to the
/// leaf τ₁ with the guidance law and compares with ρ there.
pub fn equivariance_test(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    leaf_box: &LeafBox,
    tau1: f64,
    cfg: &EquivarianceConfig,
) -> Result<EquivarianceReport> {
    let n = check_box_matches(foliation, leaf_box)?;
    if cfg.bins < 2 {
        return Err(Error::InvalidInput("need at least 2 bins".into()));
    }
    let tau0 = leaf_box.tau();
    if !(tau1 > tau0) {
        return Err(Error::InvalidInput(format!("need τ₁ > τ₀, got {tau1} ≤ {tau0}")));
    }
    let series0 = LeafSeries::new(psi, &n, leaf_box)?;
    if !series0.is_commensurate() {
        return Err(Error::InvalidInput(
            "momenta are not commensurate with the box; periodic wrapping would bias the test".into(),
        ));
    }
    let ensemble = sample_initial(psi, foliation, leaf_box, cfg.samples, cfg.seed)?;
    let initial = axis_tests(&series0, &ensemble.coordinates, cfg.bins, leaf_box.side)?;

    let box1 = leaf_box.at_leaf(tau1);
    let frame = leaf_box.frame()?;
    let starts = ensemble.points(leaf_box)?;
    let moved: Vec<Option<Vec<[f64; 3]>>> = starts
        .par_iter()
        .map(|start| {
            integrate(psi, foliation, start, (tau0, tau1), &cfg.integrator)
                .ok()
                .map(|h| {
                    h.final_configuration()
                        .iter()
                        .map(|x| box1.wrap(&box1.coordinates(&frame, x)))
                        .collect()
                })
        })
        .collect();
    let failures = moved.iter().filter(|m| m.is_none()).count();
    let final_coordinates: Vec<Vec<[f64; 3]>> = moved.into_iter().flatten().collect();
    let valid = failures * 100 <= cfg.samples && !final_coordinates.is_empty();
    let series1 = LeafSeries::new(psi, &n, &box1)?;
    let transported = if final_coordinates.is_empty() {
        Vec::new()
    } else {
        axis_tests(&series1, &final_coordinates, cfg.bins, leaf_box.side)?
    };
    let min_p = transported.iter().map(AxisTest::min_p).fold(1.0, f64::min);
    Ok(EquivarianceReport {
        samples: cfg.samples,
        failures,
        valid,
        tau0,
        tau1,
        acceptance_rate: ensemble.acceptance_rate,
        envelope: ensemble.envelope,
        alpha: cfg.alpha,
        initial,
        transported,
        min_p,
        pass: valid && min_p > cfg.alpha,
        final_coordinates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlocalityRow {
    pub x2: FourVector,
    /// v₁/(n·v₁); None where the velocity is degenerate.
    pub velocity: Option<FourVector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlocalityReport {
    pub x1: FourVector,
    pub rows: Vec<NonlocalityRow>,
    pub skipped: usize,
    /// Largest Minkowski length √|Δ·Δ| between two normalized velocities.
    pub max_deviation: f64,
}

/// Tabulates particle 1's normalized velocity at fixed x₁ as x₂ ranges over
/// `grid` (all points on the leaf of x₁).
pub fn nonlocality_probe(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    x1: &FourVector,
    grid: &[FourVector],
) -> Result<NonlocalityReport> {
    if psi.particle_count() != 2 {
        return Err(Error::InvalidInput(
            "nonlocality probe needs a two-particle state".into(),
        ));
    }
    let n1 = foliation.normal(x1);
    let mut rows = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for x2 in grid {
        let velocity = match velocity_field(psi, foliation, &[*x1, *x2]) {
            Ok(v) => Some(v[0] * (1.0 / n1.dot(&v[0]))),
            Err(Error::Degenerate { .. }) => {
                skipped += 1;
                None
            }
            Err(e) => return Err(e),
        };
        rows.push(NonlocalityRow { x2: *x2, velocity });
    }
    let vs: Vec<FourVector> = rows.iter().filter_map(|r| r.velocity).collect();
    let mut max_deviation: f64 = 0.0;
    for a in 0..vs.len() {
        for b in a + 1..vs.len() {
            let d = vs[a] - vs[b];
            max_deviation = max_deviation.max(d.square().abs().sqrt());
        }
    }
    Ok(NonlocalityReport {
        x1: *x1,
        rows,
        skipped,
        max_deviation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonLeafConfig {
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
    pub integrator: IntegratorConfig,
}

impl Default for NonLeafConfig {
    fn default() -> Self {
        NonLeafConfig {
            samples: 4000,
            bins: 16,
            seed: 7,
            integrator: IntegratorConfig::with_step(0.02),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonLeafReport {
    pub plane: Hyperplane,
    pub samples: usize,
    /// Crossing configurations that fall inside the plane's cube.
    pub configurations: usize,
    /// Empirical crossing marginals against the naive ρ-form on the plane.
    pub tests: Vec<AxisTest>,
    pub max_ks_statistic: f64,
    pub min_p: f64,
}

/// Transports a leaf ensemble through the hyperplane `plane` and compares
/// the crossing distribution in the cube centred at `plane_center` with the
/// naive form J n_S…n_S of the plane's own normal n_S.
///
/// Periodicity of ρ and of the velocity field is used to represent the
/// periodic ensemble: each world line is also considered shifted by whole
/// box periods.
pub fn non_leaf_probe(
    psi: &MultiTimeWaveFunction,
    foliation: &Foliation,
    leaf_box: &LeafBox,
    plane_center: &FourVector,
    plane_normal: &FourVector,
    cfg: &NonLeafConfig,
) -> Result<NonLeafReport> {
    let n = check_box_matches(foliation, leaf_box)?;
    let target = LeafBox {
        normal: *plane_normal,
        center: *plane_center,
        ..*leaf_box
    };
    target.validate()?;
    let plane = target.hyperplane();
    let target_frame = target.frame()?;
    let frame = leaf_box.frame()?;
    let side = leaf_box.side;

    // τ range covered by the target cube
    let mut tau_hi = f64::NEG_INFINITY;
    let mut tau_lo = f64::INFINITY;
    for corner in 0..8 {
        let u: [f64; 3] = std::array::from_fn(|i| if corner >> i & 1 == 1 { 0.5 * side } else { -0.5 * side });
        let t = foliation.label(&target.point(&target_frame, &u));
        tau_hi = tau_hi.max(t);
        tau_lo = tau_lo.min(t);
    }
    let tau0 = leaf_box.tau();
    if tau_lo <= tau0 {
        return Err(Error::InvalidInput(
            "the plane's cube must lie entirely to the future of the sampling leaf".into(),
        ));
    }
    let tau1 = tau_hi + 0.1 * side;
    let reach = ((tau1 - tau0 + side) / side).ceil() as i64 + 1;

    let ensemble = sample_initial(psi, foliation, leaf_box, cfg.samples, cfg.seed)?;
    let starts = ensemble.points(leaf_box)?;
    let per_sample: Vec<Vec<Vec<[f64; 3]>>> = starts
        .par_iter()
        .map(|start| {
            let Ok(h) = integrate(psi, foliation, start, (tau0, tau1), &cfg.integrator) else {
                return Vec::new();
            };
            h.lines()
                .iter()
                .map(|line| {
                    let mut hits = Vec::new();
                    for a in -reach..=reach {
                        for b in -reach..=reach {
                            for c in -reach..=reach {
                                let shift = (frame[1] * a as f64 + frame[2] * b as f64 + frame[3] * c as f64) * side;
                                let shifted = Hyperplane {
                                    normal: plane.normal,
                                    offset: plane.offset - plane.normal.dot(&shift),
                                };
                                if let Ok(cross) = line.crossing(&shifted) {
                                    let u = target.coordinates(&target_frame, &(cross.point + shift));
                                    if target.contains(&u) {
                                        hits.push(u);
                                    }
                                }
                            }
                        }
                    }
                    hits
                })
                .collect()
        })
        .collect();

    let mut configs: Vec<Vec<[f64; 3]>> = Vec::new();
    for hits in &per_sample {
        if hits.len() != psi.particle_count() {
            continue;
        }
        let mut partial: Vec<Vec<[f64; 3]>> = vec![Vec::new()];
        for particle_hits in hits {
            partial = partial
                .iter()
                .flat_map(|p| {
                    particle_hits.iter().map(move |u| {
                        let mut q = p.clone();
                        q.push(*u);
                        q
                    })
                })
                .collect();
        }
        configs.extend(partial);
    }
    if configs.is_empty() {
        return Err(Error::InvalidTest(
            "no crossing configurations fell inside the plane's cube".into(),
        ));
    }
    let naive = LeafSeries::new(psi, plane_normal, &target)?;
    let mut tests = Vec::new();
    for k in 0..psi.particle_count() {
        for (i, axis) in AXIS_NAMES.iter().enumerate() {
            let values = configs.iter().map(|c| c[k][i]).collect();
            tests.push(AxisTest::run(
                format!("p{}.{axis}", k + 1),
                values,
                &naive.marginal(k, i)?,
                cfg.bins,
            ));
        }
    }
    let _ = n;
    Ok(NonLeafReport {
        plane,
        samples: cfg.samples,
        configurations: configs.len(),
        max_ks_statistic: tests.iter().map(|t| t.ks_statistic).fold(0.0, f64::max),
        min_p: tests.iter().map(AxisTest::min_p).fold(1.0, f64::min),
        tests,
    })
}
