//! Numerical checks that the constructions commute with Poincaré transforms:
//! currents, total momentum, the extracted foliation and trajectories. Also
//! the single-particle energy-momentum cross-check of hypersurface
//! independence and finite-difference conservation residuals.

mod suite;

pub use suite::{pinned_suite, run_suite, SuiteCase, SuiteConfig, SuiteReport};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{hausdorff, integrate, IntegratorConfig};
use crate::equilibrium::{LeafBox, LeafSeries};
use crate::error::{Error, Result};
use crate::foliation::{extract_foliation, Foliation};
use crate::spacetime::{FourVector, PoincareTransform, SpinMatrix, GAMMA, METRIC};
use crate::wavefunction::{CurrentTensor, MultiSpinor, MultiTimeWaveFunction};

/// Rapidity and translation of a transform, for reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSummary {
    pub rapidity: f64,
    pub translation: FourVector,
}

impl TransformSummary {
    pub fn of(g: &PoincareTransform) -> Self {
        TransformSummary {
            rapidity: g.lambda[(0, 0)].max(1.0).acosh(),
            translation: g.translation,
        }
    }
}

/// Outcome of one covariance check. `deviation` is None when the check was
/// inconclusive (an integration failed); such a check does not pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub check: String,
    pub transform: TransformSummary,
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CovarianceReport {
    fn new(check: &str, g: &PoincareTransform, deviation: Option<f64>, tolerance: f64, samples: usize) -> Self {
        CovarianceReport {
            check: check.into(),
            transform: TransformSummary::of(g),
            pass: deviation.is_some_and(|d| d <= tolerance),
            deviation,
            tolerance,
            samples,
            note: None,
        }
    }
}

/// Deliberate corruptions used to show that each check can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// D replaced by D⁻¹ (all generators sign-flipped).
    FlippedSpinGenerator,
    /// Foliations moved with Λ⁻¹ instead of Λ.
    InverseFoliationAction,
    /// The transformed run starts from the untransformed initial points.
    UntransformedInitialData,
}

/// Where a trajectory check takes its foliation from.
#[derive(Clone, Debug, PartialEq)]
pub enum FoliationSource {
    /// Extracted from each state separately.
    Extracted,
    /// Given for Ψ and moved by g for U_gΨ.
    Given(Foliation),
}

/// Runs the checks, optionally with one injected fault.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Harness {
    pub fault: Option<Fault>,
}

/// J^{μ₁…μ_N} = Ψ†(γ⁰γ^{μ₁} ⊗ … ⊗ γ⁰γ^{μ_N})Ψ evaluated from spinor values.
pub fn pointwise_current(psi: &MultiSpinor) -> CurrentTensor {
    let n = psi.particles();
    let g0g: Vec<SpinMatrix> = (0..4).map(|mu| GAMMA.gamma[0] * GAMMA.gamma[mu]).collect();
    let data = (0..4usize.pow(n as u32))
        .map(|idx| {
            let mut phi = psi.clone();
            let mut rem = idx;
            for k in (0..n).rev() {
                phi = phi.apply_on_slot(k, &g0g[rem % 4]);
                rem /= 4;
            }
            psi.inner(&phi).re
        })
        .collect();
    CurrentTensor::new(n, data)
}

impl Harness {
    pub const SOUND: Harness = Harness { fault: None };

    pub fn with_fault(fault: Fault) -> Self {
        Harness { fault: Some(fault) }
    }

    fn state_transform(&self, g: &PoincareTransform) -> PoincareTransform {
        match self.fault {
            Some(Fault::FlippedSpinGenerator) => {
                let d_inv = g.spinor_rep.try_inverse().expect("spinor representation is invertible");
                PoincareTransform::from_parts_unchecked(g.lambda, g.translation, d_inv)
            }
            _ => g.clone(),
        }
    }

    fn foliation_transform(&self, g: &PoincareTransform) -> PoincareTransform {
        match self.fault {
            Some(Fault::InverseFoliationAction) => {
                let inv = g.inverse();
                PoincareTransform::from_parts_unchecked(inv.lambda, g.translation, inv.spinor_rep)
            }
            _ => g.clone(),
        }
    }

    /// U_gΨ, or a failed report when the spinor matrix cannot represent Λ.
    fn moved_state(
        &self,
        check: &str,
        psi: &MultiTimeWaveFunction,
        g: &PoincareTransform,
        tol: f64,
    ) -> Result<std::result::Result<MultiTimeWaveFunction, CovarianceReport>> {
        match psi.transform(&self.state_transform(g)) {
            Ok(p) => Ok(Ok(p)),
            Err(Error::Inconsistent(msg)) => {
                let mut r = CovarianceReport::new(check, g, None, tol, 0);
                r.note = Some(format!("state transform failed: {msg}"));
                Ok(Err(r))
            }
            Err(e) => Err(e),
        }
    }

    /// max over configurations x of |Λ^{⊗N} J^Ψ(g⁻¹x) − J^{U_gΨ}(x)|.
    ///
    /// U_gΨ is built both by re-expansion in the plane-wave basis and
    /// pointwise as D^{⊗N}Ψ(g⁻¹x); the deviation is the worse of the two.
    /// When D does not represent Λ the re-expansion is impossible and only
    /// the pointwise route is used.
    pub fn current(
        &self,
        psi: &MultiTimeWaveFunction,
        g: &PoincareTransform,
        configurations: &[Vec<FourVector>],
        tol: f64,
    ) -> Result<CovarianceReport> {
        let gs = self.state_transform(g);
        let expanded = match psi.transform(&gs) {
            Ok(p) => Some(p),
            Err(Error::Inconsistent(_)) => None,
            Err(e) => return Err(e),
        };
        let inv = g.inverse();
        let mut worst: f64 = 0.0;
        for x in configurations {
            let back: Vec<FourVector> = x.iter().map(|p| inv.apply(p)).collect();
            let lhs = psi.current_tensor(&back)?.transformed(&g.lambda);
            let pointwise = pointwise_current(&psi.evaluate(&back)?.apply_all(&gs.spinor_rep));
            worst = worst.max(lhs.max_abs_diff(&pointwise));
            if let Some(p) = &expanded {
                worst = worst.max(lhs.max_abs_diff(&p.current_tensor(x)?));
            }
        }
        let check = if psi.particle_count() == 1 {
            "current"
        } else {
            "multi-current"
        };
        let mut report = CovarianceReport::new(check, g, Some(worst), tol, configurations.len());
        if expanded.is_none() {
            report.note = Some("spinor matrix does not represent Λ; pointwise comparison only".into());
        }
        Ok(report)
    }

    /// |P(U_gΨ) − ΛP(Ψ)|.
    pub fn momentum(&self, psi: &MultiTimeWaveFunction, g: &PoincareTransform, tol: f64) -> Result<CovarianceReport> {
        let moved = match self.moved_state("total-momentum", psi, g, tol)? {
            Ok(p) => p,
            Err(r) => return Ok(r),
        };
        let expected = g.apply_vector(&psi.total_momentum()?);
        let d = moved.total_momentum()?.max_abs_diff(&expected);
        Ok(CovarianceReport::new("total-momentum", g, Some(d), tol, 1))
    }

    /// |n(U_gΨ) − Λn(Ψ)| together with the leaf-label shift τ′(gx) − τ(x) = n′·a
    /// over `probes`.
    pub fn foliation(
        &self,
        psi: &MultiTimeWaveFunction,
        g: &PoincareTransform,
        probes: &[FourVector],
        tol: f64,
    ) -> Result<CovarianceReport> {
        let f = extract_foliation(psi)?;
        let f_moved = match self.moved_state("foliation", psi, g, tol)? {
            Ok(p) => extract_foliation(&p)?,
            Err(r) => return Ok(r),
        };
        let expected = f.transformed(&self.foliation_transform(g))?;
        let mut d = f_moved.normal().max_abs_diff(&expected.normal());
        let n_moved = f_moved.normal();
        let shift = n_moved.dot(&g.translation);
        for x in probes {
            let lhs = n_moved.dot(&g.apply(x)) - f.normal().dot(x);
            d = d.max((lhs - shift).abs());
        }
        Ok(CovarianceReport::new("foliation", g, Some(d), tol, probes.len() + 1))
    }

    /// Per-particle Hausdorff distance between Λ·(history of Ψ) and the
    /// history of U_gΨ started from g·initial.
    pub fn trajectory(
        &self,
        psi: &MultiTimeWaveFunction,
        source: &FoliationSource,
        g: &PoincareTransform,
        initial: &[FourVector],
        range: (f64, f64),
        cfg: &IntegratorConfig,
        tol: f64,
    ) -> Result<CovarianceReport> {
        let moved = match self.moved_state("trajectory", psi, g, tol)? {
            Ok(p) => p,
            Err(r) => return Ok(r),
        };
        let fg = self.foliation_transform(g);
        let (f, f_moved): (Foliation, Foliation) = match source {
            FoliationSource::Extracted => {
                let f = extract_foliation(psi)?;
                let f_moved = match self.fault {
                    Some(Fault::InverseFoliationAction) => f.transformed(&fg)?,
                    _ => extract_foliation(&moved)?,
                };
                (f.into(), f_moved.into())
            }
            FoliationSource::Given(f) => (f.clone(), f.transformed(&fg)?),
        };
        let start_moved: Vec<FourVector> = match self.fault {
            Some(Fault::UntransformedInitialData) => initial.to_vec(),
            _ => initial.iter().map(|x| g.apply(x)).collect(),
        };
        let tau0_moved = f_moved.label(&g.apply(&initial[0]));
        let span = range.1 - range.0;
        let a = integrate(psi, &f, initial, range, cfg);
        let b = integrate(&moved, &f_moved, &start_moved, (tau0_moved, tau0_moved + span), cfg);
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                let mut r = CovarianceReport::new("trajectory", g, None, tol, initial.len());
                r.note = Some(format!("inconclusive: {e}"));
                return Ok(r);
            }
        };
        let d = a
            .lines()
            .iter()
            .zip(b.lines())
            .map(|(la, lb)| hausdorff(&la.transformed(g), lb))
            .fold(0.0, f64::max);
        Ok(CovarianceReport::new("trajectory", g, Some(d), tol, initial.len()))
    }
}

pub fn check_current_covariance(
    psi: &MultiTimeWaveFunction,
    g: &PoincareTransform,
    configurations: &[Vec<FourVector>],
    tol: f64,
) -> Result<CovarianceReport> {
    Harness::SOUND.current(psi, g, configurations, tol)
}

pub fn check_momentum_covariance(
    psi: &MultiTimeWaveFunction,
    g: &PoincareTransform,
    tol: f64,
) -> Result<CovarianceReport> {
    Harness::SOUND.momentum(psi, g, tol)
}

pub fn check_foliation_covariance(
    psi: &MultiTimeWaveFunction,
    g: &PoincareTransform,
    probes: &[FourVector],
    tol: f64,
) -> Result<CovarianceReport> {
    Harness::SOUND.foliation(psi, g, probes, tol)
}

pub fn check_trajectory_covariance(
    psi: &MultiTimeWaveFunction,
    source: &FoliationSource,
    g: &PoincareTransform,
    initial: &[FourVector],
    range: (f64, f64),
    cfg: &IntegratorConfig,
    tol: f64,
) -> Result<CovarianceReport> {
    Harness::SOUND.trajectory(psi, source, g, initial, range, cfg, tol)
}

fn single_particle(psi: &MultiTimeWaveFunction) -> Result<()> {
    if psi.particle_count() != 1 {
        return Err(Error::InvalidInput(
            "energy-momentum density is defined for N = 1".into(),
        ));
    }
    Ok(())
}

fn to_spinor(m: &MultiSpinor) -> crate::spacetime::Spinor {
    crate::spacetime::Spinor::from_column_slice(m.data())
}

/// t^{μν}(x) = Re[ψ̄ (i/2)(∂↔^μ γ^ν + ∂↔^ν γ^μ) ψ] for an N = 1 state,
/// with ψ̄∂↔ψ = ψ̄(∂ψ) − (∂ψ̄)ψ.
pub fn energy_momentum_tensor(psi: &MultiTimeWaveFunction, x: &FourVector) -> Result<[[f64; 4]; 4]> {
    single_particle(psi)?;
    let points = std::slice::from_ref(x);
    let value = to_spinor(&psi.evaluate(points)?);
    let bar = crate::spacetime::dirac_bar(&value);
    // a[μ][ν] = ψ̄ γ^ν ∂^μ ψ
    let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
    for mu in 0..4 {
        let d = to_spinor(&psi.derivative(points, 0, mu)?) * Complex64::new(METRIC[mu], 0.0);
        for nu in 0..4 {
            let gd = GAMMA.gamma[nu] * d;
            a[mu][nu] = (0..4).map(|i| bar[i] * gd[i]).sum();
        }
    }
    // ψ̄ ∂↔^μ γ^ν ψ = 2i Im a[μ][ν], since γ⁰γ^ν is Hermitian
    Ok(std::array::from_fn(|mu| {
        std::array::from_fn(|nu| -a[mu][nu].im - a[nu][mu].im)
    }))
}

/// max over ν of |∂_μ t^{μν}| by central differences of step h (N = 1).
pub fn energy_momentum_divergence(psi: &MultiTimeWaveFunction, x: &FourVector, h: f64) -> Result<f64> {
    let mut div = [0.0; 4];
    for mu in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[mu] += h;
        xm[mu] -= h;
        let tp = energy_momentum_tensor(psi, &xp)?;
        let tm = energy_momentum_tensor(psi, &xm)?;
        for nu in 0..4 {
            div[nu] += (tp[mu][nu] - tm[mu][nu]) / (2.0 * h);
        }
    }
    Ok(div.iter().map(|d| d.abs()).fold(0.0, f64::max))
}

/// |∂_μ J^μ| by central differences of step h (N = 1).
pub fn current_divergence(psi: &MultiTimeWaveFunction, x: &FourVector, h: f64) -> Result<f64> {
    single_particle(psi)?;
    let mut div = 0.0;
    for mu in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[mu] += h;
        xm[mu] -= h;
        div += (psi.current(&xp)?[mu] - psi.current(&xm)?[mu]) / (2.0 * h);
    }
    Ok(div.abs())
}

/// ∫ t^{μν} n_μ over the cube of `leaf_box` by the midpoint rule with
/// `quadrature` points per axis.
pub fn leaf_momentum(psi: &MultiTimeWaveFunction, leaf_box: &LeafBox, quadrature: usize) -> Result<FourVector> {
    single_particle(psi)?;
    leaf_box.validate()?;
    if quadrature == 0 {
        return Err(Error::InvalidInput(
            "quadrature needs at least one point per axis".into(),
        ));
    }
    let frame = leaf_box.frame()?;
    let n = leaf_box.normal.lower();
    let h = leaf_box.side / quadrature as f64;
    let coord = |j: usize| -0.5 * leaf_box.side + (j as f64 + 0.5) * h;
    let slabs: Vec<Result<[f64; 4]>> = (0..quadrature)
        .into_par_iter()
        .map(|a| {
            let mut acc = [0.0; 4];
            for b in 0..quadrature {
                for c in 0..quadrature {
                    let x = leaf_box.point(&frame, &[coord(a), coord(b), coord(c)]);
                    let t = energy_momentum_tensor(psi, &x)?;
                    for nu in 0..4 {
                        acc[nu] += (0..4).map(|mu| t[mu][nu] * n[mu]).sum::<f64>();
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = [0.0; 4];
    for s in slabs {
        let s = s?;
        for nu in 0..4 {
            total[nu] += s[nu];
        }
    }
    Ok(FourVector(total.map(|v| v * h * h * h)))
}

/// L³ Σ_j |c_j|² 4(p_j·n) p_j: the box integral of t^{μν}n_μ from the mode
/// expansion. Cross terms integrate to zero over a commensurate box.
pub fn mode_momentum(psi: &MultiTimeWaveFunction, leaf_box: &LeafBox) -> Result<FourVector> {
    single_particle(psi)?;
    let volume = leaf_box.side.powi(3);
    let mut p = FourVector::ZERO;
    for term in psi.terms() {
        let k = term.modes[0].momentum();
        p += k * (4.0 * term.coefficient.norm_sqr() * k.dot(&leaf_box.normal) * volume);
    }
    Ok(p)
}

/// Integrates t^{μν}n_μ over the cube of `leaf_box` and over the same cube
/// moved to the parallel leaf τ₂. The deviation is the larger of the
/// relative differences |P₁ − P₂|/|P₁| and |P₁ − P_modes|/|P_modes|.
pub fn check_momentum_hypersurface_independence(
    psi: &MultiTimeWaveFunction,
    leaf_box: &LeafBox,
    tau2: f64,
    quadrature: usize,
    tol: f64,
) -> Result<CovarianceReport> {
    single_particle(psi)?;
    if !LeafSeries::new(psi, &leaf_box.normal, leaf_box)?.is_commensurate() {
        return Err(Error::InvalidInput(
            "momenta must be commensurate with the box; truncation would fake a violation".into(),
        ));
    }
    let p1 = leaf_momentum(psi, leaf_box, quadrature)?;
    let p2 = leaf_momentum(psi, &leaf_box.at_leaf(tau2), quadrature)?;
    let modes = mode_momentum(psi, leaf_box)?;
    let d =
        ((p1 - p2).euclidean_norm() / p1.euclidean_norm()).max((p1 - modes).euclidean_norm() / modes.euclidean_norm());
    let mut r = CovarianceReport::new(
        "momentum-hypersurface-independence",
        &PoincareTransform::identity(),
        Some(d),
        tol,
        2 * quadrature.pow(3),
    );
    r.note = Some(format!("P1 = {p1}, P2 = {p2}, modes = {modes}"));
    Ok(r)
}
