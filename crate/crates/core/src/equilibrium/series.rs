use num_complex::Complex64;

use super::LeafBox;
use crate::error::{Error, Result};
use crate::spacetime::FourVector;
use crate::wavefunction::MultiTimeWaveFunction;

/// ∫_{−L/2}^{L/2} e^{iωu} du.
fn box_integral(omega: f64, side: f64) -> f64 {
    if omega == 0.0 {
        side
    } else {
        2.0 * (0.5 * omega * side).sin() / omega
    }
}

/// ∫_{−L/2}^{u} e^{iωs} ds.
fn partial_integral(omega: f64, side: f64, u: f64) -> Complex64 {
    if omega == 0.0 {
        Complex64::new(u + 0.5 * side, 0.0)
    } else {
        let i = Complex64::new(0.0, 1.0);
        ((i * omega * u).exp() - (-i * omega * 0.5 * side).exp()) / (i * omega)
    }
}

/// Frequencies within this distance of each other (or of zero) are merged.
const FREQ_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
struct SeriesTerm {
    amplitude: Complex64,
    /// ω[k][i]: frequency of particle k's leaf coordinate i.
    omega: Vec<[f64; 3]>,
}

/// The contracted current J n…n on box^N in leaf coordinates, as a finite
/// trigonometric sum Σ a_c exp(i Σ_{k,i} ω_{c,k,i} u_{k,i}).
#[derive(Clone, Debug)]
pub struct LeafSeries {
    side: f64,
    particles: usize,
    terms: Vec<SeriesTerm>,
}

impl LeafSeries {
    /// Series of J contracted with `contract` on every slot, over the box.
    pub fn new(psi: &MultiTimeWaveFunction, contract: &FourVector, leaf_box: &LeafBox) -> Result<Self> {
        let frame = leaf_box.frame()?;
        let lowered = contract.lower();
        let mut terms: Vec<SeriesTerm> = Vec::new();
        for pair in psi.pairs() {
            let mut amplitude = pair.weight;
            let mut omega = Vec::with_capacity(pair.amplitude.len());
            for (amp, k) in pair.amplitude.iter().zip(&pair.phase_momentum) {
                let dot: Complex64 = (0..4).map(|mu| amp[mu] * lowered[mu]).sum();
                amplitude *= dot * Complex64::from_polar(1.0, k.dot(&leaf_box.center));
                let mut w: [f64; 3] = std::array::from_fn(|i| k.dot(&frame[i + 1]));
                for wi in w.iter_mut() {
                    if wi.abs() < FREQ_TOL {
                        *wi = 0.0;
                    }
                }
                omega.push(w);
            }
            let same = |t: &SeriesTerm| {
                t.omega
                    .iter()
                    .zip(&omega)
                    .all(|(a, b)| (0..3).all(|i| (a[i] - b[i]).abs() < FREQ_TOL))
            };
            match terms.iter_mut().find(|t| same(t)) {
                Some(t) => t.amplitude += amplitude,
                None => terms.push(SeriesTerm { amplitude, omega }),
            }
        }
        Ok(LeafSeries {
            side: leaf_box.side,
            particles: psi.particle_count(),
            terms,
        })
    }

    /// Value at leaf coordinates u[k] of each particle.
    pub fn eval(&self, u: &[[f64; 3]]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let phase: f64 = t
                    .omega
                    .iter()
                    .zip(u)
                    .map(|(w, x)| w[0] * x[0] + w[1] * x[1] + w[2] * x[2])
                    .sum();
                (t.amplitude * Complex64::from_polar(1.0, phase)).re
            })
            .sum()
    }

    /// Σ_c |a_c|: a rigorous upper bound of the series on all of space.
    pub fn l1_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm()).sum()
    }

    /// Whether every frequency is an integer multiple of 2π/L, so the
    /// series is periodic on the box.
    pub fn is_commensurate(&self) -> bool {
        let unit = 2.0 * std::f64::consts::PI / self.side;
        self.terms.iter().all(|t| {
            t.omega.iter().flatten().all(|w| {
                let m = w / unit;
                (m - m.round()).abs() < 1e-9 * (1.0 + m.abs())
            })
        })
    }

    /// Normalized marginal density of coordinate i of particle k.
    pub fn marginal(&self, k: usize, i: usize) -> Result<Marginal> {
        self.check_slot(k, i)?;
        let mut parts = Vec::new();
        for t in &self.terms {
            let mut a = t.amplitude;
            for (kk, w) in t.omega.iter().enumerate() {
                for (ii, &wi) in w.iter().enumerate() {
                    if (kk, ii) != (k, i) {
                        a *= box_integral(wi, self.side);
                    }
                }
            }
            parts.push((t.omega[k][i], a));
        }
        Marginal::new(self.side, parts)
    }

    /// Normalized density of d = u_{k,i} − u_{l,i} wrapped into [−L/2, L/2).
    /// Requires a periodic series.
    pub fn relative_marginal(&self, k: usize, l: usize, i: usize) -> Result<Marginal> {
        self.check_slot(k, i)?;
        self.check_slot(l, i)?;
        if k == l {
            return Err(Error::InvalidInput("relative marginal needs two particles".into()));
        }
        if !self.is_commensurate() {
            return Err(Error::InvalidInput(
                "relative marginals need momenta commensurate with the box".into(),
            ));
        }
        let mut parts = Vec::new();
        for t in &self.terms {
            if (t.omega[k][i] + t.omega[l][i]).abs() > FREQ_TOL {
                continue;
            }
            let mut a = t.amplitude * self.side;
            for (kk, w) in t.omega.iter().enumerate() {
                for (ii, &wi) in w.iter().enumerate() {
                    if ii != i || (kk != k && kk != l) {
                        a *= box_integral(wi, self.side);
                    }
                }
            }
            parts.push((t.omega[k][i], a));
        }
        Marginal::new(self.side, parts)
    }

    fn check_slot(&self, k: usize, i: usize) -> Result<()> {
        if k >= self.particles || i >= 3 {
            return Err(Error::InvalidInput(format!("no coordinate ({k}, {i})")));
        }
        Ok(())
    }
}

/// A one-dimensional density on [−L/2, L/2) of the form Re Σ a e^{iωu} / Z.
#[derive(Clone, Debug)]
pub struct Marginal {
    side: f64,
    terms: Vec<(f64, Complex64)>,
    norm: f64,
}

impl Marginal {
    fn new(side: f64, raw: Vec<(f64, Complex64)>) -> Result<Self> {
        let mut terms: Vec<(f64, Complex64)> = Vec::new();
        for (w, a) in raw {
            if a.norm() == 0.0 {
                continue;
            }
            match terms.iter_mut().find(|(v, _)| (v - w).abs() < FREQ_TOL) {
                Some((_, b)) => *b += a,
                None => terms.push((w, a)),
            }
        }
        let norm: f64 = terms.iter().map(|(w, a)| a.re * box_integral(*w, side)).sum();
        if !(norm > 0.0) {
            return Err(Error::Inconsistent(format!("marginal has non-positive mass {norm:e}")));
        }
        Ok(Marginal { side, terms, norm })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn pdf(&self, u: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, a)| (a * Complex64::from_polar(1.0, w * u)).re)
            .sum::<f64>()
            / self.norm
    }

    pub fn cdf(&self, u: f64) -> f64 {
        let u = u.clamp(-0.5 * self.side, 0.5 * self.side);
        let v: f64 = self
            .terms
            .iter()
            .map(|(w, a)| (a * partial_integral(*w, self.side, u)).re)
            .sum();
        (v / self.norm).clamp(0.0, 1.0)
    }

    /// Probability mass of each of `bins` equal bins.
    pub fn bin_probabilities(&self, bins: usize) -> Vec<f64> {
        let width = self.side / bins as f64;
        (0..bins)
            .map(|b| {
                let lo = -0.5 * self.side + b as f64 * width;
                self.cdf(lo + width) - self.cdf(lo)
            })
            .collect()
    }
}
