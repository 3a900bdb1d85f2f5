use num_complex::Complex64;

use super::mode::{dirac_spinor, PlaneWaveMode, Spin};
use super::spinor::{CurrentTensor, MultiSpinor};
use crate::error::{Error, Result};
use crate::spacetime::{
    bilinear, vector_bilinear, FourVector, PoincareTransform, SpinMatrix, Spinor, CLASSIFY_TOL, GAMMA,
};

/// Relative tolerance for discarding imaginary parts of real bilinears.
pub const REALITY_TOL: f64 = 1e-10;

/// Tolerance on the re-expansion residual of D·u_s(p) in the basis {u_r(Λp)}.
pub const EXPANSION_TOL: f64 = 1e-10;

/// One N-fold product c · u(p₁)e^{−ip₁·x₁} ⊗ … ⊗ u(p_N)e^{−ip_N·x_N}.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub coefficient: Complex64,
    pub modes: Vec<PlaneWaveMode>,
}

impl ProductTerm {
    pub fn new(coefficient: Complex64, modes: Vec<PlaneWaveMode>) -> Self {
        ProductTerm { coefficient, modes }
    }

    fn same_tuple(&self, other: &ProductTerm) -> bool {
        self.modes.len() == other.modes.len()
            && self.modes.iter().zip(&other.modes).all(|(a, b)| {
                a.spin() == b.spin()
                    && a.mass().to_bits() == b.mass().to_bits()
                    && (0..4).all(|i| a.momentum()[i].to_bits() == b.momentum()[i].to_bits())
            })
    }
}

/// Per particle factor of Ψ̄γ…γΨ for one pair of terms: ū_{jk}γ^μu_{j'k} and p_{jk} − p_{j'k}.
#[derive(Clone, Debug)]
pub(crate) struct PairFactor {
    pub(crate) weight: Complex64,
    pub(crate) amplitude: Vec<[Complex64; 4]>,
    pub(crate) phase_momentum: Vec<FourVector>,
}

/// A finite superposition of N-fold products of positive-energy plane-wave
/// Dirac modes, Ψ(x₁,…,x_N) ∈ (ℂ⁴)^{⊗N}.
///
/// Terms with identical mode tuples are merged on construction, so the
/// stored tuples are pairwise orthogonal and Σ|c_j|² = 1 after normalization.
#[derive(Clone, Debug)]
pub struct MultiTimeWaveFunction {
    masses: Vec<f64>,
    terms: Vec<ProductTerm>,
    spinors: Vec<Vec<Spinor>>,
    pairs: Vec<PairFactor>,
}

impl MultiTimeWaveFunction {
    pub fn new(masses: Vec<f64>, terms: Vec<ProductTerm>) -> Result<Self> {
        for term in &terms {
            for mode in &term.modes {
                mode.validate()?;
            }
        }
        Self::build(masses, terms)
    }

    /// Skips per-mode mass-shell validation (structure is still checked).
    pub fn new_unchecked(masses: Vec<f64>, terms: Vec<ProductTerm>) -> Result<Self> {
        Self::build(masses, terms)
    }

    pub fn single_particle(terms: Vec<(Complex64, PlaneWaveMode)>) -> Result<Self> {
        let mass = terms
            .first()
            .map(|(_, m)| m.mass())
            .ok_or_else(|| Error::InvalidInput("wave function needs at least one term".into()))?;
        Self::new(
            vec![mass],
            terms.into_iter().map(|(c, m)| ProductTerm::new(c, vec![m])).collect(),
        )
    }

    fn build(masses: Vec<f64>, terms: Vec<ProductTerm>) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::InvalidInput("particle count must be at least 1".into()));
        }
        if masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput("masses must be positive and finite".into()));
        }
        let mut merged: Vec<ProductTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if term.modes.len() != n {
                return Err(Error::InvalidInput(format!(
                    "term has {} modes, expected {n}",
                    term.modes.len()
                )));
            }
            for (k, mode) in term.modes.iter().enumerate() {
                if (mode.mass() - masses[k]).abs() > 1e-12 * masses[k] {
                    return Err(Error::InvalidInput(format!(
                        "mode mass {} does not match particle {} mass {}",
                        mode.mass(),
                        k + 1,
                        masses[k]
                    )));
                }
            }
            if !term.coefficient.re.is_finite() || !term.coefficient.im.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            match merged.iter_mut().find(|t| t.same_tuple(&term)) {
                Some(existing) => existing.coefficient += term.coefficient,
                None => merged.push(term),
            }
        }
        let norm2: f64 = merged.iter().map(|t| t.coefficient.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidInput(
                "wave function needs at least one nonzero coefficient".into(),
            ));
        }
        let scale = 1.0 / norm2.sqrt();
        let terms: Vec<ProductTerm> = merged
            .into_iter()
            .filter(|t| t.coefficient.norm_sqr() > 0.0)
            .map(|mut t| {
                t.coefficient *= scale;
                t
            })
            .collect();
        let spinors: Vec<Vec<Spinor>> = terms
            .iter()
            .map(|t| t.modes.iter().map(dirac_spinor).collect())
            .collect();
        let mut pairs = Vec::with_capacity(terms.len() * terms.len());
        for (j, tj) in terms.iter().enumerate() {
            for (jp, tjp) in terms.iter().enumerate() {
                pairs.push(PairFactor {
                    weight: tj.coefficient.conj() * tjp.coefficient,
                    amplitude: (0..n)
                        .map(|k| vector_bilinear(&spinors[j][k], &spinors[jp][k]))
                        .collect(),
                    phase_momentum: (0..n)
                        .map(|k| tj.modes[k].momentum() - tjp.modes[k].momentum())
                        .collect(),
                });
            }
        }
        Ok(MultiTimeWaveFunction {
            masses,
            terms,
            spinors,
            pairs,
        })
    }

    /// Term-pair factors: J = Σ weight Π_k amplitude_k e^{i phase_momentum_k·x_k}.
    pub(crate) fn pairs(&self) -> &[PairFactor] {
        &self.pairs
    }

    pub fn particle_count(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    /// Σ over term pairs of |c̄_j c_j'| Π_k max_μ |ū γ^μ u'|: an upper bound
    /// on every component of the current tensor, used as a scale for
    /// relative zero tests.
    pub fn current_scale(&self) -> f64 {
        self.pairs
            .iter()
            .map(|pair| {
                pair.weight.norm()
                    * pair
                        .amplitude
                        .iter()
                        .map(|a| a.iter().map(|z| z.norm()).fold(0.0, f64::max))
                        .product::<f64>()
            })
            .sum()
    }

    fn check_points(&self, points: &[FourVector]) -> Result<()> {
        if points.len() != self.particle_count() {
            return Err(Error::PointCount {
                expected: self.particle_count(),
                got: points.len(),
            });
        }
        Ok(())
    }

    /// Ψ(x₁,…,x_N) = Σ_j c_j ⊗_k u_{jk} e^{−ip_{jk}·x_k}.
    pub fn evaluate(&self, points: &[FourVector]) -> Result<MultiSpinor> {
        self.check_points(points)?;
        let mut out = MultiSpinor::zeros(self.particle_count());
        for (term, spinors) in self.terms.iter().zip(&self.spinors) {
            let mut factors = Vec::with_capacity(spinors.len());
            for (k, (mode, u)) in term.modes.iter().zip(spinors).enumerate() {
                let phase = Complex64::from_polar(1.0, -mode.momentum().dot(&points[k]));
                factors.push(u * phase);
            }
            out.add_product(term.coefficient, &factors);
        }
        Ok(out)
    }

    /// Analytic ∂Ψ/∂x_k^μ.
    pub fn derivative(&self, points: &[FourVector], k: usize, mu: usize) -> Result<MultiSpinor> {
        self.check_points(points)?;
        let mut out = MultiSpinor::zeros(self.particle_count());
        for (term, spinors) in self.terms.iter().zip(&self.spinors) {
            let mut factors = Vec::with_capacity(spinors.len());
            for (i, (mode, u)) in term.modes.iter().zip(spinors).enumerate() {
                let p = mode.momentum();
                let phase = Complex64::from_polar(1.0, -p.dot(&points[i]));
                let mut f = u * phase;
                if i == k {
                    // ∂_μ e^{−ip·x} = −i p_μ e^{−ip·x}
                    f *= Complex64::new(0.0, -p.lower()[mu]);
                }
                factors.push(f);
            }
            out.add_product(term.coefficient, &factors);
        }
        Ok(out)
    }

    /// Max-norm of iγ^μ_k ∂_{k,μ}Ψ − m_kΨ with central differences of step `h`.
    pub fn dirac_residual(&self, k: usize, points: &[FourVector], h: f64) -> Result<f64> {
        self.check_points(points)?;
        if !(h > 0.0) {
            return Err(Error::InvalidInput("finite-difference step must be positive".into()));
        }
        let particle = self.particle_index(k)?;
        let mut residual = self
            .evaluate(points)?
            .scaled(Complex64::new(-self.masses[particle], 0.0));
        for mu in 0..4 {
            let mut plus = points.to_vec();
            let mut minus = points.to_vec();
            plus[particle][mu] += h;
            minus[particle][mu] -= h;
            let diff = self
                .evaluate(&plus)?
                .sub(&self.evaluate(&minus)?)
                .scaled(Complex64::new(0.0, 1.0 / (2.0 * h)));
            residual = residual.add(&diff.apply_on_slot(particle, &GAMMA.gamma[mu]));
        }
        Ok(residual.max_abs())
    }

    /// Same residual with the exact plane-wave derivative.
    pub fn dirac_residual_analytic(&self, k: usize, points: &[FourVector]) -> Result<f64> {
        let particle = self.particle_index(k)?;
        let mut residual = self
            .evaluate(points)?
            .scaled(Complex64::new(-self.masses[particle], 0.0));
        for mu in 0..4 {
            let d = self.derivative(points, particle, mu)?.scaled(Complex64::new(0.0, 1.0));
            residual = residual.add(&d.apply_on_slot(particle, &GAMMA.gamma[mu]));
        }
        Ok(residual.max_abs())
    }

    fn particle_index(&self, k: usize) -> Result<usize> {
        if k >= self.particle_count() {
            return Err(Error::InvalidInput(format!(
                "particle index {k} out of range for {} particles",
                self.particle_count()
            )));
        }
        Ok(k)
    }

    /// Contraction of J^{μ₁…μ_N}(x₁…x_N) with `normals[j]` on every slot j
    /// except `free`. With `free = Some(k)` the result is the free index
    /// μ_k; with `None` it is the full scalar contraction in slot 0.
    ///
    /// The imaginary parts cancel analytically; they are returned so callers
    /// can check them.
    pub fn contraction(
        &self,
        points: &[FourVector],
        normals: &[FourVector],
        free: Option<usize>,
    ) -> Result<[Complex64; 4]> {
        self.check_points(points)?;
        self.check_points(normals)?;
        let n = self.particle_count();
        let lowered: Vec<[f64; 4]> = normals.iter().map(|v| v.lower()).collect();
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for pair in &self.pairs {
            let mut scalar = pair.weight;
            let mut free_vec = [Complex64::new(0.0, 0.0); 4];
            for k in 0..n {
                let phase = Complex64::from_polar(1.0, pair.phase_momentum[k].dot(&points[k]));
                let amp = &pair.amplitude[k];
                if Some(k) == free {
                    free_vec = amp.map(|a| a * phase);
                } else {
                    let dot: Complex64 = (0..4).map(|mu| amp[mu] * lowered[k][mu]).sum();
                    scalar *= dot * phase;
                }
            }
            match free {
                Some(_) => {
                    for mu in 0..4 {
                        out[mu] += scalar * free_vec[mu];
                    }
                }
                None => out[0] += scalar,
            }
        }
        Ok(out)
    }

    /// J^{μ₁…μ_N} = Ψ̄ γ₁^{μ₁}…γ_N^{μ_N} Ψ at the given points.
    pub fn current_tensor(&self, points: &[FourVector]) -> Result<CurrentTensor> {
        self.check_points(points)?;
        let n = self.particle_count();
        let mut data = vec![Complex64::new(0.0, 0.0); 4usize.pow(n as u32)];
        for pair in &self.pairs {
            let factors: Vec<[Complex64; 4]> = (0..n)
                .map(|k| {
                    let phase = Complex64::from_polar(1.0, pair.phase_momentum[k].dot(&points[k]));
                    pair.amplitude[k].map(|a| a * phase)
                })
                .collect();
            for (idx, slot) in data.iter_mut().enumerate() {
                let mut v = pair.weight;
                let mut rem = idx;
                for k in (0..n).rev() {
                    v *= factors[k][rem % 4];
                    rem /= 4;
                }
                *slot += v;
            }
        }
        let scale = data.iter().map(|c| c.re.abs()).fold(1.0, f64::max);
        let worst_im = data.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if worst_im > REALITY_TOL * scale {
            return Err(Error::Inconsistent(format!(
                "current tensor has imaginary part {worst_im:e}"
            )));
        }
        Ok(CurrentTensor::new(n, data.into_iter().map(|c| c.re).collect()))
    }

    /// Single-particle current J^μ(x) for an N = 1 state.
    pub fn current(&self, x: &FourVector) -> Result<FourVector> {
        if self.particle_count() != 1 {
            return Err(Error::PointCount {
                expected: 1,
                got: self.particle_count(),
            });
        }
        let j = self.current_tensor(std::slice::from_ref(x))?;
        Ok(FourVector(std::array::from_fn(|mu| j.data()[mu])))
    }

    /// P^μ = Σ_j w_j Σ_k p_{jk}^μ with w_j = |c_j|²/Σ|c|².
    ///
    /// Stored tuples are pairwise distinct, hence orthogonal, so the Gram
    /// matrix of the expansion is diagonal and the weights are exact.
    pub fn total_momentum(&self) -> Result<FourVector> {
        let norm2: f64 = self.terms.iter().map(|t| t.coefficient.norm_sqr()).sum();
        let mut p = FourVector::ZERO;
        for term in &self.terms {
            let w = term.coefficient.norm_sqr() / norm2;
            for mode in &term.modes {
                p += mode.momentum() * w;
            }
        }
        if !p.is_future_timelike(CLASSIFY_TOL) {
            return Err(Error::Inconsistent(format!(
                "total momentum {p} is not future time-like"
            )));
        }
        Ok(p)
    }

    /// The state U_gΨ with (U_gΨ)(x) = D^{⊗N} Ψ(g⁻¹x).
    ///
    /// Each factor D·u_s(p) is re-expanded in {u₁(Λp), u₂(Λp)}; the
    /// translation contributes e^{+i(Λp)·a} per factor.
    pub fn transform(&self, g: &PoincareTransform) -> Result<MultiTimeWaveFunction> {
        let d = &g.spinor_rep;
        let n = self.particle_count();
        let mut out_terms = Vec::new();
        for (term, spinors) in self.terms.iter().zip(&self.spinors) {
            // expansion[k] = [(coefficient, mode')] for the two spins
            let mut expansions: Vec<[(Complex64, PlaneWaveMode); 2]> = Vec::with_capacity(n);
            for (mode, u) in term.modes.iter().zip(spinors) {
                expansions.push(expand_boosted(mode, u, d, g)?);
            }
            for choice in 0..(1usize << n) {
                let mut coefficient = term.coefficient;
                let mut modes = Vec::with_capacity(n);
                for (k, exp) in expansions.iter().enumerate() {
                    let (c, m) = exp[(choice >> (n - 1 - k)) & 1];
                    coefficient *= c;
                    modes.push(m);
                }
                out_terms.push(ProductTerm::new(coefficient, modes));
            }
        }
        let max_c = out_terms.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max);
        out_terms.retain(|t| t.coefficient.norm() > 1e-14 * max_c);
        Self::build(self.masses.clone(), out_terms)
    }
}

fn expand_boosted(
    mode: &PlaneWaveMode,
    u: &Spinor,
    d: &SpinMatrix,
    g: &PoincareTransform,
) -> Result<[(Complex64, PlaneWaveMode); 2]> {
    let p_new = g.apply_vector(&mode.momentum());
    let du = d * u;
    let phase = Complex64::from_polar(1.0, p_new.dot(&g.translation));
    let basis: [PlaneWaveMode; 2] = Spin::BOTH.map(|s| mode.with_momentum(p_new.spatial(), s));
    let basis_spinors = basis.map(|m| dirac_spinor(&m));
    let two_m = Complex64::new(2.0 * mode.mass(), 0.0);
    let coeffs = basis_spinors.map(|ur| bilinear(&ur, &SpinMatrix::identity(), &du) / two_m);
    let rebuilt = basis_spinors[0] * coeffs[0] + basis_spinors[1] * coeffs[1];
    let scale = du.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let residual = (du - rebuilt).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if residual > EXPANSION_TOL * scale {
        return Err(Error::Inconsistent(format!(
            "D·u(p) is not a positive-energy spinor at Λp (residual {residual:e}); \
             spinor representation does not match Λ"
        )));
    }
    Ok([(coeffs[0] * phase, basis[0]), (coeffs[1] * phase, basis[1])])
}
