//! Dirac-representation gamma matrices.

use std::sync::LazyLock;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use super::vector::METRIC;

pub type Spinor = Vector4<Complex64>;
pub type SpinMatrix = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrices σ¹, σ², σ³.
pub fn pauli() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

fn blocks(
    a: &Matrix2<Complex64>,
    b: &Matrix2<Complex64>,
    c: &Matrix2<Complex64>,
    d: &Matrix2<Complex64>,
) -> SpinMatrix {
    let mut m = SpinMatrix::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    m
}

/// γ⁰…γ³ in the Dirac representation.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    pub gamma: [SpinMatrix; 4],
}

impl GammaSet {
    pub fn dirac() -> Self {
        let id = Matrix2::<Complex64>::identity();
        let z = Matrix2::<Complex64>::zeros();
        let [s1, s2, s3] = pauli();
        let g0 = blocks(&id, &z, &z, &(-id));
        let spatial = |s: &Matrix2<Complex64>| blocks(&z, s, &(-s), &z);
        GammaSet {
            gamma: [g0, spatial(&s1), spatial(&s2), spatial(&s3)],
        }
    }

    pub fn get(&self, mu: usize) -> &SpinMatrix {
        &self.gamma[mu]
    }

    /// γ⁰γ^i, the velocity (alpha) matrices.
    pub fn alpha(&self, i: usize) -> SpinMatrix {
        self.gamma[0] * self.gamma[i]
    }

    /// γ^μ p_μ = p⁰γ⁰ − p^iγ^i.
    pub fn slash(&self, p: &[f64; 4]) -> SpinMatrix {
        let mut m = SpinMatrix::zeros();
        for mu in 0..4 {
            m += self.gamma[mu] * Complex64::new(METRIC[mu] * p[mu], 0.0);
        }
        m
    }

    /// Max-norm deviation of {γ^μ, γ^ν} from 2g^{μν}·1 over all index pairs.
    pub fn anticommutator_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let ac = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                let g = if mu == nu { 2.0 * METRIC[mu] } else { 0.0 };
                let target = SpinMatrix::identity() * Complex64::new(g, 0.0);
                worst = worst.max(max_abs(&(ac - target)));
            }
        }
        worst
    }
}

pub static GAMMA: LazyLock<GammaSet> = LazyLock::new(GammaSet::dirac);

/// Dirac adjoint ψ̄ = ψ†γ⁰, returned as a row of conjugated, sign-flipped entries.
pub fn dirac_bar(psi: &Spinor) -> Spinor {
    Spinor::new(psi[0].conj(), psi[1].conj(), -psi[2].conj(), -psi[3].conj())
}

/// ā·M·b for spinors a, b (with ā the Dirac adjoint of a).
pub fn bilinear(a: &Spinor, m: &SpinMatrix, b: &Spinor) -> Complex64 {
    let bar = dirac_bar(a);
    let mb = m * b;
    (0..4).map(|i| bar[i] * mb[i]).sum()
}

/// The four bilinears ā γ^μ b, μ = 0..3.
pub fn vector_bilinear(a: &Spinor, b: &Spinor) -> [Complex64; 4] {
    std::array::from_fn(|mu| bilinear(a, &GAMMA.gamma[mu], b))
}

pub fn max_abs(m: &SpinMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
