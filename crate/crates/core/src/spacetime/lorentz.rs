//! Restricted Poincaré transforms together with their Dirac spinor representation.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;

use super::gamma::{max_abs, pauli, SpinMatrix, GAMMA};
use super::vector::{FourVector, METRIC};
use crate::error::{Error, Result};

/// Tolerance used when checking |direction| = 1.
const UNIT_TOL: f64 = 1e-12;

/// A proper orthochronous Poincaré transform x ↦ Λx + a, carried with the
/// spinor matrix D satisfying D⁻¹γ^μD = Λ^μ_ν γ^ν.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincareTransform {
    pub lambda: Matrix4<f64>,
    pub translation: FourVector,
    pub spinor_rep: SpinMatrix,
}

fn unit3(v: [f64; 3], what: &str) -> Result<[f64; 3]> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidInput(format!(
            "{what} must be a unit 3-vector, got norm {norm}"
        )));
    }
    Ok(v)
}

fn normalize3(v: [f64; 3]) -> Option<[f64; 3]> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.map(|c| c / norm))
}

fn spin_block_diag(m: &Matrix2<Complex64>) -> SpinMatrix {
    let mut out = SpinMatrix::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(m);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(m);
    out
}

impl PoincareTransform {
    pub fn identity() -> Self {
        PoincareTransform {
            lambda: Matrix4::identity(),
            translation: FourVector::ZERO,
            spinor_rep: SpinMatrix::identity(),
        }
    }

    /// Pure boost with the given rapidity along a unit spatial direction.
    ///
    /// Λ maps (t, x∥) to (t coshχ + x∥ sinhχ, t sinhχ + x∥ coshχ), and
    /// D = exp((χ/2) γ⁰γ·n̂) = cosh(χ/2) + sinh(χ/2) γ⁰γ·n̂.
    pub fn boost(direction: [f64; 3], rapidity: f64) -> Result<Self> {
        let n = unit3(direction, "boost direction")?;
        if !rapidity.is_finite() {
            return Err(Error::InvalidInput("rapidity must be finite".into()));
        }
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let mut lambda = Matrix4::identity();
        lambda[(0, 0)] = ch;
        for i in 0..3 {
            lambda[(0, i + 1)] = sh * n[i];
            lambda[(i + 1, 0)] = sh * n[i];
            for j in 0..3 {
                lambda[(i + 1, j + 1)] += (ch - 1.0) * n[i] * n[j];
            }
        }
        let half = 0.5 * rapidity;
        let mut alpha_n = SpinMatrix::zeros();
        for i in 0..3 {
            alpha_n += GAMMA.alpha(i + 1) * Complex64::new(n[i], 0.0);
        }
        let spinor_rep =
            SpinMatrix::identity() * Complex64::new(half.cosh(), 0.0) + alpha_n * Complex64::new(half.sinh(), 0.0);
        Ok(PoincareTransform {
            lambda,
            translation: FourVector::ZERO,
            spinor_rep,
        })
    }

    /// Active right-handed rotation by `angle` about a unit axis.
    ///
    /// D = exp(−i(θ/2) Σ·n̂) with Σ^k = diag(σ^k, σ^k).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = unit3(axis, "rotation axis")?;
        if !angle.is_finite() {
            return Err(Error::InvalidInput("rotation angle must be finite".into()));
        }
        let (c, s) = (angle.cos(), angle.sin());
        let mut lambda = Matrix4::identity();
        // Rodrigues: R = c·1 + s[n]× + (1−c) n nᵀ
        let cross = [[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                lambda[(i + 1, j + 1)] = c * delta + s * cross[i][j] + (1.0 - c) * n[i] * n[j];
            }
        }
        let sigma = pauli();
        let mut sn = Matrix2::<Complex64>::zeros();
        for i in 0..3 {
            sn += sigma[i] * Complex64::new(n[i], 0.0);
        }
        let half = 0.5 * angle;
        let rot2 = Matrix2::identity() * Complex64::new(half.cos(), 0.0) - sn * Complex64::new(0.0, half.sin());
        Ok(PoincareTransform {
            lambda,
            translation: FourVector::ZERO,
            spinor_rep: spin_block_diag(&rot2),
        })
    }

    pub fn translation(a: FourVector) -> Self {
        PoincareTransform {
            translation: a,
            ..Self::identity()
        }
    }

    /// The pure boost taking (1,0,0,0) to the unit future time-like vector `n`.
    pub fn boost_to(n: &FourVector) -> Result<Self> {
        if !(n[0] > 0.0) || (n.square() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "boost target must be unit future time-like, got {n}"
            )));
        }
        let spatial = n.spatial_norm();
        match normalize3(n.spatial()) {
            Some(dir) if spatial > 0.0 => Self::boost(dir, spatial.asinh()),
            _ => Ok(Self::identity()),
        }
    }

    /// Assemble a transform from explicit parts without checking the
    /// representation identity. Useful for fault injection in harnesses.
    pub fn from_parts_unchecked(lambda: Matrix4<f64>, translation: FourVector, spinor_rep: SpinMatrix) -> Self {
        PoincareTransform {
            lambda,
            translation,
            spinor_rep,
        }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &PoincareTransform) -> PoincareTransform {
        PoincareTransform {
            lambda: self.lambda * other.lambda,
            translation: self.apply_vector(&other.translation) + self.translation,
            spinor_rep: self.spinor_rep * other.spinor_rep,
        }
    }

    pub fn inverse(&self) -> PoincareTransform {
        let lambda_inv = self.lambda_inverse();
        let a = to_na(&self.translation);
        let inv_a = -(lambda_inv * a);
        let spinor_inv = self
            .spinor_rep
            .try_inverse()
            .expect("spinor representation of a Lorentz transform is invertible");
        PoincareTransform {
            lambda: lambda_inv,
            translation: from_na(&inv_a),
            spinor_rep: spinor_inv,
        }
    }

    /// Λ⁻¹ = g Λᵀ g.
    pub fn lambda_inverse(&self) -> Matrix4<f64> {
        let g = Matrix4::from_diagonal(&Vector4::from(METRIC));
        g * self.lambda.transpose() * g
    }

    /// Point action x ↦ Λx + a.
    pub fn apply(&self, x: &FourVector) -> FourVector {
        self.apply_vector(x) + self.translation
    }

    /// Vector (tangent) action v ↦ Λv.
    pub fn apply_vector(&self, v: &FourVector) -> FourVector {
        from_na(&(self.lambda * to_na(v)))
    }

    /// Max deviation of Λᵀ g Λ from g.
    pub fn metric_defect(&self) -> f64 {
        let g = Matrix4::from_diagonal(&Vector4::from(METRIC));
        let d = self.lambda.transpose() * g * self.lambda - g;
        d.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Max componentwise deviation of D⁻¹γ^μD from Λ^μ_ν γ^ν over μ.
    pub fn representation_defect(&self) -> f64 {
        let Some(d_inv) = self.spinor_rep.try_inverse() else {
            return f64::INFINITY;
        };
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            let lhs = d_inv * GAMMA.gamma[mu] * self.spinor_rep;
            let mut rhs = SpinMatrix::zeros();
            for nu in 0..4 {
                rhs += GAMMA.gamma[nu] * Complex64::new(self.lambda[(mu, nu)], 0.0);
            }
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
        worst
    }

    /// Checks all structural invariants at tolerance `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let metric = self.metric_defect();
        if metric > tol {
            return Err(Error::InvalidInput(format!(
                "Λ does not preserve the metric (defect {metric:e})"
            )));
        }
        if self.lambda[(0, 0)] < 1.0 - tol {
            return Err(Error::InvalidInput("Λ is not orthochronous".into()));
        }
        let det = self.lambda.determinant();
        if (det - 1.0).abs() > tol.max(1e-9) {
            return Err(Error::InvalidInput(format!("det Λ = {det}, expected +1")));
        }
        let rep = self.representation_defect();
        if rep > tol {
            return Err(Error::InvalidInput(format!(
                "spinor representation defect {rep:e} exceeds {tol:e}"
            )));
        }
        if !self.translation.is_finite() {
            return Err(Error::InvalidInput("non-finite translation".into()));
        }
        Ok(())
    }

    /// A random restricted Poincaré transform: rotation ∘ boost, plus a
    /// translation with components bounded by `max_translation`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64, max_translation: f64) -> Self {
        let rotation = Self::rotation(random_unit(rng), rng.random_range(-3.1..3.1)).expect("random unit axis");
        let boost = Self::boost(random_unit(rng), rng.random_range(0.0..=max_rapidity)).expect("random unit direction");
        let a = FourVector(std::array::from_fn(|_| {
            rng.random_range(-max_translation..=max_translation)
        }));
        Self::translation(a).compose(&rotation.compose(&boost))
    }
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.map(|c| c / n);
        }
    }
}

pub(crate) fn to_na(v: &FourVector) -> Vector4<f64> {
    Vector4::from(v.0)
}

pub(crate) fn from_na(v: &Vector4<f64>) -> FourVector {
    FourVector([v[0], v[1], v[2], v[3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const X: [f64; 3] = [1.0, 0.0, 0.0];
    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    fn lambda_diff(a: &PoincareTransform, b: &PoincareTransform) -> f64 {
        (a.lambda - b.lambda).iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_rapidity_is_identity() {
        let b = PoincareTransform::boost(Z, 0.0).unwrap();
        assert_eq!(b.lambda, Matrix4::identity());
        assert!(max_abs(&(b.spinor_rep - SpinMatrix::identity())) == 0.0);
    }

    #[test]
    fn rapidities_add() {
        let a = PoincareTransform::boost(X, 0.4).unwrap();
        let b = PoincareTransform::boost(X, 0.9).unwrap();
        let ab = a.compose(&b);
        let c = PoincareTransform::boost(X, 1.3).unwrap();
        assert!(lambda_diff(&ab, &c) < 1e-12);
        assert!(max_abs(&(ab.spinor_rep - c.spinor_rep)) < 1e-12);
    }

    #[test]
    fn boost_representation_identity() {
        let b = PoincareTransform::boost(Z, 1.3).unwrap();
        assert!(b.representation_defect() < 1e-12);
        let r = PoincareTransform::rotation([0.0, 0.6, 0.8], 2.1).unwrap();
        assert!(r.representation_defect() < 1e-12);
    }

    #[test]
    fn closed_form_boost_on_points() {
        let chi: f64 = 0.7;
        let b = PoincareTransform::boost(X, chi).unwrap();
        let (t, x) = (1.5, -0.3);
        let y = b.apply(&FourVector::new(t, x, 0.0, 0.0));
        let expect = FourVector::new(
            t * chi.cosh() + x * chi.sinh(),
            t * chi.sinh() + x * chi.cosh(),
            0.0,
            0.0,
        );
        assert!(y.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn translation_and_identity_actions() {
        let x = FourVector::new(0.3, -1.0, 2.0, 5.0);
        assert_eq!(PoincareTransform::identity().apply(&x), x);
        let a = FourVector::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(PoincareTransform::translation(a).apply(&FourVector::ZERO), a);
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(PoincareTransform::boost([1.0, 1.0, 0.0], 0.3).is_err());
        assert!(PoincareTransform::boost(X, f64::NAN).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = PoincareTransform::random(&mut rng, 2.0, 10.0);
        let id = g.compose(&g.inverse());
        assert!(lambda_diff(&id, &PoincareTransform::identity()) < 1e-12);
        assert!(id.translation.euclidean_norm() < 1e-12);
        assert!(max_abs(&(id.spinor_rep - SpinMatrix::identity())) < 1e-12);
    }

    #[test]
    fn boost_to_maps_time_axis() {
        let n = FourVector::new(2.0, 0.3, -1.2, 1.0).normalized_timelike().unwrap();
        let b = PoincareTransform::boost_to(&n).unwrap();
        assert!(b.apply_vector(&FourVector::TIME).max_abs_diff(&n) < 1e-13);
    }

    #[test]
    fn random_transforms_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = PoincareTransform::random(&mut rng, 2.0, 10.0);
            g.validate(1e-12).unwrap();
        }
    }
}
