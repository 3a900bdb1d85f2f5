use num_complex::Complex64;

use crate::spacetime::{SpinMatrix, Spinor};

/// An element of (ℂ⁴)^{⊗N}; particle 1 is the most significant index.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSpinor {
    particles: usize,
    data: Vec<Complex64>,
}

impl MultiSpinor {
    pub fn zeros(particles: usize) -> Self {
        MultiSpinor {
            particles,
            data: vec![Complex64::new(0.0, 0.0); 4usize.pow(particles as u32)],
        }
    }

    pub fn from_data(particles: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), 4usize.pow(particles as u32));
        MultiSpinor { particles, data }
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// self += c · f₁ ⊗ … ⊗ f_N.
    pub fn add_product(&mut self, c: Complex64, factors: &[Spinor]) {
        debug_assert_eq!(factors.len(), self.particles);
        for (idx, slot) in self.data.iter_mut().enumerate() {
            let mut v = c;
            let mut rem = idx;
            for k in (0..factors.len()).rev() {
                v *= factors[k][rem % 4];
                rem /= 4;
            }
            *slot += v;
        }
    }

    /// Applies `m` on the spinor index of particle `k` (0-based).
    pub fn apply_on_slot(&self, k: usize, m: &SpinMatrix) -> MultiSpinor {
        let stride = 4usize.pow((self.particles - 1 - k) as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let a = (idx / stride) % 4;
            let base = idx - a * stride;
            *slot = (0..4).map(|b| m[(a, b)] * self.data[base + b * stride]).sum();
        }
        MultiSpinor {
            particles: self.particles,
            data: out,
        }
    }

    /// Applies `m` on every slot: m^{⊗N}.
    pub fn apply_all(&self, m: &SpinMatrix) -> MultiSpinor {
        (0..self.particles).fold(self.clone(), |acc, k| acc.apply_on_slot(k, m))
    }

    /// Ψ† Φ.
    pub fn inner(&self, other: &MultiSpinor) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scaled(&self, c: Complex64) -> MultiSpinor {
        MultiSpinor {
            particles: self.particles,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &MultiSpinor) -> MultiSpinor {
        MultiSpinor {
            particles: self.particles,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &MultiSpinor) -> MultiSpinor {
        MultiSpinor {
            particles: self.particles,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &MultiSpinor) -> f64 {
        self.sub(other).max_abs()
    }
}

/// Real tensor with N space-time indices, stored row-major (μ₁ slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentTensor {
    rank: usize,
    data: Vec<f64>,
}

impl CurrentTensor {
    pub fn new(rank: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), 4usize.pow(rank as u32));
        CurrentTensor { rank, data }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.rank);
        let idx = indices.iter().fold(0, |acc, &i| acc * 4 + i);
        self.data[idx]
    }

    /// Applies Λ on every index: J'^{μ…} = Λ^μ_α … J^{α…}.
    pub fn transformed(&self, lambda: &nalgebra::Matrix4<f64>) -> CurrentTensor {
        let mut data = self.data.clone();
        for slot in 0..self.rank {
            let stride = 4usize.pow((self.rank - 1 - slot) as u32);
            let mut next = vec![0.0; data.len()];
            for (idx, out) in next.iter_mut().enumerate() {
                let a = (idx / stride) % 4;
                let base = idx - a * stride;
                *out = (0..4).map(|b| lambda[(a, b)] * data[base + b * stride]).sum();
            }
            data = next;
        }
        CurrentTensor { rank: self.rank, data }
    }

    pub fn max_abs_diff(&self, other: &CurrentTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
