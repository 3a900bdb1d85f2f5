//! Named wave functions used by the bundled scenarios, plus seeded random
//! generators for property suites.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::wavefunction::{MultiTimeWaveFunction, PlaneWaveMode, ProductTerm, Spin};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A single particle at rest.
pub fn rest_particle(mass: f64) -> Result<MultiTimeWaveFunction> {
    MultiTimeWaveFunction::single_particle(vec![(c(1.0, 0.0), PlaneWaveMode::at_rest(mass, Spin::Up)?)])
}

/// Equal-weight superposition of momenta ±q ẑ with a relative phase φ.
/// Both modes have the same energy, so the density is static.
pub fn counter_propagating(mass: f64, q: f64, phase: f64) -> Result<MultiTimeWaveFunction> {
    MultiTimeWaveFunction::single_particle(vec![
        (c(1.0, 0.0), PlaneWaveMode::new(mass, [0.0, 0.0, q], Spin::Up)?),
        (
            Complex64::from_polar(1.0, phase),
            PlaneWaveMode::new(mass, [0.0, 0.0, -q], Spin::Up)?,
        ),
    ])
}

/// Superposition of a rest mode and a mode with momentum k ẑ. The density
/// beats with angular frequency ΔE = √(k² + m²) − m.
pub fn two_mode_beat(mass: f64, k: f64, weight: f64) -> Result<MultiTimeWaveFunction> {
    MultiTimeWaveFunction::single_particle(vec![
        (c(1.0, 0.0), PlaneWaveMode::at_rest(mass, Spin::Up)?),
        (c(weight, 0.0), PlaneWaveMode::new(mass, [0.0, 0.0, k], Spin::Up)?),
    ])
}

/// Two particles in a product of single-particle superpositions.
pub fn product_pair(
    first: &[(Complex64, PlaneWaveMode)],
    second: &[(Complex64, PlaneWaveMode)],
) -> Result<MultiTimeWaveFunction> {
    let masses = vec![first[0].1.mass(), second[0].1.mass()];
    let mut terms = Vec::new();
    for (c1, m1) in first {
        for (c2, m2) in second {
            terms.push(ProductTerm::new(c1 * c2, vec![*m1, *m2]));
        }
    }
    MultiTimeWaveFunction::new(masses, terms)
}

/// (|a, b⟩ + e^{iφ}|b, a⟩)/√2 for two equal-mass particles.
pub fn entangled_pair(a: PlaneWaveMode, b: PlaneWaveMode, phase: f64) -> Result<MultiTimeWaveFunction> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    MultiTimeWaveFunction::new(
        vec![a.mass(), b.mass()],
        vec![
            ProductTerm::new(c(s, 0.0), vec![a, b]),
            ProductTerm::new(Complex64::from_polar(s, phase), vec![b, a]),
        ],
    )
}

/// The standard entangled pair of the bundled scenarios: mass 1, modes
/// (0, 0, q)↑ and (q, 0, 0)↓ with q = 2π/L for a box of side L. Both modes
/// have the same energy, so the density on lab leaves is static while the
/// particles move.
pub fn epr_pair(box_side: f64) -> Result<MultiTimeWaveFunction> {
    let q = 2.0 * PI / box_side;
    entangled_pair(
        PlaneWaveMode::new(1.0, [0.0, 0.0, q], Spin::Up)?,
        PlaneWaveMode::new(1.0, [q, 0.0, 0.0], Spin::Down)?,
        0.0,
    )
}

fn random_mode<R: Rng + ?Sized>(rng: &mut R, mass: f64, max_p: f64) -> PlaneWaveMode {
    let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-max_p..=max_p));
    let spin = if rng.random_bool(0.5) { Spin::Up } else { Spin::Down };
    PlaneWaveMode::new(mass, p, spin).expect("finite momentum")
}

/// A random N-particle state with `terms` product terms, masses in
/// [0.5, 2] and momentum components bounded by `max_p`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, particles: usize, terms: usize, max_p: f64) -> MultiTimeWaveFunction {
    let masses: Vec<f64> = (0..particles).map(|_| rng.random_range(0.5..2.0)).collect();
    let terms = (0..terms)
        .map(|_| {
            let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let modes = masses.iter().map(|&m| random_mode(rng, m, max_p)).collect();
            ProductTerm::new(coeff + c(0.05, 0.0), modes)
        })
        .collect();
    MultiTimeWaveFunction::new(masses, terms).expect("random state is valid")
}
