use num_complex::Complex64;

use super::*;
use crate::foliation::{extract_foliation, CurvedTestFoliation, HyperplaneFoliation, TimeFunction};
use crate::presets;
use crate::spacetime::Hyperplane;
use crate::wavefunction::{PlaneWaveMode, Spin};

fn lab() -> Foliation {
    HyperplaneFoliation::new(FourVector::TIME).unwrap().into()
}

fn curved() -> Foliation {
    CurvedTestFoliation::new(TimeFunction {
        amplitude: 0.5,
        wavenumber: 0.9,
        direction: [0.0, 0.6, 0.8],
    })
    .unwrap()
    .into()
}

fn up(p: [f64; 3]) -> PlaneWaveMode {
    PlaneWaveMode::new(1.0, p, Spin::Up).unwrap()
}

/// ±z momenta with unequal magnitudes: the density moves and z(τ) oscillates.
fn z_superposition() -> MultiTimeWaveFunction {
    MultiTimeWaveFunction::single_particle(vec![
        (Complex64::new(1.0, 0.0), up([0.0, 0.0, 0.7])),
        (Complex64::new(0.8, 0.2), up([0.0, 0.0, -0.4])),
    ])
    .unwrap()
}

fn entangled() -> MultiTimeWaveFunction {
    presets::entangled_pair(up([0.3, 0.0, 0.5]), up([-0.2, 0.4, -0.6]), 0.0).unwrap()
}

fn direction(v: &FourVector) -> FourVector {
    *v * (1.0 / v.euclidean_norm())
}

#[test]
fn single_particle_velocity_is_the_current() {
    let psi = z_superposition();
    for fol in [lab(), curved()] {
        let x = fol.point_on_leaf(0.3, [0.2, -0.1, 0.7]).unwrap();
        let v = velocity_field(&psi, &fol, &[x]).unwrap();
        assert_eq!(v[0], psi.current(&x).unwrap());
    }
}

#[test]
fn product_state_follows_single_particle_currents() {
    let a = [
        (Complex64::new(1.0, 0.0), up([0.0, 0.0, 0.7])),
        (Complex64::new(0.5, 0.1), up([0.2, 0.0, 0.0])),
    ];
    let b = [(Complex64::new(1.0, 0.0), up([0.0, 0.3, 0.0]))];
    let psi = presets::product_pair(&a, &b).unwrap();
    let single = MultiTimeWaveFunction::single_particle(a.to_vec()).unwrap();
    let fol = lab();
    let x1 = FourVector::new(0.0, 0.3, 0.1, -0.4);
    for x2 in [
        FourVector::new(0.0, 1.0, 2.0, 3.0),
        FourVector::new(0.0, -2.0, 0.5, 0.0),
    ] {
        let v = velocity_field(&psi, &fol, &[x1, x2]).unwrap();
        let j = single.current(&x1).unwrap();
        assert!(direction(&v[0]).max_abs_diff(&direction(&j)) < 1e-12);
    }
}

#[test]
fn entangled_velocity_depends_on_partner_position() {
    let psi = entangled();
    let fol = lab();
    let x1 = FourVector::new(0.0, 0.1, 0.2, 0.3);
    let va = velocity_field(&psi, &fol, &[x1, FourVector::new(0.0, 0.0, 0.0, 0.0)]).unwrap();
    let vb = velocity_field(&psi, &fol, &[x1, FourVector::new(0.0, 1.5, -0.7, 2.0)]).unwrap();
    assert!(direction(&va[0]).max_abs_diff(&direction(&vb[0])) > 1e-3);
}

#[test]
fn velocities_are_future_causal() {
    let psi = entangled();
    let fol = curved();
    for i in 0..50 {
        let s = i as f64 * 0.37;
        let x1 = fol.point_on_leaf(1.0, [s.sin(), s.cos(), 0.5 * s]).unwrap();
        let x2 = fol.point_on_leaf(1.0, [-s, 0.3 * s.sin(), 1.0]).unwrap();
        for v in velocity_field(&psi, &fol, &[x1, x2]).unwrap() {
            assert!(v[0] > 0.0);
            assert!(v.square() >= -1e-10 * v.euclidean_norm().powi(2));
        }
    }
}

#[test]
fn off_leaf_configuration_rejected() {
    let psi = entangled();
    let r = velocity_field(&psi, &lab(), &[FourVector::ZERO, FourVector::new(1e-6, 0.0, 0.0, 0.0)]);
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn rest_particle_moves_along_time_axis() {
    let psi = presets::rest_particle(1.0).unwrap();
    let h = integrate(
        &psi,
        &lab(),
        &[FourVector::ZERO],
        (0.0, 3.0),
        &IntegratorConfig::with_step(0.1),
    )
    .unwrap();
    assert_eq!(h.taus().len(), 31);
    for s in h.line(0).samples() {
        assert!(s.x.max_abs_diff(&FourVector::new(s.tau, 0.0, 0.0, 0.0)) < 1e-13);
    }
}

#[test]
fn oscillating_trajectory_matches_fine_reference() {
    let psi = z_superposition();
    let fol = lab();
    let x0 = [FourVector::new(0.0, 0.0, 0.0, 0.3)];
    let coarse = integrate(&psi, &fol, &x0, (0.0, 8.0), &IntegratorConfig::with_step(0.02)).unwrap();
    let fine = integrate(&psi, &fol, &x0, (0.0, 8.0), &IntegratorConfig::with_step(0.002)).unwrap();
    let zs: Vec<f64> = coarse.line(0).points().map(|p| p[3]).collect();
    let (lo, hi) = zs.iter().fold((f64::MAX, f64::MIN), |(a, b), z| (a.min(*z), b.max(*z)));
    assert!(hi - lo > 0.05, "z should move, range {}", hi - lo);
    for (a, b) in coarse
        .line(0)
        .samples()
        .iter()
        .zip(fine.line(0).samples().iter().step_by(10))
    {
        assert_eq!(a.tau, b.tau);
        assert!(a.x.max_abs_diff(&b.x) < 1e-6);
    }
}

#[test]
fn richardson_estimate_reported() {
    let psi = z_superposition();
    let cfg = IntegratorConfig {
        richardson: true,
        ..IntegratorConfig::with_step(0.05)
    };
    let h = integrate(&psi, &lab(), &[FourVector::ZERO], (0.0, 2.0), &cfg).unwrap();
    let e = h.diagnostics().richardson_error.unwrap();
    assert!(e < 1e-7, "{e}");
}

#[test]
fn product_state_trajectories_equal_single_particle_runs() {
    let a = [
        (Complex64::new(1.0, 0.0), up([0.0, 0.0, 0.7])),
        (Complex64::new(0.6, -0.3), up([0.0, 0.0, -0.2])),
    ];
    let b = [
        (Complex64::new(1.0, 0.0), up([0.4, 0.0, 0.0])),
        (Complex64::new(0.3, 0.0), up([-0.1, 0.0, 0.0])),
    ];
    let psi = presets::product_pair(&a, &b).unwrap();
    let fol: Foliation = extract_foliation(&psi).unwrap().into();
    let n = fol.normal(&FourVector::ZERO);
    let start = [
        FourVector::new(0.0, 0.1, 0.2, 0.0),
        FourVector::new(0.0, -1.0, 0.5, 0.3),
    ];
    // put both on the leaf τ = 0 of the tilted foliation
    let start: Vec<FourVector> = start.iter().map(|x| *x - n * (n.dot(x))).collect();
    let cfg = IntegratorConfig::with_step(0.02);
    let pair = integrate(&psi, &fol, &start, (0.0, 4.0), &cfg).unwrap();
    for (k, modes) in [a.to_vec(), b.to_vec()].into_iter().enumerate() {
        let single = MultiTimeWaveFunction::single_particle(modes).unwrap();
        let alone = integrate(&single, &fol, &start[k..=k], (0.0, 4.0), &cfg).unwrap();
        for (p, q) in pair.line(k).points().zip(alone.line(0).points()) {
            assert!(p.max_abs_diff(&q) < 1e-11);
        }
    }
}

#[test]
fn single_particle_curve_is_foliation_independent() {
    let psi = z_superposition();
    let flat: Foliation = extract_foliation(&psi).unwrap().into();
    let bent = curved();
    let x0 = FourVector::new(0.0, 0.2, -0.3, 0.5);
    let cfg = IntegratorConfig::with_step(0.01);
    let a = integrate(&psi, &flat, &[x0], (flat.label(&x0), flat.label(&x0) + 6.0), &cfg).unwrap();
    let b = integrate(&psi, &bent, &[x0], (bent.label(&x0), bent.label(&x0) + 6.0), &cfg).unwrap();
    let d = curve_deviation_within(a.line(0), b.line(0)).max(curve_deviation_within(b.line(0), a.line(0)));
    assert!(d < 1e-6, "{d}");
}

#[test]
fn entangled_curves_depend_on_the_foliation() {
    let psi = entangled();
    let flat: Foliation = extract_foliation(&psi).unwrap().into();
    let bent = curved();
    let cfg = IntegratorConfig::with_step(0.02);
    let start_flat = [
        flat.point_on_leaf(0.0, [0.0, 0.0, 0.0]).unwrap(),
        flat.point_on_leaf(0.0, [1.0, 0.5, -0.5]).unwrap(),
    ];
    let start_bent: Vec<FourVector> = start_flat
        .iter()
        .map(|x| bent.point_on_leaf(0.0, x.spatial()).unwrap())
        .collect();
    let a = integrate(&psi, &flat, &start_flat, (0.0, 6.0), &cfg).unwrap();
    let b = integrate(&psi, &bent, &start_bent, (0.0, 6.0), &cfg).unwrap();
    let d = curve_deviation_within(a.line(0), b.line(0)).max(curve_deviation_within(a.line(1), b.line(1)));
    assert!(d > 1e-3, "{d}");
}

#[test]
fn stored_tangents_are_parallel_to_velocities() {
    let psi = entangled();
    let fol = curved();
    let start = [
        fol.point_on_leaf(0.0, [0.0; 3]).unwrap(),
        fol.point_on_leaf(0.0, [0.5, 0.5, 0.5]).unwrap(),
    ];
    let h = integrate(&psi, &fol, &start, (0.0, 2.0), &IntegratorConfig::with_step(0.05)).unwrap();
    assert!(h.diagnostics().max_leaf_residual < LEAF_TOL);
    for i in 0..h.taus().len() {
        let cfg = h.configuration(i);
        let v = velocity_field(&psi, &fol, &cfg).unwrap();
        for k in 0..2 {
            let t = h.line(k).samples()[i].tangent;
            assert!(direction(&t).max_abs_diff(&direction(&v[k])) < 1e-12);
            assert!((fol.label(&cfg[k]) - h.taus()[i]).abs() < LEAF_TOL);
        }
    }
}

#[test]
fn history_crossings_recover_grid_points() {
    let psi = entangled();
    let fol = lab();
    let start = [FourVector::ZERO, FourVector::new(0.0, 1.0, 0.0, 0.0)];
    let h = integrate(&psi, &fol, &start, (0.0, 2.0), &IntegratorConfig::with_step(0.1)).unwrap();
    let c = h.crossings(&Hyperplane::new(FourVector::TIME, 1.0).unwrap()).unwrap();
    let grid = h.configuration(10);
    for k in 0..2 {
        assert!(c[k].point.max_abs_diff(&grid[k]) < 1e-10);
    }
}

#[test]
fn invalid_ranges_rejected() {
    let psi = presets::rest_particle(1.0).unwrap();
    let cfg = IntegratorConfig::default();
    assert!(integrate(&psi, &lab(), &[FourVector::ZERO], (1.0, 1.0), &cfg).is_err());
    assert!(integrate(&psi, &lab(), &[FourVector::ZERO], (1.0, 0.0), &cfg).is_err());
    assert!(integrate(&psi, &lab(), &[FourVector::ZERO], (0.5, 1.0), &cfg).is_err());
    let bad = IntegratorConfig { step: 0.0, ..cfg };
    assert!(integrate(&psi, &lab(), &[FourVector::ZERO], (0.0, 1.0), &bad).is_err());
}

/// a·u(0) + b·(u(k ẑ) + u(−k ẑ)) chosen so Ψ vanishes at the origin.
fn state_with_node() -> MultiTimeWaveFunction {
    let k = 0.8_f64;
    let e = (1.0 + k * k).sqrt();
    let b = -(2.0_f64).sqrt() / (2.0 * (e + 1.0).sqrt());
    MultiTimeWaveFunction::single_particle(vec![
        (Complex64::new(1.0, 0.0), PlaneWaveMode::at_rest(1.0, Spin::Up).unwrap()),
        (Complex64::new(b, 0.0), up([0.0, 0.0, k])),
        (Complex64::new(b, 0.0), up([0.0, 0.0, -k])),
    ])
    .unwrap()
}

#[test]
fn nodes_halt_with_diagnosis() {
    let psi = state_with_node();
    assert!(psi.evaluate(&[FourVector::ZERO]).unwrap().max_abs() < 1e-14);
    match velocity_field(&psi, &lab(), &[FourVector::ZERO]) {
        Err(Error::Degenerate { particle: 0, .. }) => {}
        other => panic!("expected degeneracy, got {other:?}"),
    }
    match integrate(
        &psi,
        &lab(),
        &[FourVector::ZERO],
        (0.0, 1.0),
        &IntegratorConfig::default(),
    ) {
        Err(Error::Degenerate {
            particle: 0,
            partial: Some(h),
            ..
        }) => assert!(h.taus().is_empty()),
        other => panic!("expected degeneracy, got {other:?}"),
    }
}
