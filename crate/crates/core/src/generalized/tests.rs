use super::*;
use crate::dynamics::{curve_deviation_within, integrate, IntegratorConfig};
use crate::foliation::{CurvedTestFoliation, Foliation, HyperplaneFoliation, Region, TimeFunction};
use crate::presets;
use crate::wavefunction::{PlaneWaveMode, Spin};

fn profile() -> TimeFunction {
    TimeFunction {
        amplitude: 0.3,
        wavenumber: 0.8,
        direction: [0.0, 0.6, 0.8],
    }
}

fn constant() -> VectorFieldSpec {
    VectorFieldSpec::Constant {
        normal: FourVector::new(1.25, 0.0, 0.75, 0.0),
    }
}

fn gradient() -> VectorFieldSpec {
    VectorFieldSpec::Gradient {
        time_function: profile(),
    }
}

fn twisted() -> VectorFieldSpec {
    VectorFieldSpec::Twisted {
        epsilon: 0.3,
        wavenumber: 1.0,
    }
}

fn frame_velocity(field: &VectorFieldSpec, x: &FourVector, d: [f64; 3]) -> FourVector {
    let chart = SurfaceChart::new(field, *x, 1).unwrap();
    chart.velocity(&d)
}

fn entangled() -> MultiTimeWaveFunction {
    let a = PlaneWaveMode::new(1.0, [0.3, 0.0, 0.5], Spin::Up).unwrap();
    let b = PlaneWaveMode::new(1.0, [-0.2, 0.4, -0.6], Spin::Up).unwrap();
    presets::entangled_pair(a, b, 0.0).unwrap()
}

fn symmetric_deviation(a: &WorldLine, b: &WorldLine) -> f64 {
    curve_deviation_within(a, b).max(curve_deviation_within(b, a))
}

#[test]
fn constant_field_gives_straight_lines() {
    let field = VectorFieldSpec::Constant {
        normal: FourVector::TIME,
    };
    let x = FourVector::new(0.5, 1.0, 2.0, 3.0);
    let v0 = FourVector::new(0.0, 1.0, 0.0, 0.0);
    let c = surface_curve(&field, &x, &v0, 2.0, &SurfaceConfig::default()).unwrap();
    assert!(!c.truncated);
    for s in &c.samples {
        let d = s.x.max_abs_diff(&(x + v0 * s.sigma));
        assert!(d < 1e-12, "{d}");
        assert_eq!(s.v, v0);
    }
}

#[test]
fn twisted_curve_conserves_constraint() {
    let field = twisted();
    let x = FourVector::new(0.0, 0.3, -0.2, 0.4);
    let v0 = frame_velocity(&field, &x, [0.3, 0.5, 0.81]);
    let c = surface_curve(&field, &x, &v0, 5.0, &SurfaceConfig::default()).unwrap();
    assert!(c.constraint_drift < 1e-8, "{}", c.constraint_drift);
    assert_eq!(c.samples[0].x, x);
}

#[test]
fn twisted_curve_matches_step_refined_reference() {
    let field = twisted();
    let x = FourVector::new(0.0, 0.3, -0.2, 0.4);
    let v0 = frame_velocity(&field, &x, [0.0, 0.6, 0.8]);
    let cfg = SurfaceConfig::default();
    let fine_cfg = SurfaceConfig { step: 1e-4, ..cfg };
    let a = surface_curve(&field, &x, &v0, 5.0, &cfg).unwrap();
    let b = surface_curve(&field, &x, &v0, 5.0, &fine_cfg).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (p, q) in a.samples.iter().zip(&b.samples) {
        assert!((p.sigma - q.sigma).abs() < 1e-12);
        assert!(p.x.max_abs_diff(&q.x) < 1e-6);
    }
}

#[test]
fn non_orthogonal_seed_rejected() {
    let field = twisted();
    let x = FourVector::ZERO;
    let bad = FourVector::new(0.1, 1.0, 0.0, 0.0);
    assert!(surface_curve(&field, &x, &bad, 1.0, &SurfaceConfig::default()).is_err());
    assert!(surface_curve(&field, &x, &FourVector::ZERO, 1.0, &SurfaceConfig::default()).is_err());
}

#[test]
fn leaving_the_region_truncates() {
    let field = twisted();
    let cfg = SurfaceConfig {
        region: Region::cube(1.0),
        ..SurfaceConfig::default()
    };
    let v0 = frame_velocity(&field, &FourVector::ZERO, [1.0, 0.0, 0.0]);
    let c = surface_curve(&field, &FourVector::ZERO, &v0, 3.0, &cfg).unwrap();
    assert!(c.truncated);
    assert!(c.samples.iter().all(|s| cfg.region.contains(&s.x)));
}

#[test]
fn constant_mesh_is_flat() {
    let field = constant();
    let x = FourVector::new(0.2, -0.4, 0.1, 0.3);
    let n = field.normal(&x);
    let mesh = generate_surface(&field, &x, &fibonacci_directions(64), 2.0, &SurfaceConfig::default()).unwrap();
    assert!(mesh.is_complete());
    assert_eq!(mesh.points[0], x);
    for p in &mesh.points {
        assert!(n.dot(&(*p - x)).abs() < 1e-8);
    }
}

#[test]
fn gradient_mesh_lies_on_level_set() {
    let field = gradient();
    let t = profile();
    let x = FourVector::new(0.2, -0.4, 0.1, 0.3);
    let level = t.value(&x);
    let mesh = generate_surface(&field, &x, &fibonacci_directions(64), 2.0, &SurfaceConfig::default()).unwrap();
    assert!(mesh.max_constraint_drift() < 1e-8);
    for p in &mesh.points {
        // root-find the level-set time with the same spatial point
        let mut q = *p;
        for _ in 0..50 {
            q[0] -= t.value(&q) - level;
        }
        assert!((q[0] - p[0]).abs() < 1e-6);
    }
}

#[test]
fn twisted_mesh_leaves_the_naive_hyperplane() {
    let field = twisted();
    let x = FourVector::ZERO;
    let n = field.normal(&x);
    let mesh = generate_surface(&field, &x, &fibonacci_directions(64), 3.0, &SurfaceConfig::default()).unwrap();
    let off = mesh.points.iter().map(|p| n.dot(&(*p - x)).abs()).fold(0.0, f64::max);
    assert!(off > 1e-3, "{off}");
    assert!(mesh.max_constraint_drift() < 1e-8);
    assert!(mesh.adjacency.len() > mesh.points.len());
}

#[test]
fn bad_direction_grid_rejected() {
    let cfg = SurfaceConfig::default();
    assert!(generate_surface(&twisted(), &FourVector::ZERO, &[], 1.0, &cfg).is_err());
    assert!(generate_surface(&twisted(), &FourVector::ZERO, &[[1.0, 1.0, 0.0]], 1.0, &cfg).is_err());
}

#[test]
fn chart_distance_recovers_surface_points() {
    let field = twisted();
    let chart = SurfaceChart::new(&field, FourVector::new(0.0, 0.1, 0.2, 0.3), 128).unwrap();
    let w = [1.2, -0.7, 0.9];
    let p = chart.point(&w);
    let (d, found) = chart.distance(&p);
    assert!(d < 1e-10, "{d}");
    for i in 0..3 {
        assert!((found[i] - w[i]).abs() < 1e-6);
    }
    let off = p + chart.frame()[0] * 0.01;
    let (d, _) = chart.distance(&off);
    assert!((d - 0.01).abs() < 2e-3, "{d}");
}

#[test]
fn symmetry_probe_examples() {
    let cfg = SurfaceConfig::default();
    let x = FourVector::new(0.0, 0.2, -0.1, 0.4);
    for (field, tol) in [(constant(), 1e-8), (gradient(), 1e-5), (twisted(), 1e-5)] {
        let chart = SurfaceChart::new(&field, x, cfg.chart_steps).unwrap();
        let y = chart.point(&[1.5, -1.0, 0.8]);
        let d = symmetry_probe(&field, &x, &y, &cfg).unwrap();
        assert!(d < tol, "{field:?}: {d}");
    }
}

#[test]
fn transitivity_probe_examples() {
    let cfg = SurfaceConfig::default();
    let x = FourVector::ZERO;
    let c = transitivity_probe(&constant(), &x, 3.0, &cfg).unwrap();
    assert!(c.max_distance < 1e-8, "{}", c.max_distance);
    let g = transitivity_probe(&gradient(), &x, 3.0, &cfg).unwrap();
    assert!(g.max_distance < 1e-5, "{}", g.max_distance);
    let t = transitivity_probe(&twisted(), &x, 3.0, &cfg).unwrap();
    assert!(t.max_distance > 1e-2, "{}", t.max_distance);
}

#[test]
fn constant_field_reduces_to_hyperplane_dynamics() {
    let psi = entangled();
    let field = constant();
    let n = field.normal(&FourVector::ZERO);
    let fol: Foliation = HyperplaneFoliation::new(n).unwrap().into();
    let cfg = GeneralizedConfig::default();
    let start = place_on_surface(&field, &FourVector::ZERO, &[[1.0, 0.5, -0.5]], &cfg).unwrap();
    let g = integrate_generalized(&psi, &field, &start, 3.0, &cfg).unwrap();
    let f = integrate(&psi, &fol, &start, (0.0, 3.0), &IntegratorConfig::with_step(0.01)).unwrap();
    for k in 0..2 {
        let d = symmetric_deviation(g.history.line(k), f.line(k));
        assert!(d < 1e-6, "particle {k}: {d}");
    }
    assert_eq!(g.diagnostics.timelike_chords, 0);
}

#[test]
fn gradient_field_reduces_to_level_set_dynamics() {
    let psi = entangled();
    let field = gradient();
    let fol: Foliation = CurvedTestFoliation::new(profile()).unwrap().into();
    let cfg = GeneralizedConfig::default();
    let start = [
        fol.point_on_leaf(0.0, [0.0, 0.0, 0.0]).unwrap(),
        fol.point_on_leaf(0.0, [0.8, 0.4, -0.6]).unwrap(),
    ];
    let g = integrate_generalized(&psi, &field, &start, 2.0, &cfg).unwrap();
    let f = integrate(&psi, &fol, &start, (0.0, 2.0), &IntegratorConfig::with_step(0.01)).unwrap();
    for k in 0..2 {
        let d = symmetric_deviation(g.history.line(k), f.line(k));
        assert!(d < 1e-6, "particle {k}: {d}");
    }
}

#[test]
fn single_particle_ignores_the_field() {
    let psi = presets::two_mode_beat(1.0, 0.9, 0.7).unwrap();
    let lab: Foliation = HyperplaneFoliation::new(FourVector::TIME).unwrap().into();
    let x0 = FourVector::new(0.0, 0.1, 0.0, 0.2);
    let g = integrate_generalized(&psi, &gradient(), &[x0], 4.0, &GeneralizedConfig::default()).unwrap();
    let f = integrate(&psi, &lab, &[x0], (0.0, 5.0), &IntegratorConfig::with_step(0.01)).unwrap();
    let d = curve_deviation_within(g.history.line(0), f.line(0));
    assert!(d < 1e-6, "{d}");
}

#[test]
fn twisted_entangled_run_is_step_consistent() {
    let psi = entangled();
    let field = twisted();
    let cfg = GeneralizedConfig::default();
    let start = place_on_surface(&field, &FourVector::ZERO, &[[1.0, 0.5, -0.5]], &cfg).unwrap();
    let a = integrate_generalized(&psi, &field, &start, 1.5, &cfg).unwrap();
    let fine = GeneralizedConfig {
        step: cfg.step / 2.0,
        ..cfg
    };
    let b = integrate_generalized(&psi, &field, &start, 1.5, &fine).unwrap();
    for k in 0..2 {
        let d = symmetric_deviation(a.history.line(k), b.history.line(k));
        assert!(d < 1e-5, "particle {k}: {d}");
    }
    assert!(a.diagnostics.max_final_update < cfg.fixed_point_tol);
}

#[test]
fn initial_points_off_the_surface_rejected() {
    let psi = entangled();
    let start = [FourVector::ZERO, FourVector::new(0.5, 1.0, 0.0, 0.0)];
    let r = integrate_generalized(&psi, &twisted(), &start, 1.0, &GeneralizedConfig::default());
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}
