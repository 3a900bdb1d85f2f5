//! Acceptance criteria, run in order with one PASS/FAIL line each.
//! Runtime limits are part of the criteria and are measured per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relbohm::covariance::{
    check_momentum_hypersurface_independence, current_divergence, energy_momentum_divergence, pinned_suite, run_suite,
    Fault, Harness, SuiteConfig,
};
use relbohm::dynamics::{curve_deviation_within, integrate, IntegratorConfig, WorldLine};
use relbohm::equilibrium::{nonlocality_probe, LeafBox};
use relbohm::foliation::{
    extract_foliation, CurvedTestFoliation, Foliation, HyperplaneFoliation, TimeFunction, VectorFieldSpec,
};
use relbohm::generalized::{
    fibonacci_directions, generate_surface, integrate_generalized, place_on_surface, transitivity_probe,
    GeneralizedConfig, SurfaceConfig,
};
use relbohm::presets;
use relbohm::scenario::{bundled, find_bundled, run, ExitStatus, RunOptions};
use relbohm::spacetime::{FourVector, PoincareTransform, GAMMA};
use relbohm::wavefunction::{MultiTimeWaveFunction, PlaneWaveMode, ProductTerm, Spin};

type Verdict = relbohm::Result<(bool, String)>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Verdict,
}

fn random_point<R: Rng>(rng: &mut R) -> FourVector {
    FourVector(std::array::from_fn(|_| rng.random_range(-5.0..5.0)))
}

fn symmetric_deviation(a: &WorldLine, b: &WorldLine) -> f64 {
    curve_deviation_within(a, b).max(curve_deviation_within(b, a))
}

fn up(p: [f64; 3]) -> PlaneWaveMode {
    PlaneWaveMode::new(1.0, p, Spin::Up).expect("on shell")
}

fn entangled() -> MultiTimeWaveFunction {
    presets::entangled_pair(up([0.3, 0.0, 0.5]), up([-0.2, 0.4, -0.6]), 0.0).expect("valid pair")
}

fn curved(amplitude: f64) -> Foliation {
    CurvedTestFoliation::new(TimeFunction {
        amplitude,
        wavenumber: 0.8,
        direction: [0.0, 0.6, 0.8],
    })
    .expect("space-like leaves")
    .into()
}

fn algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let clifford = GAMMA.anticommutator_defect();
    let (mut metric, mut rep): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let g = PoincareTransform::random(&mut rng, 2.0, 10.0);
        metric = metric.max(g.metric_defect());
        rep = rep.max(g.representation_defect());
    }
    let pass = clifford < 1e-12 && metric < 1e-12 && rep < 1e-12;
    Ok((
        pass,
        format!("anticommutator {clifford:.1e}, metric {metric:.1e}, D⁻¹γD − Λγ {rep:.1e}"),
    ))
}

fn wave_equation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let n = 1 + i % 2;
        let psi = presets::random_state(&mut rng, n, 3, 1.0);
        let x: Vec<FourVector> = (0..n).map(|_| random_point(&mut rng)).collect();
        for k in 0..n {
            worst = worst.max(psi.dirac_residual(k, &x, 1e-4)?);
        }
    }
    let mut p = up([0.3, 0.2, -0.4]).momentum();
    p[0] *= 1.1;
    let bad = PlaneWaveMode::new_unchecked(1.0, p, Spin::Up);
    let term = || vec![ProductTerm::new(Complex64::new(1.0, 0.0), vec![bad])];
    let off_shell = MultiTimeWaveFunction::new_unchecked(vec![1.0], term())?;
    let fault = off_shell.dirac_residual(0, &[FourVector::new(0.2, 0.1, 0.3, 0.0)], 1e-4)?;
    let rejected = MultiTimeWaveFunction::new(vec![1.0], term()).is_err();
    let pass = worst < 1e-6 && fault > 1e-2 && rejected;
    Ok((
        pass,
        format!("max residual {worst:.1e}; off-shell residual {fault:.1e}, rejected on construction: {rejected}"),
    ))
}

fn covariance_suite() -> Verdict {
    let cfg = SuiteConfig::default();
    let cases = pinned_suite(&cfg)?;
    let report = run_suite(&cases, &cfg, Harness::SOUND)?;
    let mut algebraic: f64 = 0.0;
    let mut traj = [0.0f64; 2];
    for ((_, reports), case) in report.cases.iter().zip(&cases) {
        for r in reports {
            let d = r.deviation.unwrap_or(f64::INFINITY);
            if r.check == "trajectory" {
                let slot = &mut traj[case.psi.particle_count() - 1];
                *slot = slot.max(d);
            } else {
                algebraic = algebraic.max(d);
            }
        }
    }
    let mut detected = Vec::new();
    for fault in [
        Fault::FlippedSpinGenerator,
        Fault::InverseFoliationAction,
        Fault::UntransformedInitialData,
    ] {
        detected.push(!run_suite(&cases, &cfg, Harness::with_fault(fault))?.pass);
    }
    let pass = report.pass && algebraic < 1e-10 && traj[0] < 1e-6 && traj[1] < 1e-5 && detected.iter().all(|d| *d);
    Ok((
        pass,
        format!(
            "{} cases: algebraic {algebraic:.1e}, trajectory N=1 {:.1e}, N=2 {:.1e}; faults detected {detected:?}",
            cases.len(),
            traj[0],
            traj[1]
        ),
    ))
}

fn foliation_independence() -> Verdict {
    let single = MultiTimeWaveFunction::single_particle(vec![
        (Complex64::new(1.0, 0.0), up([0.0, 0.0, 0.7])),
        (Complex64::new(0.8, 0.2), up([0.0, 0.0, -0.4])),
    ])?;
    let flat: Foliation = extract_foliation(&single)?.into();
    let bent = curved(0.5);
    let x0 = FourVector::new(0.0, 0.2, -0.3, 0.5);
    let cfg = IntegratorConfig::with_step(0.01);
    let a = integrate(&single, &flat, &[x0], (flat.label(&x0), flat.label(&x0) + 6.0), &cfg)?;
    let b = integrate(&single, &bent, &[x0], (bent.label(&x0), bent.label(&x0) + 6.0), &cfg)?;
    let same = symmetric_deviation(a.line(0), b.line(0));

    let pair = entangled();
    let flat: Foliation = extract_foliation(&pair)?.into();
    let cfg = IntegratorConfig::with_step(0.02);
    let start_flat = [
        flat.point_on_leaf(0.0, [0.0; 3])?,
        flat.point_on_leaf(0.0, [1.0, 0.5, -0.5])?,
    ];
    let start_bent = [
        bent.point_on_leaf(0.0, [0.0; 3])?,
        bent.point_on_leaf(0.0, [1.0, 0.5, -0.5])?,
    ];
    let a = integrate(&pair, &flat, &start_flat, (0.0, 6.0), &cfg)?;
    let b = integrate(&pair, &bent, &start_bent, (0.0, 6.0), &cfg)?;
    let differ = curve_deviation_within(a.line(0), b.line(0)).max(curve_deviation_within(a.line(1), b.line(1)));
    Ok((
        same < 1e-6 && differ > 1e-3,
        format!("N=1 deviation {same:.1e}; entangled N=2 deviation {differ:.2e}"),
    ))
}

fn conservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut dj, mut dt): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let psi = presets::random_state(&mut rng, 1, 3, 1.0);
        let x = random_point(&mut rng);
        dj = dj.max(current_divergence(&psi, &x, 1e-4)?);
        dt = dt.max(energy_momentum_divergence(&psi, &x, 1e-4)?);
    }
    let side = 2.0;
    let psi = presets::two_mode_beat(1.0, 2.0 * std::f64::consts::PI / side, 0.8)?;
    let leaf_box = LeafBox::new(FourVector::TIME, FourVector::ZERO, side)?;
    let p = check_momentum_hypersurface_independence(&psi, &leaf_box, 0.77, 128, 1e-2)?;
    let dp = p.deviation.unwrap_or(f64::INFINITY);
    Ok((
        dj < 1e-6 && dt < 1e-6 && p.pass,
        format!("∂J {dj:.1e}, ∂t {dt:.1e}; P relative change at 128³ {dp:.1e}"),
    ))
}

fn generalized() -> Verdict {
    let profile = TimeFunction {
        amplitude: 0.3,
        wavenumber: 0.8,
        direction: [0.0, 0.6, 0.8],
    };
    let constant = VectorFieldSpec::Constant {
        normal: FourVector::new(1.25, 0.0, 0.75, 0.0),
    };
    let gradient = VectorFieldSpec::Gradient {
        time_function: profile.clone(),
    };
    let twisted = VectorFieldSpec::Twisted {
        epsilon: 0.3,
        wavenumber: 1.0,
    };
    let surface = SurfaceConfig::default();
    let dirs = fibonacci_directions(64);
    let mut drift: f64 = 0.0;
    for field in [&constant, &gradient, &twisted] {
        drift = drift.max(generate_surface(field, &FourVector::ZERO, &dirs, 3.0, &surface)?.max_constraint_drift());
    }

    let psi = entangled();
    let cfg = GeneralizedConfig::default();
    let mut reduction: f64 = 0.0;
    let flat: Foliation = HyperplaneFoliation::new(constant.normal(&FourVector::ZERO))?.into();
    let start = place_on_surface(&constant, &FourVector::ZERO, &[[1.0, 0.5, -0.5]], &cfg)?;
    let g = integrate_generalized(&psi, &constant, &start, 3.0, &cfg)?;
    let f = integrate(&psi, &flat, &start, (0.0, 3.0), &IntegratorConfig::with_step(0.01))?;
    for k in 0..2 {
        reduction = reduction.max(symmetric_deviation(g.history.line(k), f.line(k)));
    }
    let level: Foliation = CurvedTestFoliation::new(profile)?.into();
    let start = [
        level.point_on_leaf(0.0, [0.0; 3])?,
        level.point_on_leaf(0.0, [0.8, 0.4, -0.6])?,
    ];
    let g = integrate_generalized(&psi, &gradient, &start, 2.0, &cfg)?;
    let f = integrate(&psi, &level, &start, (0.0, 2.0), &IntegratorConfig::with_step(0.01))?;
    for k in 0..2 {
        reduction = reduction.max(symmetric_deviation(g.history.line(k), f.line(k)));
    }

    let twist = transitivity_probe(&twisted, &FourVector::ZERO, 3.0, &surface)?.max_distance;
    let integrable = transitivity_probe(&constant, &FourVector::ZERO, 3.0, &surface)?
        .max_distance
        .max(transitivity_probe(&gradient, &FourVector::ZERO, 3.0, &surface)?.max_distance);
    Ok((
        drift < 1e-8 && reduction < 1e-6 && twist > 1e-2 && integrable < 1e-5,
        format!(
            "v·n drift {drift:.1e}, reduction {reduction:.1e}, transitivity twisted {twist:.2e} / integrable {integrable:.1e}"
        ),
    ))
}

fn equilibrium() -> Verdict {
    let tmp = tempfile::tempdir()?;
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["stationary-equilibrium", "beat-equilibrium", "epr-pair-equilibrium"] {
        let config = find_bundled(name).expect("bundled").config()?;
        let samples = match &config.scenario {
            relbohm::scenario::Scenario::Equilibrium { samples, .. } => *samples,
            _ => 0,
        };
        let outcome = run(
            config,
            &RunOptions {
                output_dir: Some(tmp.path().join(name)),
                seed: None,
            },
        )?;
        pass &= outcome.pass && samples == 20_000;
        parts.push(format!("{name} M={samples}: {}", outcome.message));
    }
    let lab: Foliation = HyperplaneFoliation::new(FourVector::TIME)?.into();
    let x1 = FourVector::new(0.0, 0.1, 0.2, -0.3);
    let grid: Vec<FourVector> = (0..27)
        .map(|i| {
            FourVector::new(
                0.0,
                (i % 3) as f64 * 0.4,
                (i / 3 % 3) as f64 * 0.4,
                (i / 9) as f64 * 0.4 - 0.4,
            )
        })
        .collect();
    let a = [
        (Complex64::new(1.0, 0.0), up([0.0, 0.0, 0.7])),
        (Complex64::new(0.5, 0.1), up([0.2, 0.0, 0.0])),
    ];
    let b = [
        (Complex64::new(1.0, 0.0), up([0.0, 0.3, 0.0])),
        (Complex64::new(0.4, -0.3), up([0.0, 0.0, -0.5])),
    ];
    let product = nonlocality_probe(&presets::product_pair(&a, &b)?, &lab, &x1, &grid)?.max_deviation;
    let epr = nonlocality_probe(&presets::epr_pair(2.0)?, &lab, &x1, &grid)?.max_deviation;
    pass &= product < 1e-12 && epr > 1e-3;
    parts.push(format!("nonlocality product {product:.1e}, entangled {epr:.2e}"));
    Ok((pass, parts.join("; ")))
}

fn reproducibility() -> Verdict {
    let tmp = tempfile::tempdir()?;
    let mut failures = Vec::new();
    for b in bundled() {
        let mut manifests = Vec::new();
        for rep in ["a", "b"] {
            let outcome = run(
                b.config()?,
                &RunOptions {
                    output_dir: Some(tmp.path().join(rep).join(b.name)),
                    seed: None,
                },
            )?;
            if outcome.status() != ExitStatus::Success {
                failures.push(format!("{} exit {}", b.name, outcome.status().code()));
            }
            manifests.push(outcome.manifest.files);
        }
        if manifests[0] != manifests[1] {
            failures.push(format!("{} outputs differ", b.name));
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!(
            "{} bundled scenarios, all exit 0 with identical outputs",
            bundled().len()
        )
    } else {
        failures.join(", ")
    };
    Ok((pass, detail))
}

fn main() -> ExitCode {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria = [
        Criterion {
            id: 1,
            name: "algebraic suite",
            limit: Some(Duration::from_secs(5)),
            check: algebra,
        },
        Criterion {
            id: 2,
            name: "wave-equation suite",
            limit: Some(Duration::from_secs(10)),
            check: wave_equation,
        },
        Criterion {
            id: 3,
            name: "covariance suite",
            limit: minutes(5),
            check: covariance_suite,
        },
        Criterion {
            id: 4,
            name: "single-particle foliation independence",
            limit: None,
            check: foliation_independence,
        },
        Criterion {
            id: 5,
            name: "conservation suite",
            limit: minutes(2),
            check: conservation,
        },
        Criterion {
            id: 6,
            name: "generalized-dynamics suite",
            limit: minutes(5),
            check: generalized,
        },
        Criterion {
            id: 7,
            name: "equilibrium suite",
            limit: minutes(10),
            check: equilibrium,
        },
        Criterion {
            id: 8,
            name: "reproducibility",
            limit: None,
            check: reproducibility,
        },
    ];
    let mut all = true;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(Ok(v)) => v,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let pass = ok && in_time;
        all &= pass;
        let limit = c
            .limit
            .map(|l| format!(" / limit {} s", l.as_secs()))
            .unwrap_or_default();
        println!(
            "[{}] {}. {} ({:.1} s{limit}): {detail}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
