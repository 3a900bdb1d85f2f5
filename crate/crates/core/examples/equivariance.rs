//! Sample |ψ|² on one leaf, transport the ensemble, and test it against
//! |ψ|² on a later leaf.

use relbohm::equilibrium::{equivariance_test, nonlocality_probe, EquivarianceConfig, LeafBox};
use relbohm::foliation::{Foliation, HyperplaneFoliation};
use relbohm::presets;
use relbohm::spacetime::FourVector;

fn main() -> relbohm::Result<()> {
    let side = 2.0;
    let psi = presets::epr_pair(side)?;
    let lab: Foliation = HyperplaneFoliation::new(FourVector::TIME)?.into();
    let leaf_box = LeafBox::new(FourVector::TIME, FourVector::ZERO, side)?;
    let cfg = EquivarianceConfig {
        samples: 5000,
        ..EquivarianceConfig::default()
    };
    let report = equivariance_test(&psi, &lab, &leaf_box, 1.3, &cfg)?;
    for t in &report.transported {
        println!("{:<10} chi² p = {:.3}  KS p = {:.3}", t.label, t.chi_square_p, t.ks_p);
    }
    // 2 p-values per test: even under the null some runs fall below alpha
    let k = 2 * report.transported.len() as i32;
    println!(
        "min p = {:.3}, pass = {} (false alarm rate at alpha {}: {:.2})",
        report.min_p,
        report.pass,
        cfg.alpha,
        1.0 - (1.0 - cfg.alpha).powi(k)
    );

    let grid: Vec<FourVector> = (0..5)
        .map(|i| FourVector::new(0.0, 0.2 * i as f64, 0.1, -0.3))
        .collect();
    let probe = nonlocality_probe(&psi, &lab, &FourVector::new(0.0, 0.1, 0.2, -0.3), &grid)?;
    println!(
        "velocity of particle 1 varies by {:.3e} as particle 2 moves",
        probe.max_deviation
    );
    Ok(())
}
