//! The foliation-free law: an entangled pair driven by a twisted field.

use relbohm::foliation::VectorFieldSpec;
use relbohm::generalized::{integrate_generalized, place_on_surface, GeneralizedConfig};
use relbohm::presets;
use relbohm::spacetime::FourVector;

fn main() -> relbohm::Result<()> {
    let psi = presets::epr_pair(2.0)?;
    let field = VectorFieldSpec::Twisted {
        epsilon: 0.3,
        wavenumber: 1.0,
    };
    let cfg = GeneralizedConfig::default();
    let start = place_on_surface(&field, &FourVector::ZERO, &[[0.7, -0.3, 0.4]], &cfg)?;
    let run = integrate_generalized(&psi, &field, &start, 1.0, &cfg)?;
    for (k, x) in run.history.final_configuration().iter().enumerate() {
        println!("particle {k}: {x}");
    }
    let d = run.diagnostics;
    println!(
        "{} steps, at most {} fixed-point iterations, time-like chords: {}",
        d.steps, d.max_iterations_used, d.timelike_chords
    );
    Ok(())
}
