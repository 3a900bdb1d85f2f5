//! Surfaces Σ_x of time-like vector fields. For a gradient field they are
//! level sets; for the twisted field "y ∈ Σ_x, z ∈ Σ_y" does not imply z ∈ Σ_x.

use relbohm::foliation::{integrability_measure, Region, TimeFunction, VectorFieldSpec};
use relbohm::generalized::{transitivity_probe, SurfaceConfig};
use relbohm::spacetime::FourVector;

fn main() -> relbohm::Result<()> {
    let cfg = SurfaceConfig::default();
    let fields = [
        (
            "constant",
            VectorFieldSpec::Constant {
                normal: FourVector::TIME,
            },
        ),
        (
            "gradient",
            VectorFieldSpec::Gradient {
                time_function: TimeFunction {
                    amplitude: 0.3,
                    wavenumber: 1.0,
                    direction: [0.0, 0.0, 1.0],
                },
            },
        ),
        (
            "twisted",
            VectorFieldSpec::Twisted {
                epsilon: 0.3,
                wavenumber: 1.0,
            },
        ),
    ];
    for (name, field) in &fields {
        let obstruction = integrability_measure(field, &Region::cube(3.0), 200)?;
        let t = transitivity_probe(field, &FourVector::ZERO, 3.0, &cfg)?;
        println!(
            "{name:<9} Frobenius {obstruction:.2e}  transitivity {:.3e}",
            t.max_distance
        );
    }
    Ok(())
}
