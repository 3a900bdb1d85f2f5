//! Gamma-matrix algebra and the spinor representation of a boost.

use relbohm::spacetime::{FourVector, PoincareTransform, GAMMA};

fn main() -> relbohm::Result<()> {
    println!("Clifford defect: {:.2e}", GAMMA.anticommutator_defect());

    let g = PoincareTransform::boost([0.0, 0.0, 1.0], 0.8)?
        .compose(&PoincareTransform::translation(FourVector::new(0.5, 1.0, 0.0, 0.0)));
    println!("metric defect:         {:.2e}", g.metric_defect());
    println!("representation defect: {:.2e}", g.representation_defect());

    let x = FourVector::new(1.0, 0.2, -0.3, 0.4);
    let y = g.apply(&x);
    println!("x = {x}\ngx = {y}");
    println!(
        "interval preserved: {:.2e}",
        (x.square() - g.apply_vector(&x).square()).abs()
    );
    Ok(())
}
