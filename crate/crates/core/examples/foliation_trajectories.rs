//! Trajectories of an entangled pair on the extracted foliation and on a
//! curved test foliation. Entanglement makes the two sets differ.

use relbohm::dynamics::{hausdorff, integrate, IntegratorConfig};
use relbohm::foliation::{extract_foliation, CurvedTestFoliation, Foliation, TimeFunction};
use relbohm::presets;

fn main() -> relbohm::Result<()> {
    let psi = presets::epr_pair(2.0)?;
    let flat: Foliation = extract_foliation(&psi)?.into();
    let curved: Foliation = CurvedTestFoliation::new(TimeFunction {
        amplitude: 0.3,
        wavenumber: 0.8,
        direction: [0.0, 0.6, 0.8],
    })?
    .into();
    let cfg = IntegratorConfig::with_step(5e-3);

    let mut histories = Vec::new();
    for f in [&flat, &curved] {
        let start = [f.point_on_leaf(0.0, [0.0; 3])?, f.point_on_leaf(0.0, [0.7, -0.3, 0.4])?];
        let h = integrate(&psi, f, &start, (0.0, 3.0), &cfg)?;
        for (k, x) in h.final_configuration().iter().enumerate() {
            println!("particle {k} ends at {x}");
        }
        histories.push(h);
    }
    for k in 0..2 {
        let d = hausdorff(histories[0].line(k), histories[1].line(k));
        println!("particle {k}: Hausdorff distance between foliations {d:.3e}");
    }
    Ok(())
}
