//! Multi-time plane-wave states: Dirac residuals, currents and the total
//! momentum that fixes the foliation.

use num_complex::Complex64;
use relbohm::presets;
use relbohm::spacetime::FourVector;
use relbohm::wavefunction::{MultiTimeWaveFunction, PlaneWaveMode, Spin};

fn main() -> relbohm::Result<()> {
    let psi = MultiTimeWaveFunction::single_particle(vec![
        (
            Complex64::new(1.0, 0.0),
            PlaneWaveMode::new(1.0, [0.0, 0.0, 0.5], Spin::Up)?,
        ),
        (
            Complex64::new(0.0, 0.6),
            PlaneWaveMode::new(1.0, [0.3, 0.0, 0.0], Spin::Down)?,
        ),
    ])?;
    let x = [FourVector::new(0.2, 0.1, -0.4, 0.3)];
    println!("Dirac residual (h = 1e-4): {:.2e}", psi.dirac_residual(0, &x, 1e-4)?);
    let j = psi.current(&x[0])?;
    println!("current j = {j}, j² = {:.6}", j.square());
    println!("total momentum P = {}", psi.total_momentum()?);

    let pair = presets::epr_pair(2.0)?;
    let pts = [FourVector::ZERO, FourVector::new(0.0, 0.5, 0.0, 0.2)];
    let t = pair.current_tensor(&pts)?;
    println!("pair: J^{{00}} = {:.6}", t.get(&[0, 0]));
    Ok(())
}
