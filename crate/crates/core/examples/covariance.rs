//! Covariance checks on a pinned random suite, with and without an injected
//! fault.

use relbohm::covariance::{pinned_suite, run_suite, Fault, Harness, SuiteConfig};

fn main() -> relbohm::Result<()> {
    let cfg = SuiteConfig {
        cases: 6,
        ..SuiteConfig::default()
    };
    let cases = pinned_suite(&cfg)?;
    for harness in [Harness::SOUND, Harness::with_fault(Fault::FlippedSpinGenerator)] {
        let r = run_suite(&cases, &cfg, harness)?;
        println!("{:?}: pass = {}", harness, r.pass);
        for (check, worst) in &r.worst {
            println!("  {check:<15} {worst:.3e}");
        }
    }
    Ok(())
}
