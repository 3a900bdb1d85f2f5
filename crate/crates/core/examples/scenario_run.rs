//! Runs a bundled scenario through the library API and prints its manifest.

use relbohm::scenario::{find_bundled, run, RunOptions};

fn main() -> relbohm::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "single-rest-particle".into());
    let bundled = find_bundled(&name).ok_or_else(|| relbohm::Error::Config(format!("no scenario {name}")))?;
    let dir = std::env::temp_dir().join(format!("relbohm-{name}"));
    let outcome = run(
        bundled.config()?,
        &RunOptions {
            output_dir: Some(dir),
            seed: None,
        },
    )?;
    println!("{}: {}", if outcome.pass { "ok" } else { "FAILED" }, outcome.message);
    for f in &outcome.manifest.files {
        println!("{:<20} {:>9} bytes  {}", f.name, f.bytes, f.sha256);
    }
    Ok(())
}
