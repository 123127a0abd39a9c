// Planar vector fields for sum and max saturation with d = (1, 1/2). Writes
// quiver plots and reports any zero of the field away from the two axis
// equilibria.
//
//     cargo run --example phase_portrait -- [out_dir]

use std::path::{Path, PathBuf};

use antdyn::harness::run_preset;

/// Spurious equilibria found for each planar preset (expected: none).
pub fn run_example(out: &Path) -> antdyn::Result<Vec<(String, usize, PathBuf)>> {
    let mut found = Vec::new();
    for name in ["phase-eigenant", "phase-maxant"] {
        let artifacts = run_preset(name, out)?;
        let phase = artifacts.outcome.phase.as_ref().expect("phase preset");
        found.push((name.to_string(), phase.spurious.len(), artifacts.dir.join("figure.svg")));
    }
    Ok(found)
}

fn main() -> antdyn::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "antdyn-out".into());
    for (name, spurious, svg) in run_example(Path::new(&out))? {
        println!("{name}: {spurious} spurious equilibria, plot at {}", svg.display());
    }
    Ok(())
}
