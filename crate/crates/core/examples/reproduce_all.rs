// Every named preset, written as CSV, SVG and report files.
//
//     cargo run --example reproduce_all -- [out_dir]

use std::path::{Path, PathBuf};

use antdyn::analysis::CheckStatus;
use antdyn::harness::{run_preset, PRESET_NAMES};

pub fn run_example(out: &Path) -> antdyn::Result<Vec<(String, CheckStatus, Vec<PathBuf>)>> {
    PRESET_NAMES
        .iter()
        .map(|name| {
            let a = run_preset(name, out)?;
            Ok((name.to_string(), a.status(), a.files))
        })
        .collect()
}

fn main() -> antdyn::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "antdyn-out".into());
    for (name, status, files) in run_example(Path::new(&out))? {
        println!("{name}: {status}, {} files", files.len());
    }
    Ok(())
}
